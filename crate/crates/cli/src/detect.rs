use std::fs;

use anyhow::{anyhow, bail, Context};
use fdf_core::pgm;
use fdf_core::vision::{Frame, SeatMap};
use fdf_core::{DetectorConfig, OccupancyDetector};

use crate::eval::{write_rows, CountRow};
use crate::{Classify, CliError, DetectArgs};

/// Frames of one bus in timestamp order.
fn load_frames(dir: &std::path::Path) -> anyhow::Result<Vec<Frame>> {
    let mut named = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "pgm") {
            let (bus, ts) = pgm::parse_frame_name(&path)?;
            named.push((ts, bus, path));
        }
    }
    named.sort();
    if named.len() < 2 {
        bail!("{} holds {} frame(s); need the empty-cabin frame and at least one more", dir.display(), named.len());
    }
    if let Some(w) = named.windows(2).find(|w| w[0].1 != w[1].1 || w[0].0 == w[1].0) {
        bail!("frames must come from one bus with distinct timestamps ({} and {})", w[0].2.display(), w[1].2.display());
    }
    let frames = named.iter().map(|(_, _, p)| pgm::read_frame(p)).collect::<Result<Vec<_>, _>>()?;
    if let Some(f) = frames.iter().find(|f| !f.same_shape(&frames[0])) {
        bail!(
            "frame at t={} is {}x{}, expected {}x{}",
            f.timestamp(),
            f.width(),
            f.height(),
            frames[0].width(),
            frames[0].height()
        );
    }
    Ok(frames)
}

pub(crate) fn run(args: DetectArgs) -> Result<(), CliError> {
    let seat_map = SeatMap::load(&args.seat_map).input()?;
    let config = match &args.vision {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).input()?;
            let cfg: DetectorConfig = serde_json::from_str(&text).context("parsing vision config").input()?;
            cfg.mixture.validate().input()?;
            cfg
        }
        None => DetectorConfig::stream(),
    };
    let frames = load_frames(&args.frames).input()?;
    let mut detector = OccupancyDetector::new(&frames[0], seat_map, config).input()?;
    let rows = frames
        .iter()
        .map(|f| {
            let c = detector.detect(f)?.counts();
            Ok(CountRow { timestamp: f.timestamp(), occupied: c.occupied, empty: c.empty, total: c.total })
        })
        .collect::<Result<Vec<_>, fdf_core::vision::VisionError>>()
        .map_err(|e| anyhow!(e))
        .input()?;
    write_rows(&args.out, &rows).runtime()?;
    println!("{} frames counted", rows.len());
    Ok(())
}
