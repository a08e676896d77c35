use fdf_core::vision::{DetectionReport, SeatMap};
use fdf_core::DetectorConfig;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{default_height, default_vision, default_width, Lighting};
use crate::render::CabinView;
use crate::runner::{Camera, SimError};
use crate::REPORT_PERIOD_S;

/// Default sweep: a 60-seat cabin from under half to nearly full.
pub const SWEEP_LEVELS: [usize; 6] = [25, 32, 36, 43, 49, 53];

fn default_levels() -> Vec<usize> {
    SWEEP_LEVELS.to_vec()
}

/// A single camera shown a cabin holding each of `levels` passengers in turn,
/// seated at random, one capture per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub seed: u64,
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[serde(default)]
    pub lighting: Lighting,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "default_width")]
    pub frame_width: usize,
    #[serde(default = "default_height")]
    pub frame_height: usize,
    #[serde(default = "default_vision")]
    pub vision: DetectorConfig,
}

impl SweepConfig {
    pub fn new(seed: u64, lighting: Lighting, noise_sigma: f64) -> Self {
        Self {
            seed,
            levels: default_levels(),
            lighting,
            noise_sigma,
            frame_width: default_width(),
            frame_height: default_height(),
            vision: default_vision(),
        }
    }

    pub fn view(&self) -> CabinView {
        CabinView {
            width: self.frame_width,
            height: self.frame_height,
            lighting: self.lighting,
            noise_sigma: self.noise_sigma,
        }
    }
}

/// Runs the sweep; rows record true occupants and how many of them were found.
pub fn run_sweep(config: &SweepConfig, seat_map: &SeatMap) -> Result<DetectionReport, SimError> {
    let view = config.view();
    seat_map.validate(Some((view.width, view.height)))?;
    if !(config.noise_sigma >= 0.0 && config.noise_sigma.is_finite()) {
        return Err(SimError::Config("noise_sigma must be a non-negative number".into()));
    }
    let total = seat_map.rois.len();
    if let Some(&level) = config.levels.iter().find(|&&l| l > total) {
        return Err(SimError::Config(format!("level {level} exceeds {total} seats")));
    }
    let mut camera = Camera::new(config.seed, 1, seat_map, &view, &config.vision)?;
    let mut seating = ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = DetectionReport::default();
    for (i, &level) in config.levels.iter().enumerate() {
        let mut seats = vec![false; total];
        for s in index::sample(&mut seating, total, level) {
            seats[s] = true;
        }
        let (_, detected) = camera.capture(&view, seat_map, &seats, REPORT_PERIOD_S * (i as u64 + 1))?;
        let found = seats.iter().zip(detected.seats()).filter(|(&a, &b)| a && b).count();
        report.push(level, found);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_sweep_is_exact() {
        let map = SeatMap::standard_60();
        for lighting in [Lighting::Day, Lighting::Night] {
            let report = run_sweep(&SweepConfig::new(4, lighting, 0.0), &map).unwrap();
            let actual: Vec<usize> = report.rows.iter().map(|r| r.actual).collect();
            assert_eq!(actual, SWEEP_LEVELS);
            assert!(report.rows.iter().all(|r| r.detected == r.actual && r.percentage == 100));
        }
    }

    #[test]
    fn rejects_levels_beyond_capacity() {
        let mut cfg = SweepConfig::new(1, Lighting::Day, 0.0);
        cfg.levels = vec![61];
        assert!(matches!(run_sweep(&cfg, &SeatMap::standard_60()), Err(SimError::Config(_))));
    }
}
