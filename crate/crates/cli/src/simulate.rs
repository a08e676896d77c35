use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use fdf_core::vision::SeatMap;
use fdf_datacenter::Datacenter;
use fdf_sim::{run_sweep, InProcessSink, ReportSink, ScenarioConfig, SimError, SimTrace, Simulation, SweepConfig};

use crate::eval::{write_rows, TruthRow};
use crate::{Classify, CliError, HttpSink, SimulateArgs};

fn write_trace(path: &Path, trace: &SimTrace) -> Result<(), CliError> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display())).runtime()?;
    trace.write_jsonl(BufWriter::new(file)).runtime()
}

fn write_report(path: &Path, report: &fdf_core::vision::DetectionReport) -> Result<(), CliError> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display())).runtime()?;
    report.write_csv(file).runtime()?;
    match report.mean_percentage() {
        Some(m) => println!("{} scored captures, mean detection rate {m:.2}%", report.rows.len()),
        None => println!("no capture had occupants; nothing to score"),
    }
    Ok(())
}

pub(crate) fn run(args: SimulateArgs) -> Result<(), CliError> {
    let seat_map = SeatMap::load(&args.seat_map).input()?;
    let text = fs::read_to_string(&args.scenario)
        .with_context(|| format!("reading {}", args.scenario.display()))
        .input()?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display())).runtime()?;

    if args.sweep {
        let cfg: SweepConfig = serde_json::from_str(&text).context("parsing sweep config").input()?;
        let report = run_sweep(&cfg, &seat_map).map_err(|e| anyhow!(e)).input()?;
        return write_report(&args.out.join("report.csv"), &report);
    }

    let cfg = ScenarioConfig::from_json(&text).map_err(|e| anyhow!(e)).input()?;
    let mut sim = Simulation::new(cfg.clone(), seat_map).map_err(|e| anyhow!(e)).input()?;
    if let Some(dir) = &args.frames {
        sim = sim.dump_frames(dir.clone());
    }
    let mut sink: Box<dyn ReportSink> = if args.in_process {
        Box::new(InProcessSink::new(Arc::new(Datacenter::in_memory())))
    } else {
        Box::new(HttpSink::new(&args.addr))
    };
    let outcome = match sim.run(sink.as_mut()) {
        Ok(o) => o,
        Err(SimError::Transport { t, source, partial }) => {
            write_trace(&args.out.join("trace.jsonl"), &partial)?;
            return Err(CliError::Runtime(anyhow!("datacenter unreachable at t={t}: {source} (partial trace written)")));
        }
        Err(e) => return Err(CliError::Runtime(anyhow!(e))),
    };

    write_trace(&args.out.join("trace.jsonl"), &outcome.trace)?;
    if let Some(dir) = &args.frames {
        for bus in &cfg.buses {
            let mut rows = vec![TruthRow { timestamp: 0, occupied: 0 }];
            rows.extend(
                outcome
                    .observations
                    .iter()
                    .filter(|o| o.bus_id == bus.bus_id)
                    .map(|o| TruthRow { timestamp: o.t, occupied: o.truth.occupied() }),
            );
            write_rows(&dir.join(&bus.bus_id).join("truth.csv"), &rows).runtime()?;
        }
    }
    write_report(&args.out.join("report.csv"), &outcome.report)
}
