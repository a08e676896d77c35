use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context};
use fdf_core::vision::DetectionReport;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Classify, CliError, EvalArgs};

/// A row of `detect` output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct CountRow {
    pub timestamp: u64,
    pub occupied: usize,
    pub empty: usize,
    pub total: usize,
}

/// Ground-truth occupant count for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct TruthRow {
    pub timestamp: u64,
    pub occupied: usize,
}

pub(crate) fn read_rows<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

/// Pairs truth and counts frame by frame; both files must list the same timestamps.
pub(crate) fn score(truth: &[TruthRow], counts: &[CountRow]) -> anyhow::Result<DetectionReport> {
    if truth.len() != counts.len() {
        bail!("{} truth rows but {} count rows", truth.len(), counts.len());
    }
    let mut report = DetectionReport::default();
    for (i, (t, c)) in truth.iter().zip(counts).enumerate() {
        if t.timestamp != c.timestamp {
            bail!("row {}: truth is for t={} but counts are for t={}", i + 1, t.timestamp, c.timestamp);
        }
        report.push(t.occupied, c.occupied);
    }
    Ok(report)
}

pub(crate) fn run(args: EvalArgs) -> Result<(), CliError> {
    let truth: Vec<TruthRow> = read_rows(&args.truth).input()?;
    let counts: Vec<CountRow> = read_rows(&args.counts).input()?;
    let report = score(&truth, &counts).input()?;
    let out = File::create(&args.out).with_context(|| format!("creating {}", args.out.display())).runtime()?;
    report.write_csv(out).runtime()?;
    match report.mean_percentage() {
        Some(m) => println!("{} scored frames, mean detection rate {m:.2}%", report.rows.len()),
        None => println!("no frame had occupants; nothing to score"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_beyond_truth_are_capped() {
        let truth = [TruthRow { timestamp: 0, occupied: 0 }, TruthRow { timestamp: 60, occupied: 49 }];
        let counts = [
            CountRow { timestamp: 0, occupied: 1, empty: 59, total: 60 },
            CountRow { timestamp: 60, occupied: 45, empty: 15, total: 60 },
        ];
        let report = score(&truth, &counts).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!((report.rows[0].detected, report.rows[0].percentage), (45, 91));
    }

    #[test]
    fn misaligned_inputs_are_rejected() {
        let truth = [TruthRow { timestamp: 60, occupied: 3 }];
        let counts = [CountRow { timestamp: 120, occupied: 3, empty: 57, total: 60 }];
        assert!(score(&truth, &counts).is_err());
        assert!(score(&truth, &[]).is_err());
    }
}
