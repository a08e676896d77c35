use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{Result, VisionError};

/// Integer percentage of actual occupants that were detected, truncated:
/// 45 of 49 is 91, not 92.
pub fn detection_rate(actual: usize, detected: usize) -> Result<u32> {
    if actual == 0 {
        return Err(VisionError::UndefinedRate);
    }
    Ok((100 * detected as u64 / actual as u64) as u32)
}

/// One `actual,detected,missed,percentage` row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub actual: usize,
    /// Capped at `actual`; the excess is in `false_positives`.
    pub detected: usize,
    pub missed: usize,
    pub percentage: u32,
    #[serde(skip)]
    pub false_positives: usize,
}

impl DetectionRow {
    /// Builds a row from ground truth and the raw pipeline count.
    pub fn from_counts(actual: usize, raw_detected: usize) -> Result<Self> {
        let detected = raw_detected.min(actual);
        Ok(Self {
            actual,
            detected,
            missed: actual - detected,
            percentage: detection_rate(actual, detected)?,
            false_positives: raw_detected.saturating_sub(actual),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DetectionReport {
    pub rows: Vec<DetectionRow>,
}

impl DetectionReport {
    /// Appends a row; rows with no actual faces carry no rate and are skipped.
    pub fn push(&mut self, actual: usize, raw_detected: usize) {
        if actual > 0 {
            self.rows.push(DetectionRow::from_counts(actual, raw_detected).expect("actual > 0"));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Mean of the per-row percentages, `None` for an empty report.
    pub fn mean_percentage(&self) -> Option<f64> {
        if self.rows.is_empty() {
            return None;
        }
        Some(self.rows.iter().map(|r| r.percentage as f64).sum::<f64>() / self.rows.len() as f64)
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = io::BufWriter::new(out);
        w.write_all(b"actual,detected,missed,percentage\n")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.actual, r.detected, r.missed, r.percentage)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii csv")
    }
}
