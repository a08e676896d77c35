use serde::{Deserialize, Serialize};

use super::{
    assign_blobs_to_seats, extract_blobs, DetectionReport, Frame, MixtureConfig, MixtureModel, Result, SeatMap,
    SeatOccupancy, VisionError,
};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct DetectorConfig<T> {
    pub mixture: MixtureConfig<T>,
    /// Blobs smaller than this (pixels) are treated as noise.
    pub min_area: usize,
}

impl<T: Scalar> Default for DetectorConfig<T> {
    fn default() -> Self {
        Self { mixture: MixtureConfig::default(), min_area: 30 }
    }
}

impl<T: Scalar> DetectorConfig<T> {
    /// Settings for a long-lived camera stream: foreground pixels do not feed
    /// the model, so seated passengers stay visible for the whole trip.
    pub fn stream() -> Self {
        Self {
            mixture: MixtureConfig { selective_update: true, ..MixtureConfig::default() },
            ..Self::default()
        }
    }
}

/// Background model plus seat layout for one camera stream.
///
/// Updates mutate the model, so a detector must see its frames in order.
#[derive(Debug, Clone)]
pub struct OccupancyDetector<T> {
    model: MixtureModel<T>,
    seat_map: SeatMap,
    min_area: usize,
}

impl<T: Scalar> OccupancyDetector<T> {
    /// `background` must show the empty cabin.
    pub fn new(background: &Frame, seat_map: SeatMap, config: DetectorConfig<T>) -> Result<Self> {
        if config.min_area == 0 {
            return Err(VisionError::Config("min_area must be at least 1".into()));
        }
        seat_map.validate(Some((background.width(), background.height())))?;
        Ok(Self { model: MixtureModel::init(background, config.mixture)?, seat_map, min_area: config.min_area })
    }

    pub fn detect(&mut self, frame: &Frame) -> Result<SeatOccupancy> {
        let mask = self.model.update(frame)?;
        let blobs = extract_blobs(&mask, self.min_area);
        Ok(assign_blobs_to_seats(&blobs, &self.seat_map))
    }

    pub fn model(&self) -> &MixtureModel<T> {
        &self.model
    }

    pub fn seat_map(&self) -> &SeatMap {
        &self.seat_map
    }
}

/// Runs the pipeline over a frame sequence (frame 0 seeds the background and
/// is then processed like every other frame) and scores each frame's occupied
/// count against ground truth.
pub fn evaluate_scenario<T: Scalar>(
    frames: &[Frame],
    truth: &[SeatOccupancy],
    seat_map: &SeatMap,
    config: DetectorConfig<T>,
) -> Result<DetectionReport> {
    if frames.len() != truth.len() {
        return Err(VisionError::Shape(format!("{} frames but {} truth entries", frames.len(), truth.len())));
    }
    let mut report = DetectionReport::default();
    let Some(first) = frames.first() else {
        return Ok(report);
    };
    if let Some(f) = frames.iter().find(|f| !f.same_shape(first)) {
        return Err(VisionError::Shape(format!(
            "frame at t={} is {}x{}, expected {}x{}",
            f.timestamp(),
            f.width(),
            f.height(),
            first.width(),
            first.height()
        )));
    }
    let mut detector = OccupancyDetector::new(first, seat_map.clone(), config)?;
    for (frame, truth) in frames.iter().zip(truth) {
        let detected = detector.detect(frame)?;
        report.push(truth.occupied(), detected.occupied());
    }
    Ok(report)
}
