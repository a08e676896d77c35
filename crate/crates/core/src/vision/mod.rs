//! Background subtraction, blob labeling and seat assignment.
//!
//! A camera stream is processed as: the first (empty cabin) frame seeds a
//! [`MixtureModel`]; every later frame updates it and yields a
//! [`ForegroundMask`]; foreground pixels are grouped into 8-connected
//! [`Blob`]s; a seat counts as occupied when a blob centroid falls inside its
//! region of interest.

mod blobs;
mod detector;
mod frame;
mod mixture;
mod report;
mod seats;

pub use blobs::{extract_blobs, Blob, BoundingBox};
pub use detector::{evaluate_scenario, DetectorConfig, OccupancyDetector};
pub use frame::{ForegroundMask, Frame, MIN_FRAME_SIDE};
pub use mixture::{Gaussian, MixtureConfig, MixtureModel};
pub use report::{detection_rate, DetectionReport, DetectionRow};
pub use seats::{assign_blobs_to_seats, count_availability, Rect, SeatCounts, SeatMap, SeatOccupancy, SeatRoi};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VisionError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid seat map: {0}")]
    InvalidSeatMap(String),
    #[error("detection rate undefined for zero actual faces")]
    UndefinedRate,
}

pub type Result<T, E = VisionError> = std::result::Result<T, E>;
