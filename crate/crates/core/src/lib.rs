//! Seat occupancy detection for bus cabin cameras, plus the transit geometry
//! (stops, routes, distances, arrival estimates) shared by the datacenter and
//! the fleet simulator.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below pin the `f64` instantiation used everywhere else in the workspace.

pub mod geo;
#[cfg(any(test, feature = "oracles"))]
pub mod oracle;
pub mod pgm;
pub mod route;
pub mod scalar;
pub mod vision;

pub use scalar::Scalar;

/// Latitude/longitude in degrees, double precision.
pub type GeoPoint = geo::LatLon<f64>;
/// Single precision geographic point.
pub type GeoPointF32 = geo::LatLon<f32>;

/// Per-pixel mixture-of-Gaussians background model, double precision.
pub type BackgroundModel = vision::MixtureModel<f64>;
/// Single precision background model (half the memory per pixel).
pub type BackgroundModelF32 = vision::MixtureModel<f32>;
pub type MixtureConfig = vision::MixtureConfig<f64>;
pub type MixtureConfigF32 = vision::MixtureConfig<f32>;
pub type DetectorConfig = vision::DetectorConfig<f64>;
pub type OccupancyDetector = vision::OccupancyDetector<f64>;
