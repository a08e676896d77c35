//! Spherical-earth geometry.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("coordinate out of range: lat {lat}, lon {lon}")]
pub struct CoordinateError {
    pub lat: f64,
    pub lon: f64,
}

/// Latitude and longitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon<T> {
    pub lat: T,
    pub lon: T,
}

impl<T: Scalar> LatLon<T> {
    pub fn new(lat: T, lon: T) -> Result<Self, CoordinateError> {
        let p = Self { lat, lon };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(CoordinateError { lat: lat.to_f64_lossy(), lon: lon.to_f64_lossy() })
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.abs() <= T::lit(90.0) && self.lon.abs() <= T::lit(180.0)
    }

    /// Great-circle distance in meters.
    pub fn distance_to(&self, other: &Self) -> T {
        haversine_distance(*self, *other)
    }
}

/// Great-circle distance in meters by the haversine formula.
pub fn haversine_distance<T: Scalar>(a: LatLon<T>, b: LatLon<T>) -> T {
    let two = T::lit(2.0);
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / two).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / two).sin().powi(2);
    two * T::lit(EARTH_RADIUS_M) * h.sqrt().min(T::one()).asin()
}

/// Linear interpolation in coordinate space, `t` in `[0, 1]`.
pub fn lerp<T: Scalar>(a: LatLon<T>, b: LatLon<T>, t: T) -> LatLon<T> {
    LatLon { lat: a.lat + (b.lat - a.lat) * t, lon: a.lon + (b.lon - a.lon) * t }
}
