//! Stops, routes and bus positions along them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_distance, lerp};
use crate::GeoPoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("no stops to search")]
    NoStops,
    #[error("offset {offset} m outside route of length {length} m")]
    OffsetOutOfRange { offset: f64, length: f64 },
    #[error("stop {stop_id} is not on route {route_id}")]
    NotOnRoute { stop_id: String, route_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub stop_id: String,
    pub name: String,
    #[serde(flatten)]
    pub location: GeoPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteStop {
    pub stop_id: String,
    /// Distance along the polyline in meters.
    pub offset_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub route_id: String,
    #[serde(with = "polyline_pairs")]
    pub polyline: Vec<GeoPoint>,
    pub stops: Vec<RouteStop>,
}

mod polyline_pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::GeoPoint;

    pub fn serialize<S: Serializer>(points: &[GeoPoint], s: S) -> Result<S::Ok, S::Error> {
        points.iter().map(|p| [p.lat, p.lon]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<GeoPoint>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[lat, lon]| GeoPoint { lat, lon }).collect())
    }
}

/// A broken route invariant, located by field path (e.g. `stops[1].offset_m`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl Route {
    /// Polyline length in meters.
    pub fn length(&self) -> f64 {
        self.polyline.windows(2).map(|w| haversine_distance(w[0], w[1])).sum()
    }

    pub fn stop_offset(&self, stop_id: &str) -> Option<f64> {
        self.stops.iter().find(|s| s.stop_id == stop_id).map(|s| s.offset_m)
    }

    pub fn stop_index(&self, stop_id: &str) -> Option<usize> {
        self.stops.iter().position(|s| s.stop_id == stop_id)
    }

    /// Whether `from` is visited strictly before `to`.
    pub fn connects(&self, from: &str, to: &str) -> bool {
        matches!((self.stop_index(from), self.stop_index(to)), (Some(a), Some(b)) if a < b)
    }

    /// Point `offset_m` meters along the route, interpolated linearly in
    /// lat/lon within the containing segment.
    pub fn position_at(&self, offset_m: f64) -> Result<GeoPoint, RouteError> {
        let length = self.length();
        if !(0.0..=length).contains(&offset_m) {
            return Err(RouteError::OffsetOutOfRange { offset: offset_m, length });
        }
        let mut start = 0.0;
        for w in self.polyline.windows(2) {
            let seg = haversine_distance(w[0], w[1]);
            if offset_m <= start + seg {
                let t = if seg > 0.0 { ((offset_m - start) / seg).clamp(0.0, 1.0) } else { 0.0 };
                return Ok(lerp(w[0], w[1], t));
            }
            start += seg;
        }
        Ok(*self.polyline.last().expect("validated route has points"))
    }

    /// Offset of the polyline point closest to `p`, using a local flat-earth
    /// projection per segment.
    pub fn project(&self, p: GeoPoint) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let mut start = 0.0;
        for w in self.polyline.windows(2) {
            let seg = haversine_distance(w[0], w[1]);
            let scale = w[0].lat.to_radians().cos();
            let (bx, by) = ((w[1].lon - w[0].lon) * scale, w[1].lat - w[0].lat);
            let (px, py) = ((p.lon - w[0].lon) * scale, p.lat - w[0].lat);
            let norm = bx * bx + by * by;
            let t = if norm > 0.0 { ((px * bx + py * by) / norm).clamp(0.0, 1.0) } else { 0.0 };
            let d = haversine_distance(p, lerp(w[0], w[1], t));
            if d < best.0 {
                best = (d, start + t * seg);
            }
            start += seg;
        }
        best.1
    }

    /// Every broken invariant; empty when the route is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.route_id.trim().is_empty() {
            out.push(Violation::new("route_id", "route id is empty"));
        }
        if self.polyline.len() < 2 {
            out.push(Violation::new("polyline", "polyline too short"));
        }
        for (i, p) in self.polyline.iter().enumerate() {
            if p.lat.is_nan() || p.lat.abs() > 90.0 {
                out.push(Violation::new(format!("polyline[{i}].lat"), "latitude out of range"));
            }
            if p.lon.is_nan() || p.lon.abs() > 180.0 {
                out.push(Violation::new(format!("polyline[{i}].lon"), "longitude out of range"));
            }
        }
        for (i, w) in self.polyline.windows(2).enumerate() {
            if w[0] == w[1] {
                out.push(Violation::new(format!("polyline[{}]", i + 1), "consecutive points identical"));
            }
        }
        if self.stops.is_empty() {
            out.push(Violation::new("stops", "route has no stops"));
        }
        let mut seen = BTreeSet::new();
        for (i, s) in self.stops.iter().enumerate() {
            if s.stop_id.trim().is_empty() {
                out.push(Violation::new(format!("stops[{i}].stop_id"), "stop id is empty"));
            }
            if !seen.insert(s.stop_id.as_str()) {
                out.push(Violation::new(format!("stops[{i}].stop_id"), "stop listed twice"));
            }
            if !s.offset_m.is_finite() {
                out.push(Violation::new(format!("stops[{i}].offset_m"), "offset not finite"));
            }
        }
        if let Some(first) = self.stops.first() {
            if first.offset_m < 0.0 {
                out.push(Violation::new("stops[0].offset_m", "offset negative"));
            }
        }
        for (i, w) in self.stops.windows(2).enumerate() {
            if w[1].offset_m.partial_cmp(&w[0].offset_m) != Some(std::cmp::Ordering::Greater) {
                out.push(Violation::new(format!("stops[{}].offset_m", i + 1), "offsets not increasing"));
            }
        }
        if self.polyline.len() >= 2 && out.is_empty() {
            let length = self.length();
            if let Some(last) = self.stops.last() {
                if last.offset_m > length {
                    out.push(Violation::new(
                        format!("stops[{}].offset_m", self.stops.len() - 1),
                        format!("offset beyond route length {length:.1} m"),
                    ));
                }
            }
        }
        out
    }
}

/// Closest stop to `p`; equal distances resolve to the smallest `stop_id`.
pub fn nearest_stop<'a>(p: GeoPoint, stops: impl IntoIterator<Item = &'a Stop>) -> Result<(&'a Stop, f64), RouteError> {
    let mut best: Option<(&Stop, f64)> = None;
    for s in stops {
        let d = haversine_distance(p, s.location);
        best = match best {
            Some((b, bd)) if bd < d || (bd == d && b.stop_id <= s.stop_id) => Some((b, bd)),
            _ => Some((s, d)),
        };
    }
    best.ok_or(RouteError::NoStops)
}

/// Live position and load of a bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusState {
    pub bus_id: String,
    pub route_id: String,
    pub offset_m: f64,
    pub speed_mps: f64,
    pub seat_total: usize,
    pub onboard: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "seconds")]
pub enum Eta {
    Seconds(f64),
    AlreadyPassed,
    /// The bus is stationary short of the stop.
    Unknown,
}

impl Eta {
    pub fn seconds(&self) -> Option<f64> {
        match self {
            Eta::Seconds(s) => Some(*s),
            _ => None,
        }
    }
}

/// Travel time to `stop_id`, ignoring dwell time and traffic.
pub fn eta_to_stop(bus: &BusState, route: &Route, stop_id: &str) -> Result<Eta, RouteError> {
    let stop = route.stop_offset(stop_id).ok_or_else(|| RouteError::NotOnRoute {
        stop_id: stop_id.into(),
        route_id: route.route_id.clone(),
    })?;
    let ahead = stop - bus.offset_m;
    Ok(if ahead < 0.0 {
        Eta::AlreadyPassed
    } else if ahead == 0.0 {
        Eta::Seconds(0.0)
    } else if bus.speed_mps > 0.0 {
        Eta::Seconds(ahead / bus.speed_mps)
    } else {
        Eta::Unknown
    })
}

/// A bus as registered with the bus station server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusRegistration {
    pub bus_id: String,
    pub route_id: String,
    pub seat_total: usize,
}

/// The route network file: stops, routes over them, and optionally the buses running them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RouteNetwork {
    pub stops: Vec<Stop>,
    pub routes: Vec<Route>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub buses: Vec<BusRegistration>,
}

impl RouteNetwork {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn stop(&self, stop_id: &str) -> Option<&Stop> {
        self.stops.iter().find(|s| s.stop_id == stop_id)
    }

    pub fn route(&self, route_id: &str) -> Option<&Route> {
        self.routes.iter().find(|r| r.route_id == route_id)
    }

    /// Route violations plus cross-references that do not resolve.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut ids = BTreeSet::new();
        for (i, s) in self.stops.iter().enumerate() {
            if !ids.insert(s.stop_id.as_str()) {
                out.push(Violation::new(format!("stops[{i}].stop_id"), "duplicate stop id"));
            }
            if !s.location.is_valid() {
                out.push(Violation::new(format!("stops[{i}]"), "coordinate out of range"));
            }
        }
        let mut route_ids = BTreeSet::new();
        for (r, route) in self.routes.iter().enumerate() {
            if !route_ids.insert(route.route_id.as_str()) {
                out.push(Violation::new(format!("routes[{r}].route_id"), "duplicate route id"));
            }
            for v in route.validate() {
                out.push(Violation::new(format!("routes[{r}].{}", v.path), v.message));
            }
            for (i, s) in route.stops.iter().enumerate() {
                if !ids.contains(s.stop_id.as_str()) {
                    out.push(Violation::new(format!("routes[{r}].stops[{i}].stop_id"), "unknown stop"));
                }
            }
        }
        for (b, bus) in self.buses.iter().enumerate() {
            if !route_ids.contains(bus.route_id.as_str()) {
                out.push(Violation::new(format!("buses[{b}].route_id"), "unknown route"));
            }
        }
        out
    }
}
