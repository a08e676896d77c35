use std::collections::{BTreeMap, BTreeSet};

use fdf_core::route::{BusRegistration, RouteNetwork};
use fdf_core::DetectorConfig;
use serde::{Deserialize, Serialize};

use crate::render::CabinView;
use crate::REPORT_PERIOD_S;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lighting {
    #[default]
    Day,
    Night,
}

impl Lighting {
    /// Cabin luminance with no passengers.
    pub fn background(self) -> u8 {
        match self {
            Lighting::Day => 80,
            Lighting::Night => 30,
        }
    }

    /// Luminance of a seated passenger.
    pub fn foreground(self) -> u8 {
        match self {
            Lighting::Day => 170,
            Lighting::Night => 190,
        }
    }

    /// Sensor noise for a configured sigma; night footage is half as noisy.
    pub fn noise(self, sigma: f64) -> f64 {
        match self {
            Lighting::Day => sigma,
            Lighting::Night => sigma / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusSpec {
    pub bus_id: String,
    pub route_id: String,
    /// Seat map reference; informational, the runner is given the map itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seat_map: Option<String>,
    #[serde(default)]
    pub depart_s: u64,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StopDemand {
    pub boarding_rate: Option<f64>,
    pub alighting_prob: Option<f64>,
}

/// Passenger demand. Boarding at a stop visit is Poisson with mean
/// `boarding_rate` (passengers/minute) times the minutes since the stop was
/// last served (at least one); each onboard passenger alights with
/// `alighting_prob`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Demand {
    pub boarding_rate: f64,
    pub alighting_prob: f64,
    pub stops: BTreeMap<String, StopDemand>,
}

impl Default for Demand {
    fn default() -> Self {
        Self { boarding_rate: 1.0, alighting_prob: 0.2, stops: BTreeMap::new() }
    }
}

impl Demand {
    pub fn boarding_rate(&self, stop_id: &str) -> f64 {
        self.stops.get(stop_id).and_then(|s| s.boarding_rate).unwrap_or(self.boarding_rate)
    }

    pub fn alighting_prob(&self, stop_id: &str) -> f64 {
        self.stops.get(stop_id).and_then(|s| s.alighting_prob).unwrap_or(self.alighting_prob)
    }
}

pub(crate) fn default_tick() -> u64 {
    10
}

pub(crate) fn default_width() -> usize {
    320
}

pub(crate) fn default_height() -> usize {
    240
}

pub(crate) fn default_vision() -> DetectorConfig {
    DetectorConfig::stream()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub duration_s: u64,
    #[serde(default = "default_tick")]
    pub tick_s: u64,
    #[serde(default)]
    pub lighting: Lighting,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "default_width")]
    pub frame_width: usize,
    #[serde(default = "default_height")]
    pub frame_height: usize,
    pub network: RouteNetwork,
    pub buses: Vec<BusSpec>,
    #[serde(default)]
    pub demand: Demand,
    #[serde(default = "default_vision")]
    pub vision: DetectorConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.tick_s == 0 || !REPORT_PERIOD_S.is_multiple_of(self.tick_s) {
            return Err(format!("tick_s {} must divide {REPORT_PERIOD_S}", self.tick_s));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err("noise_sigma must be a non-negative number".into());
        }
        let violations = self.network.validate();
        if let Some(v) = violations.first() {
            return Err(format!("network: {v} ({} violation(s))", violations.len()));
        }
        let rate_ok = |r: f64| r >= 0.0 && r.is_finite();
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !rate_ok(self.demand.boarding_rate) || !prob_ok(self.demand.alighting_prob) {
            return Err("demand rates must be >= 0 and probabilities in [0, 1]".into());
        }
        for (stop, d) in &self.demand.stops {
            if !d.boarding_rate.is_none_or(rate_ok) || !d.alighting_prob.is_none_or(prob_ok) {
                return Err(format!("demand for stop {stop} out of range"));
            }
        }
        let mut ids = BTreeSet::new();
        for b in &self.buses {
            if !ids.insert(&b.bus_id) {
                return Err(format!("bus {} listed twice", b.bus_id));
            }
            if self.network.route(&b.route_id).is_none() {
                return Err(format!("bus {} runs unknown route {}", b.bus_id, b.route_id));
            }
            if !(b.speed_mps >= 0.0 && b.speed_mps.is_finite()) {
                return Err(format!("bus {} has an invalid speed", b.bus_id));
            }
        }
        self.vision.mixture.validate().map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn view(&self) -> CabinView {
        CabinView {
            width: self.frame_width,
            height: self.frame_height,
            lighting: self.lighting,
            noise_sigma: self.noise_sigma,
        }
    }

    pub fn registrations(&self, seat_total: usize) -> Vec<BusRegistration> {
        self.buses
            .iter()
            .map(|b| BusRegistration { bus_id: b.bus_id.clone(), route_id: b.route_id.clone(), seat_total })
            .collect()
    }
}
