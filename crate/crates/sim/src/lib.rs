//! Fleet simulation: buses move along routes, passengers board and alight,
//! each bus's ceiling camera is rendered synthetically, and the occupancy
//! pipeline's counts are posted to the datacenter every 60 sim-seconds.

mod config;
mod render;
mod runner;
mod sweep;
mod trace;
mod world;

pub use config::{BusSpec, Demand, Lighting, ScenarioConfig, StopDemand};
pub use render::{ellipse_contains, render_cabin_frame, CabinView};
pub use runner::{
    run_scenario, Camera, InProcessSink, Observation, ReportSink, ScenarioOutcome, SimError, Simulation, SinkError,
};
pub use sweep::{run_sweep, SweepConfig, SWEEP_LEVELS};
pub use trace::{SimTrace, TraceEvent, TraceKind};
pub use world::{board_passengers, BusPhase, SimBus, WorldState};

/// Interval between camera captures and reports, in sim-seconds.
pub const REPORT_PERIOD_S: u64 = 60;
