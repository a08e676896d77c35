use std::path::PathBuf;
use std::sync::Arc;

use fdf_core::pgm::{self, PgmError};
use fdf_core::route::{BusRegistration, RouteNetwork};
use fdf_core::vision::{DetectionReport, Frame, SeatMap, SeatOccupancy, VisionError};
use fdf_core::{DetectorConfig, OccupancyDetector};
use fdf_datacenter::{BusReport, Datacenter};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::render::CabinView;
use crate::trace::{SimTrace, TraceKind};
use crate::world::{BusPhase, SimBus, WorldState};
use crate::REPORT_PERIOD_S;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct SinkError(pub String);

/// Destination for bus reports: the datacenter in-process or over HTTP.
pub trait ReportSink {
    /// Called once before the first report.
    fn register(&mut self, network: &RouteNetwork, buses: &[BusRegistration]) -> Result<(), SinkError>;
    /// Returns the availability version the report produced.
    fn post(&mut self, report: &BusReport) -> Result<u64, SinkError>;
}

pub struct InProcessSink {
    datacenter: Arc<Datacenter>,
}

impl InProcessSink {
    pub fn new(datacenter: Arc<Datacenter>) -> Self {
        Self { datacenter }
    }

    pub fn datacenter(&self) -> &Arc<Datacenter> {
        &self.datacenter
    }
}

impl ReportSink for InProcessSink {
    fn register(&mut self, network: &RouteNetwork, buses: &[BusRegistration]) -> Result<(), SinkError> {
        let err = |e: fdf_datacenter::DatacenterError| SinkError(e.to_string());
        self.datacenter.register_network(network).map_err(err)?;
        for b in buses {
            self.datacenter.register_bus(b.clone()).map_err(err)?;
        }
        Ok(())
    }

    fn post(&mut self, report: &BusReport) -> Result<u64, SinkError> {
        self.datacenter.ingest_report(report.clone()).map_err(|e| SinkError(e.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Vision(#[from] VisionError),
    #[error(transparent)]
    Frames(#[from] PgmError),
    /// The sink failed; the trace up to the failure is attached.
    #[error("report sink failed at t={t}: {source}")]
    Transport { t: u64, source: SinkError, partial: Box<SimTrace> },
}

/// One bus's ceiling camera and the occupancy pipeline behind it.
pub struct Camera {
    detector: OccupancyDetector,
    rng: ChaCha8Rng,
}

impl Camera {
    /// Learns the background from an empty cabin. Each camera draws its sensor
    /// noise from its own stream of `seed`.
    pub fn new(
        seed: u64,
        stream: u64,
        seat_map: &SeatMap,
        view: &CabinView,
        vision: &DetectorConfig,
    ) -> Result<Self, SimError> {
        Self::warm_up(seed, stream, seat_map, view, vision).map(|(camera, _)| camera)
    }

    /// Like [`Camera::new`], also returning the empty-cabin frame (timestamp 0).
    pub fn warm_up(
        seed: u64,
        stream: u64,
        seat_map: &SeatMap,
        view: &CabinView,
        vision: &DetectorConfig,
    ) -> Result<(Self, Frame), SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let empty = vec![false; seat_map.rois.len()];
        let frame = view.render(seat_map, &empty, &mut rng, 0)?;
        let detector = OccupancyDetector::new(&frame, seat_map.clone(), *vision)?;
        Ok((Self { detector, rng }, frame))
    }

    /// Renders the cabin as it truly is and runs detection on it.
    pub fn capture(
        &mut self,
        view: &CabinView,
        seat_map: &SeatMap,
        seats: &[bool],
        t: u64,
    ) -> Result<(Frame, SeatOccupancy), SimError> {
        let frame = view.render(seat_map, seats, &mut self.rng, t)?;
        let occupancy = self.detector.detect(&frame)?;
        Ok((frame, occupancy))
    }
}

/// Truth and detection for one capture.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub t: u64,
    pub bus_id: String,
    pub truth: SeatOccupancy,
    pub detected: SeatOccupancy,
    pub version: u64,
}

impl Observation {
    /// Seats both truly and detectedly occupied.
    pub fn true_positives(&self) -> usize {
        self.truth.seats().iter().zip(self.detected.seats()).filter(|(&a, &b)| a && b).count()
    }

    pub fn false_positives(&self) -> usize {
        self.truth.seats().iter().zip(self.detected.seats()).filter(|(&a, &b)| !a && b).count()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub trace: SimTrace,
    /// One row per capture with at least one passenger; detected counts only
    /// seats that are truly occupied.
    pub report: DetectionReport,
    pub observations: Vec<Observation>,
}

pub struct Simulation {
    config: ScenarioConfig,
    seat_map: SeatMap,
    world: WorldState,
    cameras: Vec<Camera>,
    // Empty-cabin frames, kept only until they are dumped.
    warm_up: Vec<Frame>,
    trace: SimTrace,
    report: DetectionReport,
    observations: Vec<Observation>,
    frame_dir: Option<PathBuf>,
    registered: bool,
}

impl Simulation {
    pub fn new(config: ScenarioConfig, seat_map: SeatMap) -> Result<Self, SimError> {
        config.validate().map_err(SimError::Config)?;
        seat_map.validate(Some((config.frame_width, config.frame_height)))?;
        let (cameras, warm_up) = (0..config.buses.len())
            .into_par_iter()
            .map(|i| Camera::warm_up(config.seed, i as u64 + 1, &seat_map, &config.view(), &config.vision))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .unzip();
        let world = WorldState::new(&config, seat_map.rois.len());
        Ok(Self {
            config,
            seat_map,
            world,
            cameras,
            warm_up,
            trace: SimTrace::default(),
            report: DetectionReport::default(),
            observations: Vec::new(),
            frame_dir: None,
            registered: false,
        })
    }

    /// Also write every frame, starting with the empty-cabin frame at t=0, as
    /// `<dir>/<bus>/<bus>_<t>.pgm`.
    pub fn dump_frames(mut self, dir: PathBuf) -> Self {
        self.frame_dir = Some(dir);
        self
    }

    fn dump(&self, bus_id: &str, frame: &Frame) -> Result<(), SimError> {
        if let Some(dir) = &self.frame_dir {
            let dir = dir.join(bus_id);
            std::fs::create_dir_all(&dir).map_err(|source| PgmError::Io { path: dir.clone(), source })?;
            pgm::write_frame(&dir, bus_id, frame)?;
        }
        Ok(())
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn trace(&self) -> &SimTrace {
        &self.trace
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn is_done(&self) -> bool {
        self.world.clock + self.config.tick_s > self.config.duration_s
    }

    /// One tick; on capture ticks every active bus renders, detects and reports.
    pub fn advance(&mut self, sink: &mut dyn ReportSink) -> Result<(), SimError> {
        if !self.registered {
            let regs = self.config.registrations(self.seat_map.rois.len());
            sink.register(&self.config.network, &regs).map_err(|e| self.transport(e))?;
            self.registered = true;
            for (bus, frame) in self.config.buses.iter().zip(std::mem::take(&mut self.warm_up)) {
                self.dump(&bus.bus_id, &frame)?;
            }
        }
        self.world.step(&self.config, &mut self.trace);
        let t = self.world.clock;
        if !t.is_multiple_of(REPORT_PERIOD_S) {
            return Ok(());
        }

        let (view, seat_map) = (self.config.view(), &self.seat_map);
        let captures: Vec<Option<(Frame, SeatOccupancy)>> = self
            .cameras
            .par_iter_mut()
            .zip(self.world.buses.par_iter())
            .map(|(camera, bus)| {
                (bus.phase == BusPhase::Active)
                    .then(|| camera.capture(&view, seat_map, &bus.seats, t))
                    .transpose()
            })
            .collect::<Result<_, _>>()?;

        for (i, capture) in captures.into_iter().enumerate() {
            let Some((frame, detected)) = capture else { continue };
            let bus = &self.world.buses[i];
            let bus_id = bus.state.bus_id.clone();
            self.trace.push(t, &bus_id, TraceKind::FrameEmitted { truth_occupied: bus.occupied() });
            self.dump(&bus_id, &frame)?;
            let report = bus_report(bus, &detected, t);
            let version = match sink.post(&report) {
                Ok(v) => v,
                Err(e) => return Err(self.transport(e)),
            };
            let counts = report.occupancy;
            self.trace.push(
                t,
                &bus_id,
                TraceKind::ReportPosted { occupied: counts.occupied, empty: counts.empty, total: counts.total, version },
            );
            let obs = Observation {
                t,
                bus_id,
                truth: SeatOccupancy::new(self.world.buses[i].seats.clone()),
                detected,
                version,
            };
            self.report.push(obs.truth.occupied(), obs.true_positives());
            self.observations.push(obs);
        }
        Ok(())
    }

    pub fn run(mut self, sink: &mut dyn ReportSink) -> Result<ScenarioOutcome, SimError> {
        while !self.is_done() {
            self.advance(sink)?;
        }
        Ok(ScenarioOutcome { trace: self.trace, report: self.report, observations: self.observations })
    }

    fn transport(&self, source: SinkError) -> SimError {
        SimError::Transport { t: self.world.clock, source, partial: Box::new(self.trace.clone()) }
    }
}

fn bus_report(bus: &SimBus, detected: &SeatOccupancy, t: u64) -> BusReport {
    let position = bus.route().position_at(bus.state.offset_m).expect("offset stays on the route");
    BusReport {
        bus_id: bus.state.bus_id.clone(),
        timestamp: t,
        position,
        occupancy: detected.counts(),
        offset_m: Some(bus.state.offset_m),
        speed_mps: Some(bus.state.speed_mps),
    }
}

/// Runs a scenario to completion against `sink`.
pub fn run_scenario(
    config: ScenarioConfig,
    seat_map: SeatMap,
    sink: &mut dyn ReportSink,
) -> Result<ScenarioOutcome, SimError> {
    Simulation::new(config, seat_map)?.run(sink)
}
