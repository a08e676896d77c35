use std::collections::HashMap;

use fdf_core::route::{BusState, Route};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Poisson};

use crate::config::ScenarioConfig;
use crate::trace::{SimTrace, TraceKind};

// Offsets closer than this are treated as the same point on the route.
const OFFSET_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusPhase {
    Waiting,
    Active,
    Finished,
}

#[derive(Debug, Clone)]
pub struct SimBus {
    pub state: BusState,
    /// Ground truth, one flag per seat in seat-map order.
    pub seats: Vec<bool>,
    pub phase: BusPhase,
    pub depart_s: u64,
    route: Route,
    next_stop: usize,
}

impl SimBus {
    pub fn route(&self) -> &Route {
        &self.route
    }

    pub fn occupied(&self) -> usize {
        self.seats.iter().filter(|&&s| s).count()
    }
}

/// Seats `demand` passengers on uniformly chosen empty seats, as many as fit.
pub fn board_passengers<R: Rng + ?Sized>(seats: &mut [bool], demand: usize, rng: &mut R) -> usize {
    let mut empty: Vec<usize> = seats.iter().enumerate().filter(|(_, &o)| !o).map(|(i, _)| i).collect();
    let n = demand.min(empty.len());
    let (chosen, _) = empty.partial_shuffle(rng, n);
    for &i in chosen.iter() {
        seats[i] = true;
    }
    n
}

/// Ground-truth fleet state advanced in fixed ticks.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub clock: u64,
    pub buses: Vec<SimBus>,
    last_served: HashMap<String, u64>,
    rng: ChaCha8Rng,
}

impl WorldState {
    /// Every bus waits at its depot, empty. The config must already be validated.
    pub fn new(config: &ScenarioConfig, seat_total: usize) -> Self {
        let buses = config
            .buses
            .iter()
            .map(|b| SimBus {
                state: BusState {
                    bus_id: b.bus_id.clone(),
                    route_id: b.route_id.clone(),
                    offset_m: 0.0,
                    speed_mps: 0.0,
                    seat_total,
                    onboard: 0,
                },
                seats: vec![false; seat_total],
                phase: BusPhase::Waiting,
                depart_s: b.depart_s,
                route: config.network.route(&b.route_id).expect("validated route").clone(),
                next_stop: 0,
            })
            .collect();
        Self { clock: 0, buses, last_served: HashMap::new(), rng: ChaCha8Rng::seed_from_u64(config.seed) }
    }

    /// Advances one tick. A waiting bus departs on the first tick at or after
    /// its departure time and serves the stops at its starting point; an
    /// active bus moves `speed * tick` and serves every stop it reaches.
    pub fn step(&mut self, config: &ScenarioConfig, trace: &mut SimTrace) {
        self.clock += config.tick_s;
        let now = self.clock;
        for i in 0..self.buses.len() {
            let speed = config.buses[i].speed_mps;
            let bus = &mut self.buses[i];
            match bus.phase {
                BusPhase::Finished => continue,
                BusPhase::Waiting if bus.depart_s > now => continue,
                BusPhase::Waiting => {
                    bus.phase = BusPhase::Active;
                    bus.state.speed_mps = speed;
                    trace.push(now, &bus.state.bus_id, TraceKind::Depart);
                }
                BusPhase::Active => {
                    let length = bus.route.length();
                    bus.state.offset_m = (bus.state.offset_m + speed * config.tick_s as f64).min(length);
                }
            }
            self.serve_stops(i, config, trace);
        }
    }

    fn serve_stops(&mut self, i: usize, config: &ScenarioConfig, trace: &mut SimTrace) {
        let now = self.clock;
        let bus = &mut self.buses[i];
        let length = bus.route.length();
        let at_end = bus.state.offset_m >= length - OFFSET_EPS;
        while let Some(stop) = bus.route.stops.get(bus.next_stop) {
            if stop.offset_m > bus.state.offset_m + OFFSET_EPS {
                break;
            }
            let stop_id = stop.stop_id.clone();
            let terminal = stop.offset_m >= length - OFFSET_EPS;
            bus.next_stop += 1;
            trace.push(now, &bus.state.bus_id, TraceKind::ArriveStop { stop_id: stop_id.clone() });

            let alight_p = if terminal { 1.0 } else { config.demand.alighting_prob(&stop_id) };
            let leave = Bernoulli::new(alight_p).expect("validated probability");
            let mut alighted = 0;
            for seat in bus.seats.iter_mut().filter(|s| **s) {
                if leave.sample(&mut self.rng) {
                    *seat = false;
                    alighted += 1;
                }
            }
            if alighted > 0 {
                trace.push(now, &bus.state.bus_id, TraceKind::Alight { stop_id: Some(stop_id.clone()), count: alighted });
            }
            if terminal {
                continue;
            }

            let since = self.last_served.insert(stop_id.clone(), now).unwrap_or(0);
            let minutes = ((now - since) as f64 / 60.0).max(1.0);
            let lambda = config.demand.boarding_rate(&stop_id) * minutes;
            let demand = if lambda > 0.0 {
                Poisson::new(lambda).expect("positive rate").sample(&mut self.rng) as usize
            } else {
                0
            };
            let boarded = board_passengers(&mut bus.seats, demand, &mut self.rng);
            if boarded > 0 {
                trace.push(now, &bus.state.bus_id, TraceKind::Board { stop_id, count: boarded });
            }
        }
        if at_end {
            let left = bus.occupied();
            bus.seats.iter_mut().for_each(|s| *s = false);
            if left > 0 {
                trace.push(now, &bus.state.bus_id, TraceKind::Alight { stop_id: None, count: left });
            }
            bus.phase = BusPhase::Finished;
            bus.state.speed_mps = 0.0;
        }
        bus.state.onboard = bus.occupied();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    fn config(speed: f64, depart: u64, rate: f64, alight: f64) -> ScenarioConfig {
        let v = serde_json::json!({
            "seed": 3,
            "duration_s": 3600,
            "network": {
                "stops": [
                    {"stop_id": "A", "name": "A", "lat": 24.86, "lon": 67.0},
                    {"stop_id": "B", "name": "B", "lat": 24.86, "lon": 67.005},
                    {"stop_id": "C", "name": "C", "lat": 24.86, "lon": 67.01}
                ],
                "routes": [{"route_id": "R", "polyline": [[24.86, 67.0], [24.86, 67.01]],
                            "stops": [{"stop_id": "A", "offset_m": 0}, {"stop_id": "B", "offset_m": 400},
                                      {"stop_id": "C", "offset_m": 1010.6}]}]
            },
            "buses": [{"bus_id": "b1", "route_id": "R", "depart_s": depart, "speed_mps": speed}],
            "demand": {"boarding_rate": rate, "alighting_prob": alight}
        });
        let mut cfg: ScenarioConfig = serde_json::from_value(v).unwrap();
        // Put the last stop exactly at the end of the polyline.
        let len = cfg.network.routes[0].length();
        cfg.network.routes[0].stops[2].offset_m = len;
        cfg.validate().unwrap();
        cfg
    }

    #[test]
    fn boarding_is_capped_by_empty_seats() {
        let mut seats = vec![true, false, true, false, true, false];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(board_passengers(&mut seats, 7, &mut rng), 3);
        assert!(seats.iter().all(|&s| s));
        let mut seats = vec![false; 10];
        assert_eq!(board_passengers(&mut seats, 4, &mut rng), 4);
        assert_eq!(seats.iter().filter(|&&s| s).count(), 4);
    }

    #[test]
    fn kinematics_follow_speed_and_tick() {
        let cfg = config(5.0, 20, 0.0, 0.0);
        let mut w = WorldState::new(&cfg, 4);
        let mut trace = SimTrace::default();
        w.step(&cfg, &mut trace);
        assert_eq!(w.buses[0].phase, BusPhase::Waiting);
        w.step(&cfg, &mut trace);
        assert_eq!(w.buses[0].phase, BusPhase::Active);
        assert_eq!(w.buses[0].state.offset_m, 0.0);
        for k in 1..=5 {
            w.step(&cfg, &mut trace);
            assert!((w.buses[0].state.offset_m - 50.0 * k as f64).abs() < 1e-9);
        }
        assert_eq!(trace.events[0].kind, TraceKind::Depart);
        assert_eq!(trace.events[0].t, 20);
    }

    #[test]
    fn terminal_empties_and_finishes() {
        let cfg = config(20.0, 0, 5.0, 0.0);
        let mut w = WorldState::new(&cfg, 10);
        let mut trace = SimTrace::default();
        while w.buses[0].phase != BusPhase::Finished {
            w.step(&cfg, &mut trace);
            assert!(w.clock < 1000);
        }
        assert_eq!(w.buses[0].occupied(), 0);
        assert_eq!(w.buses[0].state.speed_mps, 0.0);
        assert!((w.buses[0].state.offset_m - w.buses[0].route().length()).abs() < 1e-9);
        assert_eq!(trace.net_onboard("b1"), 0);
        let arrivals: Vec<_> = trace
            .events
            .iter()
            .filter_map(|e| match &e.kind {
                TraceKind::ArriveStop { stop_id } => Some(stop_id.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(arrivals, ["A", "B", "C"]);
        let offset_before = w.buses[0].state.offset_m;
        w.step(&cfg, &mut trace);
        assert_eq!(w.buses[0].state.offset_m, offset_before);
    }

    #[test]
    fn same_seed_same_world() {
        let cfg = config(3.0, 0, 2.0, 0.3);
        let run = || {
            let mut w = WorldState::new(&cfg, 20);
            let mut t = SimTrace::default();
            for _ in 0..100 {
                w.step(&cfg, &mut t);
            }
            t
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn onboard_tracks_seats() {
        let cfg = config(2.0, 0, 3.0, 0.3);
        let mut w = WorldState::new(&cfg, 20);
        let mut t = SimTrace::default();
        for _ in 0..200 {
            w.step(&cfg, &mut t);
            let b = &w.buses[0];
            assert_eq!(b.state.onboard, b.occupied());
            assert_eq!(t.net_onboard("b1"), b.occupied() as i64);
        }
    }
}
