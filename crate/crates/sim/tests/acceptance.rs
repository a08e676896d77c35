//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

mod common;

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use fdf_core::geo::haversine_distance;
use fdf_core::oracle::{argmin_scan, flood_fill_components, law_of_cosines_m, ReferenceParams, ReferencePixel};
use fdf_core::route::{nearest_stop, BusRegistration, Route, RouteStop, Stop};
use fdf_core::vision::{detection_rate, extract_blobs, ForegroundMask, MixtureConfig, MixtureModel, SeatMap};
use fdf_core::{BackgroundModel, GeoPoint};
use fdf_datacenter::oracle::{SerialBus, SerialOutcome};
use fdf_datacenter::{BookingRequest, BusReport, Datacenter};
use fdf_sim::{run_sweep, BusPhase, InProcessSink, Lighting, ScenarioConfig, Simulation, SweepConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn metric_fidelity() -> Check {
    let started = Instant::now();
    let rows = [(25, 24, 96), (32, 30, 93), (36, 34, 94), (43, 41, 95), (49, 45, 91), (53, 48, 90)];
    for (actual, detected, expected) in rows {
        let got = detection_rate(actual, detected).map_err(|e| e.to_string())?;
        ensure(got == expected, || format!("({actual},{detected}) gave {got}, expected {expected}"))?;
    }
    within(Duration::from_secs(1), started)?;
    Ok(format!("6/6 rows exact in {:.2?}", started.elapsed()))
}

fn sweep_mean(seed: u64, lighting: Lighting, sigma: f64) -> Result<f64, String> {
    let report = run_sweep(&SweepConfig::new(seed, lighting, sigma), &SeatMap::standard_60()).map_err(|e| e.to_string())?;
    report.mean_percentage().ok_or_else(|| "empty sweep".to_string())
}

fn headline_accuracy() -> Check {
    let started = Instant::now();
    let means = (0..10).map(|seed| sweep_mean(seed, Lighting::Day, 12.0)).collect::<Result<Vec<_>, _>>()?;
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    let floor = means.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(mean >= 90.0, || format!("mean {mean:.2} < 90"))?;
    ensure(floor >= 88.0, || format!("seed minimum {floor:.2} < 88"))?;
    within(Duration::from_secs(120), started)?;
    Ok(format!("mean {mean:.2}%, worst seed {floor:.2}% in {:.2?}", started.elapsed()))
}

fn scenario_mean(cfg: ScenarioConfig) -> Result<f64, String> {
    let mut sink = InProcessSink::new(Arc::new(Datacenter::in_memory()));
    let outcome = fdf_sim::run_scenario(cfg, SeatMap::standard_60(), &mut sink).map_err(|e| e.to_string())?;
    outcome.report.mean_percentage().ok_or_else(|| "no occupied captures".to_string())
}

fn night_not_worse() -> Check {
    let started = Instant::now();
    let (mut day, mut night) = (0.0, 0.0);
    for seed in 0..10 {
        day += scenario_mean(common::two_hour_scenario(seed, Lighting::Day, 12.0))? / 10.0;
        night += scenario_mean(common::two_hour_scenario(seed, Lighting::Night, 12.0))? / 10.0;
    }
    ensure(night >= day, || format!("night {night:.3} < day {day:.3}"))?;
    within(Duration::from_secs(120), started)?;
    Ok(format!("night {night:.2}% >= day {day:.2}% in {:.2?}", started.elapsed()))
}

fn conservation() -> Check {
    let cfg = common::two_hour_scenario(7, Lighting::Day, 12.0);
    let dc = Arc::new(Datacenter::in_memory());
    let mut sink = InProcessSink::new(dc.clone());
    let mut sim = Simulation::new(cfg.clone(), SeatMap::standard_60()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut snapshots, mut occupancies, mut passengers) = (0, 0, 0);
    while !sim.is_done() {
        sim.advance(&mut sink).map_err(|e| e.to_string())?;
        // a little booking traffic so booked/available move too
        if rng.random_bool(0.3) {
            let bus = &cfg.buses[rng.random_range(0..cfg.buses.len())].bus_id;
            let p = format!("p{passengers}");
            passengers += 1;
            dc.register_passenger(&p, true).map_err(|e| e.to_string())?;
            let _ = dc.book_seat(&BookingRequest::new(p, bus.clone()));
        }
        for b in &cfg.buses {
            if let Ok(s) = dc.get_availability(&b.bus_id) {
                snapshots += 1;
                ensure(s.occupied + s.empty == s.total, || format!("snapshot {s:?}"))?;
                ensure(s.available == s.empty.saturating_sub(s.booked), || format!("snapshot {s:?}"))?;
            }
        }
    }
    for o in sim.observations() {
        for occ in [&o.truth, &o.detected] {
            occupancies += 1;
            let c = occ.counts();
            ensure(c.occupied + c.empty == c.total && c.total == 60, || format!("{} t={} {c:?}", o.bus_id, o.t))?;
        }
    }
    ensure(snapshots > 0 && occupancies > 0, || "nothing was checked".into())?;
    Ok(format!("{snapshots} snapshots, {occupancies} occupancies, 0 violations"))
}

fn random_sequence(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    let levels: [i32; 3] = [rng.random_range(0..256), rng.random_range(0..256), rng.random_range(0..256)];
    let mut current: i32 = levels[0];
    (0..len)
        .map(|_| {
            if rng.random_bool(0.1) {
                current = levels[rng.random_range(0..3)];
            }
            (current + rng.random_range(-25..=25)).clamp(0, 255) as u8
        })
        .collect()
}

fn vision_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 0..1000 {
        let selective = n % 2 == 1;
        let params = ReferenceParams { selective, ..Default::default() };
        let cfg = MixtureConfig::<f64> { selective_update: selective, ..Default::default() };
        let seq = random_sequence(&mut rng, 100);
        let mut reference = ReferencePixel::new(seq[0], &params);
        let mut model = BackgroundModel::init_pixels(1, 1, &seq[..1], cfg).map_err(|e| e.to_string())?;
        for (t, &v) in seq.iter().enumerate() {
            let want = reference.step(v, &params);
            let got = model.update_pixels(1, 1, &[v]).map_err(|e| e.to_string())?.bits()[0];
            ensure(got == want, || format!("sequence {n} frame {t}: {got} vs {want}"))?;
            let px = model.pixel(0, 0);
            for (g, w) in px.iter().zip(&reference.weight) {
                ensure(g.weight == *w, || format!("sequence {n} frame {t}: weights differ"))?;
            }
        }
    }

    for n in 0..100 {
        let density = rng.random_range(0.05..0.6);
        let bits: Vec<bool> = (0..64 * 64).map(|_| rng.random_bool(density)).collect();
        let mask = ForegroundMask::new(64, 64, bits.clone()).map_err(|e| e.to_string())?;
        let min_area = rng.random_range(1..10);
        let blobs = extract_blobs(&mask, min_area);
        let oracle = flood_fill_components(64, 64, &bits, min_area);
        let same = blobs.len() == oracle.len()
            && blobs.iter().zip(&oracle).all(|(b, o)| {
                let bb = b.bounding_box;
                b.pixel_count == o.pixel_count && (bb.x, bb.y, bb.w, bb.h) == o.bbox && b.centroid == o.centroid
            });
        ensure(same, || format!("mask {n}: {} blobs vs {} components", blobs.len(), oracle.len()))?;
    }

    // an empty cabin, then passengers who sit still: the full-update model absorbs them
    let map = SeatMap::standard_60();
    let view = fdf_sim::CabinView { width: 320, height: 240, lighting: Lighting::Day, noise_sigma: 0.0 };
    let empty = view.render(&map, &[false; 60], &mut rng, 0).map_err(|e| e.to_string())?;
    let seated: Vec<bool> = (0..60).map(|i| i % 3 == 0).collect();
    let scene = view.render(&map, &seated, &mut rng, 0).map_err(|e| e.to_string())?;
    let mut model = MixtureModel::<f64>::init(&empty, MixtureConfig::default()).map_err(|e| e.to_string())?;
    let mut converged = None;
    for t in 1..=50 {
        if model.update(&scene).map_err(|e| e.to_string())?.is_empty() {
            converged = Some(t);
            break;
        }
    }
    let t = converged.ok_or_else(|| "static scene still has foreground after 50 frames".to_string())?;
    Ok(format!("1000 sequences exact, 100 masks exact, static scene empty after {t} frames"))
}

fn booking_safety() -> Check {
    let started = Instant::now();
    for schedule in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(schedule);
        let dc = Arc::new(Datacenter::in_memory());
        dc.register_route(Route {
            route_id: "R".into(),
            polyline: vec![GeoPoint { lat: 24.86, lon: 67.0 }, GeoPoint { lat: 24.87, lon: 67.0 }],
            stops: vec![
                RouteStop { stop_id: "A".into(), offset_m: 0.0 },
                RouteStop { stop_id: "B".into(), offset_m: 1000.0 },
            ],
        })
        .map_err(|e| e.to_string())?;
        dc.register_bus(BusRegistration { bus_id: "bus".into(), route_id: "R".into(), seat_total: 60 })
            .map_err(|e| e.to_string())?;
        dc.ingest_report(BusReport {
            bus_id: "bus".into(),
            timestamp: 60,
            position: GeoPoint { lat: 24.86, lon: 67.0 },
            occupancy: fdf_core::vision::SeatCounts { occupied: 50, empty: 10, total: 60 },
            offset_m: None,
            speed_mps: None,
        })
        .map_err(|e| e.to_string())?;
        for p in 0..1000 {
            dc.register_passenger(&format!("p{p}"), true).map_err(|e| e.to_string())?;
        }

        let mut order: Vec<usize> = (0..1000).collect();
        order.shuffle(&mut rng);
        let threads = rng.random_range(2..=16);
        let mut chunks = vec![Vec::new(); threads];
        for p in order {
            chunks[rng.random_range(0..threads)].push(p);
        }
        let done = Arc::new(AtomicBool::new(false));
        let reader = {
            let (dc, done) = (dc.clone(), done.clone());
            thread::spawn(move || {
                let mut last = 0;
                while !done.load(Ordering::Relaxed) {
                    let s = dc.get_availability("bus").unwrap();
                    assert!(s.booked <= s.empty && s.available <= s.empty && s.version >= last);
                    last = s.version;
                }
            })
        };
        let workers: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                let dc = dc.clone();
                thread::spawn(move || {
                    chunk
                        .into_iter()
                        .map(|p| dc.book_seat(&BookingRequest::new(format!("p{p}"), "bus")).map(|o| o.is_booked()))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut booked = 0;
        for w in workers {
            for r in w.join().map_err(|_| "worker panicked".to_string())? {
                booked += r.map_err(|e| e.to_string())? as usize;
            }
        }
        done.store(true, Ordering::Relaxed);
        reader.join().map_err(|_| format!("schedule {schedule}: reader saw an overbooked snapshot"))?;
        ensure(booked == 10, || format!("schedule {schedule}: {booked} bookings succeeded"))?;

        // booking ids are handed out under the bus lock: replay in id order
        let mut serial = SerialBus::new(10);
        for n in 1..=1000 {
            let b = dc.booking(&format!("bk-{n:06}")).ok_or_else(|| format!("schedule {schedule}: id {n} missing"))?;
            let expect = serial.book(&b.booking_id, &b.passenger_id) == SerialOutcome::Booked;
            let got = b.status == fdf_datacenter::BookingStatus::Active;
            ensure(expect == got, || format!("schedule {schedule}: {} differs from serial replay", b.booking_id))?;
        }
        let s = dc.get_availability("bus").map_err(|e| e.to_string())?;
        ensure(s.booked == 10 && s.available == 0, || format!("schedule {schedule}: final {s:?}"))?;
    }
    within(Duration::from_secs(30), started)?;
    Ok(format!("100 schedules x 1000 attempts, 10 booked each, serial replay equal, in {:.2?}", started.elapsed()))
}

fn freshness() -> Check {
    let cfg = common::two_hour_scenario(11, Lighting::Day, 0.0);
    let dc = Arc::new(Datacenter::in_memory());
    let mut sink = InProcessSink::new(dc.clone());
    let mut sim = Simulation::new(cfg.clone(), SeatMap::standard_60()).map_err(|e| e.to_string())?;
    let limit = 60 + cfg.tick_s;
    let mut departed: HashMap<String, u64> = HashMap::new();
    let (mut checks, mut worst_age) = (0, 0);
    while !sim.is_done() {
        sim.advance(&mut sink).map_err(|e| e.to_string())?;
        let now = sim.world().clock;
        let truth: HashMap<(&str, u64), usize> =
            sim.observations().iter().map(|o| ((o.bus_id.as_str(), o.t), o.truth.occupied())).collect();
        for bus in &sim.world().buses {
            let id = bus.state.bus_id.as_str();
            if bus.phase == BusPhase::Active {
                departed.entry(id.to_string()).or_insert(now);
            }
            let snapshot = dc.get_availability(id).ok();
            if let Some(s) = &snapshot {
                checks += 1;
                let want = truth.get(&(id, s.timestamp)).copied();
                ensure(want == Some(s.occupied), || format!("{id} t={}: snapshot {} vs truth {want:?}", s.timestamp, s.occupied))?;
            }
            if bus.phase == BusPhase::Active {
                let age = match &snapshot {
                    Some(s) => now - s.timestamp,
                    None => now - departed[id],
                };
                worst_age = worst_age.max(age);
                ensure(age <= limit, || format!("{id} at t={now}: snapshot age {age}s > {limit}s"))?;
            }
        }
    }
    Ok(format!("{checks} snapshot checks exact, worst age {worst_age}s <= {limit}s"))
}

fn geo_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = GeoPoint { lat: rng.random_range(-89.0..89.0), lon: rng.random_range(-180.0..180.0) };
        let b = GeoPoint { lat: rng.random_range(-89.0..89.0), lon: rng.random_range(-180.0..180.0) };
        let err = (haversine_distance(a, b) - law_of_cosines_m(a.lat, a.lon, b.lat, b.lon)).abs();
        worst = worst.max(err);
    }
    ensure(worst < 1.0, || format!("haversine differs by {worst} m"))?;

    let city = |rng: &mut ChaCha8Rng| GeoPoint { lat: rng.random_range(24.8..25.0), lon: rng.random_range(66.9..67.2) };
    let stops: Vec<Stop> = (0..300)
        .map(|i| Stop { stop_id: format!("S{i:03}"), name: format!("stop {i}"), location: city(&mut rng) })
        .collect();
    let ids: Vec<String> = stops.iter().map(|s| s.stop_id.clone()).collect();
    for n in 0..1000 {
        let q = city(&mut rng);
        let (hit, _) = nearest_stop(q, &stops).map_err(|e| e.to_string())?;
        let brute = argmin_scan(&ids, |i| haversine_distance(q, stops[i].location)).unwrap();
        ensure(hit.stop_id == stops[brute].stop_id, || format!("query {n}: {} vs {}", hit.stop_id, stops[brute].stop_id))?;
    }
    Ok(format!("1000 nearest-stop queries exact, haversine within {worst:.2e} m"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("metric fidelity", metric_fidelity),
        ("headline accuracy", headline_accuracy),
        ("night not worse than day", night_not_worse),
        ("conservation", conservation),
        ("vision oracles", vision_oracles),
        ("booking safety", booking_safety),
        ("freshness", freshness),
        ("geo oracles", geo_oracles),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let took = started.elapsed();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
