use fdf_core::geo::haversine_distance;
use fdf_core::route::{BusRegistration, Route, RouteStop, Stop};
use fdf_core::vision::SeatCounts;
use fdf_core::GeoPoint;
use fdf_datacenter::{BusReport, Datacenter, DatacenterError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Network {
    stops: Vec<Stop>,
    routes: Vec<Vec<String>>,
}

/// Random stops in a city box, with routes visiting random subsequences of them.
fn random_network(dc: &Datacenter, rng: &mut ChaCha8Rng) -> Network {
    let n = rng.random_range(3..15);
    let stops: Vec<Stop> = (0..n)
        .map(|i| Stop {
            stop_id: format!("S{i:02}"),
            name: format!("stop {i}"),
            location: GeoPoint { lat: rng.random_range(24.80..24.95), lon: rng.random_range(66.95..67.15) },
        })
        .collect();
    for s in &stops {
        dc.register_stop(s.clone()).unwrap();
    }
    let mut routes = Vec::new();
    for r in 0..rng.random_range(1..5) {
        let mut visit: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if visit.len() < 2 {
            visit = vec![0, n - 1];
        }
        // shuffle visiting order
        for i in (1..visit.len()).rev() {
            visit.swap(i, rng.random_range(0..=i));
        }
        let polyline: Vec<GeoPoint> = visit.iter().map(|&i| stops[i].location).collect();
        let mut offsets = vec![0.0];
        for w in polyline.windows(2) {
            offsets.push(offsets.last().unwrap() + haversine_distance(w[0], w[1]));
        }
        let route = Route {
            route_id: format!("R{r}"),
            polyline,
            stops: visit
                .iter()
                .zip(&offsets)
                .map(|(&i, &o)| RouteStop { stop_id: stops[i].stop_id.clone(), offset_m: o })
                .collect(),
        };
        if route.validate().is_empty() {
            dc.register_route(route).unwrap();
            routes.push(visit.iter().map(|&i| stops[i].stop_id.clone()).collect());
        }
    }
    Network { stops, routes }
}

#[test]
fn suggest_alternative_matches_filter_and_min() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let dc = Datacenter::in_memory();
        let net = random_network(&dc, &mut rng);
        let current = &net.stops[rng.random_range(0..net.stops.len())];
        let dest = &net.stops[rng.random_range(0..net.stops.len())];

        let connects = |from: &str| {
            net.routes.iter().any(|r| {
                let a = r.iter().position(|s| s == from);
                let b = r.iter().position(|s| s == &dest.stop_id);
                matches!((a, b), (Some(a), Some(b)) if a < b)
            })
        };
        let mut best: Option<(f64, &str)> = None;
        for s in &net.stops {
            if s.stop_id == current.stop_id || s.stop_id == dest.stop_id || !connects(&s.stop_id) {
                continue;
            }
            let d = haversine_distance(current.location, s.location);
            if best.is_none_or(|(bd, bid)| d < bd || (d == bd && s.stop_id.as_str() < bid)) {
                best = Some((d, &s.stop_id));
            }
        }

        match (dc.suggest_alternative(&current.stop_id, &dest.stop_id), best) {
            (Ok(stop), Some((_, id))) => {
                assert_eq!(stop.stop_id, id);
                assert_ne!(stop.stop_id, current.stop_id);
            }
            (Err(DatacenterError::NoAlternative(_)), None) => {}
            (got, want) => panic!("got {got:?}, want {want:?}"),
        }
    }
}

#[test]
fn query_order_matches_sort_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let dc = Datacenter::in_memory();
        dc.register_route(Route {
            route_id: "R".into(),
            polyline: vec![GeoPoint { lat: 24.86, lon: 67.0 }, GeoPoint { lat: 24.86, lon: 67.1 }],
            stops: vec![
                RouteStop { stop_id: "A".into(), offset_m: 0.0 },
                RouteStop { stop_id: "SRC".into(), offset_m: 5000.0 },
                RouteStop { stop_id: "DST".into(), offset_m: 9000.0 },
            ],
        })
        .unwrap();
        let mut expected = Vec::new();
        for b in 0..rng.random_range(2..8) {
            let id = format!("bus{b}");
            dc.register_bus(BusRegistration { bus_id: id.clone(), route_id: "R".into(), seat_total: 40 }).unwrap();
            // coarse offsets and speeds so ties occur
            let offset = 1000.0 * rng.random_range(0..7) as f64;
            let speed = [0.0, 5.0, 10.0][rng.random_range(0..3)];
            dc.ingest_report(BusReport {
                bus_id: id.clone(),
                timestamp: 60,
                position: GeoPoint { lat: 24.86, lon: 67.0 },
                occupancy: SeatCounts { occupied: 0, empty: 40, total: 40 },
                offset_m: Some(offset),
                speed_mps: Some(speed),
            })
            .unwrap();
            if offset <= 5000.0 {
                let eta = if offset == 5000.0 {
                    Some(0.0)
                } else if speed > 0.0 {
                    Some((5000.0 - offset) / speed)
                } else {
                    None
                };
                expected.push((eta, id));
            }
        }
        expected.sort_by(|a, b| {
            let k = |e: &Option<f64>| e.unwrap_or(f64::INFINITY);
            k(&a.0).partial_cmp(&k(&b.0)).unwrap().then(a.1.cmp(&b.1))
        });
        let got: Vec<(Option<f64>, String)> =
            dc.query_buses("SRC", "DST").unwrap().into_iter().map(|s| (s.eta_s, s.bus_id)).collect();
        assert_eq!(got, expected);
    }
}
