#![allow(dead_code)]

use fdf_core::route::{Route, RouteNetwork, RouteStop, Stop};
use fdf_core::GeoPoint;
use fdf_sim::{BusSpec, Demand, Lighting, ScenarioConfig};

/// Straight route from `a` to `b` with `n` evenly spaced stops named `<prefix>0..`.
fn line(route_id: &str, prefix: &str, a: GeoPoint, b: GeoPoint, n: usize) -> (Route, Vec<Stop>) {
    let mut route = Route { route_id: route_id.into(), polyline: vec![a, b], stops: Vec::new() };
    let len = route.length();
    let mut stops = Vec::new();
    for i in 0..n {
        let offset = len * i as f64 / (n - 1) as f64;
        let stop_id = format!("{prefix}{i}");
        stops.push(Stop { stop_id: stop_id.clone(), name: stop_id.clone(), location: route.position_at(offset).unwrap() });
        route.stops.push(RouteStop { stop_id, offset_m: offset });
    }
    (route, stops)
}

/// Two crossing 11 km lines with 11 stops each.
pub fn network() -> RouteNetwork {
    let (east, mut stops) =
        line("east", "E", GeoPoint { lat: 24.86, lon: 67.0 }, GeoPoint { lat: 24.86, lon: 67.11 }, 11);
    let (north, more) =
        line("north", "N", GeoPoint { lat: 24.81, lon: 67.05 }, GeoPoint { lat: 24.91, lon: 67.05 }, 11);
    stops.extend(more);
    RouteNetwork { stops, routes: vec![east, north], buses: Vec::new() }
}

/// Seven buses over two hours; some finish their route, some are still out at the end.
pub fn two_hour_scenario(seed: u64, lighting: Lighting, noise_sigma: f64) -> ScenarioConfig {
    let departures = [("east", 0), ("north", 600), ("east", 1200), ("east", 2400), ("north", 3000), ("east", 3600), ("east", 4800)];
    let buses = departures
        .iter()
        .enumerate()
        .map(|(i, &(route, depart_s))| BusSpec {
            bus_id: format!("bus-{i}"),
            route_id: route.into(),
            seat_map: None,
            depart_s,
            speed_mps: 4.0,
        })
        .collect();
    let mut cfg: ScenarioConfig = serde_json::from_value(serde_json::json!({
        "seed": seed,
        "duration_s": 7200,
        "network": network(),
        "buses": [],
    }))
    .unwrap();
    cfg.buses = buses;
    cfg.lighting = lighting;
    cfg.noise_sigma = noise_sigma;
    cfg.demand = Demand { boarding_rate: 1.5, alighting_prob: 0.15, ..Demand::default() };
    cfg.validate().unwrap();
    cfg
}
