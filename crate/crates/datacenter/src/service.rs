use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use fdf_core::route::{eta_to_stop, nearest_stop, BusRegistration, BusState, Eta, Route, RouteNetwork, Stop};
use fdf_core::GeoPoint;
use parking_lot::{Mutex, RwLock};
use tracing::{debug, info};

use crate::log::{Event, EventLog, Record};
use crate::model::{
    AvailabilitySnapshot, Booking, BookingOutcome, BookingRequest, BookingStatus, BusReport, BusSummary,
    PassengerSession,
};
use crate::DatacenterError;

type Result<T, E = DatacenterError> = std::result::Result<T, E>;

/// Immutable view of a bus published after every write to it.
#[derive(Debug)]
struct Published {
    snapshot: Arc<AvailabilitySnapshot>,
    position: GeoPoint,
    offset_m: f64,
    speed_mps: f64,
}

/// Mutable per-bus state. All writes for one bus go through its mutex.
#[derive(Debug, Default)]
struct BusLedger {
    version: u64,
    last_report: Option<BusReport>,
    /// passenger id -> active booking id
    active: BTreeMap<String, String>,
    bookings: HashMap<String, Booking>,
}

impl BusLedger {
    fn available(&self) -> usize {
        self.last_report.as_ref().map_or(0, |r| r.occupancy.empty.saturating_sub(self.active.len()))
    }
}

#[derive(Debug)]
struct BusCell {
    registration: BusRegistration,
    ledger: Mutex<BusLedger>,
    published: RwLock<Option<Arc<Published>>>,
}

impl BusCell {
    fn new(registration: BusRegistration) -> Self {
        Self { registration, ledger: Mutex::new(BusLedger::default()), published: RwLock::new(None) }
    }

    fn current(&self) -> Option<Arc<Published>> {
        self.published.read().clone()
    }

    /// Bumps the version and publishes a fresh snapshot. Caller holds the ledger lock.
    fn publish(&self, ledger: &mut BusLedger) {
        let Some(report) = &ledger.last_report else {
            return;
        };
        ledger.version += 1;
        let snapshot = AvailabilitySnapshot {
            bus_id: self.registration.bus_id.clone(),
            version: ledger.version,
            timestamp: report.timestamp,
            total: report.occupancy.total,
            occupied: report.occupancy.occupied,
            empty: report.occupancy.empty,
            booked: ledger.active.len(),
            available: ledger.available(),
        };
        *self.published.write() = Some(Arc::new(Published {
            snapshot: Arc::new(snapshot),
            position: report.position,
            offset_m: report.offset_m.unwrap_or(0.0),
            speed_mps: report.speed_mps.unwrap_or(0.0),
        }));
    }
}

/// The cloud datacenter coordinator and the stores it manages.
///
/// All methods take `&self` and are safe to call from many threads. Writes to
/// one bus (reports, bookings, cancellations) are totally ordered by that
/// bus's ledger lock; different buses never contend.
pub struct Datacenter {
    stops: RwLock<BTreeMap<String, Stop>>,
    routes: RwLock<BTreeMap<String, Arc<Route>>>,
    passengers: RwLock<HashMap<String, PassengerSession>>,
    buses: RwLock<BTreeMap<String, Arc<BusCell>>>,
    booking_index: RwLock<HashMap<String, String>>,
    next_booking: AtomicU64,
    seq: AtomicU64,
    log: Option<EventLog>,
}

impl Default for Datacenter {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl Datacenter {
    /// A datacenter without persistence.
    pub fn in_memory() -> Self {
        Self {
            stops: RwLock::default(),
            routes: RwLock::default(),
            passengers: RwLock::default(),
            buses: RwLock::default(),
            booking_index: RwLock::default(),
            next_booking: AtomicU64::new(1),
            seq: AtomicU64::new(1),
            log: None,
        }
    }

    /// Opens a persistent datacenter in `dir`, replaying any existing logs.
    pub fn open(dir: &Path) -> Result<Self> {
        let (log, records) = EventLog::open(dir)?;
        let mut dc = Self::in_memory();
        let mut max_seq = 0;
        for record in &records {
            dc.apply(&record.event)?;
            max_seq = max_seq.max(record.seq);
        }
        dc.seq.store(max_seq + 1, Ordering::SeqCst);
        info!(dir = %dir.display(), events = records.len(), "replayed event logs");
        dc.log = Some(log);
        Ok(dc)
    }

    /// Flushes and syncs the event logs.
    pub fn flush(&self) -> Result<()> {
        match &self.log {
            Some(log) => {
                log.flush()?;
                debug!(dir = %log.dir().display(), "event logs flushed");
                Ok(())
            }
            None => Ok(()),
        }
    }

    fn persist(&self, event: &Event) -> Result<()> {
        if let Some(log) = &self.log {
            let seq = self.seq.fetch_add(1, Ordering::SeqCst);
            log.append(&Record { seq, event: event.clone() })?;
        }
        Ok(())
    }

    /// Re-applies a logged event. Validation already happened when it was recorded.
    fn apply(&self, event: &Event) -> Result<()> {
        match event {
            Event::StopRegistered { stop } => {
                self.stops.write().insert(stop.stop_id.clone(), stop.clone());
            }
            Event::RouteRegistered { route } => {
                self.routes.write().insert(route.route_id.clone(), Arc::new(route.clone()));
            }
            Event::BusRegistered { bus } => {
                self.buses.write().insert(bus.bus_id.clone(), Arc::new(BusCell::new(bus.clone())));
            }
            Event::PassengerRegistered { session } => {
                self.passengers.write().insert(session.passenger_id.clone(), session.clone());
            }
            Event::LocationUpdated { passenger_id, location } => {
                if let Some(s) = self.passengers.write().get_mut(passenger_id) {
                    s.last_location = Some(*location);
                }
            }
            Event::ReportIngested { report } => {
                let cell = self.bus(&report.bus_id)?;
                let mut ledger = cell.ledger.lock();
                ledger.last_report = Some(report.clone());
                cell.publish(&mut ledger);
            }
            Event::BookingRecorded { booking } => {
                let cell = self.bus(&booking.bus_id)?;
                let mut ledger = cell.ledger.lock();
                record_booking(&cell, &mut ledger, booking.clone());
                self.booking_index.write().insert(booking.booking_id.clone(), booking.bus_id.clone());
                if let Some(n) = booking.booking_id.strip_prefix("bk-").and_then(|n| n.parse::<u64>().ok()) {
                    self.next_booking.fetch_max(n + 1, Ordering::SeqCst);
                }
            }
            Event::BookingCancelled { booking_id, bus_id } => {
                let cell = self.bus(bus_id)?;
                let mut ledger = cell.ledger.lock();
                cancel_in_ledger(&cell, &mut ledger, booking_id);
            }
        }
        Ok(())
    }

    fn bus(&self, bus_id: &str) -> Result<Arc<BusCell>> {
        self.buses.read().get(bus_id).cloned().ok_or_else(|| DatacenterError::UnknownBus(bus_id.into()))
    }

    // ---- route server ----

    /// Registers a stop. Re-registering an identical stop is a no-op.
    pub fn register_stop(&self, stop: Stop) -> Result<()> {
        if stop.stop_id.trim().is_empty() || !stop.location.is_valid() {
            return Err(DatacenterError::InvalidRequest(format!("invalid stop {:?}", stop.stop_id)));
        }
        let mut stops = self.stops.write();
        match stops.get(&stop.stop_id) {
            Some(existing) if *existing == stop => return Ok(()),
            Some(_) => return Err(DatacenterError::Conflict(format!("stop {} already registered", stop.stop_id))),
            None => {}
        }
        let event = Event::StopRegistered { stop: stop.clone() };
        self.persist(&event)?;
        stops.insert(stop.stop_id.clone(), stop);
        Ok(())
    }

    /// Registers a route. Stops it names that are not yet known are created at
    /// their position along the route, named after their id.
    pub fn register_route(&self, route: Route) -> Result<String> {
        let violations = route.validate();
        if !violations.is_empty() {
            return Err(DatacenterError::InvalidRoute(violations));
        }
        let mut routes = self.routes.write();
        if routes.contains_key(&route.route_id) {
            return Err(DatacenterError::Conflict(format!("route {} already registered", route.route_id)));
        }
        let mut stops = self.stops.write();
        for rs in &route.stops {
            if !stops.contains_key(&rs.stop_id) {
                let location = route.position_at(rs.offset_m).expect("validated offset");
                let stop = Stop { stop_id: rs.stop_id.clone(), name: rs.stop_id.clone(), location };
                self.persist(&Event::StopRegistered { stop: stop.clone() })?;
                stops.insert(stop.stop_id.clone(), stop);
            }
        }
        self.persist(&Event::RouteRegistered { route: route.clone() })?;
        let id = route.route_id.clone();
        routes.insert(id.clone(), Arc::new(route));
        Ok(id)
    }

    /// Registers every stop, route and bus of a network file, skipping entries
    /// that are already present and identical.
    pub fn register_network(&self, network: &RouteNetwork) -> Result<()> {
        let violations = network.validate();
        if !violations.is_empty() {
            return Err(DatacenterError::InvalidRoute(violations));
        }
        for stop in &network.stops {
            self.register_stop(stop.clone())?;
        }
        for route in &network.routes {
            match self.route(&route.route_id) {
                Some(existing) if *existing == *route => {}
                _ => {
                    self.register_route(route.clone())?;
                }
            }
        }
        for bus in &network.buses {
            self.register_bus(bus.clone())?;
        }
        Ok(())
    }

    pub fn route(&self, route_id: &str) -> Option<Arc<Route>> {
        self.routes.read().get(route_id).cloned()
    }

    pub fn stop(&self, stop_id: &str) -> Option<Stop> {
        self.stops.read().get(stop_id).cloned()
    }

    pub fn stops(&self) -> Vec<Stop> {
        self.stops.read().values().cloned().collect()
    }

    pub fn nearest_stop(&self, point: GeoPoint) -> Result<(Stop, f64)> {
        let stops = self.stops.read();
        let (stop, d) = nearest_stop(point, stops.values()).map_err(|_| DatacenterError::UnknownStop("(none)".into()))?;
        Ok((stop.clone(), d))
    }

    /// The closest stop to `current_stop`, other than itself, from which some
    /// route reaches `dest_stop`.
    pub fn suggest_alternative(&self, current_stop: &str, dest_stop: &str) -> Result<Stop> {
        let stops = self.stops.read();
        let current = stops.get(current_stop).ok_or_else(|| DatacenterError::UnknownStop(current_stop.into()))?;
        if !stops.contains_key(dest_stop) {
            return Err(DatacenterError::UnknownStop(dest_stop.into()));
        }
        let routes = self.routes.read();
        let candidates = stops.values().filter(|s| {
            s.stop_id != current_stop && s.stop_id != dest_stop && routes.values().any(|r| r.connects(&s.stop_id, dest_stop))
        });
        nearest_stop(current.location, candidates)
            .map(|(s, _)| s.clone())
            .map_err(|_| DatacenterError::NoAlternative(dest_stop.into()))
    }

    // ---- bus station server ----

    /// Registers a bus on a route. Re-registering identically is a no-op.
    pub fn register_bus(&self, bus: BusRegistration) -> Result<()> {
        if bus.bus_id.trim().is_empty() || bus.seat_total == 0 {
            return Err(DatacenterError::InvalidRequest("bus needs an id and at least one seat".into()));
        }
        if self.route(&bus.route_id).is_none() {
            return Err(DatacenterError::UnknownRoute(bus.route_id));
        }
        let mut buses = self.buses.write();
        match buses.get(&bus.bus_id) {
            Some(cell) if cell.registration == bus => return Ok(()),
            Some(_) => return Err(DatacenterError::Conflict(format!("bus {} already registered", bus.bus_id))),
            None => {}
        }
        self.persist(&Event::BusRegistered { bus: bus.clone() })?;
        buses.insert(bus.bus_id.clone(), Arc::new(BusCell::new(bus)));
        Ok(())
    }

    pub fn bus_ids(&self) -> Vec<String> {
        self.buses.read().keys().cloned().collect()
    }

    /// Accepts a report strictly newer than the last one for its bus and
    /// returns the new snapshot version.
    pub fn ingest_report(&self, mut report: BusReport) -> Result<u64> {
        let cell = self.bus(&report.bus_id)?;
        let occ = report.occupancy;
        if !occ.is_consistent() || occ.total != cell.registration.seat_total {
            return Err(DatacenterError::InvalidRequest(format!(
                "occupancy {}+{}!={} or total differs from the {} registered seats",
                occ.occupied, occ.empty, occ.total, cell.registration.seat_total
            )));
        }
        if !report.position.is_valid() {
            return Err(DatacenterError::InvalidRequest("position out of range".into()));
        }
        let route = self.route(&cell.registration.route_id).expect("registered bus has a route");

        let mut ledger = cell.ledger.lock();
        if let Some(last) = &ledger.last_report {
            if report.timestamp <= last.timestamp {
                return Err(DatacenterError::StaleReport {
                    bus_id: report.bus_id,
                    timestamp: report.timestamp,
                    last: last.timestamp,
                });
            }
        }
        let offset = report.offset_m.unwrap_or_else(|| route.project(report.position)).clamp(0.0, route.length());
        let speed = report.speed_mps.unwrap_or_else(|| match &ledger.last_report {
            Some(last) => {
                let dt = (report.timestamp - last.timestamp) as f64;
                ((offset - last.offset_m.unwrap_or(0.0)) / dt).max(0.0)
            }
            None => 0.0,
        });
        report.offset_m = Some(offset);
        report.speed_mps = Some(speed.max(0.0));

        self.persist(&Event::ReportIngested { report: report.clone() })?;
        ledger.last_report = Some(report);
        cell.publish(&mut ledger);
        Ok(ledger.version)
    }

    pub fn get_availability(&self, bus_id: &str) -> Result<Arc<AvailabilitySnapshot>> {
        let cell = self.bus(bus_id)?;
        let published = cell.current().ok_or_else(|| DatacenterError::NoData(bus_id.into()))?;
        Ok(published.snapshot.clone())
    }

    /// Buses whose route visits `source` before `dest` and have not yet passed
    /// `source`, soonest first (stationary buses last, then by bus id).
    pub fn query_buses(&self, source: &str, dest: &str) -> Result<Vec<BusSummary>> {
        for s in [source, dest] {
            if self.stop(s).is_none() {
                return Err(DatacenterError::UnknownStop(s.into()));
            }
        }
        let cells: Vec<Arc<BusCell>> = self.buses.read().values().cloned().collect();
        let mut out = Vec::new();
        for cell in cells {
            let Some(route) = self.route(&cell.registration.route_id) else { continue };
            if !route.connects(source, dest) {
                continue;
            }
            let Some(p) = cell.current() else { continue };
            let state = BusState {
                bus_id: cell.registration.bus_id.clone(),
                route_id: route.route_id.clone(),
                offset_m: p.offset_m,
                speed_mps: p.speed_mps,
                seat_total: p.snapshot.total,
                onboard: p.snapshot.occupied,
            };
            let eta_s = match eta_to_stop(&state, &route, source).expect("route contains source") {
                Eta::AlreadyPassed => continue,
                Eta::Seconds(s) => Some(s),
                Eta::Unknown => None,
            };
            out.push(BusSummary {
                bus_id: state.bus_id,
                route_id: state.route_id,
                position: p.position,
                eta_s,
                available: p.snapshot.available,
                version: p.snapshot.version,
            });
        }
        out.sort_by(|a, b| {
            let key = |s: &BusSummary| s.eta_s.unwrap_or(f64::INFINITY);
            key(a).total_cmp(&key(b)).then_with(|| a.bus_id.cmp(&b.bus_id))
        });
        Ok(out)
    }

    // ---- passenger server ----

    /// Creates a session, or returns the existing one for this id.
    pub fn register_passenger(&self, passenger_id: &str, privacy_accepted: bool) -> Result<PassengerSession> {
        if passenger_id.trim().is_empty() {
            return Err(DatacenterError::InvalidRequest("passenger_id is empty".into()));
        }
        let mut passengers = self.passengers.write();
        if let Some(existing) = passengers.get(passenger_id) {
            return Ok(existing.clone());
        }
        let session = PassengerSession { passenger_id: passenger_id.into(), privacy_accepted, last_location: None };
        self.persist(&Event::PassengerRegistered { session: session.clone() })?;
        passengers.insert(passenger_id.into(), session.clone());
        Ok(session)
    }

    pub fn passenger(&self, passenger_id: &str) -> Option<PassengerSession> {
        self.passengers.read().get(passenger_id).cloned()
    }

    /// Stores the passenger's location; refused unless they accepted the privacy policy.
    pub fn update_location(&self, passenger_id: &str, location: GeoPoint) -> Result<()> {
        if !location.is_valid() {
            return Err(DatacenterError::InvalidRequest("location out of range".into()));
        }
        let mut passengers = self.passengers.write();
        let session =
            passengers.get_mut(passenger_id).ok_or_else(|| DatacenterError::UnknownPassenger(passenger_id.into()))?;
        if !session.privacy_accepted {
            return Err(DatacenterError::PrivacyRefused(passenger_id.into()));
        }
        self.persist(&Event::LocationUpdated { passenger_id: passenger_id.into(), location })?;
        session.last_location = Some(location);
        Ok(())
    }

    // ---- bookings ----

    /// Reserves one seat on a bus, or records a rejection when none is available.
    ///
    /// The availability check and the decrement happen under the bus's ledger
    /// lock, so concurrent attempts behave as if run one at a time.
    pub fn book_seat(&self, request: &BookingRequest) -> Result<BookingOutcome> {
        let session = self
            .passenger(&request.passenger_id)
            .ok_or_else(|| DatacenterError::UnknownPassenger(request.passenger_id.clone()))?;
        let cell = self.bus(&request.bus_id)?;
        let booking = {
            let mut ledger = cell.ledger.lock();
            let Some(report) = &ledger.last_report else {
                return Err(DatacenterError::NoData(request.bus_id.clone()));
            };
            if ledger.active.contains_key(&request.passenger_id) {
                return Err(DatacenterError::DuplicateBooking {
                    passenger_id: request.passenger_id.clone(),
                    bus_id: request.bus_id.clone(),
                });
            }
            let status = if ledger.available() > 0 { BookingStatus::Active } else { BookingStatus::Rejected };
            let booking = Booking {
                booking_id: format!("bk-{:06}", self.next_booking.fetch_add(1, Ordering::SeqCst)),
                passenger_id: request.passenger_id.clone(),
                bus_id: request.bus_id.clone(),
                status,
                created_at: report.timestamp,
            };
            self.persist(&Event::BookingRecorded { booking: booking.clone() })?;
            record_booking(&cell, &mut ledger, booking.clone());
            booking
        };
        self.booking_index.write().insert(booking.booking_id.clone(), booking.bus_id.clone());

        if booking.status == BookingStatus::Active {
            return Ok(BookingOutcome::Booked(booking));
        }
        let suggested_stop = self.alternative_for(&session, &cell.registration.route_id, request);
        Ok(BookingOutcome::Full { booking, suggested_stop })
    }

    /// Picks the stop to wait at instead: relative to the requested source
    /// stop, or else the stop nearest the passenger; towards the requested
    /// destination, or else the end of the bus's route.
    fn alternative_for(&self, session: &PassengerSession, route_id: &str, request: &BookingRequest) -> Option<Stop> {
        let current = match &request.source_stop {
            Some(s) => s.clone(),
            None => self.nearest_stop(session.last_location?).ok()?.0.stop_id,
        };
        let dest = match &request.dest_stop {
            Some(d) => d.clone(),
            None => self.route(route_id)?.stops.last()?.stop_id.clone(),
        };
        self.suggest_alternative(&current, &dest).ok()
    }

    pub fn cancel_booking(&self, booking_id: &str) -> Result<()> {
        let bus_id = self
            .booking_index
            .read()
            .get(booking_id)
            .cloned()
            .ok_or_else(|| DatacenterError::UnknownBooking(booking_id.into()))?;
        let cell = self.bus(&bus_id)?;
        let mut ledger = cell.ledger.lock();
        match ledger.bookings.get(booking_id).map(|b| b.status) {
            None => return Err(DatacenterError::UnknownBooking(booking_id.into())),
            Some(BookingStatus::Cancelled) => return Err(DatacenterError::AlreadyCancelled(booking_id.into())),
            Some(BookingStatus::Rejected) => return Err(DatacenterError::NotActive(booking_id.into())),
            Some(BookingStatus::Active) => {}
        }
        self.persist(&Event::BookingCancelled { booking_id: booking_id.into(), bus_id })?;
        cancel_in_ledger(&cell, &mut ledger, booking_id);
        Ok(())
    }

    pub fn booking(&self, booking_id: &str) -> Option<Booking> {
        let bus_id = self.booking_index.read().get(booking_id).cloned()?;
        let cell = self.bus(&bus_id).ok()?;
        let ledger = cell.ledger.lock();
        ledger.bookings.get(booking_id).cloned()
    }

    /// All bookings on a bus, ordered by id.
    pub fn bookings_for(&self, bus_id: &str) -> Result<Vec<Booking>> {
        let cell = self.bus(bus_id)?;
        let ledger = cell.ledger.lock();
        let mut all: Vec<Booking> = ledger.bookings.values().cloned().collect();
        all.sort_by(|a, b| a.booking_id.cmp(&b.booking_id));
        Ok(all)
    }
}

fn record_booking(cell: &BusCell, ledger: &mut BusLedger, booking: Booking) {
    let active = booking.status == BookingStatus::Active;
    if active {
        ledger.active.insert(booking.passenger_id.clone(), booking.booking_id.clone());
    }
    ledger.bookings.insert(booking.booking_id.clone(), booking);
    if active {
        cell.publish(ledger);
    }
}

fn cancel_in_ledger(cell: &BusCell, ledger: &mut BusLedger, booking_id: &str) {
    let Some(b) = ledger.bookings.get_mut(booking_id) else { return };
    b.status = BookingStatus::Cancelled;
    let passenger = b.passenger_id.clone();
    ledger.active.remove(&passenger);
    cell.publish(ledger);
}

impl std::fmt::Debug for Datacenter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Datacenter")
            .field("stops", &self.stops.read().len())
            .field("routes", &self.routes.read().len())
            .field("buses", &self.buses.read().len())
            .field("persistent", &self.log.is_some())
            .finish()
    }
}
