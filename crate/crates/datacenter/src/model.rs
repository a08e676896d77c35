use fdf_core::route::Stop;
use fdf_core::vision::SeatCounts;
use fdf_core::GeoPoint;
use serde::{Deserialize, Serialize};

/// Versioned seat counts for one bus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailabilitySnapshot {
    pub bus_id: String,
    pub version: u64,
    /// Timestamp of the report the counts derive from.
    pub timestamp: u64,
    pub total: usize,
    pub occupied: usize,
    pub empty: usize,
    pub booked: usize,
    pub available: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BookingStatus {
    Active,
    Cancelled,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Booking {
    pub booking_id: String,
    pub passenger_id: String,
    pub bus_id: String,
    pub status: BookingStatus,
    pub created_at: u64,
}

/// Seat counts and position posted by a bus every capture period.
///
/// `offset_m` and `speed_mps` are optional: when absent the offset is
/// recovered by projecting `position` onto the route and the speed is
/// estimated from the previous report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusReport {
    pub bus_id: String,
    pub timestamp: u64,
    pub position: GeoPoint,
    pub occupancy: SeatCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_mps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassengerSession {
    pub passenger_id: String,
    pub privacy_accepted: bool,
    pub last_location: Option<GeoPoint>,
}

/// One row of a bus search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusSummary {
    pub bus_id: String,
    pub route_id: String,
    pub position: GeoPoint,
    /// Seconds until the bus reaches the source stop; `None` when it is stationary.
    pub eta_s: Option<f64>,
    pub available: usize,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookingRequest {
    pub passenger_id: String,
    pub bus_id: String,
    /// Where the passenger is waiting; used to suggest an alternative when the bus is full.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_stop: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dest_stop: Option<String>,
}

impl BookingRequest {
    pub fn new(passenger_id: impl Into<String>, bus_id: impl Into<String>) -> Self {
        Self { passenger_id: passenger_id.into(), bus_id: bus_id.into(), source_stop: None, dest_stop: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BookingOutcome {
    Booked(Booking),
    /// The bus had no available seat; the attempt is recorded as a rejected booking.
    Full { booking: Booking, suggested_stop: Option<Stop> },
}

impl BookingOutcome {
    pub fn booking(&self) -> &Booking {
        match self {
            BookingOutcome::Booked(b) | BookingOutcome::Full { booking: b, .. } => b,
        }
    }

    pub fn is_booked(&self) -> bool {
        matches!(self, BookingOutcome::Booked(_))
    }
}
