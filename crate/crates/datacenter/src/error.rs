use fdf_core::route::Violation;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatacenterError {
    #[error("route rejected with {} violation(s)", .0.len())]
    InvalidRoute(Vec<Violation>),
    #[error("{0}")]
    Conflict(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("unknown route {0}")]
    UnknownRoute(String),
    #[error("unknown stop {0}")]
    UnknownStop(String),
    #[error("unknown bus {0}")]
    UnknownBus(String),
    #[error("unknown passenger {0}")]
    UnknownPassenger(String),
    #[error("unknown booking {0}")]
    UnknownBooking(String),
    #[error("report for {bus_id} at t={timestamp} is not newer than t={last}")]
    StaleReport { bus_id: String, timestamp: u64, last: u64 },
    #[error("passenger {0} has not accepted the privacy policy")]
    PrivacyRefused(String),
    #[error("no report received yet for bus {0}")]
    NoData(String),
    #[error("passenger {passenger_id} already holds an active booking on {bus_id}")]
    DuplicateBooking { passenger_id: String, bus_id: String },
    #[error("booking {0} is already cancelled")]
    AlreadyCancelled(String),
    #[error("booking {0} was rejected and cannot be cancelled")]
    NotActive(String),
    #[error("no alternative stop connects to {0}")]
    NoAlternative(String),
    #[error("storage failure: {0}")]
    Storage(String),
}

impl DatacenterError {
    /// Stable machine-readable code used in API error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidRoute(_) => "invalid_route",
            Self::Conflict(_) => "conflict",
            Self::InvalidRequest(_) => "invalid_request",
            Self::UnknownRoute(_) => "unknown_route",
            Self::UnknownStop(_) => "unknown_stop",
            Self::UnknownBus(_) => "unknown_bus",
            Self::UnknownPassenger(_) => "unknown_passenger",
            Self::UnknownBooking(_) => "unknown_booking",
            Self::StaleReport { .. } => "stale_report",
            Self::PrivacyRefused(_) => "privacy_refused",
            Self::NoData(_) => "no_data",
            Self::DuplicateBooking { .. } => "duplicate_booking",
            Self::AlreadyCancelled(_) => "already_cancelled",
            Self::NotActive(_) => "booking_not_active",
            Self::NoAlternative(_) => "no_alternative",
            Self::Storage(_) => "storage",
        }
    }
}

impl From<std::io::Error> for DatacenterError {
    fn from(e: std::io::Error) -> Self {
        Self::Storage(e.to_string())
    }
}
