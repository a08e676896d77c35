//! The datacenter: route server, passenger server and bus station server
//! behind one coordinator, with per-bus linearizable seat booking.
//!
//! [`Datacenter`] is the in-process service. [`api::router`] exposes it over
//! HTTP/JSON. State can be persisted as append-only JSON-lines event logs,
//! one file per store, and is rebuilt by replay on open.

pub mod api;
mod error;
mod log;
mod model;
#[cfg(any(test, feature = "oracles"))]
pub mod oracle;
mod service;

pub use error::DatacenterError;
pub use log::{Event, Record, StoreFile};
pub use model::{
    AvailabilitySnapshot, Booking, BookingOutcome, BookingRequest, BookingStatus, BusReport, BusSummary,
    PassengerSession,
};
pub use service::Datacenter;
