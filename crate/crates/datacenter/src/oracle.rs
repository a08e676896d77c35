//! Single-threaded reference model of the booking rules. Concurrent runs are
//! checked by replaying their operations through it in the order the service
//! serialized them.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SerialOutcome {
    Booked,
    Full,
    Duplicate,
    Cancelled,
    NotActive,
}

/// Seat ledger of one bus.
#[derive(Debug, Clone, Default)]
pub struct SerialBus {
    pub empty: usize,
    active: BTreeSet<String>,
    by_booking: BTreeMap<String, (String, bool)>,
}

impl SerialBus {
    pub fn new(empty: usize) -> Self {
        Self { empty, ..Self::default() }
    }

    pub fn available(&self) -> usize {
        self.empty.saturating_sub(self.active.len())
    }

    pub fn active(&self) -> usize {
        self.active.len()
    }

    pub fn report(&mut self, empty: usize) {
        self.empty = empty;
    }

    pub fn book(&mut self, booking_id: &str, passenger: &str) -> SerialOutcome {
        if self.active.contains(passenger) {
            return SerialOutcome::Duplicate;
        }
        if self.available() == 0 {
            self.by_booking.insert(booking_id.into(), (passenger.into(), false));
            return SerialOutcome::Full;
        }
        self.active.insert(passenger.into());
        self.by_booking.insert(booking_id.into(), (passenger.into(), true));
        SerialOutcome::Booked
    }

    pub fn cancel(&mut self, booking_id: &str) -> SerialOutcome {
        match self.by_booking.get_mut(booking_id) {
            Some((passenger, live)) if *live => {
                *live = false;
                self.active.remove(passenger.as_str());
                SerialOutcome::Cancelled
            }
            _ => SerialOutcome::NotActive,
        }
    }
}
