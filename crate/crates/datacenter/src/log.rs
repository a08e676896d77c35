use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, LineWriter, Write};
use std::path::{Path, PathBuf};

use fdf_core::route::{BusRegistration, Route, Stop};
use fdf_core::GeoPoint;
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::model::{Booking, BusReport, PassengerSession};
use crate::DatacenterError;

/// A state change, as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    StopRegistered { stop: Stop },
    RouteRegistered { route: Route },
    BusRegistered { bus: BusRegistration },
    PassengerRegistered { session: PassengerSession },
    LocationUpdated { passenger_id: String, location: GeoPoint },
    /// Stored with `offset_m` and `speed_mps` resolved.
    ReportIngested { report: BusReport },
    BookingRecorded { booking: Booking },
    BookingCancelled { booking_id: String, bus_id: String },
}

impl Event {
    pub fn store(&self) -> StoreFile {
        match self {
            Event::StopRegistered { .. } | Event::RouteRegistered { .. } => StoreFile::Routes,
            Event::BusRegistered { .. } | Event::ReportIngested { .. } => StoreFile::Buses,
            Event::PassengerRegistered { .. } | Event::LocationUpdated { .. } => StoreFile::Passengers,
            Event::BookingRecorded { .. } | Event::BookingCancelled { .. } => StoreFile::Bookings,
        }
    }
}

/// One line of an event log. `seq` is global across all store files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub seq: u64,
    #[serde(flatten)]
    pub event: Event,
}

/// The per-role log files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreFile {
    /// Route server.
    Routes,
    /// Passenger server.
    Passengers,
    /// Bus station server.
    Buses,
    Bookings,
}

impl StoreFile {
    pub const ALL: [StoreFile; 4] = [StoreFile::Routes, StoreFile::Passengers, StoreFile::Buses, StoreFile::Bookings];

    pub fn file_name(self) -> &'static str {
        match self {
            StoreFile::Routes => "routes.jsonl",
            StoreFile::Passengers => "passengers.jsonl",
            StoreFile::Buses => "buses.jsonl",
            StoreFile::Bookings => "bookings.jsonl",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

pub(crate) struct EventLog {
    dir: PathBuf,
    writers: Vec<Mutex<LineWriter<File>>>,
}

impl EventLog {
    /// Opens (creating if needed) the log directory and returns the existing
    /// records in `seq` order.
    pub(crate) fn open(dir: &Path) -> Result<(Self, Vec<Record>), DatacenterError> {
        std::fs::create_dir_all(dir)?;
        let mut records = Vec::new();
        let mut writers = Vec::new();
        for store in StoreFile::ALL {
            let path = dir.join(store.file_name());
            if path.exists() {
                let reader = BufReader::new(File::open(&path)?);
                for (n, line) in reader.lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let record: Record = serde_json::from_str(&line).map_err(|e| {
                        DatacenterError::Storage(format!("{}:{}: {e}", path.display(), n + 1))
                    })?;
                    records.push(record);
                }
            }
            let file = OpenOptions::new().create(true).append(true).open(&path)?;
            writers.push(Mutex::new(LineWriter::new(file)));
        }
        records.sort_by_key(|r| r.seq);
        Ok((Self { dir: dir.to_path_buf(), writers }, records))
    }

    pub(crate) fn append(&self, record: &Record) -> Result<(), DatacenterError> {
        let line = serde_json::to_string(record).map_err(|e| DatacenterError::Storage(e.to_string()))?;
        let mut w = self.writers[record.event.store().index()].lock();
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub(crate) fn flush(&self) -> Result<(), DatacenterError> {
        for w in &self.writers {
            let mut w = w.lock();
            w.flush()?;
            w.get_ref().sync_data()?;
        }
        Ok(())
    }

    pub(crate) fn dir(&self) -> &Path {
        &self.dir
    }
}
