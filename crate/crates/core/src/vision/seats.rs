use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Blob, Result, VisionError};

/// Axis-aligned pixel rectangle, half-open on the right and bottom edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn contains_point(&self, px: f64, py: f64) -> bool {
        px >= self.x as f64 && px < (self.x + self.w) as f64 && py >= self.y as f64 && py < (self.y + self.h) as f64
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x < other.x + other.w && other.x < self.x + self.w && self.y < other.y + other.h && other.y < self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x as f64 + self.w as f64 / 2.0, self.y as f64 + self.h as f64 / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatRoi {
    pub seat_id: u32,
    #[serde(flatten)]
    pub rect: Rect,
}

/// Seat regions of one bus model, in frame pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatMap {
    pub bus_model_id: String,
    pub total_seats: usize,
    pub rois: Vec<SeatRoi>,
}

impl SeatMap {
    /// Regular `cols` x `rows` layout covering a `width` x `height` frame, each
    /// cell shrunk by `gap` pixels on its right and bottom edge. Seat ids run
    /// row-major from 1.
    pub fn grid(bus_model_id: &str, cols: usize, rows: usize, width: usize, height: usize, gap: usize) -> Self {
        let (cw, ch) = (width / cols, height / rows);
        let rois = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .enumerate()
            .map(|(i, (r, c))| SeatRoi {
                seat_id: i as u32 + 1,
                rect: Rect { x: c * cw, y: r * ch, w: cw - gap, h: ch - gap },
            })
            .collect::<Vec<_>>();
        Self { bus_model_id: bus_model_id.to_string(), total_seats: rois.len(), rois }
    }

    /// The 60-seat, 320x240 layout used by default in simulations.
    pub fn standard_60() -> Self {
        Self::grid("standard-60", 10, 6, 320, 240, 2)
    }

    /// Checks the structural invariants, and frame bounds when dimensions are given.
    pub fn validate(&self, frame: Option<(usize, usize)>) -> Result<()> {
        let bad = |m: String| Err(VisionError::InvalidSeatMap(m));
        if self.rois.len() != self.total_seats {
            return bad(format!("{} rois for {} total seats", self.rois.len(), self.total_seats));
        }
        for (i, a) in self.rois.iter().enumerate() {
            if a.rect.w == 0 || a.rect.h == 0 {
                return bad(format!("seat {} has an empty region", a.seat_id));
            }
            if let Some((w, h)) = frame {
                if a.rect.x + a.rect.w > w || a.rect.y + a.rect.h > h {
                    return bad(format!("seat {} lies outside the {w}x{h} frame", a.seat_id));
                }
            }
            for b in &self.rois[i + 1..] {
                if a.seat_id == b.seat_id {
                    return bad(format!("duplicate seat id {}", a.seat_id));
                }
                if a.rect.intersects(&b.rect) {
                    return bad(format!("seats {} and {} overlap", a.seat_id, b.seat_id));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let map: SeatMap = serde_json::from_str(text).map_err(|e| VisionError::InvalidSeatMap(e.to_string()))?;
        map.validate(None)?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VisionError::InvalidSeatMap(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("seat map serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatCounts {
    pub occupied: usize,
    pub empty: usize,
    pub total: usize,
}

impl SeatCounts {
    pub fn is_consistent(&self) -> bool {
        self.occupied + self.empty == self.total
    }
}

/// Per-seat occupied flags, aligned with the seat map's `rois`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeatOccupancy {
    occupied: Vec<bool>,
}

impl SeatOccupancy {
    pub fn new(occupied: Vec<bool>) -> Self {
        Self { occupied }
    }

    pub fn all_empty(total: usize) -> Self {
        Self { occupied: vec![false; total] }
    }

    pub fn seats(&self) -> &[bool] {
        &self.occupied
    }

    pub fn occupied(&self) -> usize {
        self.occupied.iter().filter(|o| **o).count()
    }

    pub fn total(&self) -> usize {
        self.occupied.len()
    }

    pub fn empty(&self) -> usize {
        self.total() - self.occupied()
    }

    pub fn counts(&self) -> SeatCounts {
        count_availability(self)
    }
}

/// Marks each seat whose region contains at least one blob centroid.
pub fn assign_blobs_to_seats(blobs: &[Blob], seat_map: &SeatMap) -> SeatOccupancy {
    let occupied = seat_map
        .rois
        .iter()
        .map(|roi| blobs.iter().any(|b| roi.rect.contains_point(b.centroid.0, b.centroid.1)))
        .collect();
    SeatOccupancy { occupied }
}

/// Empty seats are the total minus the detected occupants.
pub fn count_availability(occupancy: &SeatOccupancy) -> SeatCounts {
    let total = occupancy.total();
    let occupied = occupancy.occupied();
    SeatCounts { occupied, empty: total - occupied, total }
}
