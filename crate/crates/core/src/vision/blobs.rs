use serde::{Deserialize, Serialize};

use super::ForegroundMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// An 8-connected component of foreground pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub pixel_count: usize,
    pub bounding_box: BoundingBox,
    /// Mean pixel coordinate `(x, y)`.
    pub centroid: (f64, f64),
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        Self { parent: Vec::new() }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut a: u32) -> u32 {
        while self.parent[a as usize] != a {
            let grand = self.parent[self.parent[a as usize] as usize];
            self.parent[a as usize] = grand;
            a = grand;
        }
        a
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so that labels follow scan order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

#[derive(Clone, Copy)]
struct Accum {
    first: usize,
    count: usize,
    min_x: usize,
    min_y: usize,
    max_x: usize,
    max_y: usize,
    sum_x: u64,
    sum_y: u64,
}

/// Labels 8-connected foreground components and keeps those with at least
/// `min_area` pixels, ordered by bounding box top then left edge.
pub fn extract_blobs(mask: &ForegroundMask, min_area: usize) -> Vec<Blob> {
    const NONE: u32 = u32::MAX;
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![NONE; w * h];
    let mut sets = DisjointSet::new();

    // first pass: provisional labels from the already-visited neighbours
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let mut label = NONE;
            let mut neighbours = [NONE; 4];
            if x > 0 {
                neighbours[0] = labels[y * w + x - 1];
            }
            if y > 0 {
                let up = (y - 1) * w;
                if x > 0 {
                    neighbours[1] = labels[up + x - 1];
                }
                neighbours[2] = labels[up + x];
                if x + 1 < w {
                    neighbours[3] = labels[up + x + 1];
                }
            }
            for n in neighbours.into_iter().filter(|&n| n != NONE) {
                if label == NONE {
                    label = n;
                } else {
                    sets.union(label, n);
                }
            }
            if label == NONE {
                label = sets.make();
            }
            labels[y * w + x] = label;
        }
    }

    // second pass: accumulate statistics per root
    let mut accums: Vec<Option<Accum>> = vec![None; sets.parent.len()];
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == NONE {
                continue;
            }
            let root = sets.find(l) as usize;
            let a = accums[root].get_or_insert(Accum {
                first: y * w + x,
                count: 0,
                min_x: x,
                min_y: y,
                max_x: x,
                max_y: y,
                sum_x: 0,
                sum_y: 0,
            });
            a.count += 1;
            a.min_x = a.min_x.min(x);
            a.max_x = a.max_x.max(x);
            a.max_y = a.max_y.max(y);
            a.sum_x += x as u64;
            a.sum_y += y as u64;
        }
    }

    let mut kept: Vec<Accum> = accums.into_iter().flatten().filter(|a| a.count >= min_area.max(1)).collect();
    kept.sort_by_key(|a| (a.min_y, a.min_x, a.first));
    kept.into_iter()
        .map(|a| Blob {
            pixel_count: a.count,
            bounding_box: BoundingBox {
                x: a.min_x,
                y: a.min_y,
                w: a.max_x - a.min_x + 1,
                h: a.max_y - a.min_y + 1,
            },
            centroid: (a.sum_x as f64 / a.count as f64, a.sum_y as f64 / a.count as f64),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(mask: &mut ForegroundMask, x0: usize, y0: usize, side: usize) {
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                mask.set(x, y, true);
            }
        }
    }

    #[test]
    fn empty_mask_has_no_blobs() {
        assert!(extract_blobs(&ForegroundMask::empty(32, 32), 1).is_empty());
    }

    #[test]
    fn two_squares() {
        let mut m = ForegroundMask::empty(32, 32);
        square(&mut m, 2, 2, 5);
        square(&mut m, 20, 10, 5);
        let blobs = extract_blobs(&m, 10);
        assert_eq!(blobs.len(), 2);
        assert!(blobs.iter().all(|b| b.pixel_count == 25));
        assert_eq!(blobs[0].bounding_box, BoundingBox { x: 2, y: 2, w: 5, h: 5 });
        assert_eq!(blobs[0].centroid, (4.0, 4.0));
        assert_eq!(blobs[1].centroid, (22.0, 12.0));
    }

    #[test]
    fn diagonal_pixels_connect() {
        let mut m = ForegroundMask::empty(16, 16);
        m.set(3, 3, true);
        m.set(4, 4, true);
        m.set(5, 3, true);
        let blobs = extract_blobs(&m, 1);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].pixel_count, 3);
    }

    #[test]
    fn u_shape_merges_late() {
        // two arms only joined on the bottom row
        let mut m = ForegroundMask::empty(16, 16);
        for y in 0..5 {
            m.set(1, y, true);
            m.set(6, y, true);
        }
        for x in 1..=6 {
            m.set(x, 5, true);
        }
        let blobs = extract_blobs(&m, 1);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].pixel_count, 16);
    }

    #[test]
    fn min_area_filters_small_components() {
        let mut m = ForegroundMask::empty(16, 16);
        square(&mut m, 0, 0, 2);
        square(&mut m, 8, 8, 4);
        let blobs = extract_blobs(&m, 5);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].pixel_count, 16);
    }
}
