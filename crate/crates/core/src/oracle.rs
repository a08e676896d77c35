//! Reference implementations kept deliberately naive and separate from the
//! production code paths, for use as test oracles.

use std::collections::VecDeque;

/// Scalar re-statement of the mixture update for a single pixel, held as
/// parallel arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePixel {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub weight: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ReferenceParams {
    pub k: usize,
    pub alpha: f64,
    pub threshold: f64,
    pub match_sigma: f64,
    pub init_var: f64,
    pub var_floor: f64,
    pub new_weight: f64,
    pub selective: bool,
}

impl Default for ReferenceParams {
    fn default() -> Self {
        Self {
            k: 3,
            alpha: 0.02,
            threshold: 0.7,
            match_sigma: 2.5,
            init_var: 225.0,
            var_floor: 25.0,
            new_weight: 0.05,
            selective: false,
        }
    }
}

impl ReferencePixel {
    pub fn new(value: u8, p: &ReferenceParams) -> Self {
        let mut px = Self { mean: vec![0.0; p.k], var: vec![0.0; p.k], weight: vec![0.0; p.k] };
        px.mean[0] = value as f64;
        px.var[0] = p.init_var;
        px.weight[0] = 1.0;
        px
    }

    fn rank(&self, i: usize) -> f64 {
        if self.weight[i] > 0.0 {
            self.weight[i] / self.var[i].sqrt()
        } else {
            0.0
        }
    }

    /// Returns `true` when `value` is foreground.
    pub fn step(&mut self, value: u8, p: &ReferenceParams) -> bool {
        let x = value as f64;
        // selection ordering: repeatedly take the best remaining, lowest index on ties
        let mut remaining: Vec<usize> = (0..p.k).collect();
        let mut order = Vec::with_capacity(p.k);
        while !remaining.is_empty() {
            let mut best = 0;
            for j in 1..remaining.len() {
                if self.rank(remaining[j]) > self.rank(remaining[best]) {
                    best = j;
                }
            }
            order.push(remaining.remove(best));
        }

        let mut in_background = vec![false; p.k];
        let mut acc = 0.0;
        for &i in &order {
            if self.weight[i] <= 0.0 || acc >= p.threshold {
                break;
            }
            in_background[i] = true;
            acc += self.weight[i];
        }

        let mut hit = None;
        for &i in &order {
            if self.weight[i] > 0.0 && (x - self.mean[i]).abs() <= p.match_sigma * self.var[i].sqrt() {
                hit = Some(i);
                break;
            }
        }
        let fg = match hit {
            Some(i) => !in_background[i],
            None => true,
        };
        if fg && p.selective {
            return fg;
        }

        if let Some(m) = hit {
            for i in 0..p.k {
                self.weight[i] *= 1.0 - p.alpha;
            }
            self.weight[m] += p.alpha;
            let d = x - self.mean[m];
            self.mean[m] += p.alpha * d;
            let v = (1.0 - p.alpha) * self.var[m] + p.alpha * d * d;
            self.var[m] = if v < p.var_floor { p.var_floor } else { v };
        } else {
            let mut lo = 0;
            for i in 0..p.k {
                if self.weight[i] < self.weight[lo] {
                    lo = i;
                }
            }
            self.mean[lo] = x;
            self.var[lo] = p.init_var;
            self.weight[lo] = p.new_weight;
        }
        let mut sum = 0.0;
        for i in 0..p.k {
            sum += self.weight[i];
        }
        for i in 0..p.k {
            self.weight[i] /= sum;
        }
        fg
    }
}

/// Connected component found by breadth-first flood fill.
#[derive(Debug, Clone, PartialEq)]
pub struct FloodComponent {
    pub pixel_count: usize,
    /// `(x, y, w, h)`
    pub bbox: (usize, usize, usize, usize),
    pub centroid: (f64, f64),
}

/// 8-connected components of `bits` (row-major), filtered by `min_area` and
/// ordered by bounding box top, then left, then first pixel in scan order.
pub fn flood_fill_components(width: usize, height: usize, bits: &[bool], min_area: usize) -> Vec<FloodComponent> {
    let mut seen = vec![false; bits.len()];
    let mut found = Vec::new();
    for start in 0..bits.len() {
        if !bits[start] || seen[start] {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut pixels = Vec::new();
        while let Some(i) = queue.pop_front() {
            pixels.push(i);
            let (x, y) = ((i % width) as i64, (i / width) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                        continue;
                    }
                    let j = ny as usize * width + nx as usize;
                    if bits[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if pixels.len() < min_area {
            continue;
        }
        pixels.sort_unstable();
        let xs = pixels.iter().map(|i| i % width);
        let ys = pixels.iter().map(|i| i / width);
        let (x0, x1) = (xs.clone().min().unwrap(), xs.clone().max().unwrap());
        let (y0, y1) = (ys.clone().min().unwrap(), ys.clone().max().unwrap());
        let sx: u64 = xs.map(|v| v as u64).sum();
        let sy: u64 = ys.map(|v| v as u64).sum();
        let n = pixels.len();
        found.push((
            (y0, x0, pixels[0]),
            FloodComponent {
                pixel_count: n,
                bbox: (x0, y0, x1 - x0 + 1, y1 - y0 + 1),
                centroid: (sx as f64 / n as f64, sy as f64 / n as f64),
            },
        ));
    }
    found.sort_by_key(|(k, _)| *k);
    found.into_iter().map(|(_, c)| c).collect()
}

/// Great-circle distance by the spherical law of cosines.
pub fn law_of_cosines_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dl = (lon2 - lon1).to_radians();
    let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
    crate::geo::EARTH_RADIUS_M * c.clamp(-1.0, 1.0).acos()
}

/// Index of the closest point under `dist`, smallest id on ties, by full scan.
pub fn argmin_scan<F: Fn(usize) -> f64>(ids: &[String], dist: F) -> Option<usize> {
    let mut best: Option<(f64, &str, usize)> = None;
    for (i, id) in ids.iter().enumerate() {
        let d = dist(i);
        let better = match best {
            None => true,
            Some((bd, bid, _)) => d < bd || (d == bd && id.as_str() < bid),
        };
        if better {
            best = Some((d, id, i));
        }
    }
    best.map(|b| b.2)
}
