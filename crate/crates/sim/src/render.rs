use fdf_core::vision::{Frame, Rect, Result, SeatMap};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::Lighting;

/// True when the centre of pixel `(x, y)` lies inside the ellipse inscribed in
/// the middle 60% of `rect`.
pub fn ellipse_contains(rect: &Rect, x: usize, y: usize) -> bool {
    let (cx, cy) = rect.center();
    let a = 0.3 * rect.w as f64;
    let b = 0.3 * rect.h as f64;
    if a <= 0.0 || b <= 0.0 {
        return false;
    }
    let dx = (x as f64 + 0.5 - cx) / a;
    let dy = (y as f64 + 0.5 - cy) / b;
    dx * dx + dy * dy <= 1.0
}

/// What a cabin camera sees: frame size, lighting preset and sensor noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CabinView {
    pub width: usize,
    pub height: usize,
    pub lighting: Lighting,
    pub noise_sigma: f64,
}

impl CabinView {
    pub fn render<R: Rng + ?Sized>(&self, seat_map: &SeatMap, occupied: &[bool], rng: &mut R, t: u64) -> Result<Frame> {
        render_cabin_frame(self, seat_map, occupied, rng, t)
    }
}

/// Synthetic ceiling view: flat cabin background, one bright ellipse per
/// occupied seat, additive Gaussian sensor noise clamped to `u8`.
pub fn render_cabin_frame<R: Rng + ?Sized>(
    view: &CabinView,
    seat_map: &SeatMap,
    occupied: &[bool],
    rng: &mut R,
    timestamp: u64,
) -> Result<Frame> {
    let &CabinView { width, height, lighting, noise_sigma } = view;
    let mut frame = Frame::filled(width, height, lighting.background(), timestamp)?;
    let fg = lighting.foreground();
    for (roi, _) in seat_map.rois.iter().zip(occupied).filter(|(_, &o)| o) {
        let r = roi.rect;
        for y in r.y..(r.y + r.h).min(height) {
            for x in r.x..(r.x + r.w).min(width) {
                if ellipse_contains(&r, x, y) {
                    frame.pixels_mut()[y * width + x] = fg;
                }
            }
        }
    }
    let sigma = lighting.noise(noise_sigma);
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("finite non-negative sigma");
        for p in frame.pixels_mut() {
            let v = *p as f64 + normal.sample(rng);
            *p = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(frame)
}
