use serde::{Deserialize, Serialize};

use super::{ForegroundMask, Frame, Result, VisionError};
use crate::Scalar;

/// One mixture component over pixel luminance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian<T> {
    pub mean: T,
    pub variance: T,
    pub weight: T,
}

impl<T: Scalar> Gaussian<T> {
    fn unused() -> Self {
        Self { mean: T::zero(), variance: T::zero(), weight: T::zero() }
    }

    fn is_used(&self) -> bool {
        self.weight > T::zero()
    }

    /// Ranking key; components with a larger weight and tighter spread come first.
    fn fitness(&self) -> T {
        if self.is_used() {
            self.weight / self.variance.sqrt()
        } else {
            T::zero()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct MixtureConfig<T> {
    /// Gaussians per pixel.
    pub components: usize,
    pub learning_rate: T,
    /// Cumulative weight that the background components must cover.
    pub background_threshold: T,
    /// A pixel matches a component when it is within this many standard deviations.
    pub match_sigma: T,
    pub initial_variance: T,
    pub variance_floor: T,
    /// Weight given to a component created for an unmatched pixel (before renormalisation).
    pub new_weight: T,
    /// When set, pixels classified as foreground leave their mixture untouched,
    /// so a stationary occupant is never absorbed into the background.
    pub selective_update: bool,
}

impl<T: Scalar> Default for MixtureConfig<T> {
    fn default() -> Self {
        Self {
            components: 3,
            learning_rate: T::lit(0.02),
            background_threshold: T::lit(0.7),
            match_sigma: T::lit(2.5),
            initial_variance: T::lit(225.0),
            variance_floor: T::lit(25.0),
            new_weight: T::lit(0.05),
            selective_update: false,
        }
    }
}

impl<T: Scalar> MixtureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(VisionError::Config(msg.to_string()));
        if self.components == 0 {
            return bad("components must be at least 1");
        }
        if !(self.learning_rate > T::zero() && self.learning_rate < T::one()) {
            return bad("learning_rate must lie in (0, 1)");
        }
        if !(self.background_threshold > T::zero() && self.background_threshold <= T::one()) {
            return bad("background_threshold must lie in (0, 1]");
        }
        if self.match_sigma.is_nan() || self.match_sigma <= T::zero() {
            return bad("match_sigma must be positive");
        }
        if self.variance_floor.is_nan() || self.variance_floor <= T::zero() {
            return bad("variance_floor must be positive");
        }
        if !self.initial_variance.is_finite() || self.initial_variance < self.variance_floor {
            return bad("initial_variance must be finite and at least variance_floor");
        }
        if !(self.new_weight > T::zero() && self.new_weight <= T::one()) {
            return bad("new_weight must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Adaptive per-pixel mixture of Gaussians.
///
/// Components for pixel `i` live at `components[i * K..(i + 1) * K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel<T> {
    width: usize,
    height: usize,
    config: MixtureConfig<T>,
    components: Vec<Gaussian<T>>,
}

impl<T: Scalar> MixtureModel<T> {
    /// Seeds the model from a frame assumed to show only background.
    pub fn init(frame: &Frame, config: MixtureConfig<T>) -> Result<Self> {
        Self::init_pixels(frame.width(), frame.height(), frame.pixels(), config)
    }

    /// Same as [`MixtureModel::init`] on a raw row-major buffer of any size.
    pub fn init_pixels(width: usize, height: usize, pixels: &[u8], config: MixtureConfig<T>) -> Result<Self> {
        config.validate()?;
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(VisionError::Shape(format!("{} pixels for {width}x{height}", pixels.len())));
        }
        let k = config.components;
        let mut components = vec![Gaussian::unused(); pixels.len() * k];
        for (i, &p) in pixels.iter().enumerate() {
            components[i * k] = Gaussian {
                mean: T::from_u8(p).unwrap(),
                variance: config.initial_variance,
                weight: T::one(),
            };
        }
        Ok(Self { width, height, config, components })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn config(&self) -> &MixtureConfig<T> {
        &self.config
    }

    /// Mixture of the pixel at `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> &[Gaussian<T>] {
        let k = self.config.components;
        let i = y * self.width + x;
        &self.components[i * k..(i + 1) * k]
    }

    /// Classifies `frame` against the current model, then adapts the model to it.
    pub fn update(&mut self, frame: &Frame) -> Result<ForegroundMask> {
        self.update_pixels(frame.width(), frame.height(), frame.pixels())
    }

    pub fn update_pixels(&mut self, width: usize, height: usize, pixels: &[u8]) -> Result<ForegroundMask> {
        if width != self.width || height != self.height || pixels.len() != width * height {
            return Err(VisionError::Shape(format!(
                "frame {width}x{height} does not match model {}x{}",
                self.width, self.height
            )));
        }
        let k = self.config.components;
        let mut scratch = Scratch::default();
        let bits = self
            .components
            .chunks_exact_mut(k)
            .zip(pixels)
            .map(|(mixture, &p)| update_mixture(mixture, T::from_u8(p).unwrap(), &self.config, &mut scratch))
            .collect();
        ForegroundMask::new(width, height, bits)
    }
}

// Per-pixel working buffers, reused across a frame.
#[derive(Default)]
struct Scratch {
    order: Vec<usize>,
    background: Vec<bool>,
}

/// Classifies one pixel value and updates its mixture. Returns `true` for foreground.
///
/// Components are ranked by `weight / sigma` (descending, stable). The background
/// set is the ranked prefix taken while the weight accumulated so far is below the
/// threshold. The value matches the first ranked component within `match_sigma`
/// standard deviations; it is foreground unless that component is in the
/// background set.
fn update_mixture<T: Scalar>(
    mixture: &mut [Gaussian<T>],
    value: T,
    cfg: &MixtureConfig<T>,
    scratch: &mut Scratch,
) -> bool {
    let k = mixture.len();
    let Scratch { order, background } = scratch;
    order.clear();
    order.extend(0..k);
    order.sort_by(|&a, &b| {
        mixture[b]
            .fitness()
            .partial_cmp(&mixture[a].fitness())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    background.clear();
    background.resize(k, false);
    let mut cumulative = T::zero();
    for &i in order.iter() {
        if !mixture[i].is_used() || cumulative >= cfg.background_threshold {
            break;
        }
        background[i] = true;
        cumulative = cumulative + mixture[i].weight;
    }

    let matched = order.iter().copied().find(|&i| {
        let g = &mixture[i];
        g.is_used() && (value - g.mean).abs() <= cfg.match_sigma * g.variance.sqrt()
    });
    let foreground = matched.is_none_or(|i| !background[i]);
    if foreground && cfg.selective_update {
        return true;
    }

    let alpha = cfg.learning_rate;
    match matched {
        Some(m) => {
            for g in mixture.iter_mut() {
                g.weight = (T::one() - alpha) * g.weight;
            }
            let g = &mut mixture[m];
            g.weight = g.weight + alpha;
            let diff = value - g.mean;
            g.mean = g.mean + alpha * diff;
            g.variance = ((T::one() - alpha) * g.variance + alpha * diff * diff).max(cfg.variance_floor);
        }
        None => {
            let mut weakest = 0;
            for i in 1..k {
                if mixture[i].weight < mixture[weakest].weight {
                    weakest = i;
                }
            }
            mixture[weakest] = Gaussian { mean: value, variance: cfg.initial_variance, weight: cfg.new_weight };
        }
    }

    let total = mixture.iter().fold(T::zero(), |acc, g| acc + g.weight);
    for g in mixture.iter_mut() {
        g.weight = g.weight / total;
    }
    foreground
}
