//! Hidden step functions and the noisy binary measurement channel.
//!
//! The measurable environment for every 1D search is a step function on
//! the unit interval: label 1 on `[0, theta)`, label 0 on `[theta, 1]`.
//! Each measurement is flipped independently with probability `p`, so the
//! observed label is `f(x) XOR U` with `U ~ Bernoulli(p)`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QslError, Result};

/// Binary measurement source over the unit interval.
pub trait Oracle {
    /// Take one measurement at `x`, consuming exactly one RNG draw.
    fn measure(&mut self, x: f64) -> Result<bool>;

    /// Probability that a single label is flipped.
    fn flip_probability(&self) -> f64;
}

/// Step function with a hidden change point and a symmetric flip channel.
///
/// One uniform draw is consumed per measurement even when `p == 0`, so
/// oracles built from the same seed produce comparable traces across
/// noise settings.
#[derive(Debug, Clone)]
pub struct StepOracle {
    theta: f64,
    p: f64,
    rng: ChaCha8Rng,
}

impl StepOracle {
    pub fn new(theta: f64, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(QslError::Config(format!(
                "change point {theta} must lie in [0, 1]"
            )));
        }
        check_flip_probability(p)?;
        Ok(Self {
            theta,
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Noiseless label at `x`: the indicator of `[0, theta)`.
    pub fn noiseless(&self, x: f64) -> bool {
        x < self.theta
    }
}

impl Oracle for StepOracle {
    fn measure(&mut self, x: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&x) {
            return Err(QslError::OutOfRange(x));
        }
        let flip = unit_f64(&mut self.rng) < self.p;
        Ok(self.noiseless(x) ^ flip)
    }

    fn flip_probability(&self) -> f64 {
        self.p
    }
}

pub(crate) fn check_flip_probability(p: f64) -> Result<()> {
    if !(0.0..0.5).contains(&p) {
        return Err(QslError::Config(format!(
            "flip probability {p} must lie in [0, 0.5)"
        )));
    }
    Ok(())
}

/// Uniform draw on [0, 1) from the top 53 bits of one `u64`.
pub(crate) fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
