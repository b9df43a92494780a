//! Utility-maximizing baseline: proactive learning with travel costs.
//!
//! Each round scores every candidate location by the mutual information
//! of a measurement there minus `lambda` times the travel distance from
//! the current position, samples at the argmax, and applies the same
//! Bayesian update as the quantile searches. `lambda = 0` recovers
//! posterior-median sampling; larger values trade samples for distance.

use crate::error::{QslError, Result};
use crate::oracle::Oracle;
use crate::posterior::{mutual_information_at, PosteriorGrid, UpdateParams};
use crate::theory;
use crate::trace::{SearchTrace, TraceStep};

#[derive(Debug, Clone, PartialEq)]
pub struct ProactiveConfig {
    /// Travel-cost weight in `[0, 1]`.
    pub lambda: f64,
    /// Flip probability of the measurement channel.
    pub p: f64,
    /// Posterior bin width.
    pub delta: f64,
    /// Stopping half-width on the posterior support, used when `p == 0`.
    pub epsilon: f64,
    /// Single-bin stopping mass, used when `p > 0`.
    pub stop_mass: f64,
    /// Number of candidate locations; `None` evaluates every bin boundary.
    pub candidates: Option<usize>,
    pub max_steps: Option<usize>,
    pub start: f64,
    pub first_sample: Option<f64>,
}

impl ProactiveConfig {
    pub fn new(lambda: f64, p: f64) -> Result<Self> {
        let config = Self {
            lambda,
            p,
            delta: 1e-3,
            epsilon: 1e-3,
            stop_mass: 0.9,
            candidates: None,
            max_steps: None,
            start: 0.0,
            first_sample: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(QslError::Config(format!(
                "cost weight lambda = {} must lie in [0, 1]",
                self.lambda
            )));
        }
        if !(0.0..0.5).contains(&self.p) {
            return Err(QslError::Config(format!(
                "flip probability {} must lie in [0, 0.5)",
                self.p
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(QslError::Config(format!(
                "stopping half-width {} must be positive",
                self.epsilon
            )));
        }
        if !(self.stop_mass > 0.5 && self.stop_mass <= 1.0) {
            return Err(QslError::Config(format!(
                "stopping mass {} must lie in (0.5, 1]",
                self.stop_mass
            )));
        }
        if let Some(c) = self.candidates {
            if c < 2 {
                return Err(QslError::Config(
                    "candidate grid needs at least two locations".into(),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.start) {
            return Err(QslError::OutOfRange(self.start));
        }
        if let Some(x0) = self.first_sample {
            if !(0.0..=1.0).contains(&x0) {
                return Err(QslError::OutOfRange(x0));
            }
        }
        Ok(())
    }

    fn step_cap(&self) -> usize {
        match self.max_steps {
            Some(cap) => cap,
            None => {
                let eps = self.delta.min(0.249);
                10 * theory::samples_to_error(2.0, eps).max(1) as usize
            }
        }
    }

    fn stopped(&self, posterior: &PosteriorGrid) -> bool {
        if self.p == 0.0 {
            posterior.support_width() <= 2.0 * self.epsilon
        } else {
            posterior.max_bin_mass().0 >= self.stop_mass
        }
    }
}

/// Utility of sampling at a location whose posterior left-mass is `phi`,
/// seen from `position`.
fn utility(phi: f64, p: f64, lambda: f64, position: f64, x: f64) -> f64 {
    mutual_information_at(phi, p) - lambda * (position - x).abs()
}

/// Run the proactive search; the estimate is the posterior median.
pub fn proactive(
    oracle: &mut impl Oracle,
    config: &ProactiveConfig,
    mut posterior: PosteriorGrid,
) -> Result<SearchTrace> {
    config.validate()?;
    let oracle_p = oracle.flip_probability();
    if (oracle_p - config.p).abs() > 1e-12 {
        return Err(QslError::Misuse(format!(
            "oracle flip probability {oracle_p} does not match configured p = {}",
            config.p
        )));
    }
    let total: f64 = posterior.weights().iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(QslError::Config(
            "prior must be normalized to unit mass".into(),
        ));
    }

    let params = UpdateParams::new(config.p, 2.0)?;
    let cap = config.step_cap();
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut position = config.start;
    let mut distance = 0.0;
    let mut converged = true;

    loop {
        if config.stopped(&posterior) {
            break;
        }
        if steps.len() >= cap {
            converged = false;
            break;
        }

        let (x, chosen_utility) = match (steps.is_empty(), config.first_sample) {
            (true, Some(x0)) => {
                let phi = posterior.cdf(x0);
                (x0, utility(phi, config.p, config.lambda, position, x0))
            }
            _ => argmax_utility(&posterior, config, position),
        };

        let label = oracle.measure(x)?;
        posterior.update(x, label, &params)?;
        distance += (x - position).abs();
        position = x;
        steps.push(TraceStep {
            x,
            label,
            cum_distance: distance,
            interval: None,
            max_bin_mass: Some(posterior.max_bin_mass().0),
            median: Some(posterior.median()),
            utility: Some(chosen_utility),
        });
    }

    Ok(SearchTrace {
        start: config.start,
        steps,
        estimate: posterior.median(),
        converged,
    })
}

/// Maximize the utility over the candidate grid: the per-round selection
/// rule. Ties prefer the candidate nearest the current position, then
/// the smaller location.
pub fn argmax_utility(
    posterior: &PosteriorGrid,
    config: &ProactiveConfig,
    position: f64,
) -> (f64, f64) {
    let bins = posterior.bins();
    let mut best_x = 0.0;
    let mut best_u = f64::NEG_INFINITY;
    let mut best_dist = f64::INFINITY;

    let mut consider = |x: f64, phi: f64| {
        let u = utility(phi, config.p, config.lambda, position, x);
        let dist = (position - x).abs();
        let better = u > best_u
            || (u == best_u && (dist < best_dist || (dist == best_dist && x < best_x)));
        if better {
            best_x = x;
            best_u = u;
            best_dist = dist;
        }
    };

    match config.candidates {
        // Bin boundaries: one cumulative pass gives every phi exactly.
        None => {
            let mut cum = 0.0;
            consider(0.0, 0.0);
            for (i, &w) in posterior.weights().iter().enumerate() {
                cum += w;
                let x = (i + 1) as f64 / bins as f64;
                consider(x, cum.min(1.0));
            }
        }
        Some(count) => {
            for j in 0..count {
                let x = j as f64 / (count - 1) as f64;
                consider(x, posterior.cdf(x));
            }
        }
    }

    (best_x, best_u)
}
