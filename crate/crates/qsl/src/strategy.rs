//! Uniform dispatch over the 1D search strategies.

use serde::{Deserialize, Serialize};

use crate::dqs::{dqs, dqs_with_init};
use crate::error::{QslError, Result};
use crate::oracle::Oracle;
use crate::posterior::PosteriorGrid;
use crate::pqs::{pqs, tpqs, ProbSearchConfig};
use crate::proactive::{proactive, ProactiveConfig};
use crate::trace::SearchTrace;

/// A 1D search strategy with its tradeoff parameter. Bisection is the
/// `m = 2` quantile search: deterministic when the channel is noiseless,
/// posterior-median sampling otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum SearchStrategy {
    Bisection,
    Dqs { m: f64 },
    Pqs { m: f64 },
    Tpqs { m: f64 },
    Proactive { lambda: f64 },
}

impl SearchStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            SearchStrategy::Bisection => "bisection",
            SearchStrategy::Dqs { .. } => "dqs",
            SearchStrategy::Pqs { .. } => "pqs",
            SearchStrategy::Tpqs { .. } => "tpqs",
            SearchStrategy::Proactive { .. } => "proactive",
        }
    }

    /// The tradeoff parameter: `m`, `lambda`, or 2 for plain bisection.
    pub fn parameter(&self) -> f64 {
        match self {
            SearchStrategy::Bisection => 2.0,
            SearchStrategy::Dqs { m } | SearchStrategy::Pqs { m } | SearchStrategy::Tpqs { m } => {
                *m
            }
            SearchStrategy::Proactive { lambda } => *lambda,
        }
    }

    /// Whether the strategy tolerates a noisy channel.
    pub fn noise_tolerant(&self) -> bool {
        !matches!(self, SearchStrategy::Dqs { .. })
    }
}

/// Shared knobs for a single 1D search run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Stopping half-width for feasible-interval and support stopping.
    pub epsilon: f64,
    /// Posterior bin width.
    pub delta: f64,
    /// Flip probability of the channel.
    pub p: f64,
    /// Surrogate update probability; `None` uses `p`.
    pub p_update: Option<f64>,
    /// Single-bin stopping mass for posterior searches.
    pub stop_mass: f64,
    pub max_steps: Option<usize>,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            delta: 1e-3,
            p: 0.0,
            p_update: None,
            stop_mass: 0.9,
            max_steps: None,
        }
    }
}

/// Run one search from `start`. `first_sample` forces the first
/// measurement location (initialization from a neighboring estimate) and
/// `prior` replaces the uniform prior for posterior-driven strategies.
pub fn run_search(
    oracle: &mut impl Oracle,
    strategy: SearchStrategy,
    params: &SearchParams,
    start: f64,
    first_sample: Option<f64>,
    prior: Option<PosteriorGrid>,
) -> Result<SearchTrace> {
    let noiseless = params.p == 0.0;
    let resolved = match strategy {
        SearchStrategy::Bisection => {
            if noiseless {
                SearchStrategy::Dqs { m: 2.0 }
            } else {
                SearchStrategy::Pqs { m: 2.0 }
            }
        }
        other => other,
    };

    match resolved {
        SearchStrategy::Dqs { m } => match first_sample {
            Some(x0) => dqs_with_init(oracle, m, params.epsilon, x0, Some(start)),
            None => dqs(oracle, m, params.epsilon, start),
        },
        SearchStrategy::Pqs { m } | SearchStrategy::Tpqs { m } => {
            let config = ProbSearchConfig {
                m,
                p: params.p,
                p_update: params.p_update.unwrap_or(params.p),
                delta: params.delta,
                stop_mass: params.stop_mass,
                max_steps: params.max_steps,
                start,
                first_sample,
            };
            let prior = match prior {
                Some(grid) => grid,
                None => PosteriorGrid::uniform(params.delta)?,
            };
            if matches!(resolved, SearchStrategy::Pqs { .. }) {
                pqs(oracle, &config, prior)
            } else {
                tpqs(oracle, &config, prior)
            }
        }
        SearchStrategy::Proactive { lambda } => {
            let config = ProactiveConfig {
                lambda,
                p: params.p,
                delta: params.delta,
                epsilon: params.epsilon,
                stop_mass: params.stop_mass,
                candidates: None,
                max_steps: params.max_steps,
                start,
                first_sample,
            };
            let prior = match prior {
                Some(grid) => grid,
                None => PosteriorGrid::uniform(params.delta)?,
            };
            proactive(oracle, &config, prior)
        }
        SearchStrategy::Bisection => unreachable!("bisection resolved above"),
    }
}

/// Reject strategy/parameter combinations before any sampling happens.
pub fn validate_strategy(strategy: SearchStrategy, params: &SearchParams) -> Result<()> {
    if !strategy.noise_tolerant() && params.p != 0.0 {
        return Err(QslError::Misuse(format!(
            "{} requires noiseless measurements, got p = {}",
            strategy.name(),
            params.p
        )));
    }
    match strategy {
        SearchStrategy::Proactive { lambda } if !(0.0..=1.0).contains(&lambda) => {
            Err(QslError::Config(format!(
                "cost weight lambda = {lambda} must lie in [0, 1]"
            )))
        }
        SearchStrategy::Dqs { m } | SearchStrategy::Pqs { m } | SearchStrategy::Tpqs { m }
            if !(m >= 2.0) =>
        {
            Err(QslError::Config(format!(
                "search parameter m = {m} must be at least 2"
            )))
        }
        _ => Ok(()),
    }
}
