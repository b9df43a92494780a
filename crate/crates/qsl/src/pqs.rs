//! Probabilistic quantile search and its truncated variant.
//!
//! Both maintain a discretized posterior over the change point. The plain
//! search samples at the `1/m` posterior quantile each round. The
//! truncated variant first removes the tail mass that could pull the next
//! sample away from the posterior median, then picks whichever of the two
//! symmetric quantile candidates of the truncated density is nearer to
//! the current location, so every move heads toward the median. Both stop
//! once a single bin holds at least `stop_mass` probability.

use crate::error::{QslError, Result};
use crate::oracle::Oracle;
use crate::posterior::{PosteriorGrid, UpdateParams};
use crate::theory;
use crate::trace::{SearchTrace, TraceStep};

/// Parameters for a posterior-driven search.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbSearchConfig {
    /// Search parameter, real-valued, at least 2.
    pub m: f64,
    /// True flip probability of the measurement channel.
    pub p: f64,
    /// Probability used inside the Bayesian update. Equals `p` unless the
    /// discretized surrogate variant is requested.
    pub p_update: f64,
    /// Posterior bin width.
    pub delta: f64,
    /// Single-bin mass at which the search terminates.
    pub stop_mass: f64,
    /// Step cap; `None` picks ten times the noiseless sample count
    /// predicted for an error of one bin width.
    pub max_steps: Option<usize>,
    /// Position of the craft before the first sample.
    pub start: f64,
    /// Forced first sample location, used when a neighboring strip's
    /// estimate initializes the search.
    pub first_sample: Option<f64>,
}

impl ProbSearchConfig {
    pub fn new(m: f64, p: f64) -> Result<Self> {
        let config = Self {
            m,
            p,
            p_update: p,
            delta: 1e-3,
            stop_mass: 0.9,
            max_steps: None,
            start: 0.0,
            first_sample: None,
        };
        config.validate()?;
        Ok(config)
    }

    /// Substitute a surrogate update probability `alpha >= p`.
    pub fn with_update_probability(mut self, alpha: f64) -> Result<Self> {
        self.p_update = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 2.0) {
            return Err(QslError::Config(format!(
                "search parameter m = {} must be at least 2",
                self.m
            )));
        }
        if !(0.0..0.5).contains(&self.p) {
            return Err(QslError::Config(format!(
                "flip probability {} must lie in [0, 0.5)",
                self.p
            )));
        }
        if !(self.p_update >= self.p && self.p_update < 0.5) {
            return Err(QslError::Config(format!(
                "update probability {} must lie in [p, 0.5)",
                self.p_update
            )));
        }
        if !(self.stop_mass > 0.5 && self.stop_mass <= 1.0) {
            return Err(QslError::Config(format!(
                "stopping mass {} must lie in (0.5, 1]",
                self.stop_mass
            )));
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
                10 * theory::samples_to_error(self.m, eps).max(1) as usize
            }
        }
    }
}

/// True once a single bin carries at least `stop_mass` probability.
pub fn stopping_reached(grid: &PosteriorGrid, stop_mass: f64) -> bool {
    grid.max_bin_mass().0 >= stop_mass
}

#[derive(Clone, Copy, PartialEq)]
enum Variant {
    Plain,
    Truncated,
}

/// Probabilistic quantile search: sample at the `1/m` posterior quantile,
/// update, and stop on the single-bin mass rule. The estimate is the
/// posterior median.
pub fn pqs(
    oracle: &mut impl Oracle,
    config: &ProbSearchConfig,
    prior: PosteriorGrid,
) -> Result<SearchTrace> {
    run(oracle, config, prior, Variant::Plain)
}

/// Truncated probabilistic quantile search; identical to [`pqs`] at
/// `m = 2`, and identical to the deterministic search (to bin resolution)
/// when the channel is noiseless.
pub fn tpqs(
    oracle: &mut impl Oracle,
    config: &ProbSearchConfig,
    prior: PosteriorGrid,
) -> Result<SearchTrace> {
    run(oracle, config, prior, Variant::Truncated)
}

fn run(
    oracle: &mut impl Oracle,
    config: &ProbSearchConfig,
    mut posterior: PosteriorGrid,
    variant: Variant,
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

    let params = UpdateParams::new(config.p_update, config.m)?;
    let cap = config.step_cap();
    let mut scratch = posterior.clone();
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut position = config.start;
    let mut distance = 0.0;
    let mut converged = true;

    loop {
        if stopping_reached(&posterior, config.stop_mass) {
            break;
        }
        if steps.len() >= cap {
            converged = false;
            break;
        }

        let x = if steps.is_empty() {
            match config.first_sample {
                Some(x0) => x0,
                None => posterior.quantile(1.0 / config.m),
            }
        } else if variant == Variant::Plain || config.m == 2.0 {
            // At m = 2 both truncated candidates coincide with the
            // posterior median, which is exactly the 1/m quantile.
            posterior.quantile(1.0 / config.m)
        } else {
            posterior.truncate_tails_into(&mut scratch, position);
            let low = scratch.quantile(1.0 / config.m);
            let high = scratch.quantile((config.m - 1.0) / config.m);
            if (low - position).abs() <= (high - position).abs() {
                low
            } else {
                high
            }
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
            utility: None,
        });
    }

    Ok(SearchTrace {
        start: config.start,
        steps,
        estimate: posterior.median(),
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqs::dqs;
    use crate::oracle::StepOracle;
    use crate::posterior::PosteriorGrid;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn uniform(config: &ProbSearchConfig) -> PosteriorGrid {
        PosteriorGrid::uniform(config.delta).unwrap()
    }

    #[test]
    fn first_sample_at_inverse_m() {
        for &m in &[2.0, 5.0, 10.0, 33.0] {
            let config = ProbSearchConfig::new(m, 0.1).unwrap();
            let mut oracle = StepOracle::new(0.6, 0.1, 4).unwrap();
            let trace = pqs(&mut oracle, &config, uniform(&config)).unwrap();
            assert_close(trace.steps[0].x, 1.0 / m, 1e-9);
        }
    }

    #[test]
    fn m2_pqs_and_tpqs_traces_identical() {
        let config = ProbSearchConfig::new(2.0, 0.1).unwrap();
        for seed in 0..20 {
            let mut a = StepOracle::new(0.7, 0.1, seed).unwrap();
            let mut b = StepOracle::new(0.7, 0.1, seed).unwrap();
            let plain = pqs(&mut a, &config, uniform(&config)).unwrap();
            let truncated = tpqs(&mut b, &config, uniform(&config)).unwrap();
            assert_eq!(plain, truncated);
        }
    }

    #[test]
    fn noiseless_tpqs_tracks_dqs_within_one_bin() {
        let config = ProbSearchConfig {
            stop_mass: 0.9,
            ..ProbSearchConfig::new(5.0, 0.0).unwrap()
        };
        for k in 0..10 {
            let theta = (k as f64 + 0.5) / 10.0;
            let mut a = StepOracle::new(theta, 0.0, 1).unwrap();
            let probabilistic = tpqs(&mut a, &config, uniform(&config)).unwrap();
            let mut b = StepOracle::new(theta, 0.0, 1).unwrap();
            let deterministic = dqs(&mut b, 5.0, config.delta / 2.0, 0.0).unwrap();
            // Compare while both traces observe the same labels; a
            // one-bin location offset can flip a label once the bracket
            // straddles theta, after which the states differ.
            for (i, (sp, sd)) in probabilistic
                .steps
                .iter()
                .zip(&deterministic.steps)
                .enumerate()
            {
                assert!(
                    (sp.x - sd.x).abs() <= config.delta + 1e-12,
                    "theta={theta} step {i}: {} vs {}",
                    sp.x,
                    sd.x
                );
                if sp.label != sd.label {
                    break;
                }
            }
            assert!((probabilistic.estimate - theta).abs() <= config.delta + 1e-12);
        }
    }

    #[test]
    fn converges_on_most_seeds() {
        // Monte Carlo self-check: p=0.1, m=2, theta=0.7 reaches 0.01
        // accuracy within 60 samples on at least 95% of seeds.
        let config = ProbSearchConfig {
            max_steps: Some(60),
            ..ProbSearchConfig::new(2.0, 0.1).unwrap()
        };
        let runs = 1000;
        let mut hits = 0;
        for seed in 0..runs {
            let mut oracle = StepOracle::new(0.7, 0.1, seed).unwrap();
            let trace = pqs(&mut oracle, &config, uniform(&config)).unwrap();
            if (trace.estimate - 0.7).abs() <= 0.01 {
                hits += 1;
            }
        }
        assert!(
            hits * 100 >= runs * 95,
            "only {hits}/{runs} runs reached 0.01 accuracy"
        );
    }

    #[test]
    fn stopping_rule_thresholds() {
        let grid = PosteriorGrid::uniform(0.01).unwrap();
        assert!(!stopping_reached(&grid, 0.9));

        let mut point = vec![0.0; 10];
        point[3] = 1.0;
        let point = PosteriorGrid::from_weights(point).unwrap();
        assert!(stopping_reached(&point, 0.9));

        let mut near = vec![0.101 / 9.0; 10];
        near[4] = 0.899;
        let near = PosteriorGrid::from_weights(near).unwrap();
        assert!(!stopping_reached(&near, 0.9));
        assert!(stopping_reached(&near, 0.899));
    }

    #[test]
    fn truncated_step_from_support_edge() {
        // Uniform mass on [0.2, 0.6], craft at 0.6: the upper candidate is
        // nearer, one fifth of the support back from the edge.
        let mut weights = vec![0.0; 100];
        for w in &mut weights[20..60] {
            *w = 1.0;
        }
        let posterior = PosteriorGrid::from_weights(weights).unwrap();
        let (truncated, chi) = posterior.truncate_tails(0.6);
        assert_close(chi, 0.0, 1e-12);
        let low = truncated.quantile(1.0 / 5.0);
        let high = truncated.quantile(4.0 / 5.0);
        assert_close(low, 0.28, 1e-9);
        assert_close(high, 0.52, 1e-9);
        assert!((high - 0.6f64).abs() < (low - 0.6f64).abs());
    }

    #[test]
    fn tpqs_never_moves_away_from_median() {
        let config = ProbSearchConfig::new(7.0, 0.15).unwrap();
        for seed in 0..30 {
            let mut oracle = StepOracle::new(0.42, 0.15, seed).unwrap();
            let mut posterior = uniform(&config);
            let params = UpdateParams::new(config.p, config.m).unwrap();
            let trace = tpqs(&mut oracle, &config, posterior.clone()).unwrap();
            let mut position = config.start;
            for step in &trace.steps {
                let median = posterior.median();
                if (position - median).abs() > config.delta {
                    let toward = (step.x - position).signum();
                    let expected = (median - position).signum();
                    assert_eq!(
                        toward, expected,
                        "seed {seed}: moved {toward} with median {expected} away"
                    );
                }
                posterior.update(step.x, step.label, &params).unwrap();
                position = step.x;
            }
        }
    }

    #[test]
    fn unconverged_runs_are_flagged() {
        let config = ProbSearchConfig {
            max_steps: Some(3),
            ..ProbSearchConfig::new(2.0, 0.1).unwrap()
        };
        let mut oracle = StepOracle::new(0.5, 0.1, 2).unwrap();
        let trace = pqs(&mut oracle, &config, uniform(&config)).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.n(), 3);
    }

    #[test]
    fn mismatched_oracle_probability_rejected() {
        let config = ProbSearchConfig::new(2.0, 0.1).unwrap();
        let mut oracle = StepOracle::new(0.5, 0.2, 2).unwrap();
        assert!(matches!(
            pqs(&mut oracle, &config, uniform(&config)),
            Err(QslError::Misuse(_))
        ));
    }

    #[test]
    fn alpha_variant_validation() {
        let config = ProbSearchConfig::new(2.0, 0.1).unwrap();
        assert!(config.clone().with_update_probability(0.2).is_ok());
        assert!(config.clone().with_update_probability(0.05).is_err());
        assert!(config.with_update_probability(0.5).is_err());
    }
}
