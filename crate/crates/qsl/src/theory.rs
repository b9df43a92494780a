//! Closed-form performance formulas and parameter optimizers.
//!
//! The deterministic search admits exact expressions for the expected
//! error after a fixed number of samples and the expected distance
//! traveled; the noisy search has a geometric upper bound. The optimizers
//! pick the search parameter (or cost weight) minimizing the expected
//! total sampling time `T = gamma N + eta D`, either from the closed
//! forms or from seeded Monte Carlo replicates.

use serde::{Deserialize, Serialize};

use crate::dqs::dqs;
use crate::error::{QslError, Result};
use crate::exec::{map_jobs, mix_seed};
use crate::oracle::StepOracle;
use crate::posterior::PosteriorGrid;
use crate::pqs::{tpqs, ProbSearchConfig};
use crate::proactive::{proactive, ProactiveConfig};

/// Time accounting for a mobile sensor: `gamma` seconds per sample plus
/// `eta` seconds per unit of in-strip travel, where `eta` is the strip
/// length divided by the craft velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub gamma_s: f64,
    pub velocity_mps: f64,
    pub strip_length_m: f64,
}

impl CostModel {
    pub fn new(gamma_s: f64, velocity_mps: f64, strip_length_m: f64) -> Result<Self> {
        if !(gamma_s >= 0.0) {
            return Err(QslError::Config(format!(
                "per-sample time {gamma_s} must be nonnegative"
            )));
        }
        if !(velocity_mps > 0.0) {
            return Err(QslError::Config(format!(
                "velocity {velocity_mps} must be positive"
            )));
        }
        if !(strip_length_m > 0.0) {
            return Err(QslError::Config(format!(
                "strip length {strip_length_m} must be positive"
            )));
        }
        Ok(Self {
            gamma_s,
            velocity_mps,
            strip_length_m,
        })
    }

    /// Seconds to traverse one unit-interval of distance.
    pub fn eta(&self) -> f64 {
        self.strip_length_m / self.velocity_mps
    }
}

/// Total sampling time `gamma N + eta D` in seconds.
pub fn sampling_time(cost: &CostModel, n_samples: f64, distance_units: f64) -> f64 {
    cost.gamma_s * n_samples + cost.eta() * distance_units
}

/// Expected estimation error of the deterministic search after `n`
/// measurements under a uniform change point:
/// `(1/4) (rho^2 + (1-rho)^2)^n` with `rho = (m-1)/m`.
pub fn dqs_expected_error(m: f64, n: u32) -> f64 {
    debug_assert!(m >= 2.0);
    let rho = (m - 1.0) / m;
    0.25 * (rho * rho + (1.0 - rho) * (1.0 - rho)).powi(n as i32)
}

/// Expected total distance traveled by the deterministic search under a
/// uniform change point: `m / (2m - 2)`.
pub fn dqs_expected_distance(m: f64) -> f64 {
    debug_assert!(m > 1.0);
    m / (2.0 * m - 2.0)
}

/// Expected length of the `n`-th direction-reversal leg: `m / (2m-1)^n`.
pub fn dqs_expected_leg_distance(m: f64, n: u32) -> f64 {
    debug_assert!(m > 1.0 && n >= 1);
    m / (2.0 * m - 1.0).powi(n as i32)
}

/// Upper bound on the worst-case expected error of the discretized
/// probabilistic search after `n` samples:
/// `2 ((m-1)/m + 2 sqrt(p(1-p))/m)^(n/2)`.
pub fn pqs_error_bound(m: f64, p: f64, n: u32) -> f64 {
    debug_assert!(m >= 2.0 && (0.0..=0.5).contains(&p));
    let base = (m - 1.0) / m + 2.0 * (p * (1.0 - p)).sqrt() / m;
    2.0 * base.powf(n as f64 / 2.0)
}

/// Smallest `n` with `dqs_expected_error(m, n) <= epsilon`.
pub fn samples_to_error(m: f64, epsilon: f64) -> u32 {
    debug_assert!(m >= 2.0 && epsilon > 0.0 && epsilon < 0.25 + 1e-15);
    if dqs_expected_error(m, 0) <= epsilon {
        return 0;
    }
    let rho = (m - 1.0) / m;
    let rate = rho * rho + (1.0 - rho) * (1.0 - rho);
    let mut n = ((4.0 * epsilon).ln() / rate.ln()).ceil().max(0.0) as u32;
    while dqs_expected_error(m, n) > epsilon {
        n += 1;
    }
    while n > 0 && dqs_expected_error(m, n - 1) <= epsilon {
        n -= 1;
    }
    n
}

/// Replicate layout for Monte Carlo optimization. Replicate seeds are
/// pinned to `(master_seed, theta index, replicate index)` so every
/// candidate parameter sees the same noise draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOpt {
    pub theta_grid: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub delta: f64,
    pub stop_mass: f64,
}

impl MonteCarloOpt {
    pub fn new(theta_grid: usize, replicates: usize, master_seed: u64) -> Self {
        Self {
            theta_grid,
            replicates,
            master_seed,
            delta: 1e-3,
            stop_mass: 0.9,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.theta_grid == 0 {
            return Err(QslError::Config(
                "Monte Carlo optimization needs a nonempty theta grid".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(QslError::Config(
                "Monte Carlo optimization needs at least one replicate".into(),
            ));
        }
        Ok(())
    }

    /// Noiseless runs are deterministic per theta, so one replicate
    /// carries all the information.
    fn effective_replicates(&self, p: f64) -> usize {
        if p == 0.0 {
            1
        } else {
            self.replicates
        }
    }
}

/// How the expected sampling time is evaluated during optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizeMode {
    /// Invert the closed forms; only valid for noiseless search.
    ClosedForm,
    /// Average seeded replicate runs of the quantile search itself
    /// (deterministic at `p == 0`, truncated probabilistic otherwise).
    MonteCarlo(MonteCarloOpt),
}

/// Pick the search parameter minimizing expected sampling time over
/// `m_grid`; ties go to the smaller parameter. Returns `(m, seconds)`.
pub fn optimize_m(
    cost: &CostModel,
    epsilon: f64,
    p: f64,
    mode: &OptimizeMode,
    m_grid: &[f64],
) -> Result<(f64, f64)> {
    if m_grid.is_empty() {
        return Err(QslError::Config("m grid must be nonempty".into()));
    }
    if let Some(bad) = m_grid.iter().find(|m| !(**m >= 2.0)) {
        return Err(QslError::Config(format!(
            "m grid entry {bad} must be at least 2"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(QslError::Config(format!(
            "target error {epsilon} must lie in (0, 0.25)"
        )));
    }

    let times: Vec<f64> = match mode {
        OptimizeMode::ClosedForm => {
            if p != 0.0 {
                return Err(QslError::Config(
                    "closed-form optimization covers the noiseless search only".into(),
                ));
            }
            m_grid
                .iter()
                .map(|&m| {
                    sampling_time(
                        cost,
                        samples_to_error(m, epsilon) as f64,
                        dqs_expected_distance(m),
                    )
                })
                .collect()
        }
        OptimizeMode::MonteCarlo(mc) => {
            mc.validate()?;
            m_grid
                .iter()
                .map(|&m| monte_carlo_time_quantile(cost, epsilon, p, m, mc))
                .collect::<Result<Vec<f64>>>()?
        }
    };

    Ok(pick_minimum(m_grid, &times))
}

/// Monte Carlo analogue of [`optimize_m`] for the proactive baseline,
/// searching over the cost weight `lambda`.
pub fn optimize_lambda(
    cost: &CostModel,
    epsilon: f64,
    p: f64,
    mc: &MonteCarloOpt,
    lambda_grid: &[f64],
) -> Result<(f64, f64)> {
    if lambda_grid.is_empty() {
        return Err(QslError::Config("lambda grid must be nonempty".into()));
    }
    if let Some(bad) = lambda_grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(QslError::Config(format!(
            "lambda grid entry {bad} must lie in [0, 1]"
        )));
    }
    mc.validate()?;

    let times = lambda_grid
        .iter()
        .map(|&lambda| monte_carlo_time_proactive(cost, epsilon, p, lambda, mc))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pick_minimum(lambda_grid, &times))
}

fn pick_minimum(grid: &[f64], times: &[f64]) -> (f64, f64) {
    let mut best = (grid[0], times[0]);
    for (&g, &t) in grid.iter().zip(times).skip(1) {
        if t < best.1 {
            best = (g, t);
        }
    }
    best
}

fn replicate_jobs(mc: &MonteCarloOpt, p: f64) -> Vec<(usize, usize)> {
    let reps = mc.effective_replicates(p);
    let mut jobs = Vec::with_capacity(mc.theta_grid * reps);
    for theta_idx in 0..mc.theta_grid {
        for rep in 0..reps {
            jobs.push((theta_idx, rep));
        }
    }
    jobs
}

fn mean_time(cost: &CostModel, outcomes: &[(f64, f64)]) -> f64 {
    let total: f64 = outcomes
        .iter()
        .map(|&(n, d)| sampling_time(cost, n, d))
        .sum();
    total / outcomes.len() as f64
}

fn monte_carlo_time_quantile(
    cost: &CostModel,
    epsilon: f64,
    p: f64,
    m: f64,
    mc: &MonteCarloOpt,
) -> Result<f64> {
    let jobs = replicate_jobs(mc, p);
    let outcomes = map_jobs(&jobs, |&(theta_idx, rep)| -> Result<(f64, f64)> {
        let theta = (theta_idx as f64 + 0.5) / mc.theta_grid as f64;
        let seed = mix_seed(mc.master_seed, theta_idx as u64, rep as u64, 0);
        let mut oracle = StepOracle::new(theta, p, seed)?;
        let trace = if p == 0.0 {
            dqs(&mut oracle, m, epsilon, 0.0)?
        } else {
            let config = ProbSearchConfig {
                delta: mc.delta,
                stop_mass: mc.stop_mass,
                ..ProbSearchConfig::new(m, p)?
            };
            tpqs(&mut oracle, &config, PosteriorGrid::uniform(mc.delta)?)?
        };
        Ok((trace.n() as f64, trace.distance()))
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(mean_time(cost, &outcomes))
}

fn monte_carlo_time_proactive(
    cost: &CostModel,
    epsilon: f64,
    p: f64,
    lambda: f64,
    mc: &MonteCarloOpt,
) -> Result<f64> {
    let jobs = replicate_jobs(mc, p);
    let outcomes = map_jobs(&jobs, |&(theta_idx, rep)| -> Result<(f64, f64)> {
        let theta = (theta_idx as f64 + 0.5) / mc.theta_grid as f64;
        let seed = mix_seed(mc.master_seed, theta_idx as u64, rep as u64, 0);
        let mut oracle = StepOracle::new(theta, p, seed)?;
        let config = ProactiveConfig {
            delta: mc.delta,
            epsilon,
            stop_mass: mc.stop_mass,
            ..ProactiveConfig::new(lambda, p)?
        };
        let trace = proactive(&mut oracle, &config, PosteriorGrid::uniform(mc.delta)?)?;
        Ok((trace.n() as f64, trace.distance()))
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(mean_time(cost, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn expected_error_closed_forms() {
        for n in [0u32, 1, 5, 20] {
            assert_close(dqs_expected_error(2.0, n), 0.25 * 0.5f64.powi(n as i32), 1e-15);
        }
        assert_close(dqs_expected_error(2.0, 20), 2.0f64.powi(-22), 1e-15);
        assert_close(dqs_expected_error(5.0, 1), 0.17, 1e-12);
    }

    #[test]
    fn expected_error_monotonicity() {
        for n in 1..6u32 {
            let mut prev = dqs_expected_error(2.0, n);
            for &m in &[3.0, 5.0, 10.0, 50.0] {
                let e = dqs_expected_error(m, n);
                assert!(e > prev, "error not increasing in m at n={n}");
                prev = e;
            }
        }
        for &m in &[2.0, 7.0] {
            assert!(dqs_expected_error(m, 3) < dqs_expected_error(m, 2));
        }
    }

    #[test]
    fn expected_distance_closed_forms() {
        assert_close(dqs_expected_distance(2.0), 1.0, 1e-15);
        assert_close(dqs_expected_distance(5.0), 0.625, 1e-15);
        assert_close(dqs_expected_distance(1e6), 0.5, 1e-6);
        assert!(dqs_expected_distance(3.0) < dqs_expected_distance(2.0));
    }

    #[test]
    fn leg_distances_and_geometric_sum() {
        assert_close(dqs_expected_leg_distance(2.0, 1), 2.0 / 3.0, 1e-15);
        assert_close(dqs_expected_leg_distance(5.0, 2), 5.0 / 81.0, 1e-15);
        for &m in &[2.0, 3.0, 10.0] {
            let sum: f64 = (1..200).map(|n| dqs_expected_leg_distance(m, n)).sum();
            assert_close(sum, dqs_expected_distance(m), 1e-12);
        }
    }

    #[test]
    fn error_bound_closed_forms() {
        for n in [2u32, 10] {
            assert_close(
                pqs_error_bound(2.0, 0.0, n),
                2.0 * 0.5f64.powf(n as f64 / 2.0),
                1e-15,
            );
        }
        assert_close(pqs_error_bound(2.0, 0.1, 10), 2.0 * 0.8f64.powi(5), 1e-12);
        assert_close(pqs_error_bound(7.0, 0.5, 9), 2.0, 1e-12);
    }

    #[test]
    fn bound_dominates_expected_error() {
        for &m in &[2.0, 5.0, 10.0] {
            for n in 0..40u32 {
                assert!(pqs_error_bound(m, 0.0, n) >= dqs_expected_error(m, n));
            }
        }
    }

    #[test]
    fn sampling_time_examples() {
        let cost = CostModel::new(10.0, 0.5, 40_000.0).unwrap();
        assert_close(cost.eta(), 80_000.0, 1e-9);
        assert_close(sampling_time(&cost, 20.0, 1.0), 80_200.0, 1e-9);
        assert_close(sampling_time(&cost, 0.0, 0.0), 0.0, 0.0);
        let cost = CostModel::new(60.0, 4.0, 40_000.0).unwrap();
        assert_close(sampling_time(&cost, 12.0, 0.55), 6220.0, 1e-9);
    }

    #[test]
    fn samples_to_error_inverts_the_closed_form() {
        assert_eq!(samples_to_error(2.0, 2.0f64.powi(-22)), 20);
        assert_eq!(samples_to_error(2.0, 0.25), 0);
        assert_eq!(samples_to_error(10.0, 1e-4), 40);
        for &m in &[2.0, 3.0, 9.5] {
            for &eps in &[1e-2, 1e-4, 1e-6] {
                let n = samples_to_error(m, eps);
                assert!(dqs_expected_error(m, n) <= eps);
                if n > 0 {
                    assert!(dqs_expected_error(m, n - 1) > eps);
                }
            }
        }
    }

    #[test]
    fn optimizer_extremes() {
        let m_grid: Vec<f64> = (0..40).map(|i| 2.0 + i as f64).collect();
        // Free travel: minimize samples, so the smallest m wins.
        let cost = CostModel::new(10.0, 1.0, 1e-9).unwrap();
        let (m, _) = optimize_m(&cost, 1e-4, 0.0, &OptimizeMode::ClosedForm, &m_grid).unwrap();
        assert_eq!(m, 2.0);
        // Free samples: minimize distance, so the largest m wins.
        let cost = CostModel::new(0.0, 0.5, 40_000.0).unwrap();
        let (m, _) = optimize_m(&cost, 1e-4, 0.0, &OptimizeMode::ClosedForm, &m_grid).unwrap();
        assert_eq!(m, 41.0);
    }

    #[test]
    fn optimizer_m_grows_as_velocity_drops() {
        let m_grid: Vec<f64> = (0..200).map(|i| 2.0 + 0.5 * i as f64).collect();
        let mut prev = 0.0;
        for &velocity in &[4.0, 2.0, 1.0, 0.5] {
            let cost = CostModel::new(60.0, velocity, 40_000.0).unwrap();
            let (m, _) =
                optimize_m(&cost, 1e-4, 0.0, &OptimizeMode::ClosedForm, &m_grid).unwrap();
            assert!(
                m >= prev,
                "optimal m {m} shrank when velocity dropped to {velocity}"
            );
            prev = m;
        }
    }

    #[test]
    fn optimizer_validation() {
        let cost = CostModel::new(10.0, 0.5, 40_000.0).unwrap();
        assert!(optimize_m(&cost, 1e-4, 0.0, &OptimizeMode::ClosedForm, &[]).is_err());
        assert!(optimize_m(&cost, 1e-4, 0.0, &OptimizeMode::ClosedForm, &[1.5]).is_err());
        assert!(optimize_m(&cost, 1e-4, 0.1, &OptimizeMode::ClosedForm, &[2.0]).is_err());
        let empty = MonteCarloOpt::new(10, 0, 1);
        assert!(matches!(
            optimize_m(&cost, 1e-4, 0.1, &OptimizeMode::MonteCarlo(empty), &[2.0]),
            Err(QslError::Config(_))
        ));
    }

    #[test]
    fn monte_carlo_noiseless_agrees_with_closed_form_ordering() {
        let cost = CostModel::new(10.0, 0.5, 40_000.0).unwrap();
        let mc = MonteCarloOpt::new(60, 1, 7);
        let grid = [2.0, 5.0, 10.0, 20.0, 40.0];
        let (m_mc, _) =
            optimize_m(&cost, 1e-4, 0.0, &OptimizeMode::MonteCarlo(mc), &grid).unwrap();
        let (m_cf, _) = optimize_m(&cost, 1e-4, 0.0, &OptimizeMode::ClosedForm, &grid).unwrap();
        // Both modes should land in the same neighborhood of the grid.
        assert!(
            (m_mc - m_cf).abs() <= 30.0,
            "Monte Carlo picked {m_mc}, closed form picked {m_cf}"
        );
        assert!(m_mc >= 5.0, "distance-dominated scenario favors larger m");
    }

    #[test]
    fn optimize_lambda_extremes() {
        // Free travel and a noiseless channel: every sample should carry
        // maximum information, so the zero cost weight wins.
        let cost = CostModel::new(10.0, 1.0, 1e-9).unwrap();
        let mc = MonteCarloOpt::new(12, 2, 3);
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let (lambda, _) = optimize_lambda(&cost, 1e-3, 0.0, &mc, &grid).unwrap();
        assert_eq!(lambda, 0.0);

        let single = [0.4];
        let (lambda, _) = optimize_lambda(&cost, 1e-3, 0.1, &mc, &single).unwrap();
        assert_eq!(lambda, 0.4);
    }

    #[test]
    fn cost_model_validation() {
        assert!(CostModel::new(-1.0, 1.0, 1.0).is_err());
        assert!(CostModel::new(1.0, 0.0, 1.0).is_err());
        assert!(CostModel::new(1.0, 1.0, 0.0).is_err());
    }
}
