//! Reproducible experiment runner: Monte Carlo sweeps, theory-versus-
//! simulation curves, strategy comparison grids, and mission dispatch.
//!
//! Replicate seeds derive from `(master_seed, theta index, replicate
//! index, stream)` through [`crate::exec::mix_seed`]; sweeps that compare
//! strategies pairwise share stream 0, so matched runs see identical flip
//! sequences. Output rows are sorted by key before emission, which makes
//! CSV output byte-identical for a given spec and seed.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryEstimate, MissionReport, MissionSpec};
use crate::dqs::dqs_fixed_samples;
use crate::error::{QslError, Result};
use crate::exec::{map_jobs, mix_seed};
use crate::oracle::StepOracle;
use crate::strategy::{run_search, SearchParams, SearchStrategy};
use crate::theory::{
    optimize_lambda, optimize_m, sampling_time, CostModel, MonteCarloOpt, OptimizeMode,
};
use crate::verify::{run_verify, VerifyReport, VerifySuite};

/// Experiment families the runner understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Run-to-convergence sweep over the search parameter grid.
    SweepM,
    /// Run-to-convergence sweep over the cost-weight grid.
    SweepLambda,
    /// Mean error after a fixed number of samples, per parameter.
    ErrorCurve,
    /// Samples and distance to convergence, per parameter.
    DistanceCurve,
    /// Best quantile search versus best proactive learner over a grid of
    /// sampling-time and velocity scenarios.
    CompareGrid,
    /// 2D boundary mission from an embedded mission spec.
    Mission,
    /// Programmatic acceptance checks.
    Verify,
}

/// Strategy families referenced by sweeps; parameters come from the
/// experiment grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Bisection,
    Dqs,
    Pqs,
    Tpqs,
    Proactive,
}

impl StrategyKind {
    pub fn with_parameter(self, parameter: f64) -> SearchStrategy {
        match self {
            StrategyKind::Bisection => SearchStrategy::Bisection,
            StrategyKind::Dqs => SearchStrategy::Dqs { m: parameter },
            StrategyKind::Pqs => SearchStrategy::Pqs { m: parameter },
            StrategyKind::Tpqs => SearchStrategy::Tpqs { m: parameter },
            StrategyKind::Proactive => SearchStrategy::Proactive { lambda: parameter },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Bisection => "bisection",
            StrategyKind::Dqs => "dqs",
            StrategyKind::Pqs => "pqs",
            StrategyKind::Tpqs => "tpqs",
            StrategyKind::Proactive => "proactive",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "bisection" => Ok(StrategyKind::Bisection),
            "dqs" => Ok(StrategyKind::Dqs),
            "pqs" => Ok(StrategyKind::Pqs),
            "tpqs" => Ok(StrategyKind::Tpqs),
            "proactive" => Ok(StrategyKind::Proactive),
            other => Err(QslError::Config(format!("unknown strategy {other}"))),
        }
    }

    fn uses_m_grid(self) -> bool {
        matches!(self, StrategyKind::Dqs | StrategyKind::Pqs | StrategyKind::Tpqs)
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub strategies: Vec<StrategyKind>,
    pub theta_grid: usize,
    pub replicates: usize,
    pub p: f64,
    pub seed: Option<u64>,
    pub m_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// Sample budget for the error curve.
    pub n_samples: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub stop_mass: f64,
    /// Scenario used to fill the time column of sweep tables.
    pub gamma_s: f64,
    pub velocity_mps: f64,
    pub strip_length_m: f64,
    /// Scenario grids for the comparison experiment.
    pub gamma_grid: Vec<f64>,
    pub velocity_grid: Vec<f64>,
    pub mission: Option<MissionSpec>,
    pub suite: Option<String>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::ErrorCurve,
            strategies: vec![StrategyKind::Dqs],
            theta_grid: 100,
            replicates: 1,
            p: 0.0,
            seed: None,
            m_grid: vec![2.0, 3.0, 5.0, 10.0, 20.0],
            lambda_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            n_samples: 20,
            epsilon: 1e-4,
            delta: 1e-3,
            stop_mass: 0.9,
            gamma_s: 10.0,
            velocity_mps: 0.5,
            strip_length_m: 40_000.0,
            gamma_grid: vec![1.0, 10.0, 30.0, 60.0],
            velocity_grid: vec![0.5, 1.0, 2.0, 4.0],
            mission: None,
            suite: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(QslError::Config("replicates must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&self.p) {
            return Err(QslError::Config(format!(
                "flip probability {} must lie in [0, 0.5)",
                self.p
            )));
        }
        if self.p > 0.0 && self.seed.is_none() {
            return Err(QslError::Config(
                "noisy experiments require an explicit seed".into(),
            ));
        }
        match self.kind {
            ExperimentKind::SweepM | ExperimentKind::ErrorCurve | ExperimentKind::DistanceCurve => {
                if self.strategies.is_empty() {
                    return Err(QslError::Config("strategy set must be nonempty".into()));
                }
                if self.theta_grid == 0 {
                    return Err(QslError::Config("theta grid must be nonempty".into()));
                }
                if self.strategies.iter().any(|s| s.uses_m_grid()) && self.m_grid.is_empty() {
                    return Err(QslError::Config("m grid must be nonempty".into()));
                }
                if self.strategies.contains(&StrategyKind::Proactive)
                    && self.lambda_grid.is_empty()
                {
                    return Err(QslError::Config("lambda grid must be nonempty".into()));
                }
                if matches!(self.kind, ExperimentKind::ErrorCurve)
                    && self.strategies.contains(&StrategyKind::Proactive)
                {
                    return Err(QslError::Config(
                        "the error curve covers quantile strategies only".into(),
                    ));
                }
                if matches!(self.kind, ExperimentKind::ErrorCurve) && self.n_samples == 0 {
                    return Err(QslError::Config("sample budget must be positive".into()));
                }
            }
            ExperimentKind::SweepLambda => {
                if self.lambda_grid.is_empty() {
                    return Err(QslError::Config("lambda grid must be nonempty".into()));
                }
                if self.theta_grid == 0 {
                    return Err(QslError::Config("theta grid must be nonempty".into()));
                }
            }
            ExperimentKind::CompareGrid => {
                if self.gamma_grid.is_empty() || self.velocity_grid.is_empty() {
                    return Err(QslError::Config("scenario grids must be nonempty".into()));
                }
                if self.m_grid.is_empty() || self.lambda_grid.is_empty() {
                    return Err(QslError::Config("parameter grids must be nonempty".into()));
                }
            }
            ExperimentKind::Mission => {
                if self.mission.is_none() {
                    return Err(QslError::Config(
                        "mission experiments need an embedded mission spec".into(),
                    ));
                }
            }
            ExperimentKind::Verify => {
                if self.suite.is_none() {
                    return Err(QslError::Config(
                        "verify experiments need a suite name".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn scenario(&self) -> String {
        format!(
            "p={},gamma={},v={}",
            self.p, self.gamma_s, self.velocity_mps
        )
    }

    fn cost(&self) -> Result<CostModel> {
        CostModel::new(self.gamma_s, self.velocity_mps, self.strip_length_m)
    }
}

/// One aggregated row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub strategy: String,
    pub parameter: f64,
    pub scenario: String,
    pub mean_samples: f64,
    pub stderr_samples: f64,
    pub mean_distance: f64,
    pub stderr_distance: f64,
    pub mean_error: f64,
    pub stderr_error: f64,
    pub mean_time_s: f64,
    pub stderr_time_s: f64,
    pub runs: usize,
}

/// Sweep output keyed by `(strategy, parameter, scenario)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# qsl-schema v1")?;
        writeln!(
            out,
            "strategy,parameter,scenario,mean_samples,stderr_samples,mean_distance,\
             stderr_distance,mean_error,stderr_error,mean_time_s,stderr_time_s,runs"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.strategy,
                r.parameter,
                r.scenario,
                r.mean_samples,
                r.stderr_samples,
                r.mean_distance,
                r.stderr_distance,
                r.mean_error,
                r.stderr_error,
                r.mean_time_s,
                r.stderr_time_s,
                r.runs
            )?;
        }
        Ok(())
    }

    fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.strategy.as_str(), a.parameter, a.scenario.as_str())
                .partial_cmp(&(b.strategy.as_str(), b.parameter, b.scenario.as_str()))
                .expect("row keys are finite")
        });
    }
}

/// One scenario cell of the comparison grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareCell {
    pub gamma_s: f64,
    pub velocity_mps: f64,
    pub quantile_m: f64,
    pub quantile_time_s: f64,
    pub proactive_lambda: f64,
    pub proactive_time_s: f64,
    /// Positive when the quantile search is slower.
    pub diff_s: f64,
}

/// Comparison grid plus the sign-change contour between adjacent cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareGrid {
    pub cells: Vec<CompareCell>,
    /// Scenario midpoints where the time difference changes sign.
    pub contour: Vec<(f64, f64)>,
}

impl CompareGrid {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# qsl-schema v1")?;
        writeln!(
            out,
            "gamma_s,velocity_mps,quantile_m,quantile_time_s,proactive_lambda,\
             proactive_time_s,diff_s"
        )?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.gamma_s,
                c.velocity_mps,
                c.quantile_m,
                c.quantile_time_s,
                c.proactive_lambda,
                c.proactive_time_s,
                c.diff_s
            )?;
        }
        Ok(())
    }

    pub fn write_contour_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# qsl-schema v1")?;
        writeln!(out, "gamma_s,velocity_mps")?;
        for (g, v) in &self.contour {
            writeln!(out, "{g},{v}")?;
        }
        Ok(())
    }
}

/// Output of [`run_experiment`], by experiment family.
#[derive(Debug)]
pub enum ExperimentOutput {
    Table(ResultTable),
    Compare(CompareGrid),
    Mission(Box<(BoundaryEstimate, MissionReport)>),
    Verify(VerifyReport),
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::ErrorCurve => Ok(ExperimentOutput::Table(error_curve(spec)?)),
        ExperimentKind::SweepM | ExperimentKind::DistanceCurve => {
            Ok(ExperimentOutput::Table(convergence_sweep(spec)?))
        }
        ExperimentKind::SweepLambda => Ok(ExperimentOutput::Table(lambda_sweep(spec)?)),
        ExperimentKind::CompareGrid => Ok(ExperimentOutput::Compare(compare_grid(spec)?)),
        ExperimentKind::Mission => {
            let mission = spec.mission.as_ref().expect("validated above");
            Ok(ExperimentOutput::Mission(Box::new(mission.run()?)))
        }
        ExperimentKind::Verify => {
            let suite = VerifySuite::parse(spec.suite.as_deref().expect("validated above"))?;
            Ok(ExperimentOutput::Verify(run_verify(suite, spec.master_seed())))
        }
    }
}

/// Mean and standard error (sample standard deviation over sqrt n).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn theta_at(spec: &ExperimentSpec, idx: usize) -> f64 {
    (idx as f64 + 0.5) / spec.theta_grid as f64
}

fn replicate_count(spec: &ExperimentSpec) -> usize {
    if spec.p == 0.0 {
        1
    } else {
        spec.replicates
    }
}

/// Per-run outcome used by the aggregators.
#[derive(Debug, Clone, Copy)]
struct RunOutcome {
    samples: f64,
    distance: f64,
    error: f64,
}

fn aggregate_row(
    spec: &ExperimentSpec,
    strategy: &str,
    parameter: f64,
    outcomes: &[RunOutcome],
) -> Result<ResultRow> {
    let cost = spec.cost()?;
    let samples: Vec<f64> = outcomes.iter().map(|o| o.samples).collect();
    let distances: Vec<f64> = outcomes.iter().map(|o| o.distance).collect();
    let errors: Vec<f64> = outcomes.iter().map(|o| o.error).collect();
    let times: Vec<f64> = outcomes
        .iter()
        .map(|o| sampling_time(&cost, o.samples, o.distance))
        .collect();
    let (mean_samples, stderr_samples) = mean_stderr(&samples);
    let (mean_distance, stderr_distance) = mean_stderr(&distances);
    let (mean_error, stderr_error) = mean_stderr(&errors);
    let (mean_time_s, stderr_time_s) = mean_stderr(&times);
    Ok(ResultRow {
        strategy: strategy.to_string(),
        parameter,
        scenario: spec.scenario(),
        mean_samples,
        stderr_samples,
        mean_distance,
        stderr_distance,
        mean_error,
        stderr_error,
        mean_time_s,
        stderr_time_s,
        runs: outcomes.len(),
    })
}

fn parameters_for(spec: &ExperimentSpec, kind: StrategyKind) -> Vec<f64> {
    match kind {
        StrategyKind::Bisection => vec![2.0],
        StrategyKind::Proactive => spec.lambda_grid.clone(),
        _ => spec.m_grid.clone(),
    }
}

/// Mean error after exactly `n_samples` measurements.
fn error_curve(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut rows = Vec::new();
    for &kind in &spec.strategies {
        for parameter in parameters_for(spec, kind) {
            let outcomes = run_grid(spec, kind, parameter, RunMode::FixedSamples(spec.n_samples))?;
            rows.push(aggregate_row(spec, kind.name(), parameter, &outcomes)?);
        }
    }
    let mut table = ResultTable { rows };
    table.sort();
    Ok(table)
}

/// Samples and distance to convergence per parameter.
fn convergence_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut rows = Vec::new();
    for &kind in &spec.strategies {
        for parameter in parameters_for(spec, kind) {
            let outcomes = run_grid(spec, kind, parameter, RunMode::ToConvergence)?;
            rows.push(aggregate_row(spec, kind.name(), parameter, &outcomes)?);
        }
    }
    let mut table = ResultTable { rows };
    table.sort();
    Ok(table)
}

fn lambda_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut rows = Vec::new();
    for &lambda in &spec.lambda_grid {
        let outcomes = run_grid(spec, StrategyKind::Proactive, lambda, RunMode::ToConvergence)?;
        rows.push(aggregate_row(spec, "proactive", lambda, &outcomes)?);
    }
    let mut table = ResultTable { rows };
    table.sort();
    Ok(table)
}

#[derive(Debug, Clone, Copy)]
enum RunMode {
    ToConvergence,
    FixedSamples(usize),
}

/// Fan one (strategy, parameter) cell over the theta grid and replicates.
fn run_grid(
    spec: &ExperimentSpec,
    kind: StrategyKind,
    parameter: f64,
    mode: RunMode,
) -> Result<Vec<RunOutcome>> {
    let reps = replicate_count(spec);
    let mut jobs = Vec::with_capacity(spec.theta_grid * reps);
    for theta_idx in 0..spec.theta_grid {
        for rep in 0..reps {
            jobs.push((theta_idx, rep));
        }
    }
    let master = spec.master_seed();
    let outcomes = map_jobs(&jobs, |&(theta_idx, rep)| -> Result<RunOutcome> {
        let theta = theta_at(spec, theta_idx);
        let seed = mix_seed(master, theta_idx as u64, rep as u64, 0);
        let mut oracle = StepOracle::new(theta, spec.p, seed)?;
        match mode {
            RunMode::ToConvergence => {
                let params = SearchParams {
                    epsilon: spec.epsilon,
                    delta: spec.delta,
                    p: spec.p,
                    p_update: None,
                    stop_mass: spec.stop_mass,
                    max_steps: None,
                };
                let strategy = kind.with_parameter(parameter);
                let trace = run_search(&mut oracle, strategy, &params, 0.0, None, None)?;
                Ok(RunOutcome {
                    samples: trace.n() as f64,
                    distance: trace.distance(),
                    error: (trace.estimate - theta).abs(),
                })
            }
            RunMode::FixedSamples(n) => {
                let trace = match kind.with_parameter(parameter) {
                    SearchStrategy::Dqs { m } => dqs_fixed_samples(&mut oracle, m, n, 0.0)?,
                    SearchStrategy::Bisection if spec.p == 0.0 => {
                        dqs_fixed_samples(&mut oracle, 2.0, n, 0.0)?
                    }
                    strategy => {
                        let params = SearchParams {
                            epsilon: spec.epsilon,
                            delta: spec.delta,
                            p: spec.p,
                            p_update: None,
                            stop_mass: 1.0,
                            max_steps: Some(n),
                        };
                        run_search(&mut oracle, strategy, &params, 0.0, None, None)?
                    }
                };
                let at = n.min(trace.n());
                let estimate = trace.estimate_at(at).unwrap_or(trace.estimate);
                let distance = if at == 0 {
                    0.0
                } else {
                    trace.steps[at - 1].cum_distance
                };
                Ok(RunOutcome {
                    samples: at as f64,
                    distance,
                    error: (estimate - theta).abs(),
                })
            }
        }
    });
    outcomes.into_iter().collect()
}

/// Best quantile search versus best proactive learner per scenario.
fn compare_grid(spec: &ExperimentSpec) -> Result<CompareGrid> {
    let mc = MonteCarloOpt {
        theta_grid: spec.theta_grid,
        replicates: spec.replicates,
        master_seed: spec.master_seed(),
        delta: spec.delta,
        stop_mass: spec.stop_mass,
    };
    let mut cells = Vec::new();
    for &gamma in &spec.gamma_grid {
        for &velocity in &spec.velocity_grid {
            let cost = CostModel::new(gamma, velocity, spec.strip_length_m)?;
            let (m, quantile_time) = optimize_m(
                &cost,
                spec.epsilon,
                spec.p,
                &OptimizeMode::MonteCarlo(mc),
                &spec.m_grid,
            )?;
            let (lambda, proactive_time) =
                optimize_lambda(&cost, spec.epsilon, spec.p, &mc, &spec.lambda_grid)?;
            cells.push(CompareCell {
                gamma_s: gamma,
                velocity_mps: velocity,
                quantile_m: m,
                quantile_time_s: quantile_time,
                proactive_lambda: lambda,
                proactive_time_s: proactive_time,
                diff_s: quantile_time - proactive_time,
            });
        }
    }

    let cols = spec.velocity_grid.len();
    let mut contour = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        // Right neighbor in the velocity direction.
        if (i + 1) % cols != 0 {
            let right = &cells[i + 1];
            if (cell.diff_s <= 0.0) != (right.diff_s <= 0.0) {
                contour.push((
                    cell.gamma_s,
                    0.5 * (cell.velocity_mps + right.velocity_mps),
                ));
            }
        }
        // Neighbor in the gamma direction.
        if i + cols < cells.len() {
            let below = &cells[i + cols];
            if (cell.diff_s <= 0.0) != (below.diff_s <= 0.0) {
                contour.push((
                    0.5 * (cell.gamma_s + below.gamma_s),
                    cell.velocity_mps,
                ));
            }
        }
    }
    Ok(CompareGrid { cells, contour })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::dqs_expected_error;

    fn small_error_curve_spec() -> ExperimentSpec {
        ExperimentSpec {
            kind: ExperimentKind::ErrorCurve,
            strategies: vec![StrategyKind::Dqs],
            theta_grid: 200,
            m_grid: vec![2.0, 5.0],
            n_samples: 12,
            ..ExperimentSpec::default()
        }
    }

    #[test]
    fn error_curve_tracks_the_closed_form() {
        let spec = small_error_curve_spec();
        let ExperimentOutput::Table(table) = run_experiment(&spec).unwrap() else {
            panic!("expected a table");
        };
        assert_eq!(table.rows.len(), 2);
        for row in &table.rows {
            let expected = dqs_expected_error(row.parameter, 12);
            assert!(
                (row.mean_error - expected).abs() <= 3.0 * row.stderr_error + 1e-6,
                "m={}: mean {} vs theory {} (se {})",
                row.parameter,
                row.mean_error,
                expected,
                row.stderr_error
            );
        }
    }

    #[test]
    fn csv_output_is_deterministic() {
        let spec = ExperimentSpec {
            kind: ExperimentKind::SweepM,
            strategies: vec![StrategyKind::Tpqs, StrategyKind::Pqs],
            theta_grid: 5,
            replicates: 3,
            p: 0.1,
            seed: Some(11),
            m_grid: vec![2.0, 5.0],
            ..ExperimentSpec::default()
        };
        let mut first = Vec::new();
        let mut second = Vec::new();
        let ExperimentOutput::Table(t1) = run_experiment(&spec).unwrap() else {
            panic!()
        };
        let ExperimentOutput::Table(t2) = run_experiment(&spec).unwrap() else {
            panic!()
        };
        t1.write_csv(&mut first).unwrap();
        t2.write_csv(&mut second).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with("# qsl-schema v1\n"));
        // Rows are sorted by strategy then parameter.
        let rows: Vec<&str> = text.lines().skip(2).collect();
        assert!(rows[0].starts_with("pqs,2"));
        assert!(rows[3].starts_with("tpqs,5"));
    }

    #[test]
    fn time_cells_recompose_from_samples_and_distance() {
        let spec = ExperimentSpec {
            kind: ExperimentKind::DistanceCurve,
            strategies: vec![StrategyKind::Dqs],
            theta_grid: 50,
            m_grid: vec![3.0],
            ..ExperimentSpec::default()
        };
        let ExperimentOutput::Table(table) = run_experiment(&spec).unwrap() else {
            panic!()
        };
        let cost = spec.cost().unwrap();
        for row in &table.rows {
            let recomputed = sampling_time(&cost, row.mean_samples, row.mean_distance);
            assert!(
                (row.mean_time_s - recomputed).abs() <= 1e-9 * row.mean_time_s.max(1.0),
                "time cell {} vs recomputed {recomputed}",
                row.mean_time_s
            );
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = ExperimentSpec {
            kind: ExperimentKind::SweepM,
            strategies: vec![],
            ..ExperimentSpec::default()
        };
        assert!(spec.validate().is_err());

        spec.strategies = vec![StrategyKind::Pqs];
        spec.p = 0.1;
        spec.seed = None;
        assert!(spec.validate().is_err(), "noisy sweep without a seed");

        spec.seed = Some(1);
        spec.m_grid.clear();
        assert!(spec.validate().is_err());

        let spec = ExperimentSpec {
            kind: ExperimentKind::Mission,
            mission: None,
            ..ExperimentSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn lambda_sweep_produces_one_row_per_lambda() {
        let spec = ExperimentSpec {
            kind: ExperimentKind::SweepLambda,
            theta_grid: 8,
            replicates: 2,
            p: 0.1,
            seed: Some(5),
            lambda_grid: vec![0.0, 0.5],
            ..ExperimentSpec::default()
        };
        let ExperimentOutput::Table(table) = run_experiment(&spec).unwrap() else {
            panic!()
        };
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows.iter().all(|r| r.strategy == "proactive"));
        assert_eq!(table.rows[0].runs, 16);
    }

    #[test]
    fn lambda_sweep_distance_is_nonincreasing() {
        // The travel penalty directly buys distance; samples may go
        // either way under the single-bin stopping rule.
        let spec = ExperimentSpec {
            kind: ExperimentKind::SweepLambda,
            theta_grid: 30,
            replicates: 10,
            p: 0.1,
            seed: Some(13),
            epsilon: 1e-3,
            lambda_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            ..ExperimentSpec::default()
        };
        let ExperimentOutput::Table(table) = run_experiment(&spec).unwrap() else {
            panic!()
        };
        for pair in table.rows.windows(2) {
            let slack = 3.0 * (pair[0].stderr_distance + pair[1].stderr_distance);
            assert!(
                pair[1].mean_distance <= pair[0].mean_distance + slack,
                "distance rose from lambda={} ({}) to lambda={} ({})",
                pair[0].parameter,
                pair[0].mean_distance,
                pair[1].parameter,
                pair[1].mean_distance
            );
        }
    }

    #[test]
    fn verify_kind_dispatches_to_the_suite_runner() {
        let spec = ExperimentSpec {
            kind: ExperimentKind::Verify,
            suite: Some("equivalence".into()),
            seed: Some(7),
            ..ExperimentSpec::default()
        };
        let ExperimentOutput::Verify(report) = run_experiment(&spec).unwrap() else {
            panic!("expected a verify report");
        };
        assert_eq!(report.suite, "equivalence");
        assert!(report.passed, "{}", report.to_json());
    }

    #[test]
    fn compare_grid_emits_cells_and_contour_fields() {
        let spec = ExperimentSpec {
            kind: ExperimentKind::CompareGrid,
            theta_grid: 6,
            replicates: 1,
            p: 0.0,
            seed: Some(2),
            epsilon: 1e-3,
            m_grid: vec![2.0, 10.0],
            lambda_grid: vec![0.0, 0.5],
            gamma_grid: vec![1.0, 60.0],
            velocity_grid: vec![0.5, 4.0],
            ..ExperimentSpec::default()
        };
        let ExperimentOutput::Compare(grid) = run_experiment(&spec).unwrap() else {
            panic!()
        };
        assert_eq!(grid.cells.len(), 4);
        let mut csv = Vec::new();
        grid.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().contains("quantile_m"));
    }
}
