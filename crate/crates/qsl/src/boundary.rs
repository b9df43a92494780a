//! Strip-based 2D boundary estimation with travel-cost accounting.
//!
//! A mission decomposes a region into parallel transects, runs a 1D
//! search per strip, and joins the per-strip estimates into a piecewise
//! linear boundary. Consecutive strips can hand their estimate forward as
//! the next strip's first sample location, and posterior searches can
//! additionally start from a prior centered there whose width is sized by
//! a Lipschitz bound on the boundary slope.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::exec::mix_seed;
use crate::posterior::PosteriorGrid;
use crate::region::{scan_crossings, RegionRaster, TransectOracle};
use crate::strategy::{run_search, validate_strategy, SearchParams, SearchStrategy};
use crate::theory::CostModel;
use crate::trace::SearchTrace;

const PIECEWISE_PRIOR_RATIO: f64 = 100.0;

/// One strip: a straight segment sampled on `t` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transect {
    pub start: (f64, f64),
    pub end: (f64, f64),
}

impl Transect {
    pub fn length_m(&self) -> f64 {
        let dx = self.end.0 - self.start.0;
        let dy = self.end.1 - self.start.1;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn point_at(&self, t: f64) -> (f64, f64) {
        (
            self.start.0 + t * (self.end.0 - self.start.0),
            self.start.1 + t * (self.end.1 - self.start.1),
        )
    }
}

/// Transect layout plus the order the craft visits them in.
///
/// `chain_start` marks traversal slots with no usable predecessor;
/// initialization improvements are skipped there. Two-fragment plans mark
/// the first strip of each fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripPlan {
    pub transects: Vec<Transect>,
    pub traversal: Vec<usize>,
    pub chain_start: Vec<bool>,
    pub spacing_m: f64,
}

impl StripPlan {
    /// Parallel vertical strips over `x_range`, each running from
    /// `y_from` to `y_to`, visited left to right.
    pub fn vertical(x_range: (f64, f64), y_from: f64, y_to: f64, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(QslError::Config("a strip plan needs at least 2 strips".into()));
        }
        if !(x_range.1 > x_range.0) {
            return Err(QslError::Config("strip x range must be increasing".into()));
        }
        let spacing = (x_range.1 - x_range.0) / k as f64;
        let transects = (0..k)
            .map(|i| {
                let x = x_range.0 + (i as f64 + 0.5) * spacing;
                Transect {
                    start: (x, y_from),
                    end: (x, y_to),
                }
            })
            .collect();
        let mut chain_start = vec![false; k];
        chain_start[0] = true;
        Ok(Self {
            transects,
            traversal: (0..k).collect(),
            chain_start,
            spacing_m: spacing,
        })
    }

    /// Counterclockwise two-fragment layout: upper strips from `y_top`
    /// down to the split line, left to right, then lower strips from
    /// `y_bottom` up to the split line, right to left. Each fragment is
    /// its own initialization chain.
    pub fn two_fragment(
        x_range: (f64, f64),
        y_bottom: f64,
        y_split: f64,
        y_top: f64,
        k_per_half: usize,
    ) -> Result<Self> {
        if k_per_half < 2 {
            return Err(QslError::Config(
                "a two-fragment plan needs at least 2 strips per half".into(),
            ));
        }
        if !(x_range.1 > x_range.0) {
            return Err(QslError::Config("strip x range must be increasing".into()));
        }
        if !(y_bottom < y_split && y_split < y_top) {
            return Err(QslError::Config(
                "two-fragment plan needs y_bottom < y_split < y_top".into(),
            ));
        }
        let spacing = (x_range.1 - x_range.0) / k_per_half as f64;
        let mut transects = Vec::with_capacity(2 * k_per_half);
        for i in 0..k_per_half {
            let x = x_range.0 + (i as f64 + 0.5) * spacing;
            transects.push(Transect {
                start: (x, y_top),
                end: (x, y_split),
            });
        }
        for i in 0..k_per_half {
            let x = x_range.0 + (i as f64 + 0.5) * spacing;
            transects.push(Transect {
                start: (x, y_bottom),
                end: (x, y_split),
            });
        }
        let mut traversal: Vec<usize> = (0..k_per_half).collect();
        traversal.extend((k_per_half..2 * k_per_half).rev());
        let mut chain_start = vec![false; 2 * k_per_half];
        chain_start[0] = true;
        chain_start[k_per_half] = true;
        Ok(Self {
            transects,
            traversal,
            chain_start,
            spacing_m: spacing,
        })
    }

    pub fn k(&self) -> usize {
        self.transects.len()
    }

    pub fn validate(&self, region: &RegionRaster) -> Result<()> {
        if self.transects.len() < 2 {
            return Err(QslError::Config("a strip plan needs at least 2 strips".into()));
        }
        if !(self.spacing_m > 0.0) {
            return Err(QslError::Config("strip spacing must be positive".into()));
        }
        if self.traversal.len() != self.transects.len()
            || self.chain_start.len() != self.traversal.len()
        {
            return Err(QslError::Config(
                "traversal order must visit every transect exactly once".into(),
            ));
        }
        let mut seen = vec![false; self.transects.len()];
        for &idx in &self.traversal {
            if idx >= self.transects.len() || seen[idx] {
                return Err(QslError::Config(
                    "traversal order must visit every transect exactly once".into(),
                ));
            }
            seen[idx] = true;
        }
        if self.chain_start.first() != Some(&true) {
            return Err(QslError::Config(
                "the first traversal slot must start a chain".into(),
            ));
        }
        for t in &self.transects {
            for (x, y) in [t.start, t.end] {
                if !region.contains(x, y) {
                    return Err(QslError::OutsideExtent { x, y });
                }
            }
        }
        Ok(())
    }
}

/// Which initialization improvements a mission applies to strips that
/// have a predecessor in their chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Improvements {
    /// Every strip searches from scratch.
    #[serde(rename = "none")]
    None,
    /// First sample at the previous strip's estimate.
    #[serde(rename = "I1")]
    PrevInit,
    /// Previous-estimate start plus a piecewise-uniform prior of
    /// halfwidth `L * W` around it.
    #[serde(rename = "I1+I2.1")]
    PrevInitPiecewisePrior,
    /// Previous-estimate start plus a Gaussian prior of deviation `L * W`.
    #[serde(rename = "I1+I2.2")]
    PrevInitGaussianPrior,
}

impl Improvements {
    pub fn label(&self) -> &'static str {
        match self {
            Improvements::None => "none",
            Improvements::PrevInit => "I1",
            Improvements::PrevInitPiecewisePrior => "I1+I2.1",
            Improvements::PrevInitGaussianPrior => "I1+I2.2",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "none" => Ok(Improvements::None),
            "I1" => Ok(Improvements::PrevInit),
            "I1+I2.1" => Ok(Improvements::PrevInitPiecewisePrior),
            "I1+I2.2" => Ok(Improvements::PrevInitGaussianPrior),
            other => Err(QslError::Config(format!(
                "unknown improvement set {other}; expected none, I1, I1+I2.1, or I1+I2.2"
            ))),
        }
    }

    fn needs_lipschitz(&self) -> bool {
        matches!(
            self,
            Improvements::PrevInitPiecewisePrior | Improvements::PrevInitGaussianPrior
        )
    }
}

/// Maximum finite-difference slope over boundary samples `(x, f(x))`,
/// probed at an offset of `delta_frac * strip_spacing` so a single point
/// with a large local derivative cannot inflate the estimate.
pub fn estimate_lipschitz(
    samples: &[(f64, f64)],
    strip_spacing: f64,
    delta_frac: f64,
) -> Result<f64> {
    if !(strip_spacing > 0.0 && delta_frac > 0.0) {
        return Err(QslError::Config(
            "slope estimation needs positive spacing and offset fraction".into(),
        ));
    }
    if samples.len() < 2 {
        return Err(QslError::SlopeSamples);
    }
    let mut points = samples.to_vec();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let probe = delta_frac * strip_spacing;

    let mut best: Option<f64> = None;
    for (i, &(x, f)) in points.iter().enumerate() {
        let target = x + probe;
        // The closest sample at least half a probe step away from x.
        let candidate = points[i + 1..]
            .iter()
            .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()));
        if let Some(&(xj, fj)) = candidate {
            if (xj - target).abs() <= probe / 2.0 {
                let slope = (fj - f).abs() / (xj - x);
                best = Some(best.map_or(slope, |b: f64| b.max(slope)));
            }
        }
    }
    best.ok_or(QslError::SlopeSamples)
}

/// Per-strip outcome of a mission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripOutcome {
    /// Transect index this outcome belongs to.
    pub strip: usize,
    pub theta_hat: f64,
    pub samples: usize,
    pub distance_units: f64,
    pub converged: bool,
    /// Noiseless crossing count from the dense validation scan.
    pub crossings: usize,
}

/// Piecewise-linear boundary estimate with mission totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEstimate {
    pub per_strip: Vec<StripOutcome>,
    pub polyline: Vec<(f64, f64)>,
    pub total_time_s: f64,
    pub total_distance_m: f64,
    pub total_samples: usize,
}

impl BoundaryEstimate {
    /// `strip,theta_hat,samples,distance` rows in traversal order.
    pub fn write_boundary_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# qsl-schema v1")?;
        writeln!(out, "strip,theta_hat,samples,distance")?;
        for s in &self.per_strip {
            writeln!(
                out,
                "{},{},{},{}",
                s.strip, s.theta_hat, s.samples, s.distance_units
            )?;
        }
        Ok(())
    }

    /// `x,y` polyline vertices in traversal order.
    pub fn write_polyline_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# qsl-schema v1")?;
        writeln!(out, "x,y")?;
        for (x, y) in &self.polyline {
            writeln!(out, "{x},{y}")?;
        }
        Ok(())
    }
}

/// Boundary accuracy against the dense-scan ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryErrorReport {
    pub mean_abs: f64,
    pub max_abs: f64,
    /// Per traversal slot; `None` where the strip was excluded.
    pub per_strip: Vec<Option<f64>>,
    /// Traversal slots excluded because the strip does not cross the
    /// boundary exactly once.
    pub excluded: Vec<usize>,
}

/// Mission-level accounting and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct MissionReport {
    pub strategy: String,
    pub parameter: f64,
    pub improvements: String,
    pub strips: usize,
    pub total_samples: usize,
    pub in_strip_distance_m: f64,
    pub inter_strip_distance_m: f64,
    pub total_distance_m: f64,
    pub total_time_s: f64,
    pub total_time_days: f64,
    pub gamma_s: f64,
    pub velocity_mps: f64,
    pub lipschitz: Option<f64>,
    pub flags: Vec<String>,
    pub error: BoundaryErrorReport,
    #[serde(skip)]
    pub traces: Vec<SearchTrace>,
}

/// Join per-slot estimates into the boundary polyline, one vertex per
/// traversal slot.
pub fn piecewise_linear(estimates: &[f64], plan: &StripPlan) -> Result<Vec<(f64, f64)>> {
    if estimates.len() != plan.traversal.len() {
        return Err(QslError::Config(format!(
            "need one estimate per strip: got {}, expected {}",
            estimates.len(),
            plan.traversal.len()
        )));
    }
    Ok(estimates
        .iter()
        .zip(&plan.traversal)
        .map(|(&t_hat, &idx)| plan.transects[idx].point_at(t_hat))
        .collect())
}

/// Compare per-strip estimates with the dense-scan ground truth; strips
/// without exactly one crossing are excluded and reported.
pub fn boundary_error(
    estimate: &BoundaryEstimate,
    region: &RegionRaster,
    plan: &StripPlan,
) -> Result<BoundaryErrorReport> {
    let mut per_strip = Vec::with_capacity(estimate.per_strip.len());
    let mut excluded = Vec::new();
    let mut included = Vec::new();
    for (slot, outcome) in estimate.per_strip.iter().enumerate() {
        let transect = &plan.transects[outcome.strip];
        let oracle = TransectOracle::oriented(region, transect.start, transect.end, 0.0, 0)?;
        let resolution = scan_resolution(region, transect);
        let crossings = scan_crossings(&oracle, resolution)?;
        if crossings.len() == 1 {
            let err = (outcome.theta_hat - crossings[0]).abs();
            per_strip.push(Some(err));
            included.push(err);
        } else {
            per_strip.push(None);
            excluded.push(slot);
        }
    }
    let (mean_abs, max_abs) = if included.is_empty() {
        (0.0, 0.0)
    } else {
        (
            included.iter().sum::<f64>() / included.len() as f64,
            included.iter().cloned().fold(0.0, f64::max),
        )
    };
    Ok(BoundaryErrorReport {
        mean_abs,
        max_abs,
        per_strip,
        excluded,
    })
}

fn scan_resolution(region: &RegionRaster, transect: &Transect) -> usize {
    let cells = (transect.length_m() / region.cell_size()).ceil() as usize;
    (4 * cells).max(1000)
}

fn euclid(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

/// Estimate the boundary slope bound from dense ground-truth scans of
/// parallel transects interpolated across each chain of the plan.
pub fn lipschitz_from_region(
    region: &RegionRaster,
    plan: &StripPlan,
    delta_frac: f64,
) -> Result<f64> {
    let mut best: Option<f64> = None;
    for chain in chains(plan) {
        if chain.len() < 2 {
            continue;
        }
        let first = &plan.transects[plan.traversal[chain[0]]];
        let last = &plan.transects[plan.traversal[*chain.last().unwrap()]];
        let span = euclid(first.start, last.start);
        if span <= 0.0 {
            continue;
        }
        // Sample the boundary at twice the probe resolution.
        let samples_wanted = ((span / (delta_frac * plan.spacing_m)) * 2.0).ceil() as usize + 1;
        let mut samples = Vec::new();
        for j in 0..samples_wanted {
            let s = j as f64 / (samples_wanted - 1) as f64;
            let start = lerp(first.start, last.start, s);
            let end = lerp(first.end, last.end, s);
            let oracle = TransectOracle::oriented(region, start, end, 0.0, 0)?;
            let probe = Transect { start, end };
            let crossings = scan_crossings(&oracle, scan_resolution(region, &probe))?;
            if crossings.len() == 1 {
                samples.push((s * span, crossings[0]));
            }
        }
        if samples.len() >= 2 {
            let slope = estimate_lipschitz(&samples, plan.spacing_m, delta_frac)?;
            best = Some(best.map_or(slope, |b: f64| b.max(slope)));
        }
    }
    best.ok_or(QslError::SlopeSamples)
}

fn lerp(a: (f64, f64), b: (f64, f64), s: f64) -> (f64, f64) {
    (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1))
}

fn chains(plan: &StripPlan) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for slot in 0..plan.traversal.len() {
        if plan.chain_start[slot] || out.is_empty() {
            out.push(vec![slot]);
        } else {
            out.last_mut().unwrap().push(slot);
        }
    }
    out
}

/// Run a full mission: strips in traversal order, one 1D search each,
/// improvements applied within chains, straight-line travel charged
/// between the last sample of one strip and the entry point of the next.
///
/// Only `gamma_s` and `velocity_mps` of the cost model are used here;
/// in-strip distances are converted to meters by each transect's length.
#[allow(clippy::too_many_arguments)]
pub fn run_mission(
    region: &RegionRaster,
    plan: &StripPlan,
    strategy: SearchStrategy,
    params: &SearchParams,
    improvements: Improvements,
    cost: &CostModel,
    lipschitz: Option<f64>,
    seed: u64,
) -> Result<(BoundaryEstimate, MissionReport)> {
    plan.validate(region)?;
    validate_strategy(strategy, params)?;

    let lipschitz = match (improvements.needs_lipschitz(), lipschitz) {
        (true, Some(l)) => {
            if !(l >= 0.0) {
                return Err(QslError::Config(format!(
                    "Lipschitz bound {l} must be nonnegative"
                )));
            }
            Some(l)
        }
        (true, None) => Some(lipschitz_from_region(region, plan, 0.1)?),
        (false, given) => given,
    };

    let mut outcomes: Vec<StripOutcome> = Vec::with_capacity(plan.traversal.len());
    let mut traces: Vec<SearchTrace> = Vec::with_capacity(plan.traversal.len());
    let mut estimates: Vec<f64> = Vec::with_capacity(plan.traversal.len());
    let mut flags: Vec<String> = Vec::new();
    let mut in_strip_m = 0.0;
    let mut legs_m = 0.0;
    let mut prev_point: Option<(f64, f64)> = None;
    let mut prev_estimate: Option<f64> = None;

    for (slot, &idx) in plan.traversal.iter().enumerate() {
        let transect = &plan.transects[idx];
        let strip_seed = mix_seed(seed, slot as u64, 0, 0);
        let mut oracle =
            TransectOracle::oriented(region, transect.start, transect.end, params.p, strip_seed)?;

        let fresh = plan.chain_start[slot] || improvements == Improvements::None;
        let (start, first_sample, prior) = if plan.chain_start[slot] {
            // A chain opens at its transect origin and searches from
            // scratch.
            (0.0, None, None)
        } else if fresh {
            // No improvements: the craft flies straight to the location
            // the strategy would sample first, so nothing is double
            // counted against the inter-strip leg.
            match natural_first_sample(strategy, params)? {
                Some(x0) => (x0, Some(x0), None),
                None => (0.0, None, None),
            }
        } else {
            let center = prev_estimate.expect("non-chain-start slot has a predecessor");
            let prior = build_prior(improvements, params, center, lipschitz, plan.spacing_m)?;
            (center, Some(center), prior)
        };

        let trace = run_search(&mut oracle, strategy, params, start, first_sample, prior)?;

        let entry_point = transect.point_at(trace.start);
        if let Some(prev) = prev_point {
            legs_m += euclid(prev, entry_point);
        }
        prev_point = Some(transect.point_at(trace.final_position()));
        in_strip_m += trace.distance() * transect.length_m();

        let theta_hat = trace.estimate.clamp(0.0, 1.0);
        let crossings = scan_crossings(
            &TransectOracle::oriented(region, transect.start, transect.end, 0.0, 0)?,
            scan_resolution(region, transect),
        )?
        .len();
        if crossings != 1 {
            flags.push(format!(
                "strip {idx}: {crossings} boundary crossings on the dense scan"
            ));
        }
        if crossings == 0 {
            flags.push(format!(
                "strip {idx}: no crossing, estimate pinned at {theta_hat}"
            ));
        }
        if !trace.converged {
            flags.push(format!("strip {idx}: search hit its step cap"));
        }

        outcomes.push(StripOutcome {
            strip: idx,
            theta_hat,
            samples: trace.n(),
            distance_units: trace.distance(),
            converged: trace.converged,
            crossings,
        });
        estimates.push(theta_hat);
        prev_estimate = Some(theta_hat);
        traces.push(trace);
    }

    let total_samples: usize = outcomes.iter().map(|o| o.samples).sum();
    let total_distance_m = in_strip_m + legs_m;
    let total_time_s = cost.gamma_s * total_samples as f64 + total_distance_m / cost.velocity_mps;
    let polyline = piecewise_linear(&estimates, plan)?;

    let estimate = BoundaryEstimate {
        per_strip: outcomes,
        polyline,
        total_time_s,
        total_distance_m,
        total_samples,
    };
    let error = boundary_error(&estimate, region, plan)?;
    let report = MissionReport {
        strategy: strategy.name().to_string(),
        parameter: strategy.parameter(),
        improvements: improvements.label().to_string(),
        strips: plan.k(),
        total_samples,
        in_strip_distance_m: in_strip_m,
        inter_strip_distance_m: legs_m,
        total_distance_m,
        total_time_s,
        total_time_days: total_time_s / 86_400.0,
        gamma_s: cost.gamma_s,
        velocity_mps: cost.velocity_mps,
        lipschitz,
        flags,
        error,
        traces,
    };
    Ok((estimate, report))
}

/// Where the strategy would take its first sample on a fresh strip, when
/// that location is known before running.
fn natural_first_sample(strategy: SearchStrategy, params: &SearchParams) -> Result<Option<f64>> {
    let quantile_location = |m: f64| -> Result<f64> {
        Ok(PosteriorGrid::uniform(params.delta)?.quantile(1.0 / m))
    };
    match strategy {
        SearchStrategy::Bisection => Ok(Some(if params.p == 0.0 {
            0.5
        } else {
            quantile_location(2.0)?
        })),
        SearchStrategy::Dqs { m } => Ok(Some(1.0 / m)),
        SearchStrategy::Pqs { m } | SearchStrategy::Tpqs { m } => Ok(Some(quantile_location(m)?)),
        SearchStrategy::Proactive { .. } => Ok(None),
    }
}

fn build_prior(
    improvements: Improvements,
    params: &SearchParams,
    center: f64,
    lipschitz: Option<f64>,
    spacing_m: f64,
) -> Result<Option<PosteriorGrid>> {
    let width = |l: f64| (l * spacing_m).max(params.delta);
    match improvements {
        Improvements::None | Improvements::PrevInit => Ok(None),
        Improvements::PrevInitPiecewisePrior => {
            let l = lipschitz.expect("Lipschitz bound resolved before the mission loop");
            Ok(Some(PosteriorGrid::piecewise_uniform(
                params.delta,
                center,
                width(l),
                PIECEWISE_PRIOR_RATIO,
            )?))
        }
        Improvements::PrevInitGaussianPrior => {
            let l = lipschitz.expect("Lipschitz bound resolved before the mission loop");
            Ok(Some(PosteriorGrid::gaussian(
                params.delta,
                center,
                width(l),
            )?))
        }
    }
}

/// Mission configuration as read from a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MissionSpec {
    /// Raster file to load; exclusive with `synthetic`.
    #[serde(default)]
    pub region_file: Option<String>,
    /// Inline synthetic region; exclusive with `region_file`.
    #[serde(default)]
    pub synthetic: Option<crate::synthetic::RegionSpec>,
    pub plan: PlanSpec,
    #[serde(flatten)]
    pub strategy: SearchStrategy,
    pub params: SearchParams,
    pub improvements: Improvements,
    pub gamma_s: f64,
    pub velocity_mps: f64,
    #[serde(default)]
    pub lipschitz: Option<f64>,
    pub seed: u64,
}

/// Strip layout in a mission file: explicit transects or an auto layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum PlanSpec {
    Explicit {
        transects: Vec<Transect>,
        spacing_m: f64,
    },
    Vertical {
        k: usize,
        x_range: (f64, f64),
        y_from: f64,
        y_to: f64,
    },
    TwoFragment {
        k_per_half: usize,
        x_range: (f64, f64),
        y_bottom: f64,
        y_split: f64,
        y_top: f64,
    },
}

impl MissionSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn resolve_region(&self) -> Result<RegionRaster> {
        match (&self.region_file, &self.synthetic) {
            (Some(path), None) => RegionRaster::read_from(Path::new(path)),
            (None, Some(spec)) => crate::synthetic::make_synthetic_region(spec),
            _ => Err(QslError::Config(
                "mission needs exactly one of region_file or synthetic".into(),
            )),
        }
    }

    pub fn resolve_plan(&self) -> Result<StripPlan> {
        match &self.plan {
            PlanSpec::Explicit {
                transects,
                spacing_m,
            } => {
                let k = transects.len();
                let mut chain_start = vec![false; k];
                if let Some(first) = chain_start.first_mut() {
                    *first = true;
                }
                Ok(StripPlan {
                    transects: transects.clone(),
                    traversal: (0..k).collect(),
                    chain_start,
                    spacing_m: *spacing_m,
                })
            }
            PlanSpec::Vertical {
                k,
                x_range,
                y_from,
                y_to,
            } => StripPlan::vertical(*x_range, *y_from, *y_to, *k),
            PlanSpec::TwoFragment {
                k_per_half,
                x_range,
                y_bottom,
                y_split,
                y_top,
            } => StripPlan::two_fragment(*x_range, *y_bottom, *y_split, *y_top, *k_per_half),
        }
    }

    pub fn run(&self) -> Result<(BoundaryEstimate, MissionReport)> {
        let region = self.resolve_region()?;
        let plan = self.resolve_plan()?;
        let cost = CostModel::new(
            self.gamma_s,
            self.velocity_mps,
            plan.transects[0].length_m(),
        )?;
        run_mission(
            &region,
            &plan,
            self.strategy,
            &self.params,
            self.improvements,
            &cost,
            self.lipschitz,
            self.seed,
        )
    }
}
