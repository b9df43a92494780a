//! Deterministic quantile search for noiseless measurements.
//!
//! The search keeps a feasible interval `(a, b]` consistent with every
//! label seen so far and always moves a fraction `1/m` of the current
//! width from its present location: forward after a 1, backward after a 0.
//! Because the craft always sits on a boundary of the interval, the next
//! sample is the interior `1/m` (or `(m-1)/m`) quantile, so each
//! measurement shrinks the width by exactly `1/m` or `(m-1)/m`.

use crate::error::{QslError, Result};
use crate::oracle::Oracle;
use crate::trace::{SearchTrace, TraceStep};

/// Interval `(a, b]` known to contain the change point under noiseless
/// labels: `a` is the largest location observed 1, `b` the smallest
/// observed 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleInterval {
    pub a: f64,
    pub b: f64,
}

impl FeasibleInterval {
    pub fn full() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn width(self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// Absorb a noiseless label; errors if it contradicts the interval.
    pub fn absorb(&mut self, x: f64, label: bool) -> Result<()> {
        if label {
            if x >= self.b {
                return Err(QslError::InconsistentLabels);
            }
            self.a = self.a.max(x);
        } else {
            if x <= self.a {
                return Err(QslError::InconsistentLabels);
            }
            self.b = self.b.min(x);
        }
        Ok(())
    }
}

fn require_noiseless(oracle: &impl Oracle) -> Result<()> {
    let p = oracle.flip_probability();
    if p != 0.0 {
        return Err(QslError::Misuse(format!(
            "deterministic quantile search requires a noiseless oracle, got p = {p}"
        )));
    }
    Ok(())
}

fn check_m(m: f64) -> Result<()> {
    if !(m >= 2.0) {
        return Err(QslError::Config(format!(
            "search parameter m = {m} must be at least 2"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(QslError::Config(format!(
            "stopping half-width {epsilon} must be positive"
        )));
    }
    Ok(())
}

struct DqsState {
    interval: FeasibleInterval,
    position: f64,
    last_label: bool,
    distance: f64,
    steps: Vec<TraceStep>,
}

impl DqsState {
    fn new(start: f64) -> Self {
        Self {
            interval: FeasibleInterval { a: start, b: 1.0 },
            position: start,
            last_label: true,
            distance: 0.0,
            steps: Vec::new(),
        }
    }

    fn take_step(&mut self, oracle: &mut impl Oracle, m: f64) -> Result<()> {
        let stride = self.interval.width() / m;
        let x = if self.last_label {
            self.position + stride
        } else {
            self.position - stride
        };
        let x = x.clamp(0.0, 1.0);
        self.record(oracle, x)?;
        Ok(())
    }

    fn record(&mut self, oracle: &mut impl Oracle, x: f64) -> Result<()> {
        let label = oracle.measure(x)?;
        self.distance += (x - self.position).abs();
        self.position = x;
        self.last_label = label;
        self.interval.absorb(x, label)?;
        self.steps.push(TraceStep {
            x,
            label,
            cum_distance: self.distance,
            interval: Some((self.interval.a, self.interval.b)),
            max_bin_mass: None,
            median: None,
            utility: None,
        });
        Ok(())
    }

    fn finish(self, start: f64, converged: bool) -> SearchTrace {
        SearchTrace {
            start,
            steps: self.steps,
            estimate: self.interval.midpoint(),
            converged,
        }
    }
}

/// Run the search from `start` until the feasible width is at most
/// `2 * epsilon`; the estimate is the interval midpoint.
///
/// `start` carries the implied label 1, matching the convention that the
/// craft enters from inside the label-1 region; passing 0 recovers the
/// plain algorithm.
pub fn dqs(oracle: &mut impl Oracle, m: f64, epsilon: f64, start: f64) -> Result<SearchTrace> {
    require_noiseless(oracle)?;
    check_m(m)?;
    check_epsilon(epsilon)?;
    if !(0.0..=1.0).contains(&start) {
        return Err(QslError::OutOfRange(start));
    }
    let mut state = DqsState::new(start);
    while state.interval.width() > 2.0 * epsilon {
        state.take_step(oracle, m)?;
    }
    Ok(state.finish(start, true))
}

/// Run exactly `n_samples` measurements with no width-based stopping.
pub fn dqs_fixed_samples(
    oracle: &mut impl Oracle,
    m: f64,
    n_samples: usize,
    start: f64,
) -> Result<SearchTrace> {
    require_noiseless(oracle)?;
    check_m(m)?;
    if !(0.0..=1.0).contains(&start) {
        return Err(QslError::OutOfRange(start));
    }
    let mut state = DqsState::new(start);
    for _ in 0..n_samples {
        state.take_step(oracle, m)?;
    }
    Ok(state.finish(start, true))
}

/// Deterministic quantile search whose first measurement lands at `x0`,
/// typically the previous strip's estimate.
///
/// The observed label at `x0` sets one side of an initially full `[0, 1]`
/// interval; subsequent steps follow the usual movement rule. When
/// `travel_from` is given, the leg from that position to `x0` is charged
/// to the trace distance.
pub fn dqs_with_init(
    oracle: &mut impl Oracle,
    m: f64,
    epsilon: f64,
    x0: f64,
    travel_from: Option<f64>,
) -> Result<SearchTrace> {
    require_noiseless(oracle)?;
    check_m(m)?;
    check_epsilon(epsilon)?;
    if !(0.0..=1.0).contains(&x0) {
        return Err(QslError::OutOfRange(x0));
    }
    let start = travel_from.unwrap_or(x0);
    if !(0.0..=1.0).contains(&start) {
        return Err(QslError::OutOfRange(start));
    }

    let mut state = DqsState::new(0.0);
    state.position = start;
    state.record(oracle, x0)?;
    while state.interval.width() > 2.0 * epsilon {
        state.take_step(oracle, m)?;
    }
    Ok(state.finish(start, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::StepOracle;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn locations(trace: &SearchTrace) -> Vec<f64> {
        trace.locations().collect()
    }

    #[test]
    fn second_sample_at_seven_sixteenths() {
        let mut oracle = StepOracle::new(3.0 / 8.0, 0.0, 1).unwrap();
        let trace = dqs_fixed_samples(&mut oracle, 4.0, 2, 0.0).unwrap();
        let xs = locations(&trace);
        assert_close(xs[0], 0.25, 1e-12);
        assert!(trace.steps[0].label);
        assert_close(xs[1], 7.0 / 16.0, 1e-12);
    }

    #[test]
    fn hand_trace_m5() {
        let mut oracle = StepOracle::new(1.0 / 3.0, 0.0, 1).unwrap();
        let trace = dqs_fixed_samples(&mut oracle, 5.0, 4, 0.0).unwrap();
        let xs = locations(&trace);
        let labels: Vec<bool> = trace.steps.iter().map(|s| s.label).collect();
        assert_close(xs[0], 0.2, 1e-12);
        assert_close(xs[1], 0.36, 1e-12);
        assert_close(xs[2], 0.328, 1e-12);
        assert_close(xs[3], 0.3344, 1e-12);
        assert_eq!(labels, vec![true, false, true, false]);
        assert_close(trace.estimate, 0.3312, 1e-12);
        assert_close(trace.estimate_at(4).unwrap(), 0.3312, 1e-12);
    }

    #[test]
    fn m2_is_classical_bisection() {
        let mut oracle = StepOracle::new(1.0 / 3.0, 0.0, 1).unwrap();
        let trace = dqs_fixed_samples(&mut oracle, 2.0, 3, 0.0).unwrap();
        let xs = locations(&trace);
        assert_close(xs[0], 0.5, 1e-12);
        assert_close(xs[1], 0.25, 1e-12);
        assert_close(xs[2], 0.375, 1e-12);
    }

    #[test]
    fn width_contracts_by_quantile_split() {
        let mut oracle = StepOracle::new(0.61, 0.0, 1).unwrap();
        let m = 3.5;
        let trace = dqs_fixed_samples(&mut oracle, m, 12, 0.0).unwrap();
        let mut prev = 1.0;
        for step in &trace.steps {
            let (a, b) = step.interval.unwrap();
            let width = b - a;
            let ratio = width / prev;
            let near_small = (ratio - 1.0 / m).abs() < 1e-9;
            let near_large = (ratio - (m - 1.0) / m).abs() < 1e-9;
            assert!(near_small || near_large, "ratio {ratio} is not a quantile split");
            prev = width;
        }
    }

    #[test]
    fn converges_within_epsilon_on_grid() {
        for &m in &[2.0, 3.0, 5.0, 11.5] {
            for k in 0..60 {
                let theta = (k as f64 + 0.5) / 60.0;
                let mut oracle = StepOracle::new(theta, 0.0, 1).unwrap();
                let trace = dqs(&mut oracle, m, 1e-4, 0.0).unwrap();
                assert!(
                    (trace.estimate - theta).abs() <= 1e-4,
                    "m={m} theta={theta} estimate={}",
                    trace.estimate
                );
                assert!(trace.converged);
            }
        }
    }

    #[test]
    fn mean_distance_near_one_for_bisection() {
        // Average over a theta grid approaches m/(2m-2) = 1 at m = 2.
        let grid = 400;
        let mut total = 0.0;
        let mut totsq = 0.0;
        for k in 0..grid {
            let theta = (k as f64 + 0.5) / grid as f64;
            let mut oracle = StepOracle::new(theta, 0.0, 1).unwrap();
            let d = dqs(&mut oracle, 2.0, 1e-4, 0.0).unwrap().distance();
            total += d;
            totsq += d * d;
        }
        let mean = total / grid as f64;
        let var = (totsq / grid as f64 - mean * mean).max(0.0);
        let stderr = (var / grid as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * stderr + 5e-3,
            "mean distance {mean}, stderr {stderr}"
        );
    }

    #[test]
    fn noisy_oracle_rejected() {
        let mut oracle = StepOracle::new(0.5, 0.1, 1).unwrap();
        assert!(matches!(
            dqs(&mut oracle, 2.0, 1e-3, 0.0),
            Err(QslError::Misuse(_))
        ));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mut oracle = StepOracle::new(0.5, 0.0, 1).unwrap();
        assert!(dqs(&mut oracle, 1.5, 1e-3, 0.0).is_err());
        assert!(dqs(&mut oracle, 2.0, 0.0, 0.0).is_err());
        assert!(dqs(&mut oracle, 2.0, 1e-3, 1.5).is_err());
    }

    #[test]
    fn init_hand_trace() {
        let mut oracle = StepOracle::new(0.52, 0.0, 1).unwrap();
        let trace = dqs_with_init(&mut oracle, 2.0, 1e-3, 0.5, None).unwrap();
        let xs = locations(&trace);
        assert_close(xs[0], 0.5, 1e-12);
        assert!(trace.steps[0].label);
        assert_close(trace.steps[0].interval.unwrap().0, 0.5, 1e-12);
        assert_close(xs[1], 0.75, 1e-12);
        assert!(!trace.steps[1].label);
        assert_close(xs[2], 0.625, 1e-12);
        assert_close(xs[3], 0.5625, 1e-12);
        assert_close(trace.estimate, 0.52, 1e-3);
    }

    #[test]
    fn init_exactly_at_theta_goes_left() {
        let mut oracle = StepOracle::new(0.4, 0.0, 1).unwrap();
        let trace = dqs_with_init(&mut oracle, 4.0, 1e-3, 0.4, None).unwrap();
        assert!(!trace.steps[0].label, "f(theta) = 0 on the right-open step");
        assert_close(trace.steps[0].interval.unwrap().1, 0.4, 1e-12);
        for w in trace.locations().skip(1) {
            assert!(w < 0.4);
        }
        assert_close(trace.estimate, 0.4, 1e-3);
    }

    #[test]
    fn init_at_zero_reduces_to_plain_search() {
        let mut a = StepOracle::new(0.37, 0.0, 1).unwrap();
        let with_init = dqs_with_init(&mut a, 3.0, 1e-4, 0.0, None).unwrap();
        let mut b = StepOracle::new(0.37, 0.0, 1).unwrap();
        let plain = dqs(&mut b, 3.0, 1e-4, 0.0).unwrap();
        // The probe at 0 observes the label the plain search assumes, so
        // the continuation is identical sample for sample.
        let init_tail: Vec<f64> = with_init.locations().skip(1).collect();
        let plain_xs: Vec<f64> = plain.locations().collect();
        assert_eq!(init_tail, plain_xs);
        assert_eq!(with_init.estimate, plain.estimate);
        assert_close(with_init.distance(), plain.distance(), 1e-12);
    }

    #[test]
    fn feasible_interval_rejects_contradictions() {
        let mut interval = FeasibleInterval::full();
        interval.absorb(0.3, true).unwrap();
        interval.absorb(0.7, false).unwrap();
        assert_eq!(interval, FeasibleInterval { a: 0.3, b: 0.7 });
        // Label 1 at or beyond b claims theta > b; label 0 at or below a
        // claims theta <= a. Both contradict the noiseless history.
        for (x, label) in [(0.8, true), (0.2, false), (0.7, true), (0.3, false)] {
            let mut probe = interval;
            assert!(probe.absorb(x, label).is_err(), "({x}, {label})");
        }
    }

    #[test]
    fn travel_from_charges_the_approach_leg() {
        let mut oracle = StepOracle::new(0.52, 0.0, 1).unwrap();
        let far = dqs_with_init(&mut oracle, 2.0, 1e-3, 0.5, Some(0.1)).unwrap();
        let mut oracle = StepOracle::new(0.52, 0.0, 1).unwrap();
        let near = dqs_with_init(&mut oracle, 2.0, 1e-3, 0.5, None).unwrap();
        assert_close(far.distance() - near.distance(), 0.4, 1e-12);
        assert_eq!(far.start, 0.1);
    }
}
