//! Discretized posterior density over the change point.
//!
//! The density is piecewise constant over `1/delta` equal bins; each bin
//! stores its probability mass and the cdf is linearly interpolated inside
//! a bin. Sample locations stay continuous: an update splits the bin
//! containing the sample point proportionally, so the grid only
//! discretizes the density, never the search itself.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};

/// Probability used in the Bayesian update together with the search
/// parameter it belongs to.
///
/// `p_update` equals the channel's true flip probability by default. The
/// discretized variant substitutes a surrogate value `alpha` with
/// `p <= alpha < 0.5`; callers opt in by constructing the params with
/// that value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateParams {
    pub p_update: f64,
    pub m: f64,
}

impl UpdateParams {
    pub fn new(p_update: f64, m: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&p_update) {
            return Err(QslError::Config(format!(
                "update probability {p_update} must lie in [0, 0.5)"
            )));
        }
        if !(m >= 2.0) {
            return Err(QslError::Config(format!(
                "search parameter m = {m} must be at least 2"
            )));
        }
        Ok(Self { p_update, m })
    }
}

/// Binary entropy in bits, with `H_b(0) = H_b(1) = 0` by continuity.
pub fn binary_entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

/// Discretized probability density over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorGrid {
    weights: Vec<f64>,
}

impl PosteriorGrid {
    /// Uniform prior: every bin carries mass `delta`.
    pub fn uniform(delta: f64) -> Result<Self> {
        let bins = bins_for_delta(delta)?;
        Ok(Self {
            weights: vec![1.0 / bins as f64; bins],
        })
    }

    /// Piecewise-uniform prior: bins whose centers lie within `halfwidth`
    /// of `center` carry `ratio` times the per-bin mass of the rest.
    ///
    /// Falls back to uniform (with a warning) when no bin center lands in
    /// the window after clipping to the unit interval.
    pub fn piecewise_uniform(delta: f64, center: f64, halfwidth: f64, ratio: f64) -> Result<Self> {
        let bins = bins_for_delta(delta)?;
        if !(ratio > 1.0) {
            return Err(QslError::Config(format!(
                "prior ratio {ratio} must exceed 1"
            )));
        }
        if !(0.0..=1.0).contains(&center) {
            return Err(QslError::Config(format!(
                "prior center {center} must lie in [0, 1]"
            )));
        }
        if !(halfwidth > 0.0) {
            return Err(QslError::Config(format!(
                "prior halfwidth {halfwidth} must be positive"
            )));
        }
        let mut weights: Vec<f64> = (0..bins)
            .map(|i| {
                let c = (i as f64 + 0.5) / bins as f64;
                if (c - center).abs() <= halfwidth {
                    ratio
                } else {
                    1.0
                }
            })
            .collect();
        if !weights.iter().any(|&w| w > 1.0) {
            log::warn!(
                "piecewise-uniform window (center {center}, halfwidth {halfwidth}) \
                 covers no bin; falling back to a uniform prior"
            );
            weights = vec![1.0; bins];
        }
        let mut grid = Self { weights };
        grid.normalize();
        Ok(grid)
    }

    /// Gaussian-kernel prior: bin masses proportional to the kernel value
    /// at bin centers; the normalization constant is absorbed.
    pub fn gaussian(delta: f64, center: f64, sigma: f64) -> Result<Self> {
        let bins = bins_for_delta(delta)?;
        if !(sigma > 0.0) {
            return Err(QslError::Config(format!(
                "prior sigma {sigma} must be positive"
            )));
        }
        let mut weights: Vec<f64> = (0..bins)
            .map(|i| {
                let c = (i as f64 + 0.5) / bins as f64;
                let z = (c - center) / sigma;
                (-0.5 * z * z).exp()
            })
            .collect();
        if weights.iter().sum::<f64>() <= 0.0 {
            // Kernel underflowed everywhere; keep the mass at the bin
            // nearest the requested center.
            let idx = ((center.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
            weights[idx] = 1.0;
        }
        let mut grid = Self { weights };
        grid.normalize();
        Ok(grid)
    }

    /// Build a grid from raw nonnegative weights, normalizing them.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(QslError::Config(
                "a posterior grid needs at least two bins".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(QslError::Config(
                "posterior weights must be finite and nonnegative".into(),
            ));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(QslError::Config(
                "posterior weights must carry positive total mass".into(),
            ));
        }
        let mut grid = Self { weights };
        grid.normalize();
        Ok(grid)
    }

    pub fn bins(&self) -> usize {
        self.weights.len()
    }

    pub fn delta(&self) -> f64 {
        1.0 / self.weights.len() as f64
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cumulative mass on `[0, x]` with linear interpolation inside the
    /// bin containing `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.weights.len();
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let scaled = x * n as f64;
        let idx = (scaled as usize).min(n - 1);
        let frac = scaled - idx as f64;
        let head: f64 = self.weights[..idx].iter().sum();
        (head + self.weights[idx] * frac).min(1.0)
    }

    /// Smallest `x` with `cdf(x) >= q`, interpolated so that
    /// `cdf(quantile(q)) == q` wherever positive mass permits.
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let n = self.weights.len();
        if q >= 1.0 {
            // Right edge of the support, exact even when the cumulative
            // sum carries rounding dust.
            let last = self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(n - 1);
            return (last + 1) as f64 / n as f64;
        }
        let mut cum = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            let next = cum + w;
            if next >= q {
                if w > 0.0 {
                    let frac = ((q - cum) / w).clamp(0.0, 1.0);
                    return (i as f64 + frac) / n as f64;
                }
                // Zero-mass bin reached with the target already met: the
                // smallest qualifying location is its left edge.
                return i as f64 / n as f64;
            }
            cum = next;
        }
        1.0
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Bayesian update for a label `y` observed at `x`.
    ///
    /// With `phi = cdf(x)` and `q = p_update`, a label 0 scales mass left
    /// of `x` by `(1-q)` and right of `x` by `q` (swapped for label 1); the
    /// bin containing `x` is split proportionally at `x` and the result is
    /// renormalized, which realizes the `phi(1-q) + (1-phi)q` denominator.
    pub fn update(&mut self, x: f64, y: bool, params: &UpdateParams) -> Result<()> {
        if !(0.0..=1.0).contains(&x) {
            return Err(QslError::OutOfRange(x));
        }
        let q = params.p_update;
        let (scale_left, scale_right) = if y { (q, 1.0 - q) } else { (1.0 - q, q) };

        let n = self.weights.len();
        let scaled = (x * n as f64).min(n as f64);
        let idx = (scaled as usize).min(n - 1);
        let frac = (scaled - idx as f64).clamp(0.0, 1.0);

        let mut total = 0.0;
        for w in &mut self.weights[..idx] {
            *w *= scale_left;
            total += *w;
        }
        let split = self.weights[idx];
        self.weights[idx] = split * frac * scale_left + split * (1.0 - frac) * scale_right;
        total += self.weights[idx];
        for w in &mut self.weights[idx + 1..] {
            *w *= scale_right;
            total += *w;
        }

        if total <= 0.0 {
            return Err(QslError::Contradiction(x));
        }
        let inv = 1.0 / total;
        for w in &mut self.weights {
            *w *= inv;
        }
        Ok(())
    }

    /// Non-mutating variant of [`PosteriorGrid::update`].
    pub fn updated(&self, x: f64, y: bool, params: &UpdateParams) -> Result<Self> {
        let mut next = self.clone();
        next.update(x, y, params)?;
        Ok(next)
    }

    /// Remove the tail mass that could pull the next sample away from the
    /// median: `chi = min(cdf(x), 1 - cdf(x))` is zeroed from each end and
    /// the remainder renormalized.
    pub fn truncate_tails(&self, x_current: f64) -> (Self, f64) {
        let mut out = self.clone();
        let chi = self.truncate_tails_into(&mut out, x_current);
        (out, chi)
    }

    pub(crate) fn truncate_tails_into(&self, out: &mut Self, x_current: f64) -> f64 {
        let phi = self.cdf(x_current);
        let chi = phi.min(1.0 - phi);
        out.weights.clear();
        out.weights.extend_from_slice(&self.weights);
        if chi <= 0.0 {
            return chi;
        }

        let mut remaining = chi;
        for w in &mut out.weights {
            if remaining <= 0.0 {
                break;
            }
            let take = w.min(remaining);
            *w -= take;
            remaining -= take;
        }
        let mut remaining = chi;
        for w in out.weights.iter_mut().rev() {
            if remaining <= 0.0 {
                break;
            }
            let take = w.min(remaining);
            *w -= take;
            remaining -= take;
        }

        let total: f64 = out.weights.iter().sum();
        if total <= f64::EPSILON {
            // chi reached 1/2, so both removals met at the median; keep
            // that bin intact rather than returning an empty density.
            let median_bin = ((self.median() * out.weights.len() as f64) as usize)
                .min(out.weights.len() - 1);
            out.weights.fill(0.0);
            out.weights[median_bin] = 1.0;
        } else {
            let inv = 1.0 / total;
            for w in &mut out.weights {
                *w *= inv;
            }
        }
        chi
    }

    /// Largest single-bin mass and its index (ties go to the lowest index).
    pub fn max_bin_mass(&self) -> (f64, usize) {
        let mut best = (self.weights[0], 0);
        for (i, &w) in self.weights.iter().enumerate().skip(1) {
            if w > best.0 {
                best = (w, i);
            }
        }
        best
    }

    /// Mutual information, in bits, between the change point and one
    /// measurement taken at `x` through a flip-probability-`p` channel:
    /// `H_b(phi(1-p) + (1-phi)p) - H_b(p)` with `phi = cdf(x)`.
    pub fn mutual_information(&self, x: f64, p: f64) -> f64 {
        let phi = self.cdf(x);
        mutual_information_at(phi, p)
    }

    /// Width of the region still carrying mass, in location units.
    pub fn support_width(&self) -> f64 {
        let n = self.weights.len();
        let first = self.weights.iter().position(|&w| w > 0.0);
        let last = self.weights.iter().rposition(|&w| w > 0.0);
        match (first, last) {
            (Some(a), Some(b)) => (b - a + 1) as f64 / n as f64,
            _ => 0.0,
        }
    }

    /// Debug dump: `bin_index,left_edge,mass` rows.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# qsl-schema v1")?;
        writeln!(out, "bin_index,left_edge,mass")?;
        let n = self.weights.len();
        for (i, &w) in self.weights.iter().enumerate() {
            writeln!(out, "{},{},{}", i, i as f64 / n as f64, w)?;
        }
        Ok(())
    }

    fn normalize(&mut self) {
        let total: f64 = self.weights.iter().sum();
        debug_assert!(total > 0.0);
        let inv = 1.0 / total;
        for w in &mut self.weights {
            *w *= inv;
        }
    }
}

/// Mutual information in bits for a measurement whose left-mass is `phi`.
pub fn mutual_information_at(phi: f64, p: f64) -> f64 {
    let mixed = phi * (1.0 - p) + (1.0 - phi) * p;
    (binary_entropy(mixed) - binary_entropy(p)).max(0.0)
}

fn bins_for_delta(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(QslError::Config(format!(
            "bin width {delta} must lie in (0, 0.5]"
        )));
    }
    let bins = 1.0 / delta;
    let rounded = bins.round();
    if (bins - rounded).abs() > 1e-9 || rounded < 2.0 {
        return Err(QslError::Config(format!(
            "1/delta = {bins} must be an integer of at least 2"
        )));
    }
    Ok(rounded as usize)
}
