//! Ordered record of a single 1D search.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One measurement with the state the strategy carried at that step.
///
/// The optional columns depend on the strategy: feasible-interval searches
/// record `(a, b)`, posterior searches record the running max bin mass and
/// median, and the utility-maximizing baseline records the chosen utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub x: f64,
    pub label: bool,
    pub cum_distance: f64,
    pub interval: Option<(f64, f64)>,
    pub max_bin_mass: Option<f64>,
    pub median: Option<f64>,
    pub utility: Option<f64>,
}

/// Full record of one search: samples in order, cumulative travel,
/// and the final estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    /// Position the craft occupied before the first sample.
    pub start: f64,
    pub steps: Vec<TraceStep>,
    pub estimate: f64,
    /// False when the run hit its step cap before the stopping rule fired.
    pub converged: bool,
}

impl SearchTrace {
    pub fn n(&self) -> usize {
        self.steps.len()
    }

    /// Total path length, including the leg from `start` to the first
    /// sample.
    pub fn distance(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cum_distance)
    }

    pub fn locations(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.x)
    }

    /// Position after the last sample (the start if none were taken).
    pub fn final_position(&self) -> f64 {
        self.steps.last().map_or(self.start, |s| s.x)
    }

    /// Running estimate after `n` samples: the feasible-interval midpoint
    /// or the posterior median, whichever the strategy records.
    pub fn estimate_at(&self, n: usize) -> Option<f64> {
        if n == 0 || n > self.steps.len() {
            return None;
        }
        let step = &self.steps[n - 1];
        step.median
            .or_else(|| step.interval.map(|(a, b)| 0.5 * (a + b)))
    }

    /// Trace rows as CSV. Columns beyond the common prefix appear only
    /// when at least one step carries them.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let has_mass = self.steps.iter().any(|s| s.max_bin_mass.is_some());
        let has_utility = self.steps.iter().any(|s| s.utility.is_some());
        writeln!(out, "# qsl-schema v1")?;
        let mut header = String::from("step,x,y,a,b,cum_distance");
        if has_mass {
            header.push_str(",max_bin_mass");
        }
        if has_utility {
            header.push_str(",utility");
        }
        writeln!(out, "{header}")?;
        for (i, step) in self.steps.iter().enumerate() {
            let (a, b) = match step.interval {
                Some((a, b)) => (a.to_string(), b.to_string()),
                None => (String::new(), String::new()),
            };
            let mut row = format!(
                "{},{},{},{},{},{}",
                i + 1,
                step.x,
                u8::from(step.label),
                a,
                b,
                step.cum_distance
            );
            if has_mass {
                row.push(',');
                if let Some(mass) = step.max_bin_mass {
                    row.push_str(&mass.to_string());
                }
            }
            if has_utility {
                row.push(',');
                if let Some(u) = step.utility {
                    row.push_str(&u.to_string());
                }
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(x: f64, label: bool, cum: f64) -> TraceStep {
        TraceStep {
            x,
            label,
            cum_distance: cum,
            interval: Some((0.0, 1.0)),
            max_bin_mass: None,
            median: None,
            utility: None,
        }
    }

    #[test]
    fn distance_and_estimates() {
        let trace = SearchTrace {
            start: 0.0,
            steps: vec![step(0.2, true, 0.2), step(0.36, false, 0.36)],
            estimate: 0.28,
            converged: true,
        };
        assert_eq!(trace.n(), 2);
        assert_eq!(trace.distance(), 0.36);
        assert_eq!(trace.estimate_at(1), Some(0.5));
        assert_eq!(trace.estimate_at(0), None);
        assert_eq!(trace.estimate_at(3), None);
        assert_eq!(trace.final_position(), 0.36);
    }

    #[test]
    fn csv_columns_follow_content() {
        let trace = SearchTrace {
            start: 0.0,
            steps: vec![step(0.5, true, 0.5)],
            estimate: 0.75,
            converged: true,
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("step,x,y,a,b,cum_distance\n"));
        assert!(text.contains("1,0.5,1,0,1,0.5"));

        let posterior_trace = SearchTrace {
            start: 0.0,
            steps: vec![TraceStep {
                x: 0.25,
                label: false,
                cum_distance: 0.25,
                interval: None,
                max_bin_mass: Some(0.4),
                median: Some(0.2),
                utility: Some(0.9),
            }],
            estimate: 0.2,
            converged: false,
        };
        let mut buf = Vec::new();
        posterior_trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("step,x,y,a,b,cum_distance,max_bin_mass,utility\n"));
        assert!(text.contains("1,0.25,0,,,0.25,0.4,0.9"));
    }
}
