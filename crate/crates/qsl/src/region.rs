//! Labeled 2D scalar fields and the transects that reduce them to 1D
//! step functions.
//!
//! A [`RegionRaster`] is a row-major grid of scalar values with a
//! threshold; a point is labeled 1 when its nearest cell's value does not
//! exceed the threshold. A [`TransectOracle`] samples the raster along a
//! straight segment parameterized on `[0, 1]`, optionally complementing
//! labels so the segment starts inside the label-1 region, and applies
//! the same flip channel as the 1D step oracle.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::oracle::{check_flip_probability, unit_f64, Oracle};

/// Row-major scalar field over a rectangular extent.
///
/// Row 0 sits at the origin (southern) edge; values are stored west to
/// east within a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRaster {
    ncols: usize,
    nrows: usize,
    cell_size: f64,
    origin: (f64, f64),
    threshold: f64,
    values: Vec<f64>,
}

impl RegionRaster {
    pub fn new(
        ncols: usize,
        nrows: usize,
        cell_size: f64,
        origin: (f64, f64),
        threshold: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if ncols == 0 || nrows == 0 {
            return Err(QslError::Config("raster must have positive dimensions".into()));
        }
        if !(cell_size > 0.0) {
            return Err(QslError::Config(format!(
                "cell size {cell_size} must be positive"
            )));
        }
        if values.len() != ncols * nrows {
            return Err(QslError::Config(format!(
                "raster value count {} does not match {ncols} x {nrows}",
                values.len()
            )));
        }
        Ok(Self {
            ncols,
            nrows,
            cell_size,
            origin,
            threshold,
            values,
        })
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn width_m(&self) -> f64 {
        self.ncols as f64 * self.cell_size
    }

    pub fn height_m(&self) -> f64 {
        self.nrows as f64 * self.cell_size
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x0, y0) = self.origin;
        x >= x0 && x <= x0 + self.width_m() && y >= y0 && y <= y0 + self.height_m()
    }

    fn cell_index(&self, x: f64, y: f64) -> Result<usize> {
        if !self.contains(x, y) {
            return Err(QslError::OutsideExtent { x, y });
        }
        let (x0, y0) = self.origin;
        let col = (((x - x0) / self.cell_size) as usize).min(self.ncols - 1);
        let row = (((y - y0) / self.cell_size) as usize).min(self.nrows - 1);
        Ok(row * self.ncols + col)
    }

    /// Scalar value of the nearest cell.
    pub fn value_at(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.values[self.cell_index(x, y)?])
    }

    /// Label 1 when the nearest cell's value does not exceed the
    /// threshold.
    pub fn label_at(&self, x: f64, y: f64) -> Result<bool> {
        Ok(self.value_at(x, y)? <= self.threshold)
    }

    /// Parse the plain-text raster format: six `key value` header lines
    /// (`ncols`, `nrows`, `xll`, `yll`, `cellsize`, `threshold`) followed
    /// by `nrows` lines of `ncols` values, southern row first.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<f64> {
            let line = lines
                .next()
                .ok_or_else(|| QslError::RasterFormat(format!("missing header line {key}")))?;
            let mut parts = line.split_whitespace();
            let found = parts
                .next()
                .ok_or_else(|| QslError::RasterFormat(format!("empty header line for {key}")))?;
            if !found.eq_ignore_ascii_case(key) {
                return Err(QslError::RasterFormat(format!(
                    "expected header {key}, found {found}"
                )));
            }
            parts
                .next()
                .ok_or_else(|| QslError::RasterFormat(format!("header {key} has no value")))?
                .parse::<f64>()
                .map_err(|e| QslError::RasterFormat(format!("header {key}: {e}")))
        };

        let ncols = header("ncols")? as usize;
        let nrows = header("nrows")? as usize;
        let xll = header("xll")?;
        let yll = header("yll")?;
        let cell_size = header("cellsize")?;
        let threshold = header("threshold")?;

        let mut values = Vec::with_capacity(ncols * nrows);
        for line in lines {
            for token in line.split_whitespace() {
                values.push(
                    token
                        .parse::<f64>()
                        .map_err(|e| QslError::RasterFormat(format!("value {token}: {e}")))?,
                );
            }
        }
        if values.len() != ncols * nrows {
            return Err(QslError::RasterFormat(format!(
                "expected {} values, found {}",
                ncols * nrows,
                values.len()
            )));
        }
        Self::new(ncols, nrows, cell_size, (xll, yll), threshold, values)
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "ncols {}", self.ncols)?;
        writeln!(out, "nrows {}", self.nrows)?;
        writeln!(out, "xll {}", self.origin.0)?;
        writeln!(out, "yll {}", self.origin.1)?;
        writeln!(out, "cellsize {}", self.cell_size)?;
        writeln!(out, "threshold {}", self.threshold)?;
        for row in 0..self.nrows {
            let cells: Vec<String> = self.values[row * self.ncols..(row + 1) * self.ncols]
                .iter()
                .map(|v| v.to_string())
                .collect();
            writeln!(out, "{}", cells.join(" "))?;
        }
        Ok(())
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }
}

/// Straight segment through a raster, sampled as a 1D step function.
#[derive(Debug, Clone)]
pub struct TransectOracle<'a> {
    region: &'a RegionRaster,
    start: (f64, f64),
    end: (f64, f64),
    p: f64,
    complement: bool,
    rng: ChaCha8Rng,
}

impl<'a> TransectOracle<'a> {
    pub fn new(
        region: &'a RegionRaster,
        start: (f64, f64),
        end: (f64, f64),
        p: f64,
        seed: u64,
        complement: bool,
    ) -> Result<Self> {
        check_flip_probability(p)?;
        for (x, y) in [start, end] {
            if !region.contains(x, y) {
                return Err(QslError::OutsideExtent { x, y });
            }
        }
        Ok(Self {
            region,
            start,
            end,
            p,
            complement,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Probe the start of the segment noiselessly and complement labels
    /// if needed so that `t = 0` reads 1.
    pub fn oriented(
        region: &'a RegionRaster,
        start: (f64, f64),
        end: (f64, f64),
        p: f64,
        seed: u64,
    ) -> Result<Self> {
        let raw_start = region.label_at(start.0, start.1)?;
        Self::new(region, start, end, p, seed, !raw_start)
    }

    pub fn point_at(&self, t: f64) -> (f64, f64) {
        (
            self.start.0 + t * (self.end.0 - self.start.0),
            self.start.1 + t * (self.end.1 - self.start.1),
        )
    }

    pub fn length_m(&self) -> f64 {
        let dx = self.end.0 - self.start.0;
        let dy = self.end.1 - self.start.1;
        (dx * dx + dy * dy).sqrt()
    }

    /// Label before noise, with the orientation complement applied.
    pub fn noiseless_label(&self, t: f64) -> Result<bool> {
        let (x, y) = self.point_at(t);
        Ok(self.region.label_at(x, y)? ^ self.complement)
    }
}

impl Oracle for TransectOracle<'_> {
    fn measure(&mut self, t: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&t) {
            return Err(QslError::OutOfRange(t));
        }
        let pure = self.noiseless_label(t)?;
        let flip = unit_f64(&mut self.rng) < self.p;
        Ok(pure ^ flip)
    }

    fn flip_probability(&self) -> f64 {
        self.p
    }
}

/// Noiseless label changes along a dense scan of the transect, reported
/// as the midpoints of the bracketing scan steps.
pub fn scan_crossings(oracle: &TransectOracle<'_>, resolution: usize) -> Result<Vec<f64>> {
    if resolution < 2 {
        return Err(QslError::Config(
            "crossing scan needs at least two points".into(),
        ));
    }
    let mut crossings = Vec::new();
    let mut prev = oracle.noiseless_label(0.0)?;
    for j in 1..=resolution {
        let t = j as f64 / resolution as f64;
        let label = oracle.noiseless_label(t)?;
        if label != prev {
            crossings.push((t + (j - 1) as f64 / resolution as f64) / 2.0);
            prev = label;
        }
    }
    Ok(crossings)
}

/// Number of label sign changes along a dense noiseless scan; 1 means
/// the strip behaves like a single step function.
pub fn validate_single_crossing(oracle: &TransectOracle<'_>, resolution: usize) -> Result<usize> {
    Ok(scan_crossings(oracle, resolution)?.len())
}
