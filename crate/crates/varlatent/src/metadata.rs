//! Per-variable metadata features: univariate statistics, empirical PDF
//! vectors, and the 26x25 binary ECDF grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bin count used for the entropy statistic and the default PDF vector.
pub const DEFAULT_BINS: usize = 20;

/// Width (support cells) and height (probability cells) of the ECDF grid.
pub const CDF_GRID_X: usize = 26;
pub const CDF_GRID_Y: usize = 25;

/// Univariate summary of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatVector {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Shannon entropy (nats) of a 20-bin equal-width histogram.
    pub entropy: f64,
    /// Kolmogorov-Smirnov sup-distance between the min-max-scaled ECDF and
    /// the uniform CDF on [0, 1].
    pub ks_uniform: f64,
    /// Nonparametric skew (mean - median) / std; 0 for constant data.
    pub symmetry: f64,
}

impl StatVector {
    pub const FIELD_NAMES: [&'static str; 5] = ["mean", "std", "entropy", "ks_uniform", "symmetry"];

    pub fn as_array(&self) -> [f64; 5] {
        [self.mean, self.std, self.entropy, self.ks_uniform, self.symmetry]
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Computes the five flow-B statistics of one column.
pub fn univariate_stats(col: &[f64]) -> Result<StatVector> {
    let n = col.len();
    if n < 2 {
        return Err(Error::invalid("univariate_stats requires at least 2 values"));
    }
    let nf = n as f64;
    let mean = col.iter().sum::<f64>() / nf;
    let var = col.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / nf;
    let std = var.sqrt();

    let pdf = empirical_pdf(col, DEFAULT_BINS)?;
    let entropy = -pdf
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>();

    let mut sorted = col.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    // KS distance of the scaled ECDF against U(0,1); degenerate support
    // scales to all-0.5, giving the step-function distance 0.5
    let ks_uniform = if hi > lo {
        let mut d: f64 = 0.0;
        for (i, &x) in sorted.iter().enumerate() {
            let u = (x - lo) / (hi - lo);
            d = d.max((i + 1) as f64 / nf - u).max(u - i as f64 / nf);
        }
        d
    } else {
        0.5
    };

    let symmetry = if std > 0.0 {
        (mean - median(&sorted)) / std
    } else {
        0.0
    };

    Ok(StatVector {
        mean,
        std,
        entropy,
        ks_uniform,
        symmetry,
    })
}

/// Equal-width histogram over [min, max] normalized to sum 1. A constant
/// column puts all mass in the central bin.
pub fn empirical_pdf(col: &[f64], bins: usize) -> Result<Vec<f64>> {
    if bins < 2 {
        return Err(Error::invalid("empirical_pdf requires bins >= 2"));
    }
    if col.is_empty() {
        return Err(Error::invalid("empirical_pdf requires data"));
    }
    let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0usize; bins];
    if hi > lo {
        for &x in col {
            let idx = (((x - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
        }
    } else {
        counts[bins / 2] = col.len();
    }
    let nf = col.len() as f64;
    Ok(counts.iter().map(|&c| c as f64 / nf).collect())
}

/// Binary raster of the ECDF curve: 26 equal-width support cells by 25
/// probability cells, flattened column-major (x-cell outer, y-cell inner).
/// Exactly one mark per x-column, at the y-cell containing the ECDF value at
/// the cell center.
pub fn empirical_cdf_grid(col: &[f64]) -> Result<Vec<f64>> {
    if col.len() < 2 {
        return Err(Error::invalid("empirical_cdf_grid requires at least 2 values"));
    }
    let mut sorted = col.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (sorted[0], sorted[col.len() - 1]);
    let nf = col.len() as f64;

    let mut grid = vec![0.0; CDF_GRID_X * CDF_GRID_Y];
    for ix in 0..CDF_GRID_X {
        // cell center in raw units; a degenerate support collapses every
        // center onto the constant, so F = 1 everywhere (a single band)
        let center = lo + (ix as f64 + 0.5) / CDF_GRID_X as f64 * (hi - lo);
        let below = sorted.partition_point(|&v| v <= center);
        let f = below as f64 / nf;
        let iy = ((f * CDF_GRID_Y as f64) as usize).min(CDF_GRID_Y - 1);
        grid[ix * CDF_GRID_Y + iy] = 1.0;
    }
    Ok(grid)
}
