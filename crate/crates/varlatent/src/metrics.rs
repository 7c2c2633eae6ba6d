//! Pairwise dependence metrics between variables: correlation matrices,
//! cosine similarity, density-based metrics (mutual information, Jaccard),
//! and the Laplacian / ones-complement matrix transforms.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::DataTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Pearson,
    Spearman,
    Kendall,
    PearsonR2,
    SpearmanR2,
    KendallR2,
    Cosine,
    Jaccard,
    JaccardLinear,
    MutualInfo,
    /// Flow-D option 1: mean magnitude of the spot cross products.
    CpMeanMagnitude,
    /// Flow-D option 2: signed cross product of mean gradients.
    CpOfMeans,
}

impl Metric {
    /// The ten pairwise dependence metrics of the comparison report; the two
    /// gradient-field aggregations are tagged separately.
    pub const ALL: [Metric; 10] = [
        Metric::Pearson,
        Metric::Spearman,
        Metric::Kendall,
        Metric::PearsonR2,
        Metric::SpearmanR2,
        Metric::KendallR2,
        Metric::Cosine,
        Metric::Jaccard,
        Metric::JaccardLinear,
        Metric::MutualInfo,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Metric::Pearson => "pearson",
            Metric::Spearman => "spearman",
            Metric::Kendall => "kendall",
            Metric::PearsonR2 => "pearson_r2",
            Metric::SpearmanR2 => "spearman_r2",
            Metric::KendallR2 => "kendall_r2",
            Metric::Cosine => "cosine",
            Metric::Jaccard => "jaccard",
            Metric::JaccardLinear => "jaccard_linear",
            Metric::MutualInfo => "mutual_info",
            Metric::CpMeanMagnitude => "cp_mean_magnitude",
            Metric::CpOfMeans => "cp_of_means",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Metric> {
        Metric::ALL
            .iter()
            .copied()
            .chain([Metric::CpMeanMagnitude, Metric::CpOfMeans])
            .find(|m| m.tag() == tag)
    }

    /// Metrics that carry a sign (negative dependence maps below zero).
    pub fn is_signed(&self) -> bool {
        matches!(
            self,
            Metric::Pearson
                | Metric::Spearman
                | Metric::Kendall
                | Metric::Cosine
                | Metric::CpOfMeans
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    Laplacian,
    OnesComplement,
}

/// Symmetric K x K pairwise-metric matrix over named variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyMatrix {
    pub names: Vec<String>,
    pub values: Array2<f64>,
    pub metric: Metric,
    pub transform: Transform,
}

impl AdjacencyMatrix {
    pub fn raw(names: Vec<String>, values: Array2<f64>, metric: Metric) -> Self {
        Self {
            names,
            values,
            metric,
            transform: Transform::None,
        }
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    /// Rows of the matrix as a variable-keyed table, ready for autoencoding.
    pub fn to_table(&self) -> DataTable {
        DataTable::new(self.names.clone(), self.names.clone(), self.values.clone())
            .expect("adjacency matrix rows form a valid table")
    }
}

/// Pearson product-moment correlation of two equal-length vectors.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Average ranks (1-based); ties share the mean of their rank range.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on average-ranked data.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall tau-b with tie correction.
pub fn kendall(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut ties_x = 0i64;
    let mut ties_y = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                // joint ties count in both correction terms
                ties_x += 1;
                ties_y += 1;
            } else if dx == 0.0 {
                ties_x += 1;
            } else if dy == 0.0 {
                ties_y += 1;
            } else if dx * dy > 0.0 {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let denom = ((n0 - ties_x as f64) * (n0 - ties_y as f64)).sqrt();
    (concordant - discordant) as f64 / denom
}

fn check_columns(t: &DataTable) -> Result<()> {
    if t.nrows() < 3 {
        return Err(Error::invalid("correlation requires at least 3 rows"));
    }
    for j in 0..t.ncols() {
        let col = t.column(j);
        if col.iter().all(|&v| v == col[0]) {
            return Err(Error::invalid(format!(
                "constant column '{}' has no defined correlation",
                t.variable_names[j]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
    Kendall,
}

/// Pairwise correlation matrix with unit diagonal.
pub fn correlation_matrix(t: &DataTable, method: CorrelationMethod) -> Result<AdjacencyMatrix> {
    check_columns(t)?;
    let k = t.ncols();
    // Spearman reduces to Pearson on ranked columns
    let columns: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let col = t.column(j).to_vec();
            match method {
                CorrelationMethod::Spearman => average_ranks(&col),
                _ => col,
            }
        })
        .collect();
    let mut values = Array2::zeros((k, k));
    for i in 0..k {
        values[(i, i)] = 1.0;
        for j in (i + 1)..k {
            let r = match method {
                CorrelationMethod::Kendall => kendall(&columns[i], &columns[j]),
                _ => pearson(&columns[i], &columns[j]),
            };
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    let metric = match method {
        CorrelationMethod::Pearson => Metric::Pearson,
        CorrelationMethod::Spearman => Metric::Spearman,
        CorrelationMethod::Kendall => Metric::Kendall,
    };
    Ok(AdjacencyMatrix::raw(t.variable_names.clone(), values, metric))
}

/// Elementwise square of a correlation matrix.
pub fn r2_matrix(c: &AdjacencyMatrix) -> Result<AdjacencyMatrix> {
    let metric = match c.metric {
        Metric::Pearson => Metric::PearsonR2,
        Metric::Spearman => Metric::SpearmanR2,
        Metric::Kendall => Metric::KendallR2,
        other => {
            return Err(Error::invalid(format!(
                "r2_matrix expects a correlation matrix, got {}",
                other.tag()
            )))
        }
    };
    Ok(AdjacencyMatrix {
        names: c.names.clone(),
        values: c.values.mapv(|v| v * v),
        metric,
        transform: Transform::None,
    })
}

/// Cosine similarity of the columns as given (no centering).
pub fn cosine_matrix(t: &DataTable) -> Result<AdjacencyMatrix> {
    let k = t.ncols();
    let norms: Vec<f64> = (0..k)
        .map(|j| t.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if let Some(j) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::invalid(format!(
            "zero-norm column '{}'",
            t.variable_names[j]
        )));
    }
    let mut values = Array2::zeros((k, k));
    for i in 0..k {
        for j in i..k {
            let dot: f64 = t.column(i).iter().zip(t.column(j)).map(|(a, b)| a * b).sum();
            let c = dot / (norms[i] * norms[j]);
            values[(i, j)] = c;
            values[(j, i)] = c;
        }
    }
    Ok(AdjacencyMatrix::raw(
        t.variable_names.clone(),
        values,
        Metric::Cosine,
    ))
}

/// Empirical 2D probability density on a B x B equal-width grid over the
/// min-max-scaled axes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDensity2D {
    pub grid: Array2<f64>,
    pub bins: usize,
}

impl JointDensity2D {
    /// Marginal along the x axis (rows of the grid).
    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.bins)
            .map(|i| (0..self.bins).map(|j| self.grid[(i, j)]).sum())
            .collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.bins)
            .map(|j| (0..self.bins).map(|i| self.grid[(i, j)]).sum())
            .collect()
    }
}

fn bin_index(x: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi > lo {
        (((x - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
    } else {
        bins / 2
    }
}

/// Default bin count for the density-based metrics.
pub fn default_bins(n: usize) -> usize {
    if n == 250 {
        10
    } else {
        ((n as f64 / 5.0).sqrt().ceil() as usize).clamp(2, 20)
    }
}

pub fn joint_density(x: &[f64], y: &[f64], bins: usize) -> Result<JointDensity2D> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "joint_density length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("joint_density requires at least 2 points"));
    }
    if bins < 2 {
        return Err(Error::invalid("joint_density requires bins >= 2"));
    }
    let (xlo, xhi) = (
        x.iter().cloned().fold(f64::INFINITY, f64::min),
        x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (ylo, yhi) = (
        y.iter().cloned().fold(f64::INFINITY, f64::min),
        y.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let mut grid = Array2::zeros((bins, bins));
    let w = 1.0 / x.len() as f64;
    for (&a, &b) in x.iter().zip(y) {
        grid[(bin_index(a, xlo, xhi, bins), bin_index(b, ylo, yhi, bins))] += w;
    }
    Ok(JointDensity2D { grid, bins })
}

/// Mutual information (nats) of a joint density grid against the product of
/// its own marginals. Zero cells contribute nothing.
pub fn mutual_information_of(density: &JointDensity2D) -> f64 {
    let px = density.marginal_x();
    let py = density.marginal_y();
    let mut mi = 0.0;
    for i in 0..density.bins {
        for j in 0..density.bins {
            let p = density.grid[(i, j)];
            if p > 0.0 && px[i] > 0.0 && py[j] > 0.0 {
                mi += p * (p / (px[i] * py[j])).ln();
            }
        }
    }
    mi
}

fn marginal_entropy(col: &[f64], bins: usize) -> f64 {
    let pdf = crate::metadata::empirical_pdf(col, bins).expect("bins >= 2");
    -pdf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Pairwise mutual information matrix; the diagonal holds each variable's
/// marginal histogram entropy.
pub fn mutual_information_matrix(t: &DataTable, bins: usize) -> Result<AdjacencyMatrix> {
    let k = t.ncols();
    let mut values = Array2::zeros((k, k));
    for i in 0..k {
        let ci = t.column(i).to_vec();
        values[(i, i)] = marginal_entropy(&ci, bins);
        for j in (i + 1)..k {
            let cj = t.column(j).to_vec();
            let mi = mutual_information_of(&joint_density(&ci, &cj, bins)?);
            values[(i, j)] = mi;
            values[(j, i)] = mi;
        }
    }
    Ok(AdjacencyMatrix::raw(
        t.variable_names.clone(),
        values,
        Metric::MutualInfo,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JaccardVariant {
    /// Reference distribution: product of the empirical marginals.
    Plain,
    /// Reference distribution: uniform mass on the diagonal cells,
    /// emphasizing linear dependence.
    Linear,
}

/// Weighted Jaccard overlap sum(min)/sum(max) between a joint density P and
/// the variant's reference distribution Q.
pub fn jaccard_of(density: &JointDensity2D, variant: JaccardVariant) -> f64 {
    let b = density.bins;
    let reference: Array2<f64> = match variant {
        JaccardVariant::Plain => {
            let px = density.marginal_x();
            let py = density.marginal_y();
            Array2::from_shape_fn((b, b), |(i, j)| px[i] * py[j])
        }
        JaccardVariant::Linear => {
            let mut q = Array2::zeros((b, b));
            for d in 0..b {
                q[(d, d)] = 1.0 / b as f64;
            }
            q
        }
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, q) in density.grid.iter().zip(reference.iter()) {
        num += p.min(*q);
        den += p.max(*q);
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn jaccard_matrix(t: &DataTable, bins: usize, variant: JaccardVariant) -> Result<AdjacencyMatrix> {
    let k = t.ncols();
    let mut values = Array2::zeros((k, k));
    for i in 0..k {
        let ci = t.column(i).to_vec();
        for j in i..k {
            let cj = t.column(j).to_vec();
            let jac = jaccard_of(&joint_density(&ci, &cj, bins)?, variant);
            values[(i, j)] = jac;
            values[(j, i)] = jac;
        }
    }
    let metric = match variant {
        JaccardVariant::Plain => Metric::Jaccard,
        JaccardVariant::Linear => Metric::JaccardLinear,
    };
    Ok(AdjacencyMatrix::raw(t.variable_names.clone(), values, metric))
}

/// L = D - A with the degree D_ii = full row sum of A, so every row of L
/// sums to zero.
pub fn laplacian_transform(a: &AdjacencyMatrix) -> Result<AdjacencyMatrix> {
    if let Some(((i, j), &v)) = a.values.indexed_iter().find(|(_, v)| **v < 0.0) {
        return Err(Error::invalid(format!(
            "laplacian requires nonnegative entries; ({}, {}) = {v}",
            a.names[i], a.names[j]
        )));
    }
    let k = a.k();
    let mut values = a.values.mapv(|v| -v);
    for i in 0..k {
        let degree: f64 = a.values.row(i).sum();
        values[(i, i)] += degree;
    }
    Ok(AdjacencyMatrix {
        names: a.names.clone(),
        values,
        metric: a.metric,
        transform: Transform::Laplacian,
    })
}

/// Elementwise |1 - a|, converting similarity into a distance-like value.
pub fn ones_complement_transform(a: &AdjacencyMatrix) -> Result<AdjacencyMatrix> {
    const TOL: f64 = 1e-9;
    if let Some(((i, j), &v)) = a
        .values
        .indexed_iter()
        .find(|(_, v)| **v < -TOL || **v > 1.0 + TOL)
    {
        return Err(Error::invalid(format!(
            "ones-complement requires entries in [0, 1]; ({}, {}) = {v}",
            a.names[i], a.names[j]
        )));
    }
    Ok(AdjacencyMatrix {
        names: a.names.clone(),
        values: a.values.mapv(|v| (1.0 - v).abs()),
        metric: a.metric,
        transform: Transform::OnesComplement,
    })
}

/// One row per unordered variable pair with all ten metric values, for
/// external plotting and comparison.
pub fn metric_comparison_report(t: &DataTable) -> Result<DataTable> {
    t.require_analysis_shape()?;
    check_columns(t)?;
    let bins = default_bins(t.nrows());
    let matrices: Vec<AdjacencyMatrix> = {
        let p = correlation_matrix(t, CorrelationMethod::Pearson)?;
        let s = correlation_matrix(t, CorrelationMethod::Spearman)?;
        let k = correlation_matrix(t, CorrelationMethod::Kendall)?;
        let pr2 = r2_matrix(&p)?;
        let sr2 = r2_matrix(&s)?;
        let kr2 = r2_matrix(&k)?;
        vec![
            p,
            s,
            k,
            pr2,
            sr2,
            kr2,
            cosine_matrix(t)?,
            jaccard_matrix(t, bins, JaccardVariant::Plain)?,
            jaccard_matrix(t, bins, JaccardVariant::Linear)?,
            mutual_information_matrix(t, bins)?,
        ]
    };
    let k = t.ncols();
    let pairs = k * (k - 1) / 2;
    let mut values = Array2::zeros((pairs, matrices.len()));
    let mut row_ids = Vec::with_capacity(pairs);
    let mut row = 0;
    for i in 0..k {
        for j in (i + 1)..k {
            row_ids.push(format!("{}|{}", t.variable_names[i], t.variable_names[j]));
            for (m, matrix) in matrices.iter().enumerate() {
                values[(row, m)] = matrix.values[(i, j)];
            }
            row += 1;
        }
    }
    DataTable::new(
        matrices.iter().map(|m| m.metric.tag().to_string()).collect(),
        row_ids,
        values,
    )
}
