//! Dataset entry points: CSV, IDX image files, synthetic generators, and the
//! row-level preparation steps (normalization, duplication, reshuffling,
//! subsampling).

use std::io::Read;
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::metrics::AdjacencyMatrix;
use crate::rng::SeedStream;
use crate::table::{DataTable, NormalizationMode, NormalizationRecord};

/// Separator between an original row id and its duplication index.
pub const DUP_SEPARATOR: &str = "#";

/// Loads a comma-separated numeric table. With `id_column`, the first column
/// is treated as a non-numeric row key and stored as `row_ids`.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool, id_column: bool) -> Result<DataTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().enumerate();

    let header: Option<Vec<String>> = if has_header {
        match lines.next() {
            Some((_, line)) => Some(line.split(',').map(|s| s.trim().to_string()).collect()),
            None => return Err(Error::invalid(format!("{}: empty file", path.display()))),
        }
    } else {
        None
    };

    let mut row_ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let id = if id_column {
            cells
                .next()
                .map(|s| s.trim().to_string())
                .unwrap_or_default()
        } else {
            rows.len().to_string()
        };
        let mut row = Vec::new();
        for (k, cell) in cells.enumerate() {
            let cell = cell.trim();
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row: line_no,
                col: k + usize::from(id_column),
                message: format!("cannot parse '{cell}' as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: line_no,
                    col: k + usize::from(id_column),
                    message: format!("non-finite value '{cell}'"),
                });
            }
            row.push(value);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                // a short row means missing cells; reject rather than drop
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: line_no,
                    col: row.len(),
                    message: format!("expected {w} cells, found {}", row.len()),
                });
            }
            _ => {}
        }
        row_ids.push(id);
        rows.push(row);
    }

    let ncols = width.ok_or_else(|| Error::invalid(format!("{}: no data rows", path.display())))?;
    let names = match header {
        Some(mut h) => {
            if id_column {
                h.remove(0);
            }
            if h.len() != ncols {
                return Err(Error::invalid(format!(
                    "{}: header has {} names for {} columns",
                    path.display(),
                    h.len(),
                    ncols
                )));
            }
            h
        }
        None => (0..ncols).map(|j| format!("v{j}")).collect(),
    };

    let mut values = Array2::zeros((rows.len(), ncols));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    DataTable::new(names, row_ids, values)
}

/// Writes a table as CSV with a header row and a leading id column.
pub fn save_csv(t: &DataTable, path: impl AsRef<Path>, id_header: &str) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(id_header);
    for name in &t.variable_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, id) in t.row_ids.iter().enumerate() {
        out.push_str(id);
        for j in 0..t.ncols() {
            out.push(',');
            // round-trippable full precision
            out.push_str(&format!("{}", t.values[(i, j)]));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

const IDX_IMAGES_MAGIC: u32 = 2051;
const IDX_LABELS_MAGIC: u32 = 2049;

/// Loads MNIST-style IDX image and label files into one table of
/// `limit` rows x 785 columns: 784 `px_r_c` pixel columns scaled to [0, 1]
/// plus a trailing integer `label` column.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    limit: usize,
) -> Result<DataTable> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let open = |p: &Path| -> Result<std::io::BufReader<std::fs::File>> {
        Ok(std::io::BufReader::new(std::fs::File::open(p).map_err(
            |source| Error::Io {
                path: p.to_path_buf(),
                source,
            },
        )?))
    };
    let read_err = |p: &Path| {
        Error::invalid(format!("{}: truncated IDX file", p.display()))
    };

    let mut img = open(images_path)?;
    let magic = img
        .read_u32::<BigEndian>()
        .map_err(|_| read_err(images_path))?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::invalid(format!(
            "{}: bad magic {magic}, expected {IDX_IMAGES_MAGIC}",
            images_path.display()
        )));
    }
    let n_images = img
        .read_u32::<BigEndian>()
        .map_err(|_| read_err(images_path))? as usize;
    let rows = img
        .read_u32::<BigEndian>()
        .map_err(|_| read_err(images_path))? as usize;
    let cols = img
        .read_u32::<BigEndian>()
        .map_err(|_| read_err(images_path))? as usize;

    let mut lbl = open(labels_path)?;
    let magic = lbl
        .read_u32::<BigEndian>()
        .map_err(|_| read_err(labels_path))?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::invalid(format!(
            "{}: bad magic {magic}, expected {IDX_LABELS_MAGIC}",
            labels_path.display()
        )));
    }
    let n_labels = lbl
        .read_u32::<BigEndian>()
        .map_err(|_| read_err(labels_path))? as usize;

    if n_images != n_labels {
        return Err(Error::invalid(format!(
            "{n_images} images but {n_labels} labels"
        )));
    }
    if limit > n_images {
        return Err(Error::invalid(format!(
            "limit {limit} exceeds the {n_images} available rows"
        )));
    }

    let pixels = rows * cols;
    let mut values = Array2::zeros((limit, pixels + 1));
    let mut buf = vec![0u8; pixels];
    for i in 0..limit {
        img.read_exact(&mut buf).map_err(|_| read_err(images_path))?;
        for (p, &byte) in buf.iter().enumerate() {
            values[(i, p)] = byte as f64 / 255.0;
        }
        let label = lbl.read_u8().map_err(|_| read_err(labels_path))?;
        values[(i, pixels)] = label as f64;
    }

    let mut names: Vec<String> = Vec::with_capacity(pixels + 1);
    for r in 0..rows {
        for c in 0..cols {
            names.push(format!("px_{r}_{c}"));
        }
    }
    names.push("label".to_string());
    DataTable::with_default_ids(names, values)
}

/// Drops every zero-variance column; returns the screened table and the
/// removed names in original order.
pub fn screen_degenerate_variables(t: &DataTable) -> Result<(DataTable, Vec<String>)> {
    let mut keep = Vec::new();
    let mut removed = Vec::new();
    for j in 0..t.ncols() {
        let col = t.column(j);
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            removed.push(t.variable_names[j].clone());
        } else {
            keep.push(j);
        }
    }
    if keep.is_empty() {
        return Err(Error::invalid("every column is constant"));
    }
    Ok((t.select_columns(&keep), removed))
}

/// Maps each column affinely onto [0, 1]. Constant columns map to 0.5.
pub fn minmax_normalize(t: &DataTable) -> (DataTable, NormalizationRecord) {
    let mut values = t.values.clone();
    let mut min = Vec::with_capacity(t.ncols());
    let mut max = Vec::with_capacity(t.ncols());
    for mut col in values.columns_mut() {
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        min.push(lo);
        max.push(hi);
        if hi > lo {
            col.mapv_inplace(|x| (x - lo) / (hi - lo));
        } else {
            col.fill(0.5);
        }
    }
    let normalized = DataTable {
        variable_names: t.variable_names.clone(),
        row_ids: t.row_ids.clone(),
        values,
    };
    (
        normalized,
        NormalizationRecord {
            min,
            max,
            mode: NormalizationMode::Minmax01,
        },
    )
}

/// Rescales a signed matrix with entries in [-1, 1] onto [0, 1] via
/// x -> (x + 1) / 2, turning its rows into a variable-keyed table.
pub fn rescale_signed(m: &AdjacencyMatrix) -> Result<DataTable> {
    const TOL: f64 = 1e-9;
    if let Some(((i, j), &v)) = m
        .values
        .indexed_iter()
        .find(|(_, v)| v.abs() > 1.0 + TOL)
    {
        return Err(Error::invalid(format!(
            "entry {v} at ({}, {}) is outside [-1, 1]",
            m.names[i], m.names[j]
        )));
    }
    let values = m.values.mapv(|x| ((x + 1.0) / 2.0).clamp(0.0, 1.0));
    DataTable::new(m.names.clone(), m.names.clone(), values)
}

/// Repeats every row `factor` times, tagging row ids with a copy index so the
/// encoded results can be deduped later. No noise is added to the copies.
pub fn duplicate_rows(t: &DataTable, factor: usize) -> Result<DataTable> {
    if factor < 1 {
        return Err(Error::invalid("duplication factor must be >= 1"));
    }
    let n = t.nrows();
    let mut values = Array2::zeros((n * factor, t.ncols()));
    let mut row_ids = Vec::with_capacity(n * factor);
    for copy in 0..factor {
        for (i, id) in t.row_ids.iter().enumerate() {
            values
                .row_mut(copy * n + i)
                .assign(&t.values.row(i));
            row_ids.push(format!("{id}{DUP_SEPARATOR}{copy}"));
        }
    }
    DataTable::new(t.variable_names.clone(), row_ids, values)
}

/// Strips the duplication suffix from a row id.
pub fn original_key(row_id: &str) -> &str {
    match row_id.rfind(DUP_SEPARATOR) {
        Some(pos) => &row_id[..pos],
        None => row_id,
    }
}

/// Random permutation of the rows, deterministic under `seed`.
pub fn shuffle_rows(t: &DataTable, seed: u64) -> DataTable {
    let mut order: Vec<usize> = (0..t.nrows()).collect();
    SeedStream::new(seed).shuffle(&mut order);
    t.select_rows(&order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleAxis {
    Rows,
    Columns,
}

/// Uniform sample without replacement along the chosen axis, keeping the
/// original order; deterministic under `seed`.
pub fn subsample(t: &DataTable, axis: SampleAxis, target: usize, seed: u64) -> Result<DataTable> {
    let len = match axis {
        SampleAxis::Rows => t.nrows(),
        SampleAxis::Columns => t.ncols(),
    };
    if target < 1 || target > len {
        return Err(Error::invalid(format!(
            "subsample target {target} out of range 1..={len}"
        )));
    }
    let picked = SeedStream::new(seed).sample_indices(len, target);
    Ok(match axis {
        SampleAxis::Rows => t.select_rows(&picked),
        SampleAxis::Columns => t.select_columns(&picked),
    })
}

/// Number of observations in the synthetic table.
pub const SYNTHETIC_OBSERVATIONS: usize = 250;

/// Generates the 250 x 65 synthetic table: 13 independent variables of four
/// distribution types plus 52 dependent constructions (linear, additive,
/// interactive, quadratic, circular), deterministic under `seed`.
pub fn generate_synthetic(seed: u64) -> DataTable {
    let n = SYNTHETIC_OBSERVATIONS;
    let mut rng = SeedStream::new(seed);
    let mut names: Vec<String> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let push = |names: &mut Vec<String>, columns: &mut Vec<Vec<f64>>, name: &str, col: Vec<f64>| {
        names.push(name.to_string());
        columns.push(col);
    };

    let draw_normal = |rng: &mut SeedStream| -> Vec<f64> { (0..n).map(|_| rng.normal()).collect() };
    let draw_uniform = |rng: &mut SeedStream| -> Vec<f64> { (0..n).map(|_| rng.uniform01()).collect() };
    let draw_expon = |rng: &mut SeedStream| -> Vec<f64> { (0..n).map(|_| rng.exponential()).collect() };

    // each dependent variable draws its own fresh noise vector, in column order
    let noisy = |rng: &mut SeedStream, base: Vec<f64>, scale: f64| -> Vec<f64> {
        base.into_iter().map(|v| v + scale * rng.normal()).collect()
    };
    let linear = |parent: &[f64], coef: f64| -> Vec<f64> { parent.iter().map(|&x| coef * x).collect() };
    let product2 = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(&x, &y)| x * y).collect()
    };
    let product3 = |a: &[f64], b: &[f64], c: &[f64]| -> Vec<f64> {
        a.iter().zip(b).zip(c).map(|((&x, &y), &z)| x * y * z).collect()
    };
    let sum2 = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(&x, &y)| x + y).collect() };
    let quad = |parent: &[f64]| -> Vec<f64> { parent.iter().map(|&x| 0.7 * x * x).collect() };

    // normal block
    let n_e_1 = draw_normal(&mut rng);
    let n_e_2 = draw_normal(&mut rng);
    let n_e_3 = draw_normal(&mut rng);
    push(&mut names, &mut columns, "N_E_1", n_e_1.clone());
    push(&mut names, &mut columns, "N_E_2", n_e_2.clone());
    push(&mut names, &mut columns, "N_E_3", n_e_3.clone());
    for (suffix, coef, noise) in [
        ("1p9", 0.9, 0.1),
        ("1p7", 0.7, 0.3),
        ("1p5", 0.5, 0.5),
        ("1p3", 0.3, 0.7),
        ("1n9", -0.9, 0.1),
        ("1n7", -0.7, 0.3),
        ("1n5", -0.5, 0.5),
        ("1n3", -0.3, 0.7),
    ] {
        let col = noisy(&mut rng, linear(&n_e_1, coef), noise);
        push(&mut names, &mut columns, &format!("N_S_{suffix}"), col);
    }
    push(&mut names, &mut columns, "N_I_12", noisy(&mut rng, product2(&n_e_1, &n_e_2), 0.1));
    push(&mut names, &mut columns, "N_I_13", noisy(&mut rng, product2(&n_e_1, &n_e_3), 0.1));
    push(&mut names, &mut columns, "N_I_23", noisy(&mut rng, product2(&n_e_2, &n_e_3), 0.1));
    push(&mut names, &mut columns, "N_I_123", noisy(&mut rng, product3(&n_e_1, &n_e_2, &n_e_3), 0.1));
    push(&mut names, &mut columns, "N_A_12", noisy(&mut rng, sum2(&n_e_1, &n_e_2), 0.1));
    push(&mut names, &mut columns, "N_A_13", noisy(&mut rng, sum2(&n_e_1, &n_e_3), 0.1));
    push(&mut names, &mut columns, "N_A_23", noisy(&mut rng, sum2(&n_e_2, &n_e_3), 0.1));
    push(&mut names, &mut columns, "N_Q_1", noisy(&mut rng, quad(&n_e_1), 0.3));
    push(&mut names, &mut columns, "N_Q_2", noisy(&mut rng, quad(&n_e_2), 0.3));
    push(&mut names, &mut columns, "N_Q_3", noisy(&mut rng, quad(&n_e_3), 0.3));

    // uniform block
    let u_e_1 = draw_uniform(&mut rng);
    let u_e_2 = draw_uniform(&mut rng);
    let u_e_3 = draw_uniform(&mut rng);
    push(&mut names, &mut columns, "U_E_1", u_e_1.clone());
    push(&mut names, &mut columns, "U_E_2", u_e_2.clone());
    push(&mut names, &mut columns, "U_E_3", u_e_3.clone());
    for (suffix, coef, noise) in [
        ("1p9", 0.9, 0.1),
        ("1p7", 0.7, 0.3),
        ("1p5", 0.5, 0.5),
        ("1p3", 0.3, 0.7),
        ("1n9", -0.9, 0.1),
        ("1n7", -0.7, 0.3),
        ("1n5", -0.5, 0.5),
        ("1n3", -0.3, 0.7),
    ] {
        let col = noisy(&mut rng, linear(&u_e_1, coef), noise);
        push(&mut names, &mut columns, &format!("U_S_{suffix}"), col);
    }
    push(&mut names, &mut columns, "U_I_12", noisy(&mut rng, product2(&u_e_1, &u_e_2), 0.1));
    push(&mut names, &mut columns, "U_I_13", noisy(&mut rng, product2(&u_e_1, &u_e_3), 0.1));
    push(&mut names, &mut columns, "U_I_23", noisy(&mut rng, product2(&u_e_2, &u_e_3), 0.1));
    push(&mut names, &mut columns, "U_A_12", noisy(&mut rng, sum2(&u_e_1, &u_e_2), 0.1));
    push(&mut names, &mut columns, "U_A_13", noisy(&mut rng, sum2(&u_e_1, &u_e_3), 0.1));
    push(&mut names, &mut columns, "U_A_23", noisy(&mut rng, sum2(&u_e_2, &u_e_3), 0.1));
    push(&mut names, &mut columns, "U_Q_1", noisy(&mut rng, quad(&u_e_1), 0.1));
    push(&mut names, &mut columns, "U_Q_2", noisy(&mut rng, quad(&u_e_2), 0.1));
    push(&mut names, &mut columns, "U_Q_3", noisy(&mut rng, quad(&u_e_3), 0.1));
    push(&mut names, &mut columns, "U_I_123", noisy(&mut rng, product3(&u_e_1, &u_e_2, &u_e_3), 0.1));
    let circle: Vec<f64> = u_e_1
        .iter()
        .map(|&u| {
            let sign = 2.0 * rng.bernoulli(0.5) - 1.0;
            (sign * (1.0 - (2.0 * u - 1.0).powi(2)).sqrt() + 1.0) / 2.0
        })
        .collect();
    push(&mut names, &mut columns, "U_C_1", noisy(&mut rng, circle, 0.1));

    // exponential block
    let e_e_1 = draw_expon(&mut rng);
    let e_e_2 = draw_expon(&mut rng);
    let e_e_3 = draw_expon(&mut rng);
    push(&mut names, &mut columns, "E_E_1", e_e_1.clone());
    push(&mut names, &mut columns, "E_E_2", e_e_2.clone());
    push(&mut names, &mut columns, "E_E_3", e_e_3.clone());
    for (suffix, coef, noise) in [
        ("1p9", 0.9, 0.1),
        ("1p7", 0.7, 0.3),
        ("1p5", 0.5, 0.5),
        ("1p3", 0.3, 0.7),
        ("1n9", -0.9, 0.1),
        ("1n7", -0.7, 0.3),
        ("1n5", -0.5, 0.5),
        ("1n3", -0.3, 0.7),
    ] {
        let col = noisy(&mut rng, linear(&e_e_1, coef), noise);
        push(&mut names, &mut columns, &format!("E_S_{suffix}"), col);
    }
    push(&mut names, &mut columns, "E_I_12", noisy(&mut rng, product2(&e_e_1, &e_e_2), 0.1));
    push(&mut names, &mut columns, "E_I_13", noisy(&mut rng, product2(&e_e_1, &e_e_3), 0.1));
    push(&mut names, &mut columns, "E_I_23", noisy(&mut rng, product2(&e_e_2, &e_e_3), 0.1));
    push(&mut names, &mut columns, "E_A_12", noisy(&mut rng, sum2(&e_e_1, &e_e_2), 0.1));
    push(&mut names, &mut columns, "E_A_13", noisy(&mut rng, sum2(&e_e_1, &e_e_3), 0.1));
    push(&mut names, &mut columns, "E_A_23", noisy(&mut rng, sum2(&e_e_2, &e_e_3), 0.1));
    push(&mut names, &mut columns, "E_Q_1", noisy(&mut rng, quad(&e_e_1), 0.3));
    push(&mut names, &mut columns, "E_Q_2", noisy(&mut rng, quad(&e_e_2), 0.3));
    push(&mut names, &mut columns, "E_Q_3", noisy(&mut rng, quad(&e_e_3), 0.3));
    push(&mut names, &mut columns, "E_I_123", noisy(&mut rng, product3(&e_e_1, &e_e_2, &e_e_3), 0.1));

    // bernoulli block
    let b: Vec<f64> = (0..n).map(|_| rng.bernoulli(0.5)).collect();
    push(&mut names, &mut columns, "B_E_1", b);

    let mut values = Array2::zeros((n, columns.len()));
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    DataTable::with_default_ids(names, values).expect("synthetic table is valid by construction")
}

/// One series in the surrogate interest-rate dataset.
#[derive(Debug, Clone)]
pub struct RateSeries {
    pub name: &'static str,
    /// Rate family: "bank", "tbill", "bond", "gic", "mortgage", ...
    pub rate_type: &'static str,
    /// Term to maturity in months; 0 for overnight-style administered rates.
    pub term_months: f64,
}

/// The 29 series of the surrogate Canadian interest-rate dataset.
pub fn rate_catalog() -> Vec<RateSeries> {
    let mk = |name, rate_type, term_months| RateSeries {
        name,
        rate_type,
        term_months,
    };
    vec![
        mk("overnight", "bank", 0.0),
        mk("bank_rate", "bank", 0.0),
        mk("prime", "bank", 0.0),
        mk("tbill_1m", "tbill", 1.0),
        mk("tbill_2m", "tbill", 2.0),
        mk("tbill_3m", "tbill", 3.0),
        mk("tbill_6m", "tbill", 6.0),
        mk("tbill_1y", "tbill", 12.0),
        mk("bond_2y", "bond", 24.0),
        mk("bond_3y", "bond", 36.0),
        mk("bond_5y", "bond", 60.0),
        mk("bond_7y", "bond", 84.0),
        mk("bond_10y", "bond", 120.0),
        mk("bond_long", "bond", 360.0),
        mk("real_return_bond", "real_return", 360.0),
        mk("gic_1y", "gic", 12.0),
        mk("gic_3y", "gic", 36.0),
        mk("gic_5y", "gic", 60.0),
        mk("mortgage_1y", "mortgage", 12.0),
        mk("mortgage_3y", "mortgage", 36.0),
        mk("mortgage_5y", "mortgage", 60.0),
        mk("commercial_paper_1m", "paper", 1.0),
        mk("commercial_paper_3m", "paper", 3.0),
        mk("bankers_acceptance_1m", "paper", 1.0),
        mk("bankers_acceptance_3m", "paper", 3.0),
        mk("deposit_90d", "deposit", 3.0),
        mk("savings_deposit", "deposit", 0.0),
        mk("daily_savings", "deposit", 0.0),
        mk("cheq_savings", "deposit", 0.0),
    ]
}

/// Number of weekly observations in the surrogate rates table.
pub const RATES_OBSERVATIONS: usize = 1_690;

/// Seed of the canonical surrogate rates history used by the reference
/// analyses and tests.
pub const RATES_DEFAULT_SEED: u64 = 3;

/// Generates a surrogate multivariate time series of 29 interest rates with a
/// factor structure (level, slope, idiosyncratic spreads) resembling weekly
/// Canadian market rates; deterministic under `seed`.
pub fn generate_rates(seed: u64) -> DataTable {
    let n = RATES_OBSERVATIONS;
    let catalog = rate_catalog();
    let mut rng = SeedStream::new(seed);

    // persistent level factor with a slow downward drift and occasional
    // regime shifts, echoing a multi-decade rate cycle
    let mut level = vec![0.0f64; n];
    let mut slope = vec![0.0f64; n];
    let mut x = 8.0;
    let mut s = 1.5;
    for t in 0..n {
        let drift = -6.0 / n as f64;
        x += drift + 0.10 * rng.normal();
        x = x.clamp(0.2, 12.0);
        s = 0.995 * s + 0.08 * rng.normal();
        level[t] = x;
        slope[t] = s;
    }

    let mut values = Array2::zeros((n, catalog.len()));
    for (j, series) in catalog.iter().enumerate() {
        // term loading on the slope factor; longer terms ride the curve more
        let term_w = (series.term_months / 120.0).min(1.0);
        let (level_w, noise_w, base) = match series.rate_type {
            "bank" => (1.0, 0.05, 0.0),
            "tbill" => (1.0, 0.08, 0.1),
            "bond" => (0.9, 0.12, 0.5),
            // real yields move against the nominal level in this history
            "real_return" => (-0.60, 0.50, 6.5),
            "gic" => (0.85, 0.20, 0.8),
            "mortgage" => (0.85, 0.18, 2.0),
            "paper" => (1.0, 0.10, 0.2),
            _ => (0.45, 1.10, 0.3), // deposit products track the level loosely
        };
        let mut idio = 0.0;
        for t in 0..n {
            idio = 0.97 * idio + noise_w * rng.normal();
            // administered retail rates respond sluggishly and with a floor,
            // bending their relationship to the market level
            let driver = if series.rate_type == "deposit" {
                0.5 * (level[t] - 2.0).max(0.0)
            } else {
                level[t]
            };
            values[(t, j)] =
                base + level_w * driver + 0.8 * term_w * slope[t] + idio + 0.02 * rng.normal();
        }
    }

    let row_ids = (0..n).map(|t| format!("week_{t:04}")).collect();
    DataTable::new(
        catalog.iter().map(|s| s.name.to_string()).collect(),
        row_ids,
        values,
    )
    .expect("rates table is valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;
    use ndarray::array;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_csv_minimal() {
        let f = write_temp("a,b\n1,2\n3,4\n");
        let t = load_csv(f.path(), true, false).unwrap();
        assert_eq!(t.nrows(), 2);
        assert_eq!(t.ncols(), 2);
        assert_eq!(t.variable_names, vec!["a", "b"]);
        assert_eq!(t.values[(1, 0)], 3.0);
    }

    #[test]
    fn load_csv_reports_position() {
        let f = write_temp("a,b\n1,2\n3,abc\n");
        let err = load_csv(f.path(), true, false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2") && msg.contains("column 1"), "{msg}");
    }

    #[test]
    fn load_csv_rejects_duplicate_header() {
        let f = write_temp("a,a\n1,2\n");
        assert!(load_csv(f.path(), true, false).is_err());
    }

    #[test]
    fn load_csv_rejects_short_row() {
        let f = write_temp("a,b\n1,2\n3\n");
        assert!(load_csv(f.path(), true, false).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = generate_synthetic(9);
        let f = tempfile::NamedTempFile::new().unwrap();
        save_csv(&t, f.path(), "obs").unwrap();
        let back = load_csv(f.path(), true, true).unwrap();
        assert_eq!(back.variable_names, t.variable_names);
        assert_eq!(back.values, t.values);
    }

    #[test]
    fn screen_removes_constant_columns() {
        let t = DataTable::with_default_ids(
            vec!["a".into(), "zero".into(), "b".into()],
            array![[1.0, 0.0, 5.0], [2.0, 0.0, 6.0]],
        )
        .unwrap();
        let (screened, removed) = screen_degenerate_variables(&t).unwrap();
        assert_eq!(removed, vec!["zero"]);
        assert_eq!(screened.variable_names, vec!["a", "b"]);
    }

    #[test]
    fn screen_identity_when_no_constant() {
        let t = DataTable::with_default_ids(
            vec!["a".into(), "b".into()],
            array![[1.0, 0.0], [2.0, 3.0]],
        )
        .unwrap();
        let (screened, removed) = screen_degenerate_variables(&t).unwrap();
        assert!(removed.is_empty());
        assert_eq!(screened, t);
    }

    #[test]
    fn screen_all_constant_errors() {
        let t = DataTable::with_default_ids(
            vec!["a".into(), "b".into()],
            array![[1.0, 2.0], [1.0, 2.0]],
        )
        .unwrap();
        assert!(screen_degenerate_variables(&t).is_err());
    }

    #[test]
    fn normalize_forced_affine() {
        let t = DataTable::with_default_ids(
            vec!["a".into()],
            array![[-1.0], [0.0], [1.0]],
        )
        .unwrap();
        let (norm, _) = minmax_normalize(&t);
        assert_eq!(norm.column(0).to_vec(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_constant_column_to_half() {
        let t = DataTable::with_default_ids(vec!["a".into()], array![[7.0], [7.0]]).unwrap();
        let (norm, _) = minmax_normalize(&t);
        assert_eq!(norm.column(0).to_vec(), vec![0.5, 0.5]);
    }

    #[test]
    fn normalize_round_trip() {
        let t = generate_synthetic(4);
        let (norm, record) = minmax_normalize(&t);
        let back = record.denormalize(&norm).unwrap();
        for (a, b) in t.values.iter().zip(back.values.iter()) {
            let scale = a.abs().max(1.0);
            assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn rescale_signed_endpoints() {
        let m = metrics::AdjacencyMatrix::raw(
            vec!["a".into(), "b".into()],
            array![[1.0, -1.0], [-1.0, 0.0]],
            metrics::Metric::Pearson,
        );
        let t = rescale_signed(&m).unwrap();
        assert_eq!(t.values[(0, 0)], 1.0);
        assert_eq!(t.values[(0, 1)], 0.0);
        assert_eq!(t.values[(1, 1)], 0.5);
    }

    #[test]
    fn rescale_signed_rejects_out_of_range() {
        let m = metrics::AdjacencyMatrix::raw(
            vec!["a".into(), "b".into()],
            array![[1.0, 1.2], [1.2, 1.0]],
            metrics::Metric::Pearson,
        );
        assert!(rescale_signed(&m).is_err());
    }

    #[test]
    fn synthetic_shape_and_names() {
        let t = generate_synthetic(1);
        assert_eq!(t.nrows(), 250);
        assert_eq!(t.ncols(), 65);
        for name in ["N_E_1", "U_C_1", "E_A_12", "B_E_1", "U_Q_1", "N_S_1n5"] {
            assert!(t.column_index(name).is_some(), "missing {name}");
        }
    }

    #[test]
    fn synthetic_deterministic() {
        let a = generate_synthetic(123);
        let b = generate_synthetic(123);
        assert_eq!(a, b);
        let c = generate_synthetic(124);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn synthetic_linear_strength_ordering() {
        // signal/noise construction: |r| for 0.9x+0.1e beats 0.3x+0.7e
        for seed in 0..20 {
            let t = generate_synthetic(seed);
            let r = |name: &str| {
                let a = t.column(t.column_index("N_E_1").unwrap()).to_vec();
                let b = t.column(t.column_index(name).unwrap()).to_vec();
                metrics::pearson(&a, &b).abs()
            };
            assert!(r("N_S_1p9") > r("N_S_1p3"), "seed {seed}");
        }
    }

    #[test]
    fn duplicate_and_dedupe_keys() {
        let t = DataTable::new(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into(), "z".into()],
            array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]],
        )
        .unwrap();
        let d = duplicate_rows(&t, 2).unwrap();
        assert_eq!(d.nrows(), 6);
        let mut counts = std::collections::HashMap::new();
        for id in &d.row_ids {
            *counts.entry(original_key(id).to_string()).or_insert(0) += 1;
        }
        assert_eq!(counts["x"], 2);
        assert_eq!(counts["z"], 2);
        assert_eq!(duplicate_rows(&t, 1).unwrap().nrows(), 3);
    }

    #[test]
    fn shuffle_preserves_multiset() {
        let t = generate_synthetic(5);
        let shuffled = shuffle_rows(&t, 77);
        let mut a: Vec<String> = t.row_ids.clone();
        let mut b: Vec<String> = shuffled.row_ids.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_eq!(shuffle_rows(&t, 77), shuffled);
        // single-row shuffle is the identity
        let one = t.select_rows(&[0]);
        assert_eq!(shuffle_rows(&one, 3), one);
    }

    #[test]
    fn subsample_contract() {
        let t = generate_synthetic(6);
        let full = subsample(&t, SampleAxis::Rows, t.nrows(), 1).unwrap();
        assert_eq!(full, t);
        let small = subsample(&t, SampleAxis::Rows, 100, 1).unwrap();
        assert_eq!(small.nrows(), 100);
        let other = subsample(&t, SampleAxis::Rows, 100, 2).unwrap();
        assert_ne!(small.row_ids, other.row_ids);
        assert!(subsample(&t, SampleAxis::Rows, 251, 1).is_err());
        assert!(subsample(&t, SampleAxis::Columns, 0, 1).is_err());
    }

    #[test]
    fn idx_loader_round_trip() {
        use byteorder::{BigEndian, WriteBytesExt};
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("images.idx");
        let lbl_path = dir.path().join("labels.idx");
        let count = 3u32;
        let mut img: Vec<u8> = Vec::new();
        img.write_u32::<BigEndian>(2051).unwrap();
        img.write_u32::<BigEndian>(count).unwrap();
        img.write_u32::<BigEndian>(28).unwrap();
        img.write_u32::<BigEndian>(28).unwrap();
        for i in 0..count {
            img.extend(std::iter::repeat(i as u8 * 100).take(784));
        }
        let mut lbl: Vec<u8> = Vec::new();
        lbl.write_u32::<BigEndian>(2049).unwrap();
        lbl.write_u32::<BigEndian>(count).unwrap();
        lbl.extend([7u8, 1, 2]);
        std::fs::write(&img_path, &img).unwrap();
        std::fs::write(&lbl_path, &lbl).unwrap();

        let t = load_idx(&img_path, &lbl_path, 1).unwrap();
        assert_eq!(t.nrows(), 1);
        assert_eq!(t.ncols(), 785);
        assert_eq!(t.values[(0, 784)], 7.0);

        let t = load_idx(&img_path, &lbl_path, 3).unwrap();
        assert!(t
            .values
            .slice(ndarray::s![.., ..784])
            .iter()
            .all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(t.values[(1, 0)], 100.0 / 255.0);

        assert!(load_idx(&img_path, &lbl_path, 4).is_err());
        // labels file with an images magic number is rejected
        assert!(load_idx(&img_path, &img_path, 1).is_err());
    }

    #[test]
    fn rates_shape() {
        let t = generate_rates(1);
        assert_eq!(t.nrows(), 1_690);
        assert_eq!(t.ncols(), 29);
        assert_eq!(generate_rates(1), t);
    }
}
