//! One-hot encoding of categorical columns and the reinforced-entanglement
//! augmentation that ties the dummy variables together on the latent space.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::DataTable;

/// Maximum number of categories a one-hot block may carry.
pub const MAX_CATEGORIES: usize = 64;

/// Bookkeeping of one one-hot-encoded column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHotBlock {
    pub source: String,
    /// Category labels in first-appearance order.
    pub categories: Vec<String>,
    /// Dummy column names, aligned with `categories`.
    pub dummy_names: Vec<String>,
}

impl OneHotBlock {
    pub fn m(&self) -> usize {
        self.categories.len()
    }
}

/// Formats a category value the way the dummy names embed it: integers
/// print without a fractional part.
fn category_label(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Replaces `column` with M dummy indicator columns named
/// `<column>_<value>`; each row carries exactly one 1 across the block.
pub fn one_hot_encode(t: &DataTable, column: &str) -> Result<(DataTable, OneHotBlock)> {
    let col_idx = t
        .column_index(column)
        .ok_or_else(|| Error::invalid(format!("unknown column '{column}'")))?;
    if t.nrows() == 0 {
        return Err(Error::invalid("cannot one-hot encode an empty column"));
    }
    let mut categories: Vec<f64> = Vec::new();
    let mut membership = Vec::with_capacity(t.nrows());
    for &v in t.values.column(col_idx) {
        let pos = match categories.iter().position(|&c| c == v) {
            Some(p) => p,
            None => {
                categories.push(v);
                if categories.len() > MAX_CATEGORIES {
                    return Err(Error::invalid(format!(
                        "column '{column}' exceeds {MAX_CATEGORIES} distinct values"
                    )));
                }
                categories.len() - 1
            }
        };
        membership.push(pos);
    }
    if categories.len() < 2 {
        return Err(Error::invalid(format!(
            "column '{column}' is constant; one-hot encoding needs >= 2 categories"
        )));
    }
    let labels: Vec<String> = categories.iter().map(|&v| category_label(v)).collect();
    let dummy_names: Vec<String> = labels.iter().map(|l| format!("{column}_{l}")).collect();

    let m = categories.len();
    let kept: Vec<usize> = (0..t.ncols()).filter(|&j| j != col_idx).collect();
    let mut names: Vec<String> = kept.iter().map(|&j| t.variable_names[j].clone()).collect();
    names.extend(dummy_names.iter().cloned());
    let mut values = Array2::zeros((t.nrows(), kept.len() + m));
    for (out_j, &j) in kept.iter().enumerate() {
        for i in 0..t.nrows() {
            values[(i, out_j)] = t.values[(i, j)];
        }
    }
    for (i, &cat) in membership.iter().enumerate() {
        values[(i, kept.len() + cat)] = 1.0;
    }
    let table = DataTable::new(names, t.row_ids.clone(), values)?;
    Ok((
        table,
        OneHotBlock {
            source: column.to_string(),
            categories: labels,
            dummy_names,
        },
    ))
}

/// Appends M all-one columns to the rows of the block's dummy variables and
/// all-zero columns elsewhere, pulling the dummies together when the table
/// (rows = variables) is autoencoded.
pub fn reinforce_entanglement(input: &DataTable, block: &OneHotBlock) -> Result<DataTable> {
    let dummy_rows: Vec<usize> = block
        .dummy_names
        .iter()
        .map(|name| {
            input
                .row_ids
                .iter()
                .position(|id| id == name)
                .ok_or_else(|| {
                    Error::invalid(format!("dummy variable '{name}' is not a row of the input"))
                })
        })
        .collect::<Result<_>>()?;
    let m = block.m();
    let mut names = input.variable_names.clone();
    for i in 0..m {
        names.push(format!("reinforce_{}_{i}", block.source));
    }
    let mut values = Array2::zeros((input.nrows(), input.ncols() + m));
    values
        .slice_mut(ndarray::s![.., ..input.ncols()])
        .assign(&input.values);
    for &r in &dummy_rows {
        for c in 0..m {
            values[(r, input.ncols() + c)] = 1.0;
        }
    }
    DataTable::new(names, input.row_ids.clone(), values)
}
