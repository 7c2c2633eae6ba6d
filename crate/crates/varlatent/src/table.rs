//! The universal data carrier: named observations x variables matrices.

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric table with named columns (variables) and named rows (observations,
/// or variable keys after transposition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    pub variable_names: Vec<String>,
    pub row_ids: Vec<String>,
    /// N rows x K columns.
    pub values: Array2<f64>,
}

impl DataTable {
    /// Builds a table and checks the carrier invariants: finite values,
    /// unique column names, matching dimensions.
    pub fn new(
        variable_names: Vec<String>,
        row_ids: Vec<String>,
        values: Array2<f64>,
    ) -> Result<Self> {
        if variable_names.len() != values.ncols() {
            return Err(Error::invalid(format!(
                "{} column names for {} columns",
                variable_names.len(),
                values.ncols()
            )));
        }
        if row_ids.len() != values.nrows() {
            return Err(Error::invalid(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                values.nrows()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &variable_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate variable name '{name}'")));
            }
        }
        if let Some(((r, c), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value {v} at row {r}, column {c} ('{}')",
                variable_names[c]
            )));
        }
        Ok(Self {
            variable_names,
            row_ids,
            values,
        })
    }

    /// Table with row ids "0", "1", ...
    pub fn with_default_ids(variable_names: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let ids = (0..values.nrows()).map(|i| i.to_string()).collect();
        Self::new(variable_names, ids, values)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.variable_names.iter().position(|n| n == name)
    }

    /// Checks the N >= 2, K >= 2 precondition shared by the analysis entry points.
    pub fn require_analysis_shape(&self) -> Result<()> {
        if self.nrows() < 2 || self.ncols() < 2 {
            return Err(Error::invalid(format!(
                "analysis requires at least 2x2 data, got {}x{}",
                self.nrows(),
                self.ncols()
            )));
        }
        Ok(())
    }

    /// Flips observations with variables: rows become the old columns,
    /// keyed by variable name.
    pub fn transpose(&self) -> DataTable {
        DataTable {
            variable_names: self.row_ids.clone(),
            row_ids: self.variable_names.clone(),
            values: self.values.t().to_owned(),
        }
    }

    /// Keeps only the columns at `indices`, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> DataTable {
        DataTable {
            variable_names: indices
                .iter()
                .map(|&j| self.variable_names[j].clone())
                .collect(),
            row_ids: self.row_ids.clone(),
            values: self.values.select(Axis(1), indices),
        }
    }

    /// Keeps only the rows at `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> DataTable {
        DataTable {
            variable_names: self.variable_names.clone(),
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
            values: self.values.select(Axis(0), indices),
        }
    }
}

/// Per-column affine map remembered by `minmax_normalize` so that inputs can
/// be reconstructed from normalized data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub mode: NormalizationMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// x -> (x - min) / (max - min); constant columns map to 0.5.
    Minmax01,
    /// x -> (x + 1) / 2 for data already in [-1, 1].
    AffineFromSigned,
}

impl NormalizationRecord {
    /// Maps normalized values back to the original scale. Constant columns
    /// (min == max) invert to the constant.
    pub fn denormalize(&self, t: &DataTable) -> Result<DataTable> {
        if t.ncols() != self.min.len() {
            return Err(Error::invalid("normalization record shape mismatch"));
        }
        let mut values = t.values.clone();
        match self.mode {
            NormalizationMode::Minmax01 => {
                for (j, mut col) in values.columns_mut().into_iter().enumerate() {
                    let (lo, hi) = (self.min[j], self.max[j]);
                    if hi > lo {
                        col.mapv_inplace(|x| lo + x * (hi - lo));
                    } else {
                        col.fill(lo);
                    }
                }
            }
            NormalizationMode::AffineFromSigned => {
                values.mapv_inplace(|x| 2.0 * x - 1.0);
            }
        }
        DataTable::new(t.variable_names.clone(), t.row_ids.clone(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_duplicate_names() {
        let err = DataTable::with_default_ids(
            vec!["a".into(), "a".into()],
            array![[1.0, 2.0], [3.0, 4.0]],
        );
        assert!(err.is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let err = DataTable::with_default_ids(
            vec!["a".into(), "b".into()],
            array![[1.0, f64::NAN], [3.0, 4.0]],
        );
        assert!(err.is_err());
    }

    #[test]
    fn transpose_round_trip() {
        let t = DataTable::new(
            vec!["a".into(), "b".into()],
            vec!["r0".into(), "r1".into(), "r2".into()],
            array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]],
        )
        .unwrap();
        let tt = t.transpose().transpose();
        assert_eq!(t, tt);
    }
}
