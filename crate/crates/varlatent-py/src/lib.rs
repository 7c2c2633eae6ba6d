//! Python bindings: tabular data, dataset generators, pairwise metrics, and
//! the variable/observation representation pipelines.

use ndarray::Array2;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use varlatent::error::Error;
use varlatent::gradfield;
use varlatent::ingest;
use varlatent::metadata;
use varlatent::metrics;
use varlatent::pipeline::{self, FlowSpec};
use varlatent::vae::TrainConfig;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows_of(values: &Array2<f64>) -> Vec<Vec<f64>> {
    values.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// A named table of observations (rows) by variables (columns).
#[pyclass(name = "DataTable", from_py_object)]
#[derive(Clone)]
struct PyDataTable {
    inner: varlatent::DataTable,
}

#[pymethods]
impl PyDataTable {
    #[new]
    #[pyo3(signature = (variable_names, values, row_ids=None))]
    fn new(
        variable_names: Vec<String>,
        values: Vec<Vec<f64>>,
        row_ids: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let rows = values.len();
        let cols = variable_names.len();
        let mut array = Array2::zeros((rows, cols));
        for (i, row) in values.iter().enumerate() {
            if row.len() != cols {
                return Err(PyValueError::new_err(format!(
                    "row {i} has {} values, expected {cols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                array[(i, j)] = v;
            }
        }
        let inner = match row_ids {
            Some(ids) => varlatent::DataTable::new(variable_names, ids, array),
            None => varlatent::DataTable::with_default_ids(variable_names, array),
        }
        .map_err(to_py_err)?;
        Ok(PyDataTable { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, has_header=true, id_column=true))]
    fn from_csv(path: &str, has_header: bool, id_column: bool) -> PyResult<Self> {
        Ok(PyDataTable {
            inner: ingest::load_csv(path, has_header, id_column).map_err(to_py_err)?,
        })
    }

    #[pyo3(signature = (path, id_header="id"))]
    fn to_csv(&self, path: &str, id_header: &str) -> PyResult<()> {
        ingest::save_csv(&self.inner, path, id_header).map_err(to_py_err)
    }

    #[getter]
    fn variable_names(&self) -> Vec<String> {
        self.inner.variable_names.clone()
    }

    #[getter]
    fn row_ids(&self) -> Vec<String> {
        self.inner.row_ids.clone()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        rows_of(&self.inner.values)
    }

    #[getter]
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    #[getter]
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        let j = self
            .inner
            .column_index(name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown column '{name}'")))?;
        Ok(self.inner.values.column(j).to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "DataTable({} rows x {} columns)",
            self.inner.nrows(),
            self.inner.ncols()
        )
    }
}

/// The 250-observation synthetic benchmark table.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn generate_synthetic(seed: u64) -> PyDataTable {
    PyDataTable {
        inner: ingest::generate_synthetic(seed),
    }
}

/// The 29-series weekly interest-rate surrogate table.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn generate_rates(seed: u64) -> PyDataTable {
    PyDataTable {
        inner: ingest::generate_rates(seed),
    }
}

/// Five univariate statistics of a vector, as a dict.
#[pyfunction]
fn univariate_stats<'py>(py: Python<'py>, values: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let s = metadata::univariate_stats(&values).map_err(to_py_err)?;
    let d = PyDict::new(py);
    for (name, v) in metadata::StatVector::FIELD_NAMES.iter().zip(s.as_array()) {
        d.set_item(name, v)?;
    }
    Ok(d)
}

/// Pairwise metric matrix rows as a DataTable. `metric` is a tag such as
/// "pearson", "spearman_r2", "kendall", "mutual_info" or "jaccard".
#[pyfunction]
#[pyo3(signature = (table, metric, bins=0))]
fn metric_matrix(table: &PyDataTable, metric: &str, bins: usize) -> PyResult<PyDataTable> {
    let m = metrics::Metric::from_tag(metric).ok_or_else(|| {
        let tags: Vec<&str> = metrics::Metric::ALL.iter().map(|m| m.tag()).collect();
        PyValueError::new_err(format!(
            "unknown metric '{metric}'; expected one of {}",
            tags.join(", ")
        ))
    })?;
    let t = &table.inner;
    let bins = if bins > 0 { bins } else { metrics::default_bins(t.nrows()) };
    let matrix = match m {
        metrics::Metric::Pearson => {
            metrics::correlation_matrix(t, metrics::CorrelationMethod::Pearson)
        }
        metrics::Metric::Spearman => {
            metrics::correlation_matrix(t, metrics::CorrelationMethod::Spearman)
        }
        metrics::Metric::Kendall => {
            metrics::correlation_matrix(t, metrics::CorrelationMethod::Kendall)
        }
        metrics::Metric::PearsonR2 => metrics::correlation_matrix(t, metrics::CorrelationMethod::Pearson)
            .and_then(|c| metrics::r2_matrix(&c)),
        metrics::Metric::SpearmanR2 => metrics::correlation_matrix(t, metrics::CorrelationMethod::Spearman)
            .and_then(|c| metrics::r2_matrix(&c)),
        metrics::Metric::KendallR2 => metrics::correlation_matrix(t, metrics::CorrelationMethod::Kendall)
            .and_then(|c| metrics::r2_matrix(&c)),
        metrics::Metric::Cosine => metrics::cosine_matrix(t),
        metrics::Metric::Jaccard => metrics::jaccard_matrix(t, bins, metrics::JaccardVariant::Plain),
        metrics::Metric::JaccardLinear => {
            metrics::jaccard_matrix(t, bins, metrics::JaccardVariant::Linear)
        }
        metrics::Metric::MutualInfo => metrics::mutual_information_matrix(t, bins),
        _ => return Err(PyValueError::new_err("cross-product metrics need the gradfield flow")),
    }
    .map_err(to_py_err)?;
    Ok(PyDataTable {
        inner: matrix.to_table(),
    })
}

/// The ten-metric pairwise comparison report (one row per variable pair).
#[pyfunction]
fn metric_comparison_report(table: &PyDataTable) -> PyResult<PyDataTable> {
    Ok(PyDataTable {
        inner: metrics::metric_comparison_report(&table.inner).map_err(to_py_err)?,
    })
}

/// Signed spot cross product of two gradient vectors.
#[pyfunction]
fn cross_product(gi: (f64, f64), gj: (f64, f64)) -> f64 {
    gradfield::cross_product(gi, gj)
}

fn parse_spec(spec_json: &str) -> PyResult<FlowSpec> {
    let spec: FlowSpec = serde_json::from_str(spec_json)
        .map_err(|e| PyValueError::new_err(format!("invalid flow spec: {e}")))?;
    spec.validate().map_err(to_py_err)?;
    Ok(spec)
}

fn parse_train(train_json: Option<&str>, spec: &FlowSpec) -> PyResult<TrainConfig> {
    let mut cfg = match train_json {
        Some(json) => serde_json::from_str(json)
            .map_err(|e| PyValueError::new_err(format!("invalid train config: {e}")))?,
        None => spec.train_config(),
    };
    let parsed: &mut TrainConfig = &mut cfg;
    parsed.seed = spec.seed;
    parsed.runs = spec.runs;
    Ok(cfg)
}

fn frames_dict<'py>(
    py: Python<'py>,
    frames: &varlatent::latent::LatentFrames,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("keys", frames.keys.clone())?;
    d.set_item("mu", rows_of(&frames.l))?;
    d.set_item("ln", rows_of(&frames.ln))?;
    d.set_item("lu", rows_of(&frames.lu))?;
    d.set_item("lp", rows_of(&frames.lp))?;
    Ok(d)
}

/// Runs the full variable-representation pipeline. `spec_json` holds a
/// FlowSpec; `train_json` optionally overrides the training parameters.
/// Returns a dict with the coordinate frames and the run report.
#[pyfunction]
#[pyo3(signature = (table, spec_json, train_json=None))]
fn represent_variables<'py>(
    py: Python<'py>,
    table: &PyDataTable,
    spec_json: &str,
    train_json: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = parse_spec(spec_json)?;
    let cfg = parse_train(train_json, &spec)?;
    let rep = pipeline::represent_variables(&table.inner, &spec, &cfg).map_err(to_py_err)?;
    let d = frames_dict(py, &rep.frames)?;
    let report_json = serde_json::to_string(&rep.report)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    d.set_item("report", report_json)?;
    Ok(d)
}

/// Embeds the observations (rows) on the latent plane.
#[pyfunction]
#[pyo3(signature = (table, train_json=None, seed=0))]
fn represent_observations<'py>(
    py: Python<'py>,
    table: &PyDataTable,
    train_json: Option<&str>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg: TrainConfig = match train_json {
        Some(json) => serde_json::from_str(json)
            .map_err(|e| PyValueError::new_err(format!("invalid train config: {e}")))?,
        None => TrainConfig::default(),
    };
    if train_json.is_none() {
        cfg.seed = seed;
    }
    let rep = pipeline::represent_observations(&table.inner, &cfg).map_err(to_py_err)?;
    frames_dict(py, &rep.frames)
}

#[pymodule]
fn varlatent_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataTable>()?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(generate_rates, m)?)?;
    m.add_function(wrap_pyfunction!(univariate_stats, m)?)?;
    m.add_function(wrap_pyfunction!(metric_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(metric_comparison_report, m)?)?;
    m.add_function(wrap_pyfunction!(cross_product, m)?)?;
    m.add_function(wrap_pyfunction!(represent_variables, m)?)?;
    m.add_function(wrap_pyfunction!(represent_observations, m)?)?;
    Ok(())
}
