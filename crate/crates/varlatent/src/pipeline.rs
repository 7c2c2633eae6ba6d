//! End-to-end orchestration of the five input-construction flows:
//! assemble the chosen VAE input, run the
//! duplicate -> shuffle -> fit -> encode -> dedupe protocol, and build the
//! latent coordinate frames.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradfield::{
    aggregate_option1, aggregate_option2, aggregate_option3, aggregate_option4,
    cross_product_tensor, gradients, interpolate, CrossProductTensor, GradientField,
    DEFAULT_GRID,
};
use crate::ingest::{duplicate_rows, minmax_normalize, rescale_signed};
use crate::latent::{build_frames, dedupe, LatentFrames};
use crate::metadata::{
    empirical_cdf_grid, empirical_pdf, univariate_stats, StatVector, CDF_GRID_X, CDF_GRID_Y,
    DEFAULT_BINS,
};
use crate::metrics::{
    correlation_matrix, cosine_matrix, default_bins, jaccard_matrix, laplacian_transform,
    mutual_information_matrix, ones_complement_transform, r2_matrix, AdjacencyMatrix,
    CorrelationMethod, JaccardVariant, Metric, Transform,
};
use crate::rng::SeedStream;
use crate::table::DataTable;
use crate::vae::{fit_select, LatentTable, RunReport, TrainConfig, VaeModel};

/// The input-construction families of Table 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    /// A: transpose of the normalized data (rows become variables).
    Transposed,
    /// B: five univariate statistics per variable.
    Stats,
    /// B: empirical PDF vector per variable.
    Pdf,
    /// B: binary ECDF raster per variable.
    CdfGrid,
    /// C: rows of a pairwise-metric adjacency matrix.
    Adjacency,
    /// D: gradient-field cross products over the observation latent plane.
    Gradfield,
    /// E: column-wise concatenation of other flows.
    Combined,
}

impl Flow {
    pub fn tag(&self) -> &'static str {
        match self {
            Flow::Transposed => "transposed",
            Flow::Stats => "stats",
            Flow::Pdf => "pdf",
            Flow::CdfGrid => "cdf_grid",
            Flow::Adjacency => "adjacency",
            Flow::Gradfield => "gradfield",
            Flow::Combined => "combined",
        }
    }
}

/// Everything needed to construct one flow's VAE input and run the protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowSpec {
    pub flow: Flow,
    /// Pairwise metric for the adjacency flow.
    pub metric: Option<Metric>,
    pub transform: Transform,
    /// Gradient-field aggregation option (1-4).
    pub aggregation: u8,
    /// Sub-specs of the combined flow.
    pub parts: Vec<FlowSpec>,
    /// Training-set duplication factor.
    pub train_factor: usize,
    /// Monitor-set duplication factor (0 disables the monitor).
    pub monitor_factor: usize,
    pub runs: usize,
    pub seed: u64,
    /// Interpolation grid resolution for the gradient-field flow.
    pub grid: usize,
    /// Histogram bins for density metrics and the PDF flow; 0 = automatic.
    pub bins: usize,
    /// Column budget of aggregation option 3; 0 = 40 per variable.
    pub column_budget: usize,
    /// Row budget of aggregation option 4; 0 = 40 per variable.
    pub row_budget: usize,
}

impl Default for FlowSpec {
    fn default() -> Self {
        FlowSpec {
            flow: Flow::Transposed,
            metric: None,
            transform: Transform::None,
            aggregation: 1,
            parts: Vec::new(),
            train_factor: 50,
            monitor_factor: 30,
            runs: 3,
            seed: 0,
            grid: DEFAULT_GRID,
            bins: 0,
            column_budget: 0,
            row_budget: 0,
        }
    }
}

impl FlowSpec {
    pub fn for_flow(flow: Flow) -> FlowSpec {
        FlowSpec {
            flow,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_factor < 1 {
            return Err(Error::config("train_factor must be >= 1"));
        }
        if self.runs < 1 {
            return Err(Error::config("runs must be >= 1"));
        }
        match self.flow {
            Flow::Adjacency => {
                if self.metric.is_none() {
                    return Err(Error::config("the adjacency flow requires a metric"));
                }
            }
            Flow::Gradfield => {
                if !(1..=4).contains(&self.aggregation) {
                    return Err(Error::config("aggregation must be 1, 2, 3 or 4"));
                }
                if self.grid < 2 {
                    return Err(Error::config("grid must be >= 2"));
                }
            }
            Flow::Combined => {
                if self.parts.is_empty() {
                    return Err(Error::config("the combined flow needs parts"));
                }
                for p in &self.parts {
                    if p.flow == Flow::Combined {
                        return Err(Error::config("combined parts cannot nest"));
                    }
                    p.validate()?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Training configuration implied by the spec's seed/runs fields.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            runs: self.runs,
            ..Default::default()
        }
    }

    fn bins_for(&self, observations: usize) -> usize {
        if self.bins > 0 {
            self.bins
        } else {
            default_bins(observations)
        }
    }

    fn option3_budget(&self, k: usize) -> usize {
        if self.column_budget > 0 {
            self.column_budget
        } else {
            40 * k
        }
    }

    fn option4_budget(&self, k: usize) -> usize {
        if self.row_budget > 0 {
            self.row_budget
        } else {
            40 * k
        }
    }
}

/// Globally rescales a table into [0, 1]; a constant table maps to 0.5.
fn unit_interval_global(t: &DataTable) -> DataTable {
    let lo = t.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = t.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let values = if hi > lo {
        t.values.mapv(|v| (v - lo) / (hi - lo))
    } else {
        Array2::from_elem(t.values.raw_dim(), 0.5)
    };
    DataTable::new(t.variable_names.clone(), t.row_ids.clone(), values)
        .expect("rescaling keeps the table valid")
}

/// Maps an adjacency matrix onto [0, 1]: signed raw metrics use the
/// (x + 1) / 2 rescale; anything else already in range passes through;
/// remaining cases rescale globally.
fn adjacency_input(m: &AdjacencyMatrix) -> Result<DataTable> {
    if m.transform == Transform::None && m.metric.is_signed() {
        if let Ok(t) = rescale_signed(m) {
            return Ok(t);
        }
    }
    let t = m.to_table();
    let in_range = t.values.iter().all(|&v| (0.0..=1.0).contains(&v));
    Ok(if in_range { t } else { unit_interval_global(&t) })
}

fn adjacency_matrix(t: &DataTable, spec: &FlowSpec) -> Result<AdjacencyMatrix> {
    let metric = spec
        .metric
        .ok_or_else(|| Error::config("the adjacency flow requires a metric"))?;
    let bins = spec.bins_for(t.nrows());
    let base = match metric {
        Metric::Pearson => correlation_matrix(t, CorrelationMethod::Pearson)?,
        Metric::Spearman => correlation_matrix(t, CorrelationMethod::Spearman)?,
        Metric::Kendall => correlation_matrix(t, CorrelationMethod::Kendall)?,
        Metric::PearsonR2 => r2_matrix(&correlation_matrix(t, CorrelationMethod::Pearson)?)?,
        Metric::SpearmanR2 => r2_matrix(&correlation_matrix(t, CorrelationMethod::Spearman)?)?,
        Metric::KendallR2 => r2_matrix(&correlation_matrix(t, CorrelationMethod::Kendall)?)?,
        Metric::Cosine => cosine_matrix(t)?,
        Metric::Jaccard => jaccard_matrix(t, bins, JaccardVariant::Plain)?,
        Metric::JaccardLinear => jaccard_matrix(t, bins, JaccardVariant::Linear)?,
        Metric::MutualInfo => mutual_information_matrix(t, bins)?,
        Metric::CpMeanMagnitude | Metric::CpOfMeans => {
            return Err(Error::config(
                "cross-product metrics belong to the gradfield flow",
            ))
        }
    };
    match spec.transform {
        Transform::None => Ok(base),
        Transform::Laplacian => laplacian_transform(&base),
        Transform::OnesComplement => ones_complement_transform(&base),
    }
}

/// Per-variable metadata rows (flows B).
fn metadata_input(t: &DataTable, flow: Flow, bins: usize) -> Result<DataTable> {
    let k = t.ncols();
    match flow {
        Flow::Stats => {
            let mut values = Array2::zeros((k, 5));
            for j in 0..k {
                let col = t.values.column(j).to_vec();
                let s: StatVector = univariate_stats(&col)?;
                for (d, v) in s.as_array().into_iter().enumerate() {
                    values[(j, d)] = v;
                }
            }
            let names = StatVector::FIELD_NAMES.iter().map(|s| s.to_string()).collect();
            let table = DataTable::new(names, t.variable_names.clone(), values)?;
            // statistics live on heterogeneous scales; normalize per column
            Ok(minmax_normalize(&table).0)
        }
        Flow::Pdf => {
            let mut values = Array2::zeros((k, bins));
            for j in 0..k {
                let col = t.values.column(j).to_vec();
                for (d, v) in empirical_pdf(&col, bins)?.into_iter().enumerate() {
                    values[(j, d)] = v;
                }
            }
            let names = (0..bins).map(|b| format!("pdf_{b}")).collect();
            DataTable::new(names, t.variable_names.clone(), values)
        }
        Flow::CdfGrid => {
            let width = CDF_GRID_X * CDF_GRID_Y;
            let mut values = Array2::zeros((k, width));
            for j in 0..k {
                let col = t.values.column(j).to_vec();
                for (d, v) in empirical_cdf_grid(&col)?.into_iter().enumerate() {
                    values[(j, d)] = v;
                }
            }
            let names = (0..width)
                .map(|i| format!("cdf_{}_{}", i / CDF_GRID_Y, i % CDF_GRID_Y))
                .collect();
            DataTable::new(names, t.variable_names.clone(), values)
        }
        _ => unreachable!("metadata_input only handles flows B"),
    }
}

/// Gradient fields of every variable over the observation latent plane.
pub struct FieldSet {
    pub names: Vec<String>,
    pub fields: Vec<GradientField>,
    /// Lu coordinates of the observations, in row order.
    pub observation_points: Vec<(f64, f64)>,
}

/// Interpolates each normalized variable over the observation Lu frame and
/// differentiates it.
pub fn build_field_set(t: &DataTable, frames: &LatentFrames, grid: usize) -> Result<FieldSet> {
    if frames.len() != t.nrows() {
        return Err(Error::invalid(
            "observation frames must align with the data rows",
        ));
    }
    let (normalized, _) = minmax_normalize(t);
    let points: Vec<(f64, f64)> = (0..frames.len())
        .map(|i| (frames.lu[(i, 0)], frames.lu[(i, 1)]))
        .collect();
    let mut fields = Vec::with_capacity(t.ncols());
    for j in 0..t.ncols() {
        let values = normalized.values.column(j).to_vec();
        fields.push(gradients(&interpolate(&points, &values, grid)?));
    }
    Ok(FieldSet {
        names: t.variable_names.clone(),
        fields,
        observation_points: points,
    })
}

impl FieldSet {
    pub fn tensor(&self) -> Result<CrossProductTensor> {
        cross_product_tensor(&self.fields, &self.names, &self.observation_points)
    }

    pub fn field(&self, name: &str) -> Result<&GradientField> {
        let idx = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::invalid(format!("unknown variable '{name}'")))?;
        Ok(&self.fields[idx])
    }
}

/// Builds the VAE input table of one flow: rows keyed by variable names,
/// values in [0, 1]. The gradient-field flow needs the observation frames.
pub fn build_input(
    t: &DataTable,
    spec: &FlowSpec,
    observation_frames: Option<&LatentFrames>,
) -> Result<DataTable> {
    spec.validate()?;
    t.require_analysis_shape()?;
    match spec.flow {
        Flow::Transposed => Ok(minmax_normalize(t).0.transpose()),
        Flow::Stats | Flow::Pdf | Flow::CdfGrid => {
            let bins = if spec.bins > 0 { spec.bins } else { DEFAULT_BINS };
            metadata_input(t, spec.flow, bins)
        }
        Flow::Adjacency => adjacency_input(&adjacency_matrix(t, spec)?),
        Flow::Gradfield => {
            let frames = observation_frames.ok_or_else(|| {
                Error::config("the gradfield flow requires observation frames")
            })?;
            let fields = build_field_set(t, frames, spec.grid)?;
            match spec.aggregation {
                1 => adjacency_input(&aggregate_option1(&fields.tensor()?)),
                2 => adjacency_input(&aggregate_option2(&fields.fields, &fields.names)?),
                3 => {
                    let table = aggregate_option3(
                        &fields.tensor()?,
                        spec.option3_budget(t.ncols()),
                        SeedStream::child_seed(spec.seed, 0x5cb5),
                    )?;
                    Ok(minmax_normalize(&table).0)
                }
                4 => Err(Error::config(
                    "aggregation option 4 yields latent coordinates directly; use represent_variables",
                )),
                _ => Err(Error::config("aggregation must be 1, 2, 3 or 4")),
            }
        }
        Flow::Combined => {
            let built: Vec<DataTable> = spec
                .parts
                .iter()
                .map(|p| build_input(t, p, observation_frames))
                .collect::<Result<_>>()?;
            let keys = built[0].row_ids.clone();
            for part in &built[1..] {
                if part.row_ids != keys {
                    return Err(Error::invalid(
                        "combined parts disagree on the variable rows",
                    ));
                }
            }
            let width: usize = built.iter().map(|p| p.ncols()).sum();
            let mut names = Vec::with_capacity(width);
            let mut values = Array2::zeros((keys.len(), width));
            let mut at = 0;
            for (idx, part) in built.iter().enumerate() {
                let tag = spec.parts[idx].flow.tag();
                for j in 0..part.ncols() {
                    names.push(format!("{tag}{idx}.{}", part.variable_names[j]));
                    for i in 0..part.nrows() {
                        values[(i, at)] = part.values[(i, j)];
                    }
                    at += 1;
                }
            }
            DataTable::new(names, keys, values)
        }
    }
}

/// A variable representation with its model, frames, and run report.
pub struct VariableRepresentation {
    pub input: DataTable,
    pub model: Option<VaeModel>,
    pub latent: LatentTable,
    pub frames: LatentFrames,
    pub report: Option<RunReport>,
}

/// An observation representation (rows on the latent plane).
pub struct ObservationRepresentation {
    pub model: VaeModel,
    pub latent: LatentTable,
    pub frames: LatentFrames,
    pub report: RunReport,
}

/// Standard VAE over the (normalized) rows of `t`.
pub fn represent_observations(
    t: &DataTable,
    cfg: &TrainConfig,
) -> Result<ObservationRepresentation> {
    t.require_analysis_shape()?;
    let (normalized, _) = minmax_normalize(t);
    let fit = fit_select(&normalized, cfg, 1, 0)?;
    let frames = build_frames(&fit.latent)?;
    Ok(ObservationRepresentation {
        model: fit.model,
        latent: fit.latent,
        frames,
        report: fit.report,
    })
}

/// Full variable-representation protocol: build the flow input, train with
/// run selection, encode the duplicated set, dedupe, and derive the frames.
pub fn represent_variables(
    t: &DataTable,
    spec: &FlowSpec,
    cfg: &TrainConfig,
) -> Result<VariableRepresentation> {
    represent_variables_reinforced(t, spec, cfg, None)
}

/// Variant that appends the reinforced-entanglement block of a one-hot
/// encoded variable to the built input before training.
pub fn represent_variables_reinforced(
    t: &DataTable,
    spec: &FlowSpec,
    cfg: &TrainConfig,
    block: Option<&crate::categorical::OneHotBlock>,
) -> Result<VariableRepresentation> {
    spec.validate()?;
    if block.is_some() && spec.flow == Flow::Gradfield && spec.aggregation == 4 {
        return Err(Error::config(
            "reinforcement is not defined for gradfield aggregation option 4",
        ));
    }

    // the gradient-field flow rides on an observation embedding
    let observation_frames = if spec.flow == Flow::Gradfield
        || spec.parts.iter().any(|p| p.flow == Flow::Gradfield)
    {
        let obs_cfg = TrainConfig {
            seed: SeedStream::child_seed(cfg.seed, 0x0b5),
            ..cfg.clone()
        };
        Some(represent_observations(t, &obs_cfg)?.frames)
    } else {
        None
    };

    if spec.flow == Flow::Gradfield && spec.aggregation == 4 {
        let frames = observation_frames.expect("computed above");
        let fields = build_field_set(t, &frames, spec.grid)?;
        let latent = aggregate_option4(
            &fields.tensor()?,
            spec.option4_budget(t.ncols()),
            SeedStream::child_seed(spec.seed, 0x5cb4),
            cfg,
        )?;
        let frames = build_frames(&latent)?;
        return Ok(VariableRepresentation {
            input: t.clone(),
            model: None,
            latent,
            frames,
            report: None,
        });
    }

    let mut input = build_input(t, spec, observation_frames.as_ref())?;
    if let Some(block) = block {
        input = crate::categorical::reinforce_entanglement(&input, block)?;
    }
    let fit = fit_select(&input, cfg, spec.train_factor, spec.monitor_factor)?;
    // encode the duplicated set and collapse the copies, per the protocol
    let duplicated = duplicate_rows(&input, spec.train_factor)?;
    let encoded = fit.model.encode_table(&duplicated)?;
    let latent = dedupe(&encoded)?;
    let frames = build_frames(&latent)?;
    Ok(VariableRepresentation {
        input,
        model: Some(fit.model),
        latent,
        frames,
        report: Some(fit.report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn small_table(n: usize, k: usize, seed: u64) -> DataTable {
        let mut rng = SeedStream::new(seed);
        let base: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let values = Array2::from_shape_fn((n, k), |(i, j)| {
            0.5 * base[i] * (j as f64 + 1.0) + rng.normal()
        });
        DataTable::with_default_ids((0..k).map(|j| format!("v{j}")).collect(), values).unwrap()
    }

    fn quick_cfg(seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 64,
            runs: 1,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn transposed_input_shape_and_range() {
        let t = small_table(40, 6, 1);
        let input = build_input(&t, &FlowSpec::for_flow(Flow::Transposed), None).unwrap();
        assert_eq!(input.nrows(), 6);
        assert_eq!(input.ncols(), 40);
        assert_eq!(input.row_ids, t.variable_names);
        assert!(input.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn stats_pdf_cdf_inputs() {
        let t = small_table(60, 5, 2);
        let stats = build_input(&t, &FlowSpec::for_flow(Flow::Stats), None).unwrap();
        assert_eq!(stats.nrows(), 5);
        assert_eq!(stats.ncols(), 5);
        let pdf = build_input(&t, &FlowSpec::for_flow(Flow::Pdf), None).unwrap();
        assert_eq!(pdf.ncols(), DEFAULT_BINS);
        let cdf = build_input(&t, &FlowSpec::for_flow(Flow::CdfGrid), None).unwrap();
        assert_eq!(cdf.ncols(), 650);
        for part in [&stats, &pdf, &cdf] {
            assert!(part.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn adjacency_input_signed_rescale() {
        let t = small_table(50, 4, 3);
        let spec = FlowSpec {
            flow: Flow::Adjacency,
            metric: Some(Metric::Pearson),
            ..Default::default()
        };
        let input = build_input(&t, &spec, None).unwrap();
        assert_eq!(input.nrows(), 4);
        assert_eq!(input.ncols(), 4);
        assert!(input.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        // diagonal of a rescaled correlation matrix is (1 + 1) / 2 = 1
        for i in 0..4 {
            assert!((input.values[(i, i)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn adjacency_requires_metric() {
        let t = small_table(30, 3, 4);
        let spec = FlowSpec::for_flow(Flow::Adjacency);
        assert!(build_input(&t, &spec, None).is_err());
    }

    #[test]
    fn combined_input_concatenates_parts() {
        let t = small_table(40, 5, 5);
        let spec = FlowSpec {
            flow: Flow::Combined,
            parts: vec![
                FlowSpec::for_flow(Flow::Transposed),
                FlowSpec::for_flow(Flow::Stats),
            ],
            ..Default::default()
        };
        let input = build_input(&t, &spec, None).unwrap();
        assert_eq!(input.nrows(), 5);
        assert_eq!(input.ncols(), 40 + 5);
        assert!(input.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn combined_rejects_nesting_and_empty() {
        let t = small_table(30, 3, 6);
        let nested = FlowSpec {
            flow: Flow::Combined,
            parts: vec![FlowSpec {
                flow: Flow::Combined,
                parts: vec![FlowSpec::for_flow(Flow::Transposed)],
                ..Default::default()
            }],
            ..Default::default()
        };
        assert!(build_input(&t, &nested, None).is_err());
        assert!(build_input(&t, &FlowSpec::for_flow(Flow::Combined), None).is_err());
    }

    #[test]
    fn represent_variables_counts_match() {
        let t = small_table(30, 5, 7);
        let spec = FlowSpec {
            flow: Flow::Adjacency,
            metric: Some(Metric::SpearmanR2),
            train_factor: 4,
            monitor_factor: 2,
            ..Default::default()
        };
        let rep = represent_variables(&t, &spec, &quick_cfg(1)).unwrap();
        assert_eq!(rep.latent.len(), 5);
        assert_eq!(rep.frames.len(), 5);
        assert_eq!(rep.latent.keys, t.variable_names);
        let report = rep.report.unwrap();
        assert_eq!(report.runs.len(), 1);
    }

    #[test]
    fn represent_variables_is_reproducible() {
        let t = small_table(25, 4, 8);
        let spec = FlowSpec {
            flow: Flow::Transposed,
            train_factor: 3,
            monitor_factor: 0,
            ..Default::default()
        };
        let a = represent_variables(&t, &spec, &quick_cfg(9)).unwrap();
        let b = represent_variables(&t, &spec, &quick_cfg(9)).unwrap();
        assert_eq!(a.latent, b.latent);
        let c = represent_variables(&t, &spec, &quick_cfg(10)).unwrap();
        assert_ne!(a.latent, c.latent);
    }

    #[test]
    fn represent_observations_counts() {
        let t = small_table(40, 4, 11);
        let rep = represent_observations(&t, &quick_cfg(2)).unwrap();
        assert_eq!(rep.latent.len(), 40);
        assert_eq!(rep.frames.len(), 40);
    }

    #[test]
    fn gradfield_flow_end_to_end() {
        let t = small_table(30, 4, 12);
        for aggregation in 1..=4u8 {
            let spec = FlowSpec {
                flow: Flow::Gradfield,
                aggregation,
                train_factor: 3,
                monitor_factor: 0,
                grid: 8,
                row_budget: 120,
                column_budget: 60,
                ..Default::default()
            };
            let rep = represent_variables(&t, &spec, &quick_cfg(3)).unwrap();
            assert_eq!(rep.latent.len(), 4, "aggregation {aggregation}");
        }
    }

    #[test]
    fn gradfield_option4_rejected_by_build_input() {
        let t = small_table(30, 4, 13);
        let spec = FlowSpec {
            flow: Flow::Gradfield,
            aggregation: 4,
            grid: 8,
            ..Default::default()
        };
        let rep = represent_observations(&t, &quick_cfg(4)).unwrap();
        assert!(build_input(&t, &spec, Some(&rep.frames)).is_err());
    }

    #[test]
    fn flow_spec_json_round_trip() {
        let spec = FlowSpec {
            flow: Flow::Adjacency,
            metric: Some(Metric::Jaccard),
            transform: Transform::Laplacian,
            seed: 42,
            ..Default::default()
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: FlowSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        // partial configs fill in defaults
        let sparse: FlowSpec =
            serde_json::from_str(r#"{"flow":"transposed","seed":7}"#).unwrap();
        assert_eq!(sparse.train_factor, 50);
        assert_eq!(sparse.monitor_factor, 30);
        assert_eq!(sparse.runs, 3);
        assert_eq!(sparse.grid, 35);
    }
}
