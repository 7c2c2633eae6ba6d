//! The beta-VAE core: dense encoder/decoder, reparameterization,
//! BCE + beta*KL loss with analytic backpropagation, Adam, and the
//! multi-run training protocol with minimum-latent-correlation selection.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{duplicate_rows, shuffle_rows};
use crate::metrics::pearson;
use crate::rng::SeedStream;
use crate::table::DataTable;

pub const LATENT_DIM: usize = 2;

/// Default layer widths: encoder input -> 256 -> 32 -> (2 + 2),
/// decoder 2 -> 32 -> 512 -> input.
pub const ENCODER_WIDTHS: [usize; 2] = [256, 32];
pub const DECODER_WIDTHS: [usize; 2] = [32, 512];

/// Sigmoid outputs are clamped to [EPS, 1 - EPS] before the log in the loss.
const OUTPUT_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// Input x output weight matrix.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn glorot(rng: &mut SeedStream, fan_in: usize, fan_out: usize) -> Dense {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w = Array2::from_shape_fn((fan_in, fan_out), |_| {
            (2.0 * rng.uniform01() - 1.0) * limit
        });
        Dense {
            w,
            b: Array1::zeros(fan_out),
        }
    }

    fn zeros_like(&self) -> Dense {
        Dense {
            w: Array2::zeros(self.w.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }

    fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite()) && self.b.iter().all(|v| v.is_finite())
    }
}

// layer order inside VaeModel::layers
const ENC1: usize = 0;
const ENC2: usize = 1;
const MU_HEAD: usize = 2;
const LOGVAR_HEAD: usize = 3;
const DEC1: usize = 4;
const DEC2: usize = 5;
const DEC_OUT: usize = 6;
const LAYER_COUNT: usize = 7;

/// Dense encoder/decoder pair with a 2D latent bottleneck.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeModel {
    pub input_dim: usize,
    pub encoder_widths: [usize; 2],
    pub decoder_widths: [usize; 2],
    layers: Vec<Dense>,
}

impl VaeModel {
    /// Glorot-uniform weights and zero biases, deterministic under `seed`.
    pub fn init(input_dim: usize, seed: u64) -> Result<VaeModel> {
        Self::init_with_widths(input_dim, ENCODER_WIDTHS, DECODER_WIDTHS, seed)
    }

    /// Miniature variants (used by the gradient checks) pick smaller widths.
    pub fn init_with_widths(
        input_dim: usize,
        encoder_widths: [usize; 2],
        decoder_widths: [usize; 2],
        seed: u64,
    ) -> Result<VaeModel> {
        if input_dim < 2 {
            return Err(Error::invalid("input_dim must be >= 2"));
        }
        let mut rng = SeedStream::new(seed);
        let [e1, e2] = encoder_widths;
        let [d1, d2] = decoder_widths;
        let layers = vec![
            Dense::glorot(&mut rng, input_dim, e1),
            Dense::glorot(&mut rng, e1, e2),
            Dense::glorot(&mut rng, e2, LATENT_DIM),
            Dense::glorot(&mut rng, e2, LATENT_DIM),
            Dense::glorot(&mut rng, LATENT_DIM, d1),
            Dense::glorot(&mut rng, d1, d2),
            Dense::glorot(&mut rng, d2, input_dim),
        ];
        Ok(VaeModel {
            input_dim,
            encoder_widths,
            decoder_widths,
            layers,
        })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    /// Mutable access for perturbation-based checks of the gradients.
    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.is_finite())
    }

    /// Deterministic posterior parameters for a batch of rows.
    pub fn encode_batch(&self, x: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
        if x.ncols() != self.input_dim {
            return Err(Error::invalid(format!(
                "encode expects {} features, got {}",
                self.input_dim,
                x.ncols()
            )));
        }
        let h1 = relu(&affine(x, &self.layers[ENC1]));
        let h2 = relu(&affine(&h1, &self.layers[ENC2]));
        let mu = affine(&h2, &self.layers[MU_HEAD]);
        let log_var = affine(&h2, &self.layers[LOGVAR_HEAD]);
        Ok((mu, log_var))
    }

    /// Encodes a single row.
    pub fn encode(&self, x: ArrayView1<'_, f64>) -> Result<([f64; 2], [f64; 2])> {
        let batch = x.insert_axis(Axis(0)).to_owned();
        let (mu, lv) = self.encode_batch(&batch)?;
        Ok(([mu[(0, 0)], mu[(0, 1)]], [lv[(0, 0)], lv[(0, 1)]]))
    }

    /// Encodes every row of a table into a latent table keyed by row id.
    pub fn encode_table(&self, t: &DataTable) -> Result<LatentTable> {
        let (mu, log_var) = self.encode_batch(&t.values)?;
        Ok(LatentTable {
            keys: t.row_ids.clone(),
            mu,
            log_var,
        })
    }

    /// Decodes latent coordinates into sigmoid outputs.
    pub fn decode_batch(&self, z: &Array2<f64>) -> Result<Array2<f64>> {
        if z.ncols() != LATENT_DIM {
            return Err(Error::invalid("decode expects 2 latent coordinates"));
        }
        let d1 = relu(&affine(z, &self.layers[DEC1]));
        let d2 = relu(&affine(&d1, &self.layers[DEC2]));
        Ok(sigmoid(&affine(&d2, &self.layers[DEC_OUT])))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>, config: &TrainConfig) -> Result<()> {
        let file = SavedModel {
            model: self.clone(),
            config: config.clone(),
        };
        let json = serde_json::to_string(&file)
            .map_err(|e| Error::invalid(format!("model serialization failed: {e}")))?;
        std::fs::write(path.as_ref(), json).map_err(|source| Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<(VaeModel, TrainConfig)> {
        let json = std::fs::read_to_string(path.as_ref()).map_err(|source| Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        })?;
        let file: SavedModel = serde_json::from_str(&json)
            .map_err(|e| Error::invalid(format!("model file malformed: {e}")))?;
        Ok((file.model, file.config))
    }
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    model: VaeModel,
    config: TrainConfig,
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    /// Independent fits; the run with minimum |corr(mu1, mu2)| wins.
    pub runs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            beta: 0.3,
            epochs: 75,
            batch_size: 128,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            runs: 3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta <= 0.0 {
            return Err(Error::config("beta must be > 0"));
        }
        if self.epochs < 1 || self.batch_size < 1 || self.runs < 1 {
            return Err(Error::config("epochs, batch_size and runs must be >= 1"));
        }
        Ok(())
    }
}

/// Per-row latent coordinates (posterior means and log-variances).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentTable {
    pub keys: Vec<String>,
    /// n x 2 posterior means; the representation coordinate.
    pub mu: Array2<f64>,
    /// n x 2 posterior log-variances.
    pub log_var: Array2<f64>,
}

impl LatentTable {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

fn affine(x: &Array2<f64>, d: &Dense) -> Array2<f64> {
    x.dot(&d.w) + &d.b
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

fn sigmoid(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| 1.0 / (1.0 + (-v).exp()))
}

/// z = mu + exp(log_var / 2) * noise.
pub fn reparameterize(mu: [f64; 2], log_var: [f64; 2], noise: [f64; 2]) -> [f64; 2] {
    [
        mu[0] + (0.5 * log_var[0]).exp() * noise[0],
        mu[1] + (0.5 * log_var[1]).exp() * noise[1],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub bce: f64,
    pub kl: f64,
}

/// BCE summed over features and averaged over the batch, KL averaged over
/// the batch, total = bce + beta * kl.
pub fn loss(
    x: &Array2<f64>,
    x_hat: &Array2<f64>,
    mu: &Array2<f64>,
    log_var: &Array2<f64>,
    beta: f64,
) -> LossParts {
    let batch = x.nrows() as f64;
    let mut bce = 0.0;
    for (&xi, &xh) in x.iter().zip(x_hat.iter()) {
        let xh = xh.clamp(OUTPUT_CLAMP, 1.0 - OUTPUT_CLAMP);
        bce -= xi * xh.ln() + (1.0 - xi) * (1.0 - xh).ln();
    }
    bce /= batch;
    let mut kl = 0.0;
    for (&m, &lv) in mu.iter().zip(log_var.iter()) {
        kl += -0.5 * (1.0 + lv - m * m - lv.exp());
    }
    kl /= batch;
    LossParts {
        total: bce + beta * kl,
        bce,
        kl,
    }
}

/// Gradients of the loss with respect to every layer, same layout as the model.
pub struct Gradients {
    pub layers: Vec<Dense>,
}

/// Forward pass plus analytic backpropagation for one batch with fixed
/// reparameterization noise. The gradient is exact for the unclamped loss.
pub fn loss_and_gradients(
    model: &VaeModel,
    x: &Array2<f64>,
    noise: &Array2<f64>,
    beta: f64,
) -> Result<(LossParts, Gradients)> {
    if x.ncols() != model.input_dim {
        return Err(Error::invalid("batch width does not match input_dim"));
    }
    if noise.raw_dim() != ndarray::Ix2(x.nrows(), LATENT_DIM) {
        return Err(Error::invalid("noise shape must be batch x 2"));
    }
    let batch = x.nrows() as f64;
    let layers = &model.layers;

    // forward
    let h1 = relu(&affine(x, &layers[ENC1]));
    let h2 = relu(&affine(&h1, &layers[ENC2]));
    let mu = affine(&h2, &layers[MU_HEAD]);
    let log_var = affine(&h2, &layers[LOGVAR_HEAD]);
    let sigma = log_var.mapv(|v| (0.5 * v).exp());
    let z = &mu + &(&sigma * noise);
    let d1 = relu(&affine(&z, &layers[DEC1]));
    let d2 = relu(&affine(&d1, &layers[DEC2]));
    let x_hat = sigmoid(&affine(&d2, &layers[DEC_OUT]));

    let parts = loss(x, &x_hat, &mu, &log_var, beta);

    // backward
    let mut grads: Vec<Dense> = layers.iter().map(Dense::zeros_like).collect();
    let relu_mask = |a: &Array2<f64>| a.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });

    // BCE through the sigmoid: d/dlogits = (x_hat - x) / batch
    let dlogits = (&x_hat - x) / batch;
    grads[DEC_OUT].w = d2.t().dot(&dlogits);
    grads[DEC_OUT].b = dlogits.sum_axis(Axis(0));
    let dd2 = dlogits.dot(&layers[DEC_OUT].w.t()) * relu_mask(&d2);
    grads[DEC2].w = d1.t().dot(&dd2);
    grads[DEC2].b = dd2.sum_axis(Axis(0));
    let dd1 = dd2.dot(&layers[DEC2].w.t()) * relu_mask(&d1);
    grads[DEC1].w = z.t().dot(&dd1);
    grads[DEC1].b = dd1.sum_axis(Axis(0));
    let dz = dd1.dot(&layers[DEC1].w.t());

    // KL contributions plus the reparameterized path
    let dmu = &dz + &(mu.mapv(|m| m) * (beta / batch));
    let dlog_var =
        &(&dz * &(0.5 * &sigma * noise)) + &log_var.mapv(|lv| 0.5 * beta * (lv.exp() - 1.0) / batch);

    grads[MU_HEAD].w = h2.t().dot(&dmu);
    grads[MU_HEAD].b = dmu.sum_axis(Axis(0));
    grads[LOGVAR_HEAD].w = h2.t().dot(&dlog_var);
    grads[LOGVAR_HEAD].b = dlog_var.sum_axis(Axis(0));
    let dh2 = (dmu.dot(&layers[MU_HEAD].w.t()) + dlog_var.dot(&layers[LOGVAR_HEAD].w.t()))
        * relu_mask(&h2);
    grads[ENC2].w = h1.t().dot(&dh2);
    grads[ENC2].b = dh2.sum_axis(Axis(0));
    let dh1 = dh2.dot(&layers[ENC2].w.t()) * relu_mask(&h1);
    grads[ENC1].w = x.t().dot(&dh1);
    grads[ENC1].b = dh1.sum_axis(Axis(0));

    Ok((parts, Gradients { layers: grads }))
}

struct Adam {
    m: Vec<Dense>,
    v: Vec<Dense>,
    step: u64,
}

impl Adam {
    fn new(model: &VaeModel) -> Adam {
        Adam {
            m: model.layers.iter().map(Dense::zeros_like).collect(),
            v: model.layers.iter().map(Dense::zeros_like).collect(),
            step: 0,
        }
    }

    fn update(&mut self, model: &mut VaeModel, grads: &Gradients, cfg: &TrainConfig) {
        self.step += 1;
        let (b1, b2, eps, lr) = (
            cfg.adam_beta1,
            cfg.adam_beta2,
            cfg.adam_epsilon,
            cfg.learning_rate,
        );
        let corr1 = 1.0 - b1.powi(self.step as i32);
        let corr2 = 1.0 - b2.powi(self.step as i32);
        for i in 0..LAYER_COUNT {
            let g = &grads.layers[i];
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            ndarray::Zip::from(&mut m.w)
                .and(&g.w)
                .for_each(|m, &g| *m = b1 * *m + (1.0 - b1) * g);
            ndarray::Zip::from(&mut v.w)
                .and(&g.w)
                .for_each(|v, &g| *v = b2 * *v + (1.0 - b2) * g * g);
            ndarray::Zip::from(&mut m.b)
                .and(&g.b)
                .for_each(|m, &g| *m = b1 * *m + (1.0 - b1) * g);
            ndarray::Zip::from(&mut v.b)
                .and(&g.b)
                .for_each(|v, &g| *v = b2 * *v + (1.0 - b2) * g * g);
            let layer = &mut model.layers[i];
            ndarray::Zip::from(&mut layer.w)
                .and(&m.w)
                .and(&v.w)
                .for_each(|w, &m, &v| {
                    *w -= lr * (m / corr1) / ((v / corr2).sqrt() + eps);
                });
            ndarray::Zip::from(&mut layer.b)
                .and(&m.b)
                .and(&v.b)
                .for_each(|w, &m, &v| {
                    *w -= lr * (m / corr1) / ((v / corr2).sqrt() + eps);
                });
        }
    }
}

/// Per-epoch loss trace of one training run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_losses: Vec<LossParts>,
    /// Mean loss on the monitor table, when one is supplied.
    pub monitor_losses: Vec<f64>,
}

/// Trains the model in place with mini-batch Adam and fresh
/// reparameterization noise per example per step.
pub fn train(
    model: &mut VaeModel,
    t: &DataTable,
    monitor: Option<&DataTable>,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if let Some(&v) = t.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!(
            "training data must lie in [0, 1], found {v}"
        )));
    }
    let n = t.nrows();
    if n == 0 {
        return Err(Error::invalid("empty training table"));
    }
    let mut noise_rng = SeedStream::new(SeedStream::child_seed(cfg.seed, 0x6e6f6973));
    let mut opt = Adam::new(model);
    let mut report = TrainReport::default();

    for epoch in 0..cfg.epochs {
        let mut epoch_total = 0.0;
        let mut epoch_bce = 0.0;
        let mut epoch_kl = 0.0;
        let mut batches = 0.0;
        let mut start = 0;
        while start < n {
            let end = (start + cfg.batch_size).min(n);
            let x = t.values.slice(ndarray::s![start..end, ..]).to_owned();
            let noise =
                Array2::from_shape_fn((end - start, LATENT_DIM), |_| noise_rng.normal());
            let (parts, grads) = loss_and_gradients(model, &x, &noise, cfg.beta)?;
            if !parts.total.is_finite() {
                return Err(Error::numeric(format!(
                    "non-finite loss at epoch {epoch}, batch starting at row {start}"
                )));
            }
            opt.update(model, &grads, cfg);
            epoch_total += parts.total;
            epoch_bce += parts.bce;
            epoch_kl += parts.kl;
            batches += 1.0;
            start = end;
        }
        if !model.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite weights after epoch {epoch}"
            )));
        }
        report.epoch_losses.push(LossParts {
            total: epoch_total / batches,
            bce: epoch_bce / batches,
            kl: epoch_kl / batches,
        });
        if let Some(mon) = monitor {
            report.monitor_losses.push(evaluate(model, mon, cfg.beta)?);
        }
    }
    Ok(report)
}

/// Mean total loss over a table with zero reparameterization noise.
pub fn evaluate(model: &VaeModel, t: &DataTable, beta: f64) -> Result<f64> {
    let (mu, log_var) = model.encode_batch(&t.values)?;
    let x_hat = model.decode_batch(&mu)?;
    Ok(loss(&t.values, &x_hat, &mu, &log_var, beta).total)
}

/// Outcome of one run inside `fit_select`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutcome {
    pub seed: u64,
    pub latent_correlation: f64,
    pub final_loss: LossParts,
    pub monitor_loss: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub runs: Vec<RunOutcome>,
    pub selected: usize,
}

pub struct FitSelection {
    pub model: VaeModel,
    /// Encoded originals (one row per input row of `t`).
    pub latent: LatentTable,
    pub report: RunReport,
}

/// Trains `cfg.runs` models on independently seeded duplications and
/// shuffles of `t`, returning the run whose encoded originals have minimum
/// |Pearson correlation| between the two latent means.
pub fn fit_select(
    t: &DataTable,
    cfg: &TrainConfig,
    train_factor: usize,
    monitor_factor: usize,
) -> Result<FitSelection> {
    cfg.validate()?;
    t.require_analysis_shape()?;
    let mut best: Option<(usize, VaeModel, LatentTable)> = None;
    let mut outcomes = Vec::with_capacity(cfg.runs);

    for run in 0..cfg.runs {
        let run_seed = SeedStream::child_seed(cfg.seed, run as u64 + 1);
        let train_table = shuffle_rows(&duplicate_rows(t, train_factor)?, run_seed);
        let monitor_table = if monitor_factor > 0 {
            Some(duplicate_rows(t, monitor_factor)?)
        } else {
            None
        };
        let mut model = VaeModel::init(t.ncols(), run_seed)?;
        let run_cfg = TrainConfig {
            seed: run_seed,
            ..cfg.clone()
        };
        let report = train(&mut model, &train_table, monitor_table.as_ref(), &run_cfg)?;
        let latent = model.encode_table(t)?;
        let corr = latent_correlation(&latent);
        outcomes.push(RunOutcome {
            seed: run_seed,
            latent_correlation: corr,
            final_loss: *report.epoch_losses.last().expect("epochs >= 1"),
            monitor_loss: report.monitor_losses.last().copied(),
        });
        let better = match &best {
            None => true,
            Some((idx, _, _)) => corr.abs() < outcomes[*idx].latent_correlation.abs(),
        };
        if better {
            best = Some((run, model, latent));
        }
    }

    let (selected, model, latent) = best.expect("runs >= 1");
    Ok(FitSelection {
        model,
        latent,
        report: RunReport {
            runs: outcomes,
            selected,
        },
    })
}

/// Pearson correlation between the two latent mean columns.
pub fn latent_correlation(latent: &LatentTable) -> f64 {
    let a: Vec<f64> = latent.mu.column(0).to_vec();
    let b: Vec<f64> = latent.mu.column(1).to_vec();
    let r = pearson(&a, &b);
    if r.is_finite() {
        r
    } else {
        0.0
    }
}
