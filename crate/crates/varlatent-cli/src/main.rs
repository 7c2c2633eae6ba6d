//! `varlatent` command-line interface: dataset generation, the five-flow
//! representation pipeline, gradient-field maps, metric comparison reports,
//! and raw encode/decode against a saved model.

mod svg;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use varlatent::error::Error;
use varlatent::gradfield::spot_cross_product;
use varlatent::ingest::{generate_rates, generate_synthetic, load_csv, rate_catalog, save_csv};
use varlatent::metrics::{metric_comparison_report, Metric};
use varlatent::pipeline::{
    build_field_set, represent_observations, represent_variables, FlowSpec,
};
use varlatent::table::DataTable;
use varlatent::vae::{RunReport, TrainConfig, VaeModel};

const SEED_ENV: &str = "VARLATENT_SEED";

#[derive(Parser)]
#[command(name = "varlatent", version, about = "Variables on a 2D latent space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a bundled dataset as CSV.
    Synthetic {
        /// Dataset name: synthetic | rates.
        #[arg(long, default_value = "synthetic")]
        dataset: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the variable-representation pipeline from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed (also settable via VARLATENT_SEED).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Interpolated field map of one variable, or the |cp| map and time
    /// series of a pair, over the observation latent plane.
    Gradmap {
        /// Data source: a CSV path, or synthetic | rates.
        #[arg(long)]
        data: String,
        #[arg(long)]
        var: String,
        #[arg(long)]
        var2: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 35)]
        grid: usize,
        #[arg(long, default_value_t = 75)]
        epochs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ten-metric pairwise comparison report.
    Metrics {
        /// Data source: a CSV path, or synthetic | rates.
        #[arg(long)]
        data: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode CSV rows with a saved model.
    Encode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode latent coordinates with a saved model.
    Decode {
        #[arg(long)]
        model: PathBuf,
        /// CSV with key, mu1, mu2 columns.
        #[arg(long)]
        latent: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// JSON configuration of the `run` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunConfig {
    /// Data source: a CSV path, or the keywords synthetic | rates.
    data: String,
    spec: FlowSpec,
    #[serde(default)]
    train: Option<TrainConfig>,
    /// Optional key -> group tags for scatter coloring.
    #[serde(default)]
    groups: HashMap<String, String>,
    /// Optional point pairs drawn as lines on the scatter.
    #[serde(default)]
    pairs: Vec<(String, String)>,
}

#[derive(Serialize)]
struct RunArtifactReport<'a> {
    data: &'a str,
    spec: &'a FlowSpec,
    train: &'a TrainConfig,
    latent_points: usize,
    runs: Option<&'a RunReport>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes; anything else is usage
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 = usage/config, 2 = data, 3 = numeric failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 1,
        Error::Numeric { .. } => 3,
        _ => 2,
    }
}

/// --seed flag, else the VARLATENT_SEED environment variable.
fn seed_override(flag: Option<u64>) -> Option<u64> {
    flag.or_else(|| {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
    })
}

/// Loads a data source: bundled generator keyword or CSV path.
fn load_data(source: &str, seed: u64) -> Result<DataTable, Error> {
    match source {
        "synthetic" => Ok(generate_synthetic(seed)),
        "rates" => Ok(generate_rates(seed)),
        path => load_csv(path, true, true),
    }
}

fn ensure_dir(path: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synthetic { dataset, seed, out } => {
            let seed = seed_override(seed).unwrap_or(0);
            let t = match dataset.as_str() {
                "synthetic" => generate_synthetic(seed),
                "rates" => generate_rates(seed),
                other => {
                    return Err(Error::config(format!(
                        "unknown dataset '{other}'; expected synthetic or rates"
                    )))
                }
            };
            save_csv(&t, &out, "id")
        }
        Command::Run { config, seed, out } => cmd_run(&config, seed, &out),
        Command::Gradmap {
            data,
            var,
            var2,
            seed,
            grid,
            epochs,
            out,
        } => cmd_gradmap(&data, &var, var2.as_deref(), seed, grid, epochs, &out),
        Command::Metrics { data, seed, out } => {
            let seed = seed_override(seed).unwrap_or(0);
            let t = load_data(&data, seed)?;
            let report = metric_comparison_report(&t)?;
            save_csv(&report, &out, "pair")
        }
        Command::Encode { model, data, out } => {
            let (model, _) = VaeModel::load(&model)?;
            let t = load_csv(&data, true, true)?;
            let latent = model.encode_table(&t)?;
            let mut text = String::from("key,mu1,mu2,log_var1,log_var2\n");
            for (i, key) in latent.keys.iter().enumerate() {
                text.push_str(&format!(
                    "{key},{},{},{},{}\n",
                    latent.mu[(i, 0)],
                    latent.mu[(i, 1)],
                    latent.log_var[(i, 0)],
                    latent.log_var[(i, 1)]
                ));
            }
            write_text(&out, &text)
        }
        Command::Decode { model, latent, out } => {
            let (model, _) = VaeModel::load(&model)?;
            let t = load_csv(&latent, true, true)?;
            if t.ncols() < 2 {
                return Err(Error::invalid("decode input needs two coordinate columns"));
            }
            let z = t.values.slice(ndarray::s![.., 0..2]).to_owned();
            let decoded = model.decode_batch(&z)?;
            let names = (0..decoded.ncols()).map(|j| format!("f{j}")).collect();
            let table = DataTable::new(names, t.row_ids.clone(), decoded)?;
            save_csv(&table, &out, "key")
        }
    }
}

fn cmd_run(config_path: &Path, seed_flag: Option<u64>, out: &Path) -> Result<(), Error> {
    let text = std::fs::read_to_string(config_path).map_err(|source| Error::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| {
        let hint = if e.to_string().contains("metric") {
            let tags: Vec<&str> = Metric::ALL.iter().map(|m| m.tag()).collect();
            format!(" (valid metric tags: {})", tags.join(", "))
        } else {
            String::new()
        };
        Error::config(format!("config field error: {e}{hint}"))
    })?;
    config.spec.validate()?;

    if let Some(seed) = seed_override(seed_flag) {
        config.spec.seed = seed;
    }
    let mut train = config
        .train
        .clone()
        .unwrap_or_else(|| config.spec.train_config());
    train.seed = config.spec.seed;
    train.runs = config.spec.runs;

    let data = load_data(&config.data, config.spec.seed)?;
    let rep = represent_variables(&data, &config.spec, &train)?;

    ensure_dir(out)?;
    let plots = out.join("plots");
    ensure_dir(&plots)?;

    save_csv(&rep.input, &out.join("input.csv"), "key")?;

    // group tags: explicit config wins; the rates keyword colors by family
    let groups: Option<Vec<String>> = if !config.groups.is_empty() {
        Some(
            rep.frames
                .keys
                .iter()
                .map(|k| config.groups.get(k).cloned().unwrap_or_default())
                .collect(),
        )
    } else if config.data == "rates" {
        let catalog: HashMap<&str, &str> = rate_catalog()
            .into_iter()
            .map(|s| (s.name, s.rate_type))
            .collect();
        Some(
            rep.frames
                .keys
                .iter()
                .map(|k| catalog.get(k.as_str()).unwrap_or(&"other").to_string())
                .collect(),
        )
    } else {
        None
    };
    rep.frames.save_csv(&out.join("latent.csv"), groups.as_deref())?;

    let report = RunArtifactReport {
        data: &config.data,
        spec: &config.spec,
        train: &train,
        latent_points: rep.latent.len(),
        runs: rep.report.as_ref(),
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::invalid(format!("report serialization failed: {e}")))?;
    write_text(&out.join("report.json"), &json)?;

    if let Some(model) = &rep.model {
        model.save(out.join("model.json"), &train)?;
    }

    let index: HashMap<&str, usize> = rep
        .frames
        .keys
        .iter()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i))
        .collect();
    let pairs: Vec<(usize, usize)> = config
        .pairs
        .iter()
        .filter_map(|(a, b)| Some((*index.get(a.as_str())?, *index.get(b.as_str())?)))
        .collect();
    let points: Vec<(f64, f64)> = (0..rep.frames.len())
        .map(|i| (rep.frames.lp[(i, 0)], rep.frames.lp[(i, 1)]))
        .collect();
    let scatter = svg::scatter(
        &format!("variables on the latent disk ({})", config.spec.flow.tag()),
        &points,
        &rep.frames.keys,
        groups.as_deref(),
        &pairs,
    );
    write_text(&plots.join("latent_lp.svg"), &scatter)
}

fn grid_to_table(values: &ndarray::Array2<f64>) -> DataTable {
    let (gx, gy) = values.dim();
    DataTable::new(
        (0..gy).map(|iy| format!("y{iy}")).collect(),
        (0..gx).map(|ix| format!("x{ix}")).collect(),
        values.clone(),
    )
    .expect("grid tables are valid")
}

fn cmd_gradmap(
    data: &str,
    var: &str,
    var2: Option<&str>,
    seed: Option<u64>,
    grid: usize,
    epochs: usize,
    out: &Path,
) -> Result<(), Error> {
    let seed = seed_override(seed).unwrap_or(0);
    let t = load_data(data, seed)?;
    let cfg = TrainConfig {
        seed,
        epochs,
        ..Default::default()
    };
    let obs = represent_observations(&t, &cfg)?;
    let fields = build_field_set(&t, &obs.frames, grid)?;
    ensure_dir(out)?;

    // the stored gradient fields imply the interpolated surfaces; re-derive
    // the surface of the requested variable for the map itself
    let (normalized, _) = varlatent::ingest::minmax_normalize(&t);
    let j = t
        .column_index(var)
        .ok_or_else(|| Error::invalid(format!("unknown variable '{var}'")))?;
    let surface = varlatent::gradfield::interpolate(
        &fields.observation_points,
        &normalized.values.column(j).to_vec(),
        grid,
    )?;

    match var2 {
        None => {
            save_csv(&grid_to_table(&surface.values), &out.join("field.csv"), "node")?;
            write_text(
                &out.join("field.svg"),
                &svg::heatmap(&format!("interpolated {var}"), &surface.values),
            )
        }
        Some(var2) => {
            let gi = fields.field(var)?;
            let gj = fields.field(var2)?;
            let cp = spot_cross_product(gi, gj)?.mapv(f64::abs);
            save_csv(&grid_to_table(&cp), &out.join("cp_map.csv"), "node")?;
            write_text(
                &out.join("cp_map.svg"),
                &svg::heatmap(&format!("|cp| of ({var}, {var2})"), &cp),
            )?;
            let tensor = fields.tensor()?;
            let series = varlatent::gradfield::cross_product_timeseries(&tensor, var, var2)?;
            let mut text = String::from("index,cp_magnitude\n");
            for (i, v) in series.iter().enumerate() {
                text.push_str(&format!("{i},{v}\n"));
            }
            write_text(&out.join("cp_series.csv"), &text)?;
            write_text(
                &out.join("cp_series.svg"),
                &svg::timeseries(&format!("|cp| of ({var}, {var2}) over time"), &series),
            )
        }
    }
}
