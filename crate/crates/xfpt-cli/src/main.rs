//! `xfpt` — command-line front end for extreme first-passage-time analysis.
//!
//! Subcommands wrap the library modules one-to-one: `survival` tabulates
//! S(t) curves, `fig3` sweeps the asymptotic-formula relative error over
//! reactivities and searcher counts, `geodesic` solves metric shortest paths
//! on a field, `simulate` runs the Euler–Maruyama engine, and `compare` puts
//! the Monte Carlo estimate, exact quadrature (when an exact model applies)
//! and the asymptotic formula side by side.
//!
//! Every run writes a `manifest.json` with the seed and input hashes so
//! outputs are reproducible; failures write a machine-readable `error.json`
//! and exit with 2 (configuration) or 3 (numerical failure). `XFPT_THREADS`
//! caps the worker pool.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use xfpt_core::asymptotics::{extreme_moment_asymptotic, AsymptoticSpec};
use xfpt_core::error::Error;
use xfpt_core::geodesic::{
    effective_length_with_order, geodesic_distance_with_order, write_path_csv, FieldFile,
    MetricField, RegionSpec,
};
use xfpt_core::moments::{extreme_moment, fig3_sweep, write_fig3_csv, MomentQuery};
use xfpt_core::montecarlo::{estimate_extreme_moment, simulate_fpt, DynamicsSpec};
use xfpt_core::presets;
use xfpt_core::survival::SurvivalModel;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "xfpt", about = "Extreme first-passage statistics of diffusion", version)]
struct Cli {
    /// JSON config file; values named like the long flags override them.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Output directory (created if missing).
    #[arg(long, default_value = "xfpt-out")]
    out: PathBuf,
    /// RNG seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Tabulate S(t) and ln(1-S(t)) for a survival model on a time grid.
    Survival {
        #[command(flatten)]
        common: CommonOpts,
        /// Survival model JSON file.
        #[arg(long)]
        model: PathBuf,
        /// Explicit comma-separated times (overrides the grid flags).
        #[arg(long)]
        times: Option<String>,
        #[arg(long, default_value_t = 1e-4)]
        t_min: f64,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Relative error of the asymptotic moment formula vs reactivity and N.
    Fig3 {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated reactivities; `inf` = perfectly absorbing.
        #[arg(long, default_value = "0.1,1,10,inf")]
        kappa: String,
        /// Comma-separated searcher counts.
        #[arg(long = "N-grid", default_value = "1e2,1e3,1e4,1e5,1e6,1e7,1e8,1e9,1e10")]
        n_grid: String,
    },
    /// Metric shortest path (length, polyline, SVG overlay) on a field.
    Geodesic {
        #[command(flatten)]
        common: CommonOpts,
        /// Field JSON path or `preset:<strip|two-band|disk-obstacle>`.
        #[arg(long)]
        field: String,
        /// Stencil order (2 = 16 neighbors).
        #[arg(long, default_value_t = 2)]
        order: u32,
    },
    /// Euler-Maruyama first-passage sampling.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        field: String,
        /// Dynamics JSON (drift/dt/max_time/seed); flags below override.
        #[arg(long)]
        dynamics: Option<PathBuf>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        max_time: Option<f64>,
        /// Target reactivity; `inf` = perfectly absorbing.
        #[arg(long, default_value = "inf")]
        kappa: String,
        #[arg(long, default_value_t = 10_000)]
        n_samples: usize,
    },
    /// Monte Carlo estimate vs exact quadrature vs the asymptotic formula.
    Compare {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        field: String,
        #[arg(long)]
        dynamics: Option<PathBuf>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        max_time: Option<f64>,
        #[arg(long, default_value = "inf")]
        kappa: String,
        #[arg(long, default_value_t = 10_000)]
        n_samples: usize,
        /// Searcher count N.
        #[arg(long, default_value_t = 100)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Optional exact survival model JSON for the quadrature column.
        #[arg(long)]
        exact_model: Option<PathBuf>,
    },
}

/// Config-file values override the corresponding flags.
#[derive(Deserialize, Default)]
struct ConfigFile {
    out: Option<PathBuf>,
    seed: Option<u64>,
    tol: Option<f64>,
    kappa: Option<String>,
    #[serde(rename = "N-grid")]
    n_grid: Option<String>,
    dt: Option<f64>,
    max_time: Option<f64>,
    n_samples: Option<usize>,
    order: Option<u32>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out_dir = command_out_dir(&cli.command).clone();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = error_kind(&e);
            eprintln!("error ({kind}): {e}");
            let payload = serde_json::json!({ "error": kind, "message": e.to_string() });
            if fs::create_dir_all(&out_dir).is_ok() {
                let _ = fs::write(
                    out_dir.join("error.json"),
                    serde_json::to_string_pretty(&payload).unwrap(),
                );
            }
            if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn command_out_dir(cmd: &Command) -> &PathBuf {
    match cmd {
        Command::Survival { common, .. }
        | Command::Fig3 { common, .. }
        | Command::Geodesic { common, .. }
        | Command::Simulate { common, .. }
        | Command::Compare { common, .. } => &common.out,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "Domain",
        Error::Config(_) => "Config",
        Error::NonIntegrable(_) => "NonIntegrable",
        Error::CensoredTail(_) => "CensoredTail",
        Error::Unreachable(_) => "Unreachable",
        Error::ObstacleCrossing { .. } => "ObstacleCrossing",
        Error::FitFailure { .. } => "FitFailure",
        Error::EmptySamples => "EmptySamples",
        Error::Io(_) => "Io",
        Error::Json(_) => "Json",
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg: ConfigFile = match &cli.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Survival { common, model, times, t_min, t_max, points } => {
            cmd_survival(apply_common(common, &cfg), model, times, t_min, t_max, points)
        }
        Command::Fig3 { common, kappa, n_grid } => {
            let kappa = cfg.kappa.clone().unwrap_or(kappa);
            let n_grid = cfg.n_grid.clone().unwrap_or(n_grid);
            cmd_fig3(apply_common(common, &cfg), kappa, n_grid)
        }
        Command::Geodesic { common, field, order } => {
            let order = cfg.order.unwrap_or(order);
            cmd_geodesic(apply_common(common, &cfg), field, order)
        }
        Command::Simulate { common, field, dynamics, dt, max_time, kappa, n_samples } => {
            let kappa = cfg.kappa.clone().unwrap_or(kappa);
            let n_samples = cfg.n_samples.unwrap_or(n_samples);
            let dt = cfg.dt.or(dt);
            let max_time = cfg.max_time.or(max_time);
            cmd_simulate(
                apply_common(common, &cfg),
                field,
                dynamics,
                dt,
                max_time,
                kappa,
                n_samples,
            )
        }
        Command::Compare {
            common,
            field,
            dynamics,
            dt,
            max_time,
            kappa,
            n_samples,
            n,
            k,
            m,
            exact_model,
        } => {
            let kappa = cfg.kappa.clone().unwrap_or(kappa);
            let n_samples = cfg.n_samples.unwrap_or(n_samples);
            let dt = cfg.dt.or(dt);
            let max_time = cfg.max_time.or(max_time);
            cmd_compare(
                apply_common(common, &cfg),
                field,
                dynamics,
                dt,
                max_time,
                kappa,
                n_samples,
                n,
                k,
                m,
                exact_model,
            )
        }
    }
}

fn apply_common(mut common: CommonOpts, cfg: &ConfigFile) -> CommonOpts {
    if let Some(out) = &cfg.out {
        common.out = out.clone();
    }
    if let Some(seed) = cfg.seed {
        common.seed = seed;
    }
    if let Some(tol) = cfg.tol {
        common.tol = tol;
    }
    common
}

fn parse_kappa(s: &str) -> Result<f64, Error> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>()
        .map_err(|_| Error::Config(format!("bad kappa value {t:?}")))
}

fn parse_kappa_list(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',').map(parse_kappa).collect()
}

fn parse_n_list(s: &str) -> Result<Vec<u64>, Error> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| *v >= 1.0 && *v <= 1.8e19 && v.fract() == 0.0)
                .map(|v| v as u64)
                .ok_or_else(|| Error::Config(format!("bad N value {t:?}")))
        })
        .collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Loads a field either from a JSON path or a named preset; returns the
/// built objects plus the hash of the canonical JSON.
fn load_field(spec: &str) -> Result<(MetricField, RegionSpec, String), Error> {
    let file = if let Some(name) = spec.strip_prefix("preset:") {
        presets::preset_field_file(name)
            .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))?
    } else {
        FieldFile::from_json(&fs::read_to_string(Path::new(spec))?)?
    };
    let json = file.to_json()?;
    let hash = sha256_hex(json.as_bytes());
    let (field, regions) = file.build()?;
    Ok((field, regions, hash))
}

fn load_dynamics(
    path: Option<&PathBuf>,
    dt: Option<f64>,
    max_time: Option<f64>,
    seed: u64,
) -> Result<DynamicsSpec, Error> {
    let mut spec = match path {
        Some(p) => serde_json::from_str::<DynamicsSpec>(&fs::read_to_string(p)?)?,
        None => DynamicsSpec::new(
            dt.ok_or_else(|| Error::Config("need --dynamics or --dt".into()))?,
            max_time.ok_or_else(|| Error::Config("need --dynamics or --max-time".into()))?,
            seed,
        ),
    };
    if let Some(dt) = dt {
        spec.dt = dt;
    }
    if let Some(mt) = max_time {
        spec.max_time = mt;
    }
    spec.seed = seed;
    Ok(spec)
}

fn write_manifest(out: &Path, body: serde_json::Value) -> Result<(), Error> {
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&body)?)?;
    Ok(())
}

fn cmd_survival(
    common: CommonOpts,
    model_path: PathBuf,
    times: Option<String>,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<(), Error> {
    let model_text = fs::read_to_string(&model_path)?;
    let model = SurvivalModel::from_json(&model_text)?;
    let grid: Vec<f64> = match times {
        Some(list) => list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad time {t:?}")))
            })
            .collect::<Result<_, _>>()?,
        None => {
            if !(t_min > 0.0 && t_max > t_min && points >= 2) {
                return Err(Error::Config("need 0 < t-min < t-max and points >= 2".into()));
            }
            let step = (t_max / t_min).ln() / (points - 1) as f64;
            (0..points).map(|i| t_min * ((i as f64) * step).exp()).collect()
        }
    };
    fs::create_dir_all(&common.out)?;
    let mut csv = String::from("t,S,log1mS\n");
    for &t in &grid {
        let s = model.survival(t)?;
        let l1ms = if t > 0.0 {
            model.log_one_minus_survival(t)?
        } else {
            f64::NEG_INFINITY
        };
        csv.push_str(&format!("{t},{s},{l1ms}\n"));
    }
    fs::write(common.out.join("survival.csv"), csv)?;
    write_manifest(
        &common.out,
        serde_json::json!({
            "command": "survival",
            "model": { "path": model_path, "sha256": sha256_hex(model_text.as_bytes()) },
            "points": grid.len(),
            "seed": common.seed,
            "tol": common.tol,
        }),
    )?;
    println!("wrote {} rows to {}", grid.len(), common.out.join("survival.csv").display());
    Ok(())
}

fn cmd_fig3(common: CommonOpts, kappa: String, n_grid: String) -> Result<(), Error> {
    let kappas = parse_kappa_list(&kappa)?;
    let ns = parse_n_list(&n_grid)?;
    let rows = fig3_sweep(&kappas, &ns, common.tol)?;
    fs::create_dir_all(&common.out)?;
    let mut csv = Vec::new();
    write_fig3_csv(&rows, &mut csv)?;
    fs::write(common.out.join("fig3.csv"), &csv)?;
    let series: Vec<svg::Series> = kappas
        .iter()
        .map(|&k| svg::Series {
            label: if k.is_infinite() {
                "kappa = inf".into()
            } else {
                format!("kappa = {k}")
            },
            points: rows
                .iter()
                .filter(|r| r.kappa == k || (k.is_infinite() && r.kappa.is_infinite()))
                .map(|r| (r.n as f64, r.rel_error))
                .collect(),
        })
        .collect();
    let chart = svg::line_chart_log_x(
        &series,
        "Relative error of the asymptotic extreme-FPT formula (L = D = 1)",
        "searchers N",
        "relative error",
    );
    fs::write(common.out.join("fig3.svg"), chart)?;
    write_manifest(
        &common.out,
        serde_json::json!({
            "command": "fig3",
            "kappa": kappa,
            "N_grid": n_grid,
            "rows": rows.len(),
            "seed": common.seed,
            "tol": common.tol,
        }),
    )?;
    println!("wrote {} rows to {}", rows.len(), common.out.join("fig3.csv").display());
    Ok(())
}

fn cmd_geodesic(common: CommonOpts, field_spec: String, order: u32) -> Result<(), Error> {
    let (field, regions, hash) = load_field(&field_spec)?;
    let result = geodesic_distance_with_order(&field, &regions, order)?;
    if !result.reachable {
        return Err(Error::Unreachable(
            "obstacles disconnect the source region from every target".into(),
        ));
    }
    fs::create_dir_all(&common.out)?;
    let mut path_csv = Vec::new();
    write_path_csv(&result.path, &mut path_csv)?;
    fs::write(common.out.join("path.csv"), &path_csv)?;
    let masks = regions.rasterize(&field)?;
    let overlay =
        svg::field_overlay(&field, &masks, &[("geodesic".into(), result.path.clone())]);
    fs::write(common.out.join("geodesic.svg"), overlay)?;
    fs::write(
        common.out.join("result.json"),
        serde_json::to_string_pretty(&result)?,
    )?;
    write_manifest(
        &common.out,
        serde_json::json!({
            "command": "geodesic",
            "field": { "spec": field_spec, "sha256": hash },
            "order": order,
            "length": result.length,
            "seed": common.seed,
        }),
    )?;
    println!("geodesic length = {}", result.length);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    common: CommonOpts,
    field_spec: String,
    dynamics: Option<PathBuf>,
    dt: Option<f64>,
    max_time: Option<f64>,
    kappa: String,
    n_samples: usize,
) -> Result<(), Error> {
    let (field, regions, hash) = load_field(&field_spec)?;
    let dyn_spec = load_dynamics(dynamics.as_ref(), dt, max_time, common.seed)?;
    let kappa = parse_kappa(&kappa)?;
    let samples = simulate_fpt(&field, &regions, &dyn_spec, kappa, n_samples)?;
    fs::create_dir_all(&common.out)?;
    let mut csv = Vec::new();
    samples.write_csv(&mut csv)?;
    fs::write(common.out.join("samples.csv"), &csv)?;
    let manifest = samples.manifest(&hash);
    fs::write(
        common.out.join("manifest.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "command": "simulate",
            "field": { "spec": field_spec, "sha256": hash },
            "run": manifest,
        }))?,
    )?;
    println!(
        "simulated {} samples ({} censored) -> {}",
        samples.len(),
        samples.n_censored(),
        common.out.join("samples.csv").display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    common: CommonOpts,
    field_spec: String,
    dynamics: Option<PathBuf>,
    dt: Option<f64>,
    max_time: Option<f64>,
    kappa: String,
    n_samples: usize,
    n: u64,
    k: u64,
    m: u32,
    exact_model: Option<PathBuf>,
) -> Result<(), Error> {
    let (field, regions, hash) = load_field(&field_spec)?;
    let dyn_spec = load_dynamics(dynamics.as_ref(), dt, max_time, common.seed)?;
    let kappa = parse_kappa(&kappa)?;
    let q = MomentQuery::new(n, k, m).with_rel_tol(common.tol);

    // asymptotic column from the field's geodesic length
    let geo = effective_length_with_order(&field, &regions, 2)?;
    let spec = AsymptoticSpec { power: m, ..geo };
    let asym = extreme_moment_asymptotic(&spec, n)?;

    let samples = simulate_fpt(&field, &regions, &dyn_spec, kappa, n_samples)?;
    let est = estimate_extreme_moment(&samples, &q)?;

    let exact = match &exact_model {
        Some(p) => {
            let model = SurvivalModel::from_json(&fs::read_to_string(p)?)?;
            Some(extreme_moment(&model, &q)?.value)
        }
        None => None,
    };

    fs::create_dir_all(&common.out)?;
    let mut csv = String::from("N,k,m,mc_estimate,mc_se,exact_quad,asymptote,mc_vs_exact_ok,mc_over_asymptote\n");
    let exact_col = exact.map_or(String::new(), |v| format!("{v}"));
    let ok_col = exact.map_or(String::new(), |v| {
        if (est.value - v).abs() <= 3.0 * est.std_error { "1".into() } else { "0".into() }
    });
    csv.push_str(&format!(
        "{n},{k},{m},{},{},{},{},{},{}\n",
        est.value,
        est.std_error,
        exact_col,
        asym,
        ok_col,
        est.value / asym
    ));
    fs::write(common.out.join("compare.csv"), csv)?;
    write_manifest(
        &common.out,
        serde_json::json!({
            "command": "compare",
            "field": { "spec": field_spec, "sha256": hash },
            "exact_model": exact_model,
            "N": n, "k": k, "m": m,
            "kappa": if kappa.is_infinite() { "inf".to_string() } else { kappa.to_string() },
            "n_samples": n_samples,
            "geodesic_length": spec.effective_length,
            "seed": common.seed,
            "tol": common.tol,
            "dt": dyn_spec.dt,
            "max_time": dyn_spec.max_time,
        }),
    )?;
    println!(
        "MC {} +- {} | exact {} | asymptote {asym}",
        est.value,
        est.std_error,
        exact.map_or("n/a".into(), |v| v.to_string())
    );
    Ok(())
}
