//! Command-line front end: JSON model configurations in, CSV/JSON artifacts
//! out. All outputs are pure functions of (config, flags); reruns are
//! byte-identical. Exit codes: 0 success / all checks pass, 1 validation
//! failure, 2 numerical explosion, 64 config error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::affine::{build_generator, AffineParams, ExtendedState};
use crate::error::ModelError;
use crate::factors::{simulate_z, SimConfig, SimplexFactorParams};
use crate::hjm_grid::{
    simulate_grid, simulate_toy_rate, spde_flow, CurveGrid, GridSimOptions, Psi0, ToyParams,
    VolSpec,
};
use crate::numerics::SquareMatrix;
use crate::validate::{
    affine_initial_curve, drift_condition_check, positivity_scan, render_table, theorem_battery,
    ValidationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_EXPLOSION: i32 = 2;
pub const EXIT_CONFIG: i32 = 64;

/// Environment variable capping the rayon thread pool.
pub const THREADS_ENV_VAR: &str = "DISCOUNT_TS_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Model(ModelError::Explosion { .. }) => EXIT_EXPLOSION,
            CliError::Model(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_CONFIG,
        }
    }
}

/// Top-level configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub model: ModelSpec,
    pub sim: SimConfig,
    #[serde(default)]
    pub output: OutputBlock,
    /// Maturity grid for `curve` (offsets from t, in years).
    #[serde(default)]
    pub tau_grid: Option<TauGrid>,
    /// Evaluation times for `spde`.
    #[serde(default)]
    pub spde: Option<SpdeBlock>,
    /// Grid-check controls for `validate`.
    #[serde(default)]
    pub validate: Option<ValidateBlock>,
}

/// Model kind plus its parameter block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model_kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Affine {
        gamma0: f64,
        gamma: Vec<f64>,
        b: Vec<f64>,
        /// Row-major d x d matrix.
        beta: Vec<Vec<f64>>,
        state: Vec<f64>,
    },
    SimplexFactors {
        kappa: Vec<f64>,
        theta: Vec<f64>,
        q: Vec<f64>,
        #[serde(default)]
        gamma0: f64,
        z0: Vec<f64>,
    },
    Toy {
        theta: f64,
        #[serde(default)]
        vol: f64,
        r0: f64,
    },
    Grid {
        initial_curve: CurveSpec,
        vol: VolSpec,
        #[serde(default)]
        market_price_of_risk: Option<f64>,
        #[serde(default)]
        h_max: Option<f64>,
        #[serde(default)]
        zero_drift: bool,
        /// Number of lattice nodes (maturities 0, dt, ..., (nodes-1) dt).
        nodes: usize,
    },
}

/// Initial curve for grid/spde runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    /// `scale * e^{-rate x}`
    Exponential { scale: f64, rate: f64 },
    Constant { level: f64 },
    Samples {
        maturities: Vec<f64>,
        h_values: Vec<f64>,
    },
}

impl CurveSpec {
    fn psi0(&self) -> Result<Psi0, CliError> {
        Ok(match self {
            CurveSpec::Exponential { scale, rate } => Psi0::exponential(*scale, *rate)?,
            CurveSpec::Constant { level } => Psi0::constant(*level)?,
            CurveSpec::Samples {
                maturities,
                h_values,
            } => Psi0::from_grid(&CurveGrid::new(0.0, maturities.clone(), h_values.clone())?)?,
        })
    }

    fn sample_lattice(&self, dt: f64, nodes: usize) -> Result<CurveGrid, CliError> {
        Ok(match self {
            CurveSpec::Exponential { scale, rate } => {
                let (s, r) = (*scale, *rate);
                CurveGrid::uniform(0.0, dt, nodes, |x| s * (-r * x).exp())?
            }
            CurveSpec::Constant { level } => {
                let c = *level;
                CurveGrid::uniform(0.0, dt, nodes, |_| c)?
            }
            CurveSpec::Samples {
                maturities,
                h_values,
            } => CurveGrid::new(0.0, maturities.clone(), h_values.clone())?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauGrid {
    /// Explicit list of offsets.
    Explicit(Vec<f64>),
    /// Uniform grid `0, step, ..., max`.
    Uniform { max: f64, step: f64 },
}

impl TauGrid {
    fn taus(&self) -> Result<Vec<f64>, CliError> {
        match self {
            TauGrid::Explicit(v) => {
                if v.is_empty() {
                    return Err(CliError::Config("tau_grid must not be empty".into()));
                }
                Ok(v.clone())
            }
            TauGrid::Uniform { max, step } => {
                if *step <= 0.0 || *max < 0.0 {
                    return Err(CliError::Config(
                        "tau_grid needs step > 0 and max >= 0".into(),
                    ));
                }
                let n = (max / step).round() as usize;
                Ok((0..=n).map(|k| k as f64 * step).collect())
            }
        }
    }
}

fn default_tau_grid() -> TauGrid {
    TauGrid::Uniform {
        max: 30.0,
        step: 0.25,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpdeBlock {
    pub times: Vec<f64>,
    /// Curve offsets x to tabulate; defaults to the sim lattice.
    #[serde(default)]
    pub x_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateBlock {
    #[serde(default = "default_grid_dt")]
    pub grid_dt: f64,
    #[serde(default = "default_grid_steps")]
    pub grid_steps: usize,
    #[serde(default = "default_grid_paths")]
    pub grid_paths: usize,
    #[serde(default = "default_grid_vol")]
    pub grid_vol: f64,
    /// Diagnostic probe: simulate the grid ensemble without the
    /// no-arbitrage drift; the drift check must then fail.
    #[serde(default)]
    pub zero_drift: bool,
}

fn default_grid_dt() -> f64 {
    0.02
}
fn default_grid_steps() -> usize {
    25
}
fn default_grid_paths() -> usize {
    4000
}
fn default_grid_vol() -> f64 {
    1e-4
}

impl Default for ValidateBlock {
    fn default() -> Self {
        Self {
            grid_dt: default_grid_dt(),
            grid_steps: default_grid_steps(),
            grid_paths: default_grid_paths(),
            grid_vol: default_grid_vol(),
            zero_drift: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputBlock {
    #[serde(default = "default_out_dir")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_out_dir() -> String {
    "out".to_string()
}

fn default_formats() -> Vec<String> {
    vec!["csv".to_string(), "json".to_string()]
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: default_out_dir(),
            formats: default_formats(),
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
}

pub fn load_config(path: &Path) -> Result<ModelConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
}

fn apply_overrides(cfg: &mut ModelConfig, ov: &Overrides) {
    if let Some(seed) = ov.seed {
        cfg.sim.seed = seed;
    }
    if let Some(paths) = ov.paths {
        cfg.sim.n_paths = paths;
    }
    if let Some(dt) = ov.dt {
        cfg.sim.dt = dt;
    }
    if let Some(out) = &ov.out {
        cfg.output.directory = out.display().to_string();
    }
}

fn out_dir(cfg: &ModelConfig) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(&cfg.output.directory);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn affine_from_spec(
    gamma0: f64,
    gamma: &[f64],
    b: &[f64],
    beta: &[Vec<f64>],
) -> Result<AffineParams, CliError> {
    let d = gamma.len();
    let mut flat = Vec::with_capacity(d * d);
    if beta.len() != d {
        return Err(CliError::Config(format!(
            "beta has {} rows for d = {d}",
            beta.len()
        )));
    }
    for row in beta {
        if row.len() != d {
            return Err(CliError::Config("beta must be square".into()));
        }
        flat.extend_from_slice(row);
    }
    Ok(AffineParams::new(
        gamma0,
        gamma.to_vec(),
        b.to_vec(),
        SquareMatrix::new(d, flat)?,
    )?)
}

/// Tabulates the term structure to `curve.csv`
/// (`tau,h,discount,bond,forward,short_rate`).
pub fn cmd_curve(cfg: &ModelConfig) -> Result<PathBuf, CliError> {
    let taus = cfg
        .tau_grid
        .clone()
        .unwrap_or_else(default_tau_grid)
        .taus()?;
    let mut csv = String::from("tau,h,discount,bond,forward,short_rate\n");
    match &cfg.model {
        ModelSpec::Toy { theta, vol, r0 } => {
            let toy = ToyParams::new(*theta, *vol)?;
            if !toy.rate_in_domain(*r0) {
                eprintln!(
                    "warning: r0 = {r0} outside the invariant band [0, {theta}]; curves still computed"
                );
            }
            for &tau in &taus {
                let h = toy.h(*r0, tau)?;
                let disc = toy.discount(*r0, tau)?;
                let bond = toy.bond(*r0, tau)?;
                let fwd = if bond > 0.0 {
                    h / bond
                } else {
                    return Err(CliError::Model(ModelError::DegenerateCurve(format!(
                        "toy bond price {bond} at tau = {tau}"
                    ))));
                };
                csv.push_str(&format!("{tau},{h},{disc},{bond},{fwd},{r0}\n"));
            }
        }
        ModelSpec::Affine {
            gamma0,
            gamma,
            b,
            beta,
            state,
        } => {
            let params = affine_from_spec(*gamma0, gamma, b, beta)?;
            let generator = build_generator(&params)?;
            let s = ExtendedState::new(state)?;
            let short_rate = generator.short_rate(&s)?;
            for &tau in &taus {
                let h = generator.h_value(tau, &s)?;
                let disc = generator.discount(tau, &s)?;
                let bond = generator.bond_price(tau, &s)?;
                let fwd = generator.forward_rate(tau, &s)?;
                csv.push_str(&format!("{tau},{h},{disc},{bond},{fwd},{short_rate}\n"));
            }
        }
        _ => {
            return Err(CliError::Config(
                "curve needs an affine or toy model config".into(),
            ))
        }
    }
    let dir = out_dir(cfg)?;
    let path = dir.join("curve.csv");
    write_atomic(&path, &csv)?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    model_kind: String,
    n_paths: usize,
    n_steps: usize,
    dt: f64,
    seed: u64,
    clamp_counts: Vec<u64>,
    clamp_fraction: f64,
    explosion: Option<ExplosionEvent>,
}

#[derive(Debug, Serialize)]
struct ExplosionEvent {
    time: f64,
    path: Option<usize>,
}

/// Runs the configured simulation; writes `paths.csv`
/// (`t,path_id,component,value`) and `summary.json`.
///
/// On explosion the summary (with the blow-up time) is still written and the
/// explosion error is returned so the caller exits with code 2.
pub fn cmd_simulate(cfg: &ModelConfig) -> Result<PathBuf, CliError> {
    let dir = out_dir(cfg)?;
    let want_csv = cfg.output.formats.iter().any(|f| f == "csv");
    let mut csv = String::from("t,path_id,component,value\n");
    let mut summary = SimulateSummary {
        model_kind: String::new(),
        n_paths: cfg.sim.n_paths,
        n_steps: cfg.sim.n_steps,
        dt: cfg.sim.dt,
        seed: cfg.sim.seed,
        clamp_counts: Vec::new(),
        clamp_fraction: 0.0,
        explosion: None,
    };

    let mut explosion: Option<ModelError> = None;
    match &cfg.model {
        ModelSpec::SimplexFactors {
            kappa,
            theta,
            q,
            gamma0,
            z0,
        } => {
            summary.model_kind = "simplex_factors".into();
            let p = SimplexFactorParams::new(kappa.clone(), theta.clone(), q.clone(), *gamma0)?;
            let bundle = simulate_z(&p, z0, &cfg.sim)?;
            summary.clamp_counts = bundle.clamp_counts.clone();
            summary.clamp_fraction = bundle.clamp_fraction();
            if want_csv {
                for path in 0..bundle.n_paths {
                    for (rec, t) in bundle.times().iter().enumerate() {
                        for (c, v) in bundle.state(path, rec).iter().enumerate() {
                            csv.push_str(&format!("{t},{path},{c},{v}\n"));
                        }
                    }
                }
            }
        }
        ModelSpec::Toy { theta, vol, r0 } => {
            summary.model_kind = "toy".into();
            let p = ToyParams::new(*theta, *vol)?;
            let bundle = simulate_toy_rate(&p, *r0, &cfg.sim)?;
            summary.clamp_counts = bundle.clamp_counts.clone();
            summary.clamp_fraction = bundle.clamp_fraction();
            if want_csv {
                for path in 0..bundle.n_paths {
                    for (rec, t) in bundle.times().iter().enumerate() {
                        csv.push_str(&format!("{t},{path},0,{}\n", bundle.state(path, rec)[0]));
                    }
                }
            }
        }
        ModelSpec::Grid {
            initial_curve,
            vol,
            market_price_of_risk,
            h_max,
            zero_drift,
            nodes,
        } => {
            summary.model_kind = "grid".into();
            let initial = initial_curve.sample_lattice(cfg.sim.dt, *nodes)?;
            let opts = GridSimOptions {
                h_max: h_max.unwrap_or(1e3),
                market_price_of_risk: *market_price_of_risk,
                zero_drift: *zero_drift,
            };
            match simulate_grid(&initial, vol, &opts, &cfg.sim) {
                Ok(ens) => {
                    if want_csv {
                        for path in 0..ens.n_paths {
                            for step in 0..=ens.n_steps {
                                let t = ens.time(step);
                                for node in step..ens.n_nodes() {
                                    csv.push_str(&format!(
                                        "{t},{path},{node},{}\n",
                                        ens.h(path, step, node)
                                    ));
                                }
                            }
                        }
                    }
                }
                Err(ModelError::Explosion { time, path }) => {
                    summary.explosion = Some(ExplosionEvent { time, path });
                    explosion = Some(ModelError::Explosion { time, path });
                }
                Err(e) => return Err(e.into()),
            }
        }
        ModelSpec::Affine { .. } => {
            return Err(CliError::Config(
                "simulate needs a simplex_factors, toy or grid model config".into(),
            ))
        }
    }

    let summary_path = dir.join("summary.json");
    write_atomic(
        &summary_path,
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    if let Some(err) = explosion {
        return Err(err.into());
    }
    if want_csv {
        write_atomic(&dir.join("paths.csv"), &csv)?;
    }
    Ok(summary_path)
}

/// Runs the full validation battery; writes `report.json` (runtime field
/// normalized to zero so reruns are byte-identical) and `report.txt`, and
/// returns the reports for exit-code decisions.
pub fn cmd_validate(cfg: &ModelConfig) -> Result<(Vec<ValidationReport>, PathBuf), CliError> {
    let (p, z0) = match &cfg.model {
        ModelSpec::SimplexFactors {
            kappa,
            theta,
            q,
            gamma0,
            z0,
        } => (
            SimplexFactorParams::new(kappa.clone(), theta.clone(), q.clone(), *gamma0)?,
            z0.clone(),
        ),
        _ => {
            return Err(CliError::Config(
                "validate needs a simplex_factors model config (the factor \
                 diffusion is what gets simulated)"
                    .into(),
            ))
        }
    };
    let sim = &cfg.sim;
    let horizon = sim.dt * sim.n_steps as f64;
    let mut reports = theorem_battery(&p, &z0, horizon, sim.dt, sim.n_paths, sim.seed)?;

    let vb = cfg.validate.clone().unwrap_or_default();
    if vb.grid_steps > 0 {
        let initial = affine_initial_curve(&p, &z0, vb.grid_dt, 2 * vb.grid_steps + 1)?;
        let opts = GridSimOptions {
            zero_drift: vb.zero_drift,
            ..Default::default()
        };
        let grid_cfg = SimConfig::new(vb.grid_dt, vb.grid_steps, vb.grid_paths, sim.seed);
        let vol = VolSpec::Constant { level: vb.grid_vol };
        let ens = simulate_grid(&initial, &vol, &opts, &grid_cfg)?;
        reports.push(drift_condition_check(&ens));
        reports.push(positivity_scan(&ens));
    }

    let dir = out_dir(cfg)?;
    let json_reports: Vec<ValidationReport> =
        reports.iter().map(|r| r.with_runtime_zeroed()).collect();
    let json_path = dir.join("report.json");
    write_atomic(
        &json_path,
        &serde_json::to_string_pretty(&json_reports).expect("reports serialize"),
    )?;
    write_atomic(&dir.join("report.txt"), &render_table(&reports))?;
    Ok((reports, json_path))
}

/// Tabulates the deterministic flow to `spde.csv` (`t,x,psi`).
pub fn cmd_spde(cfg: &ModelConfig) -> Result<PathBuf, CliError> {
    let (curve_spec, nodes) = match &cfg.model {
        ModelSpec::Grid {
            initial_curve,
            nodes,
            ..
        } => (initial_curve, *nodes),
        _ => return Err(CliError::Config("spde needs a grid model config".into())),
    };
    let spde = cfg
        .spde
        .clone()
        .ok_or_else(|| CliError::Config("spde needs an \"spde\": {\"times\": [...]} block".into()))?;
    let psi0 = curve_spec.psi0()?;
    let x_max = spde
        .x_max
        .unwrap_or(cfg.sim.dt * nodes.saturating_sub(1) as f64);
    let n_x = ((x_max / cfg.sim.dt).round() as usize).max(1);
    let mut csv = String::from("t,x,psi\n");
    for &t in &spde.times {
        for k in 0..=n_x {
            let x = k as f64 * cfg.sim.dt;
            let psi = spde_flow(&psi0, t, x)?;
            csv.push_str(&format!("{t},{x},{psi}\n"));
        }
    }
    let dir = out_dir(cfg)?;
    let path = dir.join("spde.csv");
    write_atomic(&path, &csv)?;
    Ok(path)
}

/// Subcommand names accepted by `run`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Curve,
    Simulate,
    Validate,
    Spde,
}

/// Loads the config, applies flag overrides and dispatches; returns the
/// process exit code. Human-readable errors go to stderr.
pub fn run(command: Command, config_path: &Path, overrides: &Overrides) -> i32 {
    let mut cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    apply_overrides(&mut cfg, overrides);
    let result: Result<(), CliError> = match command {
        Command::Curve => cmd_curve(&cfg).map(|p| {
            println!("wrote {}", p.display());
        }),
        Command::Simulate => cmd_simulate(&cfg).map(|p| {
            println!("wrote {}", p.display());
        }),
        Command::Validate => match cmd_validate(&cfg) {
            Ok((reports, path)) => {
                print!("{}", render_table(&reports));
                println!("wrote {}", path.display());
                if reports.iter().all(|r| r.passed) {
                    Ok(())
                } else {
                    eprintln!("validation failed");
                    return EXIT_VALIDATION_FAILED;
                }
            }
            Err(e) => Err(e),
        },
        Command::Spde => cmd_spde(&cfg).map(|p| {
            println!("wrote {}", p.display());
        }),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
