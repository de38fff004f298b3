//! `okb`: configuration-driven experiments over `okounkov-core`.
//!
//! Every subcommand resolves a typed config (file, then flags), runs, and writes
//! `<command>.json`, CSV tables and SVG plots into the output directory.

pub mod config;
pub mod output;
pub mod run;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use okounkov_core::verify::Profile;
use serde_json::json;

use config::{load_weight, ExperimentConfig};
use output::write_json;
use svg::PlotKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] okounkov_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("acceptance failure: criteria {0:?}")]
    Acceptance(Vec<u32>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use okounkov_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Core(E::Input(_) | E::PolytopeMismatch | E::NotGroupGenerating { .. } | E::Domain { .. }) => 2,
            Self::Core(_) | Self::Io(_) => 3,
            Self::Acceptance(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "okb", version, about = "Okounkov bodies, Chebyshev transforms and relative energies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_profile)]
    pub profile: Option<Profile>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip SVG plots.
    #[arg(long)]
    pub no_svg: bool,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Args)]
pub struct Weights {
    /// Weight file for ψ.
    #[arg(long)]
    pub psi: Option<PathBuf>,
    /// Weight file for φ.
    #[arg(long)]
    pub phi: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Okounkov body and volume of a graded semigroup.
    Okounkov {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// Convex envelope of a subadditive table and ray monotonicity.
    Envelope {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// Relative energy of two toric weights by the Legendre and Monge–Ampère routes.
    ToricEnergy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        weights: Weights,
    },
    /// Ladder of L_k against the Legendre-route energy.
    LkLadder {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        weights: Weights,
        /// Comma-separated levels.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<u32>>,
    },
    /// Chebyshev constant and transfinite diameter of a compact set in the plane.
    Cheb1d {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Directional Chebyshev constant of a compact set in C².
    Directional {
        #[command(flatten)]
        common: Common,
        /// Comma-separated total degrees.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
    },
    /// Chebyshev transform on the zero fiber against the restricted weight.
    ZeroFiber {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        weight: Option<PathBuf>,
    },
    /// Finite-difference check of the energy derivative.
    DerivativeCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        weights: Weights,
    },
    /// Acceptance battery.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        tolerance_scale: Option<f64>,
        #[arg(long, value_delimiter = ',', hide = true)]
        criteria: Option<Vec<u32>>,
    },
    /// Render a ladder or field CSV table as SVG.
    Plot {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Output file; defaults to the table path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        title: Option<String>,
    },
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    match s {
        "quick" => Ok(Profile::Quick),
        "full" => Ok(Profile::Full),
        _ => Err(format!("unknown profile {s}; use quick or full")),
    }
}

fn resolve(name: &str, common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p, name)?,
        None => ExperimentConfig::default_for(name)?,
    };
    let run = cfg.run_settings_mut();
    if let Some(o) = &common.out {
        run.out = o.clone();
    }
    if let Some(p) = common.profile {
        run.profile = p;
    }
    if let Some(s) = common.seed {
        run.seed = s;
    }
    if common.no_svg {
        run.svg = false;
    }
    Ok(cfg)
}

fn set_weights(psi: &mut okounkov_core::toric::WeightSpec, phi: &mut okounkov_core::toric::WeightSpec, w: &Weights) -> Result<(), CliError> {
    if let Some(p) = &w.psi {
        *psi = load_weight(p)?;
    }
    if let Some(p) = &w.phi {
        *phi = load_weight(p)?;
    }
    Ok(())
}

/// Resolves the config of an experiment subcommand; `None` for `plot`.
pub fn experiment_config(cmd: &Command) -> Result<Option<(ExperimentConfig, bool)>, CliError> {
    use ExperimentConfig as X;
    let (name, common) = match cmd {
        Command::Okounkov { common, .. } => ("okounkov", common),
        Command::Envelope { common, .. } => ("envelope", common),
        Command::ToricEnergy { common, .. } => ("toric-energy", common),
        Command::LkLadder { common, .. } => ("lk-ladder", common),
        Command::Cheb1d { common, .. } => ("cheb1d", common),
        Command::Directional { common, .. } => ("directional", common),
        Command::ZeroFiber { common, .. } => ("zero-fiber", common),
        Command::DerivativeCheck { common, .. } => ("derivative-check", common),
        Command::Verify { common, .. } => ("verify", common),
        Command::Plot { .. } => return Ok(None),
    };
    let mut cfg = resolve(name, common)?;
    match (cmd, &mut cfg) {
        (Command::Okounkov { k_max: Some(k), .. }, X::Okounkov(c)) => c.k_max = *k,
        (Command::Envelope { k_max: Some(k), .. }, X::Envelope(c)) => c.k_max = *k,
        (Command::ToricEnergy { weights, .. }, X::ToricEnergy(c)) => set_weights(&mut c.psi, &mut c.phi, weights)?,
        (Command::LkLadder { weights, k, .. }, X::LkLadder(c)) => {
            set_weights(&mut c.psi, &mut c.phi, weights)?;
            if let Some(k) = k {
                c.k = k.clone();
            }
        }
        (Command::Cheb1d { k_max: Some(k), .. }, X::Cheb1d(c)) => c.k_max = *k,
        (Command::Directional { k: Some(k), .. }, X::Directional(c)) => c.degrees = k.clone(),
        (Command::ZeroFiber { weight: Some(w), .. }, X::ZeroFiber(c)) => c.weight = load_weight(w)?,
        (Command::DerivativeCheck { weights, .. }, X::DerivativeCheck(c)) => set_weights(&mut c.psi, &mut c.phi, weights)?,
        (Command::Verify { tolerance_scale, criteria, .. }, X::Verify(c)) => {
            if let Some(t) = tolerance_scale {
                c.tolerance_scale = *t;
            }
            if let Some(v) = criteria {
                c.criteria = v.clone();
            }
        }
        _ => {}
    }
    Ok(Some((cfg, common.print_config)))
}

fn io(p: &std::path::Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", p.display()))
}

/// Runs a resolved experiment and writes its files; returns the paths written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = cfg.run_settings().out.clone();
    fs::create_dir_all(&dir).map_err(io(&dir))?;
    let command = cfg.command();
    let mut report = json!({
        "command": command,
        "version": { "okb": env!("CARGO_PKG_VERSION"), "okounkov_core": okounkov_core::VERSION },
        "config_hash": cfg.hash(),
        "config": cfg,
    });
    let report_path = dir.join(format!("{command}.json"));
    let outcome = match run::execute(cfg) {
        Ok(o) => o,
        Err(e) => {
            let err = CliError::Core(e);
            let status = if err.exit_code() == 2 { "input_error" } else { "numerical_failure" };
            report["status"] = status.into();
            report["error"] = err.to_string().into();
            report["result"] = serde_json::Value::Null;
            write_json(&report_path, &report)?;
            return Err(err);
        }
    };
    let mut written = Vec::new();
    for t in &outcome.tables {
        written.push(t.write(&dir)?);
    }
    for (name, doc) in &outcome.documents {
        let p = dir.join(name);
        write_json(&p, doc)?;
        written.push(p);
    }
    if cfg.run_settings().svg {
        for (name, kind, title) in &outcome.plots {
            let table = outcome.tables.iter().find(|t| &t.name == name).expect("plotted table exists");
            // Plots of degenerate tables are skipped rather than failing the run.
            if let Ok(s) = svg::plot(table, *kind, title) {
                let p = dir.join(name.replace(".csv", ".svg"));
                fs::write(&p, s).map_err(io(&p))?;
                written.push(p);
            }
        }
    }
    let passed = outcome.passed.unwrap_or(true);
    report["status"] = if passed { "ok" } else { "acceptance_failure" }.into();
    report["error"] = serde_json::Value::Null;
    report["files"] = written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>().into();
    report["result"] = outcome.result;
    write_json(&report_path, &report)?;
    written.push(report_path);
    if let Some(lines) = report["result"]["summary"].as_array() {
        for l in lines {
            println!("{}", l.as_str().unwrap_or_default());
        }
    }
    if !passed {
        let failures: Vec<u32> = serde_json::from_value(report["result"]["failures"].clone()).unwrap_or_default();
        return Err(CliError::Acceptance(failures));
    }
    Ok(written)
}

fn plot_command(table: &std::path::Path, kind: PlotKind, out: Option<&std::path::Path>, title: Option<&str>) -> Result<PathBuf, CliError> {
    let t = output::read_table(table)?;
    let title = title.map(String::from).unwrap_or_else(|| t.name.clone());
    let svg = svg::plot(&t, kind, &title)?;
    let path = out.map(PathBuf::from).unwrap_or_else(|| table.with_extension("svg"));
    fs::write(&path, svg).map_err(io(&path))?;
    Ok(path)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Command::Plot { table, kind, out, title } = &cli.command {
        let p = plot_command(table, *kind, out.as_deref(), title.as_deref())?;
        println!("wrote {}", p.display());
        return Ok(());
    }
    let (cfg, print) = experiment_config(&cli.command)?.expect("experiment command");
    if print {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return Ok(());
    }
    for p in run_experiment(&cfg)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("okb: {e}");
            e.exit_code()
        }
    }
}
