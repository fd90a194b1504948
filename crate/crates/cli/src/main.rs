//! `decoh`: evaluate, sweep, simulate and fit bremsstrahlung decoherence.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use decoh_core::constants::ConstantSet;
use decoh_core::decoherence::{decoherence, Channel};
use decoh_core::inference::{
    fit_power_law, generate_dataset, FitMode, GenerationMode, VisibilityDataset, VisibilityRow,
};
use decoh_core::io::{csv_string, json_string, read_csv};
use decoh_core::regime::validate;
use decoh_core::simulator::{sample_events, simulate, FringeModel, ScreenGeometry, SimulationSetup};
use decoh_core::sweep::{log_space, run_scenarios, run_sweep, ChannelSelect, SweepSpec};
use serde::Serialize;
use serde_json::json;

use config::{ExperimentArgs, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl From<decoh_core::Error> for CliError {
    fn from(e: decoh_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "decoh", version, about = "Bremsstrahlung decoherence of matter-wave superpositions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    constants: Option<ConstantSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decoherence factor for a single configuration.
    Gamma {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value = "both")]
        channel: ChannelSelect,
    },
    /// Semi-classical validity checks for a configuration.
    Validate {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// ln Γ over a (mass, β) grid, with frontier masses.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Also write the frontier table as CSV.
        #[arg(long)]
        frontier_out: Option<PathBuf>,
    },
    /// Gravitational exponent for the bundled reference masses.
    Scenarios {
        #[arg(long)]
        c_grav: Option<f64>,
    },
    /// Monte Carlo detection events on the screen.
    Simulate(SimulateArgs),
    /// Synthetic visibility dataset over a (mass, β) grid.
    Generate {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "gravitational")]
        channel: Channel,
        /// Monte Carlo events per point; 0 gives noiseless analytic data.
        #[arg(long, default_value_t = 0)]
        n: usize,
    },
    /// Power-law fit of a visibility dataset and ħ estimate.
    Fit {
        /// Dataset CSV with columns m_kg,beta,gamma,gamma_se,n_events.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "free")]
        mode: FitKind,
        #[arg(long, default_value_t = 2.0)]
        mass_exponent: f64,
        #[arg(long, default_value_t = 4.0)]
        beta_exponent: f64,
        /// Model constant C″, held fixed because it is degenerate with ħ.
        #[arg(long)]
        c_grav: Option<f64>,
    },
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    #[arg(long)]
    m_min: Option<f64>,
    #[arg(long)]
    m_max: Option<f64>,
    #[arg(long)]
    m_points: Option<usize>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    beta_points: Option<usize>,
    #[arg(long)]
    sweep_channel: Option<ChannelSelect>,
    /// Frontier threshold on |ln Γ_G|; repeatable.
    #[arg(long = "threshold")]
    thresholds: Vec<f64>,
}

impl GridArgs {
    /// Grid from flags, falling back to the config's sweep section, then to
    /// 10⁻²⁰..10⁻⁶ kg × 10⁻³..0.9 at 64 points each.
    fn resolve(&self, base: Option<&SweepSpec>) -> SweepSpec {
        let m_flags = self.m_min.is_some() || self.m_max.is_some() || self.m_points.is_some();
        let b_flags = self.beta_min.is_some() || self.beta_max.is_some() || self.beta_points.is_some();
        let m_grid = match base {
            Some(b) if !m_flags => b.m_grid.clone(),
            _ => log_space(
                self.m_min.unwrap_or(1e-20),
                self.m_max.unwrap_or(1e-6),
                self.m_points.unwrap_or(64),
            ),
        };
        let beta_grid = match base {
            Some(b) if !b_flags => b.beta_grid.clone(),
            _ => log_space(
                self.beta_min.unwrap_or(1e-3),
                self.beta_max.unwrap_or(0.9),
                self.beta_points.unwrap_or(64),
            ),
        };
        let channel = self
            .sweep_channel
            .or(base.map(|b| b.channel))
            .unwrap_or(ChannelSelect::Both);
        let thresholds = if !self.thresholds.is_empty() {
            self.thresholds.clone()
        } else {
            base.map(|b| b.thresholds.clone()).unwrap_or_else(|| vec![0.1, 1.0])
        };
        SweepSpec { m_grid, beta_grid, channel, thresholds }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FitKind {
    Free,
    FixedMass,
    Fixed,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Simulate a bare decoherence factor on a unit-spacing fringe instead
    /// of a physical configuration.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value = "gravitational")]
    channel: Channel,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long)]
    slit_separation_m: Option<f64>,
    #[arg(long)]
    screen_distance_m: Option<f64>,
    #[arg(long)]
    screen_halfwidth_m: Option<f64>,
    /// Screen half-width in fringe spacings, used when no width is given.
    #[arg(long, default_value_t = 5.0)]
    halfwidth_fringes: f64,
    #[arg(long)]
    phase_rad: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Trough window ε in metres.
    #[arg(long)]
    window_m: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Events CSV (x_m,k,coherent).
    #[arg(long)]
    events_out: Option<PathBuf>,
    /// Run even when the regime checks fail.
    #[arg(long)]
    allow_invalid_regime: bool,
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("writing {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("writing stdout: {e}"))),
    }
}

/// Resolved configuration on stderr, for outputs that cannot embed it.
fn echo<T: Serialize>(cfg: &T) -> CliResult {
    eprintln!("resolved config: {}", serde_json::to_string(cfg).map_err(json_err)?);
    Ok(())
}

fn json_err(e: serde_json::Error) -> CliError {
    CliError::Numerical(format!("serialising output: {e}"))
}

fn reject_table(format: Format, what: &str) -> CliResult {
    if format == Format::Table {
        return Err(CliError::Input(format!("{what} output supports csv or json")));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    let common = cli.common;
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(c) = common.constants {
        cfg.constants = c;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let out = common.out.as_deref();

    match cli.command {
        Command::Gamma { exp, channel } => {
            exp.apply(&mut cfg);
            let k = cfg.physical_constants();
            cfg.experiment.validate(&k)?;
            let results = channel
                .channels()
                .iter()
                .map(|&ch| decoherence(&cfg.experiment, &k, ch))
                .collect::<decoh_core::Result<Vec<_>>>()?;
            for w in cfg.experiment.warnings(&k) {
                eprintln!("warning: {w}");
            }
            match common.format.unwrap_or(Format::Json) {
                Format::Csv => {
                    echo(&cfg)?;
                    emit(out, &csv_string(&results)?)
                }
                f => {
                    reject_table(f, "gamma")?;
                    let report = validate(&cfg.experiment, &k, &cfg.validator);
                    let doc = json!({
                        "config": cfg,
                        "beta": cfg.experiment.beta(&k),
                        "results": results,
                        "regime": report,
                        "warnings": cfg.experiment.warnings(&k),
                    });
                    emit(out, &json_string(&doc)?)
                }
            }
        }
        Command::Validate { exp } => {
            exp.apply(&mut cfg);
            let k = cfg.physical_constants();
            cfg.experiment.validate(&k)?;
            let report = validate(&cfg.experiment, &k, &cfg.validator);
            match common.format.unwrap_or(Format::Table) {
                Format::Table => {
                    echo(&cfg)?;
                    emit(out, &report.to_table())
                }
                Format::Csv => {
                    echo(&cfg)?;
                    emit(out, &csv_string(&report.checks)?)
                }
                Format::Json => emit(out, &json_string(&json!({ "config": cfg, "report": report }))?),
            }
        }
        Command::Sweep { exp, grid, frontier_out } => {
            exp.apply(&mut cfg);
            let k = cfg.physical_constants();
            cfg.experiment.validate(&k)?;
            let spec = grid.resolve(cfg.sweep.as_ref());
            cfg.sweep = Some(spec.clone());
            let table = run_sweep(&spec, &cfg.experiment, &k, &cfg.validator)?;
            if let Some(p) = frontier_out {
                emit(Some(&p), &csv_string(&table.frontier)?)?;
            }
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    echo(&cfg)?;
                    emit(out, &csv_string(&table.rows)?)
                }
                f => {
                    reject_table(f, "sweep")?;
                    emit(out, &json_string(&json!({ "config": cfg, "table": table }))?)
                }
            }
        }
        Command::Scenarios { c_grav } => {
            let k = cfg.physical_constants();
            let c_grav = c_grav.unwrap_or(cfg.experiment.model.c_grav);
            let rows = run_scenarios(&k, c_grav)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    echo(&json!({ "constants": cfg.constants, "c_grav": c_grav }))?;
                    emit(out, &csv_string(&rows)?)
                }
                f => {
                    reject_table(f, "scenarios")?;
                    let doc = json!({ "constants": cfg.constants, "c_grav": c_grav, "scenarios": rows });
                    emit(out, &json_string(&doc)?)
                }
            }
        }
        Command::Simulate(args) => simulate_cmd(args, cfg, common.format, out),
        Command::Generate { exp, grid, channel, n } => {
            exp.apply(&mut cfg);
            let k = cfg.physical_constants();
            cfg.experiment.validate(&k)?;
            let spec = grid.resolve(cfg.sweep.as_ref());
            spec.validate()?;
            cfg.sweep = Some(spec.clone());
            let points: Vec<(f64, f64)> = spec
                .m_grid
                .iter()
                .flat_map(|&m| spec.beta_grid.iter().map(move |&b| (m, b)))
                .collect();
            let mode = if n == 0 { GenerationMode::Analytic } else { GenerationMode::MonteCarlo };
            let data = generate_dataset(&points, &cfg.experiment, channel, n, cfg.seed, mode, &k, &cfg.simulation)?;
            eprintln!(
                "{} rows kept, {} dropped (mode {:?}, seed {})",
                data.dataset.rows.len(),
                data.dropped.len(),
                mode,
                cfg.seed
            );
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    echo(&cfg)?;
                    emit(out, &csv_string(&data.dataset.rows)?)
                }
                f => {
                    reject_table(f, "generate")?;
                    emit(out, &json_string(&json!({ "config": cfg, "data": data }))?)
                }
            }
        }
        Command::Fit { data, mode, mass_exponent, beta_exponent, c_grav } => {
            let file = std::fs::File::open(&data)
                .map_err(|e| CliError::Input(format!("opening {}: {e}", data.display())))?;
            let rows: Vec<VisibilityRow> = read_csv(file)?;
            let dataset = VisibilityDataset::new(rows)?;
            let k = cfg.physical_constants();
            let c_grav = c_grav.unwrap_or(cfg.experiment.model.c_grav);
            let fit_mode = match mode {
                FitKind::Free => FitMode::Free,
                FitKind::FixedMass => FitMode::FixedMassExponent { mass: mass_exponent },
                FitKind::Fixed => FitMode::FixedExponents { mass: mass_exponent, beta: beta_exponent },
            };
            if common.format.is_some_and(|f| f != Format::Json) {
                return Err(CliError::Input("fit output is json only".into()));
            }
            let fit = fit_power_law(&dataset, &k, c_grav, fit_mode)?;
            let doc = json!({
                "provenance": {
                    "data": data.display().to_string(),
                    "rows": dataset.rows.len(),
                    "seed": cfg.seed,
                    "constants": cfg.constants,
                    "hbar_true": k.hbar,
                },
                "fit": fit,
            });
            emit(out, &json_string(&doc)?)
        }
    }
}

fn simulate_cmd(args: SimulateArgs, mut cfg: RunConfig, format: Option<Format>, out: Option<&Path>) -> CliResult {
    args.exp.apply(&mut cfg);
    let k = cfg.physical_constants();
    if let Some(t) = args.threads {
        cfg.simulation.threads = Some(t);
    }
    if let Some(g) = args.grid_points {
        cfg.simulation.grid_points = g;
    }
    if args.window_m.is_some() {
        cfg.simulation.trough_window = args.window_m;
    }
    let setup = match args.gamma {
        Some(gamma) => {
            let spacing = 1.0;
            let halfwidth = args.screen_halfwidth_m.unwrap_or(args.halfwidth_fringes * spacing);
            let fringe = FringeModel::new(spacing, halfwidth, args.phase_rad.unwrap_or(0.0))?;
            SimulationSetup::from_gamma(gamma, fringe)?
        }
        None => {
            cfg.experiment.validate(&k)?;
            let mut geom = cfg.geometry.unwrap_or(ScreenGeometry {
                slit_separation_m: cfg.experiment.separation_m,
                screen_distance_m: 1.0,
                screen_halfwidth_m: 0.0,
                fringe_phase_rad: 0.0,
            });
            if let Some(v) = args.slit_separation_m {
                geom.slit_separation_m = v;
            }
            if let Some(v) = args.screen_distance_m {
                geom.screen_distance_m = v;
            }
            if let Some(v) = args.phase_rad {
                geom.fringe_phase_rad = v;
            }
            if let Some(v) = args.screen_halfwidth_m {
                geom.screen_halfwidth_m = v;
            } else if geom.screen_halfwidth_m <= 0.0 {
                let d = geom.fringe_spacing(cfg.experiment.de_broglie_wavelength(&k));
                geom.screen_halfwidth_m = args.halfwidth_fringes * d;
            }
            cfg.geometry = Some(geom);
            SimulationSetup::from_experiment(&cfg.experiment, &geom, &k, args.channel, args.allow_invalid_regime)?
        }
    };

    let need_events = args.events_out.is_some() || format == Some(Format::Csv);
    let (events, summary) = if need_events {
        let (e, s) = sample_events(&setup, args.n, cfg.seed, &cfg.simulation)?;
        (Some(e), s)
    } else {
        (None, simulate(&setup, args.n, cfg.seed, &cfg.simulation)?)
    };
    if let (Some(p), Some(ev)) = (&args.events_out, &events) {
        emit(Some(p), &csv_string(ev)?)?;
    }
    let doc = json!({ "config": cfg, "gamma_input": args.gamma, "setup": setup, "summary": summary });
    match format.unwrap_or(Format::Json) {
        Format::Csv => {
            eprintln!("{}", serde_json::to_string(&doc).map_err(json_err)?);
            emit(out, &csv_string(events.as_deref().unwrap_or_default())?)
        }
        f => {
            reject_table(f, "simulate")?;
            emit(out, &json_string(&doc)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
