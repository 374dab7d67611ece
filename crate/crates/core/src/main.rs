use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use coadjoint::config::RunConfig;
use coadjoint::diagnostics::{
    drift_series, run_with_casimirs, stability_probe, strong_order, OrderStudy, Trajectory,
};
use coadjoint::integrators::{Method, StepperConfig};
use coadjoint::models::Model;
use coadjoint::noise::{generate, TimeGrid, WienerPath};
use coadjoint::output::{
    write_compare, write_drift, write_file, write_manifest, write_meta, write_order_fit,
    write_stability, write_trajectory,
};
use coadjoint::{selftest, version_string, Error};

#[derive(Parser)]
#[command(name = "coadjoint", version, about = "Casimir-preserving stochastic Lie-Poisson integration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory.
    Run {
        #[command(flatten)]
        common: Common,
        /// Drive the run with increments exported by an earlier run.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Run several methods on the same Wiener path and compare Casimir drift.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated methods, e.g. `tmk,direct-im`.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Coupled-path strong-order study.
    Converge {
        #[command(flatten)]
        common: Common,
    },
    /// Step-size stability probe.
    Probe {
        #[command(flatten)]
        common: Common,
    },
    /// Structural self-checks.
    Selftest,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(match e {
                Error::Config(_) => 2,
                _ => 1,
            })
        }
    }
}

fn configure_threads() -> coadjoint::Result<()> {
    let Ok(v) = std::env::var("COADJOINT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("COADJOINT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn dispatch(command: Command) -> coadjoint::Result<ExitCode> {
    match command {
        Command::Run { common, replay } => cmd_run(&common, replay),
        Command::Compare { common, methods, replay } => cmd_compare(&common, methods, replay),
        Command::Converge { common } => cmd_converge(&common),
        Command::Probe { common } => cmd_probe(&common),
        Command::Selftest => Ok(cmd_selftest()),
    }
}

fn load(common: &Common, replay: Option<PathBuf>) -> coadjoint::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.run.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.run.output_dir = o.clone();
    }
    if replay.is_some() {
        cfg.run.replay_path = replay;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn build(cfg: &RunConfig) -> coadjoint::Result<Model> {
    cfg.build_model().map_err(|e| Error::Config(e.to_string()))
}

fn out_dir(cfg: &RunConfig) -> coadjoint::Result<&Path> {
    let dir = cfg.run.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn wiener_path(cfg: &RunConfig, model: &Model, grid: &TimeGrid) -> coadjoint::Result<WienerPath> {
    match &cfg.run.replay_path {
        Some(p) => {
            let f = File::open(p).map_err(|e| Error::Config(format!("cannot open replay {}: {e}", p.display())))?;
            let path = WienerPath::read_csv(BufReader::new(f), grid.dt)?;
            path.check_grid(grid, model.hamiltonian.drivers())
                .map_err(|e| Error::Config(format!("replay file does not fit the run: {e}")))?;
            Ok(path)
        }
        None => Ok(generate(cfg.run.seed, model.hamiltonian.drivers(), grid)),
    }
}

fn max_drift(traj: &Trajectory) -> Vec<(String, String)> {
    drift_series(traj)
        .into_iter()
        .map(|d| (format!("max_drift {}", d.name), d.max().to_string()))
        .collect()
}

fn cmd_run(common: &Common, replay: Option<PathBuf>) -> coadjoint::Result<ExitCode> {
    let cfg = load(common, replay)?;
    let model = build(&cfg)?;
    let grid = TimeGrid::covering(cfg.run.dt, cfg.run.t_final)?;
    let path = wiener_path(&cfg, &model, &grid)?;
    let stepper = cfg.stepper()?;
    info!("running {} with {} for {} steps", model.name, stepper.method, grid.steps);
    let traj = run_with_casimirs(
        &model.algebra,
        &model.hamiltonian,
        &model.casimirs,
        &model.initial,
        &grid,
        &path,
        &stepper,
    )?;

    let dir = out_dir(&cfg)?;
    let every = cfg.run.record_every;
    write_file(dir, "trajectory.csv", |w| write_trajectory(w, &traj, &model.coordinate_names, every))?;
    write_file(dir, "meta.csv", |w| write_meta(w, &traj))?;
    write_file(dir, "drift.csv", |w| write_drift(w, &traj, every))?;
    write_file(dir, "increments.csv", |w| path.write_csv(w))?;
    let mut extra = vec![
        ("seed".to_string(), cfg.run.seed.to_string()),
        ("steps".to_string(), grid.steps.to_string()),
    ];
    extra.extend(max_drift(&traj));
    write_manifest(dir, &cfg, &version_string(), "run", &extra)?;
    for (k, v) in &extra[2..] {
        println!("{k} = {v}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(
    common: &Common,
    methods: Option<Vec<String>>,
    replay: Option<PathBuf>,
) -> coadjoint::Result<ExitCode> {
    let mut cfg = load(common, replay)?;
    if let Some(m) = methods {
        cfg.compare.methods = m;
    }
    let methods: Vec<Method> = cfg.compare_methods().map_err(|e| Error::Config(e.to_string()))?;
    if methods.is_empty() {
        return Err(Error::Config("compare needs at least one method".into()));
    }
    let model = build(&cfg)?;
    let grid = TimeGrid::covering(cfg.run.dt, cfg.run.t_final)?;
    let path = wiener_path(&cfg, &model, &grid)?;
    let base = cfg.stepper()?;

    let mut runs = Vec::with_capacity(methods.len());
    let mut times = Vec::new();
    let mut extra = vec![("seed".to_string(), cfg.run.seed.to_string())];
    for method in methods {
        let stepper = StepperConfig { method, ..base.clone() };
        let traj = run_with_casimirs(
            &model.algebra,
            &model.hamiltonian,
            &model.casimirs,
            &model.initial,
            &grid,
            &path,
            &stepper,
        )?;
        for (k, v) in max_drift(&traj) {
            extra.push((format!("{method} {k}"), v));
        }
        times = traj.times.clone();
        runs.push((method.to_string(), drift_series(&traj)));
    }

    let dir = out_dir(&cfg)?;
    write_file(dir, "compare.csv", |w| write_compare(w, &times, &runs, cfg.run.record_every))?;
    write_file(dir, "increments.csv", |w| path.write_csv(w))?;
    write_manifest(dir, &cfg, &version_string(), "compare", &extra)?;
    for (k, v) in &extra[1..] {
        println!("{k} = {v}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_converge(common: &Common) -> coadjoint::Result<ExitCode> {
    let cfg = load(common, None)?;
    let model = build(&cfg)?;
    let c = &cfg.converge;
    let study = OrderStudy {
        base_dt: c.base_dt,
        t_final: c.t_final,
        levels: c.levels.clone(),
        reference_level: c.reference_level,
        seeds: (0..c.n_seeds as u64).map(|i| cfg.run.seed.wrapping_add(i)).collect(),
    };
    let ham = if c.deterministic {
        model.hamiltonian.without_noise()
    } else {
        model.hamiltonian.clone()
    };
    let fit = strong_order(&model.algebra, &ham, &model.initial, &study, &cfg.stepper()?)?;
    let dir = out_dir(&cfg)?;
    write_file(dir, "order_fit.csv", |w| write_order_fit(w, &fit))?;
    let extra = vec![
        ("slope".to_string(), fit.slope.to_string()),
        ("intercept".to_string(), fit.intercept.to_string()),
        ("samples".to_string(), fit.n_samples.to_string()),
    ];
    write_manifest(dir, &cfg, &version_string(), "converge", &extra)?;
    println!("slope = {} ({} samples)", fit.slope, fit.n_samples);
    Ok(ExitCode::SUCCESS)
}

fn cmd_probe(common: &Common) -> coadjoint::Result<ExitCode> {
    let cfg = load(common, None)?;
    let model = build(&cfg)?;
    let report = stability_probe(
        &model.algebra,
        &model.hamiltonian,
        &model.initial,
        &cfg.probe.dts,
        cfg.probe.horizon,
        cfg.run.seed,
        &cfg.stepper()?,
    )?;
    let dir = out_dir(&cfg)?;
    write_file(dir, "stability.csv", |w| write_stability(w, &report))?;
    let largest = report
        .largest_stable()
        .map_or_else(|| "none".to_string(), |d| d.to_string());
    write_manifest(
        dir,
        &cfg,
        &version_string(),
        "probe",
        &[("largest_stable_dt".to_string(), largest.clone())],
    )?;
    for (dt, v) in &report.verdicts {
        println!("dt = {dt}: {}", v.as_str());
    }
    println!("largest stable dt = {largest}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest() -> ExitCode {
    let checks = selftest::run_all();
    let mut failed = 0;
    for c in &checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
