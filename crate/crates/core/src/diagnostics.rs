//! Trajectories, invariant drift, strong-order estimation and stability probes.

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::SemimartingaleHamiltonian;
use crate::integrators::{integrate, step, StepperConfig};
use crate::lie::{DualVector, LieAlgebra};
use crate::models::CasimirSet;
use crate::noise::{generate, TimeGrid, WienerPath};

/// Initial Casimir values below this are reported as absolute drift.
pub const ABSOLUTE_DRIFT_BELOW: f64 = 1e-14;
const DRIFT_FLOOR: f64 = 1e-30;
/// State norm beyond which a probe run counts as diverged.
pub const DIVERGENCE_NORM: f64 = 1e8;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepMeta {
    pub chord_iters: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DualVector>,
    /// Drift Hamiltonian at each state.
    pub hamiltonian: Vec<f64>,
    pub casimir_names: Vec<String>,
    /// `casimirs[n][c]`: Casimir `c` at step `n`. Empty until attached.
    pub casimirs: Vec<Vec<f64>>,
    pub meta: Vec<StepMeta>,
}

impl Trajectory {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            hamiltonian: Vec::with_capacity(n),
            meta: Vec::with_capacity(n),
            ..Self::default()
        }
    }

    pub fn push(&mut self, t: f64, state: DualVector, h: f64, meta: StepMeta) {
        self.times.push(t);
        self.states.push(state);
        self.hamiltonian.push(h);
        self.meta.push(meta);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last_state(&self) -> Option<&DualVector> {
        self.states.last()
    }

    /// Evaluates every Casimir of `cs` along the trajectory.
    pub fn attach_casimirs(&mut self, cs: &CasimirSet) {
        self.casimir_names = cs.names();
        self.casimirs = self.states.iter().map(|s| cs.values(s)).collect();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftSeries {
    pub name: String,
    /// True when the initial value was ~0 and the series is absolute.
    pub absolute: bool,
    pub values: Vec<f64>,
}

impl DriftSeries {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

fn drift_of(name: &str, series: impl Iterator<Item = f64> + Clone) -> DriftSeries {
    let c0 = series.clone().next().unwrap_or(0.0);
    let absolute = c0.abs() < ABSOLUTE_DRIFT_BELOW;
    let scale = if absolute { 1.0 } else { c0.abs().max(DRIFT_FLOOR) };
    DriftSeries {
        name: name.to_string(),
        absolute,
        values: series.map(|c| (c - c0).abs() / scale).collect(),
    }
}

/// Drift of each attached Casimir against its initial value.
pub fn drift_series(traj: &Trajectory) -> Vec<DriftSeries> {
    traj.casimir_names
        .iter()
        .enumerate()
        .map(|(c, name)| drift_of(name, traj.casimirs.iter().map(move |row| row[c])))
        .collect()
}

/// Drift of the drift Hamiltonian against its initial value.
pub fn energy_drift(traj: &Trajectory) -> DriftSeries {
    drift_of("hamiltonian", traj.hamiltonian.iter().copied())
}

/// Least-squares fit of `ln error = slope · ln dt + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderFit {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub n_samples: usize,
}

impl OrderFit {
    pub fn fit(dts: Vec<f64>, errors: Vec<f64>, n_samples: usize) -> Result<Self> {
        if dts.len() != errors.len() || dts.len() < 2 {
            return Err(Error::InvalidArgument("an order fit needs at least two levels".into()));
        }
        if errors.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidArgument("strong errors must be positive".into()));
        }
        if dts.len() == 2 {
            warn!("order fit from a single pair of levels");
        }
        let x: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
        let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let slope = sxy / sxx;
        Ok(Self {
            dts,
            errors,
            slope,
            intercept: my - slope * mx,
            n_samples,
        })
    }
}

/// Setup for a coupled-path strong-error study.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderStudy {
    /// Coarsest step; level `k` uses `base_dt / 2ᵏ`.
    pub base_dt: f64,
    pub t_final: f64,
    pub levels: Vec<u32>,
    /// Must exceed every tested level by at least 2 (a factor 4 in dt).
    pub reference_level: u32,
    pub seeds: Vec<u64>,
}

fn halvings(path: &WienerPath, levels: u32) -> Result<Vec<WienerPath>> {
    let mut out = vec![path.clone()];
    for _ in 0..levels {
        let next = out.last().expect("nonempty").refine(2)?;
        out.push(next);
    }
    Ok(out)
}

fn terminal(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu0: &DualVector,
    grid: &TimeGrid,
    path: &WienerPath,
    cfg: &StepperConfig,
) -> Result<DualVector> {
    let none: [f64; 0] = [];
    let mut mu = mu0.clone();
    for n in 0..grid.steps {
        let dw = if ham.drivers() > 0 { path.step(n) } else { &none[..] };
        mu = step(alg, ham, &mu, grid.time(n), grid.dt, dw, cfg)
            .map_err(|e| Error::StepFailed { step: n, source: Box::new(e) })?
            .state;
        if !mu.is_finite() {
            return Err(Error::StepFailed { step: n, source: Box::new(Error::NonFinite) });
        }
    }
    Ok(mu)
}

/// Per-seed terminal errors, one per tested level.
fn seed_errors(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu0: &DualVector,
    study: &OrderStudy,
    seed: u64,
    cfg: &StepperConfig,
) -> Result<Vec<f64>> {
    let base = TimeGrid::covering(study.base_dt, study.t_final)?;
    let paths = halvings(&generate(seed, ham.drivers(), &base), study.reference_level)?;
    let reference = &paths[study.reference_level as usize];
    let grid_at = |level: u32| {
        TimeGrid::new(base.t0, study.base_dt / f64::from(1u32 << level), base.steps << level)
    };

    for &level in &study.levels {
        let sums = reference.block_sums(1 << (study.reference_level - level))?;
        let coarse = paths[level as usize].increments();
        if sums.len() != coarse.len() || sums.iter().zip(coarse).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(Error::InvalidArgument(format!(
                "refined path does not sum back to level {level} (seed {seed})"
            )));
        }
    }

    let mu_ref = terminal(alg, ham, mu0, &grid_at(study.reference_level)?, reference, cfg)?;
    study
        .levels
        .iter()
        .map(|&level| {
            let mu = terminal(alg, ham, mu0, &grid_at(level)?, &paths[level as usize], cfg)?;
            Ok((mu.coords() - mu_ref.coords()).norm())
        })
        .collect()
}

/// Coupled-path strong-order estimate.
///
/// Every seed is integrated at each level and at the reference level on
/// nested refinements of one Brownian path; the terminal Euclidean error is
/// averaged over seeds and fitted on a log-log scale. Seeds whose
/// integration fails are excluded with a warning; more than 20% exclusions
/// is an error.
pub fn strong_order(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu0: &DualVector,
    study: &OrderStudy,
    cfg: &StepperConfig,
) -> Result<OrderFit> {
    let mut levels = study.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    if levels.is_empty() || study.seeds.is_empty() {
        return Err(Error::InvalidArgument("strong order needs levels and seeds".into()));
    }
    if study.reference_level < levels[levels.len() - 1] + 2 || study.reference_level > 20 {
        return Err(Error::InvalidArgument(format!(
            "reference level {} must exceed every tested level by at least 2",
            study.reference_level
        )));
    }
    let study = OrderStudy { levels, ..study.clone() };

    let mut seeds = study.seeds.clone();
    seeds.sort_unstable();
    let per_seed: Vec<(u64, Result<Vec<f64>>)> = seeds
        .par_iter()
        .map(|&s| (s, seed_errors(alg, ham, mu0, &study, s, cfg)))
        .collect();

    let mut sums = vec![0.0; study.levels.len()];
    let mut used = 0usize;
    for (seed, res) in per_seed {
        match res {
            Ok(errs) => {
                for (acc, e) in sums.iter_mut().zip(errs) {
                    *acc += e;
                }
                used += 1;
            }
            Err(Error::InvalidArgument(msg)) => return Err(Error::InvalidArgument(msg)),
            Err(e) => warn!("seed {seed} excluded from order study: {e}"),
        }
    }
    let excluded = seeds.len() - used;
    if excluded * 5 > seeds.len() {
        return Err(Error::InvalidArgument(format!(
            "{excluded} of {} seeds failed in the order study",
            seeds.len()
        )));
    }
    let dts = study.levels.iter().map(|&l| study.base_dt / f64::from(1u32 << l)).collect();
    let means = sums.into_iter().map(|s| s / used as f64).collect();
    OrderFit::fit(dts, means, used)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Diverged,
    ChordFailed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Diverged => "diverged",
            Verdict::ChordFailed => "chord_failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// `(dt, verdict)` sorted by increasing `dt`.
    pub verdicts: Vec<(f64, Verdict)>,
}

impl StabilityReport {
    /// Largest `dt` that is stable and has only stable runs below it.
    pub fn largest_stable(&self) -> Option<f64> {
        self.verdicts
            .iter()
            .take_while(|(_, v)| *v == Verdict::Stable)
            .last()
            .map(|(dt, _)| *dt)
    }

    pub fn verdict_at(&self, dt: f64) -> Option<Verdict> {
        self.verdicts.iter().find(|(d, _)| *d == dt).map(|(_, v)| *v)
    }
}

fn probe_one(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu0: &DualVector,
    dt: f64,
    horizon: f64,
    seed: u64,
    cfg: &StepperConfig,
) -> Result<Verdict> {
    let grid = TimeGrid::covering(dt, horizon)?;
    let path = generate(seed, ham.drivers(), &grid);
    let mut mu = mu0.clone();
    for n in 0..grid.steps {
        match step(alg, ham, &mu, grid.time(n), dt, path.step(n), cfg) {
            Ok(rec) => mu = rec.state,
            Err(Error::ChordNotConverged { .. } | Error::SingularJacobian { .. }) => {
                return Ok(Verdict::ChordFailed)
            }
            Err(Error::NonFinite) => return Ok(Verdict::Diverged),
            Err(e) => return Err(e),
        }
        if !mu.is_finite() || mu.norm() > DIVERGENCE_NORM {
            return Ok(Verdict::Diverged);
        }
    }
    Ok(Verdict::Stable)
}

/// Runs each `dt` to `horizon` on its own seeded path and classifies it.
pub fn stability_probe(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu0: &DualVector,
    dts: &[f64],
    horizon: f64,
    seed: u64,
    cfg: &StepperConfig,
) -> Result<StabilityReport> {
    cfg.validate()?;
    let mut dts = dts.to_vec();
    dts.sort_by(f64::total_cmp);
    dts.dedup();
    let verdicts = dts
        .par_iter()
        .map(|&dt| Ok((dt, probe_one(alg, ham, mu0, dt, horizon, seed, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport { verdicts })
}

/// Convenience wrapper: integrate and attach Casimirs.
pub fn run_with_casimirs(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    casimirs: &CasimirSet,
    mu0: &DualVector,
    grid: &TimeGrid,
    path: &WienerPath,
    cfg: &StepperConfig,
) -> Result<Trajectory> {
    let mut traj = integrate(alg, ham, mu0, grid, path, cfg)?;
    traj.attach_casimirs(casimirs);
    Ok(traj)
}
