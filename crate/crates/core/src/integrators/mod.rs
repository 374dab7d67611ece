//! Time steppers for stochastic Lie-Poisson equations.
//!
//! * [`Method::Tmk`]: trapezoidal Munthe-Kaas. Solves the implicit
//!   algebra-side equation for `σₙ` with the chord method and moves `μₙ`
//!   along its coadjoint orbit. Casimirs are preserved to round-off.
//! * [`Method::DirectIm`]: implicit midpoint applied to the equations on 𝔤*.
//! * [`Method::DirectTrapezoidal`]: trapezoidal rule applied to the
//!   equations on 𝔤*.
//! * [`Method::EulerMaruyamaMk`]: explicit Euler step on the algebra
//!   followed by an exact coadjoint move.
//! * [`Method::DeterministicRkmk`]: explicit Runge-Kutta-Munthe-Kaas for the
//!   drift alone.

mod chord;
mod explicit;

pub use chord::{
    chord_jacobian, direct_im_step, direct_trapezoidal_step, tmk_residual, tmk_step,
};
pub use explicit::{em_mk_step, rkmk_explicit_step};

use std::fmt;
use std::str::FromStr;

use crate::diagnostics::{StepMeta, Trajectory};
use crate::error::{Error, Result};
use crate::hamiltonian::SemimartingaleHamiltonian;
use crate::lie::{AlgebraVector, DualVector, LieAlgebra};
use crate::noise::{TimeGrid, WienerPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Tmk,
    DirectIm,
    DirectTrapezoidal,
    EulerMaruyamaMk,
    DeterministicRkmk,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Tmk,
        Method::DirectIm,
        Method::DirectTrapezoidal,
        Method::EulerMaruyamaMk,
        Method::DeterministicRkmk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tmk => "tmk",
            Method::DirectIm => "direct-im",
            Method::DirectTrapezoidal => "direct-trapezoidal",
            Method::EulerMaruyamaMk => "em-mk",
            Method::DeterministicRkmk => "rkmk",
        }
    }

    /// Whether the method moves states along coadjoint orbits.
    pub fn is_orbit_exact(self) -> bool {
        !matches!(self, Method::DirectIm | Method::DirectTrapezoidal)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match key.as_str() {
            "tmk" => Method::Tmk,
            "direct-im" | "im" | "midpoint" => Method::DirectIm,
            "direct-trapezoidal" | "trapezoidal" | "trap" => Method::DirectTrapezoidal,
            "em-mk" | "euler-maruyama-mk" | "em" => Method::EulerMaruyamaMk,
            "rkmk" | "deterministic-rkmk" => Method::DeterministicRkmk,
            other => return Err(Error::Config(format!("unknown method {other:?}"))),
        })
    }
}

/// Butcher coefficients `(aᵢⱼ, bᵢ)` with `cᵢ = Σⱼ aᵢⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherTableau {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::InvalidArgument("tableau must be s×s with s weights".into()));
        }
        let sum: f64 = b.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("tableau weights sum to {sum}, not 1")));
        }
        let c = a.iter().map(|row| row.iter().sum()).collect();
        Ok(Self { a, b, c })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn is_explicit(&self) -> bool {
        (0..self.stages()).all(|i| (i..self.stages()).all(|j| self.a[i][j] == 0.0))
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn euler() -> Self {
        Self::new(vec![vec![0.0]], vec![1.0]).unwrap()
    }

    pub fn heun() -> Self {
        Self::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap()
    }

    /// The classical fourth-order method.
    pub fn rk4() -> Self {
        Self::new(
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        )
        .unwrap()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepperConfig {
    pub method: Method,
    /// Sup-norm bound on the chord residual, scaled by `max(1, ‖x‖∞)`.
    pub chord_tol: f64,
    pub chord_max_iter: usize,
    pub dexpinv_order: usize,
    pub tableau: Option<ButcherTableau>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            method: Method::Tmk,
            chord_tol: 1e-13,
            chord_max_iter: 100,
            dexpinv_order: 0,
            tableau: None,
        }
    }
}

impl StepperConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chord_tol > 0.0) {
            return Err(Error::Config(format!("chord_tol must be positive, got {}", self.chord_tol)));
        }
        if self.chord_max_iter == 0 {
            return Err(Error::Config("chord_max_iter must be at least 1".into()));
        }
        if self.dexpinv_order > crate::lie::MAX_DEXPINV_ORDER {
            return Err(Error::Config(format!(
                "dexpinv_order {} is too large",
                self.dexpinv_order
            )));
        }
        Ok(())
    }
}

/// Result of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub state: DualVector,
    /// The algebra element that moved the state, for orbit-exact methods.
    pub sigma: Option<AlgebraVector>,
    pub chord_iters: usize,
    pub residual_norm: f64,
}

/// Advances `mu_n` by one step of `cfg.method`.
pub fn step(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu_n: &DualVector,
    t: f64,
    dt: f64,
    dw: &[f64],
    cfg: &StepperConfig,
) -> Result<StepRecord> {
    match cfg.method {
        Method::Tmk => tmk_step(alg, ham, mu_n, dt, dw, cfg),
        Method::DirectIm => direct_im_step(alg, ham, mu_n, dt, dw, cfg),
        Method::DirectTrapezoidal => direct_trapezoidal_step(alg, ham, mu_n, dt, dw, cfg),
        Method::EulerMaruyamaMk => em_mk_step(alg, ham, mu_n, dt, dw),
        Method::DeterministicRkmk => {
            if dw.iter().any(|w| *w != 0.0) {
                return Err(Error::Unsupported(
                    "deterministic RKMK cannot take Wiener increments".into(),
                ));
            }
            let tableau = cfg.tableau.clone().unwrap_or_else(ButcherTableau::rk4);
            let drift = ham.drift.clone();
            let field = move |_t: f64, mu: &DualVector| drift.gradient(mu);
            let state = rkmk_explicit_step(alg, &field, t, mu_n, dt, &tableau, cfg.dexpinv_order)?;
            Ok(StepRecord {
                state,
                sigma: None,
                chord_iters: 0,
                residual_norm: 0.0,
            })
        }
    }
}

/// Runs `grid.steps` steps from `mu0`, recording every state.
pub fn integrate(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu0: &DualVector,
    grid: &TimeGrid,
    path: &WienerPath,
    cfg: &StepperConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    Error::check_dim(alg.dim(), mu0.len())?;
    Error::check_dim(alg.dim(), ham.dim())?;
    path.check_grid(grid, ham.drivers())?;

    let mut traj = Trajectory::with_capacity(grid.steps + 1);
    traj.push(grid.t0, mu0.clone(), ham.drift.value(mu0), StepMeta::default());
    let mut mu = mu0.clone();
    let none: [f64; 0] = [];
    for n in 0..grid.steps {
        let dw = if ham.drivers() > 0 { path.step(n) } else { &none[..] };
        let rec = step(alg, ham, &mu, grid.time(n), grid.dt, dw, cfg)
            .and_then(|r| if r.state.is_finite() { Ok(r) } else { Err(Error::NonFinite) })
            .map_err(|e| Error::StepFailed {
                step: n,
                source: Box::new(e),
            })?;
        mu = rec.state;
        traj.push(
            grid.time(n + 1),
            mu.clone(),
            ham.drift.value(&mu),
            StepMeta {
                chord_iters: rec.chord_iters,
                residual: rec.residual_norm,
            },
        );
    }
    Ok(traj)
}
