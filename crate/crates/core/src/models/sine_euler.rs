//! Zeitlin's sine-Euler truncation on 𝔰𝔲(N), N odd.
//!
//! Modes `m = (m₁, m₂)` live in the box `[−K, K]²` with `K = (N−1)/2`, taken
//! modulo `N`. The complex basis `T_m` satisfies
//! `[T_m, T_n] = (1/ε) sin(ε m∧n) T_{m+n}` with `ε = 2π/N` and
//! `T_m† = −T_{−m}`. The real algebra uses `A_m = T_m + T_{−m}` and
//! `B_m = i(T_m − T_{−m})` for `m` in the half-box, so that a state with
//! coordinates `(a_m, b_m)` has Fourier coefficient `ω_m = a_m + i b_m` and
//! `ω_{−m} = conj(ω_m)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{CasimirSet, Model, SharedCasimir, TracePowerCasimir};
use crate::error::{Error, Result};
use crate::hamiltonian::{salt_hamiltonian, QuadraticTerm, SemimartingaleHamiltonian, SharedTerm};
use crate::lie::{AlgebraVector, Chirality, DualVector, LieAlgebra, MatrixRep, SquareMatrix};

pub type Mode = [i64; 2];

/// A SALT diffusion concentrated on one mode pair `±m`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseMode {
    pub mode: Mode,
    pub amplitude: f64,
}

/// A prescribed initial Fourier coefficient `ω_m = re + i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeValue {
    pub mode: Mode,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SineEulerParams {
    /// Truncation size `N`, odd and at least 3.
    pub n: usize,
    pub noise_modes: Vec<NoiseMode>,
    /// Explicit initial coefficients. When empty, every real coordinate is
    /// drawn uniformly from `[−½, ½]` using `init_seed`.
    pub init: Vec<ModeValue>,
    pub init_seed: u64,
}

impl Default for SineEulerParams {
    fn default() -> Self {
        Self {
            n: 3,
            noise_modes: vec![
                NoiseMode { mode: [1, 1], amplitude: 0.1 },
                NoiseMode { mode: [1, -1], amplitude: 0.1 },
            ],
            init: Vec::new(),
            init_seed: 0,
        }
    }
}

impl SineEulerParams {
    pub fn k_max(&self) -> i64 {
        (self.n as i64 - 1) / 2
    }

    pub fn eps(&self) -> f64 {
        std::f64::consts::TAU / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "sine-Euler truncation N must be odd and at least 3, got {}",
                self.n
            )));
        }
        let k = self.k_max();
        let modes = self.noise_modes.iter().map(|m| m.mode).chain(self.init.iter().map(|v| v.mode));
        for m in modes {
            if m == [0, 0] || m[0].abs() > k || m[1].abs() > k {
                return Err(Error::InvalidArgument(format!(
                    "mode ({}, {}) is outside the truncation box [-{k}, {k}]^2",
                    m[0], m[1]
                )));
            }
        }
        Ok(())
    }
}

/// `((x + K) mod N) − K`.
fn reduce(x: i64, n: i64) -> i64 {
    let k = (n - 1) / 2;
    (x + k).rem_euclid(n) - k
}

fn wedge(m: Mode, q: Mode) -> i64 {
    m[0] * q[1] - m[1] * q[0]
}

fn in_half(m: Mode) -> bool {
    m[0] > 0 || (m[0] == 0 && m[1] > 0)
}

/// Modes of the half-box in coordinate order: `(0, 1..K)` then
/// `(m₁, −K..K)` for `m₁ = 1..K`.
pub fn half_modes(n: usize) -> Vec<Mode> {
    let k = (n as i64 - 1) / 2;
    let mut out: Vec<Mode> = (1..=k).map(|m2| [0, m2]).collect();
    for m1 in 1..=k {
        for m2 in -k..=k {
            out.push([m1, m2]);
        }
    }
    out
}

/// `(1/ε) sin(ε m∧q)` with the wedge reduced modulo `N` first, so parallel
/// modes give exactly zero.
pub fn sine_bracket_coefficient(n: usize, m: Mode, q: Mode) -> f64 {
    let eps = std::f64::consts::TAU / n as f64;
    let w = reduce(wedge(m, q), n as i64);
    if w == 0 {
        0.0
    } else {
        (eps * w as f64).sin() / eps
    }
}

/// The complex basis matrix `T_m = (−i/2ε) ρ^{−m₁m₂} g^{2m₁} h^{m₂}` with
/// clock `g = diag(ρᵏ)`, cyclic shift `h` and `ρ = e^{iε}`.
pub fn su_n_mode_matrix(n: usize, m: Mode) -> DMatrix<Complex64> {
    let nn = n as i64;
    let eps = std::f64::consts::TAU / n as f64;
    let root = |p: i64| Complex64::from_polar(1.0, eps * p.rem_euclid(nn) as f64);
    let scale = Complex64::new(0.0, -0.5 / eps) * root(-m[0] * m[1]);
    let gp = (2 * m[0]).rem_euclid(nn);
    let hp = m[1].rem_euclid(nn);
    let mut t = DMatrix::zeros(n, n);
    for j in 0..nn {
        let i = (j + hp).rem_euclid(nn);
        t[(i as usize, j as usize)] = scale * root(gp * i);
    }
    t
}

/// Complex coefficients over the full box, indexed by `(m₁+K)·N + (m₂+K)`.
struct ModeField {
    n: i64,
    c: Vec<Complex64>,
}

impl ModeField {
    fn zeros(n: usize) -> Self {
        Self {
            n: n as i64,
            c: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    fn index(&self, m: Mode) -> usize {
        let k = (self.n - 1) / 2;
        ((reduce(m[0], self.n) + k) * self.n + reduce(m[1], self.n) + k) as usize
    }

    fn get(&self, m: Mode) -> Complex64 {
        self.c[self.index(m)]
    }

    fn add(&mut self, m: Mode, v: Complex64) {
        let i = self.index(m);
        self.c[i] += v;
    }

    fn modes(&self) -> impl Iterator<Item = Mode> {
        let k = (self.n - 1) / 2;
        (-k..=k).flat_map(move |a| (-k..=k).map(move |b| [a, b]))
    }

    /// Field of a real coordinate vector.
    fn from_coords(n: usize, coords: &[f64]) -> Self {
        let mut f = Self::zeros(n);
        for (j, m) in half_modes(n).into_iter().enumerate() {
            let w = Complex64::new(coords[2 * j], coords[2 * j + 1]);
            f.add(m, w);
            f.add([-m[0], -m[1]], w.conj());
        }
        f
    }

    /// Real coordinates `a = (e_m + e_{−m})/2`, `b = (e_m − e_{−m})/2i`.
    fn to_coords(&self) -> Vec<f64> {
        let n = self.n as usize;
        let mut out = Vec::with_capacity(n * n - 1);
        for m in half_modes(n) {
            let p = self.get(m);
            let q = self.get([-m[0], -m[1]]);
            out.push(((p + q) * 0.5).re);
            out.push(((p - q) / Complex64::new(0.0, 2.0)).re);
        }
        out
    }
}

fn basis_field(n: usize, j: usize) -> ModeField {
    let mut coords = vec![0.0; n * n - 1];
    coords[j] = 1.0;
    ModeField::from_coords(n, &coords)
}

fn structure_constants(n: usize) -> Vec<f64> {
    let dim = n * n - 1;
    let fields: Vec<ModeField> = (0..dim).map(|j| basis_field(n, j)).collect();
    let mut constants = vec![0.0; dim * dim * dim];
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut out = ModeField::zeros(n);
            for p in fields[i].modes() {
                let cp = fields[i].get(p);
                if cp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for q in fields[j].modes() {
                    let dq = fields[j].get(q);
                    let s = sine_bracket_coefficient(n, p, q);
                    if dq != Complex64::new(0.0, 0.0) && s != 0.0 {
                        out.add([p[0] + q[0], p[1] + q[1]], cp * dq * s);
                    }
                }
            }
            for (k, v) in out.to_coords().into_iter().enumerate() {
                constants[(i * dim + j) * dim + k] = v;
                constants[(j * dim + i) * dim + k] = -v;
            }
        }
    }
    constants
}

fn real_basis(n: usize) -> Vec<DMatrix<Complex64>> {
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(n * n - 1);
    for m in half_modes(n) {
        let tp = su_n_mode_matrix(n, m);
        let tm = su_n_mode_matrix(n, [-m[0], -m[1]]);
        out.push(&tp + &tm);
        out.push((tp - tm) * i);
    }
    out
}

/// Maps a mode to its half-box representative; the flag is true when the
/// mode was negated (so a complex coefficient must be conjugated).
fn to_half(m: Mode) -> (Mode, bool) {
    if in_half(m) {
        (m, false)
    } else {
        ([-m[0], -m[1]], true)
    }
}

fn coord_index(n: usize, m: Mode) -> usize {
    let (h, _) = to_half(m);
    2 * half_modes(n).iter().position(|x| *x == h).expect("mode validated against the box")
}

/// Builds the stochastic sine-Euler model.
///
/// The drift Hamiltonian `ℏ = −½ Σ |ω_m|²/|m|²` over the half-box has
/// gradient `−ω_m/|m|²`; each noise mode `ζ` enters as the SALT term
/// `β = −ζ`. With the left-invariant bracket this reproduces the Fourier
/// form `dω_m = Σ_n (1/ε) sin(ε m∧n) ω_{m+n} (ω_{−n}/|n|² dt + ζ_{−n} ∘ dW)`.
pub fn build_sine_euler(params: &SineEulerParams) -> Result<Model> {
    params.validate()?;
    let n = params.n;
    let dim = n * n - 1;
    let rep = MatrixRep::new(real_basis(n))?;
    let algebra = LieAlgebra::new(format!("su{n}"), dim, structure_constants(n), Chirality::LeftInvariant)?
        .with_rep(rep.clone())?;

    let modes = half_modes(n);
    let mut q = SquareMatrix::zeros(dim, dim);
    for (j, m) in modes.iter().enumerate() {
        let w = -1.0 / (m[0] * m[0] + m[1] * m[1]) as f64;
        q[(2 * j, 2 * j)] = w;
        q[(2 * j + 1, 2 * j + 1)] = w;
    }
    let drift: SharedTerm = Arc::new(QuadraticTerm::new(q, DVector::zeros(dim))?);
    let betas: Vec<AlgebraVector> = params
        .noise_modes
        .iter()
        .map(|nm| {
            let mut b = vec![0.0; dim];
            b[coord_index(n, nm.mode)] = -nm.amplitude;
            AlgebraVector::new(b)
        })
        .collect();
    let hamiltonian = SemimartingaleHamiltonian::new(drift, salt_hamiltonian(dim, &betas)?)?;

    let rep = Arc::new(rep);
    let casimirs = CasimirSet::new(
        (2..=n as u32)
            .map(|k| Ok(Arc::new(TracePowerCasimir::new(k, rep.clone())?) as SharedCasimir))
            .collect::<Result<_>>()?,
    );

    let initial = if params.init.is_empty() {
        let mut rng = ChaCha20Rng::seed_from_u64(params.init_seed);
        (0..dim).map(|_| rng.gen_range(-0.5..=0.5)).collect()
    } else {
        let mut v = vec![0.0; dim];
        for mv in &params.init {
            let (_, flipped) = to_half(mv.mode);
            let j = coord_index(n, mv.mode);
            v[j] = mv.re;
            v[j + 1] = if flipped { -mv.im } else { mv.im };
        }
        v
    };

    let coordinate_names = modes
        .iter()
        .flat_map(|m| {
            [
                format!("w_{}_{}_re", m[0], m[1]),
                format!("w_{}_{}_im", m[0], m[1]),
            ]
        })
        .collect();
    Ok(Model {
        name: format!("sine_euler_n{n}"),
        algebra,
        hamiltonian,
        casimirs,
        initial: DualVector::new(initial),
        coordinate_names,
    })
}

/// Hand-coded Fourier drift
/// `ω̇_m = Σ_{n≠0} (1/ε) sin(ε m∧n) ω_{m+n} ω_{−n}/|n|²`, returned in the real
/// coordinates of `mu`.
pub fn sine_euler_drift_rhs(n: usize, mu: &DualVector) -> Vec<f64> {
    let w = ModeField::from_coords(n, mu.as_slice());
    let mut out = ModeField::zeros(n);
    for m in w.modes() {
        let mut acc = Complex64::new(0.0, 0.0);
        for q in w.modes() {
            if q == [0, 0] {
                continue;
            }
            let s = sine_bracket_coefficient(n, m, q);
            let nq = (q[0] * q[0] + q[1] * q[1]) as f64;
            acc += w.get([m[0] + q[0], m[1] + q[1]]) * w.get([-q[0], -q[1]]) * (s / nq);
        }
        out.add(m, acc);
    }
    out.to_coords()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::lp_vector_field;

    #[test]
    fn half_modes_for_n3() {
        assert_eq!(half_modes(3), vec![[0, 1], [1, -1], [1, 0], [1, 1]]);
        assert_eq!(half_modes(5).len() * 2, 24);
    }

    #[test]
    fn reduction_wraps_into_box() {
        assert_eq!(reduce(2, 3), -1);
        assert_eq!(reduce(-2, 3), 1);
        assert_eq!(reduce(1, 3), 1);
        assert_eq!(reduce(3, 5), -2);
    }

    #[test]
    fn parallel_modes_do_not_couple() {
        assert_eq!(sine_bracket_coefficient(5, [1, 2], [2, 4]), 0.0);
        assert_eq!(sine_bracket_coefficient(3, [1, 1], [-1, -1]), 0.0);
    }

    #[test]
    fn mode_matrix_adjoint() {
        for m in [[1, 0], [1, 1], [0, 1], [1, -1]] {
            let t = su_n_mode_matrix(3, m);
            let tm = su_n_mode_matrix(3, [-m[0], -m[1]]);
            assert!((t.adjoint() + tm).norm() < 1e-14);
        }
    }

    #[test]
    fn drift_matches_fourier_form() {
        for n in [3, 5] {
            let model = build_sine_euler(&SineEulerParams { n, ..SineEulerParams::default() }).unwrap();
            let f = lp_vector_field(&model.algebra, model.hamiltonian.drift.as_ref(), &model.initial).unwrap();
            let want = sine_euler_drift_rhs(n, &model.initial);
            for (a, b) in f.as_slice().iter().zip(&want) {
                assert!((a - b).abs() < 1e-13, "N={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn even_n_and_bad_modes_rejected() {
        assert!(build_sine_euler(&SineEulerParams { n: 4, ..SineEulerParams::default() }).is_err());
        let params = SineEulerParams {
            noise_modes: vec![NoiseMode { mode: [2, 0], amplitude: 0.1 }],
            ..SineEulerParams::default()
        };
        assert!(build_sine_euler(&params).is_err());
    }

    #[test]
    fn negative_mode_initial_value_is_conjugated() {
        let params = SineEulerParams {
            init: vec![ModeValue { mode: [-1, 0], re: 0.3, im: 0.2 }],
            ..SineEulerParams::default()
        };
        let m = build_sine_euler(&params).unwrap();
        let j = coord_index(3, [1, 0]);
        assert_eq!(m.initial[j], 0.3);
        assert_eq!(m.initial[j + 1], -0.2);
    }
}
