use nalgebra::DVector;

use super::{StepRecord, StepperConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::{lp_vector_field_jacobian, SemimartingaleHamiltonian};
use crate::lie::{AlgebraVector, DualVector, LieAlgebra, SquareMatrix};

const MAX_CONDITION: f64 = 1e14;

/// Chord iteration `x ← x − A⁻¹ f(x)` from `x = 0` with `A` factored once.
///
/// Returns the solution, the number of iterations and the final residual.
fn chord_solve<F>(
    jac: SquareMatrix,
    cfg: &StepperConfig,
    mut residual: F,
) -> Result<(DVector<f64>, usize, f64)>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = jac.nrows();
    let lu = jac.lu();
    let u = lu.u();
    let diag = u.diagonal().map(f64::abs);
    let (lo, hi) = (diag.min(), diag.max());
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return Err(Error::SingularJacobian {
            condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        });
    }

    let mut x = DVector::zeros(n);
    let mut f = residual(&x)?;
    let mut norm = f.amax();
    for iter in 0..=cfg.chord_max_iter {
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm <= cfg.chord_tol * x.amax().max(1.0) {
            return Ok((x, iter, norm));
        }
        if iter == cfg.chord_max_iter {
            break;
        }
        let dx = lu.solve(&f).ok_or(Error::SingularJacobian {
            condition: f64::INFINITY,
        })?;
        x -= dx;
        f = residual(&x)?;
        norm = f.amax();
    }
    Err(Error::ChordNotConverged {
        iterations: cfg.chord_max_iter,
        residual: norm,
    })
}

/// `f(σ) = σ − dt ∇h(μ̄) − Σᵢ ΔWⁱ ∇h̃ᵢ(μ̄)` with
/// `μ̄ = ½ (μₙ + exp(s ad*_σ) μₙ)`.
pub fn tmk_residual(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu_n: &DualVector,
    sigma: &AlgebraVector,
    dt: f64,
    dw: &[f64],
) -> Result<AlgebraVector> {
    let moved = alg.coadjoint_move(sigma, mu_n)?;
    let mid: DualVector = ((mu_n.coords() + moved.coords()) * 0.5).into();
    let g = ham.increment_gradient(&mid, dt, dw)?;
    Ok((sigma.coords() - g.coords()).into())
}

/// Chord matrix `Df(0) = I + (s/2) (dt D²h + Σᵢ ΔWⁱ D²h̃ᵢ)(μₙ) J(μₙ)`.
pub fn chord_jacobian(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu_n: &DualVector,
    dt: f64,
    dw: &[f64],
) -> Result<SquareMatrix> {
    Error::check_dim(ham.drivers(), dw.len())?;
    let n = alg.dim();
    let mut hess = ham.drift.hessian(mu_n) * dt;
    for (term, w) in ham.diffusions.iter().zip(dw) {
        if *w != 0.0 && !term.has_zero_hessian() {
            hess += term.hessian(mu_n) * *w;
        }
    }
    let j = alg.j_matrix(mu_n)?;
    let mut jac = SquareMatrix::identity(n, n);
    jac.gemm(0.5 * alg.chirality().sign(), &hess, &j, 1.0);
    Ok(jac)
}

/// One trapezoidal Munthe-Kaas step.
pub fn tmk_step(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu_n: &DualVector,
    dt: f64,
    dw: &[f64],
    cfg: &StepperConfig,
) -> Result<StepRecord> {
    Error::check_dim(alg.dim(), mu_n.len())?;
    let jac = chord_jacobian(alg, ham, mu_n, dt, dw)?;
    let (sigma, iters, res) = chord_solve(jac, cfg, |x| {
        tmk_residual(alg, ham, mu_n, &AlgebraVector::from(x.clone()), dt, dw)
            .map(AlgebraVector::into_inner)
    })?;
    let sigma = AlgebraVector::from(sigma);
    let state = alg.coadjoint_move(&sigma, mu_n)?;
    Ok(StepRecord {
        state,
        sigma: Some(sigma),
        chord_iters: iters,
        residual_norm: res,
    })
}

/// `Φ(μ) = s ad*_{dt ∇h(μ) + Σ ΔWⁱ ∇h̃ᵢ(μ)} μ`, the full increment field.
fn increment_field(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu: &DualVector,
    dt: f64,
    dw: &[f64],
) -> Result<DVector<f64>> {
    let g = ham.increment_gradient(mu, dt, dw)?;
    Ok(alg.ad_star(&g, mu)?.into_inner() * alg.chirality().sign())
}

fn increment_field_jacobian(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu: &DualVector,
    dt: f64,
    dw: &[f64],
) -> Result<SquareMatrix> {
    let mut jac = lp_vector_field_jacobian(alg, ham.drift.as_ref(), mu)? * dt;
    for (term, w) in ham.diffusions.iter().zip(dw) {
        if *w != 0.0 {
            jac += lp_vector_field_jacobian(alg, term.as_ref(), mu)? * *w;
        }
    }
    Ok(jac)
}

/// Implicit midpoint on 𝔤*: `μₙ₊₁ = μₙ + Φ(½(μₙ + μₙ₊₁))`.
pub fn direct_im_step(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu_n: &DualVector,
    dt: f64,
    dw: &[f64],
    cfg: &StepperConfig,
) -> Result<StepRecord> {
    Error::check_dim(alg.dim(), mu_n.len())?;
    Error::check_dim(ham.drivers(), dw.len())?;
    let n = alg.dim();
    let jac = SquareMatrix::identity(n, n)
        - increment_field_jacobian(alg, ham, mu_n, dt, dw)? * 0.5;
    let (delta, iters, res) = chord_solve(jac, cfg, |d| {
        let mid: DualVector = (mu_n.coords() + d * 0.5).into();
        Ok(d - increment_field(alg, ham, &mid, dt, dw)?)
    })?;
    Ok(StepRecord {
        state: (mu_n.coords() + delta).into(),
        sigma: None,
        chord_iters: iters,
        residual_norm: res,
    })
}

/// Trapezoidal rule on 𝔤*: `μₙ₊₁ = μₙ + ½(Φ(μₙ) + Φ(μₙ₊₁))`.
pub fn direct_trapezoidal_step(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu_n: &DualVector,
    dt: f64,
    dw: &[f64],
    cfg: &StepperConfig,
) -> Result<StepRecord> {
    Error::check_dim(alg.dim(), mu_n.len())?;
    Error::check_dim(ham.drivers(), dw.len())?;
    let n = alg.dim();
    let jac = SquareMatrix::identity(n, n)
        - increment_field_jacobian(alg, ham, mu_n, dt, dw)? * 0.5;
    let phi_n = increment_field(alg, ham, mu_n, dt, dw)?;
    let (delta, iters, res) = chord_solve(jac, cfg, |d| {
        let next: DualVector = (mu_n.coords() + d).into();
        let phi = increment_field(alg, ham, &next, dt, dw)?;
        Ok(d - (&phi_n + phi) * 0.5)
    })?;
    Ok(StepRecord {
        state: (mu_n.coords() + delta).into(),
        sigma: None,
        chord_iters: iters,
        residual_norm: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{LinearTerm, QuadraticTerm, SharedTerm};
    use crate::lie::Chirality;
    use std::sync::Arc;

    fn rigid_body() -> (LieAlgebra, SemimartingaleHamiltonian) {
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let q = SquareMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5, 0.25]));
        let drift: SharedTerm = Arc::new(QuadraticTerm::new(q, DVector::zeros(3)).unwrap());
        let noise: SharedTerm = Arc::new(LinearTerm::new(AlgebraVector::new(vec![0.1, 0.0, 0.2])));
        (alg, SemimartingaleHamiltonian::new(drift, vec![noise]).unwrap())
    }

    #[test]
    fn zero_increment_is_identity() {
        let (alg, ham) = rigid_body();
        let mu = DualVector::new(vec![0.3, -0.4, 1.2]);
        let cfg = StepperConfig::default();
        for f in [tmk_step, direct_im_step, direct_trapezoidal_step] {
            let rec = f(&alg, &ham, &mu, 0.0, &[0.0], &cfg).unwrap();
            assert_eq!(rec.state, mu);
            assert_eq!(rec.chord_iters, 0);
        }
    }

    #[test]
    fn tmk_preserves_norm_on_so3() {
        let (alg, ham) = rigid_body();
        let mu = DualVector::new(vec![0.3, -0.4, 1.2]);
        let rec = tmk_step(&alg, &ham, &mu, 0.2, &[0.3], &StepperConfig::default()).unwrap();
        assert!((rec.state.norm() - mu.norm()).abs() < 1e-14);
        let r = tmk_residual(&alg, &ham, &mu, rec.sigma.as_ref().unwrap(), 0.2, &[0.3]).unwrap();
        assert!(r.coords().amax() < 1e-13);
    }

    #[test]
    fn chord_jacobian_matches_finite_difference() {
        let (alg, ham) = rigid_body();
        let mu = DualVector::new(vec![0.3, -0.4, 1.2]);
        let (dt, dw) = (0.1, [0.05]);
        let jac = chord_jacobian(&alg, &ham, &mu, dt, &dw).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let mut e = vec![0.0; 3];
            e[j] = h;
            let fp = tmk_residual(&alg, &ham, &mu, &AlgebraVector::new(e.clone()), dt, &dw).unwrap();
            e[j] = -h;
            let fm = tmk_residual(&alg, &ham, &mu, &AlgebraVector::new(e), dt, &dw).unwrap();
            let col = (fp.coords() - fm.coords()) / (2.0 * h);
            assert!((col - jac.column(j)).amax() < 1e-8);
        }
    }

    #[test]
    fn chord_failure_is_reported() {
        let (alg, ham) = rigid_body();
        let mu = DualVector::new(vec![0.3, -0.4, 1.2]);
        let cfg = StepperConfig {
            chord_max_iter: 1,
            ..StepperConfig::default()
        };
        let err = tmk_step(&alg, &ham, &mu, 0.5, &[0.0], &cfg).unwrap_err();
        assert!(matches!(err, Error::ChordNotConverged { iterations: 1, .. }));
    }
}
