use super::{ButcherTableau, StepRecord};
use crate::error::{Error, Result};
use crate::hamiltonian::SemimartingaleHamiltonian;
use crate::lie::{AlgebraVector, Chirality, DexpSide, DualVector, LieAlgebra};

/// Explicit step: `σ = dt ∇h(μₙ) + Σ ΔWⁱ ∇h̃ᵢ(μₙ)`, then an exact coadjoint move.
pub fn em_mk_step(
    alg: &LieAlgebra,
    ham: &SemimartingaleHamiltonian,
    mu_n: &DualVector,
    dt: f64,
    dw: &[f64],
) -> Result<StepRecord> {
    let sigma = ham.increment_gradient(mu_n, dt, dw)?;
    let state = alg.coadjoint_move(&sigma, mu_n)?;
    Ok(StepRecord {
        state,
        sigma: Some(sigma),
        chord_iters: 0,
        residual_norm: 0.0,
    })
}

/// Explicit Runge-Kutta-Munthe-Kaas step for `μ̇ = s ad*_{f(t, μ)} μ`.
///
/// Stages are taken on the algebra with a `dexp⁻¹` series truncated at
/// `dexpinv_order`; order `p − 2` suffices for a method of order `p`.
pub fn rkmk_explicit_step<F>(
    alg: &LieAlgebra,
    field: &F,
    t: f64,
    mu_n: &DualVector,
    dt: f64,
    tableau: &ButcherTableau,
    dexpinv_order: usize,
) -> Result<DualVector>
where
    F: Fn(f64, &DualVector) -> AlgebraVector,
{
    if !tableau.is_explicit() {
        return Err(Error::Unsupported(
            "implicit tableaux are not supported by the explicit RKMK stepper".into(),
        ));
    }
    Error::check_dim(alg.dim(), mu_n.len())?;
    let side = match alg.chirality() {
        Chirality::LeftInvariant => DexpSide::Minus,
        Chirality::RightInvariant => DexpSide::Plus,
    };
    let s = tableau.stages();
    let n = alg.dim();
    let mut k: Vec<AlgebraVector> = Vec::with_capacity(s);
    for i in 0..s {
        let mut u = nalgebra::DVector::zeros(n);
        for (j, kj) in k.iter().enumerate() {
            let a = tableau.a(i, j);
            if a != 0.0 {
                u += kj.coords() * a;
            }
        }
        let u = AlgebraVector::from(u);
        let y = if i == 0 { mu_n.clone() } else { alg.coadjoint_move(&u, mu_n)? };
        let f = field(t + tableau.c()[i] * dt, &y).scale(dt);
        k.push(alg.dexpinv(&u, &f, dexpinv_order, side)?);
    }
    let mut u = nalgebra::DVector::zeros(n);
    for (b, kj) in tableau.b().iter().zip(&k) {
        u += kj.coords() * *b;
    }
    alg.coadjoint_move(&AlgebraVector::from(u), mu_n)
}
