//! Drift and diffusion Hamiltonians on 𝔤*.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, DualVector, LieAlgebra, SquareMatrix};

/// A smooth function on 𝔤* with analytic first and second derivatives.
///
/// The gradient is the variational derivative `δh/δμ ∈ 𝔤`; the Hessian is
/// symmetric.
pub trait HamiltonianTerm: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, mu: &DualVector) -> f64;
    fn gradient(&self, mu: &DualVector) -> AlgebraVector;
    fn hessian(&self, mu: &DualVector) -> SquareMatrix;

    /// True when the Hessian vanishes identically (SALT terms). Lets the
    /// chord Jacobian skip the term.
    fn has_zero_hessian(&self) -> bool {
        false
    }
}

pub type SharedTerm = Arc<dyn HamiltonianTerm>;

/// `h(μ) = β·μ`. Gradient is constant, Hessian is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearTerm {
    beta: AlgebraVector,
}

impl LinearTerm {
    pub fn new(beta: AlgebraVector) -> Self {
        Self { beta }
    }

    pub fn beta(&self) -> &AlgebraVector {
        &self.beta
    }
}

impl HamiltonianTerm for LinearTerm {
    fn dim(&self) -> usize {
        self.beta.len()
    }

    fn value(&self, mu: &DualVector) -> f64 {
        mu.pair(&self.beta)
    }

    fn gradient(&self, _mu: &DualVector) -> AlgebraVector {
        self.beta.clone()
    }

    fn hessian(&self, _mu: &DualVector) -> SquareMatrix {
        SquareMatrix::zeros(self.dim(), self.dim())
    }

    fn has_zero_hessian(&self) -> bool {
        true
    }
}

/// `h(μ) = ½ μᵀQμ + l·μ` with symmetric `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticTerm {
    q: SquareMatrix,
    l: DVector<f64>,
}

impl QuadraticTerm {
    pub fn new(q: SquareMatrix, l: DVector<f64>) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::InvalidArgument("quadratic form must be square".into()));
        }
        Error::check_dim(q.nrows(), l.len())?;
        if (&q - q.transpose()).amax() > 1e-14 * q.amax().max(1.0) {
            return Err(Error::InvalidArgument("quadratic form must be symmetric".into()));
        }
        Ok(Self { q, l })
    }

    pub fn q(&self) -> &SquareMatrix {
        &self.q
    }

    pub fn linear_part(&self) -> &DVector<f64> {
        &self.l
    }
}

impl HamiltonianTerm for QuadraticTerm {
    fn dim(&self) -> usize {
        self.l.len()
    }

    fn value(&self, mu: &DualVector) -> f64 {
        let m = mu.coords();
        0.5 * m.dot(&(&self.q * m)) + self.l.dot(m)
    }

    fn gradient(&self, mu: &DualVector) -> AlgebraVector {
        (&self.q * mu.coords() + &self.l).into()
    }

    fn hessian(&self, _mu: &DualVector) -> SquareMatrix {
        self.q.clone()
    }
}

/// Drift Hamiltonian plus one diffusion Hamiltonian per Wiener driver.
#[derive(Clone, Debug)]
pub struct SemimartingaleHamiltonian {
    pub drift: SharedTerm,
    pub diffusions: Vec<SharedTerm>,
}

impl SemimartingaleHamiltonian {
    pub fn new(drift: SharedTerm, diffusions: Vec<SharedTerm>) -> Result<Self> {
        let n = drift.dim();
        for d in &diffusions {
            Error::check_dim(n, d.dim())?;
        }
        Ok(Self { drift, diffusions })
    }

    pub fn deterministic(drift: SharedTerm) -> Self {
        Self {
            drift,
            diffusions: Vec::new(),
        }
    }

    /// Number of Wiener drivers `M`.
    pub fn drivers(&self) -> usize {
        self.diffusions.len()
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    /// Same drift, diffusions removed.
    pub fn without_noise(&self) -> Self {
        Self::deterministic(self.drift.clone())
    }

    /// Combined increment gradient `dt ∇h(μ) + Σᵢ ΔWⁱ ∇h̃ᵢ(μ)`.
    pub fn increment_gradient(&self, mu: &DualVector, dt: f64, dw: &[f64]) -> Result<AlgebraVector> {
        Error::check_dim(self.drivers(), dw.len())?;
        let mut g = self.drift.gradient(mu).into_inner() * dt;
        for (term, w) in self.diffusions.iter().zip(dw) {
            if *w != 0.0 {
                g += term.gradient(mu).coords() * *w;
            }
        }
        Ok(g.into())
    }
}

/// SALT diffusion Hamiltonians `h̃ᵢ(μ) = βᵢ·μ`.
pub fn salt_hamiltonian(dim: usize, beta: &[AlgebraVector]) -> Result<Vec<SharedTerm>> {
    beta.iter()
        .map(|b| {
            Error::check_dim(dim, b.len())?;
            Ok(Arc::new(LinearTerm::new(b.clone())) as SharedTerm)
        })
        .collect()
}

/// The Lie-Poisson vector field `s · ad*_{∇h(μ)} μ = −s J(μ) ∇h(μ)`.
pub fn lp_vector_field(
    alg: &LieAlgebra,
    term: &dyn HamiltonianTerm,
    mu: &DualVector,
) -> Result<DualVector> {
    Error::check_dim(alg.dim(), term.dim())?;
    let field = alg.ad_star(&term.gradient(mu), mu)?;
    Ok(field.scale(alg.chirality().sign()))
}

/// Jacobian of [`lp_vector_field`] with respect to `μ`:
/// `−s (J(μ) D²h(μ) + K(∇h(μ)))`.
pub fn lp_vector_field_jacobian(
    alg: &LieAlgebra,
    term: &dyn HamiltonianTerm,
    mu: &DualVector,
) -> Result<SquareMatrix> {
    let grad = term.gradient(mu);
    let mut jac = alg.j_derivative(&grad)?;
    if !term.has_zero_hessian() {
        jac += alg.j_matrix(mu)? * term.hessian(mu);
    }
    jac *= -alg.chirality().sign();
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Chirality;

    #[test]
    fn zero_salt_term() {
        let terms = salt_hamiltonian(6, &[AlgebraVector::zeros(6)]).unwrap();
        let mu = DualVector::new(vec![1.0, -2.0, 3.0, 0.5, 0.1, 9.0]);
        assert_eq!(terms[0].value(&mu), 0.0);
        assert_eq!(terms[0].gradient(&mu), AlgebraVector::zeros(6));
        assert_eq!(terms[0].hessian(&mu), SquareMatrix::zeros(6, 6));
    }

    #[test]
    fn salt_term_value_and_constant_gradient() {
        let beta = AlgebraVector::new(vec![0.01, 0.02, 0.03, 0.0, 0.0, 0.0]);
        let terms = salt_hamiltonian(6, std::slice::from_ref(&beta)).unwrap();
        let mu = DualVector::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let want = 0.01 * 1.0 + 0.02 * 2.0 + 0.03 * 3.0;
        assert!((terms[0].value(&mu) - want).abs() < 1e-16);
        assert_eq!(terms[0].gradient(&mu), terms[0].gradient(&DualVector::zeros(6)));
        assert!(salt_hamiltonian(5, &[beta]).is_err());
    }

    #[test]
    fn parallel_gradient_gives_zero_field_on_so3() {
        // h = ½|μ|² has ∇h = μ, and μ × μ = 0.
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let h = QuadraticTerm::new(SquareMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        let f = lp_vector_field(&alg, &h, &DualVector::new(vec![0.3, -0.7, 1.1])).unwrap();
        assert!(f.coords().amax() < 1e-16);
    }

    #[test]
    fn salt_field_is_linear_in_mu() {
        let alg = LieAlgebra::se3(Chirality::LeftInvariant);
        let term = LinearTerm::new(AlgebraVector::new(vec![0.1, -0.2, 0.3, 0.4, 0.0, -0.5]));
        let mu = DualVector::new(vec![1.0, 2.0, -3.0, 0.25, 0.5, -1.0]);
        let f = lp_vector_field(&alg, &term, &mu).unwrap();
        let f2 = lp_vector_field(&alg, &term, &mu.scale(2.0)).unwrap();
        assert_eq!(f2, f.scale(2.0));
    }

    #[test]
    fn asymmetric_quadratic_rejected() {
        let q = SquareMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(QuadraticTerm::new(q, DVector::zeros(2)).is_err());
    }
}
