//! Bundled systems: the stochastic heavy top on 𝔰𝔢(3)* and the stochastic
//! sine-Euler truncation on 𝔰𝔲(N)*.

mod heavy_top;
mod sine_euler;

pub use heavy_top::{build_heavy_top, heavy_top_drift_rhs, HeavyTopParams};
pub use sine_euler::{
    build_sine_euler, half_modes, sine_bracket_coefficient, sine_euler_drift_rhs,
    su_n_mode_matrix, ModeValue, NoiseMode, SineEulerParams,
};

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::SemimartingaleHamiltonian;
use crate::lie::{AlgebraVector, DualVector, LieAlgebra, MatrixRep, SquareMatrix};

/// A function on 𝔤* that is constant on coadjoint orbits.
pub trait Casimir: Debug + Send + Sync {
    fn name(&self) -> &str;
    fn value(&self, mu: &DualVector) -> f64;
    fn gradient(&self, mu: &DualVector) -> AlgebraVector;
}

/// `C(μ) = μᵀAμ` with symmetric `A`.
#[derive(Clone, Debug)]
pub struct QuadraticCasimir {
    name: String,
    a: SquareMatrix,
}

impl QuadraticCasimir {
    pub fn new(name: impl Into<String>, a: SquareMatrix) -> Result<Self> {
        if !a.is_square() || (&a - a.transpose()).amax() > 0.0 {
            return Err(Error::InvalidArgument("Casimir form must be square and symmetric".into()));
        }
        Ok(Self { name: name.into(), a })
    }
}

impl Casimir for QuadraticCasimir {
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, mu: &DualVector) -> f64 {
        mu.coords().dot(&(&self.a * mu.coords()))
    }

    fn gradient(&self, mu: &DualVector) -> AlgebraVector {
        (&self.a * mu.coords() * 2.0).into()
    }
}

/// `C_k(μ) = Re Tr((−iW)ᵏ)` with `W = Σ μᵢ Eᵢ` in a skew-Hermitian
/// representation. `−iW` is Hermitian, so every power has a real trace and
/// odd powers do not vanish identically.
#[derive(Clone, Debug)]
pub struct TracePowerCasimir {
    name: String,
    k: u32,
    rep: Arc<MatrixRep>,
}

impl TracePowerCasimir {
    pub fn new(k: u32, rep: Arc<MatrixRep>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument("trace Casimirs start at k = 2".into()));
        }
        Ok(Self {
            name: format!("tr_w{k}"),
            k,
            rep,
        })
    }

    pub fn power(&self) -> u32 {
        self.k
    }

    fn hermitian(&self, mu: &DualVector) -> DMatrix<Complex64> {
        self.rep.embed(mu.as_slice()) * Complex64::new(0.0, -1.0)
    }

    /// `Tr((−iW)ᵏ)` before the real part is taken.
    pub fn complex_value(&self, mu: &DualVector) -> Complex64 {
        let x = self.hermitian(mu);
        let mut p = x.clone();
        for _ in 1..self.k {
            p = &p * &x;
        }
        p.trace()
    }
}

impl Casimir for TracePowerCasimir {
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, mu: &DualVector) -> f64 {
        self.complex_value(mu).re
    }

    fn gradient(&self, mu: &DualVector) -> AlgebraVector {
        // ∂/∂μᵢ Tr(Xᵏ) = k Tr(Xᵏ⁻¹ (−iEᵢ))
        let x = self.hermitian(mu);
        let n = x.nrows();
        let mut p = DMatrix::<Complex64>::identity(n, n);
        for _ in 1..self.k {
            p = &p * &x;
        }
        let k = self.k as f64;
        let g: Vec<f64> = self
            .rep
            .basis()
            .iter()
            .map(|e| {
                let t: Complex64 = (&p * e).trace() * Complex64::new(0.0, -1.0);
                k * t.re
            })
            .collect();
        AlgebraVector::new(g)
    }
}

pub type SharedCasimir = Arc<dyn Casimir>;

/// Named Casimirs of one model.
#[derive(Clone, Debug, Default)]
pub struct CasimirSet {
    members: Vec<SharedCasimir>,
}

impl CasimirSet {
    pub fn new(members: Vec<SharedCasimir>) -> Self {
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.members.iter().map(|c| c.name().to_string()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SharedCasimir> {
        self.members.iter()
    }

    pub fn values(&self, mu: &DualVector) -> Vec<f64> {
        self.members.iter().map(|c| c.value(mu)).collect()
    }
}

/// Value of every Casimir in `cs` at `mu`, paired with its name.
pub fn evaluate_casimirs(cs: &CasimirSet, mu: &DualVector) -> Vec<(String, f64)> {
    cs.members
        .iter()
        .map(|c| (c.name().to_string(), c.value(mu)))
        .collect()
}

/// An algebra with its Hamiltonians, Casimirs and initial state.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub algebra: LieAlgebra,
    pub hamiltonian: SemimartingaleHamiltonian,
    pub casimirs: CasimirSet,
    pub initial: DualVector,
    pub coordinate_names: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_casimir_gradient() {
        let a = SquareMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let c = QuadraticCasimir::new("xy", a).unwrap();
        let mu = DualVector::new(vec![2.0, 3.0]);
        assert_eq!(c.value(&mu), 6.0);
        assert_eq!(c.gradient(&mu), AlgebraVector::new(vec![3.0, 2.0]));
        assert!(QuadraticCasimir::new("bad", SquareMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).is_err());
    }
}
