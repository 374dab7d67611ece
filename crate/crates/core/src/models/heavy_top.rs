use std::sync::Arc;

use nalgebra::{DVector, Vector3};

use super::{CasimirSet, Model, QuadraticCasimir, SharedCasimir};
use crate::error::{Error, Result};
use crate::hamiltonian::{salt_hamiltonian, QuadraticTerm, SemimartingaleHamiltonian, SharedTerm};
use crate::lie::{AlgebraVector, Chirality, DualVector, LieAlgebra, SquareMatrix};

/// Heavy top parameters. State is `μ = (π, γ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeavyTopParams {
    /// Principal moments of inertia, the diagonal of 𝕀.
    pub inertia: [f64; 3],
    /// Body vector from the pivot to the centre of mass.
    pub chi: [f64; 3],
    /// SALT noise amplitudes on the rotational part.
    pub alpha: [f64; 3],
    pub pi0: [f64; 3],
    pub gamma0: [f64; 3],
}

impl Default for HeavyTopParams {
    /// Goryachev-Chaplygin inertia with the standard noise and initial data.
    fn default() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            inertia: [4.0, 4.0, 1.0],
            chi: [0.0, 0.0, 1.0],
            alpha: [0.01, 0.02, 0.03],
            pi0: [-s, s, 0.0],
            gamma0: [-s, s, 0.0],
        }
    }
}

impl HeavyTopParams {
    pub fn validate(&self) -> Result<()> {
        if self.inertia.iter().any(|i| !(*i > 0.0) || !i.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "inertia entries must be positive, got {:?}",
                self.inertia
            )));
        }
        let all = self.chi.iter().chain(&self.alpha).chain(&self.pi0).chain(&self.gamma0);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("heavy top parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Hand-coded drift `(π×ω + χ×γ, γ×ω)` with `ω = 𝕀⁻¹π`.
pub fn heavy_top_drift_rhs(params: &HeavyTopParams, mu: &DualVector) -> [f64; 6] {
    let pi = Vector3::new(mu[0], mu[1], mu[2]);
    let gamma = Vector3::new(mu[3], mu[4], mu[5]);
    let chi = Vector3::from(params.chi);
    let omega = pi.component_div(&Vector3::from(params.inertia));
    let top = pi.cross(&omega) + chi.cross(&gamma);
    let bottom = gamma.cross(&omega);
    [top[0], top[1], top[2], bottom[0], bottom[1], bottom[2]]
}

/// Builds the stochastic heavy top on 𝔰𝔢(3)*.
///
/// The drift is `ℏ = ½ π·𝕀⁻¹π − χ·γ`: with the left-invariant bracket its
/// Lie-Poisson field is exactly `(π×ω + χ×γ, γ×ω)`. The single diffusion is
/// the SALT term `β = (α, 0)`.
pub fn build_heavy_top(params: &HeavyTopParams) -> Result<Model> {
    params.validate()?;
    let algebra = LieAlgebra::se3(Chirality::LeftInvariant);

    let mut q = SquareMatrix::zeros(6, 6);
    for i in 0..3 {
        q[(i, i)] = 1.0 / params.inertia[i];
    }
    let mut l = DVector::zeros(6);
    for i in 0..3 {
        l[3 + i] = -params.chi[i];
    }
    let drift: SharedTerm = Arc::new(QuadraticTerm::new(q, l)?);
    let mut beta = vec![0.0; 6];
    beta[..3].copy_from_slice(&params.alpha);
    let diffusions = salt_hamiltonian(6, &[AlgebraVector::new(beta)])?;
    let hamiltonian = SemimartingaleHamiltonian::new(drift, diffusions)?;

    let mut cross = SquareMatrix::zeros(6, 6);
    let mut sphere = SquareMatrix::zeros(6, 6);
    for i in 0..3 {
        cross[(i, 3 + i)] = 0.5;
        cross[(3 + i, i)] = 0.5;
        sphere[(3 + i, 3 + i)] = 1.0;
    }
    let casimirs = CasimirSet::new(vec![
        Arc::new(QuadraticCasimir::new("pi_dot_gamma", cross)?) as SharedCasimir,
        Arc::new(QuadraticCasimir::new("gamma_sq", sphere)?) as SharedCasimir,
    ]);

    let mut initial = params.pi0.to_vec();
    initial.extend_from_slice(&params.gamma0);
    Ok(Model {
        name: "heavy_top".into(),
        algebra,
        hamiltonian,
        casimirs,
        initial: DualVector::new(initial),
        coordinate_names: ["pi1", "pi2", "pi3", "gamma1", "gamma2", "gamma3"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    })
}
