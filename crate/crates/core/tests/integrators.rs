use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Rotation3, Vector3};
use proptest::prelude::*;

use coadjoint::hamiltonian::{salt_hamiltonian, QuadraticTerm, SemimartingaleHamiltonian};
use coadjoint::integrators::{integrate, step, ButcherTableau, Method, StepperConfig};
use coadjoint::noise::{generate, TimeGrid, WienerPath};
use coadjoint::{AlgebraVector, Chirality, DualVector, Error, LieAlgebra};

const INERTIA: [f64; 3] = [2.0, 1.0, 0.5];

fn rigid_body(noise: bool) -> SemimartingaleHamiltonian {
    let q = DMatrix::from_diagonal(&DVector::from_iterator(3, INERTIA.iter().map(|i| 1.0 / i)));
    let drift = Arc::new(QuadraticTerm::new(q, DVector::zeros(3)).unwrap());
    if noise {
        let beta = [AlgebraVector::new(vec![0.1, 0.0, 0.2]), AlgebraVector::new(vec![0.0, 0.3, 0.0])];
        SemimartingaleHamiltonian::new(drift, salt_hamiltonian(3, &beta).unwrap()).unwrap()
    } else {
        SemimartingaleHamiltonian::deterministic(drift)
    }
}

fn pi0() -> DualVector {
    DualVector::new(vec![0.6, -0.8, 0.5])
}

/// Deterministic trapezoidal Munthe-Kaas for the free rigid body written with
/// rotation matrices: `σ = dt I⁻¹ ½(π + R(σ)ᵀπ)`, `π⁺ = R(σ)ᵀπ`.
fn reference_rigid_body_step(pi: Vector3<f64>, dt: f64) -> Vector3<f64> {
    let inv = Vector3::new(1.0 / INERTIA[0], 1.0 / INERTIA[1], 1.0 / INERTIA[2]);
    let mut sigma = Vector3::zeros();
    for _ in 0..200 {
        let moved = Rotation3::new(sigma).inverse() * pi;
        let next = (pi + moved).component_mul(&inv) * (0.5 * dt);
        if (next - sigma).amax() < 1e-17 {
            sigma = next;
            break;
        }
        sigma = next;
    }
    Rotation3::new(sigma).inverse() * pi
}

#[test]
fn deterministic_tmk_matches_rotation_matrix_reference() {
    let alg = LieAlgebra::so3(Chirality::LeftInvariant);
    let ham = rigid_body(false);
    let grid = TimeGrid::new(0.0, 0.1, 10).unwrap();
    let traj = integrate(&alg, &ham, &pi0(), &grid, &WienerPath::zero(0, &grid), &StepperConfig::default()).unwrap();
    let mut pi = Vector3::from_column_slice(pi0().as_slice());
    for n in 1..=10 {
        pi = reference_rigid_body_step(pi, 0.1);
        for i in 0..3 {
            assert!((traj.states[n][i] - pi[i]).abs() <= 1e-12, "step {n}: {} vs {}", traj.states[n][i], pi[i]);
        }
    }
}

#[test]
fn direct_midpoint_preserves_quadratic_casimir_of_free_body() {
    let alg = LieAlgebra::so3(Chirality::LeftInvariant);
    let ham = rigid_body(false);
    let grid = TimeGrid::new(0.0, 0.05, 2000).unwrap();
    let cfg = StepperConfig::with_method(Method::DirectIm);
    let traj = integrate(&alg, &ham, &pi0(), &grid, &WienerPath::zero(0, &grid), &cfg).unwrap();
    let c0 = pi0().norm();
    let worst = traj.states.iter().map(|s| (s.norm() - c0).abs() / c0).fold(0.0, f64::max);
    assert!(worst < 1e-12, "|π| drift {worst}");
}

#[test]
fn direct_trapezoidal_does_not_preserve_the_casimir() {
    let alg = LieAlgebra::so3(Chirality::LeftInvariant);
    let ham = rigid_body(false);
    let grid = TimeGrid::new(0.0, 0.05, 2000).unwrap();
    let cfg = StepperConfig::with_method(Method::DirectTrapezoidal);
    let traj = integrate(&alg, &ham, &pi0(), &grid, &WienerPath::zero(0, &grid), &cfg).unwrap();
    let c0 = pi0().norm();
    let worst = traj.states.iter().map(|s| (s.norm() - c0).abs() / c0).fold(0.0, f64::max);
    assert!(worst > 1e-8, "|π| drift {worst}");
}

#[test]
fn zero_steps_returns_the_initial_state() {
    let alg = LieAlgebra::so3(Chirality::LeftInvariant);
    let ham = rigid_body(true);
    let grid = TimeGrid::new(0.0, 0.1, 0).unwrap();
    let path = generate(1, 2, &grid);
    let traj = integrate(&alg, &ham, &pi0(), &grid, &path, &StepperConfig::default()).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj.states[0], pi0());
}

#[test]
fn rkmk_rejects_noise_and_em_accepts_it() {
    let alg = LieAlgebra::so3(Chirality::LeftInvariant);
    let ham = rigid_body(true);
    let rk = StepperConfig::with_method(Method::DeterministicRkmk);
    let err = step(&alg, &ham, &pi0(), 0.0, 0.1, &[0.1, 0.0], &rk).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
    let em = StepperConfig::with_method(Method::EulerMaruyamaMk);
    let rec = step(&alg, &ham, &pi0(), 0.0, 0.1, &[0.1, -0.2], &em).unwrap();
    assert!((rec.state.norm() - pi0().norm()).abs() < 1e-14);
}

#[test]
fn wrong_dimensions_are_reported() {
    let alg = LieAlgebra::so3(Chirality::LeftInvariant);
    let ham = rigid_body(true);
    let cfg = StepperConfig::default();
    assert!(matches!(
        step(&alg, &ham, &pi0(), 0.0, 0.1, &[0.1], &cfg),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matches!(
        step(&alg, &ham, &DualVector::zeros(6), 0.0, 0.1, &[0.1, 0.0], &cfg),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn rkmk_heun_is_second_order() {
    let alg = LieAlgebra::so3(Chirality::LeftInvariant);
    let ham = rigid_body(false);
    let run = |dt: f64, steps: usize| {
        let grid = TimeGrid::new(0.0, dt, steps).unwrap();
        let cfg = StepperConfig {
            tableau: Some(ButcherTableau::heun()),
            dexpinv_order: 2,
            ..StepperConfig::with_method(Method::DeterministicRkmk)
        };
        integrate(&alg, &ham, &pi0(), &grid, &WienerPath::zero(0, &grid), &cfg)
            .unwrap()
            .last_state()
            .unwrap()
            .clone()
    };
    let exact = run(0.001, 1000);
    let e1 = (run(0.1, 10).coords() - exact.coords()).norm();
    let e2 = (run(0.05, 20).coords() - exact.coords()).norm();
    let ratio = e1 / e2;
    assert!((3.0..5.5).contains(&ratio), "error ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn orbit_exact_methods_keep_the_norm(
        dw0 in -0.5f64..0.5,
        dw1 in -0.5f64..0.5,
        dt in 0.001f64..0.3,
        right in any::<bool>(),
    ) {
        let chirality = if right { Chirality::RightInvariant } else { Chirality::LeftInvariant };
        let alg = LieAlgebra::so3(chirality);
        let ham = rigid_body(true);
        for method in [Method::Tmk, Method::EulerMaruyamaMk] {
            let rec = step(&alg, &ham, &pi0(), 0.0, dt, &[dw0, dw1], &StepperConfig::with_method(method)).unwrap();
            prop_assert!((rec.state.norm() - pi0().norm()).abs() <= 1e-14);
        }
    }

    #[test]
    fn tmk_residual_vanishes_at_the_returned_sigma(dw0 in -0.5f64..0.5, dt in 0.001f64..0.3) {
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let ham = rigid_body(true);
        let dw = [dw0, 0.1];
        let rec = step(&alg, &ham, &pi0(), 0.0, dt, &dw, &StepperConfig::default()).unwrap();
        let sigma = rec.sigma.unwrap();
        let f = coadjoint::integrators::tmk_residual(&alg, &ham, &pi0(), &sigma, dt, &dw).unwrap();
        prop_assert!(f.coords().amax() <= 1e-13);
        prop_assert_eq!(rec.residual_norm, f.coords().amax());
    }
}
