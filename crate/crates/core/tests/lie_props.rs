use approx::assert_relative_eq;
use nalgebra::{DMatrix, Rotation3, Vector3};
use proptest::prelude::*;

use coadjoint::expm::matrix_exp;
use coadjoint::lie::{DexpSide, MatrixRep};
use coadjoint::models::{build_heavy_top, build_sine_euler, HeavyTopParams, Model, SineEulerParams};
use coadjoint::{AlgebraVector, Chirality, DualVector, LieAlgebra};

fn coords(dim: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, dim)
}

fn algebras() -> Vec<LieAlgebra> {
    vec![
        LieAlgebra::so3(Chirality::LeftInvariant),
        LieAlgebra::so3(Chirality::RightInvariant),
        LieAlgebra::se3(Chirality::LeftInvariant),
        build_sine_euler(&SineEulerParams::default()).unwrap().algebra,
    ]
}

fn models() -> Vec<Model> {
    vec![
        build_heavy_top(&HeavyTopParams::default()).unwrap(),
        build_heavy_top(&HeavyTopParams { inertia: [4.0, 2.0, 1.0], ..HeavyTopParams::default() }).unwrap(),
        build_sine_euler(&SineEulerParams::default()).unwrap(),
        build_sine_euler(&SineEulerParams { n: 5, ..SineEulerParams::default() }).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coadjoint_action_is_dual_to_bracket(which in 0usize..4, raw in coords(8 * 3, 2.0)) {
        let alg = &algebras()[which];
        let n = alg.dim();
        let sigma = AlgebraVector::from_slice(&raw[..n]);
        let v = AlgebraVector::from_slice(&raw[n..2 * n]);
        let mu = DualVector::from_slice(&raw[2 * n..3 * n]);
        let lhs = alg.ad_star(&sigma, &mu).unwrap().pair(&v);
        let rhs = mu.pair(&alg.ad(&sigma, &v).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn poisson_tensor_is_antisymmetric(which in 0usize..4, raw in coords(8, 3.0)) {
        let alg = &algebras()[which];
        let mu = DualVector::from_slice(&raw[..alg.dim()]);
        let j = alg.j_matrix(&mu).unwrap();
        prop_assert!((&j + j.transpose()).amax() <= 1e-14);
    }

    #[test]
    fn coadjoint_moves_form_a_one_parameter_group(
        which in 0usize..4,
        raw in coords(16, 1.0),
        a in -1.5f64..1.5,
        b in -1.5f64..1.5,
    ) {
        let alg = &algebras()[which];
        let n = alg.dim();
        let sigma = AlgebraVector::from_slice(&raw[..n]);
        let mu = DualVector::from_slice(&raw[n..2 * n]);
        let two = alg.coadjoint_move(&sigma.scale(a), &alg.coadjoint_move(&sigma.scale(b), &mu).unwrap()).unwrap();
        let one = alg.coadjoint_move(&sigma.scale(a + b), &mu).unwrap();
        prop_assert!((two.coords() - one.coords()).amax() <= 1e-12 * (1.0 + mu.norm()));
    }

    #[test]
    fn casimirs_are_invariant_under_coadjoint_moves(which in 0usize..4, raw in coords(48, 1.0)) {
        let m = &models()[which];
        let n = m.algebra.dim();
        let sigma = AlgebraVector::from_slice(&raw[..n]).scale(3.0);
        let mu = DualVector::from_slice(&raw[n..2 * n]);
        let moved = m.algebra.coadjoint_move(&sigma, &mu).unwrap();
        for c in m.casimirs.iter() {
            let (before, after) = (c.value(&mu), c.value(&moved));
            let scale = (1.0 + mu.norm()).powi(5);
            prop_assert!((before - after).abs() <= 1e-13 * scale, "{} changed from {before} to {after}", c.name());
        }
    }

    #[test]
    fn so3_move_is_a_rotation(raw in coords(6, 2.0)) {
        // Left: exp(ad_σᵀ) μ = exp(−σ̂) μ = R(σ)ᵀ μ.
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let sigma = Vector3::new(raw[0], raw[1], raw[2]);
        let mu = Vector3::new(raw[3], raw[4], raw[5]);
        let got = alg.coadjoint_move(&AlgebraVector::from_slice(sigma.as_slice()), &DualVector::from_slice(mu.as_slice())).unwrap();
        let want = Rotation3::new(sigma).inverse() * mu;
        for i in 0..3 {
            prop_assert!((got[i] - want[i]).abs() <= 1e-13 * (1.0 + mu.norm()));
        }
        let right = LieAlgebra::so3(Chirality::RightInvariant);
        let got = right.coadjoint_move(&AlgebraVector::from_slice(sigma.as_slice()), &DualVector::from_slice(mu.as_slice())).unwrap();
        let want = Rotation3::new(sigma) * mu;
        for i in 0..3 {
            prop_assert!((got[i] - want[i]).abs() <= 1e-13 * (1.0 + mu.norm()));
        }
    }

    #[test]
    fn matrix_exp_matches_nalgebra(raw in coords(25, 3.0)) {
        let a = DMatrix::from_vec(5, 5, raw);
        let ours = matrix_exp(&a).unwrap();
        let theirs = a.clone().exp();
        prop_assert!((&ours - &theirs).amax() <= 1e-11 * theirs.amax().max(1.0));
    }

    #[test]
    fn commuting_arguments_leave_dexpinv_unchanged(raw in coords(3, 1.0), t in -2.0f64..2.0, order in 0usize..=12) {
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let v = AlgebraVector::from_slice(&raw);
        let sigma = v.scale(t);
        for side in [DexpSide::Plus, DexpSide::Minus] {
            let got = alg.dexpinv(&sigma, &v, order, side).unwrap();
            prop_assert!((got.coords() - v.coords()).amax() <= 1e-14);
        }
    }

    #[test]
    fn dexpinv_is_linear(raw in coords(12, 1.0), a in -2.0f64..2.0, order in 0usize..=6) {
        let alg = LieAlgebra::se3(Chirality::LeftInvariant);
        let sigma = AlgebraVector::from_slice(&raw[..6]);
        let v = AlgebraVector::from_slice(&raw[6..]);
        let lhs = alg.dexpinv(&sigma, &v.scale(a), order, DexpSide::Minus).unwrap();
        let rhs = alg.dexpinv(&sigma, &v, order, DexpSide::Minus).unwrap().scale(a);
        prop_assert!((lhs.coords() - rhs.coords()).amax() <= 1e-12);
    }
}

/// `d/dt exp(σ + t v)|₀ = dexp_σ(v) exp(σ)` in the so(3) matrix group; the
/// truncated inverse series applied to `dexp_σ(v)` must recover `v` with an
/// error that falls as the order grows.
#[test]
fn dexpinv_inverts_the_matrix_derivative_of_exp() {
    let hat = |x: &[f64]| coadjoint::lie::hat(&[x[0], x[1], x[2]]);
    let vee = |m: &DMatrix<f64>| [m[(2, 1)], m[(0, 2)], m[(1, 0)]];
    let sigma = [0.3, -0.2, 0.4];
    let v = [0.5, 0.1, -0.7];
    let h = 1e-6;
    let plus: Vec<f64> = sigma.iter().zip(&v).map(|(s, w)| s + h * w).collect();
    let minus: Vec<f64> = sigma.iter().zip(&v).map(|(s, w)| s - h * w).collect();
    let d = (matrix_exp(&hat(&plus)).unwrap() - matrix_exp(&hat(&minus)).unwrap()) / (2.0 * h);
    // Right trivialisation: d · exp(−σ̂) = hat(dexp_σ v) with dexp = Σ ad_σᵏ/(k+1)!.
    let u = vee(&(&d * matrix_exp(&(-hat(&sigma))).unwrap()));
    let alg = LieAlgebra::so3(Chirality::LeftInvariant);
    let mut last = f64::INFINITY;
    for order in [0usize, 2, 4, 8] {
        // Right-trivialised dexp⁻¹ is v − ½[σ, v] + …, which is the Plus side.
        let back = alg
            .dexpinv(&AlgebraVector::from_slice(&sigma), &AlgebraVector::from_slice(&u), order, DexpSide::Plus)
            .unwrap();
        let err = (0..3).map(|i| (back[i] - v[i]).abs()).fold(0.0, f64::max);
        assert!(err < last, "order {order}: {err} not below {last}");
        last = err;
    }
    assert!(last < 1e-7, "order 8 error {last}");
}

#[test]
fn representation_round_trips_coordinates() {
    let m = build_sine_euler(&SineEulerParams { n: 5, ..SineEulerParams::default() }).unwrap();
    let rep: &MatrixRep = m.algebra.rep().unwrap();
    let x: Vec<f64> = (0..rep.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    let (back, outside) = rep.project(&rep.embed(&x));
    assert!(outside < 1e-12);
    for (a, b) in x.iter().zip(&back) {
        assert_relative_eq!(a, b, epsilon = 1e-12);
    }
}
