//! Finite-dimensional Lie algebras given by structure constants.
//!
//! An algebra element `σ = Σ σⁱ eᵢ` and a dual element `μ = Σ μᵢ εⁱ` are both
//! stored as plain coordinate vectors; the pairing `⟨μ, σ⟩` is their dot
//! product. The bracket is `[eᵢ, eⱼ] = Σₖ Cᵢⱼᵏ eₖ`.
//!
//! Conventions used throughout the crate:
//!
//! * `J(μ)ᵢⱼ = Σₖ Cᵢⱼᵏ μₖ`, so that `ad*_σ μ = -J(μ) σ`.
//! * The Lie-Poisson vector field of a Hamiltonian `h` is
//!   `s · ad*_{∇h} μ` with `s = Chirality::sign()`.
//! * A coadjoint move by `σ` is `exp(s · ad*_σ) μ`, so that for small `σ` it
//!   agrees with one explicit step of the Lie-Poisson flow.

use std::fmt;
use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::matrix_exp;

pub type SquareMatrix = DMatrix<f64>;

/// Which reduction produced the Lie-Poisson system; fixes the sign of the
/// bracket `{f, g}_∓`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chirality {
    LeftInvariant,
    RightInvariant,
}

impl Chirality {
    /// `+1` for left-invariant systems, `-1` for right-invariant ones.
    pub fn sign(self) -> f64 {
        match self {
            Chirality::LeftInvariant => 1.0,
            Chirality::RightInvariant => -1.0,
        }
    }
}

macro_rules! coord_vector {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name(DVector<f64>);

        impl $name {
            pub fn new(coords: Vec<f64>) -> Self {
                Self(DVector::from_vec(coords))
            }

            pub fn zeros(dim: usize) -> Self {
                Self(DVector::zeros(dim))
            }

            pub fn from_slice(coords: &[f64]) -> Self {
                Self(DVector::from_column_slice(coords))
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[f64] {
                self.0.as_slice()
            }

            pub fn coords(&self) -> &DVector<f64> {
                &self.0
            }

            pub fn coords_mut(&mut self) -> &mut DVector<f64> {
                &mut self.0
            }

            pub fn into_inner(self) -> DVector<f64> {
                self.0
            }

            pub fn scale(&self, a: f64) -> Self {
                Self(&self.0 * a)
            }

            pub fn norm(&self) -> f64 {
                self.0.norm()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|x| x.is_finite())
            }
        }

        impl From<DVector<f64>> for $name {
            fn from(v: DVector<f64>) -> Self {
                Self(v)
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }
    };
}

coord_vector!(
    /// Coordinates of an element of the Lie algebra 𝔤.
    AlgebraVector
);
coord_vector!(
    /// Coordinates of an element of the dual 𝔤* in the induced dual basis.
    DualVector
);

impl DualVector {
    /// The natural pairing `⟨μ, σ⟩`.
    pub fn pair(&self, sigma: &AlgebraVector) -> f64 {
        self.0.dot(&sigma.0)
    }
}

/// Side of the `dexp⁻¹` Bernoulli series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DexpSide {
    /// `v + ½[v,σ] + 1/12 [[v,σ],σ] + …`
    Plus,
    /// `v − ½[v,σ] + 1/12 [[v,σ],σ] + …`
    Minus,
}

/// Bernoulli numbers B₀..B₁₂ with B₁ = −½; the sign of B₁ is set per side.
const BERNOULLI: [f64; 13] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
];

/// Largest truncation index accepted by [`LieAlgebra::dexpinv`].
pub const MAX_DEXPINV_ORDER: usize = BERNOULLI.len() - 1;

/// A faithful matrix representation, stored as the images of the basis.
#[derive(Clone, Debug)]
pub struct MatrixRep {
    basis: Vec<DMatrix<Complex64>>,
    gram_inv: DMatrix<f64>,
}

impl MatrixRep {
    pub fn new(basis: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let dim = basis.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("empty representation basis".into()));
        }
        let size = basis[0].nrows();
        if basis.iter().any(|b| b.nrows() != size || b.ncols() != size) {
            return Err(Error::InvalidArgument(
                "representation basis matrices must share one square shape".into(),
            ));
        }
        let gram = DMatrix::from_fn(dim, dim, |i, j| frobenius(&basis[i], &basis[j]));
        let gram_inv = gram.try_inverse().ok_or_else(|| {
            Error::InvalidArgument("representation basis is linearly dependent".into())
        })?;
        Ok(Self { basis, gram_inv })
    }

    /// Real 4×4 (or other) matrices lifted to the complex representation.
    pub fn from_real(basis: &[DMatrix<f64>]) -> Result<Self> {
        Self::new(basis.iter().map(|b| b.map(|x| Complex64::new(x, 0.0))).collect())
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn size(&self) -> usize {
        self.basis[0].nrows()
    }

    pub fn basis(&self) -> &[DMatrix<Complex64>] {
        &self.basis
    }

    /// `Σ cᵢ Bᵢ` for real coordinates `c`.
    pub fn embed(&self, coords: &[f64]) -> DMatrix<Complex64> {
        let n = self.size();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for (c, b) in coords.iter().zip(&self.basis) {
            if *c != 0.0 {
                out += b * Complex64::new(*c, 0.0);
            }
        }
        out
    }

    /// Orthogonal projection onto the real span of the basis, together with
    /// the Frobenius norm of the part that lies outside it.
    pub fn project(&self, m: &DMatrix<Complex64>) -> (Vec<f64>, f64) {
        let rhs = DVector::from_iterator(self.dim(), self.basis.iter().map(|b| frobenius(b, m)));
        let coords = &self.gram_inv * rhs;
        let residual = (m - self.embed(coords.as_slice())).norm();
        (coords.as_slice().to_vec(), residual)
    }
}

/// Real inner product `Re Tr(a† b)`.
fn frobenius(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// A real Lie algebra of dimension `N` with dense structure constants.
#[derive(Clone)]
pub struct LieAlgebra {
    name: String,
    dim: usize,
    constants: Vec<f64>,
    chirality: Chirality,
    rep: Option<MatrixRep>,
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LieAlgebra")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("chirality", &self.chirality)
            .field("has_rep", &self.rep.is_some())
            .finish()
    }
}

impl LieAlgebra {
    /// Builds an algebra from `C[i][j][k]` stored as `constants[(i*N + j)*N + k]`.
    ///
    /// Antisymmetry in `(i, j)` is checked to 1e-12; the Jacobi identity is
    /// not checked here (see [`LieAlgebra::jacobi_defect`]).
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        constants: Vec<f64>,
        chirality: Chirality,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("algebra dimension must be positive".into()));
        }
        Error::check_dim(dim * dim * dim, constants.len())?;
        let alg = Self {
            name: name.into(),
            dim,
            constants,
            chirality,
            rep: None,
        };
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if (alg.c(i, j, k) + alg.c(j, i, k)).abs() > 1e-12 {
                        return Err(Error::InvalidArgument(format!(
                            "structure constants not antisymmetric at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(alg)
    }

    /// Derives the structure constants from the commutators of a matrix
    /// basis and keeps the basis as the algebra's representation.
    pub fn from_matrix_basis(
        name: impl Into<String>,
        rep: MatrixRep,
        chirality: Chirality,
    ) -> Result<Self> {
        let dim = rep.dim();
        let mut constants = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let (coords, residual) =
                    rep.project(&commutator(&rep.basis()[i], &rep.basis()[j]));
                if residual > 1e-10 {
                    return Err(Error::InvalidArgument(format!(
                        "matrix basis is not closed under commutation ([e{i}, e{j}] leaves the span by {residual:e})"
                    )));
                }
                for (k, c) in coords.into_iter().enumerate() {
                    // Projection noise below this level is an artifact of the Gram solve.
                    constants[(i * dim + j) * dim + k] = if c.abs() < 1e-14 { 0.0 } else { c };
                }
            }
        }
        Self::new(name, dim, constants, chirality)?.with_rep(rep)
    }

    pub fn with_rep(mut self, rep: MatrixRep) -> Result<Self> {
        Error::check_dim(self.dim, rep.dim())?;
        self.rep = Some(rep);
        Ok(self)
    }

    /// 𝔰𝔬(3) in the hat-map basis: `[eᵢ, eⱼ] = εᵢⱼₖ eₖ`.
    pub fn so3(chirality: Chirality) -> Self {
        let rep = MatrixRep::from_real(&(0..3).map(|i| hat(&unit3(i))).collect::<Vec<_>>())
            .expect("so(3) hat basis is independent");
        Self::from_matrix_basis("so3", rep, chirality).expect("so(3) is closed")
    }

    /// 𝔰𝔢(3) as 4×4 matrices `[[ξ̂, b], [0, 0]]`, basis ordered as three
    /// rotations followed by three translations.
    pub fn se3(chirality: Chirality) -> Self {
        let mut basis = Vec::with_capacity(6);
        for i in 0..3 {
            let mut m = DMatrix::zeros(4, 4);
            m.view_mut((0, 0), (3, 3)).copy_from(&hat(&unit3(i)));
            basis.push(m);
        }
        for i in 0..3 {
            let mut m = DMatrix::zeros(4, 4);
            m[(i, 3)] = 1.0;
            basis.push(m);
        }
        let rep = MatrixRep::from_real(&basis).expect("se(3) basis is independent");
        Self::from_matrix_basis("se3", rep, chirality).expect("se(3) is closed")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chirality(&self) -> Chirality {
        self.chirality
    }

    pub fn rep(&self) -> Option<&MatrixRep> {
        self.rep.as_ref()
    }

    /// `Cᵢⱼᵏ`.
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants[(i * self.dim + j) * self.dim + k]
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    /// Largest absolute violation of the Jacobi identity over all index
    /// quadruples.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.c(i, j, m) * self.c(m, k, l)
                                + self.c(j, k, m) * self.c(m, i, l)
                                + self.c(k, i, m) * self.c(m, j, l);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest entry of `rep([eᵢ,eⱼ]) − [rep(eᵢ), rep(eⱼ)]`, or `None`
    /// without a representation.
    pub fn rep_defect(&self) -> Option<f64> {
        let rep = self.rep.as_ref()?;
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let coords: Vec<f64> = (0..n).map(|k| self.c(i, j, k)).collect();
                let diff = rep.embed(&coords) - commutator(&rep.basis()[i], &rep.basis()[j]);
                worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        Some(worst)
    }

    fn check(&self, len: usize) -> Result<()> {
        Error::check_dim(self.dim, len)
    }

    /// Matrix of `ad_σ`: `A[k][j] = Σᵢ σⁱ Cᵢⱼᵏ`.
    pub fn ad_matrix(&self, sigma: &AlgebraVector) -> Result<SquareMatrix> {
        self.check(sigma.len())?;
        let n = self.dim;
        let mut a = SquareMatrix::zeros(n, n);
        for i in 0..n {
            let s = sigma[i];
            if s == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    a[(k, j)] += s * self.c(i, j, k);
                }
            }
        }
        Ok(a)
    }

    /// The bracket `[σ, v]`.
    pub fn ad(&self, sigma: &AlgebraVector, v: &AlgebraVector) -> Result<AlgebraVector> {
        self.check(sigma.len())?;
        self.check(v.len())?;
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if sigma[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = sigma[i] * v[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += self.c(i, j, k) * w;
                }
            }
        }
        Ok(out.into())
    }

    /// The Poisson tensor `J(μ)ᵢⱼ = Σₖ Cᵢⱼᵏ μₖ`.
    pub fn j_matrix(&self, mu: &DualVector) -> Result<SquareMatrix> {
        self.check(mu.len())?;
        let n = self.dim;
        Ok(SquareMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.c(i, j, k) * mu[k]).sum()
        }))
    }

    /// `∂(J(μ)σ)/∂μ`, i.e. `K[i][k] = Σⱼ Cᵢⱼᵏ σʲ`.
    pub fn j_derivative(&self, sigma: &AlgebraVector) -> Result<SquareMatrix> {
        self.check(sigma.len())?;
        let n = self.dim;
        Ok(SquareMatrix::from_fn(n, n, |i, k| {
            (0..n).map(|j| self.c(i, j, k) * sigma[j]).sum()
        }))
    }

    /// `ad*_σ μ = −J(μ)σ`.
    pub fn ad_star(&self, sigma: &AlgebraVector, mu: &DualVector) -> Result<DualVector> {
        self.check(sigma.len())?;
        self.check(mu.len())?;
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                if sigma[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    acc += self.c(i, j, k) * mu[k] * sigma[j];
                }
            }
            out[i] = -acc;
        }
        Ok(out.into())
    }

    /// Generator of the coadjoint move: the matrix of `ν ↦ s · ad*_σ ν`.
    pub fn coadjoint_generator(&self, sigma: &AlgebraVector) -> Result<SquareMatrix> {
        let mut s = self.ad_matrix(sigma)?.transpose();
        s *= self.chirality.sign();
        Ok(s)
    }

    /// `exp(s · ad*_σ) μ`: moves `μ` along its coadjoint orbit.
    pub fn coadjoint_move(&self, sigma: &AlgebraVector, mu: &DualVector) -> Result<DualVector> {
        self.check(mu.len())?;
        let g = matrix_exp(&self.coadjoint_generator(sigma)?)?;
        Ok((g * mu.coords()).into())
    }

    /// Truncated `dexp⁻¹` series `Σ_{k≤order} (B_k^±/k!) Rᵏ(v)` with
    /// `R(v) = [v, σ]`. Order 0 is the identity.
    pub fn dexpinv(
        &self,
        sigma: &AlgebraVector,
        v: &AlgebraVector,
        order: usize,
        side: DexpSide,
    ) -> Result<AlgebraVector> {
        self.check(sigma.len())?;
        self.check(v.len())?;
        if order > MAX_DEXPINV_ORDER {
            return Err(Error::InvalidArgument(format!(
                "dexpinv order {order} exceeds supported maximum {MAX_DEXPINV_ORDER}"
            )));
        }
        let mut out = v.coords().clone();
        let mut term = v.clone();
        let mut factorial = 1.0;
        for (k, bernoulli) in BERNOULLI.iter().enumerate().take(order + 1).skip(1) {
            // [term, σ] = −[σ, term]
            term = self.ad(sigma, &term)?.scale(-1.0);
            factorial *= k as f64;
            let b = match (k, side) {
                (1, DexpSide::Plus) => 0.5,
                (1, DexpSide::Minus) => -0.5,
                _ => *bernoulli,
            };
            if b != 0.0 {
                out += term.coords() * (b / factorial);
            }
        }
        Ok(out.into())
    }
}

fn unit3(i: usize) -> [f64; 3] {
    let mut e = [0.0; 3];
    e[i] = 1.0;
    e
}

/// Hat map `ℝ³ → 𝔰𝔬(3)`, `hat(x) y = x × y`.
pub fn hat(x: &[f64; 3]) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[0.0, -x[2], x[1], x[2], 0.0, -x[0], -x[1], x[0], 0.0],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    #[test]
    fn so3_bracket_is_cross_product() {
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let x = AlgebraVector::new(vec![1.0, 0.0, 0.0]);
        let y = AlgebraVector::new(vec![0.0, 1.0, 0.0]);
        assert_eq!(alg.ad(&x, &y).unwrap().as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(alg.ad(&x, &x).unwrap().as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn so3_j_matrix_for_vertical_momentum() {
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let j = alg.j_matrix(&DualVector::new(vec![0.0, 0.0, 1.0])).unwrap();
        let expected = SquareMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(j, expected);
        assert_eq!(alg.j_matrix(&DualVector::zeros(3)).unwrap(), SquareMatrix::zeros(3, 3));
    }

    #[test]
    fn so3_ad_star_is_mu_cross_sigma() {
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let mu = [0.3, -1.2, 0.7];
        let sigma = [2.0, 0.1, -0.4];
        let got = alg
            .ad_star(&AlgebraVector::from_slice(&sigma), &DualVector::from_slice(&mu))
            .unwrap();
        let want = cross(&mu, &sigma);
        for i in 0..3 {
            assert!((got[i] - want[i]).abs() < 1e-15);
        }
        let zero = alg.ad_star(&AlgebraVector::zeros(3), &DualVector::from_slice(&mu)).unwrap();
        assert_eq!(zero, DualVector::zeros(3));
    }

    #[test]
    fn se3_rotation_translation_bracket() {
        let alg = LieAlgebra::se3(Chirality::LeftInvariant);
        // [e1 rotation, e2 translation] = (e1 × e2) translation = e3 translation
        let mut x = vec![0.0; 6];
        x[0] = 1.0;
        let mut y = vec![0.0; 6];
        y[4] = 1.0;
        let z = alg.ad(&AlgebraVector::new(x), &AlgebraVector::new(y)).unwrap();
        assert_eq!(z.as_slice(), &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn dimension_errors() {
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let bad = AlgebraVector::zeros(2);
        let ok = AlgebraVector::zeros(3);
        assert_eq!(
            alg.ad(&bad, &ok),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!(alg.j_matrix(&DualVector::zeros(4)).is_err());
        assert!(alg.coadjoint_move(&ok, &DualVector::zeros(1)).is_err());
        assert!(alg.dexpinv(&ok, &ok, MAX_DEXPINV_ORDER + 1, DexpSide::Plus).is_err());
    }

    #[test]
    fn rejects_non_antisymmetric_constants() {
        let mut c = vec![0.0; 8];
        // C_01^0 = 1 without the matching C_10^0 = −1.
        c[2] = 1.0;
        assert!(LieAlgebra::new("bad", 2, c, Chirality::LeftInvariant).is_err());
    }

    #[test]
    fn dexpinv_low_orders() {
        let alg = LieAlgebra::so3(Chirality::LeftInvariant);
        let s = AlgebraVector::new(vec![0.2, -0.1, 0.3]);
        let v = AlgebraVector::new(vec![1.0, 2.0, -0.5]);
        assert_eq!(alg.dexpinv(&s, &v, 0, DexpSide::Plus).unwrap(), v);
        let vs = alg.ad(&v, &s).unwrap();
        let plus = alg.dexpinv(&s, &v, 1, DexpSide::Plus).unwrap();
        let minus = alg.dexpinv(&s, &v, 1, DexpSide::Minus).unwrap();
        for i in 0..3 {
            assert!((plus[i] - (v[i] + 0.5 * vs[i])).abs() < 1e-15);
            assert!((minus[i] - (v[i] - 0.5 * vs[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn coadjoint_move_zero_is_identity() {
        let alg = LieAlgebra::se3(Chirality::RightInvariant);
        let mu = DualVector::new(vec![1.0, 2.0, 3.0, -1.0, 0.5, 0.25]);
        assert_eq!(alg.coadjoint_move(&AlgebraVector::zeros(6), &mu).unwrap(), mu);
    }

    #[test]
    fn structural_identities_hold() {
        for alg in [LieAlgebra::so3(Chirality::LeftInvariant), LieAlgebra::se3(Chirality::LeftInvariant)] {
            assert!(alg.jacobi_defect() < 1e-12);
            assert!(alg.rep_defect().unwrap() < 1e-12);
        }
    }
}
