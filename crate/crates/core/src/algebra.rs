//! Two-level operator and superoperator arithmetic.
//!
//! Operators on C² are stored as [`Operator2`]; linear maps on operators as
//! [`SuperOp`], a 4×4 matrix acting on the row-major vectorization
//! `(ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁)`. Every superoperator builder in this crate is
//! written against [`VEC_ORDER`].

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64 as C64;

/// Default tolerance for Hermiticity / positivity predicates.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Vectorization order: component `k` of `vectorize(ρ)` is `ρ[VEC_ORDER[k]]`.
pub const VEC_ORDER: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

#[inline]
fn vec_index(i: usize, j: usize) -> usize {
    2 * i + j
}

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator2(pub Matrix2<C64>);

impl Operator2 {
    pub fn new(a00: C64, a01: C64, a10: C64, a11: C64) -> Self {
        Operator2(Matrix2::new(a00, a01, a10, a11))
    }

    pub fn real(a00: f64, a01: f64, a10: f64, a11: f64) -> Self {
        Self::new(a00.into(), a01.into(), a10.into(), a11.into())
    }

    pub fn zero() -> Self {
        Operator2(Matrix2::zeros())
    }

    pub fn identity() -> Self {
        Operator2(Matrix2::identity())
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Self::new(a, ZERO, ZERO, b)
    }

    /// `|i⟩⟨j|`.
    pub fn unit(i: usize, j: usize) -> Self {
        let mut m = Matrix2::zeros();
        m[(i, j)] = ONE;
        Operator2(m)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Operator2(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Operator2(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0[(0, 0)] + self.0[(1, 1)]
    }

    pub fn det(&self) -> C64 {
        self.0[(0, 0)] * self.0[(1, 1)] - self.0[(0, 1)] * self.0[(1, 0)]
    }

    pub fn commutator(&self, other: &Operator2) -> Self {
        *self * *other - *other * *self
    }

    /// Hilbert-Schmidt inner product `tr(A* B)`.
    pub fn hs_inner(&self, other: &Operator2) -> C64 {
        (self.adjoint() * *other).trace()
    }

    /// `tr(A B)`, the duality pairing between observables and states.
    pub fn pairing(&self, other: &Operator2) -> C64 {
        (*self * *other).trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = 0.5 * (self.0[(0, 1)] + self.0[(1, 0)].conj());
        let mean = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - half, mean + half]
    }

    pub fn is_density(&self, tol: f64) -> bool {
        self.is_hermitian(tol)
            && (self.trace() - ONE).norm() <= tol
            && self.hermitian_eigenvalues()[0] >= -tol
    }

    /// Singular values `(σ₁, σ₂)` with `σ₁ ≥ σ₂`, from the eigenvalues of
    /// `M*M` in closed form.
    pub fn singular_values(&self) -> (f64, f64) {
        let t = self.0.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let d = self.det().norm();
        let disc = (t * t - 4.0 * d * d).max(0.0).sqrt();
        let s1 = (0.5 * (t + disc)).sqrt();
        // σ₁σ₂ = |det M| avoids the cancellation in (t - disc)/2.
        let s2 = if s1 > 0.0 { d / s1 } else { 0.0 };
        (s1, s2.min(s1))
    }

    /// Sum of singular values. Uses `(σ₁+σ₂)² = ‖M‖²_F + 2|det M|`.
    pub fn trace_norm(&self) -> f64 {
        let t = self.0.iter().map(|z| z.norm_sqr()).sum::<f64>();
        (t + 2.0 * self.det().norm()).sqrt()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values().0
    }

    pub fn vectorize(&self) -> [C64; 4] {
        VEC_ORDER.map(|(i, j)| self.0[(i, j)])
    }

    pub fn devectorize(v: &[C64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator2(self.0 * c)
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Operator2) -> Operator2 {
        Operator2(self.0 + rhs.0)
    }
}

impl AddAssign for Operator2 {
    fn add_assign(&mut self, rhs: Operator2) {
        self.0 += rhs.0;
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, rhs: Operator2) -> Operator2 {
        Operator2(self.0 - rhs.0)
    }
}

impl Neg for Operator2 {
    type Output = Operator2;
    fn neg(self) -> Operator2 {
        Operator2(-self.0)
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        Operator2(self.0 * rhs.0)
    }
}

impl Mul<f64> for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: f64) -> Operator2 {
        Operator2(self.0 * C64::from(rhs))
    }
}

impl Mul<C64> for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: C64) -> Operator2 {
        Operator2(self.0 * rhs)
    }
}

impl Mul<Operator2> for f64 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        rhs * self
    }
}

impl Mul<Operator2> for C64 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        rhs * self
    }
}

/// A linear map on 2×2 operators, acting on [`Operator2::vectorize`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperOp(pub Matrix4<C64>);

impl SuperOp {
    pub fn zero() -> Self {
        SuperOp(Matrix4::zeros())
    }

    pub fn identity() -> Self {
        SuperOp(Matrix4::identity())
    }

    /// `ρ ↦ Aρ`.
    pub fn left(a: &Operator2) -> Self {
        SuperOp(a.0.kronecker(&Matrix2::identity()))
    }

    /// `ρ ↦ ρB`.
    pub fn right(b: &Operator2) -> Self {
        SuperOp(Matrix2::identity().kronecker(&b.0.transpose()))
    }

    /// `ρ ↦ AρB`.
    pub fn sandwich(a: &Operator2, b: &Operator2) -> Self {
        SuperOp(a.0.kronecker(&b.0.transpose()))
    }

    /// `ρ ↦ [H, ρ]`.
    pub fn commutator(h: &Operator2) -> Self {
        Self::left(h) - Self::right(h)
    }

    /// Builds the matrix of a linear map from its action on the units `|i⟩⟨j|`.
    pub fn from_action(f: impl Fn(&Operator2) -> Operator2) -> Self {
        let mut m = Matrix4::zeros();
        for (col, &(i, j)) in VEC_ORDER.iter().enumerate() {
            let image = f(&Operator2::unit(i, j)).vectorize();
            for (row, z) in image.iter().enumerate() {
                m[(row, col)] = *z;
            }
        }
        SuperOp(m)
    }

    pub fn from_columns(cols: &[[C64; 4]; 4]) -> Self {
        SuperOp(Matrix4::from_fn(|r, c| cols[c][r]))
    }

    pub fn columns(&self) -> [[C64; 4]; 4] {
        std::array::from_fn(|c| std::array::from_fn(|r| self.0[(r, c)]))
    }

    /// Column-major entries, `flat[4c + r] = S[(r, c)]`.
    pub fn to_flat(&self) -> [C64; 16] {
        std::array::from_fn(|k| self.0[(k % 4, k / 4)])
    }

    pub fn from_flat(flat: &[C64; 16]) -> Self {
        SuperOp(Matrix4::from_column_slice(flat))
    }

    pub fn apply(&self, rho: &Operator2) -> Operator2 {
        let v = self.0 * Vector4::from(rho.vectorize());
        Operator2::devectorize(&[v[0], v[1], v[2], v[3]])
    }

    /// The Banach-space dual with respect to `(X, ρ) ↦ tr(Xρ)`:
    /// `tr(S*(X) ρ) = tr(X S(ρ))`.
    pub fn dual(&self) -> Self {
        let perm = transpose_permutation();
        SuperOp(perm * self.0.transpose() * perm)
    }

    pub fn scale(&self, c: C64) -> Self {
        SuperOp(self.0 * c)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `Σ_ij |i⟩⟨j| ⊗ S(|i⟩⟨j|)`.
    pub fn choi(&self) -> Matrix4<C64> {
        let mut c = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let image = self.apply(&Operator2::unit(i, j));
                for k in 0..2 {
                    for l in 0..2 {
                        c[(2 * i + k, 2 * j + l)] = image.get(k, l);
                    }
                }
            }
        }
        c
    }

    /// Eigenvalues of the Hermitian part of the Choi matrix, ascending.
    pub fn choi_eigenvalues(&self) -> [f64; 4] {
        let c = self.choi();
        let herm = (c + c.adjoint()) * C64::from(0.5);
        let eig = SymmetricEigen::new(herm);
        let mut vals: [f64; 4] = std::array::from_fn(|k| eig.eigenvalues[k]);
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Largest deviation of `S(X*)` from `S(X)*` over the operator units.
    pub fn hermiticity_preservation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let x = Operator2::unit(i, j);
                let lhs = self.apply(&x.adjoint());
                let rhs = self.apply(&x).adjoint();
                worst = worst.max((lhs - rhs).max_abs());
            }
        }
        worst
    }
}

fn transpose_permutation() -> Matrix4<C64> {
    let mut p = Matrix4::zeros();
    for &(i, j) in VEC_ORDER.iter() {
        p[(vec_index(j, i), vec_index(i, j))] = ONE;
    }
    p
}

impl Add for SuperOp {
    type Output = SuperOp;
    fn add(self, rhs: SuperOp) -> SuperOp {
        SuperOp(self.0 + rhs.0)
    }
}

impl Sub for SuperOp {
    type Output = SuperOp;
    fn sub(self, rhs: SuperOp) -> SuperOp {
        SuperOp(self.0 - rhs.0)
    }
}

impl Mul for SuperOp {
    type Output = SuperOp;
    fn mul(self, rhs: SuperOp) -> SuperOp {
        SuperOp(self.0 * rhs.0)
    }
}

impl Mul<f64> for SuperOp {
    type Output = SuperOp;
    fn mul(self, rhs: f64) -> SuperOp {
        SuperOp(self.0 * C64::from(rhs))
    }
}

/// Random test matrices, shared by unit tests and the verification suites.
pub mod random {
    use super::*;
    use rand::Rng;

    pub fn complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    pub fn operator<R: Rng + ?Sized>(rng: &mut R) -> Operator2 {
        Operator2::new(complex(rng), complex(rng), complex(rng), complex(rng))
    }

    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R) -> Operator2 {
        let m = operator(rng);
        (m + m.adjoint()) * 0.5
    }

    pub fn density<R: Rng + ?Sized>(rng: &mut R) -> Operator2 {
        let m = operator(rng);
        let p = m * m.adjoint();
        p * (1.0 / p.trace().re)
    }

    /// Operator with no diagonal component in the basis `{P⁺, P⁻, E, E*}`.
    pub fn off_diagonal<R: Rng + ?Sized>(rng: &mut R, e: &Operator2) -> Operator2 {
        e.scale(complex(rng)) + e.adjoint().scale(complex(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn trace_norm_of_identity_and_sign() {
        assert!(close(Operator2::identity().trace_norm(), 2.0, 1e-15));
        assert!(close(Operator2::real(1.0, 0.0, 0.0, -1.0).trace_norm(), 2.0, 1e-15));
        assert!(close(Operator2::zero().trace_norm(), 0.0, 0.0));
    }

    #[test]
    fn operator_norm_examples() {
        assert!(close(Operator2::identity().operator_norm(), 1.0, 1e-15));
        assert!(close(Operator2::real(3.0, 0.0, 0.0, 4.0).operator_norm(), 4.0, 1e-14));
    }

    #[test]
    fn singular_values_match_nalgebra_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = random::operator(&mut rng);
            let svd = m.0.svd(false, false);
            let mut sv = [svd.singular_values[0], svd.singular_values[1]];
            sv.sort_by(|a, b| b.total_cmp(a));
            let (s1, s2) = m.singular_values();
            assert!(close(s1, sv[0], 1e-12));
            assert!(close(s2, sv[1], 1e-12));
            assert!(close(m.trace_norm(), sv[0] + sv[1], 1e-12));
        }
    }

    #[test]
    fn rank_one_trace_norm() {
        let m = Operator2::real(1.0, 2.0, 2.0, 4.0);
        assert!(close(m.trace_norm(), 5.0, 1e-13));
        assert!(close(m.singular_values().1, 0.0, 1e-15));
    }

    #[test]
    fn vectorization_convention() {
        assert_eq!(Operator2::zero().vectorize(), [ZERO; 4]);
        assert_eq!(Operator2::identity().vectorize(), [ONE, ZERO, ZERO, ONE]);
        let m = Operator2::real(1.0, 2.0, 3.0, 4.0);
        assert_eq!(m.vectorize().map(|z| z.re), [1.0, 2.0, 3.0, 4.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = random::operator(&mut rng);
            assert_eq!(Operator2::devectorize(&m.vectorize()), m);
        }
    }

    #[test]
    fn identity_superop_and_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random::hermitian(&mut rng);
        let rho = random::density(&mut rng);
        assert_eq!(SuperOp::identity().apply(&rho), rho);
        assert!(SuperOp::commutator(&h).apply(&h).max_abs() < 1e-15);
    }

    #[test]
    fn left_right_sandwich_match_direct_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = random::operator(&mut rng);
            let b = random::operator(&mut rng);
            let x = random::operator(&mut rng);
            assert!((SuperOp::left(&a).apply(&x) - a * x).max_abs() < 1e-14);
            assert!((SuperOp::right(&b).apply(&x) - x * b).max_abs() < 1e-14);
            assert!((SuperOp::sandwich(&a, &b).apply(&x) - a * x * b).max_abs() < 1e-14);
        }
    }

    #[test]
    fn from_action_reproduces_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random::operator(&mut rng);
        let b = random::operator(&mut rng);
        let s = SuperOp::from_action(|x| a * *x * b);
        assert!((s - SuperOp::sandwich(&a, &b)).max_abs() < 1e-15);
    }

    #[test]
    fn dual_satisfies_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random::operator(&mut rng);
        let b = random::operator(&mut rng);
        let s = SuperOp::sandwich(&a, &b) + SuperOp::left(&b);
        let d = s.dual();
        for _ in 0..50 {
            let x = random::operator(&mut rng);
            let rho = random::operator(&mut rng);
            let lhs = d.apply(&x).pairing(&rho);
            let rhs = x.pairing(&s.apply(&rho));
            assert!((lhs - rhs).norm() < 1e-13);
        }
        // left multiplication dualizes to right multiplication
        assert!((SuperOp::left(&a).dual() - SuperOp::right(&a)).max_abs() < 1e-15);
    }

    #[test]
    fn choi_of_identity_is_rank_one() {
        let ev = SuperOp::identity().choi_eigenvalues();
        assert!(close(ev[0], 0.0, 1e-14));
        assert!(close(ev[3], 2.0, 1e-14));
    }

    #[test]
    fn density_predicate() {
        assert!((Operator2::identity() * 0.5).is_density(DEFAULT_TOL));
        assert!(!Operator2::real(1.5, 0.0, 0.0, -0.5).is_density(DEFAULT_TOL));
        assert!(!Operator2::real(0.5, 1.0, 0.0, 0.5).is_density(DEFAULT_TOL));
    }
}
