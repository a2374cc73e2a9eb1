//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; SVD and eigensolvers go through
//! faer. Numerical rank is decided by a relative singular value cutoff (see
//! [`Tolerance`]).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Tolerance policy.
///
/// `rank_rel` is the singular value cutoff relative to `max(rows, cols) * sigma_max`.
/// `residual_abs` is the absolute residual cutoff; membership tests scale it by
/// the norms of their inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rank_rel: f64,
    pub residual_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-10,
            residual_abs: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, residual_abs: f64) -> Result<Self> {
        if !(rank_rel > 0.0 && rank_rel < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rank_rel must lie in (0, 1), got {rank_rel}"
            )));
        }
        if !(residual_abs > 0.0 && residual_abs.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "residual_abs must be positive, got {residual_abs}"
            )));
        }
        Ok(Tolerance {
            rank_rel,
            residual_abs,
        })
    }

    /// `residual_abs * max(1, scale)`.
    pub fn scaled(&self, scale: f64) -> f64 {
        self.residual_abs * scale.max(1.0)
    }

    fn cutoff(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.rank_rel * rows.max(cols) as f64 * sigma_max
    }
}

/// A linear subspace of C^n stored by an orthonormal basis (columns).
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: Matrix,
    tol: f64,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal.
    pub fn from_orthonormal(basis: Matrix, tol: f64) -> Self {
        Subspace { basis, tol }
    }

    /// Orthonormalizes the column span of `m`.
    pub fn span_of(m: &Matrix, tol: &Tolerance) -> Result<Self> {
        image_basis(m, tol)
    }

    pub fn zero(n: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(n, 0),
            tol: 0.0,
        }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            basis: Matrix::identity(n, n),
            tol: 0.0,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.adjoint()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self, tol: &Tolerance) -> Result<Subspace> {
        if self.dim() == 0 {
            return Ok(Subspace::full(self.ambient_dim()));
        }
        kernel_basis(&self.basis.adjoint(), tol)
    }

    /// `self ∩ ker m`, computed as `B * ker(m B)`.
    pub fn intersect_kernel(&self, m: &Matrix, tol: &Tolerance) -> Result<Subspace> {
        if m.ncols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator has {} columns, subspace lives in C^{}",
                m.ncols(),
                self.ambient_dim()
            )));
        }
        if self.dim() == 0 {
            return Ok(self.clone());
        }
        let k = kernel_basis(&(m * &self.basis), tol)?;
        Ok(Subspace {
            basis: &self.basis * k.basis,
            tol: k.tol,
        })
    }

    /// True when `self ⊆ other`, tested as `‖(I - P_other) B_self‖ ≤ residual_abs`.
    pub fn is_contained_in(&self, other: &Subspace, tol: &Tolerance) -> bool {
        if self.dim() == 0 {
            return true;
        }
        let r = &self.basis - other.projector() * &self.basis;
        norm2(&r) <= tol.residual_abs
    }
}

pub fn check_finite(m: &Matrix) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

pub fn check_square(m: &Matrix, what: &str) -> Result<usize> {
    check_finite(m)?;
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn check_same_size(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn to_faer(m: &Matrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| *m.get(i, j))
}

/// Full singular value decomposition `M = U diag(s) Vᴴ`.
///
/// `u` is rows×rows, `v` is cols×cols and `s` has `min(rows, cols)` entries in
/// descending order.
#[derive(Clone, Debug)]
pub struct FullSvd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl FullSvd {
    pub fn sigma_max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above the cutoff of `tol`.
    pub fn rank(&self, tol: &Tolerance) -> usize {
        let smax = self.sigma_max();
        if smax == 0.0 {
            return 0;
        }
        let cut = tol.cutoff(self.u.nrows(), self.v.nrows(), smax);
        self.s.iter().filter(|&&x| x > cut).count()
    }

    /// `V diag(1/s) Uᴴ b` over singular values above `cut`.
    pub fn solve_min_norm(&self, b: &Matrix, cut: f64) -> Matrix {
        let r = self.s.iter().filter(|&&x| x > cut).count();
        let ub = self.u.columns(0, r).adjoint() * b;
        let scaled = Matrix::from_fn(r, b.ncols(), |i, j| ub[(i, j)] / self.s[i]);
        self.v.columns(0, r) * scaled
    }
}

/// SVD through faer. Panics only if the iteration fails to converge.
pub fn svd(m: &Matrix) -> FullSvd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return FullSvd {
            u: Matrix::identity(rows, rows),
            s: Vec::new(),
            v: Matrix::identity(cols, cols),
        };
    }
    let d = to_faer(m).svd().expect("svd converges");
    FullSvd {
        u: from_faer(d.U()),
        s: d.S().column_vector().iter().map(|x| x.re).collect(),
        v: from_faer(d.V()),
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    to_faer(m)
        .singular_values()
        .expect("svd converges")
}

/// Spectral norm without input validation. Empty matrices have norm 0.
pub fn norm2(m: &Matrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> Result<f64> {
    check_finite(m)?;
    Ok(norm2(m))
}

/// Smallest over largest singular value; 0 for the zero matrix.
pub fn inverse_condition(m: &Matrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

pub fn rank(m: &Matrix, tol: &Tolerance) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let cut = tol.cutoff(m.nrows(), m.ncols(), smax);
    s.iter().filter(|&&x| x > cut).count()
}

/// Orthonormal basis of the numerical null space.
pub fn kernel_basis(m: &Matrix, tol: &Tolerance) -> Result<Subspace> {
    check_finite(m)?;
    let cols = m.ncols();
    let d = svd(m);
    let r = d.rank(tol);
    Ok(Subspace {
        basis: d.v.columns(r, cols - r).into_owned(),
        tol: tol.rank_rel,
    })
}

/// Orthonormal basis of the numerical column space.
pub fn image_basis(m: &Matrix, tol: &Tolerance) -> Result<Subspace> {
    check_finite(m)?;
    let d = svd(m);
    let r = d.rank(tol);
    Ok(Subspace {
        basis: d.u.columns(0, r).into_owned(),
        tol: tol.rank_rel,
    })
}

/// Dimension check plus projector distance.
pub fn subspace_equal(s1: &Subspace, s2: &Subspace, tol: &Tolerance) -> Result<bool> {
    if s1.ambient_dim() != s2.ambient_dim() {
        return Err(Error::InvalidInput(format!(
            "ambient dimensions differ: {} vs {}",
            s1.ambient_dim(),
            s2.ambient_dim()
        )));
    }
    if s1.dim() != s2.dim() {
        return Ok(false);
    }
    Ok(norm2(&(s1.projector() - s2.projector())) <= tol.residual_abs)
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
/// orthonormal eigenvectors.
pub fn hermitian_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let d = to_faer(m)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigensolver converges");
    let vals = d.S().column_vector().iter().map(|x| x.re).collect();
    (vals, from_faer(d.U()))
}

/// Square root of a Hermitian positive semidefinite matrix.
pub fn psd_sqrt(m: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    check_square(m, "psd_sqrt input")?;
    let scale = norm2(m);
    let skew = norm2(&(m - m.adjoint()));
    if skew > tol.scaled(scale) {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (skew part {skew:e})"
        )));
    }
    let h = (m + m.adjoint()).scale(0.5);
    let (vals, v) = hermitian_eigen(&h);
    let min_eig = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -tol.scaled(scale) {
        return Err(Error::NotPsd { min_eig });
    }
    let roots = Vector::from_iterator(vals.len(), vals.iter().map(|l| C64::new(l.max(0.0).sqrt(), 0.0)));
    let r = &v * Matrix::from_diagonal(&roots) * v.adjoint();
    Ok((&r + r.adjoint()).scale(0.5))
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(m: &Matrix) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    to_faer(m).eigenvalues().expect("eigensolver converges")
}

/// Inverse, failing when the smallest singular value is below the rank cutoff.
pub fn inverse(m: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    let n = check_square(m, "inverse input")?;
    let d = svd(m);
    let smin = d.s[n - 1];
    if d.rank(tol) < n {
        return Err(Error::Singular { sigma_min: smin });
    }
    Ok(d.solve_min_norm(&Matrix::identity(n, n), 0.0))
}

/// Moore–Penrose pseudoinverse with the rank cutoff of `tol`.
pub fn pinv(m: &Matrix, tol: &Tolerance) -> Matrix {
    let d = svd(m);
    let r = d.rank(tol);
    let inv_s = Vector::from_fn(r, |i, _| C64::new(1.0 / d.s[i], 0.0));
    d.v.columns(0, r) * Matrix::from_diagonal(&inv_s) * d.u.columns(0, r).adjoint()
}

/// Elementary matrix with a single 1 at (i, j), zero-based.
pub fn elementary(n: usize, i: usize, j: usize) -> Matrix {
    let mut e = Matrix::zeros(n, n);
    e[(i, j)] = ONE;
    e
}

/// `diag(1, .., 1, 0, .., 0)` with `m` ones.
pub fn d_nm(n: usize, m: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| if i == j && i < m { ONE } else { ZERO })
}

pub fn real_diag(d: &[f64]) -> Matrix {
    let n = d.len();
    Matrix::from_fn(n, n, |i, j| if i == j { C64::new(d[i], 0.0) } else { ZERO })
}

pub fn from_real_rows(rows: &[&[f64]]) -> Matrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Matrix::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
}

/// Column-major vectorization.
pub fn vec_of(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &Vector, rows: usize, cols: usize) -> Matrix {
    Matrix::from_column_slice(rows, cols, v.as_slice())
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex normal: real and imaginary parts N(0, 1/2).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    let v = Vector::from_fn(n, |_, _| complex_normal(rng));
    let nv = v.norm();
    v / C64::new(nv, 0.0)
}

/// Random n×n matrix of rank r, built as a product of n×r and r×n Ginibre factors.
pub fn random_rank<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Matrix {
    if r == 0 {
        return Matrix::zeros(n, n);
    }
    ginibre(n, r, rng) * ginibre(r, n, rng)
}

/// Random unitary: the unitary polar factor of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let d = svd(&ginibre(n, n, rng));
    &d.u * d.v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_iteration(m: &Matrix, iters: usize) -> f64 {
        let g = m.adjoint() * m;
        let mut v = Vector::from_element(m.ncols(), C64::new(1.0, 0.3));
        for _ in 0..iters {
            let w = &g * &v;
            v = &w / C64::new(w.norm(), 0.0);
        }
        (&g * &v).norm().sqrt()
    }

    #[test]
    fn operator_norm_examples() {
        let tol = 1e-14;
        assert!((operator_norm(&Matrix::identity(3, 3)).unwrap() - 1.0).abs() < tol);
        assert!((operator_norm(&real_diag(&[0.0, 2.0])).unwrap() - 2.0).abs() < tol);
        let mut rng = seeded_rng(7);
        let m = ginibre(4, 4, &mut rng);
        let p = power_iteration(&m, 2000);
        assert!((operator_norm(&m).unwrap() - p).abs() < 1e-10);
    }

    #[test]
    fn operator_norm_rejects_nan() {
        let mut m = Matrix::identity(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(operator_norm(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn kernel_of_d31() {
        let t = Tolerance::default();
        let k = kernel_basis(&d_nm(3, 1), &t).unwrap();
        assert_eq!(k.dim(), 2);
        let expect = Subspace::from_orthonormal(
            Matrix::from_fn(3, 2, |i, j| if i == j + 1 { ONE } else { ZERO }),
            0.0,
        );
        assert!(subspace_equal(&k, &expect, &t).unwrap());
    }

    #[test]
    fn kernel_of_invertible_is_zero() {
        let mut rng = seeded_rng(1);
        let m = ginibre(5, 5, &mut rng);
        assert_eq!(kernel_basis(&m, &Tolerance::default()).unwrap().dim(), 0);
    }

    #[test]
    fn kernel_of_zero_is_everything() {
        let k = kernel_basis(&Matrix::zeros(3, 3), &Tolerance::default()).unwrap();
        assert_eq!(k.dim(), 3);
        assert_eq!(image_basis(&Matrix::zeros(3, 3), &Tolerance::default()).unwrap().dim(), 0);
    }

    #[test]
    fn kernel_of_factored_rank_two() {
        let t = Tolerance::default();
        let mut rng = seeded_rng(11);
        let a = ginibre(4, 2, &mut rng);
        let b = ginibre(2, 4, &mut rng);
        let m = &a * &b;
        let k = kernel_basis(&m, &t).unwrap();
        assert_eq!(k.dim(), 2);
        // ker(ab) = ker(b) since a has full column rank
        let kb = kernel_basis(&b, &t).unwrap();
        assert!(subspace_equal(&k, &kb, &t).unwrap());
        assert!(norm2(&(&m * k.basis())) < 1e-12);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let t = Tolerance::default();
        let mut rng = seeded_rng(3);
        let m = ginibre(2, 5, &mut rng);
        let k = kernel_basis(&m, &t).unwrap();
        assert_eq!(k.dim(), 3);
        assert!(norm2(&(&m * k.basis())) < 1e-12);
    }

    #[test]
    fn image_examples() {
        let t = Tolerance::default();
        let im = image_basis(&d_nm(3, 1), &t).unwrap();
        assert_eq!(im.dim(), 1);
        assert!((im.basis()[(0, 0)].norm() - 1.0).abs() < 1e-15);
        let mut rng = seeded_rng(5);
        let m = random_rank(4, 2, &mut rng);
        let im = image_basis(&m, &t).unwrap();
        assert_eq!(im.dim(), 2);
        let kh = kernel_basis(&m.adjoint(), &t).unwrap();
        assert_eq!(kh.dim(), 2);
        assert!(norm2(&(im.basis().adjoint() * kh.basis())) < 1e-12);
    }

    #[test]
    fn subspace_equal_examples() {
        let t = Tolerance::default();
        let e1 = Subspace::from_orthonormal(Matrix::from_column_slice(2, 1, &[ONE, ZERO]), 0.0);
        let e1b = Subspace::span_of(&Matrix::from_column_slice(2, 1, &[C64::new(2.0, 0.0), ZERO]), &t).unwrap();
        let e2 = Subspace::from_orthonormal(Matrix::from_column_slice(2, 1, &[ZERO, ONE]), 0.0);
        assert!(subspace_equal(&e1, &e1b, &t).unwrap());
        assert!(!subspace_equal(&e1, &e2, &t).unwrap());
        assert!(subspace_equal(&e1, &Subspace::zero(3), &t).is_err());
    }

    #[test]
    fn psd_sqrt_examples() {
        let t = Tolerance::default();
        let r = psd_sqrt(&real_diag(&[4.0, 9.0]), &t).unwrap();
        assert!(norm2(&(r - real_diag(&[2.0, 3.0]))) < 1e-14);
        assert!(norm2(&psd_sqrt(&Matrix::zeros(3, 3), &t).unwrap()) == 0.0);
        let mut rng = seeded_rng(9);
        let z = ginibre(5, 5, &mut rng);
        let m = z.adjoint() * &z;
        let r = psd_sqrt(&m, &t).unwrap();
        assert!(norm2(&(&r * &r - &m)) < 1e-10 * norm2(&m).max(1.0));
        assert!(norm2(&(&r * &m - &m * &r)) < 1e-10 * norm2(&m).max(1.0));
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        let t = Tolerance::default();
        assert!(matches!(psd_sqrt(&real_diag(&[1.0, -1.0]), &t), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 1e-8).is_err());
        assert!(Tolerance::new(1.0, 1e-8).is_err());
        assert!(Tolerance::new(1e-10, -1.0).is_err());
        assert!(Tolerance::new(1e-10, 1e-8).is_ok());
    }

    #[test]
    fn inverse_and_pinv() {
        let t = Tolerance::default();
        let mut rng = seeded_rng(2);
        let m = ginibre(4, 4, &mut rng);
        let inv = inverse(&m, &t).unwrap();
        assert!(norm2(&(&m * &inv - Matrix::identity(4, 4))) < 1e-12);
        assert!(inverse(&d_nm(3, 2), &t).is_err());
        let p = pinv(&d_nm(3, 2), &t);
        assert!(norm2(&(p - d_nm(3, 2))) < 1e-15);
    }

    #[test]
    fn vec_roundtrip_is_column_major() {
        let m = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let v = vec_of(&m);
        assert_eq!(v[1], C64::new(3.0, 0.0));
        assert_eq!(unvec(&v, 2, 2), m);
    }
}
