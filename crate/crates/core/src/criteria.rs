//! Membership in the kernel, image and C-annihilator algebras of a base point Z.
//!
//! * `S_ker(Z) = {A : A ker Z ⊆ ker Z}`
//! * `S_im(Z) = {A : A im Z ⊆ im Z}`
//! * `S_C(Z) = {A : ZAC = 0}` for `C` with `ZC = CZ = 0`, and its dual `CAZ = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{
    check_same_size, check_square, image_basis, inverse, kernel_basis, norm2, rank, svd, Matrix,
    Subspace, Tolerance, Vector,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub member: bool,
    pub residual: f64,
    /// A violating vector (as an n×1 matrix) or a nonzero product, present when `member` is false.
    #[serde(with = "crate::io::serde_matrix_opt", skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Matrix>,
}

impl MembershipVerdict {
    pub(crate) fn yes(residual: f64) -> Self {
        MembershipVerdict {
            member: true,
            residual,
            witness: None,
        }
    }

    pub(crate) fn no(residual: f64, witness: Matrix) -> Self {
        MembershipVerdict {
            member: false,
            residual,
            witness: Some(witness),
        }
    }
}

fn check_pair(a: &Matrix, z: &Matrix) -> Result<usize> {
    let n = check_square(z, "Z")?;
    check_square(a, "A")?;
    check_same_size(a, z, "A and Z")?;
    Ok(n)
}

/// Finds a unit vector x in `space` with `‖op x‖ > thr`.
///
/// Projected standard basis vectors are tried first so the witness does not
/// depend on the rotation of the computed basis; the top right singular vector
/// of `op * basis` is the fallback.
pub(crate) fn violating_vector(op: &Matrix, space: &Subspace, thr: f64) -> Option<Vector> {
    let n = space.ambient_dim();
    let p = space.projector();
    for i in 0..n {
        let x = p.column(i).into_owned();
        let nx = x.norm();
        if nx < 1e-6 {
            continue;
        }
        let x = x / crate::numkit::C64::new(nx, 0.0);
        if (op * &x).norm() > thr {
            return Some(x);
        }
    }
    let d = svd(&(op * space.basis()));
    if d.sigma_max() <= thr {
        return None;
    }
    Some(space.basis() * d.v.column(0))
}

fn as_column(v: Vector) -> Matrix {
    let n = v.len();
    Matrix::from_column_slice(n, 1, v.as_slice())
}

/// `A ker Z ⊆ ker Z`, decided by `‖Z A K‖ ≤ residual_abs · max(1, ‖Z‖‖A‖)`.
pub fn in_s_ker(a: &Matrix, z: &Matrix, tol: &Tolerance) -> Result<MembershipVerdict> {
    check_pair(a, z)?;
    let k = kernel_basis(z, tol)?;
    if k.dim() == 0 {
        return Ok(MembershipVerdict::yes(0.0));
    }
    let za = z * a;
    let residual = norm2(&(&za * k.basis()));
    let thr = tol.scaled(norm2(z) * norm2(a));
    if residual <= thr {
        return Ok(MembershipVerdict::yes(residual));
    }
    let x = violating_vector(&za, &k, thr).expect("residual above threshold");
    Ok(MembershipVerdict::no(residual, as_column(x)))
}

/// `A im Z ⊆ im Z`, decided by `‖(I - QQᴴ) A Q‖` with `Q` an orthonormal basis of `im Z`.
pub fn in_s_im(a: &Matrix, z: &Matrix, tol: &Tolerance) -> Result<MembershipVerdict> {
    let n = check_pair(a, z)?;
    let q = image_basis(z, tol)?;
    if q.dim() == 0 {
        return Ok(MembershipVerdict::yes(0.0));
    }
    let leak = (Matrix::identity(n, n) - q.projector()) * a;
    let residual = norm2(&(&leak * q.basis()));
    let thr = tol.scaled(norm2(a));
    if residual <= thr {
        return Ok(MembershipVerdict::yes(residual));
    }
    let x = violating_vector(&leak, &q, thr).expect("residual above threshold");
    Ok(MembershipVerdict::no(residual, as_column(x)))
}

fn check_annihilator(z: &Matrix, c: &Matrix, tol: &Tolerance) -> Result<()> {
    let scale = norm2(z) * norm2(c);
    let zc = norm2(&(z * c));
    let cz = norm2(&(c * z));
    if zc > tol.scaled(scale) || cz > tol.scaled(scale) {
        return Err(Error::PreconditionViolation(format!(
            "C must satisfy ZC = CZ = 0 (‖ZC‖ = {zc:e}, ‖CZ‖ = {cz:e})"
        )));
    }
    Ok(())
}

/// `ZAC = 0` for a two-sided annihilator `C` of `Z`. The witness is `ZAC`.
pub fn in_s_c(a: &Matrix, z: &Matrix, c: &Matrix, tol: &Tolerance) -> Result<MembershipVerdict> {
    check_pair(a, z)?;
    check_same_size(c, z, "C and Z")?;
    check_annihilator(z, c, tol)?;
    let zac = z * a * c;
    decide_product(zac, norm2(z) * norm2(a) * norm2(c), tol)
}

/// Dual form: `CAZ = 0`. The witness is `CAZ`.
pub fn in_s_c_star(
    a: &Matrix,
    z: &Matrix,
    c: &Matrix,
    tol: &Tolerance,
) -> Result<MembershipVerdict> {
    check_pair(a, z)?;
    check_same_size(c, z, "C and Z")?;
    check_annihilator(z, c, tol)?;
    let caz = c * a * z;
    decide_product(caz, norm2(z) * norm2(a) * norm2(c), tol)
}

fn decide_product(p: Matrix, scale: f64, tol: &Tolerance) -> Result<MembershipVerdict> {
    let residual = norm2(&p);
    if residual <= tol.scaled(scale) {
        Ok(MembershipVerdict::yes(residual))
    } else {
        Ok(MembershipVerdict::no(residual, p))
    }
}

/// `n² - mn + m²`, the dimension of `S_ker` for a rank-m base point in C^n.
pub fn dim_s_ker(n: usize, m: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if m > n {
        return Err(Error::InvalidInput(format!("rank {m} exceeds dimension {n}")));
    }
    Ok(n * n - m * n + m * m)
}

/// Explicit basis of `S_ker(Z)`.
///
/// With a unitary `Q = [basis of (ker Z)^⊥ | basis of ker Z]`, a matrix preserves
/// `ker Z` exactly when `Qᴴ A Q` has a zero top-right `m × k` block, so the
/// basis is `Q E_ij Qᴴ` over all other positions.
pub fn basis_s_ker(z: &Matrix, tol: &Tolerance) -> Result<Vec<Matrix>> {
    let n = check_square(z, "Z")?;
    let k = kernel_basis(z, tol)?;
    let m = n - k.dim();
    let q = if m == 0 || m == n {
        Matrix::identity(n, n)
    } else {
        let co = k.complement(tol)?;
        let mut q = Matrix::zeros(n, n);
        q.columns_mut(0, m).copy_from(co.basis());
        q.columns_mut(m, n - m).copy_from(k.basis());
        q
    };
    let qh = q.adjoint();
    let mut out = Vec::with_capacity(dim_s_ker(n, m)?);
    for j in 0..n {
        for i in 0..n {
            if i < m && j >= m {
                continue;
            }
            // Q E_ij Qᴴ = q_i q_jᴴ
            out.push(q.column(i) * qh.row(j));
        }
    }
    Ok(out)
}

/// `{P⁻¹ B_i P}`.
pub fn conjugate_set_transform(b: &[Matrix], p: &Matrix, tol: &Tolerance) -> Result<Vec<Matrix>> {
    let pinv = inverse(p, tol)?;
    b.iter()
        .map(|bi| {
            check_same_size(bi, p, "set element and P")?;
            Ok(&pinv * bi * p)
        })
        .collect()
}

/// True when `A ker Z ⊄ ker Z`, which certifies divergence along every approach path.
pub fn kernel_criterion_unbounded(a: &Matrix, z: &Matrix, tol: &Tolerance) -> Result<bool> {
    Ok(!in_s_ker(a, z, tol)?.member)
}

/// Dimension of the span of a list of matrices.
pub fn span_dim(ms: &[Matrix], tol: &Tolerance) -> usize {
    if ms.is_empty() {
        return 0;
    }
    let n2 = ms[0].len();
    let stacked = Matrix::from_fn(n2, ms.len(), |r, c| ms[c].as_slice()[r]);
    rank(&stacked, tol)
}

/// Orthogonal projector onto `ker Zᴴ = (im Z)^⊥`.
pub fn coimage_projector(z: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    Ok(kernel_basis(&z.adjoint(), tol)?.projector())
}
