//! Good paths: invertible paths `M(t) = Z + Σ_{k≥1} t^k E_k` whose inverse has at
//! most a simple pole, `M(t)⁻¹ = C₋₁ t⁻¹ + Σ_{j≥0} t^j C_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{
    check_same_size, check_square, image_basis, inverse_condition, kernel_basis, norm2, rank,
    subspace_equal, svd, Matrix, Tolerance, C64, ZERO,
};

/// Relative residual above which a coefficient solve is declared inconsistent.
pub const POLE_RESIDUAL_MAX: f64 = 1e-6;
pub const DEFAULT_ORDER: usize = 8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoodPath {
    #[serde(rename = "Z", with = "crate::io::serde_matrix")]
    pub z: Matrix,
    /// `E_1, .., E_p`.
    #[serde(rename = "E", with = "crate::io::serde_matrix_vec")]
    pub e: Vec<Matrix>,
    #[serde(rename = "Cneg", with = "crate::io::serde_matrix")]
    pub c_neg: Matrix,
    /// `C_0, .., C_N`.
    #[serde(rename = "Cpos", with = "crate::io::serde_matrix_vec")]
    pub c_pos: Vec<Matrix>,
    pub order: usize,
    /// Set when `C₋₁ = 0`, i.e. the base point is invertible.
    #[serde(default)]
    pub pole_free: bool,
}

impl GoodPath {
    pub fn dim(&self) -> usize {
        self.z.nrows()
    }

    /// `E_k` with `E_0 = Z` and zeros past the stored coefficients.
    pub fn coefficient(&self, k: usize) -> Matrix {
        path_coefficient(&self.z, &self.e, k)
    }

    /// `C_j` for `j ≥ -1`, zero past the truncation order.
    pub fn inverse_coefficient(&self, j: isize) -> Matrix {
        if j == -1 {
            return self.c_neg.clone();
        }
        self.c_pos
            .get(j as usize)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.dim(), self.dim()))
    }

    pub fn eval(&self, t: f64) -> Matrix {
        eval_path(&self.z, &self.e, t)
    }

    /// Truncated Laurent series of the inverse at `t`.
    pub fn eval_inverse(&self, t: f64) -> Matrix {
        let mut acc = self.c_neg.scale(1.0 / t);
        let mut tk = 1.0;
        for c in &self.c_pos {
            acc += c.scale(tk);
            tk *= t;
        }
        acc
    }
}

fn path_coefficient(z: &Matrix, e: &[Matrix], k: usize) -> Matrix {
    match k {
        0 => z.clone(),
        _ => e
            .get(k - 1)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(z.nrows(), z.ncols())),
    }
}

/// `Z + Σ t^k E_k`.
pub fn eval_path(z: &Matrix, e: &[Matrix], t: f64) -> Matrix {
    let mut acc = z.clone();
    let mut tk = 1.0;
    for ek in e {
        tk *= t;
        acc += ek.scale(tk);
    }
    acc
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolarFactors {
    #[serde(rename = "U", with = "crate::io::serde_matrix")]
    pub u: Matrix,
    #[serde(rename = "R", with = "crate::io::serde_matrix")]
    pub r: Matrix,
}

/// `Z = U R` with `R = √(ZᴴZ)` and `U` unitary.
///
/// On `im R` the factor is forced. On `ker R` it is the unitary polar factor of
/// the map `ker Z → (im Z)^⊥` given by orthogonal projection, which is the
/// identity whenever the two spaces coincide.
pub fn sharpened_polar(z: &Matrix, tol: &Tolerance) -> Result<PolarFactors> {
    let n = check_square(z, "Z")?;
    let m = rank(z, tol);
    let d = svd(z);
    let (w, v, sigma) = (&d.u, &d.v, &d.s);

    let mut r = Matrix::zeros(n, n);
    let mut u = Matrix::zeros(n, n);
    for i in 0..m {
        let vi = v.column(i);
        r += vi * vi.adjoint() * C64::new(sigma[i], 0.0);
        u += w.column(i) * vi.adjoint();
    }
    if m < n {
        let k = v.columns(m, n - m).into_owned();
        let l = w.columns(m, n - m).into_owned();
        let cross = l.adjoint() * &k;
        let cs = svd(&cross);
        let q = &cs.u * cs.v.adjoint();
        u += l * q * k.adjoint();
    }
    Ok(PolarFactors { u, r })
}

/// Linear good path `Z + tE` built from the polar factors of `Z`.
///
/// With `P` the orthogonal projector onto `ker Z`: `E = U P`, `C₋₁ = P Uᴴ`,
/// `C₀ = R⁺ Uᴴ` and `C_j = 0` for `j ≥ 1`.
pub fn construct_good_path(z: &Matrix, tol: &Tolerance, order: usize) -> Result<GoodPath> {
    let n = check_square(z, "Z")?;
    let polar = sharpened_polar(z, tol)?;
    let k = kernel_basis(z, tol)?;
    let uh = polar.u.adjoint();
    let p = k.projector();
    let r_pinv = crate::numkit::pinv(&polar.r, tol);

    let pole_free = k.dim() == 0;
    let e = if pole_free {
        Matrix::zeros(n, n)
    } else {
        &polar.u * &p
    };
    let c_neg = &p * &uh;
    let mut c_pos = vec![Matrix::zeros(n, n); order + 1];
    c_pos[0] = r_pinv * &uh;
    Ok(GoodPath {
        z: z.clone(),
        e: vec![e],
        c_neg,
        c_pos,
        order,
        pole_free,
    })
}

/// Largest coefficient residual of `M(t)C(t) = I` and `C(t)M(t) = I` over
/// orders `t⁻¹ .. t^N`, returned as `(left, right)`.
pub fn identity_residuals(gp: &GoodPath) -> (f64, f64) {
    let n = gp.dim();
    let mut left: f64 = 0.0;
    let mut right: f64 = 0.0;
    for j in -1..=(gp.order as isize) {
        let mut l = Matrix::zeros(n, n);
        let mut r = Matrix::zeros(n, n);
        for k in 0..=((j + 1) as usize) {
            let ek = gp.coefficient(k);
            let c = gp.inverse_coefficient(j - k as isize);
            l += &ek * &c;
            r += &c * &ek;
        }
        if j == 0 {
            for i in 0..n {
                l[(i, i)] -= C64::new(1.0, 0.0);
                r[(i, i)] -= C64::new(1.0, 0.0);
            }
        }
        left = left.max(norm2(&l));
        right = right.max(norm2(&r));
    }
    (left, right)
}

const SAMPLE_TS: [f64; 5] = [1e-1, 5e-2, 2e-2, 1e-2, 1e-3];

/// Laurent coefficients `(C₋₁, [C₀..C_N])` of `(Z + Σ t^k E_k)⁻¹`.
///
/// Matching powers `t⁻¹ .. t^{N+1}` in `M(t)C(t) = I` gives a block lower
/// triangular Toeplitz system in `C₋₁ .. C_{N+1}`. When the pole is simple, only
/// `C_{N+1}` is left undetermined; a higher order pole makes the system
/// inconsistent. The solution is then checked against both product identities.
pub fn laurent_inverse(
    z: &Matrix,
    e: &[Matrix],
    order: usize,
    tol: &Tolerance,
) -> Result<(Matrix, Vec<Matrix>)> {
    let n = check_square(z, "Z")?;
    for ek in e {
        check_same_size(ek, z, "path coefficient and Z")?;
    }
    if SAMPLE_TS
        .iter()
        .all(|&t| inverse_condition(&eval_path(z, e, t)) <= 1e-13)
    {
        return Err(Error::InvalidPath(
            "path is numerically singular at every sampled t".into(),
        ));
    }

    let blocks = order + 3;
    let dim = blocks * n;
    let mut t_mat = Matrix::zeros(dim, dim);
    for row in 0..blocks {
        for col in 0..=row {
            let ek = path_coefficient(z, e, row - col);
            t_mat
                .view_mut((row * n, col * n), (n, n))
                .copy_from(&ek);
        }
    }
    let mut rhs = Matrix::zeros(dim, n);
    for i in 0..n {
        rhs[(n + i, i)] = C64::new(1.0, 0.0);
    }
    let d = svd(&t_mat);
    let cut = tol.rank_rel * dim as f64 * d.sigma_max();
    let x = d.solve_min_norm(&rhs, cut);
    let resid = norm2(&(&t_mat * &x - &rhs));
    if resid > POLE_RESIDUAL_MAX {
        return Err(Error::NotAGoodPath { residual: resid });
    }

    let block = |j: usize| x.view((j * n, 0), (n, n)).into_owned();
    let c_neg = block(0);
    let c_pos: Vec<Matrix> = (1..=order + 1).map(block).collect();

    let gp = GoodPath {
        z: z.clone(),
        e: e.to_vec(),
        c_neg,
        c_pos,
        order,
        pole_free: false,
    };
    let (l, r) = identity_residuals(&gp);
    let scale = (0..=e.len())
        .map(|k| norm2(&gp.coefficient(k)))
        .sum::<f64>()
        * std::iter::once(&gp.c_neg)
            .chain(gp.c_pos.iter())
            .map(norm2)
            .fold(0.0, f64::max);
    let rel = l.max(r) / scale.max(1.0);
    if rel > POLE_RESIDUAL_MAX {
        return Err(Error::NotAGoodPath { residual: rel });
    }
    Ok((gp.c_neg, gp.c_pos))
}

/// Runs [`laurent_inverse`] and packages the result.
pub fn laurent_path(z: &Matrix, e: &[Matrix], order: usize, tol: &Tolerance) -> Result<GoodPath> {
    let (c_neg, c_pos) = laurent_inverse(z, e, order, tol)?;
    let pole_free = norm2(&c_neg) <= tol.scaled(1.0);
    Ok(GoodPath {
        z: z.clone(),
        e: e.to_vec(),
        c_neg,
        c_pos,
        order,
        pole_free,
    })
}

/// `im C = ker Z` and `ker C = im Z`.
pub fn in_c_prime(c: &Matrix, z: &Matrix, tol: &Tolerance) -> Result<bool> {
    check_square(z, "Z")?;
    check_same_size(c, z, "C and Z")?;
    let a = subspace_equal(&image_basis(c, tol)?, &kernel_basis(z, tol)?, tol)?;
    let b = subspace_equal(&image_basis(z, tol)?, &kernel_basis(c, tol)?, tol)?;
    Ok(a && b)
}

/// The dual path `C₋₁ + Σ t^k C_{k-1}`, whose inverse is `Z t⁻¹ + Σ t^j E_{j+1}`.
pub fn dual_path(gp: &GoodPath) -> GoodPath {
    let n = gp.dim();
    let mut e: Vec<Matrix> = gp.c_pos.clone();
    trim_zeros(&mut e);
    let c_pos: Vec<Matrix> = (0..=gp.order).map(|j| gp.coefficient(j + 1)).collect();
    let pole_free = gp.z.iter().all(|x| *x == ZERO);
    debug_assert_eq!(gp.c_neg.nrows(), n);
    GoodPath {
        z: gp.c_neg.clone(),
        e,
        c_neg: gp.z.clone(),
        c_pos,
        order: gp.order,
        pole_free,
    }
}

fn trim_zeros(v: &mut Vec<Matrix>) {
    while v.len() > 1 && v.last().is_some_and(|m| m.iter().all(|x| *x == ZERO)) {
        v.pop();
    }
}

/// Least `n ≥ 1` with `ker E₀ ⊆ ker E_m` for `m < n` and `ker E₀ ∩ ker E_n = 0`.
///
/// The coefficients are then required to define a good path.
pub fn verify_rigidity(e0: &Matrix, e: &[Matrix], tol: &Tolerance) -> Result<usize> {
    check_square(e0, "E0")?;
    let k0 = kernel_basis(e0, tol)?;
    if k0.dim() == 0 {
        return Ok(1);
    }
    for (idx, em) in e.iter().enumerate() {
        check_same_size(em, e0, "path coefficient and E0")?;
        let b = em * k0.basis();
        if norm2(&b) <= tol.scaled(norm2(em)) {
            continue;
        }
        if rank(&b, tol) < k0.dim() {
            return Err(Error::RigidityViolation(format!(
                "E_{} neither vanishes on nor is injective on ker E_0",
                idx + 1
            )));
        }
        laurent_inverse(e0, e, DEFAULT_ORDER, tol)?;
        return Ok(idx + 1);
    }
    Err(Error::RigidityViolation(
        "ker E_0 is contained in the kernel of every supplied coefficient".into(),
    ))
}
