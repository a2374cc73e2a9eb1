//! Paths `U(t) → Z`: growth of `‖φ(U(t) A U(t)⁻¹)‖` as `t → 0`, divergence
//! search near a base point, kernel filtrations and the exact test for
//! polynomial paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{violating_vector, MembershipVerdict};
use crate::error::{Error, Result};
use crate::goodpath::{construct_good_path, eval_path, GoodPath, DEFAULT_ORDER};
use crate::modifier::{apply_unchecked, Modifier};
use crate::numkit::{
    check_finite, check_same_size, check_square, complex_normal, ginibre, kernel_basis, norm2,
    random_unit_vector, seeded_rng, svd, Matrix, Subspace, Tolerance, Vector, C64, ONE, ZERO,
};

pub const ALPHA_BOUNDED_MAX: f64 = 0.1;
pub const ALPHA_DIVERGENT_MIN: f64 = 0.9;
pub const R2_MIN: f64 = 0.9;
/// RMS deviation of `ln‖·‖` below which the fit window counts as flat.
pub const FLAT_LOG_RMS: f64 = 0.01;
/// `σ_min/σ_max` at or below which a path point is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-15;
/// Relative size below which an interpolated coefficient counts as zero.
pub const POLY_COEFF_REL: f64 = 1e-9;
pub const DEFAULT_BUDGET: usize = 10_000;
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Logarithmic grid from `hi` down to `lo`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || points < 2 {
        return Err(Error::InvalidInput(format!(
            "grid needs 0 < lo < hi and at least 2 points, got {lo}:{hi}:{points}"
        )));
    }
    let (a, b) = (hi.ln(), lo.ln());
    Ok((0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect())
}

/// `1e-6 ..= 1e-1`, 26 points, decreasing.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-6, 1e-1, 26).expect("valid grid")
}

/// Parses `lo:hi:points`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidInput(format!("grid must be lo:hi:points, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    log_grid(lo, hi, n)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    #[serde(rename = "U", with = "crate::io::serde_matrix")]
    pub u: Matrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PathKind {
    /// `Z + tE`.
    Linear {
        #[serde(rename = "Z", with = "crate::io::serde_matrix")]
        z: Matrix,
        #[serde(rename = "E", with = "crate::io::serde_matrix")]
        e: Matrix,
    },
    /// `Z + Σ t^k E_k`.
    Polynomial {
        #[serde(rename = "Z", with = "crate::io::serde_matrix")]
        z: Matrix,
        #[serde(rename = "E", with = "crate::io::serde_matrix_vec")]
        e: Vec<Matrix>,
    },
    Goodpath { path: GoodPath },
    /// Explicit `(t, U(t))` pairs; the grid is taken from the samples.
    Samples { samples: Vec<PathSample> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSpec {
    #[serde(flatten)]
    pub kind: PathKind,
    #[serde(default = "default_grid")]
    pub t_grid: Vec<f64>,
}

impl PathSpec {
    pub fn new(kind: PathKind) -> Self {
        PathSpec {
            kind,
            t_grid: default_grid(),
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.t_grid = grid;
        self
    }

    pub fn linear(z: Matrix, e: Matrix) -> Self {
        Self::new(PathKind::Linear { z, e })
    }

    pub fn polynomial(z: Matrix, e: Vec<Matrix>) -> Self {
        Self::new(PathKind::Polynomial { z, e })
    }

    pub fn good_path(path: GoodPath) -> Self {
        Self::new(PathKind::Goodpath { path })
    }

    pub fn samples(samples: Vec<PathSample>) -> Self {
        Self::new(PathKind::Samples { samples })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            PathKind::Linear { z, .. } | PathKind::Polynomial { z, .. } => z.nrows(),
            PathKind::Goodpath { path } => path.dim(),
            PathKind::Samples { samples } => samples.first().map_or(0, |s| s.u.nrows()),
        }
    }

    /// `(t, U(t))` over the grid.
    pub fn points(&self) -> Result<Vec<(f64, Matrix)>> {
        let pts: Vec<(f64, Matrix)> = match &self.kind {
            PathKind::Linear { z, e } => {
                check_same_size(z, e, "Z and E")?;
                self.t_grid.iter().map(|&t| (t, z + e.scale(t))).collect()
            }
            PathKind::Polynomial { z, e } => {
                for ek in e {
                    check_same_size(z, ek, "Z and E_k")?;
                }
                self.t_grid.iter().map(|&t| (t, eval_path(z, e, t))).collect()
            }
            PathKind::Goodpath { path } => {
                self.t_grid.iter().map(|&t| (t, path.eval(t))).collect()
            }
            PathKind::Samples { samples } => {
                samples.iter().map(|s| (s.t, s.u.clone())).collect()
            }
        };
        if pts.is_empty() {
            return Err(Error::InvalidInput("path has no grid points".into()));
        }
        let n = pts[0].1.nrows();
        for (t, u) in &pts {
            if !(t.is_finite() && *t > 0.0) {
                return Err(Error::InvalidInput(format!("grid point {t} is not positive")));
            }
            check_square(u, "U(t)")?;
            check_finite(u)?;
            if u.nrows() != n {
                return Err(Error::DimensionMismatch("samples differ in size".into()));
            }
        }
        Ok(pts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthReport {
    pub t_values: Vec<f64>,
    pub norms: Vec<f64>,
    /// Fitted exponent in `‖·‖ ~ t^(-alpha)` over the smallest decade.
    pub alpha: f64,
    pub r2: f64,
    pub verdict: Verdict,
    pub fit_points: usize,
    /// Largest and smallest sampled norms, finite surrogates for the limits.
    pub max_norm: f64,
    pub min_norm: f64,
}

impl GrowthReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,norm\n");
        for (t, v) in self.t_values.iter().zip(&self.norms) {
            out.push_str(&format!("{t:e},{v:e}\n"));
        }
        out
    }
}

fn invert(u: &Matrix) -> Option<Matrix> {
    let n = u.nrows();
    let d = svd(u);
    let smax = d.sigma_max();
    if smax == 0.0 || d.s[n - 1] <= SINGULAR_RCOND * smax {
        return None;
    }
    Some(d.solve_min_norm(&Matrix::identity(n, n), 0.0))
}

/// `U A U⁻¹` computed as `a₀₀ I + U (A - a₀₀ I) U⁻¹`, so scalar matrices are
/// returned exactly however ill-conditioned `U` is.
fn conjugate_with(u: &Matrix, u_inv: &Matrix, a: &Matrix) -> Matrix {
    let n = a.nrows();
    let mu = a[(0, 0)];
    let shift = Matrix::from_diagonal_element(n, n, mu);
    let rest = a - &shift;
    if rest.iter().all(|x| *x == ZERO) {
        return shift;
    }
    shift + u * rest * u_inv
}

/// `U A U⁻¹`, or `None` when `U` is numerically singular.
pub fn conjugate(u: &Matrix, a: &Matrix) -> Option<Matrix> {
    invert(u).map(|ui| conjugate_with(u, &ui, a))
}

/// Evaluates `‖φ(U(t) A U(t)⁻¹)‖` along the path and fits the growth exponent.
pub fn simulate(path: &PathSpec, a: &Matrix, phi: &Modifier) -> Result<GrowthReport> {
    let pts = path.points()?;
    let n = check_square(a, "A")?;
    check_finite(a)?;
    if n != pts[0].1.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {n}×{n}, path is {0}×{0}",
            pts[0].1.nrows()
        )));
    }
    if let Some(d) = phi.dim() {
        if d != n {
            return Err(Error::DimensionMismatch(format!("modifier acts on {d}×{d}")));
        }
    }
    let mut t_values = Vec::with_capacity(pts.len());
    let mut norms = Vec::with_capacity(pts.len());
    for (t, u) in &pts {
        let c = conjugate(u, a).ok_or(Error::PathSingular { t: *t })?;
        t_values.push(*t);
        norms.push(norm2(&apply_unchecked(phi, &c)));
    }
    Ok(fit_growth(t_values, norms))
}

/// Least-squares fit of `ln‖·‖` against `ln t` over the smallest decade.
pub fn fit_growth(t_values: Vec<f64>, norms: Vec<f64>) -> GrowthReport {
    let tmin = t_values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut window: Vec<(f64, f64)> = t_values
        .iter()
        .zip(&norms)
        .filter(|(t, _)| **t <= 10.0 * tmin * (1.0 + 1e-12))
        .map(|(t, v)| (t.ln(), v.max(f64::MIN_POSITIVE).ln()))
        .collect();
    if window.len() < 2 {
        let mut all: Vec<(f64, f64)> = t_values
            .iter()
            .zip(&norms)
            .map(|(t, v)| (t.ln(), v.max(f64::MIN_POSITIVE).ln()))
            .collect();
        all.sort_by(|p, q| p.0.total_cmp(&q.0));
        all.truncate(2);
        window = all;
    }
    let m = window.len() as f64;
    let mx = window.iter().map(|p| p.0).sum::<f64>() / m;
    let my = window.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = window.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = window.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = window.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let alpha = -slope;
    let r2 = if syy <= m * FLAT_LOG_RMS * FLAT_LOG_RMS {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    let verdict = if r2 < R2_MIN {
        Verdict::Inconclusive
    } else if alpha <= ALPHA_BOUNDED_MAX {
        Verdict::Bounded
    } else if alpha >= ALPHA_DIVERGENT_MIN {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let min_norm = norms.iter().copied().fold(f64::INFINITY, f64::min);
    GrowthReport {
        fit_points: window.len(),
        t_values,
        norms,
        alpha,
        r2,
        verdict,
        max_norm,
        min_norm,
    }
}

/// The matrix of `u ↦ (y, u) x = x yᴴ u`.
pub fn rank_one_probe(x: &Vector, y: &Vector) -> Result<Matrix> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch("x and y differ in length".into()));
    }
    if x.norm() == 0.0 || y.norm() == 0.0 {
        return Err(Error::InvalidInput("rank-one probe needs nonzero vectors".into()));
    }
    Ok(x * y.adjoint())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchResult {
    #[serde(rename = "U", with = "crate::io::serde_matrix")]
    pub best_u: Matrix,
    pub best_norm: f64,
    pub evaluations: usize,
}

/// Searches the ball `‖U - Z‖ < radius` for invertible `U` maximizing
/// `‖φ(U A U⁻¹)‖`, spending at most `budget` evaluations.
pub fn divergence_search(
    a: &Matrix,
    z: &Matrix,
    phi: &Modifier,
    radius: f64,
    budget: usize,
    seed: u64,
) -> Result<SearchResult> {
    divergence_search_until(a, z, phi, radius, budget, seed, f64::INFINITY)
}

/// [`divergence_search`] that stops as soon as the norm exceeds `stop_above`.
///
/// The first phase walks down good paths `(Z + tE) G` with `G = I` and then
/// random `G` near the identity. Along such a path the conjugate of `A` blows
/// up like `1/t` unless `G A G⁻¹` keeps `ker Z` invariant, which fails for
/// generic `G` whenever `A` is not scalar. The second phase is a coordinate
/// ascent over rank-one moves `U + η x yᴴ` with shrinking step.
pub fn divergence_search_until(
    a: &Matrix,
    z: &Matrix,
    phi: &Modifier,
    radius: f64,
    budget: usize,
    seed: u64,
    stop_above: f64,
) -> Result<SearchResult> {
    let n = check_square(z, "Z")?;
    check_same_size(a, z, "A and Z")?;
    check_finite(a)?;
    check_finite(z)?;
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    if let Some(d) = phi.dim() {
        if d != n {
            return Err(Error::DimensionMismatch(format!("modifier acts on {d}×{d}")));
        }
    }
    let tol = Tolerance::default();
    let mut rng = seeded_rng(seed);
    let mut search = Search {
        a,
        z,
        phi,
        radius,
        budget,
        stop_above,
        evaluations: 0,
        best_u: Matrix::zeros(n, n),
        best_norm: -1.0,
    };

    // invertible Z has no pole to chase; move along Z + tI instead
    let e = match construct_good_path(z, &tol, 1) {
        Ok(gp) if !gp.pole_free => gp.e[0].clone(),
        _ => Matrix::identity(n, n),
    };
    let zn = norm2(z);
    let kernel = kernel_basis(z, &tol)?;
    let ts: Vec<f64> = (0..28).map(|k| 0.45 * radius * 10f64.powf(-0.5 * k as f64)).collect();
    let phase1 = budget / 2;
    let mut start = 0usize;
    while search.evaluations < phase1 && !search.done() {
        // start 0 is the plain good path, odd starts tilt it by G near I, even
        // starts shear by I + s x yᴴ with x in ker Z, which costs only s t ‖E x‖
        let shear = start.is_multiple_of(2) && start > 0 && kernel.dim() > 0;
        let g = if start % 2 == 1 || (start > 0 && !shear) {
            let w = ginibre(n, n, &mut rng);
            let w = w.scale(1.0 / norm2(&w));
            let delta = 0.4 * radius / zn.max(1.0) * rng.random_range(0.1..1.0);
            Matrix::identity(n, n) + w.scale(delta)
        } else {
            Matrix::identity(n, n)
        };
        let xy = if shear {
            let c = Vector::from_fn(kernel.dim(), |_, _| complex_normal(&mut rng));
            let x = kernel.basis() * c;
            let x = &x / C64::new(x.norm(), 0.0);
            let y0 = random_unit_vector(n, &mut rng);
            let y = &y0 - &x * x.dotc(&y0);
            Some(&x * y.adjoint() / C64::new(y.norm(), 0.0))
        } else {
            None
        };
        for &t in &ts {
            if search.evaluations >= phase1 || search.done() {
                break;
            }
            let m = z + e.scale(t);
            match &xy {
                Some(p) => {
                    let s = 0.4 * radius / (t * norm2(&(&e * p)).max(1e-300));
                    search.try_point(&m * (Matrix::identity(n, n) + p.scale(s.min(1e12))));
                }
                None => search.try_point(m * &g),
            }
        }
        start += 1;
    }

    let mut step = 0.25 * radius;
    let center = search.best_u.clone();
    let mut current = if search.best_norm >= 0.0 { center } else { z.clone() };
    while search.evaluations < budget && !search.done() {
        let x = random_unit_vector(n, &mut rng);
        let y = random_unit_vector(n, &mut rng);
        let eta = C64::new(step, 0.0) * complex_normal(&mut rng);
        let cand = &current + (&x * y.adjoint()) * eta;
        let before = search.best_norm;
        search.try_point(cand);
        if search.best_norm > before {
            current = search.best_u.clone();
        } else {
            step *= 0.97;
            if step < 1e-14 * radius {
                step = 0.25 * radius;
                current = search.best_u.clone();
            }
        }
    }
    if search.best_norm < 0.0 {
        search.best_u = z.clone();
        search.best_norm = 0.0;
    }
    Ok(SearchResult {
        best_u: search.best_u,
        best_norm: search.best_norm,
        evaluations: search.evaluations,
    })
}

struct Search<'a> {
    a: &'a Matrix,
    z: &'a Matrix,
    phi: &'a Modifier,
    radius: f64,
    budget: usize,
    stop_above: f64,
    evaluations: usize,
    best_u: Matrix,
    best_norm: f64,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.best_norm > self.stop_above || self.evaluations >= self.budget
    }

    /// Pulls `u` back into the open ball, then evaluates it.
    fn try_point(&mut self, mut u: Matrix) {
        let d = norm2(&(&u - self.z));
        if d >= self.radius {
            u = self.z + (&u - self.z).scale(0.99 * self.radius / d);
        }
        self.evaluations += 1;
        if let Some(c) = conjugate(&u, self.a) {
            let v = norm2(&apply_unchecked(self.phi, &c));
            if v.is_finite() && v > self.best_norm {
                self.best_norm = v;
                self.best_u = u;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Filtration {
    /// `F^0 ⊇ F^1 ⊇ …`.
    pub spaces: Vec<Subspace>,
}

impl Filtration {
    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(Subspace::dim).collect()
    }

    pub fn is_descending(&self, tol: &Tolerance) -> bool {
        self.spaces
            .windows(2)
            .all(|w| w[1].is_contained_in(&w[0], tol))
    }
}

/// `F^i = ∩_{k≤i} ker E_k`.
pub fn filtration_of(e_list: &[Matrix], tol: &Tolerance) -> Result<Filtration> {
    let first = e_list
        .first()
        .ok_or_else(|| Error::InvalidInput("empty coefficient list".into()))?;
    let mut spaces = vec![kernel_basis(first, tol)?];
    for e in &e_list[1..] {
        check_same_size(e, first, "coefficients")?;
        let next = spaces.last().expect("nonempty").intersect_kernel(e, tol)?;
        spaces.push(next);
    }
    Ok(Filtration { spaces })
}

/// Does `A` map every `F^i` into itself?
pub fn in_s_filtration(a: &Matrix, f: &Filtration, tol: &Tolerance) -> Result<MembershipVerdict> {
    let n = check_square(a, "A")?;
    check_finite(a)?;
    let thr = tol.scaled(norm2(a));
    let mut worst: f64 = 0.0;
    for s in &f.spaces {
        if s.ambient_dim() != n {
            return Err(Error::DimensionMismatch("filtration and A differ in size".into()));
        }
        if s.dim() == 0 {
            continue;
        }
        let leak = (Matrix::identity(n, n) - s.projector()) * a;
        worst = worst.max(norm2(&(&leak * s.basis())));
        if let Some(v) = violating_vector(&leak, s, thr) {
            let r = (&leak * &v).norm();
            return Ok(MembershipVerdict::no(r, Matrix::from_column_slice(n, 1, v.as_slice())));
        }
    }
    Ok(MembershipVerdict::yes(worst))
}

/// Orders of vanishing at `t = 0` of `det M(t)` and of `M(t) A adj M(t)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyPathOrders {
    pub det_order: usize,
    /// `None` when `M A adj M` vanishes identically.
    pub numerator_order: Option<usize>,
    pub bounded: bool,
}

/// Exact boundedness of `M(t) A M(t)⁻¹` for `M(t) = Z + Σ t^k E_k` as `t → 0`.
pub fn polynomial_path_bounded(
    z: &Matrix,
    e_list: &[Matrix],
    a: &Matrix,
    tol: &Tolerance,
) -> Result<bool> {
    Ok(polynomial_path_orders(z, e_list, a, tol)?.bounded)
}

/// Writes `M A M⁻¹ = P(t)/d(t)` with `P = M A adj M` and `d = det M` and
/// compares orders of vanishing. Both are polynomials of degree at most `np`,
/// recovered exactly by a discrete Fourier transform over `np + 1` roots of unity.
pub fn polynomial_path_orders(
    z: &Matrix,
    e_list: &[Matrix],
    a: &Matrix,
    _tol: &Tolerance,
) -> Result<PolyPathOrders> {
    let n = check_square(z, "Z")?;
    check_same_size(a, z, "A and Z")?;
    check_finite(z)?;
    check_finite(a)?;
    for e in e_list {
        check_same_size(e, z, "Z and E_k")?;
        check_finite(e)?;
    }
    let p = e_list.len().max(1);
    let m = n * p + 1;
    let mut dets = Vec::with_capacity(m);
    let mut nums = Vec::with_capacity(m);
    for k in 0..m {
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
        let mut mt = z.clone();
        let mut wk = ONE;
        for e in e_list {
            wk *= w;
            mt += e * wk;
        }
        dets.push(mt.clone().determinant());
        nums.push(&mt * a * adjugate(&mt));
    }
    let det_coef: Vec<C64> = (0..m).map(|j| dft_coefficient(&dets, j, |x| *x)).collect();
    let num_coef: Vec<Matrix> = (0..m)
        .map(|j| {
            let mut acc = Matrix::zeros(n, n);
            let len = nums.len() as f64;
            for (k, v) in nums.iter().enumerate() {
                let w = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / len);
                acc += v * w;
            }
            acc.unscale(len)
        })
        .collect();
    let dmax = det_coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if dmax == 0.0 {
        return Err(Error::InvalidPath("det M(t) vanishes identically".into()));
    }
    let det_order = det_coef
        .iter()
        .position(|c| c.norm() > POLY_COEFF_REL * dmax)
        .ok_or_else(|| Error::InvalidPath("det M(t) vanishes identically".into()))?;
    let entry_max = |c: &Matrix| c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let pmax = num_coef.iter().map(entry_max).fold(0.0, f64::max);
    let numerator_order = if pmax == 0.0 {
        None
    } else {
        num_coef.iter().position(|c| entry_max(c) > POLY_COEFF_REL * pmax)
    };
    Ok(PolyPathOrders {
        det_order,
        numerator_order,
        bounded: numerator_order.is_none_or(|o| o >= det_order),
    })
}

fn dft_coefficient<T>(vals: &[T], j: usize, f: impl Fn(&T) -> C64) -> C64 {
    let m = vals.len() as f64;
    vals.iter()
        .enumerate()
        .map(|(k, v)| f(v) * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / m))
        .sum::<C64>()
        / m
}

/// Classical adjugate from cofactors.
pub fn adjugate(m: &Matrix) -> Matrix {
    let n = m.nrows();
    if n == 1 {
        return Matrix::from_element(1, 1, ONE);
    }
    Matrix::from_fn(n, n, |i, j| {
        let minor = m.clone().remove_row(j).remove_column(i);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        minor.determinant() * sign
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalityReport {
    /// False when divergence was certified at `Z` or at a sampled `Z'`.
    pub consistent: bool,
    #[serde(with = "crate::io::serde_matrix_opt", skip_serializing_if = "Option::is_none", default)]
    pub violating: Option<Matrix>,
    pub best_norm: f64,
}

/// Falsifier for the claim that `A` stays bounded on a neighbourhood of `Z`.
///
/// Runs [`divergence_search`] at `Z` and at `samples` random points `Z'` with
/// `‖Z' - Z‖ < r/2`, each with radius `r/2`. Exceeding `threshold` anywhere
/// falsifies the claim and returns that point.
pub fn locality_probe(
    a: &Matrix,
    z: &Matrix,
    phi: &Modifier,
    r: f64,
    seed: u64,
) -> Result<LocalityReport> {
    locality_probe_with(a, z, phi, r, seed, 4, 2_000, DIVERGENCE_THRESHOLD)
}

#[allow(clippy::too_many_arguments)]
pub fn locality_probe_with(
    a: &Matrix,
    z: &Matrix,
    phi: &Modifier,
    r: f64,
    seed: u64,
    samples: usize,
    budget: usize,
    threshold: f64,
) -> Result<LocalityReport> {
    let n = check_square(z, "Z")?;
    if r.is_nan() || r <= 0.0 {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut best: f64 = 0.0;
    for s in 0..=samples {
        let zp = if s == 0 {
            z.clone()
        } else {
            let w = ginibre(n, n, &mut rng);
            z + w.scale(0.5 * r * rng.random_range(0.0..0.99) / norm2(&w))
        };
        let res = divergence_search_until(a, &zp, phi, 0.5 * r, budget, rng.random(), threshold)?;
        best = best.max(res.best_norm);
        if res.best_norm > threshold {
            return Ok(LocalityReport {
                consistent: false,
                violating: Some(zp),
                best_norm: res.best_norm,
            });
        }
    }
    Ok(LocalityReport {
        consistent: true,
        violating: None,
        best_norm: best,
    })
}

/// Good path of `Z` to the default order, for simulations.
pub fn good_path_spec(z: &Matrix, tol: &Tolerance) -> Result<PathSpec> {
    Ok(PathSpec::good_path(construct_good_path(z, tol, DEFAULT_ORDER)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::in_s_ker;
    use crate::numkit::{d_nm, elementary, from_real_rows, random_rank, real_diag};

    fn t() -> Tolerance {
        Tolerance::default()
    }

    fn d21_path() -> PathSpec {
        PathSpec::linear(d_nm(2, 1), real_diag(&[0.0, 1.0]))
    }

    #[test]
    fn grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 26);
        assert!((g[0] - 1e-1).abs() < 1e-15 && (g[25] - 1e-6).abs() < 1e-20);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(parse_grid("1e-6:1e-1:26").unwrap(), g);
        assert!(parse_grid("1:0.1:5").is_err());
        assert!(parse_grid("1e-6:1e-1").is_err());
    }

    #[test]
    fn closed_form_growth() {
        let up = simulate(&d21_path(), &elementary(2, 0, 1), &Modifier::Identity).unwrap();
        for (tv, v) in up.t_values.iter().zip(&up.norms) {
            assert!((v * tv - 1.0).abs() < 1e-9);
        }
        assert!((up.alpha - 1.0).abs() < 1e-6);
        assert_eq!(up.verdict, Verdict::Divergent);

        let down = simulate(&d21_path(), &elementary(2, 1, 0), &Modifier::Identity).unwrap();
        assert!((down.alpha + 1.0).abs() < 1e-6);
        assert_eq!(down.verdict, Verdict::Bounded);

        let id = simulate(&d21_path(), &Matrix::identity(2, 2), &Modifier::Identity).unwrap();
        assert!(id.norms.iter().all(|v| *v == 1.0));
        assert_eq!(id.verdict, Verdict::Bounded);
        assert!(id.to_csv().starts_with("t,norm\n"));
    }

    #[test]
    fn singular_grid_point_is_reported() {
        let p = PathSpec::linear(d_nm(2, 1), Matrix::zeros(2, 2));
        match simulate(&p, &Matrix::identity(2, 2), &Modifier::Identity) {
            Err(Error::PathSingular { t }) => assert!((t - 0.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn samples_and_polynomial_paths() {
        let samples: Vec<PathSample> = default_grid()
            .into_iter()
            .map(|tv| PathSample {
                t: tv,
                u: real_diag(&[1.0, tv * tv]),
            })
            .collect();
        let r = simulate(&PathSpec::samples(samples), &elementary(2, 0, 1), &Modifier::Identity).unwrap();
        assert!((r.alpha - 2.0).abs() < 1e-6);
        let p = PathSpec::polynomial(d_nm(2, 1), vec![Matrix::zeros(2, 2), real_diag(&[0.0, 1.0])]);
        let q = simulate(&p, &elementary(2, 0, 1), &Modifier::Identity).unwrap();
        assert!((q.alpha - 2.0).abs() < 1e-6);
    }

    #[test]
    fn fit_flags_poor_fits() {
        let ts = default_grid();
        let wobble: Vec<f64> = (0..ts.len()).map(|k| if k % 2 == 0 { 1.0 } else { 5.0 }).collect();
        assert_eq!(fit_growth(ts, wobble).verdict, Verdict::Inconclusive);
        let ts = default_grid();
        let half: Vec<f64> = ts.iter().map(|x| x.powf(-0.5)).collect();
        let r = fit_growth(ts, half);
        assert!((r.alpha - 0.5).abs() < 1e-9);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn good_path_growth_tracks_kernel_criterion() {
        let mut rng = seeded_rng(21);
        for trial in 0..30 {
            let n = 2 + trial % 3;
            let z = random_rank(n, 1 + trial % (n - 1), &mut rng);
            let a = if trial % 2 == 0 {
                ginibre(n, n, &mut rng)
            } else {
                let b = crate::criteria::basis_s_ker(&z, &t()).unwrap();
                b.iter().fold(Matrix::zeros(n, n), |acc, m| acc + m * complex_normal(&mut rng))
            };
            let r = simulate(&good_path_spec(&z, &t()).unwrap(), &a, &Modifier::Identity).unwrap();
            let member = in_s_ker(&a, &z, &t()).unwrap().member;
            let expected = if member { Verdict::Bounded } else { Verdict::Divergent };
            assert_eq!(r.verdict, expected, "trial {trial}: alpha {}", r.alpha);
        }
    }

    #[test]
    fn probe_algebra() {
        let mut rng = seeded_rng(22);
        let e = |i: usize| Vector::from_fn(3, |r, _| if r == i { ONE } else { ZERO });
        assert_eq!(rank_one_probe(&e(0), &e(1)).unwrap(), elementary(3, 0, 1));
        assert_eq!(
            rank_one_probe(&e(0), &e(1)).unwrap() * rank_one_probe(&e(1), &e(2)).unwrap(),
            elementary(3, 0, 2)
        );
        let id: Matrix = (0..3).map(|i| rank_one_probe(&e(i), &e(i)).unwrap()).sum();
        assert_eq!(id, Matrix::identity(3, 3));
        assert!(rank_one_probe(&Vector::zeros(3), &e(0)).is_err());
        for _ in 0..20 {
            let x = random_unit_vector(4, &mut rng);
            let y = random_unit_vector(4, &mut rng);
            let w = random_unit_vector(4, &mut rng);
            let a = ginibre(4, 4, &mut rng);
            let exy = rank_one_probe(&x, &y).unwrap();
            let eyw = rank_one_probe(&y, &w).unwrap();
            let exw = rank_one_probe(&x, &w).unwrap();
            // E_xy E_yw = E_xw for unit y
            assert!(norm2(&(&exy * &eyw - &exw)) < 1e-12);
            // E_xy A E_xy = (Ax, y) E_xy
            let ayx = y.dotc(&(&a * &x));
            assert!(norm2(&(&exy * &a * &exy - &exy * ayx)) < 1e-12);
            // E_xyᴴ = E_yx
            assert!(norm2(&(exy.adjoint() - rank_one_probe(&y, &x).unwrap())) < 1e-12);
            // E_yw E_xy = 0 when (x, w) = 0
            let wp = &w - &x * x.dotc(&w);
            let eywp = rank_one_probe(&y, &wp).unwrap();
            assert!(norm2(&(&eywp * &exy)) < 1e-12);
        }
    }

    #[test]
    fn search_examples() {
        let z = Matrix::zeros(2, 2);
        let a = real_diag(&[1.0, 2.0]);
        let r = divergence_search(&a, &z, &Modifier::Identity, 0.1, 10_000, 1).unwrap();
        assert!(r.best_norm > 1e6);
        assert!(norm2(&(&r.best_u - &z)) < 0.1);

        let lam = Matrix::identity(3, 3) * C64::new(0.3, -1.7);
        let r = divergence_search(&lam, &d_nm(3, 1), &Modifier::Identity, 0.1, 2_000, 2).unwrap();
        assert!((r.best_norm - C64::new(0.3, -1.7).norm()).abs() < 1e-12);

        let r = divergence_search(&elementary(3, 1, 2), &d_nm(3, 1), &Modifier::Identity, 0.1, 10_000, 3).unwrap();
        assert!(r.best_norm > 1e6);
    }

    #[test]
    fn search_finds_blowup_for_kernel_members() {
        // A preserves ker Z, so the plain good path stays bounded
        let z = d_nm(3, 1);
        let a = from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 3.0]]);
        assert!(in_s_ker(&a, &z, &t()).unwrap().member);
        let r = divergence_search(&a, &z, &Modifier::Identity, 0.1, 10_000, 4).unwrap();
        assert!(r.best_norm > 1e6);
    }

    #[test]
    fn filtration_examples() {
        let f = filtration_of(&[d_nm(2, 1), real_diag(&[0.0, 1.0])], &t()).unwrap();
        assert_eq!(f.dims(), vec![1, 0]);
        assert!(f.is_descending(&t()));
        let e2 = Matrix::from_column_slice(2, 1, &[ZERO, ONE]);
        assert!(crate::numkit::subspace_equal(&f.spaces[0], &Subspace::span_of(&e2, &t()).unwrap(), &t()).unwrap());
        let f = filtration_of(&[Matrix::zeros(3, 3), Matrix::identity(3, 3)], &t()).unwrap();
        assert_eq!(f.dims(), vec![3, 0]);

        let f = filtration_of(&[d_nm(2, 1), real_diag(&[0.0, 1.0])], &t()).unwrap();
        assert!(in_s_filtration(&Matrix::identity(2, 2), &f, &t()).unwrap().member);
        let v = in_s_filtration(&elementary(2, 0, 1), &f, &t()).unwrap();
        assert!(!v.member && v.witness.is_some());
    }

    #[test]
    fn good_path_filtration_equals_kernel_criterion() {
        let mut rng = seeded_rng(23);
        for trial in 0..20 {
            let n = 2 + trial % 4;
            let z = random_rank(n, 1 + trial % (n - 1), &mut rng);
            let gp = construct_good_path(&z, &t(), 2).unwrap();
            let mut coeffs = vec![gp.z.clone()];
            coeffs.extend(gp.e.iter().cloned());
            let f = filtration_of(&coeffs, &t()).unwrap();
            assert_eq!(*f.dims().last().unwrap(), 0);
            let a = if trial % 2 == 0 {
                ginibre(n, n, &mut rng)
            } else {
                let b = crate::criteria::basis_s_ker(&z, &t()).unwrap();
                b.iter().fold(Matrix::zeros(n, n), |acc, m| acc + m * complex_normal(&mut rng))
            };
            assert_eq!(
                in_s_filtration(&a, &f, &t()).unwrap().member,
                in_s_ker(&a, &z, &t()).unwrap().member
            );
        }
    }

    #[test]
    fn adjugate_oracle() {
        let m = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(adjugate(&m), from_real_rows(&[&[4.0, -2.0], &[-3.0, 1.0]]));
        let mut rng = seeded_rng(24);
        let m = ginibre(4, 4, &mut rng);
        let prod = &m * adjugate(&m);
        let d = m.clone().determinant();
        assert!(norm2(&(prod - Matrix::identity(4, 4) * d)) < 1e-10);
    }

    #[test]
    fn polynomial_examples() {
        let z = d_nm(2, 1);
        let e = vec![real_diag(&[0.0, 1.0])];
        let o = polynomial_path_orders(&z, &e, &elementary(2, 0, 1), &t()).unwrap();
        assert_eq!((o.det_order, o.numerator_order, o.bounded), (1, Some(0), false));
        let o = polynomial_path_orders(&z, &e, &elementary(2, 1, 0), &t()).unwrap();
        assert_eq!((o.det_order, o.numerator_order, o.bounded), (1, Some(2), true));
        assert!(polynomial_path_bounded(&z, &e, &Matrix::identity(2, 2), &t()).unwrap());
        assert!(polynomial_path_bounded(&z, &e, &Matrix::zeros(2, 2), &t()).unwrap());
        assert!(matches!(
            polynomial_path_bounded(&z, &[Matrix::zeros(2, 2)], &Matrix::identity(2, 2), &t()),
            Err(Error::InvalidPath(_))
        ));
    }

    #[test]
    fn locality_examples() {
        let lam = Matrix::identity(2, 2) * C64::new(2.0, 0.0);
        assert!(locality_probe(&lam, &d_nm(2, 1), &Modifier::Identity, 0.1, 1).unwrap().consistent);
        let r = locality_probe(&real_diag(&[1.0, 2.0]), &d_nm(2, 1), &Modifier::Identity, 0.1, 2).unwrap();
        assert!(!r.consistent && r.violating.is_some());
        let inv = from_real_rows(&[&[2.0, 1.0], &[0.0, 3.0]]);
        let a = from_real_rows(&[&[1.0, 5.0], &[-2.0, 0.5]]);
        assert!(locality_probe(&a, &inv, &Modifier::Identity, 0.05, 3).unwrap().consistent);
    }

    #[test]
    fn path_spec_json() {
        let p = d21_path();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"kind\":\"linear\""));
        let back: PathSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back.t_grid.len(), 26);
        let no_grid = r#"{"kind":"linear","Z":{"rows":1,"cols":1,"data":[[0,0]]},"E":{"rows":1,"cols":1,"data":[[1,0]]}}"#;
        let q: PathSpec = serde_json::from_str(no_grid).unwrap();
        assert_eq!(q.t_grid, default_grid());
    }
}
