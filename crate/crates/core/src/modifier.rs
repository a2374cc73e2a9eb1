//! Modifiers φ applied to conjugates before taking norms, membership in the
//! union algebra `S_∪^φ(Z)`, nilpotent faithfulness and the Gershgorin tools.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::MembershipVerdict;
use crate::error::{Error, Result};
use crate::numkit::{
    check_same_size, check_square, complex_normal, eigenvalues, kernel_basis, norm2, seeded_rng,
    singular_values, unvec, vec_of, Matrix, Tolerance, Vector, C64, ONE, ZERO,
};

/// Draws used to look for an invertible element of a solution space.
pub const DEFAULT_DRAWS: usize = 16;
/// Relative smallest-singular-value threshold for calling a draw invertible.
pub const INVERTIBLE_REL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Modifier {
    Identity,
    /// Entrywise product with `H`.
    Hadamard {
        #[serde(rename = "H", with = "crate::io::serde_matrix")]
        h: Matrix,
    },
    /// `L` acts on column-major `vec(A)`.
    General {
        #[serde(rename = "L", with = "crate::io::serde_matrix")]
        l: Matrix,
    },
}

impl Modifier {
    /// Hadamard product with `J = 1 - I`, which deletes the diagonal.
    pub fn j(n: usize) -> Self {
        Modifier::Hadamard {
            h: Matrix::from_fn(n, n, |i, k| if i == k { ZERO } else { ONE }),
        }
    }

    pub fn hadamard(h: Matrix) -> Result<Self> {
        check_square(&h, "H")?;
        Ok(Modifier::Hadamard { h })
    }

    pub fn general(l: Matrix) -> Result<Self> {
        let n2 = check_square(&l, "L")?;
        let n = (n2 as f64).sqrt().round() as usize;
        if n * n != n2 {
            return Err(Error::InvalidInput(format!(
                "L must be n²×n², got {n2}×{n2}"
            )));
        }
        Ok(Modifier::General { l })
    }

    /// Matrix size the modifier acts on, `None` for the identity.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Modifier::Identity => None,
            Modifier::Hadamard { h } => Some(h.nrows()),
            Modifier::General { l } => Some((l.nrows() as f64).sqrt().round() as usize),
        }
    }

    /// The n²×n² matrix of φ on column-major vectorizations.
    pub fn as_general(&self, n: usize) -> Matrix {
        match self {
            Modifier::Identity => Matrix::identity(n * n, n * n),
            Modifier::Hadamard { h } => Matrix::from_diagonal(&vec_of(h)),
            Modifier::General { l } => l.clone(),
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != n => Err(Error::DimensionMismatch(format!(
                "modifier acts on {d}×{d} matrices, input is {n}×{n}"
            ))),
            _ => Ok(()),
        }
    }
}

/// φ(A).
pub fn apply(phi: &Modifier, a: &Matrix) -> Result<Matrix> {
    let n = check_square(a, "A")?;
    phi.check_dim(n)?;
    Ok(apply_unchecked(phi, a))
}

pub(crate) fn apply_unchecked(phi: &Modifier, a: &Matrix) -> Matrix {
    match phi {
        Modifier::Identity => a.clone(),
        Modifier::Hadamard { h } => a.component_mul(h),
        Modifier::General { l } => unvec(&(l * vec_of(a)), a.nrows(), a.ncols()),
    }
}

/// Operator norm bound of φ used for scaling thresholds.
fn phi_scale(phi: &Modifier) -> f64 {
    match phi {
        Modifier::Identity => 1.0,
        Modifier::Hadamard { h } => h.iter().map(|x| x.norm()).fold(0.0, f64::max) * h.nrows() as f64,
        Modifier::General { l } => norm2(l),
    }
}

/// Outcome of a union-membership decision with its diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnionReport {
    /// On success the witness is the annihilator `C`; on failure it is `φ(Z A K Lᴴ)`.
    pub verdict: MembershipVerdict,
    /// Dimension of the space of `X` solving the linear constraint.
    pub solution_dim: usize,
    /// Index of the random draw that produced an invertible `X`.
    pub successful_draw: Option<usize>,
    pub draws: usize,
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

/// Does some `C` with `im C = ker Z`, `ker C = im Z` satisfy `φ(ZAC) = 0`?
pub fn in_s_union_phi(
    a: &Matrix,
    z: &Matrix,
    phi: &Modifier,
    tol: &Tolerance,
    seed: u64,
) -> Result<MembershipVerdict> {
    Ok(union_membership(a, z, phi, tol, seed, DEFAULT_DRAWS)?.verdict)
}

/// Dual form with the constraint `φ(CAZ) = 0`.
pub fn in_s_union_phi_dual(
    a: &Matrix,
    z: &Matrix,
    phi: &Modifier,
    tol: &Tolerance,
    seed: u64,
) -> Result<MembershipVerdict> {
    Ok(union_membership_dual(a, z, phi, tol, seed, DEFAULT_DRAWS)?.verdict)
}

/// [`in_s_union_phi`] with diagnostics.
///
/// Every admissible `C` is `K X Lᴴ` with `K`, `L` orthonormal bases of `ker Z`
/// and `ker Zᴴ` and `X` invertible. The constraint is linear in `X`; its
/// solution space is searched for an invertible element by seeded random draws.
pub fn union_membership(
    a: &Matrix,
    z: &Matrix,
    phi: &Modifier,
    tol: &Tolerance,
    seed: u64,
    draws: usize,
) -> Result<UnionReport> {
    decide_union(a, z, phi, tol, seed, draws, Side::Left)
}

pub fn union_membership_dual(
    a: &Matrix,
    z: &Matrix,
    phi: &Modifier,
    tol: &Tolerance,
    seed: u64,
    draws: usize,
) -> Result<UnionReport> {
    decide_union(a, z, phi, tol, seed, draws, Side::Right)
}

fn decide_union(
    a: &Matrix,
    z: &Matrix,
    phi: &Modifier,
    tol: &Tolerance,
    seed: u64,
    draws: usize,
    side: Side,
) -> Result<UnionReport> {
    let n = check_square(z, "Z")?;
    check_same_size(a, z, "A and Z")?;
    phi.check_dim(n)?;
    let kb = kernel_basis(z, tol)?;
    let lb = kernel_basis(&z.adjoint(), tol)?;
    let k = kb.dim();
    if k == 0 {
        return Ok(UnionReport {
            verdict: MembershipVerdict {
                member: true,
                residual: 0.0,
                witness: Some(Matrix::zeros(n, n)),
            },
            solution_dim: 1,
            successful_draw: None,
            draws: 0,
        });
    }
    let (kb, lb) = (kb.basis(), lb.basis());
    let lh = lb.adjoint();
    let constraint = |x: &Matrix| -> Matrix {
        let c = kb * x * &lh;
        let p = match side {
            Side::Left => z * a * c,
            Side::Right => c * a * z,
        };
        apply_unchecked(phi, &p)
    };

    let mut g = Matrix::zeros(n * n, k * k);
    for j in 0..k {
        for i in 0..k {
            let mut e = Matrix::zeros(k, k);
            e[(i, j)] = ONE;
            g.column_mut(j * k + i).copy_from(&vec_of(&constraint(&e)));
        }
    }
    let scale = phi_scale(phi) * norm2(z) * norm2(a);
    let sol = if norm2(&g) <= tol.scaled(scale) * 1e-3 {
        crate::numkit::Subspace::full(k * k)
    } else {
        kernel_basis(&g, tol)?
    };
    let d = sol.dim();
    let failure = |sd: usize| {
        let w = constraint(&Matrix::identity(k, k));
        UnionReport {
            verdict: MembershipVerdict::no(norm2(&w), w),
            solution_dim: sd,
            successful_draw: None,
            draws,
        }
    };
    if d == 0 {
        return Ok(failure(0));
    }
    let mut rng = seeded_rng(seed);
    for draw in 0..draws {
        let coeffs = Vector::from_fn(d, |_, _| complex_normal(&mut rng));
        let x = unvec(&(sol.basis() * coeffs), k, k);
        let s = singular_values(&x);
        if s[k - 1] > INVERTIBLE_REL * s[0] {
            let c = kb * &x * &lh;
            let residual = norm2(&constraint(&x));
            return Ok(UnionReport {
                verdict: MembershipVerdict {
                    member: true,
                    residual,
                    witness: Some(c),
                },
                solution_dim: d,
                successful_draw: Some(draw),
                draws,
            });
        }
    }
    Ok(failure(d))
}

/// Outcome of a nilpotent-faithfulness test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaithfulReport {
    pub faithful: bool,
    /// False when a `true` answer rests on a randomized search.
    pub certified: bool,
    /// Nonzero `T` with `T² = 0` and `φ(T) = 0`.
    #[serde(with = "crate::io::serde_matrix_opt", skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Matrix>,
}

/// Is `φ(T) ≠ 0` for every nonzero `T` with `T² = 0`?
///
/// Hadamard modifiers are decided exactly: faithful iff every off-diagonal entry
/// of `H` is nonzero. General modifiers go through [`nilpotent_falsifier`].
pub fn nilpotent_faithful(
    phi: &Modifier,
    n: usize,
    tol: &Tolerance,
    seed: u64,
    trials: usize,
) -> Result<FaithfulReport> {
    phi.check_dim(n)?;
    match phi {
        Modifier::Identity => Ok(FaithfulReport {
            faithful: true,
            certified: true,
            counterexample: None,
        }),
        Modifier::Hadamard { h } => {
            let hmax = h.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let zero_cut = tol.residual_abs * hmax;
            for i in 0..n {
                for j in 0..n {
                    if i != j && h[(i, j)].norm() <= zero_cut {
                        return Ok(FaithfulReport {
                            faithful: false,
                            certified: true,
                            counterexample: Some(crate::numkit::elementary(n, i, j)),
                        });
                    }
                }
            }
            Ok(FaithfulReport {
                faithful: true,
                certified: true,
                counterexample: None,
            })
        }
        Modifier::General { .. } => nilpotent_falsifier(phi, n, tol, seed, trials),
    }
}

/// Searches for a nonzero square-zero `T` in the kernel of φ.
///
/// Every `T` with `T² = 0` has the form `Q_W Y Q_{W⊥}ᴴ` for a subspace `W` with
/// `im T ⊆ W ⊆ ker T`. For each candidate `W` (coordinate lines, coordinate
/// hyperplanes, images of kernel elements of φ, then `trials` random subspaces)
/// the kernel of φ on that family is computed exactly. A hit is verified before
/// it is returned; no hit yields an uncertified `true`. An injective φ is
/// certified faithful.
pub fn nilpotent_falsifier(
    phi: &Modifier,
    n: usize,
    tol: &Tolerance,
    seed: u64,
    trials: usize,
) -> Result<FaithfulReport> {
    phi.check_dim(n)?;
    let l = phi.as_general(n);
    let null = kernel_basis(&l, tol)?;
    if null.dim() == 0 || n < 2 {
        return Ok(FaithfulReport {
            faithful: true,
            certified: true,
            counterexample: None,
        });
    }
    let scale = norm2(&l);
    let mut rng = seeded_rng(seed);

    let mut candidates: Vec<Matrix> = Vec::new();
    for i in 0..n {
        let e = Matrix::from_fn(n, 1, |r, _| if r == i { ONE } else { ZERO });
        candidates.push(e.clone());
        candidates.push(kernel_basis(&e.adjoint(), tol)?.basis().clone());
    }
    for c in 0..null.dim() {
        let t = unvec(&null.basis().column(c).into_owned(), n, n);
        let im = crate::numkit::image_basis(&t, tol)?;
        if im.dim() > 0 && im.dim() < n {
            candidates.push(im.basis().clone());
        }
    }
    for _ in 0..trials {
        let w = rng.random_range(1..n);
        let g = crate::numkit::ginibre(n, w, &mut rng);
        candidates.push(crate::numkit::image_basis(&g, tol)?.basis().clone());
    }

    for qw in candidates {
        if let Some(t) = kernel_hit(&qw, phi, n, tol, scale, &mut rng)? {
            return Ok(FaithfulReport {
                faithful: false,
                certified: true,
                counterexample: Some(t),
            });
        }
    }
    Ok(FaithfulReport {
        faithful: true,
        certified: false,
        counterexample: None,
    })
}

fn kernel_hit<R: Rng>(
    qw: &Matrix,
    phi: &Modifier,
    n: usize,
    tol: &Tolerance,
    scale: f64,
    rng: &mut R,
) -> Result<Option<Matrix>> {
    let w = qw.ncols();
    if w == 0 || w >= n {
        return Ok(None);
    }
    let qperp = kernel_basis(&qw.adjoint(), tol)?;
    let qp = qperp.basis();
    let m = n - w;
    let mut g = Matrix::zeros(n * n, w * m);
    for j in 0..m {
        for i in 0..w {
            let t = qw.column(i) * qp.column(j).adjoint();
            g.column_mut(j * w + i)
                .copy_from(&vec_of(&apply_unchecked(phi, &t)));
        }
    }
    let sol = kernel_basis(&g, tol)?;
    if sol.dim() == 0 {
        return Ok(None);
    }
    let coeffs = Vector::from_fn(sol.dim(), |_, _| complex_normal(rng));
    let y = unvec(&(sol.basis() * coeffs), w, m);
    let mut t = qw * y * qp.adjoint();
    let nt = norm2(&t);
    if nt == 0.0 {
        return Ok(None);
    }
    t /= C64::new(nt, 0.0);
    let square = norm2(&(&t * &t));
    let image = norm2(&apply_unchecked(phi, &t));
    if square <= tol.residual_abs && image <= tol.scaled(scale) {
        Ok(Some(t))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GershgorinRegion {
    pub centers: Vec<C64>,
    pub radii: Vec<f64>,
}

impl GershgorinRegion {
    /// Distance by which `z` lies outside the union of disks (≤ 0 when inside).
    pub fn excess(&self, z: C64) -> f64 {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| (z - c).norm() - r)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: C64, margin: f64) -> bool {
        self.excess(z) <= margin
    }
}

/// Disks centered at `a_ii` with radii `Σ_{j≠i} |a_ij|`.
pub fn gershgorin(a: &Matrix) -> Result<GershgorinRegion> {
    let n = check_square(a, "A")?;
    let centers = (0..n).map(|i| a[(i, i)]).collect();
    let radii = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum())
        .collect();
    Ok(GershgorinRegion { centers, radii })
}

/// Terms of `Σ|a_ii| ≤ 2 ΣR_j + Σ|λ_i|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JBound {
    pub diag_abs_sum: f64,
    pub radii_sum: f64,
    pub eig_abs_sum: f64,
    /// `2 ΣR_j + Σ|λ_i|`.
    pub bound: f64,
    pub holds: bool,
}

/// Bounds the diagonal of `A` by its off-diagonal part and its spectrum.
pub fn j_norm_bound(a: &Matrix) -> Result<JBound> {
    let g = gershgorin(a)?;
    let diag_abs_sum: f64 = g.centers.iter().map(|c| c.norm()).sum();
    let radii_sum: f64 = g.radii.iter().sum();
    let eig_abs_sum: f64 = eigenvalues(a).iter().map(|l| l.norm()).sum();
    let bound = 2.0 * radii_sum + eig_abs_sum;
    let slack = 1e-10 * (diag_abs_sum + bound).max(1.0);
    Ok(JBound {
        diag_abs_sum,
        radii_sum,
        eig_abs_sum,
        bound,
        holds: diag_abs_sum <= bound + slack,
    })
}

/// Realized constants of the diagonal bound along a conjugation family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagBoundReport {
    pub holds: bool,
    /// True when `sup ‖J*B_k‖` reached the threshold, so the implication is vacuous.
    pub vacuous: bool,
    pub sup_offdiag: f64,
    pub sup_norm: f64,
    pub c1: f64,
    pub c2: f64,
    /// Largest `‖B_k‖ - (c1 ‖J*B_k‖ + c2)` over the family.
    pub worst_margin: f64,
}

/// Maximum absolute row sum, the norm in which the constants below are exact.
pub fn norm_inf(a: &Matrix) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Checks `sup‖B_k‖ ≤ c1 sup‖J*B_k‖ + c2` with `c1 = 2n + 1`, `c2 = Σ|λ_i(B_0)|`.
///
/// Norms are max row sums. Every `b_ii` lies within `2ΣR` of some eigenvalue, so
/// `|b_ii| ≤ 2n‖J*B‖ + c2` and the bound holds termwise for each member.
pub fn conjugation_diag_bound_check(b_seq: &[Matrix], threshold: f64) -> Result<DiagBoundReport> {
    let b0 = b_seq
        .first()
        .ok_or_else(|| Error::InvalidInput("empty family".into()))?;
    let n = check_square(b0, "B_0")?;
    let lam0 = eigenvalues(b0);
    let c1 = 2.0 * n as f64 + 1.0;
    let c2: f64 = lam0.iter().map(|l| l.norm()).sum();
    let j = Modifier::j(n);
    let mut sup_offdiag: f64 = 0.0;
    let mut sup_norm: f64 = 0.0;
    let mut worst_margin = f64::NEG_INFINITY;
    for (k, b) in b_seq.iter().enumerate() {
        check_square(b, "B_k")?;
        check_same_size(b, b0, "family members")?;
        let lam = eigenvalues(b);
        let eig_tol = 1e-6 * norm2(b).max(1.0);
        if let Some(gap) = spectrum_mismatch(&lam0, &lam, eig_tol) {
            return Err(Error::NotAConjugationFamily(format!(
                "eigenvalues of B_{k} differ from those of B_0 by {gap:e}"
            )));
        }
        let off = norm_inf(&apply_unchecked(&j, b));
        let full = norm_inf(b);
        sup_offdiag = sup_offdiag.max(off);
        sup_norm = sup_norm.max(full);
        worst_margin = worst_margin.max(full - (c1 * off + c2));
    }
    let vacuous = sup_offdiag >= threshold;
    let slack = 1e-9 * (c1 * sup_offdiag + c2).max(1.0);
    let holds = vacuous || sup_norm <= c1 * sup_offdiag + c2 + slack;
    Ok(DiagBoundReport {
        holds,
        vacuous,
        sup_offdiag,
        sup_norm,
        c1,
        c2,
        worst_margin,
    })
}

/// Greedy nearest matching of two spectra; returns the first gap above `tol`.
fn spectrum_mismatch(a: &[C64], b: &[C64], tol: f64) -> Option<f64> {
    let mut used = vec![false; b.len()];
    for x in a {
        let (idx, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        if idx == usize::MAX || d > tol {
            return Some(d);
        }
        used[idx] = true;
    }
    None
}
