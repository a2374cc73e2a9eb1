//! Gershgorin disks and the diagonal bound Σ|a_ii| ≤ 2ΣR_i + Σ|λ_i|.

use conjlim::modifier::{conjugation_diag_bound_check, gershgorin, j_norm_bound};
use conjlim::numkit::{eigenvalues, from_real_rows, ginibre, real_diag, seeded_rng, Matrix};

fn main() -> conjlim::error::Result<()> {
    let mut rng = seeded_rng(3);
    let a = ginibre(4, 4, &mut rng);
    let g = gershgorin(&a)?;
    for l in eigenvalues(&a) {
        println!("λ = {:+.3}{:+.3}i, distance outside disks {:+.3}", l.re, l.im, g.excess(l));
    }
    let b = j_norm_bound(&a)?;
    println!("Σ|a_ii| = {:.3} ≤ 2ΣR + Σ|λ| = {:.3}: {}", b.diag_abs_sum, b.bound, b.holds);

    // diag(1,t) B diag(1,1/t) with B = [[1,1],[1,1]]: the off-diagonal part blows up
    let base = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
    let fam: Vec<Matrix> = (0..8)
        .map(|k| {
            let t = 10f64.powi(-k);
            real_diag(&[1.0, t]) * &base * real_diag(&[1.0, 1.0 / t])
        })
        .collect();
    let r = conjugation_diag_bound_check(&fam, 1e6)?;
    println!(
        "family: sup‖J*B‖ = {:.1e}, sup‖B‖ = {:.1e}, c1 = {}, c2 = {:.1}, holds {} (vacuous {})",
        r.sup_offdiag, r.sup_norm, r.c1, r.c2, r.holds, r.vacuous
    );
    Ok(())
}
