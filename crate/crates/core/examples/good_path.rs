//! Builds a good path of a random rank-deficient matrix and checks its Laurent inverse.

use conjlim::goodpath::{construct_good_path, identity_residuals, in_c_prime, verify_rigidity};
use conjlim::numkit::{norm2, random_rank, seeded_rng, Tolerance};

fn main() -> conjlim::error::Result<()> {
    let tol = Tolerance::default();
    let mut rng = seeded_rng(7);
    let z = random_rank(5, 2, &mut rng);
    let gp = construct_good_path(&z, &tol, 8)?;

    let (left, right) = identity_residuals(&gp);
    println!("M(t) = Z + tE with rank Z = 2, n = 5");
    println!("coefficient residuals of M·M⁻¹ = I: left {left:.2e}, right {right:.2e}");
    println!("‖Z C₋₁‖ = {:.2e}, ‖C₋₁ Z‖ = {:.2e}", norm2(&(&z * &gp.c_neg)), norm2(&(&gp.c_neg * &z)));
    println!("im C₋₁ = ker Z and ker C₋₁ = im Z: {}", in_c_prime(&gp.c_neg, &z, &tol)?);
    println!("rigidity index: {}", verify_rigidity(&gp.z, &gp.e, &tol)?);

    for t in [1e-1, 1e-3, 1e-5] {
        let err = norm2(&(gp.eval(t) * gp.eval_inverse(t) - conjlim::numkit::Matrix::identity(5, 5)));
        println!("t = {t:.0e}: ‖M(t)·series(t) - I‖ = {err:.2e}");
    }
    println!("\n{}", serde_json::to_string(&gp).unwrap().chars().take(120).collect::<String>() + " ...");
    Ok(())
}
