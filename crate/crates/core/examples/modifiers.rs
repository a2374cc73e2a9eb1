//! Modifiers: the 3×3 example where a union over annihilators is needed, the
//! diagonal-deleting J and nilpotent faithfulness.

use conjlim::criteria::in_s_ker;
use conjlim::modifier::{apply, nilpotent_faithful, union_membership, Modifier};
use conjlim::numkit::{d_nm, elementary, ginibre, norm2, seeded_rng, Tolerance};

fn main() -> conjlim::error::Result<()> {
    let tol = Tolerance::default();
    let mut rng = seeded_rng(11);
    let z = d_nm(3, 1);
    let h = Modifier::hadamard(elementary(3, 0, 2))?;

    println!("Z = diag(1,0,0), φ = E13 * (·)");
    for k in 0..3 {
        let a = ginibre(3, 3, &mut rng);
        let r = union_membership(&a, &z, &h, &tol, k, 16)?;
        let c = r.verdict.witness.as_ref().unwrap();
        println!(
            "  random A #{k}: member {}, ‖φ(ZAC)‖ = {:.1e}, solution space dim {}, draw {:?}",
            r.verdict.member,
            norm2(&apply(&h, &(&z * &a * c))?),
            r.solution_dim,
            r.successful_draw
        );
        println!("      kernel criterion alone says {}", in_s_ker(&a, &z, &tol)?.member);
    }

    let j = Modifier::j(3);
    let a = elementary(3, 1, 2);
    let r = union_membership(&a, &z, &j, &tol, 0, 16)?;
    println!("\nφ = J, A = E23: member {} (A ker Z ⊆ ker Z: {})", r.verdict.member, in_s_ker(&a, &z, &tol)?.member);

    for (name, phi) in [("J", j), ("E13", h)] {
        let f = nilpotent_faithful(&phi, 3, &tol, 0, 16)?;
        println!("faithful on square-zero matrices, H = {name}: {} (certified {})", f.faithful, f.certified);
        if let Some(t) = f.counterexample {
            println!("    counterexample T with T² = 0, φ(T) = 0: ‖T‖ = {:.1}", norm2(&t));
        }
    }
    Ok(())
}
