//! Near a singular Z only scalar matrices stay bounded; the search certifies blow-up.

use conjlim::modifier::Modifier;
use conjlim::numkit::{d_nm, from_real_rows, norm2, real_diag, Matrix, C64};
use conjlim::pathsim::{divergence_search_until, locality_probe};

fn main() -> conjlim::error::Result<()> {
    let z = d_nm(3, 1);
    let cases = [
        ("diag(1,2,3)", real_diag(&[1.0, 2.0, 3.0])),
        ("keeps ker Z", from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 3.0]])),
        ("2i·I", Matrix::identity(3, 3) * C64::new(0.0, 2.0)),
    ];
    for (label, a) in cases {
        let r = divergence_search_until(&a, &z, &Modifier::Identity, 0.1, 10_000, 1, 1e6)?;
        println!(
            "{label:<12} best ‖UAU⁻¹‖ = {:.3e} after {} evaluations, ‖U - Z‖ = {:.3}",
            r.best_norm,
            r.evaluations,
            norm2(&(&r.best_u - &z))
        );
    }
    let inv = from_real_rows(&[&[2.0, 1.0], &[0.0, 3.0]]);
    let a = from_real_rows(&[&[1.0, 5.0], &[-2.0, 0.5]]);
    let p = locality_probe(&a, &inv, &Modifier::Identity, 0.05, 3)?;
    println!("invertible Z, radius 0.05: bounded claim survives = {}, best norm {:.2}", p.consistent, p.best_norm);
    Ok(())
}
