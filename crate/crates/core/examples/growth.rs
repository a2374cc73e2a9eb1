//! Growth exponents along paths, with the exact polynomial test alongside.

use conjlim::modifier::Modifier;
use conjlim::numkit::{d_nm, elementary, real_diag, Tolerance};
use conjlim::pathsim::{polynomial_path_orders, simulate, PathSpec};

fn main() -> conjlim::error::Result<()> {
    let tol = Tolerance::default();
    let z = d_nm(2, 1);
    let e = real_diag(&[0.0, 1.0]);
    let path = PathSpec::linear(z.clone(), e.clone());

    for (label, a) in [("E12", elementary(2, 0, 1)), ("E21", elementary(2, 1, 0))] {
        let r = simulate(&path, &a, &Modifier::Identity)?;
        let exact = polynomial_path_orders(&z, std::slice::from_ref(&e), &a, &tol)?;
        println!(
            "diag(1,t) A diag(1,t)⁻¹, A = {label}: alpha {:+.3}, r² {:.4}, {:?}; exact: ord det {}, ord P {:?}, bounded {}",
            r.alpha, r.r2, r.verdict, exact.det_order, exact.numerator_order, exact.bounded
        );
    }

    let quad = PathSpec::polynomial(z.clone(), vec![d_nm(2, 0), e]);
    let r = simulate(&quad, &elementary(2, 0, 1), &Modifier::Identity)?;
    println!("diag(1,t²): alpha {:+.3}\n", r.alpha);
    print!("{}", r.to_csv().lines().take(6).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    Ok(())
}
