//! Kernel and image invariance at a singular base point.

use conjlim::criteria::{basis_s_ker, dim_s_ker, in_s_im, in_s_ker};
use conjlim::numkit::{d_nm, elementary, Tolerance};

fn main() -> conjlim::error::Result<()> {
    let tol = Tolerance::default();
    let z = d_nm(3, 1);

    for (label, a) in [("E12", elementary(3, 0, 1)), ("E21", elementary(3, 1, 0)), ("E23", elementary(3, 1, 2))] {
        let ker = in_s_ker(&a, &z, &tol)?;
        let im = in_s_im(&a, &z, &tol)?;
        println!("A = {label}: A ker Z ⊆ ker Z: {:<5}  A im Z ⊆ im Z: {}", ker.member, im.member);
        if let Some(w) = ker.witness {
            println!("    kernel vector leaving ker Z: {:?}", w.iter().map(|x| x.re).collect::<Vec<_>>());
        }
    }

    println!("\ndim S_ker(D_nm) = n² - mn + m²:");
    for n in 1..=4 {
        let row: Vec<String> = (0..=n)
            .map(|m| format!("{:>3}", basis_s_ker(&d_nm(n, m), &tol).map(|b| b.len()).unwrap_or(0)))
            .collect();
        let formula: Vec<String> = (0..=n).map(|m| format!("{:>3}", dim_s_ker(n, m).unwrap())).collect();
        println!("  n={n}: basis sizes {}   formula {}", row.join(""), formula.join(""));
    }
    Ok(())
}
