//! Matrix JSON and CSV interchange.

use conjlim::io::{matrix_from_csv, matrix_from_json, matrix_to_csv, matrix_to_json};
use conjlim::numkit::{ginibre, norm2, seeded_rng};

fn main() -> conjlim::error::Result<()> {
    let m = ginibre(2, 2, &mut seeded_rng(1));
    let json = matrix_to_json(&m);
    let csv = matrix_to_csv(&m);
    println!("{json}\n\n{csv}");
    let back = matrix_from_json(&matrix_to_json(&matrix_from_csv(&csv)?))?;
    println!("round-trip error {:.1e}", norm2(&(back - m)));
    match matrix_from_csv("1,0,2,0\n3,0,oops,0\n") {
        Err(e) => println!("bad input: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
