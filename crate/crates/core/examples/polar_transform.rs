//! The source-polarization transform over a prime field.
//!
//! `u = x G_n` with `G_n` the n-fold Kronecker power of `[[1, 0], [1, 1]]`,
//! natural index order. For `q > 2` the kernel is not an involution, so going
//! back from `u` needs the inverse transform.

use polarcov::field::{polar_inverse, polar_transform, SymbolVector};
use polarcov::oracle::kron_matrix;

fn main() -> polarcov::Result<()> {
    let x = SymbolVector::from_raw(3, vec![1, 2, 0, 1, 2, 2, 0, 1])?;
    let u = polar_transform(&x);
    println!("x          = {:?}", x.as_slice());
    println!("u = x G_3  = {:?}", u.as_slice());
    println!("u G_3      = {:?}", polar_transform(&u).as_slice());
    println!("u G_3^-1   = {:?}", polar_inverse(&u).as_slice());

    println!("\nG_2 over GF(3):");
    for row in kron_matrix(3, 2) {
        println!("  {row:?}");
    }
    Ok(())
}
