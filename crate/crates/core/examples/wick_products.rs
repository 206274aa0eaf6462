//! Wick products of correlated Gaussians: Hermite evaluation and the two
//! routes to `E[:X₁X₂: :X₃X₄:]`.
//!
//! `cargo run --release --example wick_products`

use spde_lab::torus_spectral::C64;
use spde_lab::wick_renorm::{MatrixCov, WickProduct};

fn main() -> spde_lab::Result<()> {
    let cov = MatrixCov::real(vec![
        vec![1.0, 0.5, -0.3, 0.1],
        vec![0.5, 0.89, -0.01, -0.27],
        vec![-0.3, -0.01, 0.94, 0.16],
        vec![0.1, -0.27, 0.16, 0.75],
    ]);
    let x = [0.7, -1.2, 0.4, 2.0].map(|v| C64::new(v, 0.0));
    for n in 1..=4 {
        let w = WickProduct::new((0..n).collect())?;
        println!(":X1..X{n}: at x = {:.6}", w.eval(&x, &cov).re);
    }
    let (a, b) = (WickProduct::new(vec![0, 1])?, WickProduct::new(vec![2, 3])?);
    println!("pairings {:.6}, Isserlis {:.6}", a.pairing_expectation(&b, &cov).re, a.isserlis_expectation(&b, &cov).re);
    Ok(())
}
