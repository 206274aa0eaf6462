//! The block identity `L^{7,⋆,k} = φ₁₃ₖ − φ̄₁₃ₖ + C₁₃ₖ − C̄₁₃ₖ` for blocks 1 to 4, and the
//! C₂₂ family against its direct route.
//!
//! `cargo run --release --example c13_identity`

use spde_lab::schemes::{FKind, HKind, SchemeSpec};
use spde_lab::torus_spectral::ModeLattice;
use spde_lab::wick_renorm::{c13_block, c13_identity_residual, c22_family, vii3_direct, DoubleSumConfig};

fn main() -> spde_lab::Result<()> {
    // distinct cutoffs so that the h_u h_b families do not vanish
    let spec = SchemeSpec::new(FKind::FiniteDifference, 1.0, 0.0, 6.0, HKind::SmoothBump { lbar: 2.0 }, HKind::Indicator, 1.0)?;
    let lat = ModeLattice::new(4)?;
    let cfg = DoubleSumConfig::default();
    for block in 1..=4 {
        let b = c13_block(block, 1.0, &spec, lat, &cfg)?;
        let r = c13_identity_residual(block, 1.0, &spec, lat, &cfg)?;
        println!("block {block}: max|C13| {:.4e}, identity residual {r:.2e}", b.c.max_abs());
    }
    let f = c22_family(1.0, &spec, lat, &cfg)?;
    let d = vii3_direct(1.0, &spec, lat, &cfg)?;
    let gap = f.combined().iter().zip(&d.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("C22 family vs direct route: {gap:.2e}");
    Ok(())
}
