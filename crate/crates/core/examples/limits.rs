//! Lattice `C₂` constants approaching their ε → 0 integrals (a = 1, b = 0, t = 1).
//!
//! `cargo run --release --example limits`

use spde_lab::lab::saturating_n;
use spde_lab::schemes::SchemeSpec;
use spde_lab::torus_spectral::ModeLattice;
use spde_lab::wick_renorm::{const_ck, const_ck_tilde, const_limit_quadrature, LimitFamily};

fn main() -> spde_lab::Result<()> {
    let base = SchemeSpec::finite_difference(1.0).with_ab(1.0, 0.0)?;
    for fam in LimitFamily::ALL {
        let lim = const_limit_quadrature(fam, &base, 1e-4)?;
        let (tilde, flavor) = fam.lattice_family();
        print!("{fam:?}: limit scale {:.4e};", lim.max_abs());
        for inv in [4.0, 8.0, 16.0, 32.0] {
            let s = base.with_eps(1.0 / inv);
            let lat = ModeLattice::new(saturating_n(&s))?;
            let v = if tilde { const_ck_tilde(2, flavor, 1.0, &s, lat)? } else { const_ck(2, flavor, 1.0, &s, lat)? };
            print!(" eps=1/{inv}: {:.3}%", 100.0 * v.max_abs_diff(&lim) / lim.max_abs());
        }
        println!();
    }
    Ok(())
}
