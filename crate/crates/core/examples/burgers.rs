//! Convergence order of the 1D Burgers difference scheme against a spectral reference.
//!
//! `cargo run --release --example burgers`

use spde_lab::lab::{exp_burgers, BurgersSpec, BurgersStencil};

fn main() -> spde_lab::Result<()> {
    for st in [BurgersStencil::OneSided, BurgersStencil::Central] {
        let fit = exp_burgers(&BurgersSpec::new(st))?;
        for p in &fit.points {
            println!("{:<10} h={:.5} sup error={:.4e}", st.name(), p.eps, p.value);
        }
        println!("{:<10} order {:.3}, expected window {:?}", st.name(), fit.slope, st.expected_order());
    }
    Ok(())
}
