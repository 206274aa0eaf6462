//! `Σ_{k₁+k₂=k} |k₁|^{−l}|k₂|^{−m}` against `|k|^{3−l−m}`, and `sup_a |a|^r e^{−a²}`.
//!
//! `cargo run --release --example sum_bounds`

use spde_lab::lab::exp_sum_bound;
use spde_lab::torus_spectral::WaveVector;

fn main() -> spde_lab::Result<()> {
    let ks: Vec<WaveVector> = [1, 2, 4, 8].iter().map(|&n| WaveVector::new(n, 0, 0)).collect();
    for (l, m) in [(2.0, 2.0), (1.5, 2.5), (2.5, 2.5)] {
        let rep = exp_sum_bound(l, m, &ks, &[24, 48], &[1.0, 3.0])?;
        let ratios: Vec<String> = rep.rows.iter().filter(|r| r.radius == 48).map(|r| format!("{:.3}", r.ratio)).collect();
        println!("l={l} m={m}: ratios [{}], spread {:.3}, radius drift {:.1e}", ratios.join(", "), rep.ratio_spread, rep.radius_drift);
    }
    let rep = exp_sum_bound(2.0, 2.0, &ks[..1], &[8], &[0.5, 1.0, 2.0, 4.0])?;
    for k in rep.key {
        println!("r={}: grid max {:.12} closed form {:.12}", k.r, k.grid_max, k.closed_form);
    }
    Ok(())
}
