//! Dyadic blocks, Bony's decomposition, the Leray projection and Hölder norms on N = 8.
//!
//! `cargo run --release --example spectral_bony`

use spde_lab::bony::{para_estimate_ratio, Bony};
use spde_lab::schemes::leray_project;
use spde_lab::torus_spectral::{BesovEvaluator, DyadicPartition, ModeLattice, ScalarFourierField, VectorFourierField, C64};

fn main() -> spde_lab::Result<()> {
    let lat = ModeLattice::new(8)?;
    let part = DyadicPartition::new(lat);
    println!("blocks j = -1..={}, partition-of-unity defect {:.1e}", part.j_max(), part.unity_defect());

    // broadband fields with |f̂(k)| ~ |k|^{-2} and |ĝ(k)| ~ |k|^{-1}
    let broadband = |p: f64, phase: f64| {
        let mut f = ScalarFourierField::from_fn(lat, |k| {
            let w = (1.0 + k.norm2()).powf(-p / 2.0);
            C64::from_polar(w, phase * (k.0[0] + 2 * k.0[1] + 3 * k.0[2]) as f64)
        });
        f.symmetrize_reality();
        f
    };
    let (f, g) = (broadband(2.0, 0.7), broadband(1.0, 1.3));
    let bony = Bony::new(lat);
    let t = bony.decompose(&f, &g)?;
    println!("|π< + π> + π0 − fg| = {:.1e}", t.sum().max_abs_diff(&bony.product(&f, &g)?));
    let r = para_estimate_ratio(&f, &g, 0.5, 0.5)?;
    println!("paraproduct ratios: lt {:.3} gt {:.3} res {:.3}", r.lt, r.gt, r.res);

    let v = VectorFourierField::from_fn(lat, |k| {
        let s = if k.norm2() == 0.0 { 0.0 } else { 1.0 / (1.0 + k.norm2()) };
        [C64::new(s, 0.0), C64::new(0.0, s), C64::new(s * k.0[0] as f64, 0.0)]
    });
    let p = leray_project(&v)?;
    println!("divergence before {:.2e}, after {:.2e}", v.divergence_defect(), p.divergence_defect());

    let eval = BesovEvaluator::new(lat);
    let basis = ScalarFourierField::basis(lat, spde_lab::torus_spectral::WaveVector::new(4, 0, 0))?;
    for alpha in [-1.0, -0.5, 0.0, 0.5] {
        println!("‖e_(4,0,0)‖_C^{alpha:<4} = {:.4}", eval.holder_norm(&basis, alpha)?);
    }
    Ok(())
}
