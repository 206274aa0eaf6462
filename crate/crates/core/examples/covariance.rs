//! Monte Carlo covariances of the coupled linear level against their closed forms.
//!
//! `cargo run --release --example covariance [samples]`

use spde_lab::fields::{covariance_closed_form, fraction_within, mc_covariance_all, NoiseSpec};
use spde_lab::schemes::SchemeSpec;
use spde_lab::torus_spectral::{ModeLattice, WaveVector};

fn main() -> spde_lab::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4000);
    let scheme = SchemeSpec::finite_difference(0.125).with_ab(1.0, 0.0)?;
    let noise = NoiseSpec::new(2024, 0.01, 1.0, ModeLattice::new(8)?, scheme.clone())?;
    let ks = [WaveVector::new(1, 0, 0), WaveVector::new(2, 1, 1)];
    let (mut ok, mut total) = (0, 0);
    for e in mc_covariance_all(&noise, &ks, &[0.0, 0.1], samples)? {
        let exact = covariance_closed_form(&scheme, noise.identified, WaveVector(e.k), e.lag, 0.0, e.pair, e.kind)?;
        let (a, b) = fraction_within(&e, &exact, 3.0);
        ok += a;
        total += b;
        println!(
            "k={:?} lag={:<4} {:?}/{:?}: [1][1] est {:+.5} ± {:.5}, exact {:+.5}",
            e.k, e.lag, e.pair, e.kind, e.estimate[1][1].re, e.std_err[1][1].re, exact[1][1].re
        );
    }
    println!("{ok}/{total} real scalars within 3 standard errors");
    Ok(())
}
