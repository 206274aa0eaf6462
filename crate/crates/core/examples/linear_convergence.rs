//! Monte Carlo ε-sweep of `E‖b₁^ε − b̄₁^ε‖` in `C^{−1/2−δ/2}` at N = 16.
//!
//! `cargo run --release --example linear_convergence [samples]`

use spde_lab::lab::{exp_linear_convergence, ExperimentSpec};
use spde_lab::schemes::SchemeSpec;

fn main() -> spde_lab::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(512);
    let scheme = SchemeSpec::finite_difference(0.25).with_ab(1.0, 0.0)?;
    let mut spec = ExperimentSpec::new("linear", vec![0.25, 0.125, 0.0625], 16, samples, scheme)?;
    spec.seed = 2024;
    let fit = exp_linear_convergence(&spec)?;
    for p in &fit.points {
        println!("eps={:<8} mean={:.6e} sigma={:.2e}", p.eps, p.value, p.sigma);
    }
    println!("slope={:.4} residual={:.3e} decreasing(2σ)={}", fit.slope, fit.residual, fit.strictly_decreasing(2.0));
    Ok(())
}
