use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{batch_means, saturating_n, ExperimentSpec, RateFit, RatePoint};
use crate::error::Result;
use crate::fields::{CoupledOUEnsemble, Family, NoiseSpec};
use crate::schemes::{Flavor, SchemeSpec};
use crate::torus_spectral::{BesovEvaluator, ModeLattice, PaddedProduct, VectorFourierField, C64};
use crate::wick_renorm::const_c0;

fn noise_at(spec: &ExperimentSpec, i: usize) -> Result<NoiseSpec> {
    let lat = ModeLattice::new(spec.n_at(i))?;
    let mut noise = NoiseSpec::new(spec.seed, spec.dt, spec.t_end, lat, spec.scheme.with_eps(spec.eps[i]))?;
    noise.identified = spec.identified;
    Ok(noise)
}

fn stationary(noise: &NoiseSpec, sample: usize) -> CoupledOUEnsemble {
    let mut ens = CoupledOUEnsemble::new(noise.clone(), sample as u64);
    ens.burn_in_stationary();
    ens
}

fn vector_holder(eval: &BesovEvaluator, v: &VectorFourierField, alpha: f64) -> Result<f64> {
    let mut m = 0.0f64;
    for c in &v.comps {
        m = m.max(eval.holder_norm(c, alpha)?);
    }
    Ok(m)
}

/// `‖b₁^ε − b̄₁^ε‖_{C^{−1/2−δ/2}}` of one joint draw.
pub fn linear_difference_norm(ens: &CoupledOUEnsemble, eval: &BesovEvaluator, delta: f64) -> Result<f64> {
    let d = ens.field(Family::Approx(Flavor::B)).sub(ens.field(Family::Cont(Flavor::B)))?;
    vector_holder(eval, &d, -0.5 - 0.5 * delta)
}

/// Monte Carlo `E‖b₁^ε − b̄₁^ε‖_{C^{−1/2−δ/2}}` over stationary draws, per ε.
pub fn exp_linear_convergence(spec: &ExperimentSpec) -> Result<RateFit> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.eps.len());
    for i in 0..spec.eps.len() {
        let noise = noise_at(spec, i)?;
        let eval = BesovEvaluator::new(noise.lattice);
        let vals = (0..spec.samples)
            .into_par_iter()
            .map(|s| linear_difference_norm(&stationary(&noise, s), &eval, spec.delta))
            .collect::<Result<Vec<f64>>>()?;
        let v = batch_means(&vals, spec.batches)?;
        points.push(RatePoint { eps: spec.eps[i], value: v.mean, sigma: v.sigma });
    }
    RateFit::fit(points)
}

/// Norms of `u₁^{ε,i} ⋄ b₁^{ε,j} − ū₁^{ε,i} ⋄ b̄₁^{ε,j}` and of the plain product
/// difference, in `C^{−1−δ/2}`, maximized over (i, j); plus the k = 0 modes of the
/// nine approximate Wick products.
pub fn wick_difference_norms(
    ens: &CoupledOUEnsemble,
    c0: &[f64; 9],
    c0_bar: &[f64; 9],
    prod: &PaddedProduct,
    eval: &BesovEvaluator,
    delta: f64,
) -> Result<(f64, f64, [C64; 9])> {
    let (u, b) = (ens.field(Family::Approx(Flavor::U)), ens.field(Family::Approx(Flavor::B)));
    let (ub, bb) = (ens.field(Family::Cont(Flavor::U)), ens.field(Family::Cont(Flavor::B)));
    let zero = ens.lattice().zero_index();
    let mass = (2.0 * std::f64::consts::PI).powf(1.5);
    let alpha = -1.0 - 0.5 * delta;
    let (mut wick, mut plain) = (0.0f64, 0.0f64);
    let mut means = [C64::default(); 9];
    for i in 0..3 {
        for j in 0..3 {
            let p = prod.product(&u.comps[i], &b.comps[j])?;
            let q = prod.product(&ub.comps[i], &bb.comps[j])?;
            let mut d = p.sub(&q)?;
            let mut blocks = eval.block_norms(&d, f64::INFINITY)?;
            plain = plain.max(eval.holder_from_blocks(&blocks, alpha));
            // the constants live at k = 0, which only the lowest block sees
            d.coeffs_mut()[zero] -= C64::new((c0[i * 3 + j] - c0_bar[i * 3 + j]) * mass, 0.0);
            blocks[0] = eval.block_norm(&d, -1, f64::INFINITY)?;
            wick = wick.max(eval.holder_from_blocks(&blocks, alpha));
            means[i * 3 + j] = p.coeffs()[zero] - c0[i * 3 + j] * mass;
        }
    }
    Ok((wick, plain, means))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosReport {
    pub renormalized: RateFit,
    /// Same draws without the constants subtracted.
    pub ablation: RateFit,
    /// Per ε, the largest `|mean|/σ` of the real k = 0 modes of `u₁^ε ⋄ b₁^ε`.
    pub wick_mean_z: Vec<f64>,
    /// `max |C₀₃ − C̄₀₃|` on the smallest lattice holding the whole cutoff support, per ε.
    pub saturated_constant_gap: Vec<RatePoint>,
}

/// One ε of a second-chaos sweep, flattened for CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub wick: f64,
    pub wick_sigma: f64,
    pub plain: f64,
    pub plain_sigma: f64,
    pub wick_mean_z: f64,
    pub saturated_constant_gap: f64,
}

impl SweepPoint {
    pub fn table(rep: &ChaosReport) -> Vec<SweepPoint> {
        (0..rep.renormalized.points.len())
            .map(|i| {
                let (w, p) = (rep.renormalized.points[i], rep.ablation.points[i]);
                SweepPoint {
                    eps: w.eps,
                    wick: w.value,
                    wick_sigma: w.sigma,
                    plain: p.value,
                    plain_sigma: p.sigma,
                    wick_mean_z: rep.wick_mean_z[i],
                    saturated_constant_gap: rep.saturated_constant_gap[i].value,
                }
            })
            .collect()
    }
}

/// `max_{ij} |C₀₃^{ij} − C̄₀₃^{ij}|` on a lattice of size N.
pub fn constant_gap(scheme: &SchemeSpec, n: usize, identified: bool) -> Result<f64> {
    let lat = ModeLattice::new(n)?;
    let a = const_c0(3, false, identified, scheme, lat)?;
    let b = const_c0(3, true, identified, scheme, lat)?;
    Ok(a.max_abs_diff(&b))
}

/// Monte Carlo sweep of the Wick-product difference and of its un-renormalized ablation.
pub fn exp_second_chaos(spec: &ExperimentSpec) -> Result<ChaosReport> {
    spec.validate()?;
    let (mut ren, mut abl, mut zs, mut gaps) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..spec.eps.len() {
        let noise = noise_at(spec, i)?;
        let lat = noise.lattice;
        let re = |bar| -> Result<[f64; 9]> {
            let t = const_c0(3, bar, spec.identified, &noise.scheme, lat)?;
            Ok(std::array::from_fn(|n| t.values[n].re))
        };
        let (c0, c0_bar) = (re(false)?, re(true)?);
        let prod = PaddedProduct::new(lat);
        let eval = BesovEvaluator::new(lat);
        let rows = (0..spec.samples)
            .into_par_iter()
            .map(|s| wick_difference_norms(&stationary(&noise, s), &c0, &c0_bar, &prod, &eval, spec.delta))
            .collect::<Result<Vec<_>>>()?;
        let w = batch_means(&rows.iter().map(|r| r.0).collect::<Vec<_>>(), spec.batches)?;
        let p = batch_means(&rows.iter().map(|r| r.1).collect::<Vec<_>>(), spec.batches)?;
        // the imaginary parts are roundoff of a real product
        let mut worst = 0.0f64;
        for e in 0..9 {
            let m = batch_means(&rows.iter().map(|r| r.2[e].re).collect::<Vec<_>>(), spec.batches)?;
            if m.sigma > 0.0 {
                worst = worst.max(m.mean.abs() / m.sigma);
            }
        }
        ren.push(RatePoint { eps: spec.eps[i], value: w.mean, sigma: w.sigma });
        abl.push(RatePoint { eps: spec.eps[i], value: p.mean, sigma: p.sigma });
        zs.push(worst);
        let sat = saturating_n(&noise.scheme);
        gaps.push(RatePoint { eps: spec.eps[i], value: constant_gap(&noise.scheme, sat, spec.identified)?, sigma: 0.0 });
    }
    Ok(ChaosReport { renormalized: RateFit::fit(ren)?, ablation: RateFit::fit(abl)?, wick_mean_z: zs, saturated_constant_gap: gaps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn galerkin_difference_vanishes() {
        let lat = ModeLattice::new(4).unwrap();
        let noise = NoiseSpec::new(3, 0.01, 1.0, lat, SchemeSpec::galerkin(0.1)).unwrap();
        let ens = stationary(&noise, 0);
        assert!(ens.field(Family::Approx(Flavor::B)).max_abs() > 0.0);
        assert_eq!(linear_difference_norm(&ens, &BesovEvaluator::new(lat), 0.1).unwrap(), 0.0);
    }

    #[test]
    fn wick_products_have_mean_zero() {
        let spec = ExperimentSpec { seed: 9, ..ExperimentSpec::new("m", vec![0.5, 0.25, 0.125], 3, 256, SchemeSpec::finite_difference(0.5)).unwrap() };
        let rep = exp_second_chaos(&spec).unwrap();
        assert!(rep.wick_mean_z.iter().all(|z| *z < 4.0), "{:?}", rep.wick_mean_z);
    }

    #[test]
    fn wick_norm_matches_full_holder_norm() {
        let scheme = SchemeSpec::finite_difference(0.5).with_ab(1.0, 0.0).unwrap();
        let lat = ModeLattice::new(4).unwrap();
        let ens = stationary(&NoiseSpec::new(5, 0.01, 1.0, lat, scheme).unwrap(), 0);
        let (prod, eval) = (PaddedProduct::new(lat), BesovEvaluator::new(lat));
        let (c0, c0_bar) = ([0.3; 9], [0.1; 9]);
        let (wick, plain, _) = wick_difference_norms(&ens, &c0, &c0_bar, &prod, &eval, 0.2).unwrap();
        let (u, b) = (ens.field(Family::Approx(Flavor::U)), ens.field(Family::Approx(Flavor::B)));
        let (ub, bb) = (ens.field(Family::Cont(Flavor::U)), ens.field(Family::Cont(Flavor::B)));
        let (mut w, mut p) = (0.0f64, 0.0f64);
        for i in 0..3 {
            for j in 0..3 {
                let mut d = prod.product(&u.comps[i], &b.comps[j]).unwrap().sub(&prod.product(&ub.comps[i], &bb.comps[j]).unwrap()).unwrap();
                p = p.max(eval.holder_norm(&d, -1.1).unwrap());
                d.coeffs_mut()[lat.zero_index()] -= C64::new(0.2 * (2.0 * std::f64::consts::PI).powf(1.5), 0.0);
                w = w.max(eval.holder_norm(&d, -1.1).unwrap());
            }
        }
        assert_eq!(plain, p);
        assert!((wick - w).abs() <= 1e-15 * w && wick != plain);
    }

    #[test]
    fn saturated_constant_gap_grows() {
        let s = SchemeSpec::finite_difference(0.5).with_ab(1.0, 0.0).unwrap();
        let g: Vec<f64> = [0.5, 0.25, 0.125].iter().map(|&e| constant_gap(&s.with_eps(e), saturating_n(&s.with_eps(e)), true).unwrap()).collect();
        assert!(g[0] < g[1] && g[1] < g[2], "{g:?}");
        // independent lattices ⇒ C₀₃ vanishes on both sides
        assert_eq!(constant_gap(&s, 4, false).unwrap(), 0.0);
    }
}
