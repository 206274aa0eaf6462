//! Numerical checks of `Σ_{k₁+k₂=k, k₁,k₂≠0} |k₁|^{−l}|k₂|^{−m} ≲ |k|^{3−l−m}` and
//! of `sup_a |a|^r e^{−a²} = (r/2)^{r/2} e^{−r/2}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::torus_spectral::WaveVector;

/// The sum over `|k₁| <= radius` plus the continuum tail `4π R^{3−l−m}/(l+m−3)`.
pub fn lattice_sum(k: WaveVector, l: f64, m: f64, radius: usize) -> Result<f64> {
    check_lm(l, m)?;
    let r = radius as i32;
    let r2 = (radius * radius) as i64;
    let kf = k.0;
    // collect before summing so the reduction order does not depend on the thread count
    let slabs: Vec<f64> = (-r..=r)
        .into_par_iter()
        .map(|a| {
            let mut s = 0.0;
            for b in -r..=r {
                for c in -r..=r {
                    let n1 = (a as i64).pow(2) + (b as i64).pow(2) + (c as i64).pow(2);
                    if n1 == 0 || n1 > r2 {
                        continue;
                    }
                    let d = [kf[0] - a, kf[1] - b, kf[2] - c];
                    let n2 = d.iter().map(|&x| (x as i64).pow(2)).sum::<i64>();
                    if n2 == 0 {
                        continue;
                    }
                    s += (n1 as f64).powf(-0.5 * l) * (n2 as f64).powf(-0.5 * m);
                }
            }
            s
        })
        .collect();
    let total: f64 = slabs.iter().sum();
    let p = l + m - 3.0;
    Ok(total + 4.0 * std::f64::consts::PI * (radius as f64).powf(-p) / p)
}

fn check_lm(l: f64, m: f64) -> Result<()> {
    if !(l > 0.0 && l < 3.0 && m > 0.0 && m < 3.0) {
        return Err(LabError::InvalidArgument(format!("need l, m in (0, 3), got l={l}, m={m}")));
    }
    if !(l + m - 3.0 > 0.0) {
        return Err(LabError::InvalidArgument(format!("need l + m − 3 > 0, got {}", l + m - 3.0)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumBoundRow {
    pub k: [i32; 3],
    pub radius: usize,
    pub sum: f64,
    /// `sum · |k|^{l+m−3}`.
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyEstimate {
    pub r: f64,
    pub grid_max: f64,
    pub closed_form: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumBoundReport {
    pub l: f64,
    pub m: f64,
    pub rows: Vec<SumBoundRow>,
    /// max/min ratio over the k sampled at the largest radius.
    pub ratio_spread: f64,
    /// Largest relative change of a ratio between the two largest radii.
    pub radius_drift: f64,
    pub key: Vec<KeyEstimate>,
}

/// `max_a |a|^r e^{−a²}` by a grid scan refined with golden-section search.
pub fn key_estimate_check(r: f64) -> Result<KeyEstimate> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(LabError::InvalidArgument(format!("need r >= 0, got {r}")));
    }
    let g = |a: f64| a.abs().powf(r) * (-a * a).exp();
    let (lo, hi, n) = (0.0, 2.0 + r.sqrt() * 2.0, 20_000);
    let h = (hi - lo) / n as f64;
    let best = (0..=n).max_by(|&i, &j| g(lo + i as f64 * h).total_cmp(&g(lo + j as f64 * h))).expect("grid");
    let (mut a, mut b) = ((lo + (best as f64 - 1.0) * h).max(0.0), lo + (best as f64 + 1.0) * h);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (c, d) = (b - phi * (b - a), a + phi * (b - a));
        if g(c) >= g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let grid_max = g(0.5 * (a + b)).max(g(lo + best as f64 * h));
    let closed_form = if r == 0.0 { 1.0 } else { (r / 2.0).powf(r / 2.0) * (-r / 2.0).exp() };
    Ok(KeyEstimate { r, grid_max, closed_form, rel_err: (grid_max - closed_form).abs() / closed_form })
}

/// Ratios at every `k` for each radius, plus key-estimate checks at each `r`.
pub fn exp_sum_bound(l: f64, m: f64, ks: &[WaveVector], radii: &[usize], rs: &[f64]) -> Result<SumBoundReport> {
    check_lm(l, m)?;
    if ks.is_empty() || radii.is_empty() || ks.iter().any(|k| k.is_zero()) {
        return Err(LabError::InvalidArgument("need nonzero k and at least one radius".into()));
    }
    let mut rows = Vec::new();
    for &radius in radii {
        for &k in ks {
            let sum = lattice_sum(k, l, m, radius)?;
            rows.push(SumBoundRow { k: k.0, radius, sum, ratio: sum * k.norm().powf(l + m - 3.0) });
        }
    }
    let r_max = *radii.iter().max().expect("nonempty");
    let last: Vec<f64> = rows.iter().filter(|r| r.radius == r_max).map(|r| r.ratio).collect();
    let ratio_spread = last.iter().cloned().fold(0.0, f64::max) / last.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut sorted: Vec<usize> = radii.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let radius_drift = if sorted.len() >= 2 {
        let prev = sorted[sorted.len() - 2];
        ks.iter()
            .map(|k| {
                let at = |rad| rows.iter().find(|r| r.radius == rad && r.k == k.0).expect("row").ratio;
                ((at(r_max) - at(prev)) / at(r_max)).abs()
            })
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let key = rs.iter().map(|&r| key_estimate_check(r)).collect::<Result<_>>()?;
    Ok(SumBoundReport { l, m, rows, ratio_spread, radius_drift, key })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_exponents() {
        let k = WaveVector::new(1, 0, 0);
        assert!(lattice_sum(k, 1.5, 1.5, 4).is_err());
        assert!(lattice_sum(k, 1.0, 1.0, 4).is_err());
        assert!(lattice_sum(k, 3.0, 1.5, 4).is_err());
        assert!(lattice_sum(k, 2.0, 2.0, 4).is_ok());
    }

    #[test]
    fn small_sum_by_hand() {
        // radius 1 around k = (1,0,0): k₁ ∈ {±e_j} minus k₁ = k
        let k = WaveVector::new(1, 0, 0);
        let s = lattice_sum(k, 2.0, 2.0, 1).unwrap() - 4.0 * std::f64::consts::PI;
        // k₁ = −e₁: |k₂|² = 4; k₁ = ±e₂, ±e₃: |k₂|² = 2
        assert!((s - (0.25 + 4.0 * 0.5)).abs() < 1e-14);
    }

    #[test]
    fn key_estimate_closed_form() {
        for r in [0.0, 0.5, 1.0, 2.0, 3.7, 8.0] {
            let k = key_estimate_check(r).unwrap();
            assert!(k.rel_err < 1e-10, "{r} {k:?}");
        }
    }

    #[test]
    fn ratios_match_direct_summation() {
        // frozen from an independent brute-force sum at R = 40 with the same tail term
        let ks = [WaveVector::new(1, 0, 0), WaveVector::new(4, 0, 0)];
        let rep = exp_sum_bound(2.0, 2.0, &ks, &[24, 48], &[1.0]).unwrap();
        let at = |i: usize| rep.rows.iter().filter(|r| r.radius == 48).nth(i).unwrap().ratio;
        assert!((at(0) - 13.1415).abs() < 2e-3 && (at(1) - 26.542).abs() < 2e-3, "{:?}", rep.rows);
        assert!(rep.radius_drift < 1e-3, "{}", rep.radius_drift);
        assert!((rep.ratio_spread - 2.0198).abs() < 1e-3);
    }
}
