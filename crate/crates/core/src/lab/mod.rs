//! Experiment drivers: Monte Carlo ε-sweeps of the linear level and the second
//! chaos, the 1D Burgers example, constant tables and the lattice-sum checks.

mod burgers;
mod chaos;
mod constants;
mod sums;

use serde::{Deserialize, Serialize};

pub use burgers::{burgers_reference, exp_burgers, BurgersSpec, BurgersStencil};
pub use chaos::{constant_gap, exp_linear_convergence, exp_second_chaos, linear_difference_norm, wick_difference_norms, ChaosReport, SweepPoint};
pub use constants::{exp_constants_table, relation_residual, saturating_n, ConstantCheck, ConstantsReport, ConstantsSpec};
pub use sums::{exp_sum_bound, key_estimate_check, lattice_sum, KeyEstimate, SumBoundReport, SumBoundRow};

use crate::error::{LabError, Result};
use crate::schemes::SchemeSpec;

/// Default spatial smoothness loss δ of the Hölder indices.
pub const DEFAULT_DELTA: f64 = 0.1;
/// Default regularity loss z of the hierarchy norms.
pub const DEFAULT_Z: f64 = 0.6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    /// One N for the whole schedule or one per ε.
    pub n: Vec<usize>,
    pub samples: usize,
    pub batches: usize,
    pub dt: f64,
    pub t_end: f64,
    pub delta: f64,
    pub z: f64,
    pub seed: u64,
    /// Base scheme; its ε is replaced along the schedule.
    pub scheme: SchemeSpec,
    /// Drive u and b with one noise.
    pub identified: bool,
}

impl ExperimentSpec {
    pub fn new(name: &str, eps: Vec<f64>, n: usize, samples: usize, scheme: SchemeSpec) -> Result<Self> {
        let s = ExperimentSpec {
            name: name.to_string(),
            eps,
            n: vec![n],
            samples,
            batches: 32,
            dt: 1e-2,
            t_end: 1.0,
            delta: DEFAULT_DELTA,
            z: DEFAULT_Z,
            seed: 0,
            scheme,
            identified: true,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidArgument(m));
        if self.eps.is_empty() || self.n.is_empty() {
            return bad("schedules must be nonempty".into());
        }
        if self.eps.iter().any(|e| !(*e > 0.0)) || self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("ε schedule must be positive and strictly decreasing: {:?}", self.eps));
        }
        if self.n.len() != 1 && self.n.len() != self.eps.len() {
            return bad(format!("N schedule has {} entries for {} values of ε", self.n.len(), self.eps.len()));
        }
        if self.batches < 2 || self.samples < self.batches || self.samples % self.batches != 0 {
            return bad(format!("need samples ({}) a multiple of batches ({}) >= 2", self.samples, self.batches));
        }
        if !(self.delta > 0.0) {
            return bad(format!("need δ > 0, got {}", self.delta));
        }
        Ok(())
    }

    pub fn n_at(&self, i: usize) -> usize {
        if self.n.len() == 1 {
            self.n[0]
        } else {
            self.n[i]
        }
    }
}

/// Mean with a batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McValue {
    pub mean: f64,
    pub sigma: f64,
}

pub fn batch_means(samples: &[f64], batches: usize) -> Result<McValue> {
    if batches < 2 || samples.len() < batches {
        return Err(LabError::InvalidArgument(format!("{} samples cannot fill {batches} batches", samples.len())));
    }
    let per = samples.len() / batches;
    let means: Vec<f64> = samples.chunks_exact(per).take(batches).map(|c| c.iter().sum::<f64>() / per as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (batches - 1) as f64;
    Ok(McValue { mean: m, sigma: (var / batches as f64).sqrt() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub eps: f64,
    pub value: f64,
    pub sigma: f64,
}

/// Least-squares fit of `log value = slope · log ε + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    pub points: Vec<RatePoint>,
}

impl RateFit {
    pub fn fit(points: Vec<RatePoint>) -> Result<RateFit> {
        if points.len() < 3 {
            return Err(LabError::DegenerateFit(format!("need >= 3 points, got {}", points.len())));
        }
        if points.iter().all(|p| !(p.value > 2.0 * p.sigma)) {
            return Err(LabError::DegenerateFit("every value is at the noise floor".into()));
        }
        if points.iter().any(|p| !(p.value > 0.0) || !(p.eps > 0.0)) {
            return Err(LabError::DegenerateFit("values and ε must be positive".into()));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.eps.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / n).sqrt();
        Ok(RateFit { slope, intercept, residual, points })
    }

    /// Each value exceeds the next by more than `z` combined standard errors.
    pub fn strictly_decreasing(&self, z: f64) -> bool {
        self.points.windows(2).all(|w| w[0].value - w[1].value > z * (w[0].sigma.powi(2) + w[1].sigma.powi(2)).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let pts = [0.25, 0.125, 0.0625].iter().map(|&e: &f64| RatePoint { eps: e, value: 3.0 * e.powf(0.7), sigma: 0.0 }).collect();
        let f = RateFit::fit(pts).unwrap();
        assert!((f.slope - 0.7).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12 && f.residual < 1e-12);
        assert!(f.strictly_decreasing(2.0));
    }

    #[test]
    fn fit_rejects_noise_floor_and_short_schedules() {
        let pt = |e, v, s| RatePoint { eps: e, value: v, sigma: s };
        assert!(RateFit::fit(vec![pt(0.5, 1.0, 0.0), pt(0.25, 0.5, 0.0)]).is_err());
        assert!(RateFit::fit(vec![pt(0.5, 1.0, 1.0), pt(0.25, 1.0, 1.0), pt(0.125, 1.0, 1.0)]).is_err());
    }

    #[test]
    fn batch_means_of_constant_has_zero_sigma() {
        let v = batch_means(&[2.0; 64], 32).unwrap();
        assert_eq!(v, McValue { mean: 2.0, sigma: 0.0 });
        assert!(batch_means(&[1.0; 4], 8).is_err());
    }

    #[test]
    fn spec_validation() {
        let s = SchemeSpec::finite_difference(0.25);
        assert!(ExperimentSpec::new("x", vec![0.25, 0.125], 4, 64, s.clone()).is_ok());
        assert!(ExperimentSpec::new("x", vec![0.125, 0.25], 4, 64, s.clone()).is_err());
        assert!(ExperimentSpec::new("x", vec![], 4, 64, s.clone()).is_err());
        assert!(ExperimentSpec::new("x", vec![0.25], 4, 50, s).is_err());
    }
}
