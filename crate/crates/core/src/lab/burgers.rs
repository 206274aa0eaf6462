//! 1D periodic Burgers `∂_t u + ½ D(u²) = ν ∂²u` on `[0, 2π)` against its
//! finite-difference approximation `∂_t u + ½ D^ε(u²) = ν Δ_ε u` with
//! `D^ε f(x) = (f(x + aε) − f(x − bε)) / ((a+b)ε)` and the three-point `Δ_ε`.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{RateFit, RatePoint};
use crate::error::{LabError, Result};
use crate::torus_spectral::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurgersStencil {
    /// `a = 1, b = 0`.
    OneSided,
    /// `a = b = 1`.
    Central,
}

impl BurgersStencil {
    pub fn ab(self) -> (usize, usize) {
        match self {
            BurgersStencil::OneSided => (1, 0),
            BurgersStencil::Central => (1, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BurgersStencil::OneSided => "one_sided",
            BurgersStencil::Central => "central",
        }
    }

    /// Accepted window for the fitted order.
    pub fn expected_order(self) -> (f64, f64) {
        match self {
            BurgersStencil::OneSided => (0.8, 1.3),
            BurgersStencil::Central => (1.7, 2.3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BurgersSpec {
    /// Requested mesh sizes; each is rounded to `2π/M` for an integer M.
    pub eps: Vec<f64>,
    pub stencil: BurgersStencil,
    pub nu: f64,
    /// `u₀(x) = amp · (sin x + ½ cos 2x)`.
    pub amp: f64,
    pub t_end: f64,
    /// Fourier modes of the reference solve (grid size 2·modes).
    pub ref_modes: usize,
    /// Largest tolerated gap between the reference and its doubled resolution.
    pub ref_tol: f64,
}

impl BurgersSpec {
    pub fn new(stencil: BurgersStencil) -> Self {
        BurgersSpec { eps: vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0], stencil, nu: 1.0, amp: 1.0, t_end: 0.5, ref_modes: 64, ref_tol: 1e-10 }
    }

    fn validate(&self) -> Result<()> {
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) || self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(LabError::InvalidArgument(format!("ε schedule must lie in (0, 1) and decrease: {:?}", self.eps)));
        }
        if !(self.nu > 0.0 && self.t_end > 0.0 && self.ref_modes >= 8) {
            return Err(LabError::InvalidArgument("need ν > 0, T > 0 and at least 8 reference modes".into()));
        }
        Ok(())
    }

    fn u0(&self, x: f64) -> f64 {
        self.amp * (x.sin() + 0.5 * (2.0 * x).cos())
    }
}

/// Reference solution at T as Fourier coefficients `û(k)`, `k = −K..=K`
/// (`u(x) = Σ û(k) e^{ikx}`), from integrating-factor RK4 on a `2K`-point grid.
fn reference(spec: &BurgersSpec, modes: usize, steps: usize) -> Vec<C64> {
    let m = 2 * modes;
    let mut planner = FftPlanner::<f64>::new();
    let (fwd, inv) = (planner.plan_fft_forward(m), planner.plan_fft_inverse(m));
    let wave: Vec<f64> = (0..m).map(|j| if j <= m / 2 { j as f64 } else { j as f64 - m as f64 }).collect();
    // dealias with the 2/3 rule; the solution is analytic so the cut modes are negligible
    let keep: Vec<bool> = wave.iter().map(|k| k.abs() < m as f64 / 3.0).collect();
    let to_hat = |u: &mut Vec<C64>| {
        fwd.process(u);
        for v in u.iter_mut() {
            *v /= m as f64;
        }
    };
    let mut u: Vec<C64> = (0..m).map(|n| C64::new(spec.u0(2.0 * PI * n as f64 / m as f64), 0.0)).collect();
    to_hat(&mut u);
    let nonlinear = |h: &[C64]| -> Vec<C64> {
        let mut g = h.to_vec();
        inv.process(&mut g);
        let mut sq: Vec<C64> = g.iter().map(|v| C64::new(v.re * v.re, 0.0)).collect();
        fwd.process(&mut sq);
        sq.iter().zip(&wave).zip(&keep).map(|((s, k), &ok)| if ok { C64::new(0.0, -0.5 * k) * (s / m as f64) } else { C64::default() }).collect()
    };
    let dt = spec.t_end / steps as f64;
    let e_half: Vec<f64> = wave.iter().map(|k| (-spec.nu * k * k * dt / 2.0).exp()).collect();
    for _ in 0..steps {
        let n1 = nonlinear(&u);
        let a: Vec<C64> = (0..m).map(|j| e_half[j] * (u[j] + n1[j] * (dt / 2.0))).collect();
        let n2 = nonlinear(&a);
        let b: Vec<C64> = (0..m).map(|j| e_half[j] * u[j] + n2[j] * (dt / 2.0)).collect();
        let n3 = nonlinear(&b);
        let c: Vec<C64> = (0..m).map(|j| e_half[j] * e_half[j] * u[j] + n3[j] * (e_half[j] * dt)).collect();
        let n4 = nonlinear(&c);
        for j in 0..m {
            let e = e_half[j] * e_half[j];
            u[j] = e * u[j] + (n1[j] * e + (n2[j] + n3[j]) * (2.0 * e_half[j]) + n4[j]) * (dt / 6.0);
            if !keep[j] {
                u[j] = C64::default();
            }
        }
    }
    let k_max = modes as i64 - 1;
    (-k_max..=k_max).map(|k| u[k.rem_euclid(m as i64) as usize]).collect()
}

/// The reference at T on `points` together with its self-check gap.
pub fn burgers_reference(spec: &BurgersSpec, points: &[f64]) -> Result<(Vec<f64>, f64)> {
    spec.validate()?;
    let steps = (spec.t_end / 2e-3).ceil() as usize;
    let coarse = reference(spec, spec.ref_modes, steps);
    let fine = reference(spec, 2 * spec.ref_modes, 2 * steps);
    let eval = |c: &[C64], x: f64| {
        let k_max = (c.len() as i64 - 1) / 2;
        c.iter().enumerate().map(|(i, v)| (v * C64::new(0.0, (i as i64 - k_max) as f64 * x).exp()).re).sum::<f64>()
    };
    let mut gap = 0.0f64;
    let vals = points
        .iter()
        .map(|&x| {
            let f = eval(&fine, x);
            gap = gap.max((f - eval(&coarse, x)).abs());
            f
        })
        .collect();
    if !(gap <= spec.ref_tol) {
        return Err(LabError::InvalidArgument(format!("reference not resolved: resolution gap {gap:e} > {:e}", spec.ref_tol)));
    }
    Ok((vals, gap))
}

/// The ε-scheme on `M` points with explicit RK4, returning `u^ε(T)` at `x_n = nε`.
fn solve_scheme(spec: &BurgersSpec, m: usize) -> Vec<f64> {
    let h = 2.0 * PI / m as f64;
    let (a, b) = spec.stencil.ab();
    let at = |u: &[f64], n: usize, s: isize| u[(n as isize + s).rem_euclid(m as isize) as usize];
    let rhs = |u: &[f64]| -> Vec<f64> {
        let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
        (0..m)
            .map(|n| {
                let lap = (at(u, n, 1) - 2.0 * u[n] + at(u, n, -1)) / (h * h);
                let d = (at(&sq, n, a as isize) - at(&sq, n, -(b as isize))) / ((a + b) as f64 * h);
                spec.nu * lap - 0.5 * d
            })
            .collect()
    };
    let steps = (spec.t_end / (0.5 * h * h / spec.nu)).ceil() as usize;
    let dt = spec.t_end / steps as f64;
    let mut u: Vec<f64> = (0..m).map(|n| spec.u0(n as f64 * h)).collect();
    let axpy = |x: &[f64], k: &[f64], c: f64| x.iter().zip(k).map(|(a, b)| a + c * b).collect::<Vec<f64>>();
    for _ in 0..steps {
        let k1 = rhs(&u);
        let k2 = rhs(&axpy(&u, &k1, dt / 2.0));
        let k3 = rhs(&axpy(&u, &k2, dt / 2.0));
        let k4 = rhs(&axpy(&u, &k3, dt));
        for n in 0..m {
            u[n] += dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
        }
    }
    u
}

/// Sup-norm error at T per effective ε, fitted for the order.
pub fn exp_burgers(spec: &BurgersSpec) -> Result<RateFit> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.eps.len());
    for &e in &spec.eps {
        let m = (2.0 * PI / e).round() as usize;
        let h = 2.0 * PI / m as f64;
        let xs: Vec<f64> = (0..m).map(|n| n as f64 * h).collect();
        let (exact, _) = burgers_reference(spec, &xs)?;
        let approx = solve_scheme(spec, m);
        let err = exact.iter().zip(&approx).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        points.push(RatePoint { eps: h, value: err, sigma: 0.0 });
    }
    if points.iter().all(|p| p.value == 0.0) {
        return Err(LabError::DegenerateFit("every error is exactly zero".into()));
    }
    RateFit::fit(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_stays_zero() {
        let spec = BurgersSpec { amp: 0.0, ..BurgersSpec::new(BurgersStencil::OneSided) };
        assert!(solve_scheme(&spec, 50).iter().all(|v| *v == 0.0));
        let (r, gap) = burgers_reference(&spec, &[0.0, 1.0]).unwrap();
        assert_eq!((r, gap), (vec![0.0, 0.0], 0.0));
        assert!(matches!(exp_burgers(&spec), Err(LabError::DegenerateFit(_))));
    }

    #[test]
    fn heat_part_matches_closed_form() {
        // amp small: the nonlinearity is O(amp²), so u ≈ amp (e^{−T} sin x + ½ e^{−4T} cos 2x)
        let spec = BurgersSpec { amp: 1e-6, ..BurgersSpec::new(BurgersStencil::Central) };
        let (r, _) = burgers_reference(&spec, &[0.3]).unwrap();
        let exact = 1e-6 * ((-0.5f64).exp() * 0.3f64.sin() + 0.5 * (-2.0f64).exp() * 0.6f64.cos());
        assert!((r[0] - exact).abs() < 1e-11, "{} {exact}", r[0]);
    }

    #[test]
    fn orders_of_both_stencils() {
        let one = exp_burgers(&BurgersSpec::new(BurgersStencil::OneSided)).unwrap();
        let two = exp_burgers(&BurgersSpec::new(BurgersStencil::Central)).unwrap();
        assert!(one.strictly_decreasing(0.0) && two.strictly_decreasing(0.0));
        let (w1, w2) = (BurgersStencil::OneSided.expected_order(), BurgersStencil::Central.expected_order());
        assert!((w1.0..=w1.1).contains(&one.slope), "{}", one.slope);
        assert!((w2.0..=w2.1).contains(&two.slope), "{}", two.slope);
    }
}
