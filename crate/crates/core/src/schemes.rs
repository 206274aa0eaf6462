//! Approximation operators: scheme functions f, g, h, the multipliers of Δ_ε, D_j^ε
//! and H_ε, the Leray projection, and heat semigroups.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::torus_spectral::{ScalarFourierField, SpectralGrid, VectorFourierField, WaveVector, C64};

/// Piecewise-linear radial profile `r ↦ value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialTable {
    pub r: Vec<f64>,
    pub value: Vec<f64>,
}

impl RadialTable {
    pub fn new(r: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        if r.len() != value.len() || r.len() < 2 {
            return Err(LabError::InvalidArgument("radial table needs >= 2 matching (r, value) rows".into()));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) || r[0] < 0.0 {
            return Err(LabError::InvalidArgument("radial table r must be nonnegative and increasing".into()));
        }
        Ok(RadialTable { r, value })
    }

    /// Linear interpolation; clamps to the end values outside the table.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r <= self.r[0] {
            return self.value[0];
        }
        if r >= self.r[n - 1] {
            return self.value[n - 1];
        }
        let i = self.r.partition_point(|&x| x <= r) - 1;
        let t = (r - self.r[i]) / (self.r[i + 1] - self.r[i]);
        self.value[i] * (1.0 - t) + self.value[i + 1] * t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FKind {
    FiniteDifference,
    Galerkin,
    Table(RadialTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HKind {
    Indicator,
    /// Equal to 1 on `|x| <= lbar`, smooth decay to 0 at `|x| = L₀/2`.
    SmoothBump { lbar: f64 },
    /// Profile in `|x|`, forced to 0 beyond `L₀/2`.
    Table(RadialTable),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    U,
    B,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::U => "u",
            Flavor::B => "b",
        }
    }
}

/// The approximation data of one scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub f_kind: FKind,
    pub a: f64,
    pub b: f64,
    pub l0: f64,
    pub h_u: HKind,
    pub h_b: HKind,
    pub eps: f64,
    /// Lower bound of f̃ over the box `max|x_j| <= L₀`.
    pub c_f: f64,
}

pub const DEFAULT_L0: f64 = 6.0;
pub const DEFAULT_LBAR0: f64 = 2.0;

impl SchemeSpec {
    pub fn new(f_kind: FKind, a: f64, b: f64, l0: f64, h_u: HKind, h_b: HKind, eps: f64) -> Result<Self> {
        let mut s = SchemeSpec { f_kind, a, b, l0, h_u, h_b, eps, c_f: 0.0 };
        s.validate_shape()?;
        s.c_f = s.compute_c_f();
        if s.c_f <= 0.0 {
            return Err(LabError::InvalidArgument(format!("f̃ not bounded below by a positive constant (min {})", s.c_f)));
        }
        Ok(s)
    }

    /// Finite-difference f̃, a = b = 1, L₀ = 6, smooth bumps with L̄₀ = 2.
    pub fn finite_difference(eps: f64) -> Self {
        let h = HKind::SmoothBump { lbar: DEFAULT_LBAR0 };
        Self::new(FKind::FiniteDifference, 1.0, 1.0, DEFAULT_L0, h.clone(), h, eps).expect("default scheme")
    }

    pub fn galerkin(eps: f64) -> Self {
        let h = HKind::SmoothBump { lbar: DEFAULT_LBAR0 };
        Self::new(FKind::Galerkin, 1.0, 1.0, DEFAULT_L0, h.clone(), h, eps).expect("default scheme")
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        SchemeSpec { eps, ..self.clone() }
    }

    pub fn with_ab(&self, a: f64, b: f64) -> Result<Self> {
        let s = SchemeSpec { a, b, ..self.clone() };
        s.validate_shape()?;
        Ok(s)
    }

    fn validate_shape(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::InvalidArgument(m.to_string()));
        if !(self.a >= 0.0 && self.b >= 0.0 && self.a + self.b > 0.0) {
            return bad("need a, b >= 0 and a + b > 0");
        }
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return bad("need L0 > 0");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("need eps > 0");
        }
        for h in [&self.h_u, &self.h_b] {
            match h {
                HKind::SmoothBump { lbar } if !(*lbar > 0.0 && *lbar < self.l0 / 2.0) => {
                    return bad("need 0 < Lbar0 < L0/2");
                }
                HKind::Table(t) if (t.eval(0.0) - 1.0).abs() > 1e-12 => return bad("h table must have h(0) = 1"),
                _ => {}
            }
        }
        if let FKind::Table(t) = &self.f_kind {
            if (t.eval(0.0) - 1.0).abs() > 1e-12 {
                return bad("f table must have f(0) = 1");
            }
        }
        Ok(())
    }

    fn compute_c_f(&self) -> f64 {
        // f̃ is even in each coordinate, so one octant of the box suffices.
        let m = 48;
        let mut lo = f64::INFINITY;
        for i in 0..=m {
            for j in 0..=i {
                for l in 0..=j {
                    let x = [self.l0 * i as f64 / m as f64, self.l0 * j as f64 / m as f64, self.l0 * l as f64 / m as f64];
                    lo = lo.min(self.f_tilde(x));
                }
            }
        }
        lo
    }

    /// f̃ without the box cutoff.
    pub fn f_tilde(&self, x: [f64; 3]) -> f64 {
        match &self.f_kind {
            FKind::Galerkin => 1.0,
            FKind::FiniteDifference => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                if r2 == 0.0 {
                    return 1.0;
                }
                let s: f64 = x.iter().map(|c| (0.5 * c).sin().powi(2)).sum();
                4.0 * s / r2
            }
            FKind::Table(t) => t.eval((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()),
        }
    }

    /// `eval_f`: f̃ inside the box `max|x_j| <= L₀`, +∞ outside.
    pub fn f(&self, x: [f64; 3]) -> f64 {
        if x.iter().any(|c| c.abs() > self.l0) {
            f64::INFINITY
        } else {
            self.f_tilde(x)
        }
    }

    /// `eval_g`: `(e^{iax} − e^{−ibx}) / ((a+b)x)`, with g(0) = i.
    pub fn g(&self, x: f64) -> C64 {
        let (a, b) = (self.a, self.b);
        let s = a + b;
        if (x * a.max(b)).abs() < 1e-5 {
            // i + (b − a)x/2 − i(a³ + b³)x²/(6(a+b)) + O(x³)
            return C64::new((b - a) * x / 2.0, 1.0 - (a * a * a + b * b * b) * x * x / (6.0 * s));
        }
        (C64::new(0.0, a * x).exp() - C64::new(0.0, -b * x).exp()) / (s * x)
    }

    pub fn h_kind(&self, which: Flavor) -> &HKind {
        match which {
            Flavor::U => &self.h_u,
            Flavor::B => &self.h_b,
        }
    }

    /// Support radius of h: every h vanishes for `|x| > L₀/2`.
    pub fn h_support(&self) -> f64 {
        self.l0 / 2.0
    }

    pub fn h(&self, which: Flavor, x: [f64; 3]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        self.h_radial(which, r)
    }

    pub fn h_radial(&self, which: Flavor, r: f64) -> f64 {
        let half = self.l0 / 2.0;
        if r > half {
            return 0.0;
        }
        match self.h_kind(which) {
            HKind::Indicator => 1.0,
            HKind::SmoothBump { lbar } => crate::torus_spectral::smooth_step((half - r) / (half - lbar)),
            HKind::Table(t) => t.eval(r),
        }
    }

    fn scaled(&self, k: WaveVector) -> [f64; 3] {
        let k = k.as_f64();
        [self.eps * k[0], self.eps * k[1], self.eps * k[2]]
    }

    /// `|k|² f(εk)`, +∞ outside the box.
    pub fn lambda(&self, k: WaveVector) -> f64 {
        k.norm2() * self.f(self.scaled(k))
    }

    /// `h(εk)`.
    pub fn h_at(&self, which: Flavor, k: WaveVector) -> f64 {
        self.h(which, self.scaled(k))
    }

    /// Symbol of D_j^ε at k: `k^j g(ε k^j)`.
    pub fn dj_symbol(&self, j: usize, k: WaveVector) -> C64 {
        let kj = k.0[j] as f64;
        kj * self.g(self.eps * kj)
    }

    /// Smallest |k| outside every h support, i.e. where the cutoff sums saturate.
    pub fn saturation_radius(&self) -> f64 {
        self.h_support() / self.eps
    }
}

/// Leray symbol `δ_ij − k_i k_j / |k|²`, identity at k = 0.
pub fn leray_symbol(k: [f64; 3]) -> [[f64; 3]; 3] {
    let r2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let mut p = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            p[i][j] = if r2 == 0.0 { d } else { d - k[i] * k[j] / r2 };
        }
    }
    p
}

/// `leray_project`; rejects fields with a nonzero mean mode.
pub fn leray_project(v: &VectorFourierField) -> Result<VectorFourierField> {
    if v.mean_defect() > 0.0 {
        return Err(LabError::NonzeroMean);
    }
    Ok(leray_project_unchecked(v))
}

/// Projection that zeroes the mean mode instead of rejecting it.
pub fn leray_project_unchecked(v: &VectorFourierField) -> VectorFourierField {
    let lat = v.lattice();
    let mut out = VectorFourierField::zeros(lat);
    for idx in 0..lat.len() {
        let k = lat.wave(idx);
        if k.is_zero() {
            continue;
        }
        let p = leray_symbol(k.as_f64());
        let x = v.at(idx);
        let mut y = [C64::default(); 3];
        for i in 0..3 {
            for j in 0..3 {
                y[i] += x[j] * p[i][j];
            }
        }
        out.set_at(idx, y);
    }
    out
}

/// `apply_laplacian_eps`; returns the field and the number of modes with f = +∞ that were zeroed.
pub fn apply_laplacian_eps(f: &ScalarFourierField, spec: &SchemeSpec) -> (ScalarFourierField, usize) {
    let mut killed = 0;
    let out = f.multiply(|k| {
        let l = spec.lambda(k);
        if l.is_infinite() {
            killed += 1;
            C64::default()
        } else {
            C64::new(-l, 0.0)
        }
    });
    (out, killed)
}

pub fn apply_laplacian(f: &ScalarFourierField) -> ScalarFourierField {
    f.multiply(|k| C64::new(-k.norm2(), 0.0))
}

/// Multiplier of `e^{tΔ_ε}` at one mode.
pub fn semigroup_eps_factor(spec: &SchemeSpec, k: WaveVector, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let l = spec.lambda(k);
    if l.is_infinite() {
        0.0
    } else {
        (-l * t).exp()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(LabError::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// `semigroup_eps`: `e^{tΔ_ε}`.
pub fn semigroup_eps(f: &ScalarFourierField, spec: &SchemeSpec, t: f64) -> Result<ScalarFourierField> {
    check_time(t)?;
    Ok(f.multiply(|k| C64::new(semigroup_eps_factor(spec, k, t), 0.0)))
}

/// `semigroup`: `e^{tΔ}`.
pub fn semigroup(f: &ScalarFourierField, t: f64) -> Result<ScalarFourierField> {
    check_time(t)?;
    Ok(f.multiply(|k| C64::new((-k.norm2() * t).exp(), 0.0)))
}

fn check_axis(j: usize) -> Result<()> {
    if j > 2 {
        return Err(LabError::InvalidArgument(format!("direction index {j} not in 0..3")));
    }
    Ok(())
}

/// `apply_Djeps` with zero-based direction `j`.
pub fn apply_dj_eps(f: &ScalarFourierField, j: usize, spec: &SchemeSpec) -> Result<ScalarFourierField> {
    check_axis(j)?;
    Ok(f.multiply(|k| spec.dj_symbol(j, k)))
}

/// `apply_Dj`: symbol `i k^j`.
pub fn apply_dj(f: &ScalarFourierField, j: usize) -> Result<ScalarFourierField> {
    check_axis(j)?;
    Ok(f.multiply(|k| C64::new(0.0, k.0[j] as f64)))
}

/// `apply_Heps`.
pub fn apply_h_eps(f: &ScalarFourierField, spec: &SchemeSpec, which: Flavor) -> ScalarFourierField {
    f.multiply(|k| C64::new(spec.h_at(which, k), 0.0))
}

/// `(u(x + aεe_j) − u(x − bεe_j)) / ((a+b)ε)` evaluated by shifting grid samples.
/// Requires aε and bε to be whole multiples of the grid step.
pub fn difference_quotient(f: &ScalarFourierField, j: usize, spec: &SchemeSpec) -> Result<ScalarFourierField> {
    check_axis(j)?;
    let lat = f.lattice();
    let m = lat.side();
    let step = 2.0 * std::f64::consts::PI / m as f64;
    let shift = |d: f64| -> Result<usize> {
        let s = d / step;
        if (s - s.round()).abs() > 1e-9 {
            return Err(LabError::InvalidArgument(format!("shift {d} is not a multiple of the grid step {step}")));
        }
        Ok((s.round() as i64).rem_euclid(m as i64) as usize)
    };
    let (sa, sb) = (shift(spec.a * spec.eps)?, shift(spec.b * spec.eps)?);
    let grid = SpectralGrid::new(lat);
    let u = grid.inverse(f)?;
    let stride = [m * m, m, 1][j];
    let denom = (spec.a + spec.b) * spec.eps;
    let out: Vec<C64> = (0..u.len())
        .map(|idx| {
            let pos = (idx / stride) % m;
            let plus = idx - pos * stride + ((pos + sa) % m) * stride;
            let minus = idx - pos * stride + ((pos + m - sb) % m) * stride;
            (u[plus] - u[minus]) / denom
        })
        .collect();
    grid.forward(&out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_spectral::ModeLattice;
    use std::f64::consts::PI;

    #[test]
    fn f_values() {
        let s = SchemeSpec::finite_difference(0.1);
        assert_eq!(s.f([0.0; 3]), 1.0);
        assert!((s.f([1e-7, 0.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((s.f([PI, 0.0, 0.0]) - 4.0 / (PI * PI)).abs() < 1e-15);
        assert!(s.f([6.5, 0.0, 0.0]).is_infinite());
        let g = SchemeSpec::galerkin(0.1);
        assert_eq!(g.f([1.0, -2.0, 3.0]), 1.0);
        assert!(s.c_f > 0.0 && s.c_f < 0.01);
    }

    #[test]
    fn g_values() {
        let s = SchemeSpec::finite_difference(0.1);
        assert_eq!(s.g(0.0), C64::new(0.0, 1.0));
        assert!(s.g(PI).norm() < 1e-15);
        let mut worst: f64 = 0.0;
        for i in -20000..=20000 {
            worst = worst.max(s.g(i as f64 * 0.005).norm());
        }
        assert!(worst <= 1.0 + 1e-15);
        let t = s.with_ab(1.0, 0.0).unwrap();
        for x in [1e-6, 1.1e-5, 3e-5, 1e-3] {
            let direct = (C64::new(0.0, x).exp() - 1.0) / x;
            assert!((t.g(x) - direct).norm() < 1e-9, "{x}");
        }
    }

    #[test]
    fn h_values() {
        let s = SchemeSpec::finite_difference(1.0);
        assert_eq!(s.h(Flavor::U, [0.0; 3]), 1.0);
        assert_eq!(s.h(Flavor::U, [1.9, 0.0, 0.0]), 1.0);
        assert_eq!(s.h(Flavor::U, [3.01, 0.0, 0.0]), 0.0);
        let v = s.h(Flavor::U, [2.5, 0.0, 0.0]);
        assert!(v > 0.0 && v < 1.0);
        let ind = SchemeSpec::new(FKind::Galerkin, 1.0, 1.0, 6.0, HKind::Indicator, HKind::Indicator, 1.0).unwrap();
        assert_eq!(ind.h(Flavor::B, [2.99, 0.0, 0.0]), 1.0);
        assert_eq!(ind.h(Flavor::B, [3.01, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let h = HKind::Indicator;
        assert!(SchemeSpec::new(FKind::Galerkin, 0.0, 0.0, 6.0, h.clone(), h.clone(), 0.1).is_err());
        assert!(SchemeSpec::new(FKind::Galerkin, 1.0, 1.0, 6.0, HKind::SmoothBump { lbar: 3.5 }, h.clone(), 0.1).is_err());
        assert!(SchemeSpec::new(FKind::Galerkin, 1.0, 1.0, 6.0, h.clone(), h, -1.0).is_err());
    }

    #[test]
    fn leray_examples() {
        let lat = ModeLattice::new(1).unwrap();
        let k = WaveVector::new(1, 0, 0);
        let idx = lat.index(k).unwrap();
        let mut v = VectorFourierField::zeros(lat);
        v.set_at(idx, [C64::new(1.0, 0.0), C64::default(), C64::default()]);
        assert_eq!(leray_project(&v).unwrap().max_abs(), 0.0);
        v.set_at(idx, [C64::default(), C64::new(1.0, 0.0), C64::default()]);
        assert_eq!(leray_project(&v).unwrap(), v);
        let mut m = VectorFourierField::zeros(lat);
        m.set_at(0, [C64::new(1.0, 0.0), C64::default(), C64::default()]);
        assert!(leray_project(&m).is_err());
    }

    #[test]
    fn difference_quotient_matches_symbol() {
        let lat = ModeLattice::new(5).unwrap();
        let spec = SchemeSpec::finite_difference(2.0 * PI / 11.0);
        let mut f = ScalarFourierField::from_fn(lat, |k| C64::new(((k.0[0] * 7 + k.0[1] * 3 - k.0[2]) as f64).sin(), 0.0));
        f.symmetrize_reality();
        for j in 0..3 {
            let spectral = apply_dj_eps(&f, j, &spec).unwrap();
            let physical = difference_quotient(&f, j, &spec).unwrap();
            assert!(spectral.max_abs_diff(&physical) < 1e-10);
        }
        let bad = spec.with_eps(0.3);
        assert!(difference_quotient(&f, 0, &bad).is_err());
    }

    #[test]
    fn semigroups() {
        let lat = ModeLattice::new(4).unwrap();
        let spec = SchemeSpec::finite_difference(0.25);
        let k = WaveVector::new(2, 1, 0);
        let e = ScalarFourierField::basis(lat, k).unwrap();
        let s = semigroup_eps(&e, &spec, 1.0).unwrap();
        let expect = (-5.0 * spec.f_tilde([0.5, 0.25, 0.0])).exp();
        assert!((s.get(k).re - expect).abs() < 1e-15);
        assert!(semigroup(&e, -1.0).is_err());
        assert_eq!(semigroup_eps(&e, &spec, 0.0).unwrap(), e);
        let far = spec.with_eps(4.0);
        assert_eq!(semigroup_eps(&e, &far, 0.5).unwrap().max_abs(), 0.0);
        let (lap, killed) = apply_laplacian_eps(&ScalarFourierField::from_fn(lat, |_| C64::new(1.0, 0.0)), &far);
        assert!(killed > 0);
        assert!(lap.coeffs().iter().all(|c| c.is_finite()));
    }
}
