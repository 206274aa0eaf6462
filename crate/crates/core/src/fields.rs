//! The Gaussian linear level: coupled approximate and continuum Ornstein–Uhlenbeck
//! modes driven by shared Leray-projected noise, and their closed-form covariances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::schemes::{leray_symbol, Flavor, SchemeSpec};
use crate::torus_spectral::{ModeLattice, VectorFourierField, WaveVector, C64};

/// How the approximate and continuum states share one increment over a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Each marginal takes its exact OU step, both fed by the same normalized increment.
    #[default]
    SharedIncrement,
    /// Exact joint transition of the pair driven by one Wiener path.
    ExactJoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub lattice: ModeLattice,
    pub scheme: SchemeSpec,
    /// Drive u and b with the same Wiener process.
    pub identified: bool,
    pub coupling: Coupling,
}

impl NoiseSpec {
    pub fn new(seed: u64, dt: f64, t_end: f64, lattice: ModeLattice, scheme: SchemeSpec) -> Result<Self> {
        if !(dt > 0.0) || !(t_end >= dt) {
            return Err(LabError::InvalidArgument(format!("need dt > 0 and T >= dt (dt={dt}, T={t_end})")));
        }
        Ok(NoiseSpec { seed, dt, t_end, lattice, scheme, identified: true, coupling: Coupling::default() })
    }
}

/// Which of the four linear-level families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Approx(Flavor),
    Cont(Flavor),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pair {
    Uu,
    Ub,
    Bb,
}

impl Pair {
    pub fn flavors(self) -> (Flavor, Flavor) {
        match self {
            Pair::Uu => (Flavor::U, Flavor::U),
            Pair::Ub => (Flavor::U, Flavor::B),
            Pair::Bb => (Flavor::B, Flavor::B),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovKind {
    /// Both factors approximate.
    Approx,
    /// Both factors continuum.
    Cont,
    /// First factor approximate, second continuum.
    Cross,
}

pub type Mat3 = [[C64; 3]; 3];

/// Per-mode rates and cutoffs.
#[derive(Clone, Copy, Debug)]
struct ModeParams {
    idx: usize,
    neg: usize,
    lam_approx: f64,
    lam_cont: f64,
    h_u: f64,
    h_b: f64,
    proj: [[f64; 3]; 3],
}

fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
}

fn project(p: &[[f64; 3]; 3], z: [C64; 3]) -> [C64; 3] {
    let mut y = [C64::default(); 3];
    for i in 0..3 {
        for j in 0..3 {
            y[i] += z[j] * p[i][j];
        }
    }
    y
}

fn draw_vec<R: Rng>(rng: &mut R) -> [C64; 3] {
    [complex_normal(rng), complex_normal(rng), complex_normal(rng)]
}

/// Cholesky factor of `[[v1, c], [c, v2]]` as `(a11, a21, a22)`.
fn chol2(v1: f64, c: f64, v2: f64) -> (f64, f64, f64) {
    if v1 <= 0.0 {
        return (0.0, 0.0, v2.max(0.0).sqrt());
    }
    let a11 = v1.sqrt();
    // exact in the perfectly correlated case so identical dynamics stay identical
    let a21 = if c == v1 { a11 } else { c / a11 };
    (a11, a21, ((v1 * v2 - c * c).max(0.0) / v1).sqrt())
}

/// `(1 − e^{−x})/x` with the limit 1 at x = 0.
pub fn one_minus_exp_over(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Joint per-mode state of the approximate and continuum linear levels.
#[derive(Clone, Debug)]
pub struct CoupledOUEnsemble {
    pub spec: NoiseSpec,
    pub t: f64,
    pub u: VectorFourierField,
    pub b: VectorFourierField,
    pub u_bar: VectorFourierField,
    pub b_bar: VectorFourierField,
    modes: Vec<ModeParams>,
    rng: ChaCha8Rng,
}

/// Representatives of the pairs {k, −k} with k ≠ 0.
pub fn half_lattice(lattice: ModeLattice) -> Vec<usize> {
    (0..lattice.len()).filter(|&i| lattice.wave(i) > -lattice.wave(i)).collect()
}

impl CoupledOUEnsemble {
    /// Zero state at t = 0; the RNG stream is `stream` of the master seed.
    pub fn new(spec: NoiseSpec, stream: u64) -> Self {
        let lat = spec.lattice;
        let modes = half_lattice(lat)
            .into_iter()
            .map(|idx| {
                let k = lat.wave(idx);
                let s = &spec.scheme;
                ModeParams {
                    idx,
                    neg: lat.neg_index(idx),
                    lam_approx: s.lambda(k),
                    lam_cont: k.norm2(),
                    h_u: s.h_at(Flavor::U, k),
                    h_b: s.h_at(Flavor::B, k),
                    proj: leray_symbol(k.as_f64()),
                }
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(stream);
        let z = VectorFourierField::zeros(lat);
        CoupledOUEnsemble { spec, t: 0.0, u: z.clone(), b: z.clone(), u_bar: z.clone(), b_bar: z, modes, rng }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.spec.lattice
    }

    pub fn field(&self, fam: Family) -> &VectorFourierField {
        match fam {
            Family::Approx(Flavor::U) => &self.u,
            Family::Approx(Flavor::B) => &self.b,
            Family::Cont(Flavor::U) => &self.u_bar,
            Family::Cont(Flavor::B) => &self.b_bar,
        }
    }

    fn write(&mut self, m: &ModeParams, vals: [[C64; 3]; 4]) {
        let targets = [&mut self.u, &mut self.b, &mut self.u_bar, &mut self.b_bar];
        for (f, v) in targets.into_iter().zip(vals) {
            f.set_at(m.idx, v);
            f.set_at(m.neg, [v[0].conj(), v[1].conj(), v[2].conj()]);
        }
    }

    /// Draw (Y_approx, Y_cont) for one driving noise given the 2×2 Cholesky factor.
    fn draw_pair(rng: &mut ChaCha8Rng, m: &ModeParams, ch: (f64, f64, f64)) -> ([C64; 3], [C64; 3]) {
        let z1 = project(&m.proj, draw_vec(rng));
        let z2 = project(&m.proj, draw_vec(rng));
        let y1 = z1.map(|z| z * ch.0);
        let mut y2 = [C64::default(); 3];
        for i in 0..3 {
            y2[i] = z1[i] * ch.1 + z2[i] * ch.2;
        }
        (y1, y2)
    }

    /// `burn_in_stationary`: replace the state by a draw from the exact joint stationary law.
    pub fn burn_in_stationary(&mut self) {
        let modes = self.modes.clone();
        let identified = self.spec.identified;
        for m in &modes {
            let (l1, l2) = (m.lam_approx, m.lam_cont);
            let ch = if l1.is_finite() { chol2(0.5 / l1, 1.0 / (l1 + l2), 0.5 / l2) } else { (0.0, 0.0, (0.5 / l2).sqrt()) };
            let (yu1, yu2) = Self::draw_pair(&mut self.rng, m, ch);
            let (yb1, yb2) = if identified { (yu1, yu2) } else { Self::draw_pair(&mut self.rng, m, ch) };
            let vals = [yu1.map(|y| y * m.h_u), yb1.map(|y| y * m.h_b), yu2.map(|y| y * m.h_u), yb2.map(|y| y * m.h_b)];
            self.write(m, vals);
        }
    }

    /// `step_linear`: advance every mode by `dt`.
    pub fn step_linear(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(LabError::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let modes = self.modes.clone();
        let identified = self.spec.identified;
        let coupling = self.spec.coupling;
        for m in &modes {
            let (l1, l2) = (m.lam_approx, m.lam_cont);
            let e1 = if l1.is_finite() { (-l1 * dt).exp() } else { 0.0 };
            let e2 = (-l2 * dt).exp();
            let v1 = if l1.is_finite() { dt * one_minus_exp_over(2.0 * l1 * dt) } else { 0.0 };
            let v2 = dt * one_minus_exp_over(2.0 * l2 * dt);
            let ch = match coupling {
                Coupling::SharedIncrement => (v1.sqrt(), v2.sqrt(), 0.0),
                Coupling::ExactJoint => {
                    let c = if l1.is_finite() { dt * one_minus_exp_over((l1 + l2) * dt) } else { 0.0 };
                    chol2(v1, c, v2)
                }
            };
            let (zu1, zu2) = Self::draw_pair(&mut self.rng, m, ch);
            let (zb1, zb2) = if identified { (zu1, zu2) } else { Self::draw_pair(&mut self.rng, m, ch) };
            let old = [self.u.at(m.idx), self.b.at(m.idx), self.u_bar.at(m.idx), self.b_bar.at(m.idx)];
            let mut vals = [[C64::default(); 3]; 4];
            for i in 0..3 {
                vals[0][i] = old[0][i] * e1 + zu1[i] * m.h_u;
                vals[1][i] = old[1][i] * e1 + zb1[i] * m.h_b;
                vals[2][i] = old[2][i] * e2 + zu2[i] * m.h_u;
                vals[3][i] = old[3][i] * e2 + zb2[i] * m.h_b;
            }
            self.write(m, vals);
        }
        self.t += dt;
        Ok(())
    }

    /// Trajectory rows `(t, k, component, re, im)` for the modes in `keep`.
    pub fn trajectory_rows(&self, keep: &[WaveVector]) -> Vec<TrajectoryRow> {
        let lat = self.lattice();
        let names = [("u", &self.u), ("b", &self.b), ("u_bar", &self.u_bar), ("b_bar", &self.b_bar)];
        let mut rows = Vec::new();
        for k in keep {
            let Some(idx) = lat.index(*k) else { continue };
            for (name, f) in names {
                for (c, v) in f.at(idx).iter().enumerate() {
                    rows.push(TrajectoryRow {
                        t: self.t,
                        k: k.0,
                        component: format!("{name}{}", c + 1),
                        re: v.re,
                        im: v.im,
                    });
                }
            }
        }
        rows
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub k: [i32; 3],
    pub component: String,
    pub re: f64,
    pub im: f64,
}

/// `covariance_closed_form`: `E[X^i_t(k) conj X^j_s(k)]`.
pub fn covariance_closed_form(
    scheme: &SchemeSpec,
    identified: bool,
    k: WaveVector,
    t: f64,
    s: f64,
    pair: Pair,
    kind: CovKind,
) -> Result<Mat3> {
    if k.is_zero() {
        return Err(LabError::InvalidArgument("covariance undefined at k = 0".into()));
    }
    let (f1, f2) = pair.flavors();
    if f1 != f2 && !identified {
        return Ok([[C64::default(); 3]; 3]);
    }
    let hh = scheme.h_at(f1, k) * scheme.h_at(f2, k);
    let l1 = scheme.lambda(k);
    let l2 = k.norm2();
    let tau = t - s;
    let scalar = if hh == 0.0 {
        0.0
    } else {
        match kind {
            CovKind::Approx => (-l1 * tau.abs()).exp() * hh / (2.0 * l1),
            CovKind::Cont => (-l2 * tau.abs()).exp() * hh / (2.0 * l2),
            CovKind::Cross if tau <= 0.0 => (-l2 * (-tau)).exp() * hh / (l1 + l2),
            CovKind::Cross => (-l1 * tau).exp() * hh / (l1 + l2),
        }
    };
    let p = leray_symbol(k.as_f64());
    let mut out = [[C64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = C64::new(scalar * p[i][j], 0.0);
        }
    }
    Ok(out)
}

/// Monte Carlo covariance estimate with per-entry standard errors (real and imaginary parts).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovEstimate {
    pub k: [i32; 3],
    pub pair: Pair,
    pub kind: CovKind,
    pub lag: f64,
    pub samples: usize,
    pub estimate: Mat3,
    pub std_err: Mat3,
}

fn families(pair: Pair, kind: CovKind) -> (Family, Family) {
    let (f1, f2) = pair.flavors();
    match kind {
        CovKind::Approx => (Family::Approx(f1), Family::Approx(f2)),
        CovKind::Cont => (Family::Cont(f1), Family::Cont(f2)),
        CovKind::Cross => (Family::Approx(f1), Family::Cont(f2)),
    }
}

/// `mc_covariance`: stationary samples of `E[X^i_{t+lag}(k) conj X^j_t(k)]`; sample n uses RNG stream n.
pub fn mc_covariance(spec: &NoiseSpec, k: WaveVector, pair: Pair, kind: CovKind, lag: f64, samples: usize) -> Result<CovEstimate> {
    if samples < 100 {
        return Err(LabError::InvalidArgument(format!("need >= 100 samples, got {samples}")));
    }
    let lat = spec.lattice;
    let idx = lat.index(k).ok_or_else(|| LabError::InvalidArgument(format!("{k:?} outside lattice")))?;
    if k.is_zero() {
        return Err(LabError::InvalidArgument("k = 0 carries no noise".into()));
    }
    let (fa, fb) = families(pair, kind);
    let products: Vec<Mat3> = (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut e = CoupledOUEnsemble::new(spec.clone(), n as u64);
            e.burn_in_stationary();
            let second = e.field(fb).at(idx);
            if lag > 0.0 {
                e.step_linear(lag).expect("positive lag");
            }
            outer(e.field(fa).at(idx), second)
        })
        .collect();
    let (estimate, std_err) = mean_and_se(&products);
    Ok(CovEstimate { k: k.0, pair, kind, lag, samples, estimate, std_err })
}

fn outer(first: [C64; 3], second: [C64; 3]) -> Mat3 {
    let mut m = [[C64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = first[i] * second[j].conj();
        }
    }
    m
}

/// Entrywise sample mean and standard error of the real and imaginary parts.
fn mean_and_se(products: &[Mat3]) -> (Mat3, Mat3) {
    let n = products.len() as f64;
    let mut est = [[C64::default(); 3]; 3];
    let mut se = [[C64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mean: C64 = products.iter().map(|p| p[i][j]).sum::<C64>() / n;
            let var_re = products.iter().map(|p| (p[i][j].re - mean.re).powi(2)).sum::<f64>() / (n - 1.0);
            let var_im = products.iter().map(|p| (p[i][j].im - mean.im).powi(2)).sum::<f64>() / (n - 1.0);
            est[i][j] = mean;
            se[i][j] = C64::new((var_re / n).sqrt(), (var_im / n).sqrt());
        }
    }
    (est, se)
}

const PAIRS: [Pair; 3] = [Pair::Uu, Pair::Ub, Pair::Bb];
const KINDS: [CovKind; 3] = [CovKind::Approx, CovKind::Cont, CovKind::Cross];
const FAMILIES: [Family; 4] = [Family::Approx(Flavor::U), Family::Approx(Flavor::B), Family::Cont(Flavor::U), Family::Cont(Flavor::B)];

fn family_slot(f: Family) -> usize {
    FAMILIES.iter().position(|&g| g == f).expect("listed")
}

/// Every pair and kind at every `k` and lag from one set of stationary samples.
/// Lags must be nondecreasing; sample n steps through them in order on RNG stream n.
/// Ordered by k, then lag, then pair, then kind.
pub fn mc_covariance_all(spec: &NoiseSpec, ks: &[WaveVector], lags: &[f64], samples: usize) -> Result<Vec<CovEstimate>> {
    if samples < 100 {
        return Err(LabError::InvalidArgument(format!("need >= 100 samples, got {samples}")));
    }
    if lags.iter().any(|l| !(*l >= 0.0)) || lags.windows(2).any(|w| w[1] < w[0]) {
        return Err(LabError::InvalidArgument(format!("lags must be nonnegative and nondecreasing: {lags:?}")));
    }
    let lat = spec.lattice;
    let idx = ks
        .iter()
        .map(|k| match lat.index(*k) {
            Some(_) if k.is_zero() => Err(LabError::InvalidArgument("k = 0 carries no noise".into())),
            Some(i) => Ok(i),
            None => Err(LabError::InvalidArgument(format!("{k:?} outside lattice"))),
        })
        .collect::<Result<Vec<usize>>>()?;
    let snap = |e: &CoupledOUEnsemble| -> Vec<[[C64; 3]; 4]> { idx.iter().map(|&i| FAMILIES.map(|f| e.field(f).at(i))).collect() };
    // per sample: the state at 0, then at each lag
    let draws: Vec<Vec<Vec<[[C64; 3]; 4]>>> = (0..samples)
        .into_par_iter()
        .map(|n| {
            let mut e = CoupledOUEnsemble::new(spec.clone(), n as u64);
            e.burn_in_stationary();
            let mut out = vec![snap(&e)];
            let mut now = 0.0;
            for &lag in lags {
                if lag > now {
                    e.step_linear(lag - now).expect("positive increment");
                    now = lag;
                }
                out.push(snap(&e));
            }
            out
        })
        .collect();
    let mut res = Vec::with_capacity(ks.len() * lags.len() * 9);
    for (ki, k) in ks.iter().enumerate() {
        for (li, &lag) in lags.iter().enumerate() {
            for pair in PAIRS {
                for kind in KINDS {
                    let (fa, fb) = families(pair, kind);
                    let (sa, sb) = (family_slot(fa), family_slot(fb));
                    let products: Vec<Mat3> = draws.iter().map(|d| outer(d[li + 1][ki][sa], d[0][ki][sb])).collect();
                    let (estimate, std_err) = mean_and_se(&products);
                    res.push(CovEstimate { k: k.0, pair, kind, lag, samples, estimate, std_err });
                }
            }
        }
    }
    Ok(res)
}

/// Fraction of the 18 real scalars (re and im of each entry) within `z` standard errors.
pub fn fraction_within(est: &CovEstimate, exact: &Mat3, z: f64) -> (usize, usize) {
    let mut ok = 0;
    for i in 0..3 {
        for j in 0..3 {
            let d = est.estimate[i][j] - exact[i][j];
            if d.re.abs() <= z * est.std_err[i][j].re + 1e-14 {
                ok += 1;
            }
            if d.im.abs() <= z * est.std_err[i][j].im + 1e-14 {
                ok += 1;
            }
        }
    }
    (ok, 18)
}

/// Stationary cross covariance scalar reached under the shared-increment step of size `dt`
/// (before the `h h' P̂` factors): `sqrt(v₁v₂) / (1 − e^{−(λ₁+λ₂)dt})`.
pub fn shared_increment_cross_scalar(l1: f64, l2: f64, dt: f64) -> f64 {
    let v1 = dt * one_minus_exp_over(2.0 * l1 * dt);
    let v2 = dt * one_minus_exp_over(2.0 * l2 * dt);
    (v1 * v2).sqrt() / (dt * (l1 + l2) * one_minus_exp_over((l1 + l2) * dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, eps: f64) -> NoiseSpec {
        NoiseSpec::new(7, 0.01, 1.0, ModeLattice::new(n).unwrap(), SchemeSpec::finite_difference(eps)).unwrap()
    }

    #[test]
    fn invariants_after_burn_in_and_steps() {
        let mut e = CoupledOUEnsemble::new(spec(4, 0.25), 0);
        e.burn_in_stationary();
        for _ in 0..3 {
            e.step_linear(0.01).unwrap();
        }
        for f in [&e.u, &e.b, &e.u_bar, &e.b_bar] {
            assert!(f.divergence_defect() < 1e-12);
            assert!(f.reality_defect() == 0.0);
            assert!(f.mean_defect() == 0.0);
        }
        assert!(e.step_linear(0.0).is_err());
    }

    #[test]
    fn cutoff_modes_stay_zero() {
        let mut e = CoupledOUEnsemble::new(spec(6, 1.0), 0);
        e.burn_in_stationary();
        e.step_linear(0.1).unwrap();
        let lat = e.lattice();
        let k = WaveVector::new(4, 0, 0);
        assert!(e.spec.scheme.h_at(Flavor::U, k) == 0.0);
        assert!(e.u.at(lat.index(k).unwrap()).iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn closed_form_examples() {
        let s = SchemeSpec::finite_difference(0.125);
        let k = WaveVector::new(1, 2, 0);
        let a = covariance_closed_form(&s, true, k, 0.3, 0.3, Pair::Uu, CovKind::Approx).unwrap();
        let l1 = s.lambda(k);
        let p = leray_symbol(k.as_f64());
        assert!((a[0][1].re - p[0][1] / (2.0 * l1)).abs() < 1e-15);
        let c = covariance_closed_form(&s, true, k, 0.0, 0.2, Pair::Uu, CovKind::Cross).unwrap();
        assert!((c[2][2].re - (-5.0 * 0.2f64).exp() / (l1 + 5.0)).abs() < 1e-15);
        let ind = covariance_closed_form(&s, false, k, 0.0, 0.0, Pair::Ub, CovKind::Cont).unwrap();
        assert!(ind.iter().flatten().all(|c| c.norm() == 0.0));
        assert!(covariance_closed_form(&s, true, WaveVector::ZERO, 0.0, 0.0, Pair::Uu, CovKind::Cont).is_err());
    }

    #[test]
    fn shared_increment_bias_is_second_order() {
        let (l1, l2) = (3.0, 5.0);
        let exact = 1.0 / (l1 + l2);
        let b1 = shared_increment_cross_scalar(l1, l2, 0.02) - exact;
        let b2 = shared_increment_cross_scalar(l1, l2, 0.01) - exact;
        let ratio = b1 / b2;
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
        // leading term (λ₁ − λ₂)² dt² / 24 relative
        assert!((b2 / exact - (l1 - l2).powi(2) * 1e-4 / 24.0).abs() < 1e-6);
    }

    #[test]
    fn mc_is_deterministic() {
        let sp = spec(2, 0.25);
        let k = WaveVector::new(1, 0, 0);
        let a = mc_covariance(&sp, k, Pair::Uu, CovKind::Approx, 0.0, 200).unwrap();
        let b = mc_covariance(&sp, k, Pair::Uu, CovKind::Approx, 0.0, 200).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batched_estimates_match_single_ones() {
        let sp = spec(2, 0.25);
        let ks = [WaveVector::new(1, 0, 0), WaveVector::new(1, 1, 0)];
        let all = mc_covariance_all(&sp, &ks, &[0.05], 150).unwrap();
        assert_eq!(all.len(), 18);
        for e in &all {
            let one = mc_covariance(&sp, WaveVector(e.k), e.pair, e.kind, e.lag, 150).unwrap();
            assert_eq!(&one, e);
        }
        assert!(mc_covariance_all(&sp, &ks, &[0.1, 0.05], 150).is_err());
    }
}
