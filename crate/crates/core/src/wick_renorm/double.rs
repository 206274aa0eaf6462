//! Double lattice sums over pairs `(k₁, k₂)`: the C₂₂ family, the C₁₃ blocks 1–4,
//! and direct quadrature evaluations of the expressions they decompose.

use std::collections::HashMap;

use rayon::prelude::*;

use super::quad::adaptive_gk15;
use super::{
    chunked_sum, cutoff_saturated, exp_mix_integral, support_modes, theta2, theta_j_max, var_factor, ConstFamily, ConstantTensor, ModeData,
    Provenance, Side, TWO_PI,
};
use crate::error::{LabError, Result};
use crate::schemes::{leray_symbol, SchemeSpec};
use crate::torus_spectral::{ModeLattice, WaveVector, C64};

pub const DEFAULT_PAIR_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleSumConfig {
    pub pair_budget: u64,
    /// Relative tolerance of the time quadratures in the direct routes.
    pub quad_tol: f64,
}

impl Default for DoubleSumConfig {
    fn default() -> Self {
        DoubleSumConfig { pair_budget: DEFAULT_PAIR_BUDGET, quad_tol: 1e-11 }
    }
}

type M3 = [[C64; 3]; 3];
type R3 = [[f64; 3]; 3];

fn mat_mul(a: &R3, b: &R3) -> R3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|l| a[i][l] * b[l][j]).sum();
        }
    }
    c
}

fn mat_vec(a: &R3, v: &[C64; 3]) -> [C64; 3] {
    let mut o = [C64::default(); 3];
    for i in 0..3 {
        for l in 0..3 {
            o[i] += v[l] * a[i][l];
        }
    }
    o
}

/// Data of `k₁₂ = k₁ + k₂` on one side.
struct SumMode {
    p: R3,
    lam: f64,
    /// `w(k₁₂)` and `w(−k₁₂)`.
    z: [C64; 3],
    zm: [C64; 3],
}

fn sum_mode(spec: &SchemeSpec, side: Side, k: WaveVector) -> SumMode {
    let kf = k.as_f64();
    match side {
        Side::Approx => SumMode {
            p: leray_symbol(kf),
            lam: spec.lambda(k),
            z: [0, 1, 2].map(|j| spec.dj_symbol(j, k)),
            zm: [0, 1, 2].map(|j| spec.dj_symbol(j, -k)),
        },
        Side::Cont => SumMode {
            p: leray_symbol(kf),
            lam: k.norm2(),
            z: kf.map(|c| C64::new(0.0, c)),
            zm: kf.map(|c| C64::new(0.0, -c)),
        },
    }
}

struct PairSetup {
    approx: Vec<ModeData>,
    cont: Vec<ModeData>,
    provenance: Provenance,
}

fn pair_setup(spec: &SchemeSpec, lattice: ModeLattice, cfg: &DoubleSumConfig) -> Result<PairSetup> {
    let approx = support_modes(spec, Side::Approx, lattice);
    let needed = (approx.len() as u64).pow(2);
    if needed > cfg.pair_budget {
        return Err(LabError::BudgetExceeded { needed, cap: cfg.pair_budget });
    }
    let cont = support_modes(spec, Side::Cont, lattice);
    Ok(PairSetup { approx, cont, provenance: Provenance::LatticeSum { n: lattice.n(), truncated: !cutoff_saturated(spec, lattice) } })
}

fn to_tensor(v: &[C64], family: ConstFamily, spec: &SchemeSpec, t: Option<f64>, prov: &Provenance) -> ConstantTensor {
    ConstantTensor::new(family, None, 2, v.to_vec(), spec.eps, t, prov.clone())
}

/// `Y = −(h_u(k₁)h_b(k₂) − h_u(k₂)h_b(k₁))²`, zero when the two cutoffs agree.
fn y_weight(m1: &ModeData, m2: &ModeData) -> f64 {
    -(m1.hu * m2.hb - m2.hu * m1.hb).powi(2)
}

/// `Σ P₁₂^{ii₁}P₁₂^{jj₁}[P₂^{i₂j₁}P₁^{i₁j₂} − P₂^{i₂j₂}P₁^{i₁j₁}] z_{i₂} z'_{j₂}`, contracted.
fn c22_contraction(p12: &R3, p1: &R3, p2: &R3, z: &[C64; 3], zp: &[C64; 3]) -> M3 {
    let a = mat_vec(&mat_mul(p12, p1), zp);
    let b = mat_vec(&mat_mul(p12, p2), z);
    let c = mat_mul(&mat_mul(p12, p1), p12);
    let p2zp = mat_vec(p2, zp);
    let s: C64 = (0..3).map(|l| z[l] * p2zp[l]).sum();
    let mut out = [[C64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i] * b[j] - s * c[i][j];
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct C22Family {
    pub c: ConstantTensor,
    pub c_bar: ConstantTensor,
    pub phi: ConstantTensor,
    pub phi_bar: ConstantTensor,
}

impl C22Family {
    /// `C₂₂ + φ₂₂ − C̄₂₂ − φ̄₂₂`, which the direct route must reproduce.
    pub fn combined(&self) -> Vec<C64> {
        (0..9).map(|o| self.c.values[o] + self.phi.values[o] - self.c_bar.values[o] - self.phi_bar.values[o]).collect()
    }
}

/// `{C₂₂, C̄₂₂, φ₂₂(t), φ̄₂₂(t)}` per `(i, j)`.
pub fn c22_family(t: f64, spec: &SchemeSpec, lattice: ModeLattice, cfg: &DoubleSumConfig) -> Result<C22Family> {
    let setup = pair_setup(spec, lattice, cfg)?;
    let m = setup.approx.len();
    let pref = TWO_PI.powi(-6) / 4.0;
    // slots: C, φ, C̄, φ̄
    let v = chunked_sum(m * m, 36, |idx, acc| {
        let (a, b) = (idx / m, idx % m);
        let y = y_weight(&setup.approx[a], &setup.approx[b]);
        let k12 = setup.approx[a].k + setup.approx[b].k;
        if y == 0.0 || k12.is_zero() {
            return;
        }
        for (side, mods, slot) in [(Side::Approx, &setup.approx, 0), (Side::Cont, &setup.cont, 18)] {
            let (m1, m2) = (&mods[a], &mods[b]);
            let s = sum_mode(spec, side, k12);
            let big = s.lam + m1.lam + m2.lam;
            if !big.is_finite() {
                continue;
            }
            let contr = c22_contraction(&s.p, &m1.p, &m2.p, &s.z, &s.zm);
            let base = pref * y / (4.0 * m1.lam * m2.lam * big);
            let c = base / s.lam;
            let phi = -base * ((-2.0 * s.lam * t).exp() / s.lam + 2.0 * exp_mix_integral(2.0 * s.lam, big, t));
            for i in 0..3 {
                for j in 0..3 {
                    acc[slot + i * 3 + j] += contr[i][j] * c;
                    acc[slot + 9 + i * 3 + j] += contr[i][j] * phi;
                }
            }
        }
    });
    let prov = &setup.provenance;
    Ok(C22Family {
        c: to_tensor(&v[0..9], ConstFamily::C22 { bar: false }, spec, None, prov),
        phi: to_tensor(&v[9..18], ConstFamily::Phi22 { bar: false }, spec, Some(t), prov),
        c_bar: to_tensor(&v[18..27], ConstFamily::C22 { bar: true }, spec, None, prov),
        phi_bar: to_tensor(&v[27..36], ConstFamily::Phi22 { bar: true }, spec, Some(t), prov),
    })
}

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Evaluates `f` once per distinct key, in parallel.
fn memoized<F>(keys: Vec<Vec<f64>>, f: F) -> Result<HashMap<Vec<u64>, f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut uniq: HashMap<Vec<u64>, Vec<f64>> = HashMap::new();
    for k in keys {
        uniq.entry(key(&k)).or_insert(k);
    }
    uniq.into_par_iter().map(|(k, args)| f(&args).map(|v| (k, v))).collect()
}

/// `∫∫_{[0,t]²} e^{−λ₁₂(2t−s−s̄) − μ|s−s̄|} ds ds̄` by nested quadrature, split on the diagonal.
fn square_integral(l12: f64, mu: f64, t: f64, tol: f64) -> Result<f64> {
    let inner = |s: f64| -> Result<f64> {
        let g = |sb: f64| vec![(-l12 * (2.0 * t - s - sb) - mu * (s - sb).abs()).exp()];
        let lo = if s > 0.0 { adaptive_gk15(g, 0.0, s, 1e-300, tol, 512)?.value[0] } else { 0.0 };
        let hi = if s < t { adaptive_gk15(g, s, t, 1e-300, tol, 512)?.value[0] } else { 0.0 };
        Ok(lo + hi)
    };
    let err = std::cell::Cell::new(None);
    let q = adaptive_gk15(
        |s| match inner(s) {
            Ok(v) => vec![v],
            Err(e) => {
                err.set(Some(e));
                vec![0.0]
            }
        },
        0.0,
        t,
        1e-300,
        tol,
        512,
    )?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(q.value[0])
}

/// The zeroth-chaos term VII³ from its time-integral form, per `(i, j)`.
pub fn vii3_direct(t: f64, spec: &SchemeSpec, lattice: ModeLattice, cfg: &DoubleSumConfig) -> Result<ConstantTensor> {
    let setup = pair_setup(spec, lattice, cfg)?;
    let m = setup.approx.len();
    let mut keys = Vec::new();
    for a in 0..m {
        for b in 0..m {
            let k12 = setup.approx[a].k + setup.approx[b].k;
            if k12.is_zero() || y_weight(&setup.approx[a], &setup.approx[b]) == 0.0 {
                continue;
            }
            for (side, mods) in [(Side::Approx, &setup.approx), (Side::Cont, &setup.cont)] {
                let l12 = sum_mode(spec, side, k12).lam;
                if l12.is_finite() {
                    keys.push(vec![l12, mods[a].lam + mods[b].lam]);
                }
            }
        }
    }
    let table = memoized(keys, |x| square_integral(x[0], x[1], t, cfg.quad_tol))?;
    let pref = TWO_PI.powi(-6) / 4.0;
    let v = chunked_sum(m * m, 9, |idx, acc| {
        let (a, b) = (idx / m, idx % m);
        let y = y_weight(&setup.approx[a], &setup.approx[b]);
        let k12 = setup.approx[a].k + setup.approx[b].k;
        if y == 0.0 || k12.is_zero() {
            return;
        }
        for (side, mods, sign) in [(Side::Approx, &setup.approx, 1.0), (Side::Cont, &setup.cont, -1.0)] {
            let (m1, m2) = (&mods[a], &mods[b]);
            let s = sum_mode(spec, side, k12);
            if !s.lam.is_finite() {
                continue;
            }
            let integral = table[&key(&[s.lam, m1.lam + m2.lam])];
            let c = sign * pref * y * integral / (4.0 * m1.lam * m2.lam);
            // literal index sums over i₁, i₂, j₁, j₂, j₃, j₄
            for i in 0..3 {
                for j in 0..3 {
                    let mut tot = C64::default();
                    for i1 in 0..3 {
                        for j1 in 0..3 {
                            let outer = s.p[i][i1] * s.p[j][j1];
                            if outer == 0.0 {
                                continue;
                            }
                            for i2 in 0..3 {
                                for j2 in 0..3 {
                                    let mut br = 0.0;
                                    for j3 in 0..3 {
                                        for j4 in 0..3 {
                                            br += m2.p[i2][j4] * m2.p[j1][j4] * m1.p[i1][j3] * m1.p[j2][j3]
                                                - m2.p[i2][j4] * m2.p[j2][j4] * m1.p[i1][j3] * m1.p[j1][j3];
                                        }
                                    }
                                    tot += s.z[i2] * s.zm[j2] * (outer * br);
                                }
                            }
                        }
                    }
                    acc[i * 3 + j] += tot * c;
                }
            }
        }
    });
    Ok(to_tensor(&v, ConstFamily::C22 { bar: false }, spec, Some(t), &setup.provenance))
}

/// One of the representative blocks C₁₃₁ … C₁₃₄; the remaining four (from the
/// other third-level branch) are not implemented.
#[derive(Clone, Debug, PartialEq)]
pub struct C13Block {
    pub block: u8,
    pub c: ConstantTensor,
    pub c_bar: ConstantTensor,
    pub phi: ConstantTensor,
    pub phi_bar: ConstantTensor,
}

/// `(H, sign of the bracket, overall sign)` of a block.
fn block_weights(block: u8, m1: &ModeData, m2: &ModeData) -> (f64, f64) {
    match block {
        1 => (m2.hu * m2.hb * m1.hu * m1.hu, 1.0),
        2 => (-m2.hb * m2.hb * m1.hb * m1.hu, 1.0),
        3 => (m2.hb * m2.hb * m1.hu * m1.hb, -1.0),
        _ => (-m2.hu * m2.hb * m1.hb * m1.hb, -1.0),
    }
}

fn check_block(block: u8) -> Result<()> {
    if !(1..=4).contains(&block) {
        return Err(LabError::InvalidArgument(format!("C13 block must be 1..=4 (blocks 5-8 are not implemented), got {block}")));
    }
    Ok(())
}

/// `T^{i₀j₀} = (A P₁ v₂)_{i₀}(P₂ w₁₂)_{j₀} ± (w₁₂ᵀP₁v₂)(A P₂)^{i₀j₀}` with `A = P₂P₁₂`.
fn c13_contraction(s: &SumMode, m1: &ModeData, m2: &ModeData, bracket: f64) -> M3 {
    let a = mat_mul(&m2.p, &s.p);
    let ap1v = mat_vec(&mat_mul(&a, &m1.p), &m2.w);
    let p2w = mat_vec(&m2.p, &s.z);
    let p1v = mat_vec(&m1.p, &m2.w);
    let sc: C64 = (0..3).map(|l| s.z[l] * p1v[l]).sum();
    let ap2 = mat_mul(&a, &m2.p);
    let mut out = [[C64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = ap1v[i] * p2w[j] + sc * (bracket * ap2[i][j]);
        }
    }
    out
}

/// `{C₁₃ₗ(t), C̄₁₃ₗ(t), φ₁₃ₗ(t), φ̄₁₃ₗ(t)}` per `(i₀, j₀)` for `l = block`.
pub fn c13_block(block: u8, t: f64, spec: &SchemeSpec, lattice: ModeLattice, cfg: &DoubleSumConfig) -> Result<C13Block> {
    check_block(block)?;
    let setup = pair_setup(spec, lattice, cfg)?;
    let m = setup.approx.len();
    let jm = theta_j_max(lattice);
    let thetas: Vec<f64> = setup.approx.iter().map(|x| theta2(x.k, jm)).collect();
    let pref = TWO_PI.powi(-6);
    let v = chunked_sum(m * m, 36, |idx, acc| {
        let (a, b) = (idx / m, idx % m);
        let (h, bracket) = block_weights(block, &setup.approx[a], &setup.approx[b]);
        let k12 = setup.approx[a].k + setup.approx[b].k;
        if h == 0.0 || k12.is_zero() {
            return;
        }
        for (side, mods, slot) in [(Side::Approx, &setup.approx, 0), (Side::Cont, &setup.cont, 18)] {
            let (m1, m2) = (&mods[a], &mods[b]);
            let s = sum_mode(spec, side, k12);
            let big = s.lam + m1.lam + m2.lam;
            if !big.is_finite() {
                continue;
            }
            let tc = c13_contraction(&s, m1, m2, bracket);
            let base = pref * thetas[b] * h / (4.0 * m1.lam * m2.lam * big);
            let c = base * var_factor(m2.lam, t);
            let phi = -base * exp_mix_integral(2.0 * m2.lam, big, t);
            for i in 0..3 {
                for j in 0..3 {
                    acc[slot + i * 3 + j] += tc[i][j] * c;
                    acc[slot + 9 + i * 3 + j] += tc[i][j] * phi;
                }
            }
        }
    });
    let prov = &setup.provenance;
    let tt = Some(t);
    Ok(C13Block {
        block,
        c: to_tensor(&v[0..9], ConstFamily::C13 { block, bar: false }, spec, tt, prov),
        phi: to_tensor(&v[9..18], ConstFamily::Phi13 { block, bar: false }, spec, tt, prov),
        c_bar: to_tensor(&v[18..27], ConstFamily::C13 { block, bar: true }, spec, tt, prov),
        phi_bar: to_tensor(&v[27..36], ConstFamily::Phi13 { block, bar: true }, spec, tt, prov),
    })
}

/// `∫₀ᵗ e^{−λ₂(t−s)} ∫₀ˢ e^{−(λ₁₂+λ₁)(s−σ) − λ₂(t−σ)} dσ ds` by nested quadrature.
fn triangle_integral(l1: f64, l2: f64, l12: f64, t: f64, tol: f64) -> Result<f64> {
    let err = std::cell::Cell::new(None);
    let q = adaptive_gk15(
        |s| {
            if s <= 0.0 {
                return vec![0.0];
            }
            let inner = adaptive_gk15(|sg| vec![(-(l12 + l1) * (s - sg) - l2 * (t - sg)).exp()], 0.0, s, 1e-300, tol, 512);
            match inner {
                Ok(r) => vec![(-l2 * (t - s)).exp() * r.value[0]],
                Err(e) => {
                    err.set(Some(e));
                    vec![0.0]
                }
            }
        },
        0.0,
        t,
        1e-300,
        tol,
        512,
    )?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(q.value[0])
}

/// The block's share of the zeroth-chaos term L⁷ from its double time integral,
/// with the Leray contractions summed index by index.
pub fn l7_star_direct(block: u8, t: f64, spec: &SchemeSpec, lattice: ModeLattice, cfg: &DoubleSumConfig) -> Result<ConstantTensor> {
    check_block(block)?;
    let setup = pair_setup(spec, lattice, cfg)?;
    let m = setup.approx.len();
    let jm = theta_j_max(lattice);
    let mut keys = Vec::new();
    for a in 0..m {
        for b in 0..m {
            let k12 = setup.approx[a].k + setup.approx[b].k;
            if k12.is_zero() || block_weights(block, &setup.approx[a], &setup.approx[b]).0 == 0.0 {
                continue;
            }
            for (side, mods) in [(Side::Approx, &setup.approx), (Side::Cont, &setup.cont)] {
                let l12 = sum_mode(spec, side, k12).lam;
                if l12.is_finite() {
                    keys.push(vec![mods[a].lam, mods[b].lam, l12]);
                }
            }
        }
    }
    let table = memoized(keys, |x| triangle_integral(x[0], x[1], x[2], t, cfg.quad_tol))?;
    let pref = TWO_PI.powi(-6);
    let v = chunked_sum(m * m, 9, |idx, acc| {
        let (a, b) = (idx / m, idx % m);
        let (h, bracket) = block_weights(block, &setup.approx[a], &setup.approx[b]);
        let k12 = setup.approx[a].k + setup.approx[b].k;
        if h == 0.0 || k12.is_zero() {
            return;
        }
        let th = theta2(setup.approx[b].k, jm);
        for (side, mods, sign) in [(Side::Approx, &setup.approx, 1.0), (Side::Cont, &setup.cont, -1.0)] {
            let (m1, m2) = (&mods[a], &mods[b]);
            let s = sum_mode(spec, side, k12);
            if !s.lam.is_finite() {
                continue;
            }
            let d = table[&key(&[m1.lam, m2.lam, s.lam])];
            let c = sign * pref * th * h * d / (4.0 * m1.lam * m2.lam);
            for i0 in 0..3 {
                for j0 in 0..3 {
                    let mut tot = C64::default();
                    for i1 in 0..3 {
                        for i2 in 0..3 {
                            let lead = s.p[i1][i2] * m2.p[i0][i1];
                            if lead == 0.0 {
                                continue;
                            }
                            for i3 in 0..3 {
                                for j1 in 0..3 {
                                    let mut br = 0.0;
                                    for i4 in 0..3 {
                                        for i5 in 0..3 {
                                            br += m1.p[j1][i4]
                                                * m2.p[j0][i5]
                                                * (m1.p[i2][i4] * m2.p[i3][i5] + bracket * m1.p[i3][i4] * m2.p[i2][i5]);
                                        }
                                    }
                                    tot += s.z[i3] * m2.w[j1] * (lead * br);
                                }
                            }
                        }
                    }
                    acc[i0 * 3 + j0] += tot * c;
                }
            }
        }
    });
    Ok(to_tensor(&v, ConstFamily::C13 { block, bar: false }, spec, Some(t), &setup.provenance))
}

/// `max |L − φ + φ̄ − C + C̄|` over `(i₀, j₀)` for one block.
pub fn c13_identity_residual(block: u8, t: f64, spec: &SchemeSpec, lattice: ModeLattice, cfg: &DoubleSumConfig) -> Result<f64> {
    let q = c13_block(block, t, spec, lattice, cfg)?;
    let l = l7_star_direct(block, t, spec, lattice, cfg)?;
    Ok((0..9)
        .map(|o| (l.values[o] - q.phi.values[o] + q.phi_bar.values[o] - q.c.values[o] + q.c_bar.values[o]).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{FKind, HKind};

    /// Small support, distinct cutoffs, asymmetric difference.
    fn setup() -> (SchemeSpec, ModeLattice) {
        let spec = SchemeSpec::new(FKind::FiniteDifference, 1.0, 0.0, 6.0, HKind::SmoothBump { lbar: 2.0 }, HKind::Indicator, 1.0).unwrap();
        (spec, ModeLattice::new(3).unwrap())
    }

    #[test]
    fn c22_vanishes_with_equal_cutoffs() {
        let spec = SchemeSpec::finite_difference(1.0).with_ab(1.0, 0.0).unwrap();
        let f = c22_family(0.5, &spec, ModeLattice::new(3).unwrap(), &DoubleSumConfig::default()).unwrap();
        assert_eq!(f.c.max_abs() + f.phi.max_abs() + f.c_bar.max_abs() + f.phi_bar.max_abs(), 0.0);
    }

    #[test]
    fn c22_matches_direct_route() {
        let (spec, lat) = setup();
        let cfg = DoubleSumConfig::default();
        let f = c22_family(0.3, &spec, lat, &cfg).unwrap();
        let d = vii3_direct(0.3, &spec, lat, &cfg).unwrap();
        let comb = f.combined();
        let scale = comb.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(scale > 1e-9, "{scale}");
        for o in 0..9 {
            assert!((comb[o] - d.values[o]).norm() < 1e-9 * scale, "{o}: {} vs {}", comb[o], d.values[o]);
        }
        assert!(f.c.imag_residue() < 1e-10 && f.phi.imag_residue() < 1e-10);
    }

    #[test]
    fn c13_identity_and_t_zero() {
        let (spec, lat) = setup();
        let cfg = DoubleSumConfig::default();
        for block in 1..=4 {
            let r = c13_identity_residual(block, 0.4, &spec, lat, &cfg).unwrap();
            assert!(r < 1e-12, "block {block}: {r}");
            let z = c13_block(block, 0.0, &spec, lat, &cfg).unwrap();
            assert_eq!(z.c.max_abs() + z.c_bar.max_abs() + z.phi.max_abs() + z.phi_bar.max_abs(), 0.0);
        }
        let b = c13_block(1, 0.4, &spec, lat, &cfg).unwrap();
        assert!(b.c.max_abs() > 0.0);
        assert!(c13_block(5, 0.4, &spec, lat, &cfg).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let (spec, lat) = setup();
        let cfg = DoubleSumConfig { pair_budget: 10, ..Default::default() };
        assert!(matches!(c22_family(0.1, &spec, lat, &cfg), Err(LabError::BudgetExceeded { .. })));
    }
}
