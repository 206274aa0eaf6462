//! Wick products of Gaussian mode variables and the renormalization constants.
//!
//! Every constant is an explicit lattice sum over the modes inside the support of
//! the noise cutoffs. Sums run in fixed-size chunks reduced in order, so a value
//! does not depend on the thread count.

mod double;
pub mod quad;
mod single;
mod wick;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::schemes::{leray_symbol, Flavor, SchemeSpec};
use crate::torus_spectral::{block_weight, j_max_for, ModeLattice, WaveVector, C64};

pub use double::{
    c13_block, c13_identity_residual, c22_family, l7_star_direct, vii3_direct, C13Block, C22Family, DoubleSumConfig,
    DEFAULT_PAIR_BUDGET,
};
pub use quad::{adaptive_gk15, QuadResult};
pub use single::{
    bar_constant, bar_constant_literal, ck_all, const_c0, const_c34, const_ck, const_ck_literal, const_ck_tilde, const_ck_tilde_literal,
    const_limit_quadrature, forcing_terms, limit_shell_bound, LimitFamily,
};
pub use wick::{family_covariance, CovOracle, FieldCovOracle, MatrixCov, ModeVar, WickProduct};

pub(crate) const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Which evaluation of the scheme a sum uses: the approximate one, or the
/// continuum one (`f ≡ 1`, `g ≡ i`) that defines the barred constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Approx,
    Cont,
}

/// Per-mode quantities shared by all constant sums.
#[derive(Clone, Debug)]
pub(crate) struct ModeData {
    pub k: WaveVector,
    pub p: [[f64; 3]; 3],
    pub lam: f64,
    pub hu: f64,
    pub hb: f64,
    /// `k^j g(εk^j)` or `i k^j`.
    pub w: [C64; 3],
}

impl ModeData {
    pub fn new(spec: &SchemeSpec, side: Side, k: WaveVector) -> Self {
        let kf = k.as_f64();
        let (lam, w) = match side {
            Side::Approx => (spec.lambda(k), [0, 1, 2].map(|j| spec.dj_symbol(j, k))),
            Side::Cont => (k.norm2(), kf.map(|c| C64::new(0.0, c))),
        };
        ModeData { k, p: leray_symbol(kf), lam, hu: spec.h_at(Flavor::U, k), hb: spec.h_at(Flavor::B, k), w }
    }

    /// Cheap support test before building the full record.
    pub fn supported(spec: &SchemeSpec, k: WaveVector) -> bool {
        !k.is_zero() && (spec.h_at(Flavor::U, k) != 0.0 || spec.h_at(Flavor::B, k) != 0.0)
    }
}

/// `Σ_{|i−j|≤1} θ(2^{−i}k) θ(2^{−j}k)` over the blocks `−1..=j_max+1`.
pub(crate) fn theta2(k: WaveVector, j_max: i32) -> f64 {
    let r = k.norm();
    let weights: Vec<f64> = (-1..=j_max + 1).map(|j| block_weight(j, r)).collect();
    let mut s = 0.0;
    for (a, wa) in weights.iter().enumerate() {
        for (b, wb) in weights.iter().enumerate() {
            if a.abs_diff(b) <= 1 {
                s += wa * wb;
            }
        }
    }
    s
}

/// Block range wide enough for every mode of the lattice.
pub(crate) fn theta_j_max(lattice: ModeLattice) -> i32 {
    j_max_for(lattice).max(1) + 2
}

/// Nonzero modes of the lattice with a nonzero cutoff, in lattice order.
pub(crate) fn support_modes(spec: &SchemeSpec, side: Side, lattice: ModeLattice) -> Vec<ModeData> {
    lattice.modes().filter(|&k| ModeData::supported(spec, k)).map(|k| ModeData::new(spec, side, k)).collect()
}

/// Lattice sum of a per-mode term over the cutoff support without storing the modes.
pub(crate) fn support_sum<F>(spec: &SchemeSpec, side: Side, lattice: ModeLattice, len: usize, f: F) -> Vec<C64>
where
    F: Fn(&ModeData, &mut [C64]) + Sync,
{
    chunked_sum(lattice.len(), len, |idx, acc| {
        let k = lattice.wave(idx);
        if ModeData::supported(spec, k) {
            f(&ModeData::new(spec, side, k), acc);
        }
    })
}

/// Whether the lattice holds every mode with a nonzero cutoff.
pub fn cutoff_saturated(spec: &SchemeSpec, lattice: ModeLattice) -> bool {
    lattice.n() as f64 >= (spec.h_support() / spec.eps).floor()
}

const CHUNK: usize = 2048;

/// `Σ_{i<n} f(i)` into a `len`-vector, chunked and reduced in index order.
pub(crate) fn chunked_sum<F>(n: usize, len: usize, f: F) -> Vec<C64>
where
    F: Fn(usize, &mut [C64]) + Sync,
{
    let partials: Vec<Vec<C64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![C64::default(); len];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                f(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut out = vec![C64::default(); len];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// `(1 − e^{−2λt}) / (2λ)`, the stationary-variance time factor; 0 when λ is infinite,
/// `1/(2λ)` at `t = ∞`.
pub(crate) fn var_factor(lam: f64, t: f64) -> f64 {
    if !lam.is_finite() {
        return 0.0;
    }
    if t.is_infinite() {
        return 0.5 / lam;
    }
    t * crate::fields::one_minus_exp_over(2.0 * lam * t)
}

/// `∫₀ᵗ e^{−α(t−s) − βs} ds` for α, β >= 0.
pub(crate) fn exp_mix_integral(alpha: f64, beta: f64, t: f64) -> f64 {
    if !alpha.is_finite() && !beta.is_finite() {
        return 0.0;
    }
    let lo = alpha.min(beta);
    let d = (alpha - beta).abs();
    if !d.is_finite() {
        return 0.0;
    }
    (-lo * t).exp() * t * crate::fields::one_minus_exp_over(d * t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstFamily {
    C0 { which: u8, bar: bool },
    C { k: u8, tilde: bool, bar: bool },
    C22 { bar: bool },
    Phi22 { bar: bool },
    C13 { block: u8, bar: bool },
    Phi13 { block: u8, bar: bool },
    C34,
}

impl fmt::Display for ConstFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bar = |b: bool| if b { "_bar" } else { "" };
        match *self {
            ConstFamily::C0 { which, bar: b } => write!(f, "C0{which}{}", bar(b)),
            ConstFamily::C { k, tilde, bar: b } => write!(f, "C{k}{}{}", if tilde { "_tilde" } else { "" }, bar(b)),
            ConstFamily::C22 { bar: b } => write!(f, "C22{}", bar(b)),
            ConstFamily::Phi22 { bar: b } => write!(f, "phi22{}", bar(b)),
            ConstFamily::C13 { block, bar: b } => write!(f, "C13{block}{}", bar(b)),
            ConstFamily::Phi13 { block, bar: b } => write!(f, "phi13{block}{}", bar(b)),
            ConstFamily::C34 => write!(f, "C34"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    LatticeSum { n: usize, truncated: bool },
    Quadrature { tolerance: f64, error: f64 },
}

/// An indexed family of constants, stored densely over `{0,1,2}^rank`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantTensor {
    pub family: ConstFamily,
    pub flavor: Option<Flavor>,
    pub rank: usize,
    pub values: Vec<C64>,
    pub eps: f64,
    pub t: Option<f64>,
    pub provenance: Provenance,
}

impl ConstantTensor {
    pub(crate) fn new(family: ConstFamily, flavor: Option<Flavor>, rank: usize, values: Vec<C64>, eps: f64, t: Option<f64>, provenance: Provenance) -> Self {
        assert_eq!(values.len(), 3usize.pow(rank as u32));
        ConstantTensor { family, flavor, rank, values, eps, t, provenance }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank, "index rank");
        idx.iter().fold(0, |acc, &i| {
            assert!(i < 3, "index out of range");
            acc * 3 + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.values[self.offset(idx)]
    }

    /// Real part of one entry.
    pub fn value(&self, idx: &[usize]) -> f64 {
        self.get(idx).re
    }

    pub fn imag_residue(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ConstantTensor) -> f64 {
        assert_eq!(self.rank, other.rank);
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> ConstantTensor {
        ConstantTensor { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.values.len()).map(move |mut o| {
            let mut idx = vec![0; self.rank];
            for slot in idx.iter_mut().rev() {
                *slot = o % 3;
                o /= 3;
            }
            idx
        })
    }

    /// One CSV row per entry, indices one-based.
    pub fn rows(&self, limit: Option<&ConstantTensor>) -> Vec<ConstantRow> {
        self.indices()
            .map(|idx| {
                let v = self.get(&idx);
                let (limit_value, quadrature_error) = match limit {
                    Some(l) => (
                        Some(l.value(&idx)),
                        match l.provenance {
                            Provenance::Quadrature { error, .. } => Some(error),
                            _ => None,
                        },
                    ),
                    None => (None, None),
                };
                ConstantRow {
                    family: self.family.to_string(),
                    flavor: self.flavor.map(|f| f.name().to_string()).unwrap_or_default(),
                    indices: idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" "),
                    eps: self.eps,
                    t: self.t,
                    value: v.re,
                    imag_residue: v.im.abs(),
                    limit_value,
                    quadrature_error,
                }
            })
            .collect()
    }
}

/// Row of the constants table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub family: String,
    pub flavor: String,
    pub indices: String,
    pub eps: f64,
    pub t: Option<f64>,
    pub value: f64,
    pub imag_residue: f64,
    pub limit_value: Option<f64>,
    pub quadrature_error: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_mix_matches_direct() {
        for &(a, b, t) in &[(2.0, 5.0, 0.7), (5.0, 2.0, 0.7), (3.0, 3.0, 1.0), (800.0, 1.0, 1.0), (0.0, 0.0, 2.0)] {
            let n = 200_000;
            let h = t / n as f64;
            let direct: f64 = (0..n).map(|i| {
                let s = (i as f64 + 0.5) * h;
                (-a * (t - s) - b * s).exp() * h
            }).sum();
            assert!((exp_mix_integral(a, b, t) - direct).abs() < 1e-8, "{a} {b}");
        }
        assert_eq!(exp_mix_integral(f64::INFINITY, 1.0, 1.0), 0.0);
    }

    #[test]
    fn tensor_indexing_and_rows() {
        let vals: Vec<C64> = (0..9).map(|i| C64::new(i as f64, 0.0)).collect();
        let t = ConstantTensor::new(ConstFamily::C0 { which: 1, bar: false }, None, 2, vals, 0.5, None, Provenance::LatticeSum { n: 3, truncated: false });
        assert_eq!(t.value(&[1, 2]), 5.0);
        let rows = t.rows(None);
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[5].indices, "2 3");
        assert_eq!(rows[5].family, "C01");
        assert_eq!(ConstFamily::C { k: 2, tilde: true, bar: true }.to_string(), "C2_tilde_bar");
    }

    #[test]
    fn dyadic_pair_weight_is_one_off_origin() {
        for k in [WaveVector::new(1, 0, 0), WaveVector::new(3, -2, 5), WaveVector::new(7, 7, 7)] {
            assert!((theta2(k, 6) - 1.0).abs() < 1e-14);
        }
    }
}
