//! Single lattice sums: C₀, the C/C̃ families and their barred versions, C₃₄,
//! and the ε → 0 limits by quadrature.

use serde::{Deserialize, Serialize};

use super::quad::ball_integral;
use super::{cutoff_saturated, support_sum, theta2, theta_j_max, var_factor, ConstFamily, ConstantTensor, ModeData, Provenance, Side, TWO_PI};
use crate::error::{LabError, Result};
use crate::schemes::{leray_symbol, Flavor, SchemeSpec};
use crate::torus_spectral::{ModeLattice, C64};

fn provenance(spec: &SchemeSpec, lattice: ModeLattice) -> Provenance {
    Provenance::LatticeSum { n: lattice.n(), truncated: !cutoff_saturated(spec, lattice) }
}

fn check_k(k: u8) -> Result<()> {
    if !(1..=4).contains(&k) {
        return Err(LabError::InvalidArgument(format!("constant family index must be 1..=4, got {k}")));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(LabError::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    Ok(())
}

fn pair_index(a: Flavor, b: Flavor) -> usize {
    match (a, b) {
        (Flavor::U, Flavor::U) => 0,
        (Flavor::B, Flavor::B) => 2,
        _ => 1,
    }
}

fn pair_weight(m: &ModeData, pair: usize) -> f64 {
    match pair {
        0 => m.hu * m.hu,
        1 => m.hu * m.hb,
        _ => m.hb * m.hb,
    }
}

/// Quadratic terms `(sign, first, second)` forcing the second level of `level`:
/// `u₁u₁ − b₁b₁` for u and `b₁u₁ − u₁b₁` for b.
pub fn forcing_terms(level: Flavor) -> [(f64, Flavor, Flavor); 2] {
    match level {
        Flavor::U => [(1.0, Flavor::U, Flavor::U), (-1.0, Flavor::B, Flavor::B)],
        Flavor::B => [(1.0, Flavor::B, Flavor::U), (-1.0, Flavor::U, Flavor::B)],
    }
}

/// Family k renormalizes `y₂ ⋄ Q₁`; returns (flavor of y₂, Q).
fn family_factors(k: u8) -> (Flavor, Flavor) {
    match k {
        1 => (Flavor::U, Flavor::U),
        2 => (Flavor::B, Flavor::B),
        3 => (Flavor::U, Flavor::B),
        _ => (Flavor::B, Flavor::U),
    }
}

/// The basic sums `K[hh']` (rank 3, `(i, i₁, j)`) and `K̃[hh']` (`(i, i₂, j)`) for the
/// pairs uu, ub, bb.
struct KSums {
    k: [Vec<C64>; 3],
    kt: [Vec<C64>; 3],
}

fn k_sums(side: Side, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> KSums {
    let norm = TWO_PI.powi(-3);
    let flat = support_sum(spec, side, lattice, 6 * 27, |m, acc| {
        let tau = var_factor(m.lam, t);
        if tau == 0.0 {
            return;
        }
        let base = tau / (2.0 * m.lam) * norm;
        let mut pw = [C64::default(); 3];
        for j in 0..3 {
            for l in 0..3 {
                pw[j] += m.w[l] * m.p[j][l];
            }
        }
        for pair in 0..3 {
            let c = base * pair_weight(m, pair);
            if c == 0.0 {
                continue;
            }
            // K at slot `pair`, K̃ at slot `3 + pair`
            let (k_acc, rest) = acc[pair * 27..].split_at_mut(27);
            let kt_acc = &mut rest[2 * 27..][..27];
            for i in 0..3 {
                for a in 0..3 {
                    for j in 0..3 {
                        k_acc[(i * 3 + a) * 3 + j] += pw[j] * (c * m.p[i][a]);
                        kt_acc[(i * 3 + a) * 3 + j] += m.w[a] * (c * m.p[i][j]);
                    }
                }
            }
        }
    });
    let part = |o: usize| flat[o * 27..(o + 1) * 27].to_vec();
    KSums { k: [part(0), part(1), part(2)], kt: [part(3), part(4), part(5)] }
}

/// All sixteen C/C̃ tensors of one side, derived from the forcing structure.
fn engine(side: Side, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Vec<ConstantTensor> {
    let sums = k_sums(side, t, spec, lattice);
    let prov = provenance(spec, lattice);
    let bar = side == Side::Cont;
    let mut out = Vec::with_capacity(16);
    for tilde in [false, true] {
        for k in 1..=4u8 {
            let (level, q) = family_factors(k);
            for flavor in [Flavor::U, Flavor::B] {
                let mut v = vec![C64::default(); 27];
                for (sign, first, second) in forcing_terms(level) {
                    // the factor paired with Q leaves the other one's flavor
                    let (paired, left) = if tilde { (first, second) } else { (second, first) };
                    if left != flavor {
                        continue;
                    }
                    let src = if tilde { &sums.kt } else { &sums.k };
                    for (o, s) in v.iter_mut().zip(&src[pair_index(paired, q)]) {
                        *o += s * (0.5 * sign);
                    }
                }
                out.push(ConstantTensor::new(ConstFamily::C { k, tilde, bar }, Some(flavor), 3, v, spec.eps, Some(t), prov.clone()));
            }
        }
    }
    out
}

fn pick(all: Vec<ConstantTensor>, k: u8, tilde: bool, flavor: Flavor) -> ConstantTensor {
    all.into_iter()
        .find(|c| matches!(c.family, ConstFamily::C { k: kk, tilde: tt, .. } if kk == k && tt == tilde) && c.flavor == Some(flavor))
        .expect("engine covers every family")
}

/// Every C_{k,·} and C̃_{k,·} (approximate side), or their barred versions.
pub fn ck_all(bar: bool, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<Vec<ConstantTensor>> {
    check_t(t)?;
    Ok(engine(if bar { Side::Cont } else { Side::Approx }, t, spec, lattice))
}

/// `C_{k,flavor}^{i i₁ j}(t)`.
pub fn const_ck(k: u8, flavor: Flavor, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<ConstantTensor> {
    check_k(k)?;
    Ok(pick(ck_all(false, t, spec, lattice)?, k, false, flavor))
}

/// `C̃_{k,flavor}^{i i₂ j}(t)`.
pub fn const_ck_tilde(k: u8, flavor: Flavor, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<ConstantTensor> {
    check_k(k)?;
    Ok(pick(ck_all(false, t, spec, lattice)?, k, true, flavor))
}

/// Barred (continuum) counterpart of `const_ck` / `const_ck_tilde`: `f ≡ 1`, `g ≡ i`.
pub fn bar_constant(k: u8, tilde: bool, flavor: Flavor, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<ConstantTensor> {
    check_k(k)?;
    Ok(pick(ck_all(true, t, spec, lattice)?, k, tilde, flavor))
}

/// Sign and h-pair of each family as tabulated against the two displayed C₂ sums.
fn literal_entry(k: u8, tilde: bool, flavor: Flavor) -> (f64, usize) {
    use Flavor::{B, U};
    let (uu, ub, bb) = (0, 1, 2);
    match (tilde, k, flavor) {
        (false, 1, U) | (false, 4, B) => (1.0, uu),
        (false, 1, B) | (false, 4, U) => (-1.0, ub),
        (false, 2, U) | (false, 3, B) => (-1.0, bb),
        (false, 2, B) | (false, 3, U) => (1.0, ub),
        (true, 1, U) => (1.0, uu),
        (true, 4, B) => (-1.0, uu),
        (true, 2, U) => (1.0, bb),
        (true, 3, B) => (-1.0, bb),
        (true, 1, B) | (true, 2, B) => (-1.0, ub),
        (true, 3, U) | (true, 4, U) => (1.0, ub),
        _ => unreachable!("k checked"),
    }
}

fn literal(k: u8, tilde: bool, flavor: Flavor, side: Side, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<ConstantTensor> {
    check_k(k)?;
    check_t(t)?;
    let (sign, pair) = literal_entry(k, tilde, flavor);
    let pref = sign * 0.5 * TWO_PI.powi(-3);
    let v = support_sum(spec, side, lattice, 27, |m, acc| {
        let c = var_factor(m.lam, t) * pair_weight(m, pair) / (2.0 * m.lam);
        if c == 0.0 {
            return;
        }
        let p = &m.p;
        for i in 0..3 {
            for x in 0..3 {
                for j in 0..3 {
                    let mut s = C64::default();
                    if tilde {
                        // x = i₂; sum over i₁, i₃ of P^{ii₁}P^{i₁i₃}P^{ji₃}
                        for i1 in 0..3 {
                            for i3 in 0..3 {
                                s += m.w[x] * (p[i][i1] * p[i1][i3] * p[j][i3]);
                            }
                        }
                    } else {
                        // x = i₁; sum over i₂, i₃ of k^{i₂}g P^{ii₁}P^{i₂i₃}P^{ji₃}
                        for i2 in 0..3 {
                            for i3 in 0..3 {
                                s += m.w[i2] * (p[i][x] * p[i2][i3] * p[j][i3]);
                            }
                        }
                    }
                    acc[(i * 3 + x) * 3 + j] += s * (c * pref);
                }
            }
        }
    });
    Ok(ConstantTensor::new(
        ConstFamily::C { k, tilde, bar: side == Side::Cont },
        Some(flavor),
        3,
        v,
        spec.eps,
        Some(t),
        provenance(spec, lattice),
    ))
}

/// `C_{k,flavor}` summed literally from the tabulated sign and weight.
pub fn const_ck_literal(k: u8, flavor: Flavor, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<ConstantTensor> {
    literal(k, false, flavor, Side::Approx, t, spec, lattice)
}

pub fn const_ck_tilde_literal(k: u8, flavor: Flavor, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<ConstantTensor> {
    literal(k, true, flavor, Side::Approx, t, spec, lattice)
}

/// Literal barred sum (`f ≡ 1`, `g ≡ i`).
pub fn bar_constant_literal(k: u8, tilde: bool, flavor: Flavor, t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<ConstantTensor> {
    literal(k, tilde, flavor, Side::Cont, t, spec, lattice)
}

/// `C₀₁` (uu), `C₀₂` (bb), `C₀₃` (ub) and the barred versions, indexed `(i, j)`.
/// Independent u and b noises make `C₀₃` vanish.
pub fn const_c0(which: u8, bar: bool, identified: bool, spec: &SchemeSpec, lattice: ModeLattice) -> Result<ConstantTensor> {
    let pair = match which {
        1 => 0,
        2 => 2,
        3 => 1,
        _ => return Err(LabError::InvalidArgument(format!("C0 index must be 1, 2 or 3, got {which}"))),
    };
    let side = if bar { Side::Cont } else { Side::Approx };
    let v = if pair == 1 && !identified {
        vec![C64::default(); 9]
    } else {
        let norm = TWO_PI.powi(-3);
        support_sum(spec, side, lattice, 9, |m, acc| {
            let c = pair_weight(m, pair) / (2.0 * m.lam) * norm;
            if c == 0.0 || !c.is_finite() {
                return;
            }
            for i in 0..3 {
                for j in 0..3 {
                    let s: f64 = (0..3).map(|i1| m.p[i][i1] * m.p[j][i1]).sum();
                    acc[i * 3 + j] += C64::new(c * s, 0.0);
                }
            }
        })
    };
    Ok(ConstantTensor::new(ConstFamily::C0 { which, bar }, None, 2, v, spec.eps, None, provenance(spec, lattice)))
}

/// `C₃₄^{i₁ i₂ j₀ j₁}(t)`.
pub fn const_c34(t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<ConstantTensor> {
    check_t(t)?;
    let norm = TWO_PI.powi(-3);
    let jm = theta_j_max(lattice);
    let v = support_sum(spec, Side::Approx, lattice, 81, |m, acc| {
        let c = theta2(m.k, jm) * var_factor(m.lam, t) * m.hb * m.hb / (2.0 * m.lam) * norm;
        if c == 0.0 {
            return;
        }
        for i1 in 0..3 {
            for i2 in 0..3 {
                for j0 in 0..3 {
                    for j1 in 0..3 {
                        let s: f64 = (0..3).map(|j2| m.p[j0][j2] * m.p[j1][j2]).sum::<f64>() * m.p[i1][i2];
                        acc[((i1 * 3 + i2) * 3 + j0) * 3 + j1] += m.w[j0] * (c * s);
                    }
                }
            }
        }
    });
    Ok(ConstantTensor::new(ConstFamily::C34, None, 4, v, spec.eps, Some(t), provenance(spec, lattice)))
}

/// Families with a closed-form ε → 0 limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitFamily {
    C2u,
    C2b,
    C2uTilde,
    C2bTilde,
}

impl LimitFamily {
    pub const ALL: [LimitFamily; 4] = [LimitFamily::C2u, LimitFamily::C2b, LimitFamily::C2uTilde, LimitFamily::C2bTilde];

    /// (tilde, flavor) of the lattice family it is the limit of.
    pub fn lattice_family(self) -> (bool, Flavor) {
        match self {
            LimitFamily::C2u => (false, Flavor::U),
            LimitFamily::C2b => (false, Flavor::B),
            LimitFamily::C2uTilde => (true, Flavor::U),
            LimitFamily::C2bTilde => (true, Flavor::B),
        }
    }

    fn sign_and_pair(self) -> (f64, usize) {
        match self {
            LimitFamily::C2u => (-1.0, 2),
            LimitFamily::C2b => (1.0, 1),
            LimitFamily::C2uTilde => (1.0, 2),
            LimitFamily::C2bTilde => (-1.0, 1),
        }
    }
}

/// The limit integrand at x (27 entries), without the spherical Jacobian.
fn limit_integrand(family: LimitFamily, spec: &SchemeSpec, x: [f64; 3]) -> Vec<f64> {
    let mut out = vec![0.0; 27];
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let hh = match family.sign_and_pair().1 {
        1 => spec.h(Flavor::U, x) * spec.h(Flavor::B, x),
        _ => spec.h(Flavor::B, x).powi(2),
    };
    if hh == 0.0 || r2 == 0.0 {
        return out;
    }
    let f = spec.f(x);
    if !f.is_finite() {
        return out;
    }
    let (a, b) = (spec.a, spec.b);
    let pref = family.sign_and_pair().0 * TWO_PI.powi(-3) / (8.0 * (a + b)) * hh / (r2 * r2 * f * f);
    // cos(ay) − cos(by) = −2 sin((a+b)y/2) sin((a−b)y/2)
    let d: [f64; 3] = x.map(|y| -2.0 * (0.5 * (a + b) * y).sin() * (0.5 * (a - b) * y).sin());
    let p = leray_symbol(x);
    let tilde = family.lattice_family().0;
    for i in 0..3 {
        for m in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                if tilde {
                    for i1 in 0..3 {
                        for i3 in 0..3 {
                            s += p[i][i1] * p[i1][i3] * p[j][i3];
                        }
                    }
                    s *= d[m];
                } else {
                    for i2 in 0..3 {
                        for i3 in 0..3 {
                            s += d[i2] * p[i][m] * p[i2][i3] * p[j][i3];
                        }
                    }
                }
                out[(i * 3 + m) * 3 + j] = pref * s;
            }
        }
    }
    out
}

/// ε → 0 limit of a C₂-type family by adaptive quadrature over the support ball of h.
pub fn const_limit_quadrature(family: LimitFamily, spec: &SchemeSpec, rel_tol: f64) -> Result<ConstantTensor> {
    let q = ball_integral(|x| limit_integrand(family, spec, x), spec.h_support(), rel_tol, 1e-14)?;
    let scale = q.value.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let target = (rel_tol * scale).max(1e-13);
    if q.error > target {
        return Err(LabError::Quadrature { estimate: q.error, tolerance: target });
    }
    let (tilde, flavor) = family.lattice_family();
    Ok(ConstantTensor::new(
        ConstFamily::C { k: 2, tilde, bar: false },
        Some(flavor),
        3,
        q.value.into_iter().map(|v| C64::new(v, 0.0)).collect(),
        0.0,
        None,
        Provenance::Quadrature { tolerance: rel_tol, error: q.error },
    ))
}

/// `max |x|²·|integrand|` over sampled directions on each sphere `|x| = r`.
pub fn limit_shell_bound(family: LimitFamily, spec: &SchemeSpec, radii: &[f64]) -> Vec<(f64, f64)> {
    let dirs = 256;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    radii
        .iter()
        .map(|&r| {
            let mut best = 0.0f64;
            for n in 0..dirs {
                let z = 1.0 - 2.0 * (n as f64 + 0.5) / dirs as f64;
                let rho = (1.0 - z * z).sqrt();
                let ph = golden * n as f64;
                let x = [r * rho * ph.cos(), r * rho * ph.sin(), r * z];
                let m = limit_integrand(family, spec, x).iter().map(|v| v.abs()).fold(0.0, f64::max);
                best = best.max(r * r * m);
            }
            (r, best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SchemeSpec, ModeLattice) {
        let spec = SchemeSpec::finite_difference(0.5).with_ab(1.0, 0.0).unwrap();
        (spec, ModeLattice::new(6).unwrap())
    }

    #[test]
    fn engine_reproduces_literal_table() {
        let (spec, lat) = setup();
        let approx = ck_all(false, 0.7, &spec, lat).unwrap();
        for c in &approx {
            let ConstFamily::C { k, tilde, .. } = c.family else { unreachable!() };
            let lit = literal(k, tilde, c.flavor.unwrap(), Side::Approx, 0.7, &spec, lat).unwrap();
            assert!(c.max_abs_diff(&lit) < 1e-13, "{} {:?}", c.family, c.flavor);
            assert!(c.imag_residue() < 1e-12);
        }
        assert!(approx.iter().any(|c| c.max_abs() > 1e-4));
    }

    #[test]
    fn relations_between_families() {
        let (spec, lat) = setup();
        let t = 0.5;
        let c = |k, f| const_ck(k, f, t, &spec, lat).unwrap();
        let ct = |k, f| const_ck_tilde(k, f, t, &spec, lat).unwrap();
        use Flavor::{B, U};
        assert!(c(1, U).max_abs_diff(&c(4, B)) < 1e-12);
        assert!(c(1, B).max_abs_diff(&c(4, U)) < 1e-12);
        assert!(c(2, U).max_abs_diff(&c(3, B)) < 1e-12);
        assert!(c(3, U).max_abs_diff(&c(2, B)) < 1e-12);
        assert!(ct(1, U).max_abs_diff(&ct(4, B).scaled(-1.0)) < 1e-12);
        assert!(ct(2, U).max_abs_diff(&ct(3, B).scaled(-1.0)) < 1e-12);
        assert!(ct(1, B).max_abs_diff(&ct(2, B)) < 1e-12);
        assert!(ct(2, B).max_abs_diff(&ct(3, U).scaled(-1.0)) < 1e-12);
        assert!(ct(3, U).max_abs_diff(&ct(4, U)) < 1e-12);
        assert!(c(2, U).max_abs() > 1e-4);
    }

    #[test]
    fn bars_vanish_and_t_zero() {
        let (spec, lat) = setup();
        for c in ck_all(true, 1.0, &spec, lat).unwrap() {
            assert!(c.max_abs() < 1e-12, "{}", c.family);
        }
        for c in ck_all(false, 0.0, &spec, lat).unwrap() {
            assert_eq!(c.max_abs(), 0.0);
        }
        assert_eq!(const_c34(0.0, &spec, lat).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn symmetric_scheme_kills_every_family() {
        let spec = SchemeSpec::finite_difference(0.5);
        let lat = ModeLattice::new(6).unwrap();
        for c in ck_all(false, 1.0, &spec, lat).unwrap() {
            assert!(c.max_abs() < 1e-12);
        }
    }

    #[test]
    fn c0_structure() {
        let (spec, lat) = setup();
        let c = const_c0(1, false, true, &spec, lat).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(c.value(&[i, j]).abs() < 1e-12);
                }
            }
        }
        assert!(c.value(&[0, 0]) > 0.0);
        assert_eq!(const_c0(3, false, false, &spec, lat).unwrap().max_abs(), 0.0);
        assert!(matches!(c.provenance, Provenance::LatticeSum { truncated: false, .. }));
        let small = const_c0(1, false, true, &spec, ModeLattice::new(3).unwrap()).unwrap();
        assert!(matches!(small.provenance, Provenance::LatticeSum { truncated: true, .. }));
    }

    #[test]
    fn saturation_invariance() {
        let (spec, lat) = setup();
        let a = const_ck(2, Flavor::U, 1.0, &spec, lat).unwrap();
        let b = const_ck(2, Flavor::U, 1.0, &spec, ModeLattice::new(8).unwrap()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn c34_starts_at_zero_and_saturates() {
        let (spec, lat) = setup();
        assert_eq!(const_c34(0.0, &spec, lat).unwrap().max_abs(), 0.0);
        let mid = const_c34(0.5, &spec, lat).unwrap();
        assert!(mid.imag_residue() < 1e-10 && mid.max_abs() > 0.0);
        let a = const_c34(40.0, &spec, lat).unwrap();
        let b = const_c34(80.0, &spec, lat).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14 * a.max_abs());
    }

    #[test]
    fn limit_vanishes_for_symmetric_scheme_and_is_shell_bounded() {
        let spec = SchemeSpec::finite_difference(0.1);
        let q = const_limit_quadrature(LimitFamily::C2u, &spec, 1e-6).unwrap();
        assert!(q.max_abs() < 1e-14);
        let spec = spec.with_ab(1.0, 0.0).unwrap();
        let shells = limit_shell_bound(LimitFamily::C2u, &spec, &[1e-1, 1e-2, 1e-3, 1e-4]);
        let hi = shells.iter().map(|s| s.1).fold(0.0, f64::max);
        let lo = shells.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        assert!(hi.is_finite() && hi < 2.0 * lo);
    }
}
