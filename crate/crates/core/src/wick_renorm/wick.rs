//! Wick polynomials of at most four jointly Gaussian variables.
//!
//! Covariances are bilinear, `E[ξ_a ξ_b]`, with no conjugation. A Fourier mode
//! variable at `−k` is the conjugate of the one at `k`, so the conjugated
//! covariances of the linear level enter through `k' = −k` pairs.

use crate::error::{LabError, Result};
use crate::fields::{covariance_closed_form, CovKind, Family, Mat3, Pair};
use crate::schemes::{Flavor, SchemeSpec};
use crate::torus_spectral::{WaveVector, C64};

pub trait CovOracle {
    /// `E[ξ_a ξ_b]`.
    fn cov(&self, a: usize, b: usize) -> C64;
}

/// Covariance given as an explicit matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixCov {
    pub m: Vec<Vec<C64>>,
}

impl MatrixCov {
    pub fn real(m: Vec<Vec<f64>>) -> Self {
        MatrixCov { m: m.into_iter().map(|r| r.into_iter().map(|x| C64::new(x, 0.0)).collect()).collect() }
    }
}

impl CovOracle for MatrixCov {
    fn cov(&self, a: usize, b: usize) -> C64 {
        self.m[a][b]
    }
}

/// `:ξ_{v₁} ⋯ ξ_{vₙ}:` for `n <= 4`; entries index into a variable list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WickProduct {
    vars: Vec<usize>,
}

impl WickProduct {
    pub fn new(vars: Vec<usize>) -> Result<Self> {
        if vars.is_empty() || vars.len() > 4 {
            return Err(LabError::InvalidArgument(format!("Wick products take 1 to 4 factors, got {}", vars.len())));
        }
        Ok(WickProduct { vars })
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Value on one sample: the sum over partial matchings `M` of
    /// `(−1)^{|M|} Π_{(a,b)∈M} E[ξ_aξ_b] Π_{unmatched} ξ`.
    pub fn eval(&self, sample: &[C64], cov: &dyn CovOracle) -> C64 {
        fn rec(rest: &[usize], sample: &[C64], cov: &dyn CovOracle) -> C64 {
            let Some((&first, tail)) = rest.split_first() else {
                return C64::new(1.0, 0.0);
            };
            // `first` stays a factor
            let mut acc = sample[first] * rec(tail, sample, cov);
            // or `first` is matched with one of the others
            for (p, &other) in tail.iter().enumerate() {
                let mut remaining: Vec<usize> = tail.to_vec();
                remaining.remove(p);
                acc -= cov.cov(first, other) * rec(&remaining, sample, cov);
            }
            acc
        }
        rec(&self.vars, sample, cov)
    }

    /// `E[:ξ…: :η…:]`: the sum over bijections between the two factor lists of the
    /// products of cross covariances; 0 when the lengths differ.
    pub fn pairing_expectation(&self, other: &WickProduct, cov: &dyn CovOracle) -> C64 {
        if self.len() != other.len() {
            return C64::default();
        }
        let n = self.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = C64::default();
        permutations(&mut perm, 0, &mut |p| {
            let mut term = C64::new(1.0, 0.0);
            for (i, &j) in p.iter().enumerate() {
                term *= cov.cov(self.vars[i], other.vars[j]);
            }
            total += term;
        });
        total
    }

    /// Same expectation by Isserlis' theorem over all perfect matchings of the
    /// concatenated list, dropping matchings that pair two factors of one product.
    pub fn isserlis_expectation(&self, other: &WickProduct, cov: &dyn CovOracle) -> C64 {
        let labelled: Vec<(usize, u8)> = self.vars.iter().map(|&v| (v, 0u8)).chain(other.vars.iter().map(|&v| (v, 1u8))).collect();
        fn rec(rest: &[(usize, u8)], cov: &dyn CovOracle) -> C64 {
            let Some((&(a, ga), tail)) = rest.split_first() else {
                return C64::new(1.0, 0.0);
            };
            let mut acc = C64::default();
            for (p, &(b, gb)) in tail.iter().enumerate() {
                if ga == gb {
                    continue;
                }
                let mut remaining = tail.to_vec();
                remaining.remove(p);
                acc += cov.cov(a, b) * rec(&remaining, cov);
            }
            acc
        }
        if labelled.len() % 2 == 1 {
            return C64::default();
        }
        rec(&labelled, cov)
    }
}

fn permutations(p: &mut Vec<usize>, start: usize, visit: &mut dyn FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permutations(p, start + 1, visit);
        p.swap(start, i);
    }
}

/// One scalar Fourier coefficient of the linear level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeVar {
    pub family: Family,
    pub k: WaveVector,
    pub component: usize,
    pub t: f64,
}

/// `E[X_a(k) conj X_b(k)]` for any two of the four families, from the closed forms.
pub fn family_covariance(scheme: &SchemeSpec, identified: bool, a: Family, b: Family, k: WaveVector, ta: f64, tb: f64) -> Result<Mat3> {
    let flavor = |f: Family| match f {
        Family::Approx(x) | Family::Cont(x) => x,
    };
    let pair = match (flavor(a), flavor(b)) {
        (Flavor::U, Flavor::U) => Pair::Uu,
        (Flavor::B, Flavor::B) => Pair::Bb,
        _ => Pair::Ub,
    };
    // every closed form is a real multiple of the symmetric P̂, so swapping the
    // factors only swaps the times
    match (a, b) {
        (Family::Approx(_), Family::Approx(_)) => covariance_closed_form(scheme, identified, k, ta, tb, pair, CovKind::Approx),
        (Family::Cont(_), Family::Cont(_)) => covariance_closed_form(scheme, identified, k, ta, tb, pair, CovKind::Cont),
        (Family::Approx(_), Family::Cont(_)) => covariance_closed_form(scheme, identified, k, ta, tb, pair, CovKind::Cross),
        (Family::Cont(_), Family::Approx(_)) => covariance_closed_form(scheme, identified, k, tb, ta, pair, CovKind::Cross),
    }
}

/// Covariance oracle over a fixed list of mode variables.
#[derive(Clone, Debug)]
pub struct FieldCovOracle {
    pub scheme: SchemeSpec,
    pub identified: bool,
    pub vars: Vec<ModeVar>,
}

impl CovOracle for FieldCovOracle {
    fn cov(&self, a: usize, b: usize) -> C64 {
        let (x, y) = (self.vars[a], self.vars[b]);
        if x.k.is_zero() || x.k != -y.k {
            return C64::default();
        }
        family_covariance(&self.scheme, self.identified, x.family, y.family, x.k, x.t, y.t).expect("nonzero mode")[x.component][y.component]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn correlated() -> (MatrixCov, [[f64; 4]; 4]) {
        // L Lᵀ with a fixed lower-triangular L
        let l = [[1.0, 0.0, 0.0, 0.0], [0.5, 0.8, 0.0, 0.0], [-0.3, 0.2, 0.9, 0.0], [0.1, -0.4, 0.3, 0.7]];
        let mut c = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                c[i][j] = (0..4).map(|m| l[i][m] * l[j][m]).sum();
            }
        }
        (MatrixCov::real(c), l)
    }

    fn draw(l: &[[f64; 4]; 4], rng: &mut ChaCha8Rng) -> Vec<C64> {
        let z: Vec<f64> = (0..4).map(|_| StandardNormal.sample(rng)).collect();
        (0..4).map(|i| C64::new((0..4).map(|m| l[i][m] * z[m]).sum(), 0.0)).collect()
    }

    #[test]
    fn square_of_standard_normal() {
        let cov = MatrixCov::real(vec![vec![1.0]]);
        let w = WickProduct::new(vec![0, 0]).unwrap();
        assert_eq!(w.eval(&[C64::new(3.0, 0.0)], &cov), C64::new(8.0, 0.0));
        let w4 = WickProduct::new(vec![0, 0, 0, 0]).unwrap();
        // He₄(x) = x⁴ − 6x² + 3
        assert!((w4.eval(&[C64::new(2.0, 0.0)], &cov).re - (16.0 - 24.0 + 3.0)).abs() < 1e-12);
        assert!(WickProduct::new(vec![0; 5]).is_err());
    }

    #[test]
    fn pairing_routes_agree() {
        let (cov, _) = correlated();
        for n in 1..=4 {
            let a = WickProduct::new((0..n).collect()).unwrap();
            let b = WickProduct::new((0..n).rev().collect()).unwrap();
            let x = a.pairing_expectation(&b, &cov);
            let y = a.isserlis_expectation(&b, &cov);
            assert!((x - y).norm() < 1e-12, "n={n}");
        }
        let a = WickProduct::new(vec![0, 1]).unwrap();
        let b = WickProduct::new(vec![2, 3]).unwrap();
        let c = |i, j| cov.cov(i, j);
        assert!((a.pairing_expectation(&b, &cov) - (c(0, 2) * c(1, 3) + c(0, 3) * c(1, 2))).norm() < 1e-14);
    }

    #[test]
    fn monte_carlo_mean_zero_and_pairing() {
        let (cov, l) = correlated();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = WickProduct::new(vec![0, 1]).unwrap();
        let b = WickProduct::new(vec![2, 3]).unwrap();
        let n = 100_000;
        let (mut s1, mut s1sq, mut s2, mut s2sq) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = draw(&l, &mut rng);
            let va = a.eval(&x, &cov).re;
            let p = va * b.eval(&x, &cov).re;
            s1 += va;
            s1sq += va * va;
            s2 += p;
            s2sq += p * p;
        }
        let nf = n as f64;
        let (m1, m2) = (s1 / nf, s2 / nf);
        let se1 = ((s1sq / nf - m1 * m1) / nf).sqrt();
        let se2 = ((s2sq / nf - m2 * m2) / nf).sqrt();
        assert!(m1.abs() < 3.0 * se1, "{m1} {se1}");
        let exact = a.pairing_expectation(&b, &cov).re;
        assert!((m2 - exact).abs() < 3.0 * se2, "{m2} {exact} {se2}");
    }

    #[test]
    fn field_oracle_is_hermitian() {
        let scheme = SchemeSpec::finite_difference(0.25);
        let k = WaveVector::new(1, 2, 0);
        let vars = vec![
            ModeVar { family: Family::Approx(Flavor::U), k, component: 0, t: 0.3 },
            ModeVar { family: Family::Cont(Flavor::B), k: -k, component: 1, t: 0.1 },
            ModeVar { family: Family::Approx(Flavor::U), k: -k, component: 0, t: 0.3 },
            ModeVar { family: Family::Cont(Flavor::B), k, component: 1, t: 0.1 },
        ];
        let o = FieldCovOracle { scheme, identified: true, vars };
        // E[ξ conj η] = conj E[η conj ξ] with conj ξ(k) = ξ(−k)
        assert!((o.cov(0, 1) - o.cov(3, 2).conj()).norm() < 1e-15);
        assert!(o.cov(0, 1).norm() > 0.0);
        assert_eq!(o.cov(0, 3), C64::default());
    }
}
