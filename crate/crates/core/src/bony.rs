//! Bony paraproducts, the resonant product and the commutator.
//!
//! All block products are formed on the collocation grid without dealiasing, so
//! `π_< + π_> + π_0` reproduces the grid product exactly.

use crate::error::{LabError, Result};
use crate::schemes::leray_symbol;
use crate::torus_spectral::{BesovEvaluator, DyadicPartition, ModeLattice, ScalarFourierField, SpectralGrid, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct BonyTriple {
    pub lt: ScalarFourierField,
    pub gt: ScalarFourierField,
    pub res: ScalarFourierField,
}

impl BonyTriple {
    pub fn sum(&self) -> ScalarFourierField {
        self.lt.add(&self.gt).and_then(|s| s.add(&self.res)).expect("same lattice")
    }
}

/// Partition and grid shared by all decompositions on one lattice.
#[derive(Clone, Debug)]
pub struct Bony {
    partition: DyadicPartition,
    grid: SpectralGrid,
}

impl Bony {
    pub fn new(lattice: ModeLattice) -> Self {
        Bony { partition: DyadicPartition::new(lattice), grid: SpectralGrid::new(lattice) }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.grid.lattice()
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    fn check(&self, f: &ScalarFourierField) -> Result<()> {
        if f.lattice() != self.lattice() {
            return Err(LabError::LatticeMismatch { left: self.lattice().n(), right: f.lattice().n() });
        }
        Ok(())
    }

    /// Physical-space samples of Δ_j f for j = −1..=jMax.
    fn block_samples(&self, f: &ScalarFourierField) -> Result<Vec<Vec<C64>>> {
        self.partition.blocks().map(|j| self.grid.inverse(&self.partition.lp_block(f, j)?)).collect()
    }

    /// `Σ_j S_{j−1} a Δ_j b` from block samples (index 0 holds j = −1).
    fn low_high(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<C64> {
        let len = a[0].len();
        let mut acc = vec![C64::default(); len];
        let mut low = vec![C64::default(); len];
        // pairs block j of b with S_{j−1} a = Σ_{i <= j−2} Δ_i a
        for jj in 0..a.len() {
            if jj >= 2 {
                for (l, x) in low.iter_mut().zip(&a[jj - 2]) {
                    *l += x;
                }
                for ((s, l), y) in acc.iter_mut().zip(&low).zip(&b[jj]) {
                    *s += l * y;
                }
            }
        }
        acc
    }

    fn resonant(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<C64> {
        let nb = a.len();
        let mut acc = vec![C64::default(); a[0].len()];
        for i in 0..nb {
            for j in i.saturating_sub(1)..(i + 2).min(nb) {
                for ((s, x), y) in acc.iter_mut().zip(&a[i]).zip(&b[j]) {
                    *s += x * y;
                }
            }
        }
        acc
    }

    pub fn decompose(&self, u: &ScalarFourierField, f: &ScalarFourierField) -> Result<BonyTriple> {
        self.check(u)?;
        self.check(f)?;
        let ub = self.block_samples(u)?;
        let fb = self.block_samples(f)?;
        Ok(BonyTriple {
            lt: self.grid.forward(&Self::low_high(&ub, &fb))?,
            gt: self.grid.forward(&Self::low_high(&fb, &ub))?,
            res: self.grid.forward(&Self::resonant(&ub, &fb))?,
        })
    }

    pub fn para_lt(&self, u: &ScalarFourierField, f: &ScalarFourierField) -> Result<ScalarFourierField> {
        self.check(u)?;
        self.check(f)?;
        self.grid.forward(&Self::low_high(&self.block_samples(u)?, &self.block_samples(f)?))
    }

    pub fn resonant_product(&self, u: &ScalarFourierField, f: &ScalarFourierField) -> Result<ScalarFourierField> {
        self.check(u)?;
        self.check(f)?;
        self.grid.forward(&Self::resonant(&self.block_samples(u)?, &self.block_samples(f)?))
    }

    pub fn product(&self, u: &ScalarFourierField, f: &ScalarFourierField) -> Result<ScalarFourierField> {
        self.grid.product(u, f)
    }

    /// `C(f, g, h) = π_0(π_<(f, g), h) − f π_0(g, h)`.
    pub fn commutator(
        &self,
        f: &ScalarFourierField,
        g: &ScalarFourierField,
        h: &ScalarFourierField,
    ) -> Result<ScalarFourierField> {
        let first = self.resonant_product(&self.para_lt(f, g)?, h)?;
        let second = self.product(f, &self.resonant_product(g, h)?)?;
        first.sub(&second)
    }

    /// `𝒫^{kl} π_<(f, g) − π_<(f, 𝒫^{kl} g)` for zero-based k, l.
    pub fn leray_para_commutator(
        &self,
        f: &ScalarFourierField,
        g: &ScalarFourierField,
        k: usize,
        l: usize,
    ) -> Result<ScalarFourierField> {
        let p = |x: &ScalarFourierField| x.multiply(|w| C64::new(leray_symbol(w.as_f64())[k][l], 0.0));
        p(&self.para_lt(f, g)?).sub(&self.para_lt(f, &p(g))?)
    }
}

pub fn bony_decompose(u: &ScalarFourierField, f: &ScalarFourierField) -> Result<BonyTriple> {
    u.check_same_lattice(f)?;
    Bony::new(u.lattice()).decompose(u, f)
}

pub fn commutator(f: &ScalarFourierField, g: &ScalarFourierField, h: &ScalarFourierField) -> Result<ScalarFourierField> {
    f.check_same_lattice(g)?;
    f.check_same_lattice(h)?;
    Bony::new(f.lattice()).commutator(f, g, h)
}

/// Empirical constants of the three paraproduct estimates:
/// `‖π_<(u,f)‖_{C^β} / (‖u‖_{L^∞}‖f‖_{C^β})`,
/// `‖π_>(u,f)‖_{C^{α+β}} / (‖u‖_{C^α}‖f‖_{C^β})`,
/// `‖π_0(u,f)‖_{C^{α+β}} / (‖u‖_{C^α}‖f‖_{C^β})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParaRatios {
    pub lt: f64,
    pub gt: f64,
    pub res: f64,
}

pub fn para_estimate_ratio(u: &ScalarFourierField, f: &ScalarFourierField, alpha: f64, beta: f64) -> Result<ParaRatios> {
    if alpha + beta <= 0.0 {
        return Err(LabError::InvalidArgument(format!("resonant estimate needs α + β > 0, got {}", alpha + beta)));
    }
    u.check_same_lattice(f)?;
    let lat = u.lattice();
    let bony = Bony::new(lat);
    let ev = BesovEvaluator::new(lat);
    let parts = bony.decompose(u, f)?;
    let u_inf = crate::torus_spectral::grid_lp_norm(&bony.grid().inverse(u)?, 1.0, f64::INFINITY);
    let u_a = ev.holder_norm(u, alpha)?;
    let f_b = ev.holder_norm(f, beta)?;
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    Ok(ParaRatios {
        lt: ratio(ev.holder_norm(&parts.lt, beta)?, u_inf * f_b),
        gt: ratio(ev.holder_norm(&parts.gt, alpha + beta)?, u_a * f_b),
        res: ratio(ev.holder_norm(&parts.res, alpha + beta)?, u_a * f_b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_spectral::{block_weight, WaveVector};
    use std::f64::consts::PI;

    #[test]
    fn zero_input() {
        let lat = ModeLattice::new(3).unwrap();
        let z = ScalarFourierField::zeros(lat);
        let f = ScalarFourierField::from_fn(lat, |k| C64::new(k.0[0] as f64, 0.0));
        let t = bony_decompose(&z, &f).unwrap();
        assert_eq!(t.lt.max_abs() + t.gt.max_abs() + t.res.max_abs(), 0.0);
        assert_eq!(para_estimate_ratio(&z, &z, 0.5, 0.5).unwrap(), ParaRatios { lt: 0.0, gt: 0.0, res: 0.0 });
    }

    #[test]
    fn basis_ratio_closed_form() {
        let lat = ModeLattice::new(8).unwrap();
        let (k1, k2) = (WaveVector::new(1, 0, 0), WaveVector::new(6, 0, 0));
        let u = ScalarFourierField::basis(lat, k1).unwrap();
        let f = ScalarFourierField::basis(lat, k2).unwrap();
        let (alpha, beta) = (0.4, 0.3);
        let r = para_estimate_ratio(&u, &f, alpha, beta).unwrap();
        let jmax = crate::torus_spectral::j_max_for(lat);
        let c0 = (2.0 * PI).powf(-1.5);
        // π_<(e_k1, e_k2) = c0 Σ_j S_{j−1}(|k1|) ρ_j(|k2|) e_{k1+k2}
        let mut c = 0.0;
        for j in -1..=jmax {
            let s: f64 = (-1..j - 1).map(|i| block_weight(i, 1.0)).sum();
            c += s * block_weight(j, 6.0);
        }
        let holder_of = |r: f64, a: f64| (-1..=jmax).map(|j| (2.0f64).powf(j as f64 * a) * block_weight(j, r)).fold(0.0, f64::max) * c0;
        let expect = c * c0 * holder_of(7.0, beta) / (c0 * holder_of(6.0, beta));
        assert!(c > 0.5);
        assert!((r.lt - expect).abs() < 1e-12 * expect, "{} vs {}", r.lt, expect);
        // a single mode has only adjacent blocks, so its self-paraproduct vanishes
        let t = bony_decompose(&f, &f).unwrap();
        assert!(t.lt.max_abs() < 1e-15 && t.gt.max_abs() < 1e-15);
    }
}
