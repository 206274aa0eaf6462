use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::{ModeLattice, WaveVector};
use crate::error::{LabError, Result};

pub type C64 = Complex64;

/// Fourier coefficients `f̂(k)` of a scalar field on the truncated lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarFourierField {
    lattice: ModeLattice,
    coeff: Vec<C64>,
}

impl ScalarFourierField {
    pub fn zeros(lattice: ModeLattice) -> Self {
        ScalarFourierField { lattice, coeff: vec![C64::new(0.0, 0.0); lattice.len()] }
    }

    pub fn from_coeffs(lattice: ModeLattice, coeff: Vec<C64>) -> Result<Self> {
        if coeff.len() != lattice.len() {
            return Err(LabError::SizeMismatch { expected: lattice.len(), got: coeff.len() });
        }
        Ok(ScalarFourierField { lattice, coeff })
    }

    pub fn from_fn(lattice: ModeLattice, mut f: impl FnMut(WaveVector) -> C64) -> Self {
        let coeff = (0..lattice.len()).map(|i| f(lattice.wave(i))).collect();
        ScalarFourierField { lattice, coeff }
    }

    /// The basis function `e_k`, coefficient one at `k`.
    pub fn basis(lattice: ModeLattice, k: WaveVector) -> Result<Self> {
        let idx = lattice
            .index(k)
            .ok_or_else(|| LabError::InvalidArgument(format!("{k:?} outside lattice")))?;
        let mut f = Self::zeros(lattice);
        f.coeff[idx] = C64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lattice
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeff
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeff
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeff
    }

    pub fn get(&self, k: WaveVector) -> C64 {
        self.lattice.index(k).map(|i| self.coeff[i]).unwrap_or_default()
    }

    pub fn set(&mut self, k: WaveVector, v: C64) -> Result<()> {
        let idx = self
            .lattice
            .index(k)
            .ok_or_else(|| LabError::InvalidArgument(format!("{k:?} outside lattice")))?;
        self.coeff[idx] = v;
        Ok(())
    }

    pub fn check_same_lattice(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(LabError::LatticeMismatch { left: self.lattice.n(), right: other.lattice.n() });
        }
        Ok(())
    }

    /// Largest `|f̂(-k) - conj f̂(k)|`.
    pub fn reality_defect(&self) -> f64 {
        (0..self.coeff.len())
            .map(|i| (self.coeff[self.lattice.neg_index(i)] - self.coeff[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.reality_defect() <= tol
    }

    /// Replace by the Hermitian-symmetric part, making the field exactly real.
    pub fn symmetrize_reality(&mut self) {
        let old = self.coeff.clone();
        for (i, c) in self.coeff.iter_mut().enumerate() {
            *c = 0.5 * (old[i] + old[self.lattice.neg_index(i)].conj());
        }
    }

    pub fn mean_mode(&self) -> C64 {
        self.coeff[self.lattice.zero_index()]
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { lattice: self.lattice, coeff: self.coeff.iter().map(|v| v * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { lattice: self.lattice, coeff: self.coeff.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_lattice(other)?;
        Ok(Self {
            lattice: self.lattice,
            coeff: self.coeff.iter().zip(&other.coeff).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_lattice(other)?;
        Ok(Self {
            lattice: self.lattice,
            coeff: self.coeff.iter().zip(&other.coeff).map(|(a, b)| a - b).collect(),
        })
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: C64, other: &Self) -> Result<()> {
        self.check_same_lattice(other)?;
        for (a, b) in self.coeff.iter_mut().zip(&other.coeff) {
            *a += c * b;
        }
        Ok(())
    }

    /// Pointwise Fourier multiplier.
    pub fn multiply(&self, mut m: impl FnMut(WaveVector) -> C64) -> Self {
        let lat = self.lattice;
        Self {
            lattice: lat,
            coeff: self.coeff.iter().enumerate().map(|(i, c)| c * m(lat.wave(i))).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeff.iter().zip(&other.coeff).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `Σ_k |f̂(k)|²`.
    pub fn l2_norm2(&self) -> f64 {
        self.coeff.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Copy into another lattice, dropping modes that do not fit.
    pub fn resample(&self, target: ModeLattice) -> Self {
        let mut out = Self::zeros(target);
        for (i, c) in self.coeff.iter().enumerate() {
            if let Some(j) = target.index(self.lattice.wave(i)) {
                out.coeff[j] = *c;
            }
        }
        out
    }
}

/// Three scalar components on one lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFourierField {
    pub comps: [ScalarFourierField; 3],
}

impl VectorFourierField {
    pub fn zeros(lattice: ModeLattice) -> Self {
        let z = ScalarFourierField::zeros(lattice);
        VectorFourierField { comps: [z.clone(), z.clone(), z] }
    }

    pub fn new(comps: [ScalarFourierField; 3]) -> Result<Self> {
        comps[0].check_same_lattice(&comps[1])?;
        comps[0].check_same_lattice(&comps[2])?;
        Ok(VectorFourierField { comps })
    }

    pub fn from_fn(lattice: ModeLattice, mut f: impl FnMut(WaveVector) -> [C64; 3]) -> Self {
        let mut out = Self::zeros(lattice);
        for i in 0..lattice.len() {
            let v = f(lattice.wave(i));
            for c in 0..3 {
                out.comps[c].coeffs_mut()[i] = v[c];
            }
        }
        out
    }

    pub fn lattice(&self) -> ModeLattice {
        self.comps[0].lattice()
    }

    pub fn at(&self, idx: usize) -> [C64; 3] {
        [self.comps[0].coeffs()[idx], self.comps[1].coeffs()[idx], self.comps[2].coeffs()[idx]]
    }

    pub fn set_at(&mut self, idx: usize, v: [C64; 3]) {
        for c in 0..3 {
            self.comps[c].coeffs_mut()[idx] = v[c];
        }
    }

    /// Largest `|Σ_j k_j f̂_j(k)|` over the lattice.
    pub fn divergence_defect(&self) -> f64 {
        let lat = self.lattice();
        (0..lat.len())
            .map(|i| {
                let k = lat.wave(i).as_f64();
                let v = self.at(i);
                (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn reality_defect(&self) -> f64 {
        self.comps.iter().map(|c| c.reality_defect()).fold(0.0, f64::max)
    }

    pub fn mean_defect(&self) -> f64 {
        self.comps.iter().map(|c| c.mean_mode().norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(VectorFourierField {
            comps: [self.comps[0].add(&o.comps[0])?, self.comps[1].add(&o.comps[1])?, self.comps[2].add(&o.comps[2])?],
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        Ok(VectorFourierField {
            comps: [self.comps[0].sub(&o.comps[0])?, self.comps[1].sub(&o.comps[1])?, self.comps[2].sub(&o.comps[2])?],
        })
    }

    pub fn scale_real(&self, c: f64) -> Self {
        VectorFourierField {
            comps: [self.comps[0].scale_real(c), self.comps[1].scale_real(c), self.comps[2].scale_real(c)],
        }
    }

    pub fn axpy(&mut self, c: f64, o: &Self) -> Result<()> {
        for i in 0..3 {
            self.comps[i].axpy(C64::new(c, 0.0), &o.comps[i])?;
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        (0..3).map(|i| self.comps[i].max_abs_diff(&o.comps[i])).fold(0.0, f64::max)
    }

    /// `Σ_k |v̂(k)|²`, equal to the L² norm squared on the torus.
    pub fn l2_norm2(&self) -> f64 {
        self.comps.iter().map(|c| c.l2_norm2()).sum()
    }

    pub fn resample(&self, target: ModeLattice) -> Self {
        VectorFourierField {
            comps: [self.comps[0].resample(target), self.comps[1].resample(target), self.comps[2].resample(target)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_makes_real() {
        let lat = ModeLattice::new(2).unwrap();
        let mut f = ScalarFourierField::from_fn(lat, |k| C64::new(k.0[0] as f64, (k.0[1] * 2 + k.0[2]) as f64));
        assert!(f.reality_defect() > 0.1);
        f.symmetrize_reality();
        assert!(f.reality_defect() < 1e-15);
    }
}
