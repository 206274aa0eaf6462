use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::field::{ScalarFourierField, C64};
use super::lattice::ModeLattice;
use crate::error::{LabError, Result};

/// Uniform `(2N+1)³` collocation grid `x_n = 2πn/M` with planned transforms.
///
/// `f̂(k) = (2π)^{-3/2} (2π/M)³ Σ_n f(x_n) e^{-ik·x_n}` and
/// `f(x) = (2π)^{-3/2} Σ_k f̂(k) e^{ik·x}`.
#[derive(Clone)]
pub struct SpectralGrid {
    lattice: ModeLattice,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid").field("lattice", &self.lattice).finish()
    }
}

impl SpectralGrid {
    pub fn new(lattice: ModeLattice) -> Self {
        let mut planner = FftPlanner::new();
        let m = lattice.side();
        SpectralGrid { lattice, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lattice
    }

    /// Volume of one grid cell, `(2π/M)³`.
    pub fn cell_volume(&self) -> f64 {
        (2.0 * PI / self.lattice.side() as f64).powi(3)
    }

    /// Physical coordinates of grid point `idx` (row-major, last axis fastest).
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.lattice.side();
        let h = 2.0 * PI / m as f64;
        [(idx / (m * m)) as f64 * h, ((idx / m) % m) as f64 * h, (idx % m) as f64 * h]
    }

    fn transform(&self, data: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.lattice.side();
        let mut scratch = vec![C64::default(); fft.get_inplace_scratch_len()];
        // last axis: contiguous lines
        fft.process_with_scratch(data, &mut scratch);
        // middle and first axes: gather lines into a contiguous buffer
        let mut buf = vec![C64::default(); data.len()];
        for axis in [1usize, 0] {
            let stride = if axis == 1 { m } else { m * m };
            let mut line = 0;
            for a in 0..m {
                for b in 0..m {
                    let base = if axis == 1 { a * m * m + b } else { a * m + b };
                    for t in 0..m {
                        buf[line * m + t] = data[base + t * stride];
                    }
                    line += 1;
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            let mut line = 0;
            for a in 0..m {
                for b in 0..m {
                    let base = if axis == 1 { a * m * m + b } else { a * m + b };
                    for t in 0..m {
                        data[base + t * stride] = buf[line * m + t];
                    }
                    line += 1;
                }
            }
        }
    }

    /// `dft_forward`: grid samples to Fourier coefficients.
    pub fn forward(&self, samples: &[C64]) -> Result<ScalarFourierField> {
        if samples.len() != self.lattice.len() {
            return Err(LabError::SizeMismatch { expected: self.lattice.len(), got: samples.len() });
        }
        let mut data = samples.to_vec();
        self.transform(&mut data, &self.forward);
        let m = self.lattice.side() as f64;
        let c = (2.0 * PI).powf(1.5) / (m * m * m);
        for v in data.iter_mut() {
            *v *= c;
        }
        ScalarFourierField::from_coeffs(self.lattice, data)
    }

    pub fn forward_real(&self, samples: &[f64]) -> Result<ScalarFourierField> {
        let z: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.forward(&z)
    }

    /// `dft_inverse`: Fourier coefficients to grid samples.
    pub fn inverse(&self, field: &ScalarFourierField) -> Result<Vec<C64>> {
        if field.lattice() != self.lattice {
            return Err(LabError::LatticeMismatch { left: self.lattice.n(), right: field.lattice().n() });
        }
        let mut data = field.coeffs().to_vec();
        self.transform(&mut data, &self.inverse);
        let c = (2.0 * PI).powf(-1.5);
        for v in data.iter_mut() {
            *v *= c;
        }
        Ok(data)
    }

    /// Pointwise product formed on the grid, aliased back onto the lattice.
    pub fn product(&self, a: &ScalarFourierField, b: &ScalarFourierField) -> Result<ScalarFourierField> {
        let ga = self.inverse(a)?;
        let gb = self.inverse(b)?;
        let p: Vec<C64> = ga.iter().zip(&gb).map(|(x, y)| x * y).collect();
        self.forward(&p)
    }
}

/// Free-standing forward transform.
pub fn dft_forward(lattice: ModeLattice, samples: &[C64]) -> Result<ScalarFourierField> {
    SpectralGrid::new(lattice).forward(samples)
}

/// Free-standing inverse transform.
pub fn dft_inverse(field: &ScalarFourierField) -> Result<Vec<C64>> {
    SpectralGrid::new(field.lattice()).inverse(field)
}

/// Product without aliasing onto the retained modes: both factors are embedded
/// in a lattice with `M' >= 3N + 1` points, multiplied there and truncated back.
#[derive(Clone, Debug)]
pub struct PaddedProduct {
    base: ModeLattice,
    grid: SpectralGrid,
}

impl PaddedProduct {
    pub fn new(base: ModeLattice) -> Self {
        let n = base.n();
        let padded = ModeLattice::new((3 * n).div_ceil(2)).expect("padded lattice");
        PaddedProduct { base, grid: SpectralGrid::new(padded) }
    }

    pub fn product(&self, a: &ScalarFourierField, b: &ScalarFourierField) -> Result<ScalarFourierField> {
        let pa = a.resample(self.grid.lattice());
        let pb = b.resample(self.grid.lattice());
        Ok(self.grid.product(&pa, &pb)?.resample(self.base))
    }
}

#[cfg(test)]
mod tests {
    use super::super::lattice::WaveVector;
    use super::*;

    /// Literal O(M⁶) transform used as an oracle.
    fn naive_forward(lat: ModeLattice, samples: &[C64]) -> Vec<C64> {
        let grid = SpectralGrid::new(lat);
        let h = grid.cell_volume();
        (0..lat.len())
            .map(|i| {
                let k = lat.wave(i).as_f64();
                let mut s = C64::default();
                for (n, v) in samples.iter().enumerate() {
                    let x = grid.point(n);
                    let ph = -(k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
                    s += v * C64::new(ph.cos(), ph.sin());
                }
                s * h * (2.0 * PI).powf(-1.5)
            })
            .collect()
    }

    #[test]
    fn basis_function_and_constant() {
        let lat = ModeLattice::new(3).unwrap();
        let grid = SpectralGrid::new(lat);
        let c0 = (2.0 * PI).powf(-1.5);
        let samples: Vec<C64> = (0..lat.len())
            .map(|n| {
                let x = grid.point(n);
                C64::new(x[0].cos(), x[0].sin()) * c0
            })
            .collect();
        let f = grid.forward(&samples).unwrap();
        let k = WaveVector::new(1, 0, 0);
        for (i, c) in f.coeffs().iter().enumerate() {
            let expect = if lat.wave(i) == k { 1.0 } else { 0.0 };
            assert!((c - C64::new(expect, 0.0)).norm() < 1e-13);
        }
        let konst = grid.forward_real(&vec![2.5; lat.len()]).unwrap();
        assert!((konst.mean_mode() - C64::new(2.5 * (2.0 * PI).powf(1.5), 0.0)).norm() < 1e-12);
        assert!(konst.coeffs()[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn matches_naive_dft() {
        let lat = ModeLattice::new(2).unwrap();
        let samples: Vec<C64> = (0..lat.len()).map(|i| C64::new((i as f64 * 0.37).sin(), 0.0)).collect();
        let fast = SpectralGrid::new(lat).forward(&samples).unwrap();
        let slow = naive_forward(lat, &samples);
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(fast.reality_defect() < 1e-14);
    }

    #[test]
    fn padded_product_is_exact_for_band_limited() {
        let lat = ModeLattice::new(2).unwrap();
        let a = ScalarFourierField::basis(lat, WaveVector::new(2, 0, 0)).unwrap();
        let b = ScalarFourierField::basis(lat, WaveVector::new(1, 0, 0)).unwrap();
        // e_{(2,0,0)} e_{(1,0,0)} = (2π)^{-3/2} e_{(3,0,0)}, outside the lattice
        let p = PaddedProduct::new(lat).product(&a, &b).unwrap();
        assert!(p.max_abs() < 1e-14);
        // the aliased grid product folds it onto k = (-2, 0, 0)
        let q = SpectralGrid::new(lat).product(&a, &b).unwrap();
        assert!((q.get(WaveVector::new(-2, 0, 0)).re - (2.0 * PI).powf(-1.5)).abs() < 1e-13);
    }
}
