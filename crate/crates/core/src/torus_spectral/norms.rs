use super::fft::SpectralGrid;
use super::field::{ScalarFourierField, C64};
use super::lattice::ModeLattice;
use super::partition::DyadicPartition;
use crate::error::{LabError, Result};

/// Grid L^p norm with cell measure `(2π/M)³`; `p = ∞` is the max modulus.
pub fn grid_lp_norm(samples: &[C64], cell_volume: f64, p: f64) -> f64 {
    if p.is_infinite() {
        samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else {
        (samples.iter().map(|v| v.norm().powf(p)).sum::<f64>() * cell_volume).powf(1.0 / p)
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(LabError::InvalidArgument(format!("{name} = {p} outside [1, ∞]")));
    }
    Ok(())
}

/// Evaluator for Besov norms on one lattice, reusing the partition and transforms.
#[derive(Clone, Debug)]
pub struct BesovEvaluator {
    partition: DyadicPartition,
    grid: SpectralGrid,
    fine: Option<SpectralGrid>,
}

impl BesovEvaluator {
    pub fn new(lattice: ModeLattice) -> Self {
        BesovEvaluator { partition: DyadicPartition::new(lattice), grid: SpectralGrid::new(lattice), fine: None }
    }

    /// Evaluate L^p norms on a grid with twice the resolution.
    pub fn with_oversampling(lattice: ModeLattice) -> Self {
        let fine = ModeLattice::new(2 * lattice.n()).expect("fine lattice");
        BesovEvaluator { fine: Some(SpectralGrid::new(fine)), ..Self::new(lattice) }
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    /// `‖Δ_j f‖_{L^p}` for every block j = −1..=jMax.
    pub fn block_norms(&self, f: &ScalarFourierField, p: f64) -> Result<Vec<f64>> {
        check_exponent("p", p)?;
        self.partition.blocks().map(|j| self.block_norm(f, j, p)).collect()
    }

    /// `‖Δ_j f‖_{L^p}` for one block.
    pub fn block_norm(&self, f: &ScalarFourierField, j: i32, p: f64) -> Result<f64> {
        check_exponent("p", p)?;
        let b = self.partition.lp_block(f, j)?;
        match &self.fine {
            None => Ok(grid_lp_norm(&self.grid.inverse(&b)?, self.grid.cell_volume(), p)),
            Some(g) => Ok(grid_lp_norm(&g.inverse(&b.resample(g.lattice()))?, g.cell_volume(), p)),
        }
    }

    /// `max_j 2^{jα} n_j` for block norms from [`Self::block_norms`].
    pub fn holder_from_blocks(&self, norms: &[f64], alpha: f64) -> f64 {
        self.partition.blocks().zip(norms).map(|(j, n)| (2.0f64).powf(j as f64 * alpha) * n).fold(0.0, f64::max)
    }

    /// `(Σ_j (2^{jα} ‖Δ_j f‖_{L^p})^q)^{1/q}`.
    pub fn besov_norm(&self, f: &ScalarFourierField, alpha: f64, p: f64, q: f64) -> Result<f64> {
        check_exponent("q", q)?;
        let norms = self.block_norms(f, p)?;
        let terms = self.partition.blocks().zip(norms).map(|(j, n)| (2.0f64).powf(j as f64 * alpha) * n);
        Ok(if q.is_infinite() {
            terms.fold(0.0, f64::max)
        } else {
            terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
        })
    }

    pub fn holder_norm(&self, f: &ScalarFourierField, alpha: f64) -> Result<f64> {
        self.besov_norm(f, alpha, f64::INFINITY, f64::INFINITY)
    }
}

pub fn besov_norm(f: &ScalarFourierField, alpha: f64, p: f64, q: f64) -> Result<f64> {
    BesovEvaluator::new(f.lattice()).besov_norm(f, alpha, p, q)
}

pub fn holder_norm(f: &ScalarFourierField, alpha: f64) -> Result<f64> {
    besov_norm(f, alpha, f64::INFINITY, f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::super::lattice::WaveVector;
    use super::super::partition::block_weight;
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_and_scaling() {
        let lat = ModeLattice::new(4).unwrap();
        let z = ScalarFourierField::zeros(lat);
        assert_eq!(holder_norm(&z, 0.3).unwrap(), 0.0);
        let f = ScalarFourierField::from_fn(lat, |k| C64::new((k.0[0] + 2 * k.0[1]) as f64 * 0.1, k.0[2] as f64 * 0.05));
        let a = besov_norm(&f, -0.5, 2.0, 3.0).unwrap();
        let b = besov_norm(&f.scale(C64::new(0.0, -3.0)), -0.5, 2.0, 3.0).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12 * b);
        assert!(besov_norm(&f, 0.0, 0.5, 1.0).is_err());
        assert!(besov_norm(&f, 0.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn holder_of_basis_matches_block_weights() {
        let lat = ModeLattice::new(8).unwrap();
        let k = WaveVector::new(3, 4, 0);
        let e = ScalarFourierField::basis(lat, k).unwrap();
        let alpha = 0.7;
        let ev = BesovEvaluator::new(lat);
        let expect = ev
            .partition()
            .blocks()
            .map(|j| (2.0f64).powf(j as f64 * alpha) * block_weight(j, 5.0) * (2.0 * PI).powf(-1.5))
            .fold(0.0, f64::max);
        assert!((ev.holder_norm(&e, alpha).unwrap() - expect).abs() < 1e-12);
    }
}
