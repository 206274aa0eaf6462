use super::field::{ScalarFourierField, C64};
use super::lattice::ModeLattice;
use crate::error::{LabError, Result};

fn bump_tail(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// C^∞ step from 0 (x <= 0) to 1 (x >= 1).
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = bump_tail(x);
    a / (a + bump_tail(1.0 - x))
}

/// Radial profile of χ: 1 on r <= 1/2, 0 on r >= 1.
pub fn chi(r: f64) -> f64 {
    smooth_step(2.0 * (1.0 - r))
}

/// ρ(r) = χ(r/2) − χ(r), supported in 1/2 <= r <= 2.
pub fn rho(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Weight of block `j >= -1` at radius `r`: χ for j = −1, ρ(2^{-j} r) otherwise.
pub fn block_weight(j: i32, r: f64) -> f64 {
    if j < 0 {
        chi(r)
    } else {
        let s = (2.0f64).powi(-j);
        chi(0.5 * r * s) - chi(r * s)
    }
}

/// Smallest J >= 0 with 2^J >= max |k| on the lattice, so blocks −1..=J tile it.
pub fn j_max_for(lattice: ModeLattice) -> i32 {
    let rmax2 = 3.0 * (lattice.n() as f64).powi(2);
    let mut j = 0;
    while (4.0f64).powi(j) < rmax2 {
        j += 1;
    }
    j
}

/// Littlewood–Paley weights sampled on a lattice.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    lattice: ModeLattice,
    j_max: i32,
    weights: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn new(lattice: ModeLattice) -> Self {
        let j_max = j_max_for(lattice);
        let radii: Vec<f64> = lattice.modes().map(|k| k.norm()).collect();
        let weights = (-1..=j_max).map(|j| radii.iter().map(|&r| block_weight(j, r)).collect()).collect();
        DyadicPartition { lattice, j_max, weights }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lattice
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn blocks(&self) -> impl Iterator<Item = i32> {
        -1..=self.j_max
    }

    pub fn weights(&self, j: i32) -> Result<&[f64]> {
        if j < -1 || j > self.j_max {
            return Err(LabError::BlockOutOfRange { j, j_max: self.j_max });
        }
        Ok(&self.weights[(j + 1) as usize])
    }

    /// Largest `|χ + Σ_j ρ_j − 1|` over the lattice.
    pub fn unity_defect(&self) -> f64 {
        (0..self.lattice.len())
            .map(|i| (self.weights.iter().map(|w| w[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Blocks i, j with |i − j| > 1 never overlap on the lattice.
    pub fn disjointness_holds(&self) -> bool {
        let nb = self.weights.len();
        for a in 0..nb {
            for b in (a + 2)..nb {
                if self.weights[a].iter().zip(&self.weights[b]).any(|(x, y)| x * y != 0.0) {
                    return false;
                }
            }
        }
        true
    }

    /// Δ_j f.
    pub fn lp_block(&self, f: &ScalarFourierField, j: i32) -> Result<ScalarFourierField> {
        if f.lattice() != self.lattice {
            return Err(LabError::LatticeMismatch { left: self.lattice.n(), right: f.lattice().n() });
        }
        let w = self.weights(j)?;
        let coeff: Vec<C64> = f.coeffs().iter().zip(w).map(|(c, &x)| c * x).collect();
        ScalarFourierField::from_coeffs(self.lattice, coeff)
    }

    /// S_j f = Σ_{i <= j−1} Δ_i f (zero for j <= 0).
    pub fn low_pass(&self, f: &ScalarFourierField, j: i32) -> Result<ScalarFourierField> {
        let mut out = ScalarFourierField::zeros(self.lattice);
        for i in -1..=(j - 1).min(self.j_max) {
            out.axpy(C64::new(1.0, 0.0), &self.lp_block(f, i)?)?;
        }
        Ok(out)
    }
}

/// `lp_block` with a freshly built partition.
pub fn lp_block(f: &ScalarFourierField, j: i32) -> Result<ScalarFourierField> {
    DyadicPartition::new(f.lattice()).lp_block(f, j)
}

#[cfg(test)]
mod tests {
    use super::super::lattice::WaveVector;
    use super::*;

    #[test]
    fn profile_shape() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(1.0), 0.0);
        assert!(chi(0.75) > 0.0 && chi(0.75) < 1.0);
        assert_eq!(rho(0.5), 0.0);
        assert_eq!(rho(2.0), 0.0);
        assert_eq!(rho(1.0), 1.0);
    }

    #[test]
    fn partition_on_lattices() {
        for n in [1, 2, 5, 8, 13] {
            let p = DyadicPartition::new(ModeLattice::new(n).unwrap());
            assert!(p.unity_defect() < 1e-12, "N={n}");
            assert!(p.disjointness_holds());
        }
    }

    #[test]
    fn block_support_of_basis() {
        let lat = ModeLattice::new(8).unwrap();
        let p = DyadicPartition::new(lat);
        let k = WaveVector::new(5, 0, 0);
        let e = ScalarFourierField::basis(lat, k).unwrap();
        for j in p.blocks() {
            let b = p.lp_block(&e, j).unwrap();
            if block_weight(j, 5.0) == 0.0 {
                assert_eq!(b.max_abs(), 0.0);
            }
        }
        assert!(p.lp_block(&e, p.j_max() + 1).is_err());
        let c = ScalarFourierField::basis(lat, WaveVector::ZERO).unwrap();
        assert_eq!(p.lp_block(&c, -1).unwrap(), c);
    }
}
