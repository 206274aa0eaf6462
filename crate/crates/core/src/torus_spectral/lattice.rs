use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Integer frequency on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveVector(pub [i32; 3]);

impl WaveVector {
    pub const ZERO: WaveVector = WaveVector([0, 0, 0]);

    pub fn new(k1: i32, k2: i32, k3: i32) -> Self {
        WaveVector([k1, k2, k3])
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|&c| (c as i64 * c as i64) as f64).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn max_abs(&self) -> i32 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [self.0[0] as f64, self.0[1] as f64, self.0[2] as f64]
    }
}

impl std::ops::Neg for WaveVector {
    type Output = WaveVector;
    fn neg(self) -> WaveVector {
        WaveVector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl std::ops::Add for WaveVector {
    type Output = WaveVector;
    fn add(self, o: WaveVector) -> WaveVector {
        WaveVector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl std::ops::Sub for WaveVector {
    type Output = WaveVector;
    fn sub(self, o: WaveVector) -> WaveVector {
        WaveVector([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

/// The box `max_j |k_j| <= N` of frequencies, stored in FFT order so that the
/// flat index of `k` is `((k1 mod M) * M + (k2 mod M)) * M + (k3 mod M)` with `M = 2N + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLattice {
    n: usize,
}

impl ModeLattice {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidArgument("lattice truncation N must be >= 1".into()));
        }
        if n > 1024 {
            return Err(LabError::InvalidArgument(format!("lattice truncation N={n} too large")));
        }
        Ok(ModeLattice { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid points per axis.
    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn len(&self) -> usize {
        let m = self.side();
        m * m * m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: WaveVector) -> bool {
        k.max_abs() as usize <= self.n
    }

    #[inline]
    fn wrap(&self, c: i32) -> usize {
        let m = self.side() as i32;
        c.rem_euclid(m) as usize
    }

    #[inline]
    fn unwrap(&self, i: usize) -> i32 {
        if i > self.n {
            i as i32 - self.side() as i32
        } else {
            i as i32
        }
    }

    pub fn index(&self, k: WaveVector) -> Option<usize> {
        if self.contains(k) {
            Some(self.index_wrapped(k))
        } else {
            None
        }
    }

    /// Index of `k` reduced modulo the grid, i.e. the aliased position.
    #[inline]
    pub fn index_wrapped(&self, k: WaveVector) -> usize {
        let m = self.side();
        (self.wrap(k.0[0]) * m + self.wrap(k.0[1])) * m + self.wrap(k.0[2])
    }

    #[inline]
    pub fn wave(&self, idx: usize) -> WaveVector {
        let m = self.side();
        let i2 = idx % m;
        let i1 = (idx / m) % m;
        let i0 = idx / (m * m);
        WaveVector([self.unwrap(i0), self.unwrap(i1), self.unwrap(i2)])
    }

    #[inline]
    pub fn neg_index(&self, idx: usize) -> usize {
        self.index_wrapped(-self.wave(idx))
    }

    pub fn zero_index(&self) -> usize {
        0
    }

    /// All modes in storage order.
    pub fn modes(&self) -> impl Iterator<Item = WaveVector> + '_ {
        (0..self.len()).map(move |i| self.wave(i))
    }
}

/// `build_mode_lattice`.
pub fn build_mode_lattice(n: i64) -> Result<ModeLattice> {
    if n <= 0 {
        return Err(LabError::InvalidArgument(format!("N must be positive, got {n}")));
    }
    ModeLattice::new(n as usize)
}
