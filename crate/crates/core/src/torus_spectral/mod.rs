//! Fourier representation on the 3-torus, Littlewood–Paley blocks and Besov norms.

mod fft;
mod field;
mod lattice;
mod norms;
mod partition;

pub use fft::{dft_forward, dft_inverse, PaddedProduct, SpectralGrid};
pub use field::{ScalarFourierField, VectorFourierField, C64};
pub use lattice::{build_mode_lattice, ModeLattice, WaveVector};
pub use norms::{besov_norm, grid_lp_norm, holder_norm, BesovEvaluator};
pub use partition::{block_weight, chi, j_max_for, lp_block, rho, smooth_step, DyadicPartition};
