//! The mild-solution hierarchy `y = y₁ + y₂ + y₃ + y₄` for the continuum-split and
//! the approximate system, the auxiliary `K` fields and the drift tables.
//!
//! Levels 2, 3 and `K` are stepped with the exponential Euler rule
//! `y_{n+1} = e^{−λdt} y_n + dt φ₁(λdt) F_n`, `φ₁(x) = (1 − e^{−x})/x`; level 4 is
//! the Picard fixed point of the same discrete mild map.

mod drift;
mod solver;

use serde::{Deserialize, Serialize};

pub use drift::{apply_drift, drift_assembly, drift_terms, DriftForm, DriftTable, DriftTerm, Wiring};
pub use solver::{run_hierarchy, solve_k, solve_level2, solve_level3, HierarchyRun, HierarchyState, LevelRun, PicardReport};

use crate::error::{LabError, Result};
use crate::fields::{CoupledOUEnsemble, Family, NoiseSpec};
use crate::schemes::{leray_project_unchecked, Flavor, SchemeSpec};
use crate::torus_spectral::{BesovEvaluator, ModeLattice, SpectralGrid, VectorFourierField, C64};

/// Which system a run solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    /// `Δ_ε`, `D^ε` and the renormalized products with the C/C̃ corrections.
    Approx,
    /// `Δ`, `D` and plain products.
    Continuum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub picard_max_iter: usize,
    /// Picard stops once the increment drops below this, measured in `C^{−z}`.
    pub tol: f64,
    pub z: f64,
    /// Products on a padded grid instead of the aliased one.
    pub dealias: bool,
    /// In approximate mode, add the C/C̃-weighted linear terms to the ⋄ products.
    pub renormalize: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { dt: 2.5e-3, t_end: 0.05, picard_max_iter: 60, tol: 1e-10, z: 0.6, dealias: true, renormalize: true }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let c = SolverConfig { dt, t_end, ..Default::default() };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.tol > 0.0) || !(self.t_end >= self.dt) {
            return Err(LabError::InvalidArgument(format!(
                "need dt > 0, tol > 0 and T >= dt (dt={}, T={}, tol={})",
                self.dt, self.t_end, self.tol
            )));
        }
        self.steps().map(|_| ())
    }

    /// Number of steps; T must be a whole multiple of dt.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(LabError::InvalidArgument(format!("T = {} is not a multiple of dt = {}", self.t_end, self.dt)));
        }
        Ok(n as usize)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        Ok((0..=self.steps()?).map(|n| n as f64 * self.dt).collect())
    }
}

/// A velocity/magnetic pair of vector fields on one lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MhdPair {
    pub u: VectorFourierField,
    pub b: VectorFourierField,
}

impl MhdPair {
    pub fn zeros(lattice: ModeLattice) -> Self {
        MhdPair { u: VectorFourierField::zeros(lattice), b: VectorFourierField::zeros(lattice) }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.u.lattice()
    }

    pub fn get(&self, f: Flavor) -> &VectorFourierField {
        match f {
            Flavor::U => &self.u,
            Flavor::B => &self.b,
        }
    }

    pub fn add(&self, o: &MhdPair) -> Result<MhdPair> {
        Ok(MhdPair { u: self.u.add(&o.u)?, b: self.b.add(&o.b)? })
    }

    pub fn sub(&self, o: &MhdPair) -> Result<MhdPair> {
        Ok(MhdPair { u: self.u.sub(&o.u)?, b: self.b.sub(&o.b)? })
    }

    /// `‖u‖² + ‖b‖²` (Parseval).
    pub fn energy(&self) -> f64 {
        self.u.l2_norm2() + self.b.l2_norm2()
    }

    pub fn divergence_defect(&self) -> f64 {
        self.u.divergence_defect().max(self.b.divergence_defect())
    }

    pub fn reality_defect(&self) -> f64 {
        self.u.reality_defect().max(self.b.reality_defect())
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.b.max_abs())
    }

    pub fn leray(&self) -> MhdPair {
        MhdPair { u: leray_project_unchecked(&self.u), b: leray_project_unchecked(&self.b) }
    }

    /// Largest `C^{α}` norm over the six components.
    pub fn holder_norm(&self, eval: &BesovEvaluator, alpha: f64) -> Result<f64> {
        let mut m = 0.0f64;
        for f in [&self.u, &self.b] {
            for c in &f.comps {
                m = m.max(eval.holder_norm(c, alpha)?);
            }
        }
        Ok(m)
    }
}

/// States of one level on the shared time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MhdPair>,
    /// Started from the stationary law rather than from 0.
    pub stationary: bool,
}

impl Trajectory {
    pub fn zeros(lattice: ModeLattice, times: Vec<f64>) -> Self {
        let states = vec![MhdPair::zeros(lattice); times.len()];
        Trajectory { times, states, stationary: false }
    }

    pub fn from_fn(times: Vec<f64>, mut f: impl FnMut(f64) -> MhdPair) -> Self {
        let states = times.iter().map(|&t| f(t)).collect();
        Trajectory { times, states, stationary: false }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.states[0].lattice()
    }

    pub fn last(&self) -> &MhdPair {
        self.states.last().expect("nonempty trajectory")
    }

    /// Samples the linear level of `which` on the grid `dt, 2dt, …, T` of `noise`.
    pub fn sample_linear(noise: &NoiseSpec, which: Which, stationary: bool, stream: u64) -> Result<Trajectory> {
        let cfg = SolverConfig::new(noise.dt, noise.t_end)?;
        let mut ens = CoupledOUEnsemble::new(noise.clone(), stream);
        if stationary {
            ens.burn_in_stationary();
        }
        let pick = |e: &CoupledOUEnsemble| match which {
            Which::Approx => MhdPair { u: e.field(Family::Approx(Flavor::U)).clone(), b: e.field(Family::Approx(Flavor::B)).clone() },
            Which::Continuum => MhdPair { u: e.field(Family::Cont(Flavor::U)).clone(), b: e.field(Family::Cont(Flavor::B)).clone() },
        };
        let times = cfg.times()?;
        let mut states = vec![pick(&ens)];
        for _ in 1..times.len() {
            ens.step_linear(noise.dt)?;
            states.push(pick(&ens));
        }
        Ok(Trajectory { times, states, stationary })
    }

    pub(crate) fn check_grid(&self, cfg: &SolverConfig) -> Result<()> {
        let times = cfg.times()?;
        let ok = times.len() == self.times.len() && times.iter().zip(&self.times).all(|(a, b)| (a - b).abs() <= 1e-9 * cfg.t_end.max(1.0));
        if !ok {
            return Err(LabError::InvalidArgument(format!(
                "time grid mismatch: trajectory has {} points, solver expects {} (dt={}, T={})",
                self.times.len(),
                times.len(),
                cfg.dt,
                cfg.t_end
            )));
        }
        Ok(())
    }
}

/// Divergence-free Taylor–Green velocity and an ABC-type magnetic field,
/// `u = A(sin x cos y cos z, −cos x sin y cos z, 0)`, `b = B(sin z, sin x, sin y)`.
pub fn taylor_green(lattice: ModeLattice, amp_u: f64, amp_b: f64) -> Result<MhdPair> {
    let grid = SpectralGrid::new(lattice);
    let samples = |f: &dyn Fn([f64; 3]) -> f64| (0..lattice.len()).map(|n| f(grid.point(n))).collect::<Vec<f64>>();
    let u = [
        samples(&|x| amp_u * x[0].sin() * x[1].cos() * x[2].cos()),
        samples(&|x| -amp_u * x[0].cos() * x[1].sin() * x[2].cos()),
        vec![0.0; lattice.len()],
    ];
    let b = [samples(&|x| amp_b * x[2].sin()), samples(&|x| amp_b * x[0].sin()), samples(&|x| amp_b * x[1].sin())];
    let vf = |s: &[Vec<f64>; 3]| -> Result<VectorFourierField> {
        VectorFourierField::new([grid.forward_real(&s[0])?, grid.forward_real(&s[1])?, grid.forward_real(&s[2])?])
    };
    let mut p = MhdPair { u: vf(&u)?, b: vf(&b)? }.leray();
    for f in [&mut p.u, &mut p.b] {
        for c in f.comps.iter_mut() {
            c.symmetrize_reality();
        }
    }
    Ok(p)
}

/// Per-mode operators of one system: rate `λ(k)`, derivative symbols and Leray matrix.
#[derive(Clone, Debug)]
pub(crate) struct Operators {
    pub lattice: ModeLattice,
    pub lam: Vec<f64>,
    pub d: Vec<[C64; 3]>,
    pub proj: Vec<[[f64; 3]; 3]>,
    pub grid: SpectralGrid,
}

impl Operators {
    pub fn new(scheme: &SchemeSpec, which: Which, lattice: ModeLattice, dealias: bool) -> Self {
        let mut lam = Vec::with_capacity(lattice.len());
        let mut d = Vec::with_capacity(lattice.len());
        let mut proj = Vec::with_capacity(lattice.len());
        for k in lattice.modes() {
            let kf = k.as_f64();
            match which {
                Which::Approx => {
                    lam.push(scheme.lambda(k));
                    d.push([0, 1, 2].map(|j| scheme.dj_symbol(j, k)));
                }
                Which::Continuum => {
                    lam.push(k.norm2());
                    d.push(kf.map(|c| C64::new(0.0, c)));
                }
            }
            proj.push(crate::schemes::leray_symbol(kf));
        }
        let product_lattice = if dealias { ModeLattice::new((3 * lattice.n()).div_ceil(2)).expect("padded lattice") } else { lattice };
        Operators { lattice, lam, d, proj, grid: SpectralGrid::new(product_lattice) }
    }

    /// `(e^{−λdt}, dt φ₁(λdt))` per mode.
    pub fn step_factors(&self, dt: f64) -> Vec<(f64, f64)> {
        self.lam
            .iter()
            .map(|&l| if l.is_finite() { ((-l * dt).exp(), dt * crate::fields::one_minus_exp_over(l * dt)) } else { (0.0, 0.0) })
            .collect()
    }
}
