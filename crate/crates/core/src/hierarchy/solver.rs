use serde::{Deserialize, Serialize};

use super::{MhdPair, Operators, SolverConfig, Trajectory, Which};
use crate::error::{LabError, Result};
use crate::schemes::{semigroup_eps_factor, Flavor, SchemeSpec};
use crate::torus_spectral::{BesovEvaluator, ScalarFourierField, VectorFourierField, C64};
use crate::wick_renorm::{ck_all, ConstFamily};

type Phys = [Vec<C64>; 3];

fn to_phys(ops: &Operators, v: &VectorFourierField) -> Result<Phys> {
    let lat = ops.grid.lattice();
    Ok([ops.grid.inverse(&v.comps[0].resample(lat))?, ops.grid.inverse(&v.comps[1].resample(lat))?, ops.grid.inverse(&v.comps[2].resample(lat))?])
}

/// `(C + C̃)_{k,flavor}^{h m x}(t)`, real parts, indexed `[k−1][flavor][h·9 + m·3 + x]`.
#[derive(Clone, Debug)]
pub(crate) struct Corrections {
    c: [[[f64; 27]; 2]; 4],
}

impl Corrections {
    pub fn at(scheme: &SchemeSpec, lattice: crate::torus_spectral::ModeLattice, t: f64) -> Result<Self> {
        let mut c = [[[0.0; 27]; 2]; 4];
        for tensor in ck_all(false, t, scheme, lattice)? {
            let ConstFamily::C { k, .. } = tensor.family else { continue };
            let f = match tensor.flavor {
                Some(Flavor::U) => 0,
                _ => 1,
            };
            for (o, v) in tensor.values.iter().enumerate() {
                c[k as usize - 1][f][o] += v.re;
            }
        }
        Ok(Corrections { c })
    }
}

/// `T^{pq}` of `−½ Σ 𝒫^{ip} D_q T^{pq}`, accumulated as grid products plus linear terms.
struct Forcing<'a> {
    ops: &'a Operators,
    phys: Vec<Vec<C64>>,
    lin: Vec<ScalarFourierField>,
}

impl<'a> Forcing<'a> {
    fn new(ops: &'a Operators) -> Self {
        let n = ops.grid.lattice().len();
        Forcing { ops, phys: vec![vec![C64::default(); n]; 9], lin: vec![ScalarFourierField::zeros(ops.lattice); 9] }
    }

    /// `T^{pq} += coef a^p b^q`.
    fn product(&mut self, coef: f64, a: &Phys, b: &Phys) {
        for p in 0..3 {
            for q in 0..3 {
                for ((t, x), y) in self.phys[p * 3 + q].iter_mut().zip(&a[p]).zip(&b[q]) {
                    *t += x * y * coef;
                }
            }
        }
    }

    /// Linear part of `H ⋄ X` (H of flavor `fh` from level ≥ 2, X of flavor `fx` from
    /// level 1): `Σ_m (C+C̃)_{k,u}^{h m x} src_u^m + (C+C̃)_{k,b}^{h m x} src_b^m` where
    /// h, x are the slots of H and X in `T^{pq}`.
    fn correction(&mut self, coef: f64, corr: &Corrections, fh: Flavor, fx: Flavor, h_first: bool, src: &MhdPair) -> Result<()> {
        let fam = match (fh, fx) {
            (Flavor::U, Flavor::U) => 0,
            (Flavor::B, Flavor::B) => 1,
            (Flavor::U, Flavor::B) => 2,
            (Flavor::B, Flavor::U) => 3,
        };
        for p in 0..3 {
            for q in 0..3 {
                let (h, x) = if h_first { (p, q) } else { (q, p) };
                for m in 0..3 {
                    for (sf, field) in [(0, &src.u), (1, &src.b)] {
                        let w = corr.c[fam][sf][h * 9 + m * 3 + x];
                        if w != 0.0 {
                            self.lin[p * 3 + q].axpy(C64::new(coef * w, 0.0), &field.comps[m])?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<VectorFourierField> {
        let lat = self.ops.lattice;
        let mut t = Vec::with_capacity(9);
        for (samples, lin) in self.phys.iter().zip(&self.lin) {
            t.push(self.ops.grid.forward(samples)?.resample(lat).add(lin)?);
        }
        let mut out = VectorFourierField::zeros(lat);
        for idx in 0..lat.len() {
            let (pr, d) = (&self.ops.proj[idx], &self.ops.d[idx]);
            let mut inner = [C64::default(); 3];
            for p in 0..3 {
                for q in 0..3 {
                    inner[p] += d[q] * t[p * 3 + q].coeffs()[idx];
                }
            }
            let mut v = [C64::default(); 3];
            for i in 0..3 {
                for p in 0..3 {
                    v[i] += inner[p] * (-0.5 * pr[i][p]);
                }
            }
            out.set_at(idx, v);
        }
        Ok(out)
    }
}

fn level2_forcing(ops: &Operators, y1: &MhdPair) -> Result<MhdPair> {
    let (u1, b1) = (to_phys(ops, &y1.u)?, to_phys(ops, &y1.b)?);
    let mut fu = Forcing::new(ops);
    fu.product(1.0, &u1, &u1);
    fu.product(-1.0, &b1, &b1);
    let mut fb = Forcing::new(ops);
    fb.product(1.0, &b1, &u1);
    fb.product(-1.0, &u1, &b1);
    Ok(MhdPair { u: fu.finish()?, b: fb.finish()? })
}

fn level3_forcing(ops: &Operators, y1: &MhdPair, y2: &MhdPair, corr: Option<&Corrections>) -> Result<MhdPair> {
    let (u1, b1) = (to_phys(ops, &y1.u)?, to_phys(ops, &y1.b)?);
    let (u2, b2) = (to_phys(ops, &y2.u)?, to_phys(ops, &y2.b)?);
    use Flavor::{B, U};
    let mut fu = Forcing::new(ops);
    fu.product(1.0, &u1, &u2);
    fu.product(1.0, &u2, &u1);
    fu.product(-1.0, &b1, &b2);
    fu.product(-1.0, &b2, &b1);
    let mut fb = Forcing::new(ops);
    fb.product(1.0, &b1, &u2);
    fb.product(1.0, &b2, &u1);
    fb.product(-1.0, &u1, &b2);
    fb.product(-1.0, &u2, &b1);
    if let Some(c) = corr {
        for (coef, fh, fx, h_first) in [(1.0, U, U, false), (1.0, U, U, true), (-1.0, B, B, false), (-1.0, B, B, true)] {
            fu.correction(coef, c, fh, fx, h_first, y1)?;
        }
        for (coef, fh, fx, h_first) in [(1.0, U, B, false), (1.0, B, U, true), (-1.0, B, U, false), (-1.0, U, B, true)] {
            fb.correction(coef, c, fh, fx, h_first, y1)?;
        }
    }
    Ok(MhdPair { u: fu.finish()?, b: fb.finish()? })
}

/// Right side of the level-4 mild map with `y₄` taken from the previous iterate.
fn level4_forcing(ops: &Operators, y: [&MhdPair; 4], corr: Option<&Corrections>) -> Result<MhdPair> {
    let [y1, y2, y3, y4] = y;
    let rest = y3.add(y4)?;
    let (u1, b1) = (to_phys(ops, &y1.u)?, to_phys(ops, &y1.b)?);
    let (u2, b2) = (to_phys(ops, &y2.u)?, to_phys(ops, &y2.b)?);
    let (yy, zz) = (to_phys(ops, &rest.u)?, to_phys(ops, &rest.b)?);
    use Flavor::{B, U};
    let mut fu = Forcing::new(ops);
    for (coef, a, b) in [
        (1.0, &u1, &yy),
        (1.0, &yy, &u1),
        (1.0, &u2, &u2),
        (1.0, &u2, &yy),
        (1.0, &yy, &u2),
        (1.0, &yy, &yy),
        (-1.0, &b1, &zz),
        (-1.0, &zz, &b1),
        (-1.0, &b2, &b2),
        (-1.0, &b2, &zz),
        (-1.0, &zz, &b2),
        (-1.0, &zz, &zz),
    ] {
        fu.product(coef, a, b);
    }
    let mut fb = Forcing::new(ops);
    for (coef, a, b) in [
        (1.0, &b1, &yy),
        (1.0, &zz, &u1),
        (1.0, &b2, &u2),
        (1.0, &b2, &yy),
        (1.0, &zz, &u2),
        (1.0, &zz, &yy),
        (-1.0, &u1, &zz),
        (-1.0, &yy, &b1),
        (-1.0, &u2, &b2),
        (-1.0, &u2, &zz),
        (-1.0, &yy, &b2),
        (-1.0, &yy, &zz),
    ] {
        fb.product(coef, a, b);
    }
    if let Some(c) = corr {
        // the y₃ part of each ⋄ is corrected by y₂, the y₄ part by y₃ + y₄
        let src = y2.add(&rest)?;
        for (coef, fh, fx, h_first) in [(1.0, U, U, false), (1.0, U, U, true), (-1.0, B, B, false), (-1.0, B, B, true)] {
            fu.correction(coef, c, fh, fx, h_first, &src)?;
        }
        for (coef, fh, fx, h_first) in [(1.0, U, B, false), (1.0, B, U, true), (-1.0, B, U, false), (-1.0, U, B, true)] {
            fb.correction(coef, c, fh, fx, h_first, &src)?;
        }
    }
    Ok(MhdPair { u: fu.finish()?, b: fb.finish()? })
}

/// The ⋄-correction part of the level-3 forcing alone.
#[cfg(test)]
pub(super) fn correction_only(scheme: &SchemeSpec, lattice: crate::torus_spectral::ModeLattice, t: f64, y1: &MhdPair) -> Result<MhdPair> {
    let ops = Operators::new(scheme, Which::Approx, lattice, false);
    let corr = Corrections::at(scheme, lattice, t)?;
    let y2 = MhdPair::zeros(lattice);
    level3_forcing(&ops, y1, &y2, Some(&corr))?.sub(&level3_forcing(&ops, y1, &y2, None)?)
}

/// One level on the time grid with its largest one-step residual
/// `|(y_{n+1} − y_n)/dt − (−λ y_n + F_n)|` over modes with finite λ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRun {
    pub traj: Trajectory,
    pub residual: f64,
}

struct Ctx {
    ops: Operators,
    factors: Vec<(f64, f64)>,
    cfg: SolverConfig,
    corr: Vec<Option<Corrections>>,
    times: Vec<f64>,
    stationary: bool,
}

impl Ctx {
    fn new(linear: &Trajectory, scheme: &SchemeSpec, cfg: &SolverConfig, which: Which, need_corr: bool) -> Result<Ctx> {
        cfg.validate()?;
        linear.check_grid(cfg)?;
        let ops = Operators::new(scheme, which, linear.lattice(), cfg.dealias);
        let factors = ops.step_factors(cfg.dt);
        let times = linear.times.clone();
        let corr = if need_corr && which == Which::Approx && cfg.renormalize {
            times
                .iter()
                .map(|&t| Corrections::at(scheme, ops.lattice, if linear.stationary { f64::INFINITY } else { t }).map(Some))
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![None; times.len()]
        };
        Ok(Ctx { ops, factors, cfg: *cfg, corr, times, stationary: linear.stationary })
    }

    fn march(&self, y0: MhdPair, mut forcing: impl FnMut(usize, &MhdPair) -> Result<MhdPair>) -> Result<LevelRun> {
        let lat = self.ops.lattice;
        let dt = self.cfg.dt;
        let mut states = vec![y0];
        let mut residual = 0.0f64;
        for n in 0..self.times.len() - 1 {
            let y = &states[n];
            let f = forcing(n, y)?;
            let mut next = MhdPair::zeros(lat);
            for (cur, frc, out) in [(&y.u, &f.u, &mut next.u), (&y.b, &f.b, &mut next.b)] {
                for idx in 0..lat.len() {
                    let (e, w) = self.factors[idx];
                    let (yv, fv) = (cur.at(idx), frc.at(idx));
                    let v = [0, 1, 2].map(|c| yv[c] * e + fv[c] * w);
                    let lam = self.ops.lam[idx];
                    if lam.is_finite() {
                        for c in 0..3 {
                            residual = residual.max(((v[c] - yv[c]) / dt - (fv[c] - yv[c] * lam)).norm());
                        }
                    }
                    out.set_at(idx, v);
                }
            }
            states.push(next);
        }
        Ok(LevelRun { traj: Trajectory { times: self.times.clone(), states, stationary: self.stationary }, residual })
    }
}

pub fn solve_level2(linear: &Trajectory, scheme: &SchemeSpec, cfg: &SolverConfig, which: Which) -> Result<LevelRun> {
    let ctx = Ctx::new(linear, scheme, cfg, which, false)?;
    ctx.march(MhdPair::zeros(ctx.ops.lattice), |n, _| level2_forcing(&ctx.ops, &linear.states[n]))
}

pub fn solve_level3(linear: &Trajectory, level2: &Trajectory, scheme: &SchemeSpec, cfg: &SolverConfig, which: Which) -> Result<LevelRun> {
    let ctx = Ctx::new(linear, scheme, cfg, which, true)?;
    level2.check_grid(cfg)?;
    ctx.march(MhdPair::zeros(ctx.ops.lattice), |n, _| level3_forcing(&ctx.ops, &linear.states[n], &level2.states[n], ctx.corr[n].as_ref()))
}

/// `dK = (ΔK + y₁)dt`, `K(0) = 0`, as a (K_u, K_b) pair.
pub fn solve_k(linear: &Trajectory, scheme: &SchemeSpec, cfg: &SolverConfig, which: Which) -> Result<LevelRun> {
    let ctx = Ctx::new(linear, scheme, cfg, which, false)?;
    ctx.march(MhdPair::zeros(ctx.ops.lattice), |n, _| Ok(linear.states[n].clone()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    /// `max_n ‖y^{(m+1)}_n − y^{(m)}_n‖_{C^{−z}}` per iteration.
    pub increments: Vec<f64>,
    pub converged: bool,
}

impl PicardReport {
    /// Largest ratio of consecutive nonzero increments.
    pub fn worst_ratio(&self) -> f64 {
        self.increments.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).fold(0.0, f64::max)
    }
}

/// Snapshot of every level at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyState {
    pub t: f64,
    pub which: Which,
    pub levels: [MhdPair; 4],
    pub k: MhdPair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyRun {
    pub which: Which,
    pub times: Vec<f64>,
    pub levels: [Trajectory; 4],
    pub k: Trajectory,
    /// One-step residuals of levels 2, 3 and K.
    pub residuals: [f64; 3],
    pub picard: PicardReport,
}

impl HierarchyRun {
    pub fn state(&self, n: usize) -> HierarchyState {
        HierarchyState {
            t: self.times[n],
            which: self.which,
            levels: [0, 1, 2, 3].map(|l| self.levels[l].states[n].clone()),
            k: self.k.states[n].clone(),
        }
    }

    /// `y = y₁ + y₂ + y₃ + y₄` at step n.
    pub fn assembled(&self, n: usize) -> MhdPair {
        let mut y = self.levels[0].states[n].clone();
        for l in 1..4 {
            y = y.add(&self.levels[l].states[n]).expect("shared lattice");
        }
        y
    }

    /// `[level][step]` norms `‖y_l(t_n)‖_{C^{−z}}`.
    pub fn norms(&self, z: f64) -> Result<Vec<Vec<f64>>> {
        let eval = BesovEvaluator::new(self.levels[0].lattice());
        self.levels.iter().map(|tr| tr.states.iter().map(|s| s.holder_norm(&eval, -z)).collect()).collect()
    }
}

/// Solves levels 2, 3, K and the Picard fixed point for level 4 with
/// `y₄(0) = 𝒫y₀ − y₁(0)`.
pub fn run_hierarchy(linear: &Trajectory, y0: &MhdPair, scheme: &SchemeSpec, cfg: &SolverConfig, which: Which) -> Result<HierarchyRun> {
    let l2 = solve_level2(linear, scheme, cfg, which)?;
    let l3 = solve_level3(linear, &l2.traj, scheme, cfg, which)?;
    let k = solve_k(linear, scheme, cfg, which)?;
    let ctx = Ctx::new(linear, scheme, cfg, which, true)?;
    let lat = ctx.ops.lattice;
    let start = y0.leray().sub(&linear.states[0])?;
    // free evolution as the first iterate
    let mut prev: Vec<MhdPair> = ctx
        .times
        .iter()
        .map(|&t| {
            let f = |v: &VectorFourierField| {
                let mut o = v.clone();
                for idx in 0..lat.len() {
                    let e = match which {
                        Which::Approx => semigroup_eps_factor(scheme, lat.wave(idx), t),
                        Which::Continuum => (-ctx.ops.lam[idx] * t).exp(),
                    };
                    o.set_at(idx, v.at(idx).map(|c| c * e));
                }
                o
            };
            MhdPair { u: f(&start.u), b: f(&start.b) }
        })
        .collect();
    let eval = BesovEvaluator::new(lat);
    let mut increments = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.picard_max_iter {
        let run = ctx.march(start.clone(), |n, _| {
            level4_forcing(&ctx.ops, [&linear.states[n], &l2.traj.states[n], &l3.traj.states[n], &prev[n]], ctx.corr[n].as_ref())
        })?;
        let mut inc = 0.0f64;
        for (a, b) in run.traj.states.iter().zip(&prev) {
            inc = inc.max(a.sub(b)?.holder_norm(&eval, -cfg.z)?);
        }
        increments.push(inc);
        prev = run.traj.states;
        if !inc.is_finite() {
            break;
        }
        if inc < cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LabError::NoContraction { iterations: increments.len(), last: increments.last().copied().unwrap_or(f64::NAN) });
    }
    let y4 = Trajectory { times: ctx.times.clone(), states: prev, stationary: linear.stationary };
    Ok(HierarchyRun {
        which,
        times: ctx.times.clone(),
        levels: [linear.clone(), l2.traj, l3.traj, y4],
        k: k.traj,
        residuals: [l2.residual, l3.residual, k.residual],
        picard: PicardReport { increments, converged },
    })
}

#[cfg(test)]
mod tests {
    use super::super::taylor_green;
    use super::*;
    use crate::fields::NoiseSpec;
    use crate::torus_spectral::{ModeLattice, WaveVector};

    fn frozen_mode(lat: ModeLattice, k: WaveVector, amp: f64) -> MhdPair {
        // divergence-free single-mode pair ±k along e₃ (k ⟂ e₃)
        let mut u = VectorFourierField::zeros(lat);
        let i = lat.index(k).unwrap();
        u.set_at(i, [C64::default(), C64::default(), C64::new(amp, 0.0)]);
        u.set_at(lat.neg_index(i), [C64::default(), C64::default(), C64::new(amp, 0.0)]);
        MhdPair { u: u.clone(), b: u.scale_real(0.5) }
    }

    #[test]
    fn k_matches_closed_form_for_frozen_mode() {
        let lat = ModeLattice::new(3).unwrap();
        let cfg = SolverConfig::new(0.01, 0.3).unwrap();
        let k = WaveVector::new(2, 1, 0);
        let y1 = frozen_mode(lat, k, 0.7);
        let lin = Trajectory::from_fn(cfg.times().unwrap(), |_| y1.clone());
        let scheme = SchemeSpec::finite_difference(0.2);
        let run = solve_k(&lin, &scheme, &cfg, Which::Approx).unwrap();
        let lam = scheme.lambda(k);
        let exact = 0.7 * (1.0 - (-lam * 0.3).exp()) / lam;
        let got = run.traj.last().u.at(lat.index(k).unwrap())[2].re;
        assert!((got - exact).abs() < 1e-12, "{got} {exact}");
        assert!(run.traj.last().divergence_defect() < 1e-12);
    }

    #[test]
    fn zero_noise_levels_vanish() {
        let lat = ModeLattice::new(3).unwrap();
        let cfg = SolverConfig::new(0.01, 0.05).unwrap();
        let lin = Trajectory::zeros(lat, cfg.times().unwrap());
        let scheme = SchemeSpec::finite_difference(0.25).with_ab(1.0, 0.0).unwrap();
        let y0 = MhdPair::zeros(lat);
        let run = run_hierarchy(&lin, &y0, &scheme, &cfg, Which::Approx).unwrap();
        for n in 0..run.times.len() {
            assert_eq!(run.assembled(n).max_abs(), 0.0);
        }
    }

    #[test]
    fn level2_single_step_matches_frozen_forcing() {
        let lat = ModeLattice::new(3).unwrap();
        let y1 = taylor_green(lat, 1.0, 0.5).unwrap();
        let scheme = SchemeSpec::finite_difference(0.25);
        let ops = Operators::new(&scheme, Which::Continuum, lat, true);
        let f = level2_forcing(&ops, &y1).unwrap();
        assert!(f.divergence_defect() < 1e-12 && f.reality_defect() < 1e-12);
        // frozen forcing: y₂(t) = (1 − e^{−λt})/λ F exactly
        let cfg = SolverConfig::new(0.02, 0.2).unwrap();
        let lin = Trajectory::from_fn(cfg.times().unwrap(), |_| y1.clone());
        let run = solve_level2(&lin, &scheme, &cfg, Which::Continuum).unwrap();
        let last = run.traj.last();
        let mut err = 0.0f64;
        for idx in 0..lat.len() {
            let lam = ops.lam[idx];
            let w = if lam == 0.0 { 0.2 } else { (1.0 - (-lam * 0.2).exp()) / lam };
            for c in 0..3 {
                err = err.max((last.u.at(idx)[c] - f.u.at(idx)[c] * w).norm());
            }
        }
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn continuum_path_equals_approx_path_without_constants() {
        let lat = ModeLattice::new(3).unwrap();
        let scheme = SchemeSpec::finite_difference(0.25).with_ab(1.0, 0.0).unwrap();
        let y1 = taylor_green(lat, 1.0, 0.5).unwrap();
        let y2 = taylor_green(lat, 0.3, -0.8).unwrap();
        let ops = Operators::new(&scheme, Which::Approx, lat, true);
        let plain = level3_forcing(&ops, &y1, &y2, None).unwrap();
        let zero = Corrections { c: [[[0.0; 27]; 2]; 4] };
        let with_zero = level3_forcing(&ops, &y1, &y2, Some(&zero)).unwrap();
        assert_eq!(plain, with_zero);
        let corr = Corrections::at(&scheme, lat, 0.5).unwrap();
        let with = level3_forcing(&ops, &y1, &y2, Some(&corr)).unwrap();
        assert!(with.sub(&plain).unwrap().max_abs() > 0.0);
    }

    #[test]
    fn deterministic_run_dissipates_energy() {
        let lat = ModeLattice::new(4).unwrap();
        let cfg = SolverConfig::new(0.0025, 0.05).unwrap();
        let lin = Trajectory::zeros(lat, cfg.times().unwrap());
        let y0 = taylor_green(lat, 2.0, 1.0).unwrap();
        let run = run_hierarchy(&lin, &y0, &SchemeSpec::galerkin(0.25), &cfg, Which::Continuum).unwrap();
        assert!(run.picard.converged);
        let mut last = f64::INFINITY;
        for n in 0..run.times.len() {
            let y = run.assembled(n);
            assert!(y.divergence_defect() < 1e-12);
            assert!(y.energy() <= last * (1.0 + 1e-12));
            last = y.energy();
        }
        assert!(last < y0.energy());
    }

    #[test]
    fn b_stays_zero_without_magnetic_data() {
        let lat = ModeLattice::new(3).unwrap();
        let cfg = SolverConfig::new(0.005, 0.02).unwrap();
        let mut noise = NoiseSpec::new(5, cfg.dt, cfg.t_end, lat, SchemeSpec::galerkin(0.5)).unwrap();
        noise.identified = false;
        let mut lin = Trajectory::sample_linear(&noise, Which::Continuum, false, 0).unwrap();
        for s in lin.states.iter_mut() {
            s.b = VectorFourierField::zeros(lat);
        }
        let mut y0 = taylor_green(lat, 1.0, 0.0).unwrap();
        y0.b = VectorFourierField::zeros(lat);
        let run = run_hierarchy(&lin, &y0, &noise.scheme, &cfg, Which::Continuum).unwrap();
        for n in 0..run.times.len() {
            assert_eq!(run.assembled(n).b.max_abs(), 0.0);
            assert!(run.assembled(n).u.max_abs() > 0.0 || n == 0);
        }
    }

    #[test]
    fn time_grid_mismatch_rejected() {
        let lat = ModeLattice::new(2).unwrap();
        let lin = Trajectory::zeros(lat, vec![0.0, 0.1]);
        let cfg = SolverConfig::new(0.01, 0.05).unwrap();
        assert!(solve_level2(&lin, &SchemeSpec::galerkin(0.5), &cfg, Which::Approx).is_err());
    }
}
