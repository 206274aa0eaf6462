//! The experiments behind each `spde-lab` subcommand. Every runner writes its
//! tables under `out`, and [`run`] adds `config.toml` (the resolved config, seed
//! included) and `manifest.json`, which together re-run the experiment.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::LabConfig;
use crate::error::{LabError, Result};
use crate::fields::{covariance_closed_form, mc_covariance_all, CoupledOUEnsemble, NoiseSpec};
use crate::hierarchy::{run_hierarchy, solve_level2, taylor_green, MhdPair, SolverConfig, Trajectory, Which};
use crate::io::{write_csv, write_json, ConstantCsvRow, CovarianceReport, FieldContainer, TrajectoryCsvRow};
use crate::lab::{
    exp_burgers, exp_constants_table, exp_linear_convergence, exp_second_chaos, exp_sum_bound, lattice_sum, BurgersSpec, ConstantsSpec,
    ExperimentSpec, RateFit, SweepPoint,
};
use crate::torus_spectral::{ModeLattice, WaveVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    Covariance,
    LinearConverge,
    SecondChaos,
    Burgers,
    Hierarchy,
    SumBounds,
}

impl Command {
    pub const ALL: [Command; 7] =
        [Command::Constants, Command::Covariance, Command::LinearConverge, Command::SecondChaos, Command::Burgers, Command::Hierarchy, Command::SumBounds];

    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Covariance => "covariance",
            Command::LinearConverge => "linear-converge",
            Command::SecondChaos => "second-chaos",
            Command::Burgers => "burgers",
            Command::Hierarchy => "hierarchy",
            Command::SumBounds => "sum-bounds",
        }
    }
}

/// A named pass/fail check; `pass` is decided by the runner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Assertion { name: name.into(), value, threshold, pass: value < threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Assertion { name: name.into(), value, threshold, pass: value >= threshold }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Assertion { name: name.into(), value: ok as u8 as f64, threshold: 1.0, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: Command,
    pub version: String,
    pub seed: u64,
    /// Resolved configuration, loadable with `--config`.
    pub config_file: String,
    pub rerun: String,
    pub outputs: Vec<String>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    pub elapsed_seconds: f64,
}

impl Manifest {
    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.pass)
    }
}

struct Outcome {
    outputs: Vec<String>,
    assertions: Vec<Assertion>,
}

/// Runs `cmd`, writing its outputs, `config.toml` and `manifest.json` into `out`.
pub fn run(cmd: Command, cfg: &LabConfig, out: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(out)?;
    let start = std::time::Instant::now();
    let o = match cmd {
        Command::Constants => constants(cfg, out)?,
        Command::Covariance => covariance(cfg, out)?,
        Command::LinearConverge => linear(cfg, out)?,
        Command::SecondChaos => chaos(cfg, out)?,
        Command::Burgers => burgers(cfg, out)?,
        Command::Hierarchy => hierarchy(cfg, out)?,
        Command::SumBounds => sum_bounds(cfg, out)?,
    };
    std::fs::write(out.join("config.toml"), cfg.absolutized().to_toml()?)?;
    let m = Manifest {
        command: cmd,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_file: "config.toml".into(),
        rerun: format!("spde-lab {} --config {} --out {}", cmd.name(), out.join("config.toml").display(), out.display()),
        outputs: o.outputs,
        passed: o.assertions.iter().all(|a| a.pass),
        assertions: o.assertions,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join("manifest.json"), &m)?;
    Ok(m)
}

fn constants(cfg: &LabConfig, out: &Path) -> Result<Outcome> {
    let s = &cfg.constants;
    let spec = ConstantsSpec {
        scheme: cfg.scheme_spec()?,
        eps: s.eps.clone(),
        t: s.t,
        n: s.n,
        limits: s.limits,
        quad_tol: s.quad_tol,
        double_n: s.double_n,
        identified: s.identified,
    };
    let rep = exp_constants_table(&spec)?;
    write_csv(&out.join("constants.csv"), rep.rows.iter().map(ConstantCsvRow::from))?;
    write_json(&out.join("constants_checks.json"), &rep.checks)?;
    let assertions = rep.checks.iter().map(|c| Assertion { name: format!("{}@eps={}", c.name, c.eps), value: c.value, threshold: c.tol, pass: c.pass }).collect();
    Ok(Outcome { outputs: vec!["constants.csv".into(), "constants_checks.json".into()], assertions })
}

fn covariance(cfg: &LabConfig, out: &Path) -> Result<Outcome> {
    let s = &cfg.covariance;
    let lat = ModeLattice::new(s.n)?;
    let scheme = cfg.scheme_spec()?;
    let mut noise = NoiseSpec::new(cfg.seed, s.dt, cfg.t_end.max(s.dt), lat, scheme.clone())?;
    noise.identified = s.identified;
    let ks: Vec<WaveVector> = s.modes.iter().map(|&k| WaveVector(k)).collect();
    let mut lags = s.lags.clone();
    lags.sort_by(f64::total_cmp);
    let est = mc_covariance_all(&noise, &ks, &lags, s.samples)?;
    let reports = est
        .iter()
        .map(|e| Ok(CovarianceReport::new(e, &covariance_closed_form(&scheme, s.identified, WaveVector(e.k), e.lag, 0.0, e.pair, e.kind)?)))
        .collect::<Result<Vec<_>>>()?;
    write_json(&out.join("covariance.json"), &reports)?;
    let ok: usize = reports.iter().map(|r| r.within_3_sigma).sum();
    let frac = ok as f64 / (18 * reports.len()).max(1) as f64;

    // one trajectory on the stream after the Monte Carlo ones
    let mut ens = CoupledOUEnsemble::new(noise.clone(), s.samples as u64);
    ens.burn_in_stationary();
    let mut rows: Vec<TrajectoryCsvRow> = ens.trajectory_rows(&ks).iter().map(TrajectoryCsvRow::from).collect();
    for _ in 0..s.trajectory_steps {
        ens.step_linear(s.dt)?;
        rows.extend(ens.trajectory_rows(&ks).iter().map(TrajectoryCsvRow::from));
    }
    write_csv(&out.join("trajectory.csv"), rows)?;
    Ok(Outcome {
        outputs: vec!["covariance.json".into(), "trajectory.csv".into()],
        assertions: vec![Assertion::at_least("fraction_within_3_sigma", frac, s.min_fraction)],
    })
}

fn sweep_spec(cfg: &LabConfig, name: &str, s: &crate::config::SweepSection) -> Result<ExperimentSpec> {
    let spec = ExperimentSpec {
        name: name.into(),
        eps: s.eps.clone(),
        n: s.n.clone(),
        samples: s.samples,
        batches: s.batches,
        dt: cfg.dt,
        t_end: cfg.t_end,
        delta: s.delta,
        z: crate::lab::DEFAULT_Z,
        seed: cfg.seed,
        scheme: cfg.scheme_spec()?,
        identified: s.identified,
    };
    spec.validate()?;
    Ok(spec)
}

fn rate_assertions(prefix: &str, fit: &RateFit, min_slope: f64) -> Vec<Assertion> {
    vec![
        Assertion::flag(format!("{prefix}_decreasing_2sigma"), fit.strictly_decreasing(2.0)),
        Assertion::at_least(format!("{prefix}_slope"), fit.slope, min_slope),
    ]
}

fn linear(cfg: &LabConfig, out: &Path) -> Result<Outcome> {
    let fit = exp_linear_convergence(&sweep_spec(cfg, "linear", &cfg.linear)?)?;
    write_csv(&out.join("linear_convergence.csv"), &fit.points)?;
    write_json(&out.join("linear_fit.json"), &fit)?;
    Ok(Outcome { outputs: vec!["linear_convergence.csv".into(), "linear_fit.json".into()], assertions: rate_assertions("linear", &fit, cfg.linear.min_slope) })
}

fn chaos(cfg: &LabConfig, out: &Path) -> Result<Outcome> {
    let rep = exp_second_chaos(&sweep_spec(cfg, "second_chaos", &cfg.chaos)?)?;
    write_csv(&out.join("second_chaos.csv"), SweepPoint::table(&rep))?;
    write_json(&out.join("second_chaos.json"), &rep)?;
    let mut a = rate_assertions("wick", &rep.renormalized, cfg.chaos.min_slope);
    a.push(Assertion::below("ablation_slope", rep.ablation.slope, cfg.chaos.plateau_slope));
    Ok(Outcome { outputs: vec!["second_chaos.csv".into(), "second_chaos.json".into()], assertions: a })
}

#[derive(Serialize)]
struct BurgersRow {
    stencil: crate::lab::BurgersStencil,
    eps: f64,
    error: f64,
}

fn burgers(cfg: &LabConfig, out: &Path) -> Result<Outcome> {
    let s = &cfg.burgers;
    let (mut rows, mut fits, mut assertions) = (Vec::new(), Vec::new(), Vec::new());
    for &stencil in &s.stencils {
        let spec = BurgersSpec { eps: s.eps.clone(), stencil, nu: s.nu, amp: s.amp, t_end: s.t_end, ref_modes: s.ref_modes, ref_tol: s.ref_tol };
        let fit = exp_burgers(&spec)?;
        rows.extend(fit.points.iter().map(|p| BurgersRow { stencil, eps: p.eps, error: p.value }));
        let (lo, hi) = stencil.expected_order();
        let name = stencil.name();
        assertions.push(Assertion::flag(format!("{name}_error_decreasing"), fit.strictly_decreasing(0.0)));
        assertions.push(Assertion { name: format!("{name}_order"), value: fit.slope, threshold: lo, pass: (lo..=hi).contains(&fit.slope) });
        fits.push((stencil, fit));
    }
    write_csv(&out.join("burgers.csv"), rows)?;
    write_json(&out.join("burgers_fits.json"), &fits)?;
    Ok(Outcome { outputs: vec!["burgers.csv".into(), "burgers_fits.json".into()], assertions })
}

/// Run manifest of the `hierarchy` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyManifest {
    pub scheme: crate::schemes::SchemeSpec,
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub seed: u64,
    pub which: Which,
    pub z: f64,
    pub times: Vec<f64>,
    /// `norms[level][time]` in `C^{−z}`, levels 1 to 4.
    pub norms: Vec<Vec<f64>>,
    pub picard_increments: Vec<f64>,
    /// One-step residuals of levels 2, 3 and K.
    pub residuals: [f64; 3],
    pub snapshots: Vec<Snapshot>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub path: String,
}

/// Container of the assembled state (u1..b3) and each level (`y1.u1`, …).
pub fn hierarchy_snapshot(levels: &[&MhdPair], total: &MhdPair) -> Result<FieldContainer> {
    let mut names = Vec::new();
    let mut comps = Vec::new();
    let mut push = |prefix: &str, p: &MhdPair| {
        for (f, v) in [("u", &p.u), ("b", &p.b)] {
            for (c, s) in v.comps.iter().enumerate() {
                names.push(format!("{prefix}{f}{}", c + 1));
                comps.push(s.clone());
            }
        }
    };
    push("", total);
    for (l, p) in levels.iter().enumerate() {
        push(&format!("y{}.", l + 1), p);
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let fields: Vec<_> = comps.iter().collect();
    FieldContainer::from_scalars(&refs, &fields)
}

fn hierarchy(cfg: &LabConfig, out: &Path) -> Result<Outcome> {
    let h = &cfg.hierarchy;
    let lat = ModeLattice::new(h.n)?;
    let scheme = cfg.scheme_spec()?;
    let solver = SolverConfig { dt: h.dt, t_end: h.t_end, picard_max_iter: h.picard_max_iter, tol: h.tol, z: h.z, dealias: h.dealias, renormalize: h.renormalize };
    solver.validate()?;
    let mut noise = NoiseSpec::new(cfg.seed, h.dt, h.t_end, lat, scheme.clone())?;
    noise.identified = h.identified;
    let linear = Trajectory::sample_linear(&noise, h.which, h.stationary, 0)?;
    let y0 = match &h.initial {
        Some(p) => {
            let path = if p.is_absolute() { p.clone() } else { cfg.base_dir.join(p) };
            let c = FieldContainer::load(&path)?;
            if c.n != h.n {
                return Err(LabError::LatticeMismatch { left: c.n, right: h.n });
            }
            c.to_pair()?.leray()
        }
        None => taylor_green(lat, h.amp_u, h.amp_b)?,
    };
    let run = run_hierarchy(&linear, &y0, &scheme, &solver, h.which)?;
    let snap_dir = out.join("snapshots");
    std::fs::create_dir_all(&snap_dir)?;
    let last = run.times.len() - 1;
    let every = h.snapshot_every.max(1);
    let mut snapshots = Vec::new();
    for n in (0..=last).filter(|n| n % every == 0 || *n == last) {
        let st = run.state(n);
        let c = hierarchy_snapshot(&st.levels.iter().collect::<Vec<_>>(), &run.assembled(n))?;
        let name = format!("snapshots/step_{n:05}.bin");
        c.save(&out.join(&name))?;
        snapshots.push(Snapshot { t: run.times[n], path: name });
    }
    let manifest = HierarchyManifest {
        scheme: scheme.clone(),
        n: h.n,
        dt: h.dt,
        t_end: h.t_end,
        seed: cfg.seed,
        which: h.which,
        z: h.z,
        times: run.times.clone(),
        norms: run.norms(h.z)?,
        picard_increments: run.picard.increments.clone(),
        residuals: run.residuals,
        snapshots,
    };
    write_json(&out.join("hierarchy_manifest.json"), &manifest)?;
    let mut a = vec![
        Assertion::flag("picard_converged", run.picard.converged),
        Assertion::below("divergence_defect", run.assembled(last).divergence_defect(), 1e-12),
    ];
    a.extend(hierarchy_sanity(&scheme, lat, &solver, h.amp_u, h.amp_b)?);
    Ok(Outcome { outputs: vec!["hierarchy_manifest.json".into(), "snapshots/".into()], assertions: a })
}

/// Zero-noise continuum run (divergence, energy) and the residual ratio of
/// level 2 on a smooth path under dt halving.
pub fn hierarchy_sanity(scheme: &crate::schemes::SchemeSpec, lat: ModeLattice, cfg: &SolverConfig, amp_u: f64, amp_b: f64) -> Result<Vec<Assertion>> {
    let zero = Trajectory::zeros(lat, cfg.times()?);
    let det = run_hierarchy(&zero, &taylor_green(lat, 2.0 * amp_u, 2.0 * amp_b)?, scheme, cfg, Which::Continuum)?;
    let energies: Vec<f64> = (0..det.times.len()).map(|n| det.assembled(n).energy()).collect();
    let div = (0..det.times.len()).map(|n| det.assembled(n).divergence_defect()).fold(0.0, f64::max);
    let rise = energies.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let path = |dt: f64| -> Result<f64> {
        let c = SolverConfig { dt, ..*cfg };
        let lin = Trajectory::from_fn(c.times()?, |t| taylor_green(lat, amp_u * (1.0 + t), amp_b * (1.0 - t)).expect("lattice"));
        Ok(solve_level2(&lin, scheme, &c, Which::Approx)?.residual)
    };
    let ratio = path(cfg.dt)? / path(cfg.dt / 2.0)?;
    Ok(vec![
        Assertion::below("zero_noise_divergence", div, 1e-12),
        Assertion::flag("zero_noise_energy_nonincreasing", rise <= 1e-12 * energies[0]),
        Assertion { name: "residual_halving_ratio".into(), value: ratio, threshold: 2.0, pass: (1.4..=2.6).contains(&ratio) },
        Assertion::flag("picard_zero_noise_converged", det.picard.converged),
    ])
}

#[derive(Serialize)]
struct SumCsvRow {
    k1: i32,
    k2: i32,
    k3: i32,
    radius: usize,
    sum: f64,
    ratio: f64,
}

fn sum_bounds(cfg: &LabConfig, out: &Path) -> Result<Outcome> {
    let s = &cfg.sum_bounds;
    let ks: Vec<WaveVector> = s.ks.iter().map(|&k| WaveVector(k)).collect();
    let rep = exp_sum_bound(s.l, s.m, &ks, &s.radii, &s.rs)?;
    write_csv(&out.join("sum_bounds.csv"), rep.rows.iter().map(|r| SumCsvRow { k1: r.k[0], k2: r.k[1], k3: r.k[2], radius: r.radius, sum: r.sum, ratio: r.ratio }))?;
    write_json(&out.join("sum_bounds.json"), &rep)?;
    let mut a = vec![Assertion::below("ratio_spread", rep.ratio_spread, s.max_spread)];
    for k in &rep.key {
        a.push(Assertion::below(format!("key_estimate_r={}", k.r), k.rel_err, 1e-10));
    }
    a.push(Assertion::flag("rejects_l_plus_m_le_3", lattice_sum(WaveVector::new(1, 0, 0), 1.5, 1.5, 4).is_err()));
    Ok(Outcome { outputs: vec!["sum_bounds.csv".into(), "sum_bounds.json".into()], assertions: a })
}
