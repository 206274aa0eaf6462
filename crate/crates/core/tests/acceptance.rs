//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=1,3,8` runs a subset. The process exits 0 after printing
//! every line so the workspace test run completes; set `ACCEPTANCE_STRICT=1` to
//! exit nonzero when any criterion fails.

use std::time::Instant;

use spde_lab::bony::Bony;
use spde_lab::commands::hierarchy_sanity;
use spde_lab::fields::{covariance_closed_form, fraction_within, mc_covariance_all, NoiseSpec};
use spde_lab::hierarchy::{run_hierarchy, taylor_green, SolverConfig, Trajectory, Which};
use spde_lab::lab::{
    exp_burgers, exp_constants_table, exp_linear_convergence, exp_second_chaos, exp_sum_bound, lattice_sum, saturating_n, BurgersSpec,
    BurgersStencil, ConstantsSpec, ExperimentSpec,
};
use spde_lab::schemes::{leray_project_unchecked, FKind, HKind, SchemeSpec};
use spde_lab::torus_spectral::{dft_forward, DyadicPartition, ModeLattice, ScalarFourierField, SpectralGrid, VectorFourierField, WaveVector, C64};
use spde_lab::wick_renorm::{c13_identity_residual, const_ck, const_ck_tilde, const_limit_quadrature, DoubleSumConfig, LimitFamily};
use spde_lab::Result;

type Verdict = Result<(bool, String)>;

/// FD scheme with a = 1, b = 0 at ε.
fn asym(eps: f64) -> SchemeSpec {
    SchemeSpec::finite_difference(eps).with_ab(1.0, 0.0).expect("valid scheme")
}

fn pseudo_field(lat: ModeLattice, seed: u64) -> ScalarFourierField {
    let mut s = seed as f64 * 0.618 + 0.1;
    let mut f = ScalarFourierField::from_fn(lat, |k| {
        s = (s * 997.0 + 0.31).fract();
        let r = (s - 0.5) / (1.0 + k.norm2());
        s = (s * 991.0 + 0.17).fract();
        C64::new(r, (s - 0.5) / (1.0 + k.norm2()))
    });
    f.symmetrize_reality();
    f
}

fn c1_spectral() -> Verdict {
    let lat = ModeLattice::new(8)?;
    let unity = DyadicPartition::new(lat).unity_defect();
    let (u, f) = (pseudo_field(lat, 1), pseudo_field(lat, 2));
    let bony = Bony::new(lat);
    let bony_res = bony.decompose(&u, &f)?.sum().max_abs_diff(&bony.product(&u, &f)?);
    let v = VectorFourierField::new([pseudo_field(lat, 3), pseudo_field(lat, 4), pseudo_field(lat, 5)])?;
    let p = leray_project_unchecked(&v);
    let leray = leray_project_unchecked(&p).max_abs_diff(&p);
    let grid = SpectralGrid::new(lat);
    let samples = grid.inverse(&u)?;
    let dft = grid.forward(&samples)?.max_abs_diff(&u).max(dft_forward(lat, &samples)?.max_abs_diff(&u));
    let ok = unity < 1e-12 && bony_res < 1e-10 && leray < 1e-14 && dft < 1e-10;
    Ok((ok, format!("unity {unity:.1e} (<1e-12), Bony {bony_res:.1e} (<1e-10), Leray {leray:.1e} (<1e-14), DFT {dft:.1e} (<1e-10)")))
}

fn c2_covariance() -> Verdict {
    let scheme = asym(0.125);
    let noise = NoiseSpec::new(2024, 0.01, 1.0, ModeLattice::new(8)?, scheme.clone())?;
    let ks = [WaveVector::new(1, 0, 0), WaveVector::new(1, 1, 0), WaveVector::new(2, 1, 1), WaveVector::new(3, 2, 0)];
    let est = mc_covariance_all(&noise, &ks, &[0.0, 0.05], 10_000)?;
    let (mut ok, mut total) = (0, 0);
    for e in &est {
        let exact = covariance_closed_form(&scheme, true, WaveVector(e.k), e.lag, 0.0, e.pair, e.kind)?;
        let (a, b) = fraction_within(e, &exact, 3.0);
        ok += a;
        total += b;
    }
    let frac = ok as f64 / total as f64;
    Ok((frac >= 0.95, format!("{ok}/{total} scalars within 3 SE = {:.1}% (>= 95%), {} (k, pair, kind, lag) cases", 100.0 * frac, est.len())))
}

fn c3_constants() -> Verdict {
    let rep = exp_constants_table(&ConstantsSpec::new(asym(0.125), vec![0.125], 1.0))?;
    let detail: Vec<String> = rep.checks.iter().map(|c| format!("{} {:.1e} (<{:.0e})", c.name, c.value, c.tol)).collect();
    Ok((rep.all_pass(), detail.join(", ")))
}

fn c4_limit() -> Verdict {
    let spec = asym(1.0 / 32.0);
    let lat = ModeLattice::new(saturating_n(&spec))?;
    let mut worst = 0.0f64;
    for fam in LimitFamily::ALL {
        let lim = const_limit_quadrature(fam, &spec, 1e-4)?;
        let (tilde, flavor) = fam.lattice_family();
        let lat_val = if tilde { const_ck_tilde(2, flavor, 1.0, &spec, lat)? } else { const_ck(2, flavor, 1.0, &spec, lat)? };
        worst = worst.max(lat_val.max_abs_diff(&lim) / lim.max_abs());
    }
    Ok((worst < 0.02, format!("max relative gap {:.3}% over the four limit families at N = {} (< 2%)", 100.0 * worst, lat.n())))
}

fn c5_c131() -> Verdict {
    let spec = SchemeSpec::new(FKind::FiniteDifference, 1.0, 0.0, 6.0, HKind::SmoothBump { lbar: 2.0 }, HKind::Indicator, 1.0)?;
    let r = c13_identity_residual(1, 1.0, &spec, ModeLattice::new(4)?, &DoubleSumConfig::default())?;
    Ok((r < 1e-10, format!("residual {r:.2e} (< 1e-10)")))
}

fn sweep(name: &str) -> Result<ExperimentSpec> {
    Ok(ExperimentSpec { seed: 2024, ..ExperimentSpec::new(name, vec![0.25, 0.125, 0.0625], 16, 512, asym(0.25))? })
}

fn fmt_points(p: &[spde_lab::lab::RatePoint]) -> String {
    p.iter().map(|p| format!("{:.3e}±{:.1e}", p.value, p.sigma)).collect::<Vec<_>>().join(", ")
}

fn c6_linear() -> Verdict {
    let fit = exp_linear_convergence(&sweep("linear")?)?;
    let dec = fit.strictly_decreasing(2.0);
    Ok((dec && fit.slope >= 0.2, format!("means [{}], decreasing(2σ) {dec}, slope {:.3} (>= 0.2)", fmt_points(&fit.points), fit.slope)))
}

fn c7_chaos() -> Verdict {
    let rep = exp_second_chaos(&sweep("second_chaos")?)?;
    let dec = rep.renormalized.strictly_decreasing(2.0);
    let (s, a) = (rep.renormalized.slope, rep.ablation.slope);
    let gaps: Vec<String> = rep.saturated_constant_gap.iter().map(|p| format!("{:.3e}", p.value)).collect();
    Ok((
        dec && s >= 0.2 && a < 0.05,
        format!(
            "Wick [{}] decreasing(2σ) {dec}, slope {s:.3} (>= 0.2); ablation [{}] slope {a:.3} (< 0.05); saturated |C03 - C03bar| [{}]",
            fmt_points(&rep.renormalized.points),
            fmt_points(&rep.ablation.points),
            gaps.join(", ")
        ),
    ))
}

fn c8_burgers() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for st in [BurgersStencil::OneSided, BurgersStencil::Central] {
        let fit = exp_burgers(&BurgersSpec::new(st))?;
        let (lo, hi) = st.expected_order();
        let good = fit.strictly_decreasing(0.0) && (lo..=hi).contains(&fit.slope);
        ok &= good;
        parts.push(format!("{} order {:.3} in [{lo}, {hi}]", st.name(), fit.slope));
    }
    Ok((ok, parts.join(", ")))
}

fn c9_hierarchy() -> Verdict {
    let lat = ModeLattice::new(4)?;
    let scheme = asym(0.25);
    let cfg = SolverConfig::default();
    let mut noise = NoiseSpec::new(2024, cfg.dt, cfg.t_end, lat, scheme.clone())?;
    noise.identified = false;
    let linear = Trajectory::sample_linear(&noise, Which::Approx, true, 0)?;
    let run = run_hierarchy(&linear, &taylor_green(lat, 1.0, 0.5)?, &scheme, &cfg, Which::Approx)?;
    let mut checks = hierarchy_sanity(&scheme, lat, &cfg, 1.0, 0.5)?;
    let last = run.picard.increments.last().copied().unwrap_or(0.0);
    checks.push(spde_lab::commands::Assertion::flag("picard_converged", run.picard.converged && last < cfg.tol));
    let ok = checks.iter().all(|a| a.pass);
    let detail: Vec<String> = checks.iter().map(|a| format!("{} {:.3e}", a.name, a.value)).collect();
    Ok((ok, format!("{}; last Picard increment {last:.1e} after {} iterations", detail.join(", "), run.picard.increments.len())))
}

fn c10_sums() -> Verdict {
    let rep = exp_sum_bound(2.0, 2.0, &[WaveVector::new(1, 0, 0), WaveVector::new(4, 0, 0)], &[24, 48], &[0.5, 1.0, 2.0, 4.0])?;
    let key = rep.key.iter().map(|k| k.rel_err).fold(0.0, f64::max);
    let rejects = lattice_sum(WaveVector::new(1, 0, 0), 1.5, 1.5, 4).is_err() && lattice_sum(WaveVector::new(1, 0, 0), 1.0, 2.0, 4).is_err();
    let ok = rep.ratio_spread < 2.0 && key < 1e-10 && rejects;
    Ok((ok, format!("ratio spread {:.4} (< 2), key estimate rel err {key:.1e} (< 1e-10), rejects l+m-3 <= 0 {rejects}", rep.ratio_spread)))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [(usize, &str, f64, fn() -> Verdict); 10] = [
        (1, "spectral identities", 10.0, c1_spectral),
        (2, "covariance reproduction", 120.0, c2_covariance),
        (3, "constant algebra", 60.0, c3_constants),
        (4, "limit reproduction", 300.0, c4_limit),
        (5, "C131 identity", 180.0, c5_c131),
        (6, "linear-level convergence", 600.0, c6_linear),
        (7, "second-chaos convergence", 900.0, c7_chaos),
        (8, "Burgers order", 60.0, c8_burgers),
        (9, "hierarchy sanity", 300.0, c9_hierarchy),
        (10, "sum bounds and key estimate", 30.0, c10_sums),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let verdict = f();
        let secs = t0.elapsed().as_secs_f64();
        let (ok, detail) = match verdict {
            Ok((ok, d)) => (ok && secs < budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !ok as usize;
        println!("{} criterion {id} ({name}): {detail}; {secs:.1} s (budget {budget:.0} s)", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {failed} criterion(s) failed");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
