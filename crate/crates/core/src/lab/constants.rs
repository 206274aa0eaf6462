use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::schemes::{Flavor, SchemeSpec};
use crate::torus_spectral::ModeLattice;
use crate::wick_renorm::{
    c13_block, c22_family, ck_all, const_c0, const_c34, const_ck, const_ck_tilde, const_limit_quadrature, ConstantRow, ConstantTensor,
    DoubleSumConfig, LimitFamily,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsSpec {
    pub scheme: SchemeSpec,
    pub eps: Vec<f64>,
    pub t: f64,
    /// Lattice for the single sums; by default the smallest one containing the cutoff support.
    pub n: Option<usize>,
    /// Attach quadrature limits to the C₂-type rows.
    pub limits: bool,
    pub quad_tol: f64,
    /// Lattice for C₂₂ and the C₁₃ blocks; omitted when `None`.
    pub double_n: Option<usize>,
    pub identified: bool,
}

impl ConstantsSpec {
    pub fn new(scheme: SchemeSpec, eps: Vec<f64>, t: f64) -> Self {
        ConstantsSpec { scheme, eps, t, n: None, limits: false, quad_tol: 1e-4, double_n: None, identified: true }
    }

    pub fn lattice_for(&self, eps: f64) -> Result<ModeLattice> {
        let n = self.n.unwrap_or_else(|| saturating_n(&self.scheme.with_eps(eps)));
        ModeLattice::new(n)
    }
}

/// Smallest N whose lattice holds every mode with `h(εk) ≠ 0`.
pub fn saturating_n(spec: &SchemeSpec) -> usize {
    (spec.h_support() / spec.eps).floor().max(1.0) as usize
}

/// A named pass/fail check on the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantCheck {
    pub name: String,
    pub eps: f64,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ConstantCheck {
    fn below(name: &str, eps: f64, value: f64, tol: f64) -> Self {
        ConstantCheck { name: name.to_string(), eps, value, tol, pass: value < tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub rows: Vec<ConstantRow>,
    pub checks: Vec<ConstantCheck>,
}

impl ConstantsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Largest violation of the equalities between the C and C̃ families.
pub fn relation_residual(t: f64, spec: &SchemeSpec, lattice: ModeLattice) -> Result<f64> {
    use Flavor::{B, U};
    let c = |k, f| const_ck(k, f, t, spec, lattice);
    let ct = |k, f| const_ck_tilde(k, f, t, spec, lattice);
    let pairs: [(ConstantTensor, ConstantTensor, f64); 9] = [
        (c(1, U)?, c(4, B)?, 1.0),
        (c(1, B)?, c(4, U)?, 1.0),
        (c(2, U)?, c(3, B)?, 1.0),
        (c(3, U)?, c(2, B)?, 1.0),
        (ct(1, U)?, ct(4, B)?, -1.0),
        (ct(2, U)?, ct(3, B)?, -1.0),
        (ct(1, B)?, ct(2, B)?, 1.0),
        (ct(2, B)?, ct(3, U)?, -1.0),
        (ct(3, U)?, ct(4, U)?, 1.0),
    ];
    Ok(pairs.iter().map(|(a, b, s)| a.max_abs_diff(&b.scaled(*s))).fold(0.0, f64::max))
}

fn limit_family(tilde: bool, flavor: Flavor) -> LimitFamily {
    match (tilde, flavor) {
        (false, Flavor::U) => LimitFamily::C2u,
        (false, Flavor::B) => LimitFamily::C2b,
        (true, Flavor::U) => LimitFamily::C2uTilde,
        (true, Flavor::B) => LimitFamily::C2bTilde,
    }
}

/// One row per (family, indices, ε) with the algebraic checks of each ε.
pub fn exp_constants_table(spec: &ConstantsSpec) -> Result<ConstantsReport> {
    if spec.eps.is_empty() || !(spec.t >= 0.0) {
        return Err(LabError::InvalidArgument("need a nonempty ε schedule and t >= 0".into()));
    }
    let limits: Vec<(LimitFamily, ConstantTensor)> = if spec.limits {
        LimitFamily::ALL.iter().map(|&f| const_limit_quadrature(f, &spec.scheme, spec.quad_tol).map(|c| (f, c))).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let (mut rows, mut checks) = (Vec::new(), Vec::new());
    let mut limit_gaps: Vec<f64> = Vec::new();
    for &eps in &spec.eps {
        let scheme = spec.scheme.with_eps(eps);
        let lat = spec.lattice_for(eps)?;
        for which in 1..=3 {
            for bar in [false, true] {
                rows.extend(const_c0(which, bar, spec.identified, &scheme, lat)?.rows(None));
            }
        }
        let approx = ck_all(false, spec.t, &scheme, lat)?;
        let bars = ck_all(true, spec.t, &scheme, lat)?;
        let mut imag = 0.0f64;
        for c in &approx {
            let crate::wick_renorm::ConstFamily::C { k, tilde, .. } = c.family else { continue };
            let lim = (k == 2).then(|| limits.iter().find(|(f, _)| *f == limit_family(tilde, c.flavor.expect("flavored"))).map(|l| &l.1)).flatten();
            if let Some(l) = lim {
                if !tilde && c.flavor == Some(Flavor::U) {
                    limit_gaps.push(c.max_abs_diff(l));
                }
            }
            rows.extend(c.rows(lim));
            imag = imag.max(c.imag_residue());
        }
        let mut bar_max = 0.0f64;
        for c in &bars {
            rows.extend(c.rows(None));
            bar_max = bar_max.max(c.max_abs());
            imag = imag.max(c.imag_residue());
        }
        let c34 = const_c34(spec.t, &scheme, lat)?;
        imag = imag.max(c34.imag_residue());
        rows.extend(c34.rows(None));
        checks.push(ConstantCheck::below("relations", eps, relation_residual(spec.t, &scheme, lat)?, 1e-12));
        checks.push(ConstantCheck::below("bars", eps, bar_max, 1e-12));
        checks.push(ConstantCheck::below("imag_residue", eps, imag, 1e-10));
        let wider = ck_all(false, spec.t, &scheme, ModeLattice::new(lat.n() + 2)?)?;
        let sat = approx.iter().zip(&wider).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
        checks.push(ConstantCheck::below("saturation", eps, sat, 1e-12));
        if let Some(dn) = spec.double_n {
            let dlat = ModeLattice::new(dn)?;
            let cfg = DoubleSumConfig::default();
            let c22 = c22_family(spec.t, &scheme, dlat, &cfg)?;
            for c in [&c22.c, &c22.c_bar, &c22.phi, &c22.phi_bar] {
                rows.extend(c.rows(None));
            }
            for block in 1..=4 {
                let b = c13_block(block, spec.t, &scheme, dlat, &cfg)?;
                for c in [&b.c, &b.c_bar, &b.phi, &b.phi_bar] {
                    rows.extend(c.rows(None));
                }
            }
        }
    }
    if limit_gaps.len() >= 2 {
        let decreasing = limit_gaps.windows(2).all(|w| w[1] < w[0]);
        let last = *limit_gaps.last().expect("nonempty");
        checks.push(ConstantCheck { name: "limit_gap_decreasing".into(), eps: *spec.eps.last().expect("nonempty"), value: last, tol: limit_gaps[0], pass: decreasing });
    }
    Ok(ConstantsReport { rows, checks })
}
