//! TOML run configuration. `[scheme]` carries the approximation data, the other
//! sections hold the parameters of each experiment. Missing keys take defaults,
//! unknown keys are rejected.
//!
//! ```toml
//! seed = 2024
//! [scheme]
//! f_kind = "finite_difference"   # galerkin | table (then f_table = "f.csv")
//! a = 1.0
//! b = 0.0
//! L0 = 6.0
//! h_kind = "smooth_bump"         # indicator | table (then h_table = "h.csv")
//! eps = 0.125
//! ```
//!
//! Table CSVs have the header `r,value`; relative paths resolve against the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hierarchy::Which;
use crate::lab::{BurgersStencil, DEFAULT_DELTA, DEFAULT_Z};
use crate::schemes::{FKind, HKind, RadialTable, SchemeSpec, DEFAULT_L0, DEFAULT_LBAR0};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub f_kind: String,
    pub f_table: Option<PathBuf>,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub h_kind: String,
    pub h_table: Option<PathBuf>,
    /// Plateau radius of the smooth bump.
    pub lbar: f64,
    /// Separate magnetic cutoff; the velocity one is reused when absent.
    pub h_kind_b: Option<String>,
    pub h_table_b: Option<PathBuf>,
    pub eps: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            f_kind: "finite_difference".into(),
            f_table: None,
            a: 1.0,
            b: 1.0,
            l0: DEFAULT_L0,
            h_kind: "smooth_bump".into(),
            h_table: None,
            lbar: DEFAULT_LBAR0,
            h_kind_b: None,
            h_table_b: None,
            eps: 0.125,
        }
    }
}

#[derive(Debug, Deserialize)]
struct TableRow {
    r: f64,
    value: f64,
}

/// Reads a `r,value` CSV into a radial table.
pub fn load_radial_table(path: &Path) -> Result<RadialTable> {
    let rows: Vec<TableRow> = crate::io::read_csv(path)?;
    RadialTable::new(rows.iter().map(|r| r.r).collect(), rows.iter().map(|r| r.value).collect())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl SchemeConfig {
    fn table(&self, base: &Path, path: &Option<PathBuf>, key: &str) -> Result<RadialTable> {
        let p = path.as_ref().ok_or_else(|| LabError::Config(format!("scheme.{key} is required for a table kind")))?;
        load_radial_table(&resolve(base, p))
    }

    fn h(&self, base: &Path, kind: &str, table: &Option<PathBuf>, key: &str) -> Result<HKind> {
        match kind {
            "indicator" => Ok(HKind::Indicator),
            "smooth_bump" => Ok(HKind::SmoothBump { lbar: self.lbar }),
            "table" => Ok(HKind::Table(self.table(base, table, key)?)),
            other => Err(LabError::Config(format!("unknown h_kind {other:?} (indicator, smooth_bump, table)"))),
        }
    }

    /// Builds the scheme; `base` is the directory holding the config file.
    pub fn to_spec(&self, base: &Path) -> Result<SchemeSpec> {
        let f = match self.f_kind.as_str() {
            "finite_difference" => FKind::FiniteDifference,
            "galerkin" => FKind::Galerkin,
            "table" => FKind::Table(self.table(base, &self.f_table, "f_table")?),
            other => return Err(LabError::Config(format!("unknown f_kind {other:?} (finite_difference, galerkin, table)"))),
        };
        let h_u = self.h(base, &self.h_kind, &self.h_table, "h_table")?;
        let h_b = match &self.h_kind_b {
            Some(k) => self.h(base, k, &self.h_table_b, "h_table_b")?,
            None => h_u.clone(),
        };
        SchemeSpec::new(f, self.a, self.b, self.l0, h_u, h_b, self.eps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub eps: Vec<f64>,
    pub t: f64,
    pub n: Option<usize>,
    pub limits: bool,
    pub quad_tol: f64,
    pub double_n: Option<usize>,
    pub identified: bool,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        ConstantsSection { eps: vec![0.125], t: 1.0, n: None, limits: false, quad_tol: 1e-4, double_n: None, identified: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceSection {
    pub n: usize,
    pub samples: usize,
    pub dt: f64,
    pub modes: Vec<[i32; 3]>,
    /// Time lags `t − s >= 0`; each is evaluated for every pair and kind.
    pub lags: Vec<f64>,
    pub identified: bool,
    /// Steps of sample 0 exported to the trajectory CSV.
    pub trajectory_steps: usize,
    /// Least fraction of scalars within 3σ for `--assert`.
    pub min_fraction: f64,
}

impl Default for CovarianceSection {
    fn default() -> Self {
        CovarianceSection {
            n: 8,
            samples: 10_000,
            dt: 1e-2,
            modes: vec![[1, 0, 0], [1, 1, 0], [2, 1, 1]],
            lags: vec![0.0, 0.05],
            identified: true,
            trajectory_steps: 20,
            min_fraction: 0.95,
        }
    }
}

/// Monte Carlo ε-sweep of the linear level or of the second chaos.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
    pub samples: usize,
    pub batches: usize,
    pub delta: f64,
    pub identified: bool,
    pub min_slope: f64,
    /// Largest ablation slope counted as a plateau (second chaos only).
    pub plateau_slope: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            eps: vec![0.25, 0.125, 0.0625],
            n: vec![16],
            samples: 512,
            batches: 32,
            delta: DEFAULT_DELTA,
            identified: true,
            min_slope: 0.2,
            plateau_slope: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BurgersSection {
    pub eps: Vec<f64>,
    pub stencils: Vec<BurgersStencil>,
    pub nu: f64,
    pub amp: f64,
    pub t_end: f64,
    pub ref_modes: usize,
    pub ref_tol: f64,
}

impl Default for BurgersSection {
    fn default() -> Self {
        BurgersSection {
            eps: vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0],
            stencils: vec![BurgersStencil::OneSided, BurgersStencil::Central],
            nu: 1.0,
            amp: 1.0,
            t_end: 0.5,
            ref_modes: 64,
            ref_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierarchySection {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub which: Which,
    /// Start the linear level from its stationary law.
    pub stationary: bool,
    pub identified: bool,
    /// Field container with components u1..b3; Taylor–Green data when absent.
    pub initial: Option<PathBuf>,
    pub amp_u: f64,
    pub amp_b: f64,
    pub renormalize: bool,
    pub dealias: bool,
    pub picard_max_iter: usize,
    pub tol: f64,
    pub z: f64,
    /// Snapshot every this many steps; the last step is always written.
    pub snapshot_every: usize,
}

impl Default for HierarchySection {
    fn default() -> Self {
        HierarchySection {
            n: 4,
            dt: 2.5e-3,
            t_end: 0.05,
            which: Which::Approx,
            stationary: true,
            identified: false,
            initial: None,
            amp_u: 1.0,
            amp_b: 0.5,
            renormalize: true,
            dealias: true,
            picard_max_iter: 60,
            tol: 1e-10,
            z: DEFAULT_Z,
            snapshot_every: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SumBoundsSection {
    pub l: f64,
    pub m: f64,
    pub ks: Vec<[i32; 3]>,
    pub radii: Vec<usize>,
    pub rs: Vec<f64>,
    /// Largest accepted max/min ratio over `ks`.
    pub max_spread: f64,
}

impl Default for SumBoundsSection {
    fn default() -> Self {
        SumBoundsSection { l: 2.0, m: 2.0, ks: vec![[1, 0, 0], [4, 0, 0]], radii: vec![24, 48], rs: vec![0.5, 1.0, 2.0, 4.0], max_spread: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub seed: u64,
    /// Simulation time step and horizon of the Monte Carlo sweeps.
    pub dt: f64,
    pub t_end: f64,
    pub scheme: SchemeConfig,
    pub constants: ConstantsSection,
    pub covariance: CovarianceSection,
    pub linear: SweepSection,
    pub chaos: SweepSection,
    pub burgers: BurgersSection,
    pub hierarchy: HierarchySection,
    pub sum_bounds: SumBoundsSection,
    /// Directory that relative table paths resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            seed: 2024,
            dt: 1e-2,
            t_end: 1.0,
            scheme: SchemeConfig { b: 0.0, ..SchemeConfig::default() },
            constants: ConstantsSection::default(),
            covariance: CovarianceSection::default(),
            linear: SweepSection::default(),
            chaos: SweepSection::default(),
            burgers: BurgersSection::default(),
            hierarchy: HierarchySection::default(),
            sum_bounds: SumBoundsSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl LabConfig {
    pub fn from_toml(s: &str, base_dir: &Path) -> Result<Self> {
        let mut c: LabConfig = toml::from_str(s).map_err(|e| LabError::Config(e.to_string()))?;
        c.base_dir = base_dir.to_path_buf();
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&s, &base)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn scheme_spec(&self) -> Result<SchemeSpec> {
        self.scheme.to_spec(&self.base_dir)
    }

    /// Copy with table paths made absolute, so the serialized form loads from anywhere.
    pub fn absolutized(&self) -> Self {
        let mut c = self.clone();
        let base = std::fs::canonicalize(&self.base_dir).unwrap_or_else(|_| self.base_dir.clone());
        for p in [&mut c.scheme.f_table, &mut c.scheme.h_table, &mut c.scheme.h_table_b, &mut c.hierarchy.initial].into_iter().flatten() {
            *p = resolve(&base, p);
        }
        c.base_dir = base;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = LabConfig::default();
        let back = LabConfig::from_toml(&c.to_toml().unwrap(), Path::new(".")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn scheme_keys_build_the_spec() {
        let c = LabConfig::from_toml("[scheme]\nf_kind = \"galerkin\"\na = 1.0\nb = 0.0\nL0 = 4.0\nh_kind = \"indicator\"\neps = 0.25\n", Path::new(".")).unwrap();
        let s = c.scheme_spec().unwrap();
        assert_eq!((s.f_kind.clone(), s.a, s.b, s.l0, s.h_u.clone(), s.eps), (FKind::Galerkin, 1.0, 0.0, 4.0, HKind::Indicator, 0.25));
        assert!(LabConfig::from_toml("[scheme]\nbogus = 1\n", Path::new(".")).is_err());
        assert!(LabConfig::from_toml("[scheme]\nf_kind = \"spline\"\n", Path::new(".")).unwrap().scheme_spec().is_err());
    }

    #[test]
    fn table_kinds_load_from_csv() {
        let dir = std::env::temp_dir().join(format!("spde_cfg_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("h.csv"), "r,value\n0,1\n1,1\n2.5,0\n").unwrap();
        std::fs::write(dir.join("f.csv"), "r,value\n0,1\n10,0.5\n").unwrap();
        let text = "[scheme]\nf_kind = \"table\"\nf_table = \"f.csv\"\nh_kind = \"table\"\nh_table = \"h.csv\"\n";
        let c = LabConfig::from_toml(text, &dir).unwrap();
        let s = c.scheme_spec().unwrap();
        assert_eq!(s.h_radial(crate::schemes::Flavor::B, 1.75), 0.5);
        assert_eq!(s.f_tilde([5.0, 0.0, 0.0]), 0.75);
        // the absolutized copy loads without the base directory
        let abs = c.absolutized();
        let again = LabConfig::from_toml(&abs.to_toml().unwrap(), Path::new("/")).unwrap();
        assert_eq!(again.scheme_spec().unwrap(), s);
    }
}
