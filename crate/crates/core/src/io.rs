//! Serialization: the field container (JSON or binary), CSV tables and JSON reports.
//!
//! Binary layout, little-endian: magic `SPDF`, format version `u32`, N `u32`,
//! reality `u8`, component count `u32`, then per component a `u32` byte length
//! and UTF-8 name, mode count `u64`, and per mode `k` as three `i32` followed by
//! `re, im` (`f64`) for each component in order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fields::{CovEstimate, Mat3};
use crate::hierarchy::MhdPair;
use crate::torus_spectral::{ModeLattice, ScalarFourierField, VectorFourierField, WaveVector, C64};

const MAGIC: &[u8; 4] = b"SPDF";
const VERSION: u32 = 1;

/// One lattice mode with one `(re, im)` per component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub k: [i32; 3],
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Named scalar components on the lattice of size `n`, stored mode by mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldContainer {
    #[serde(rename = "N")]
    pub n: usize,
    /// Every component satisfies `f(−k) = conj f(k)` exactly.
    pub reality: bool,
    pub components: Vec<String>,
    pub modes: Vec<ModeRecord>,
}

impl FieldContainer {
    pub fn from_scalars(names: &[&str], fields: &[&ScalarFourierField]) -> Result<Self> {
        if names.len() != fields.len() || fields.is_empty() {
            return Err(LabError::InvalidArgument(format!("{} names for {} components", names.len(), fields.len())));
        }
        let lat = fields[0].lattice();
        for f in fields {
            fields[0].check_same_lattice(f)?;
        }
        let modes = (0..lat.len())
            .map(|i| ModeRecord {
                k: lat.wave(i).0,
                re: fields.iter().map(|f| f.coeffs()[i].re).collect(),
                im: fields.iter().map(|f| f.coeffs()[i].im).collect(),
            })
            .collect();
        Ok(FieldContainer {
            n: lat.n(),
            reality: fields.iter().all(|f| f.reality_defect() == 0.0),
            components: names.iter().map(|s| s.to_string()).collect(),
            modes,
        })
    }

    pub fn from_vector(name: &str, v: &VectorFourierField) -> Result<Self> {
        let names: Vec<String> = (1..=3).map(|c| format!("{name}{c}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Self::from_scalars(&refs, &[&v.comps[0], &v.comps[1], &v.comps[2]])
    }

    pub fn from_pair(p: &MhdPair) -> Result<Self> {
        let c = |v: &VectorFourierField, i: usize| v.comps[i].clone();
        let comps = [c(&p.u, 0), c(&p.u, 1), c(&p.u, 2), c(&p.b, 0), c(&p.b, 1), c(&p.b, 2)];
        let refs: Vec<&ScalarFourierField> = comps.iter().collect();
        Self::from_scalars(&["u1", "u2", "u3", "b1", "b2", "b3"], &refs)
    }

    pub fn lattice(&self) -> Result<ModeLattice> {
        ModeLattice::new(self.n)
    }

    /// The component called `name`, checked against the lattice.
    pub fn scalar(&self, name: &str) -> Result<ScalarFourierField> {
        let c = self.components.iter().position(|s| s == name).ok_or_else(|| LabError::Format(format!("no component {name:?}")))?;
        let lat = self.lattice()?;
        if self.modes.len() != lat.len() {
            return Err(LabError::SizeMismatch { expected: lat.len(), got: self.modes.len() });
        }
        let mut out = ScalarFourierField::zeros(lat);
        for m in &self.modes {
            if m.re.len() != self.components.len() || m.im.len() != self.components.len() {
                return Err(LabError::Format(format!("mode {:?} has the wrong number of values", m.k)));
            }
            out.set(WaveVector(m.k), C64::new(m.re[c], m.im[c]))?;
        }
        Ok(out)
    }

    pub fn vector(&self, name: &str) -> Result<VectorFourierField> {
        VectorFourierField::new([self.scalar(&format!("{name}1"))?, self.scalar(&format!("{name}2"))?, self.scalar(&format!("{name}3"))?])
    }

    pub fn to_pair(&self) -> Result<MhdPair> {
        Ok(MhdPair { u: self.vector("u")?, b: self.vector("b")? })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.modes.len() * (12 + 16 * self.components.len()));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.push(self.reality as u8);
        out.extend_from_slice(&(self.components.len() as u32).to_le_bytes());
        for name in &self.components {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
        }
        out.extend_from_slice(&(self.modes.len() as u64).to_le_bytes());
        for m in &self.modes {
            for c in m.k {
                out.extend_from_slice(&c.to_le_bytes());
            }
            for (re, im) in m.re.iter().zip(&m.im) {
                out.extend_from_slice(&re.to_le_bytes());
                out.extend_from_slice(&im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(LabError::Format("not a field container (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(LabError::Format(format!("unsupported container version {version}")));
        }
        let n = r.u32()? as usize;
        let reality = match r.take(1)?[0] {
            0 => false,
            1 => true,
            v => return Err(LabError::Format(format!("bad reality flag {v}"))),
        };
        let nc = r.u32()? as usize;
        let mut components = Vec::with_capacity(nc.min(64));
        for _ in 0..nc {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?).map_err(|e| LabError::Format(e.to_string()))?;
            components.push(name.to_string());
        }
        let nm = r.u64()? as usize;
        let mut modes = Vec::with_capacity(nm.min(1 << 24));
        for _ in 0..nm {
            let k = [r.i32()?, r.i32()?, r.i32()?];
            let (mut re, mut im) = (Vec::with_capacity(nc), Vec::with_capacity(nc));
            for _ in 0..nc {
                re.push(r.f64()?);
                im.push(r.f64()?);
            }
            modes.push(ModeRecord { k, re, im });
        }
        if r.pos != bytes.len() {
            return Err(LabError::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(FieldContainer { n, reality, components, modes })
    }

    /// Writes JSON for a `.json` extension and binary otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        if is_json(path) {
            serde_json::to_writer(&mut w, self)?;
        } else {
            w.write_all(&self.to_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut buf)?;
        if is_json(path) {
            Ok(serde_json::from_slice(&buf)?)
        } else {
            Self::from_bytes(&buf)
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| LabError::Format("truncated container".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const L: usize>(&mut self) -> Result<[u8; L]> {
        Ok(self.take(L)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

/// Flat trajectory row `(t, k1, k2, k3, component, re, im)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryCsvRow {
    pub t: f64,
    pub k1: i32,
    pub k2: i32,
    pub k3: i32,
    pub component: String,
    pub re: f64,
    pub im: f64,
}

impl From<&crate::fields::TrajectoryRow> for TrajectoryCsvRow {
    fn from(r: &crate::fields::TrajectoryRow) -> Self {
        TrajectoryCsvRow { t: r.t, k1: r.k[0], k2: r.k[1], k3: r.k[2], component: r.component.clone(), re: r.re, im: r.im }
    }
}

/// Constants-table row. `indices` joins the flavor and the tensor indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantCsvRow {
    pub family: String,
    pub indices: String,
    pub eps: f64,
    pub t: Option<f64>,
    pub value: f64,
    pub imag_residue: f64,
    pub limit_value: Option<f64>,
    pub quadrature_error: Option<f64>,
}

impl From<&crate::wick_renorm::ConstantRow> for ConstantCsvRow {
    fn from(r: &crate::wick_renorm::ConstantRow) -> Self {
        let indices = if r.flavor.is_empty() { r.indices.clone() } else { format!("{}:{}", r.flavor, r.indices) };
        ConstantCsvRow {
            family: r.family.clone(),
            indices,
            eps: r.eps,
            t: r.t,
            value: r.value,
            imag_residue: r.imag_residue,
            limit_value: r.limit_value,
            quadrature_error: r.quadrature_error,
        }
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(LabError::from)).collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// `[re, im]`.
pub type Pair2 = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovEntry {
    pub i: usize,
    pub j: usize,
    pub estimate: Pair2,
    pub sigma: Pair2,
    pub closed_form: Pair2,
}

/// Covariance report of one `(k, pair, kind, lag)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub k: [i32; 3],
    pub pair: crate::fields::Pair,
    pub kind: crate::fields::CovKind,
    pub lag: f64,
    pub samples: usize,
    pub entries: Vec<CovEntry>,
    /// Real scalars within 3σ of the closed form, out of 18.
    pub within_3_sigma: usize,
}

impl CovarianceReport {
    pub fn new(est: &CovEstimate, exact: &Mat3) -> Self {
        let mut entries = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                let p = |c: C64| [c.re, c.im];
                entries.push(CovEntry { i, j, estimate: p(est.estimate[i][j]), sigma: p(est.std_err[i][j]), closed_form: p(exact[i][j]) });
            }
        }
        let (ok, _) = crate::fields::fraction_within(est, exact, 3.0);
        CovarianceReport { k: est.k, pair: est.pair, kind: est.kind, lag: est.lag, samples: est.samples, entries, within_3_sigma: ok }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> MhdPair {
        let lat = ModeLattice::new(n).unwrap();
        let mut s = 0.1f64;
        let mut next = || {
            s = (s * 997.0 + 0.123).fract();
            C64::new(s - 0.5, 1e-300 * s)
        };
        let v = |next: &mut dyn FnMut() -> C64| VectorFourierField::from_fn(lat, |_| [next(), next(), next()]);
        MhdPair { u: v(&mut next), b: v(&mut next) }
    }

    #[test]
    fn json_and_binary_round_trip_bit_exactly() {
        let p = sample(3);
        let c = FieldContainer::from_pair(&p).unwrap();
        assert!(!c.reality);
        let back = FieldContainer::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_pair().unwrap(), p);
        let bin = FieldContainer::from_bytes(&c.to_bytes()).unwrap();
        assert_eq!(bin.to_pair().unwrap(), p);
    }

    #[test]
    fn binary_rejects_damage() {
        let bytes = FieldContainer::from_pair(&sample(2)).unwrap().to_bytes();
        assert!(FieldContainer::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(FieldContainer::from_bytes(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(FieldContainer::from_bytes(&long).is_err());
    }

    #[test]
    fn reality_flag_tracks_hermitian_symmetry() {
        let lat = ModeLattice::new(2).unwrap();
        let mut f = ScalarFourierField::from_fn(lat, |k| C64::new(k.0[0] as f64, k.0[1] as f64));
        assert!(!FieldContainer::from_scalars(&["f"], &[&f]).unwrap().reality);
        f.symmetrize_reality();
        assert!(FieldContainer::from_scalars(&["f"], &[&f]).unwrap().reality);
    }

    #[test]
    fn constant_rows_flatten() {
        let row = crate::wick_renorm::ConstantRow {
            family: "C2".into(),
            flavor: "u".into(),
            indices: "1,2,3".into(),
            eps: 0.5,
            t: Some(1.0),
            value: 0.25,
            imag_residue: 0.0,
            limit_value: None,
            quadrature_error: None,
        };
        let c = ConstantCsvRow::from(&row);
        assert_eq!(c.indices, "u:1,2,3");
        let dir = std::env::temp_dir().join(format!("spde_io_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.csv");
        write_csv(&path, [&c]).unwrap();
        let back: Vec<ConstantCsvRow> = read_csv(&path).unwrap();
        assert_eq!(back, vec![c]);
    }
}
