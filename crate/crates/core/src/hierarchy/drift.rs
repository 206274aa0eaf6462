//! Linear drift generated by the renormalized products: in each equation,
//! `−½ 𝒫 D_q Σ_m K^{p m q} y^m` summed over sources `y ∈ {u, b}` with `K` a signed
//! combination of `C_k` and `C̃_k`.

use serde::{Deserialize, Serialize};

use super::{MhdPair, Operators, Which};
use crate::error::Result;
use crate::schemes::{Flavor, SchemeSpec};
use crate::torus_spectral::{ModeLattice, VectorFourierField, C64};
use crate::wick_renorm::{ck_all, ConstFamily};

/// How the indices of `C^{h m x}` land on the slots `(p, q)` of `T^{pq}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wiring {
    /// `K^{p m q} = C^{p m q}`.
    Direct,
    /// `K^{p m q} = C^{q m p}`.
    Swapped,
}

/// Which b-equation bracket to use; the u equation is the same in both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriftForm {
    /// As written term by term in the renormalized system.
    Literal,
    /// Re-derived from the ⋄ products of the level-3 b equation.
    Derived,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftTerm {
    pub equation: Flavor,
    pub source: Flavor,
    pub k: u8,
    pub tilde: bool,
    pub sign: f64,
    pub wiring: Wiring,
}

/// The 32 drift terms: 8 per (equation, source).
pub fn drift_terms(form: DriftForm) -> Vec<DriftTerm> {
    use Wiring::{Direct, Swapped};
    let u: [(f64, u8, Wiring); 4] = [(1.0, 1, Direct), (1.0, 1, Swapped), (-1.0, 2, Direct), (-1.0, 2, Swapped)];
    let b: [(f64, u8, Wiring); 4] = match form {
        DriftForm::Literal => [(1.0, 3, Direct), (-1.0, 4, Direct), (1.0, 3, Swapped), (-1.0, 4, Swapped)],
        DriftForm::Derived => [(1.0, 3, Swapped), (1.0, 4, Direct), (-1.0, 4, Swapped), (-1.0, 3, Direct)],
    };
    let mut out = Vec::with_capacity(32);
    for (equation, list) in [(Flavor::U, u), (Flavor::B, b)] {
        for source in [Flavor::U, Flavor::B] {
            for &(sign, k, wiring) in &list {
                for tilde in [false, true] {
                    out.push(DriftTerm { equation, source, k, tilde, sign, wiring });
                }
            }
        }
    }
    out
}

/// `K^{p m q}` per (equation, source), flattened as `p·9 + m·3 + q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftTable {
    pub form: DriftForm,
    pub t: f64,
    pub coeff: [[Vec<f64>; 2]; 2],
}

impl DriftTable {
    pub fn get(&self, equation: Flavor, source: Flavor) -> &[f64] {
        &self.coeff[equation as usize][source as usize]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn drift_assembly(scheme: &SchemeSpec, t: f64, lattice: ModeLattice, form: DriftForm) -> Result<DriftTable> {
    let tensors = ck_all(false, t, scheme, lattice)?;
    let lookup = |k: u8, tilde: bool, flavor: Flavor| {
        tensors
            .iter()
            .find(|c| c.family == ConstFamily::C { k, tilde, bar: false } && c.flavor == Some(flavor))
            .expect("engine returns every C and C̃")
    };
    let mut coeff: [[Vec<f64>; 2]; 2] = Default::default();
    for row in coeff.iter_mut() {
        for c in row.iter_mut() {
            *c = vec![0.0; 27];
        }
    }
    for term in drift_terms(form) {
        let vals = &lookup(term.k, term.tilde, term.source).values;
        let dst = &mut coeff[term.equation as usize][term.source as usize];
        for p in 0..3 {
            for m in 0..3 {
                for q in 0..3 {
                    let src = match term.wiring {
                        Wiring::Direct => p * 9 + m * 3 + q,
                        Wiring::Swapped => q * 9 + m * 3 + p,
                    };
                    dst[p * 9 + m * 3 + q] += term.sign * vals[src].re;
                }
            }
        }
    }
    Ok(DriftTable { form, t, coeff })
}

/// `−½ 𝒫 D^ε_q Σ_{src,m} K^{p m q} src^m` for both equations.
pub fn apply_drift(table: &DriftTable, scheme: &SchemeSpec, y: &MhdPair) -> Result<MhdPair> {
    let lat = y.lattice();
    let ops = Operators::new(scheme, Which::Approx, lat, false);
    let mut out = MhdPair::zeros(lat);
    for (eq, dst) in [(Flavor::U, &mut out.u), (Flavor::B, &mut out.b)] {
        let mut v = VectorFourierField::zeros(lat);
        for idx in 0..lat.len() {
            let (d, pr) = (&ops.d[idx], &ops.proj[idx]);
            let mut inner = [C64::default(); 3];
            for src in [Flavor::U, Flavor::B] {
                let k = table.get(eq, src);
                let s = y.get(src).at(idx);
                for p in 0..3 {
                    for m in 0..3 {
                        for q in 0..3 {
                            inner[p] += d[q] * s[m] * k[p * 9 + m * 3 + q];
                        }
                    }
                }
            }
            let mut w = [C64::default(); 3];
            for i in 0..3 {
                for p in 0..3 {
                    w[i] += inner[p] * (-0.5 * pr[i][p]);
                }
            }
            v.set_at(idx, w);
        }
        *dst = v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::taylor_green;
    use super::*;

    fn scheme() -> SchemeSpec {
        SchemeSpec::finite_difference(0.25).with_ab(1.0, 0.0).unwrap()
    }

    #[test]
    fn term_count_audit() {
        for form in [DriftForm::Literal, DriftForm::Derived] {
            let terms = drift_terms(form);
            assert_eq!(terms.len(), 32);
            for eq in [Flavor::U, Flavor::B] {
                for src in [Flavor::U, Flavor::B] {
                    assert_eq!(terms.iter().filter(|t| t.equation == eq && t.source == src).count(), 8);
                }
            }
        }
    }

    #[test]
    fn u_rows_agree_between_forms() {
        let lat = ModeLattice::new(3).unwrap();
        let lit = drift_assembly(&scheme(), 0.4, lat, DriftForm::Literal).unwrap();
        let der = drift_assembly(&scheme(), 0.4, lat, DriftForm::Derived).unwrap();
        for src in [Flavor::U, Flavor::B] {
            assert_eq!(lit.get(Flavor::U, src), der.get(Flavor::U, src));
        }
        assert!(lit.max_abs() > 0.0);
    }

    #[test]
    fn symmetric_scheme_has_no_drift() {
        let lat = ModeLattice::new(3).unwrap();
        let s = SchemeSpec::finite_difference(0.25).with_ab(0.5, 0.5).unwrap();
        let t = drift_assembly(&s, 0.4, lat, DriftForm::Derived).unwrap();
        assert!(t.max_abs() < 1e-14, "{}", t.max_abs());
    }

    #[test]
    fn derived_table_matches_diamond_corrections() {
        let lat = ModeLattice::new(3).unwrap();
        let s = scheme();
        let y1 = taylor_green(lat, 1.0, 0.6).unwrap();
        let table = drift_assembly(&s, 0.3, lat, DriftForm::Derived).unwrap();
        let drift = apply_drift(&table, &s, &y1).unwrap();
        let diff = super::super::solver::correction_only(&s, lat, 0.3, &y1).unwrap();
        let err = drift.sub(&diff).unwrap().max_abs();
        assert!(drift.max_abs() > 1e-8 && err < 1e-12 * drift.max_abs().max(1.0), "{err}");
        assert!(drift.divergence_defect() < 1e-12);
    }
}
