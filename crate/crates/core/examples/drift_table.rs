//! The 32 drift terms and their assembled coefficients; the literal and the
//! re-derived b-equation brackets side by side.
//!
//! `cargo run --release --example drift_table`

use spde_lab::hierarchy::{drift_assembly, drift_terms, DriftForm};
use spde_lab::schemes::{Flavor, SchemeSpec};
use spde_lab::torus_spectral::ModeLattice;

fn main() -> spde_lab::Result<()> {
    let scheme = SchemeSpec::finite_difference(0.5).with_ab(1.0, 0.0)?;
    let lat = ModeLattice::new(6)?;
    for form in [DriftForm::Literal, DriftForm::Derived] {
        let terms = drift_terms(form);
        let b_terms: Vec<String> = terms
            .iter()
            .filter(|t| t.equation == Flavor::B && t.source == Flavor::U && !t.tilde)
            .map(|t| format!("{:+}·C{} {:?}", t.sign, t.k, t.wiring))
            .collect();
        let table = drift_assembly(&scheme, 1.0, lat, form)?;
        println!("{form:?}: {} terms, b-equation bracket [{}], max |K| {:.4e}", terms.len(), b_terms.join(", "), table.max_abs());
        for (e, s) in [(Flavor::U, Flavor::U), (Flavor::B, Flavor::U)] {
            let k = table.get(e, s);
            println!("  K[{}←{}] (p,m,q)=(0,0,0): {:+.5e}  (0,1,1): {:+.5e}", e.name(), s.name(), k[0], k[4]);
        }
    }
    let sym = drift_assembly(&SchemeSpec::finite_difference(0.5), 1.0, lat, DriftForm::Derived)?;
    println!("a = b: max |K| = {:.1e}", sym.max_abs());
    Ok(())
}
