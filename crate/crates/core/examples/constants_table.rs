//! Renormalization constants at ε = 1/8 with their algebraic checks, written as CSV.
//!
//! `cargo run --release --example constants_table [out.csv]`

use spde_lab::io::{write_csv, ConstantCsvRow};
use spde_lab::lab::{exp_constants_table, ConstantsSpec};
use spde_lab::schemes::SchemeSpec;

fn main() -> spde_lab::Result<()> {
    let scheme = SchemeSpec::finite_difference(0.125).with_ab(1.0, 0.0)?;
    let mut spec = ConstantsSpec::new(scheme, vec![0.25, 0.125], 1.0);
    spec.double_n = Some(2);
    let rep = exp_constants_table(&spec)?;
    for c in &rep.checks {
        println!("{:<12} eps={:<6} value={:.2e} tol={:.0e} {}", c.name, c.eps, c.value, c.tol, if c.pass { "ok" } else { "FAILED" });
    }
    for r in rep.rows.iter().filter(|r| r.family == "C2" && r.indices == "1 1 1").take(4) {
        println!("{} {} {} eps={} value={:.6e}", r.family, r.flavor, r.indices, r.eps, r.value);
    }
    if let Some(path) = std::env::args().nth(1) {
        write_csv(std::path::Path::new(&path), rep.rows.iter().map(ConstantCsvRow::from))?;
        println!("{} rows -> {path}", rep.rows.len());
    }
    Ok(())
}
