//! Field container round trip through JSON and the binary format.
//!
//! `cargo run --release --example field_io [dir]`

use std::path::PathBuf;

use spde_lab::hierarchy::taylor_green;
use spde_lab::io::FieldContainer;
use spde_lab::torus_spectral::ModeLattice;

fn main() -> spde_lab::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;
    let pair = taylor_green(ModeLattice::new(4)?, 1.0, 0.5)?;
    let c = FieldContainer::from_pair(&pair)?;
    println!("N={} reality={} components={:?} modes={}", c.n, c.reality, c.components, c.modes.len());
    for name in ["tg.json", "tg.bin"] {
        let path = dir.join(name);
        c.save(&path)?;
        let back = FieldContainer::load(&path)?.to_pair()?;
        println!("{}: {} bytes, exact round trip {}", path.display(), std::fs::metadata(&path)?.len(), back == pair);
    }
    Ok(())
}
