//! Runs two subcommands from an inline TOML config, as `spde-lab --config` would.
//!
//! `cargo run --release --example cli_config [out_dir]`

use std::path::{Path, PathBuf};

use spde_lab::commands::{run, Command};
use spde_lab::config::LabConfig;

const CONFIG: &str = r#"
seed = 7

[scheme]
f_kind = "finite_difference"
a = 1.0
b = 0.0
L0 = 6.0
h_kind = "indicator"
eps = 0.25

[constants]
eps = [0.5, 0.25]

[sum_bounds]
radii = [16, 32]
"#;

fn main() -> spde_lab::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spde_lab_cli_config"));
    let cfg = LabConfig::from_toml(CONFIG, Path::new("."))?;
    for cmd in [Command::Constants, Command::SumBounds] {
        let m = run(cmd, &cfg, &out.join(cmd.name()))?;
        let failed: Vec<&str> = m.failures().map(|a| a.name.as_str()).collect();
        println!("{}: outputs {:?}, failed {:?}", cmd.name(), m.outputs, failed);
        println!("  rerun: {}", m.rerun);
    }
    Ok(())
}
