use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spde_lab::commands::{run, Command};
use spde_lab::config::LabConfig;

#[derive(Parser)]
#[command(name = "spde-lab", version, about = "Spectral laboratory for stochastic MHD on the 3-torus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML config; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: out/<subcommand>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit nonzero if any assertion of the run fails.
    #[arg(long, global = true)]
    assert: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Renormalization constant tables and their algebraic checks.
    Constants,
    /// Monte Carlo covariances of the linear level against closed forms.
    Covariance,
    /// ε-sweep of the linear-level difference.
    LinearConverge,
    /// ε-sweep of the Wick-product difference and its ablation.
    SecondChaos,
    /// Order of the 1D Burgers finite-difference scheme.
    Burgers,
    /// Mild hierarchy run with snapshots and sanity checks.
    Hierarchy,
    /// Lattice convolution sums and the key estimate.
    SumBounds,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Constants => Command::Constants,
            Cmd::Covariance => Command::Covariance,
            Cmd::LinearConverge => Command::LinearConverge,
            Cmd::SecondChaos => Command::SecondChaos,
            Cmd::Burgers => Command::Burgers,
            Cmd::Hierarchy => Command::Hierarchy,
            Cmd::SumBounds => Command::SumBounds,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match go(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn go(cli: &Cli) -> spde_lab::Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| spde_lab::LabError::Config(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => LabConfig::load(p)?,
        None => LabConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let cmd = Command::from(cli.cmd);
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(cmd.name()));
    let m = run(cmd, &cfg, &out)?;
    for a in &m.assertions {
        println!("{} {} = {:.6e} (threshold {:.3e})", if a.pass { "PASS" } else { "FAIL" }, a.name, a.value, a.threshold);
    }
    println!("wrote {} ({:.1} s)", out.join("manifest.json").display(), m.elapsed_seconds);
    Ok(if cli.assert && !m.passed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}
