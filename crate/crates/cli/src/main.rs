use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use manometer_core::ChannelMode;

mod commands;
mod config;
mod output;

use commands::Status;
use config::{Format, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "manometer",
    version,
    about = "Quantum manometer: a particle in a box with a harmonically bound wall"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON run configuration; flags below override its values.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (stdout if absent).
    #[arg(short, long, global = true, env = "MANOMETER_OUTPUT")]
    output: Option<PathBuf>,
    /// Omit the metadata header.
    #[arg(long, global = true)]
    no_meta: bool,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Box quantum number of the reference state.
    #[arg(short = 'j', long, global = true)]
    reference: Option<u32>,
    #[arg(long, global = true)]
    n_gas: Option<u32>,
    #[arg(long, global = true)]
    n_wall: Option<u32>,
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<ChannelMode>,
}

fn parse_mode(s: &str) -> Result<ChannelMode, String> {
    match s {
        "leading" => Ok(ChannelMode::Leading),
        "all" => Ok(ChannelMode::All),
        _ => Err(format!("unknown mode `{s}` (expected leading or all)")),
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Unperturbed gas, wall and product energies.
    Spectrum,
    /// First-order coefficients by channel.
    Coeffs,
    /// Wall displacement, variance, force, purity and entropy.
    Observables,
    /// Identity checks and the oracle convergence sweep.
    Verify {
        /// Skip the oracle sweep.
        #[arg(long)]
        quick: bool,
        /// Exit 0 when checks are flagged (e.g. resonant) but none failed.
        #[arg(long)]
        allow_flagged: bool,
    },
    /// Thermal averages over a temperature grid.
    Thermal {
        /// Temperatures in units of the gas energy scale.
        #[arg(long, value_delimiter = ',')]
        temperatures: Option<Vec<f64>>,
    },
    /// Perturbation theory against exact diagonalization over an eps grid.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Coeffs => "coeffs",
            Command::Observables => "observables",
            Command::Verify { .. } => "verify",
            Command::Thermal { .. } => "thermal",
            Command::Sweep { .. } => "sweep",
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if g.lambda.is_some() || g.beta.is_some() {
        let s = &mut cfg.system;
        s.lambda = g.lambda.or(s.lambda);
        s.beta = g.beta.or(s.beta);
        s.gas_mass = None;
        s.wall_mass = None;
        s.box_length = None;
        s.spring_constant = None;
        s.hbar = None;
    }
    if let Some(j) = g.reference {
        cfg.reference = j;
    }
    if let Some(n) = g.n_gas {
        cfg.basis.n_gas = n;
    }
    if let Some(n) = g.n_wall {
        cfg.basis.n_wall = n;
    }
    if let Some(m) = g.mode {
        cfg.mode = m;
    }
    if let Some(f) = g.format {
        cfg.output.format = f;
    }
    if let Some(p) = &g.output {
        cfg.output.path = Some(p.clone());
    }
    if g.no_meta {
        cfg.output.meta = Some(false);
    }
    match &cli.command {
        Command::Thermal {
            temperatures: Some(t),
        } => cfg.thermal.temperatures = Some(t.clone()),
        Command::Sweep { eps: Some(e) } => cfg.sweep.eps = e.clone(),
        _ => {}
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = resolve(cli)?;
    let (document, ok) = match &cli.command {
        Command::Spectrum => (commands::spectrum(&cfg)?, true),
        Command::Coeffs => (commands::coeffs(&cfg)?, true),
        Command::Observables => (commands::observables(&cfg)?, true),
        Command::Thermal { .. } => (commands::thermal(&cfg)?, true),
        Command::Sweep { .. } => (commands::sweep(&cfg)?, true),
        Command::Verify {
            quick,
            allow_flagged,
        } => {
            let v = commands::verify(&cfg, *quick)?;
            let ok = v
                .statuses
                .iter()
                .all(|s| *s == Status::Pass || (*allow_flagged && *s == Status::Flagged));
            (v.document, ok)
        }
    };
    let meta = cfg
        .output
        .meta
        .unwrap_or(true)
        .then(|| output::metadata(cli.command.name()));
    let mut sink: Box<dyn Write> = match &cfg.output.path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    output::render(&document, cfg.output.format, meta.as_deref(), &mut sink)?;
    sink.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.global.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")
            .and_then(|pool| pool.install(|| run(&cli))),
        None => run(&cli),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
