//! `eqc`: batch front end for the electron-qc simulations.
//!
//! Every subcommand reads an optional TOML run configuration, applies flag
//! overrides, runs, and writes one table as CSV or JSON. Exit status is 0
//! when every diagnostic gate passed, 2 when a gate failed and 1 on error.

pub mod commands;
pub mod config;
pub mod output;
pub mod units;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use electron_qc::gate::WalshOrder;

use crate::commands::{CalcInputs, Report};
use crate::config::{parse_config, render, Command, Format, RunConfig};
use crate::output::{write_atomic, Meta};
use crate::units::{Dim, Quantity};

#[derive(Debug, Parser)]
#[command(name = "eqc", version, about = "Trapped-electron gate, trap and trajectory simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Result file; without it the table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

fn walsh_arg(s: &str) -> Result<WalshOrder, String> {
    let v: u8 = s.parse().map_err(|_| format!("`{s}` is not 0, 1 or 3"))?;
    WalshOrder::try_from(v).map_err(|e| e.to_string())
}

fn qty(dim: Dim) -> impl Fn(&str) -> Result<f64, String> + Clone {
    move |s| units::parse(s, dim).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// One gate with the configured error channels.
    GateSim {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = walsh_arg)]
        walsh: Option<WalshOrder>,
    },
    /// One channel over a list of magnitudes and Walsh orders.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Restrict the sweep to one Walsh order.
        #[arg(long, value_parser = walsh_arg)]
        walsh: Option<WalshOrder>,
    },
    /// Each error channel alone, then all together.
    Budget {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = walsh_arg)]
        walsh: Option<WalshOrder>,
    },
    /// Closed-form trap quantities.
    TrapCalc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        calc: CalcArgs,
    },
    /// Storage time over release energy and drive phase.
    Trajectory {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args, Clone, Default)]
pub struct CalcArgs {
    /// Mathieu q (overrides the trap section).
    #[arg(long)]
    pub q: Option<f64>,
    /// Tank-circuit temperature, e.g. "0.4 K" (overrides the trap section).
    #[arg(long, value_parser = qty(Dim::Temperature))]
    pub tank_temperature: Option<f64>,
    /// Oscillation amplitude for the anharmonic shift, e.g. "1.3 um".
    #[arg(long, value_parser = qty(Dim::Length))]
    pub amplitude: Option<f64>,
    /// Field-noise density in V^2 m^-2 Hz^-1.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Frequency of the noise measurement, e.g. "1 MHz".
    #[arg(long, value_parser = qty(Dim::Angular))]
    pub noise_frequency: Option<f64>,
    /// Spectral exponent of the field noise.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Readout drive duration, e.g. "10 us".
    #[arg(long, value_parser = qty(Dim::Time))]
    pub readout_time: Option<f64>,
}

impl CalcArgs {
    fn inputs(&self) -> CalcInputs {
        let d = CalcInputs::default();
        CalcInputs {
            amplitude: self.amplitude.unwrap_or(d.amplitude),
            noise: self.noise.unwrap_or(d.noise),
            noise_omega: self.noise_frequency.unwrap_or(d.noise_omega),
            gamma: self.gamma.unwrap_or(d.gamma),
            readout_time: self.readout_time.unwrap_or(d.readout_time),
        }
    }
}

/// Configuration after flag overrides, with its canonical text.
pub struct Prepared {
    pub command: Command,
    pub config: RunConfig,
    pub canonical: String,
    pub calc: CalcInputs,
}

pub fn prepare(sub: &Sub) -> Result<(Prepared, Common)> {
    let (command, common) = match sub {
        Sub::GateSim { common, .. } => (Command::GateSim, common),
        Sub::Sweep { common, .. } => (Command::Sweep, common),
        Sub::Budget { common, .. } => (Command::Budget, common),
        Sub::TrapCalc { common, .. } => (Command::TrapCalc, common),
        Sub::Trajectory { common } => (Command::Trajectory, common),
    };
    let mut cfg = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_config(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = cfg.command {
        if c != command {
            bail!("configuration is for `{c}`, not `{command}`");
        }
    }
    let mut calc = CalcInputs::default();
    match sub {
        Sub::GateSim { walsh: Some(w), .. } | Sub::Budget { walsh: Some(w), .. } => cfg.schedule.walsh = Some(*w),
        Sub::Sweep { walsh: Some(w), .. } => cfg.sweep.walsh = Some(vec![*w]),
        Sub::TrapCalc { calc: args, .. } => {
            if let Some(q) = args.q {
                cfg.trap.q = Some(q);
            }
            if let Some(t) = args.tank_temperature {
                cfg.trap.tank_temperature = Some(Quantity::new(t));
            }
            calc = args.inputs();
        }
        _ => {}
    }
    if let Some(p) = &common.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = common.format {
        cfg.output.format = Some(f);
    }
    cfg.validate()?;
    let mut canonical = render(&cfg.resolved(command)?);
    if command == Command::TrapCalc {
        canonical.push_str(&format!("# trap-calc inputs {calc:?}\n"));
    }
    Ok((
        Prepared {
            command,
            config: cfg,
            canonical,
            calc,
        },
        common.clone(),
    ))
}

pub fn execute(p: &Prepared) -> Result<Report> {
    match p.command {
        Command::GateSim => commands::gate_sim(&p.config),
        Command::Sweep => commands::sweep_cmd(&p.config),
        Command::Budget => commands::budget(&p.config),
        Command::TrapCalc => commands::trap_calc(&p.config, &p.calc),
        Command::Trajectory => commands::trajectory(&p.config),
    }
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> Result<u8> {
    let (prepared, common) = prepare(&cli.command)?;
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let report = execute(&prepared)?;
    let meta = Meta::for_config(&prepared.canonical);
    let format = prepared.config.output.format.unwrap_or_default();
    let body = report.table.render(format, &meta)?;

    let mut notes = report.notes.clone();
    notes.push(format!("{} ({})", meta.run_id, prepared.command));
    match &prepared.config.output.path {
        Some(path) => {
            write_atomic(path, &body)?;
            let mut out = std::io::stdout().lock();
            write!(out, "{}", report.table.summary())?;
            for n in &notes {
                writeln!(out, "{n}")?;
            }
            writeln!(out, "wrote {}", path.display())?;
        }
        None => {
            std::io::stdout().lock().write_all(&body)?;
            let mut err = std::io::stderr().lock();
            for n in &notes {
                writeln!(err, "{n}")?;
            }
        }
    }
    if report.failures.is_empty() {
        Ok(0)
    } else {
        let mut err = std::io::stderr().lock();
        writeln!(err, "diagnostic gates failed:")?;
        for f in &report.failures {
            writeln!(err, "  {f}")?;
        }
        Ok(2)
    }
}
