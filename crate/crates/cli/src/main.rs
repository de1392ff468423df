#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use crnoma_core::channel::{draw_realization, secondary_transmit_power};
use crnoma_core::config::{self, db_to_linear};
use crnoma_core::sweep::{self, run_sweep_with_progress, Series};
use crnoma_core::{Axis, EvalModes, RngStream, SweepSpec, SystemConfig};

mod values;

#[derive(Parser)]
#[command(name = "crnoma", version, about = "Outage sweeps for two-hop underlay CR-NOMA networks")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "CRNOMA_THREADS")]
    threads: Option<usize>,

    /// Suppress the stderr progress counter.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate outage over a parameter axis and write a CSV table.
    Sweep(SweepArgs),
    /// Check a configuration file and report every violation.
    Validate {
        config: PathBuf,
    },
    /// List built-in scenario and figure presets.
    Presets,
    /// Print a scenario preset as TOML.
    Preset {
        name: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write raw channel draws for inspection.
    Realizations(RealizationArgs),
}

#[derive(Args)]
struct Source {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario preset.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> anyhow::Result<SystemConfig> {
        Ok(match (&self.config, &self.preset) {
            (Some(path), _) => SystemConfig::load(path)?,
            (None, Some(name)) => config::preset(name)?.config,
            (None, None) => config::two_user_reference(),
        })
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,

    /// Figure preset (fig2, fig3, fig4); supplies series, axis and values.
    #[arg(long, conflicts_with_all = ["config", "preset"])]
    figure: Option<String>,

    /// Swept parameter: transmit_snr_db, p_t_db, i_itc_db, phi, epsilon, theta, kappa.
    #[arg(long)]
    axis: Option<Axis>,

    /// Comma list or inclusive `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,

    #[arg(long, default_value = "analytic")]
    mode: EvalModes,

    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Also report outage counting failed decoding of earlier layers.
    #[arg(long)]
    joint_sic: bool,

    /// Users to report (1-based), comma separated; default all.
    #[arg(long, value_delimiter = ',')]
    users: Vec<usize>,

    /// Series label carried in the flags column.
    #[arg(long, default_value = "")]
    label: String,

    /// CSV output path; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,

    /// Write a gnuplot script for the table.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct RealizationArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn build_sweep(args: &SweepArgs) -> anyhow::Result<SweepSpec> {
    let values = args.values.as_deref().map(values::parse).transpose()?;
    let mut spec = if let Some(name) = &args.figure {
        let fig = sweep::figure_preset(name)?;
        let mut spec = fig.sweep(args.mode, args.trials, args.seed);
        if let Some(axis) = args.axis {
            spec.axis = axis;
        }
        spec
    } else {
        let config = args.source.load()?;
        let Some(axis) = args.axis else {
            bail!(crnoma_core::Error::InvalidSweep("--axis is required without --figure".into()));
        };
        SweepSpec {
            series: vec![Series::all_users(args.label.clone(), config)],
            axis,
            values: Vec::new(),
            modes: args.mode,
            trials: args.trials,
            seed: args.seed,
            joint_sic: false,
        }
    };
    if let Some(values) = values {
        spec.values = values;
    } else if args.figure.is_none() {
        bail!(crnoma_core::Error::InvalidSweep("--values is required without --figure".into()));
    }
    spec.joint_sic = args.joint_sic;
    if !args.users.is_empty() {
        for s in &mut spec.series {
            s.users = args.users.clone();
        }
    }
    Ok(spec)
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn sweep_cmd(args: &SweepArgs, quiet: bool) -> anyhow::Result<()> {
    let spec = build_sweep(args)?;
    let table = run_sweep_with_progress(&spec, |done, total| {
        if !quiet {
            eprint!("\r{done}/{total} points");
            if done == total {
                eprintln!();
            }
        }
    })?;
    match &args.out {
        Some(p) => sweep::emit_csv(&table, p)?,
        None => write_output(None, &table.to_csv())?,
    }
    if let Some(p) = &args.plot {
        sweep::emit_plot_script(&table, p)?;
    }
    Ok(())
}

fn realizations_cmd(args: &RealizationArgs) -> anyhow::Result<()> {
    let config = args.source.load()?.validated()?;
    let rho = db_to_linear(args.snr_db);
    let at = config.at_snr(rho);
    let tau = at.pathloss;
    let mut csv = String::from("trial,x,y,z,v");
    for b in 1..=at.num_users {
        csv.push_str(&format!(",q{b},w{b}"));
    }
    csv.push_str(",p_s,p_r\n");
    for t in 0..args.count {
        let r = draw_realization(&at, rho, RngStream::new(args.seed, t));
        let p_s = secondary_transmit_power(at.pbar_s, at.i_itc, r.y, at.d_sd, tau);
        let p_r = secondary_transmit_power(at.pbar_r, at.i_itc, r.v, at.d_rd, tau);
        csv.push_str(&format!("{t},{},{},{},{}", r.x, r.y, r.z, r.v));
        for (q, w) in r.q.iter().zip(&r.w) {
            csv.push_str(&format!(",{q},{w}"));
        }
        csv.push_str(&format!(",{p_s},{p_r}\n"));
    }
    write_output(args.out.as_deref(), &csv)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    match cli.command {
        Command::Sweep(args) => sweep_cmd(&args, cli.quiet),
        Command::Validate { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|source| crnoma_core::Error::Io { path: config.clone(), source })?;
            SystemConfig::from_toml_str(&text)?;
            println!("ok");
            Ok(())
        }
        Command::Presets => {
            for p in config::presets() {
                println!("{:<14} {}", p.name, p.description);
            }
            for f in sweep::figure_presets() {
                println!("{:<14} {} (sweep --figure)", f.name, f.description);
            }
            Ok(())
        }
        Command::Preset { name, out } => {
            let p = config::preset(&name)?;
            write_output(out.as_deref(), &p.config.to_toml_string())
        }
        Command::Realizations(args) => realizations_cmd(&args),
    }
}

fn report(err: &anyhow::Error) {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<crnoma_core::Error>())
        .map_or("error", crnoma_core::Error::kind);
    let line = serde_json::json!({ "error": kind, "message": format!("{err:#}") });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let line = serde_json::json!({ "error": "usage", "message": e.to_string().trim_end() });
            eprintln!("{line}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::FAILURE
        }
    }
}
