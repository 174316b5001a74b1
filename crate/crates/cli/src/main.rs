use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sadi_cli::commands::{self, chain_text, comparison_text, di_csv, sdi_csv};
use sadi_cli::runner::{ensure_dir, write_file, write_run};
use sadi_cli::{build, parse_config, run_experiment, sweep, with_threads, Experiment};

#[derive(Parser)]
#[command(name = "sadi", version, about = "Stochastic approximation experiments with set-valued dynamics")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Override the seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replications (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated SA run: report.csv plus requested artifacts.
    Run { config: PathBuf },
    /// One run per value of a scalar config field: sweep.csv.
    Sweep {
        config: PathBuf,
        /// Dotted path of the field, e.g. `bias.level`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Root check and Lyapunov certificate: certificate.txt.
    Certify { config: PathBuf },
    /// Euler paths of the mean-field inclusion: di_path_<start>.csv.
    SimulateDi { config: PathBuf },
    /// Limiting SDI ensemble: sdi.csv, and sdi_comparison.txt when requested.
    SimulateSdi { config: PathBuf },
}

fn load(path: &Path, g: &Global) -> anyhow::Result<Experiment> {
    let mut cfg = parse_config(path)?;
    if let Some(s) = g.seed {
        cfg = cfg.with_seed(s)?;
    }
    let exp = build(&cfg).with_context(|| format!("building {}", path.display()))?;
    for w in &exp.preset.warnings {
        eprintln!("warning: {w}");
    }
    Ok(exp)
}

fn put(dir: &Path, name: &str, body: &str) -> anyhow::Result<()> {
    let p = dir.join(name);
    write_file(&p, body)?;
    println!("wrote {}", p.display());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let g = &cli.global;
    let out = &g.out_dir;
    match &cli.command {
        Command::Run { config } => {
            let exp = load(config, g)?;
            let (report, art) = with_threads(g.threads, || run_experiment(&exp))??;
            for p in write_run(&exp, &report, &art, out)? {
                println!("wrote {}", p.display());
            }
            if exp.config.outputs.certificate {
                put(out, "certificate.txt", &commands::certify(&exp)?.text)?;
            }
            if exp.config.outputs.chain {
                if let Some(r) = commands::chain(&exp)? {
                    put(out, "chain.txt", &chain_text(&exp, &r))?;
                }
            }
            if exp.config.outputs.sdi_comparison {
                let sdi = with_threads(g.threads, || commands::simulate_sdi(&exp, &art.normalized))??;
                put(out, "sdi_comparison.txt", &comparison_text(&exp, &sdi))?;
            }
            for (i, s) in report.starts.iter().enumerate() {
                let f = s.final_stats();
                println!(
                    "start {i}: mean = {:?}, error of mean = {:.3e}, mean error = {:.3e}, failures = {}",
                    f.mean,
                    f.error_of_mean,
                    f.mean_abs_error,
                    s.failures.len()
                );
            }
        }
        Command::Sweep { config, param, values } => {
            let mut cfg = parse_config(config)?;
            if let Some(s) = g.seed {
                cfg = cfg.with_seed(s)?;
            }
            let table = with_threads(g.threads, || sweep(&cfg, param, values))??;
            ensure_dir(out)?;
            put(out, "sweep.csv", &table.to_csv())?;
        }
        Command::Certify { config } => {
            let exp = load(config, g)?;
            let c = with_threads(g.threads, || commands::certify(&exp))??;
            ensure_dir(out)?;
            put(out, "certificate.txt", &c.text)?;
            println!("roots: {}", if c.roots_ok { "ok" } else { "FAILED" });
            if let Some(cert) = &c.certificate {
                println!(
                    "certificate: {} ({} points, min margin {:.3e})",
                    if cert.passed() { "passed" } else { "FAILED" },
                    cert.records.len(),
                    cert.min_margin()
                );
            }
            if !c.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::SimulateDi { config } => {
            let exp = load(config, g)?;
            ensure_dir(out)?;
            for (s, p) in commands::simulate_di(&exp)?.iter().enumerate() {
                put(out, &format!("di_path_{s}.csv"), &di_csv(&exp, p))?;
            }
            if let Some(r) = commands::chain(&exp)? {
                put(out, "chain.txt", &chain_text(&exp, &r))?;
            }
        }
        Command::SimulateSdi { config } => {
            let exp = load(config, g)?;
            let series = if exp.config.outputs.sdi_comparison {
                with_threads(g.threads, || run_experiment(&exp))??.1.normalized
            } else {
                Vec::new()
            };
            let sdi = with_threads(g.threads, || commands::simulate_sdi(&exp, &series))??;
            ensure_dir(out)?;
            put(out, "sdi.csv", &sdi_csv(&exp, &sdi))?;
            if !sdi.comparisons.is_empty() {
                put(out, "sdi_comparison.txt", &comparison_text(&exp, &sdi))?;
                for (i, c) in sdi.comparisons.iter().enumerate() {
                    println!("start {i}: max KS distance {:.4}", c.max_ks());
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
