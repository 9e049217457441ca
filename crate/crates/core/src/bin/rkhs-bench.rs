use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rkhs_ocp::bench::{cmd_convergence, cmd_crosscheck, cmd_solve, RunConfig};
use rkhs_ocp::Error;

#[derive(Parser)]
#[command(name = "rkhs-bench", version, about = "Kernel collocation experiments for heat-equation optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key=value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["1", "2", "3"])]
    example: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long, global = true)]
    nx: Option<String>,
    #[arg(long, global = true)]
    nt: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    ridge: Option<String>,
    #[arg(long, global = true, value_parser = ["direct", "picard"])]
    mode: Option<String>,
    /// Points per axis, e.g. 101x101.
    #[arg(long, global = true)]
    eval_grid: Option<String>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    #[arg(long, global = true, value_parser = ["prose", "caption"])]
    slice_times: Option<String>,
    /// Node layouts for `convergence`, e.g. 4x4,8x8,16x16.
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// Interior points of the oracle grid for `crosscheck`, e.g. 64x64.
    #[arg(long, global = true)]
    oracle_grid: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve one example and write solution.csv, slices.csv, report.json.
    Solve,
    /// Sweep node counts and write convergence.csv.
    Convergence,
    /// Compare against the finite-difference oracle and write crosscheck.json.
    Crosscheck,
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let flags = [
        ("example", &cli.example),
        ("nu", &cli.nu),
        ("nx", &cli.nx),
        ("nt", &cli.nt),
        ("ridge", &cli.ridge),
        ("mode", &cli.mode),
        ("eval_grid", &cli.eval_grid),
        ("out", &cli.out),
        ("slice_times", &cli.slice_times),
        ("sweep", &cli.sweep),
        ("oracle_grid", &cli.oracle_grid),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<String, Error> {
    Ok(match cli.command {
        Command::Solve => {
            let r = cmd_solve(cfg)?;
            format!(
                "ok solve linf_y={:.6e} linf_p={:.6e} cond_pre={:.3e} cond_post={:.3e} seconds={:.3}",
                r.norms.linf_y, r.norms.linf_p, r.cond.pre, r.cond.post, r.seconds
            )
        }
        Command::Convergence => {
            let r = cmd_convergence(cfg)?;
            format!("ok convergence rows={} violations={:?}", r.rows.len(), r.violations)
        }
        Command::Crosscheck => {
            let r = cmd_crosscheck(cfg)?;
            format!(
                "ok crosscheck discrepancy_y={:.6e} tolerance={:.6e} agree={}",
                r.discrepancy_y, r.tolerance, r.agree
            )
        }
    })
}

fn fail(kind: &str, code: u8, context: &str, message: &str) -> ExitCode {
    let message = message.lines().next().unwrap_or("").trim();
    eprintln!("error kind={kind} code={code} {context}msg={message:?}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", 2, "", &e.to_string().replace("error: ", "")),
    };
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e.kind(), e.exit_code() as u8, "", &e.to_string()),
    };
    match run(&cli, &cfg) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), e.exit_code() as u8, &format!("{} ", cfg.context()), &e.to_string()),
    }
}
