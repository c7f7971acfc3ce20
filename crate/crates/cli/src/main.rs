//! `qsprep`: command-line front end for the state-preparation pipeline.
//!
//! Exit status is 0 when every bound check passes, 1 when a check fails and 2
//! on input or runtime errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qsp_stateprep::oracle::AmplitudeOracle;
use qsp_stateprep::phases::find_phases;
use qsp_stateprep::pipeline::{
    grover_case, prepare_state, resolve_distribution, sweep, verify_error_bounds, PrepConfig, PrepReport, SweepSpec,
    SWEEP_COLUMNS,
};
use qsp_stateprep::poly::Polynomial;

#[derive(Parser)]
#[command(name = "qsprep", version, about = "Oracle state preparation via quantum signal processing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute QSP phases for a polynomial file and print them.
    Phases {
        poly: PathBuf,
        /// Write the phase file here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prepare the amplitude-encoded state and report the bound checks.
    Prepare(PrepArgs),
    /// Same run as `prepare`, printing the full bound table.
    VerifyBounds(PrepArgs),
    /// Unstructured search: prepare the indicator state of `x0`.
    Grover {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        x0: usize,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Run a TOML grid of preparations and write one CSV row per run.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PrepArgs {
    /// Oracle table file (`n m` header, then 2^n values).
    #[arg(long, conflicts_with = "dist")]
    oracle: Option<PathBuf>,
    /// Generate the table instead: uniform, random, indicator:x0, gaussian[:mu,sigma].
    #[arg(long, requires = "n")]
    dist: Option<String>,
    /// Data qubits for `--dist`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Split one failure budget evenly between eps and delta.
    #[arg(long, conflicts_with_all = ["eps", "delta"])]
    total_failure: Option<f64>,
    /// Oracle bits; defaults to a value tied to eps and gamma.
    #[arg(long)]
    m: Option<usize>,
    /// Seed for `--dist random`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the prepared amplitudes.
    #[arg(long)]
    show_state: bool,
}

impl PrepArgs {
    fn config(&self) -> Result<PrepConfig> {
        let oracle = match (&self.oracle, &self.dist) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                AmplitudeOracle::from_text(&text)?
            }
            (None, Some(dist)) => {
                let n = self.n.context("--dist needs --n")?;
                AmplitudeOracle::generate(n, 1, &resolve_distribution(dist, n)?, self.seed)?
            }
            (None, None) => bail!("give --oracle <file> or --dist <name> --n <qubits>"),
        };
        let cfg = match (self.total_failure, self.eps, self.delta) {
            (Some(p), _, _) => PrepConfig::with_total_failure(oracle, p),
            (None, Some(eps), Some(delta)) => PrepConfig::new(oracle, eps, delta),
            _ => bail!("give both --eps and --delta, or --total-failure"),
        };
        Ok(match self.m {
            Some(m) => cfg.with_bits(m),
            None => cfg,
        })
    }
}

// Writing into a String cannot fail, hence the ignored results below.
fn summary(out: &mut String, r: &PrepReport) {
    let _ = writeln!(out, "m                    {}", r.m);
    let _ = writeln!(out, "gamma                {:.6e}", r.gamma);
    let _ = writeln!(out, "arcsin degree        {}", r.arcsin_degree);
    let _ = writeln!(out, "sign degree          {}", r.sign_degree);
    let _ = writeln!(out, "oracle calls         {}", r.oracle_calls);
    let _ = writeln!(out, "fidelity             {:.12}", r.fidelity_to_target);
    let _ = writeln!(out, "final error          {:.3e}", r.final_error);
    let _ = writeln!(out, "success probability  {:.12}", r.success_probability);
}

fn checks(out: &mut String, r: &PrepReport) {
    for c in &r.bound_checks {
        let mark = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{mark}  {:<64} {:.3e} <= {:.3e}", c.name, c.lhs, c.rhs);
    }
}

fn state(out: &mut String, r: &PrepReport) {
    for (x, a) in r.final_state.amplitudes().iter().enumerate() {
        let _ = writeln!(out, "{x:>6}  {:+.9} {:+.9}i", a.re, a.im);
    }
}

fn status(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli, buf: &mut String) -> Result<ExitCode> {
    match cli.command {
        Command::Phases { poly, out } => {
            let text = fs::read_to_string(&poly).with_context(|| format!("reading {}", poly.display()))?;
            let phi = find_phases(&Polynomial::from_text(&text)?)?;
            match out {
                Some(path) => fs::write(&path, phi.to_text()).with_context(|| format!("writing {}", path.display()))?,
                None => buf.push_str(&phi.to_text()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Prepare(args) => {
            let r = prepare_state(&args.config()?)?;
            summary(buf, &r);
            if args.show_state {
                state(buf, &r);
            }
            for c in r.bound_checks.iter().filter(|c| !c.pass) {
                let _ = writeln!(buf, "FAIL  {}: {:.3e} > {:.3e}", c.name, c.lhs, c.rhs);
            }
            Ok(status(r.all_pass()))
        }
        Command::VerifyBounds(args) => {
            let r = verify_error_bounds(&args.config()?)?;
            summary(buf, &r);
            let _ = writeln!(buf, "gamma~               {:.6e}", r.gamma_tilde);
            let _ = writeln!(buf, "hamiltonian error    {:.3e}", r.hamiltonian_error);
            let _ = writeln!(buf, "eps_hat              {:.3e}", r.eps_hat);
            checks(buf, &r);
            if args.show_state {
                state(buf, &r);
            }
            Ok(status(r.all_pass()))
        }
        Command::Grover { n, x0, eps, delta } => {
            let g = grover_case(n, x0, delta, eps)?;
            summary(buf, &g.report);
            let _ = writeln!(buf, "calls / sqrt(N)      {:.3}", g.calls_per_sqrt_n);
            checks(buf, &g.report);
            Ok(status(g.report.all_pass()))
        }
        Command::Sweep { spec, out } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let csv = sweep(&SweepSpec::from_toml(&text)?)?;
            fs::write(&out, &csv).with_context(|| format!("writing {}", out.display()))?;
            let pass_col = SWEEP_COLUMNS.iter().position(|&c| c == "pass").expect("pass column");
            let rows: Vec<&str> = csv.lines().skip(1).collect();
            let passed = rows.iter().filter(|r| r.split(',').nth(pass_col) == Some("true")).count();
            eprintln!("{passed}/{} runs passed every check", rows.len());
            Ok(status(passed == rows.len()))
        }
    }
}

fn main() -> ExitCode {
    let mut out = String::new();
    let code = match run(Cli::parse(), &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    };
    // A reader that closed the pipe early (`| head`) is not an error.
    match io::stdout().lock().write_all(out.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(2)
        }
        _ => code,
    }
}
