use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fermi_spectra::config::{load_config, Command, Overrides};
use fermi_spectra::report::{emit_report, run_command, Results};
use fermi_spectra::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Bounds,
    Certify,
    Solve1d,
    Solve2d,
    Sweep,
    #[value(name = "figure2")]
    PiComparison,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Bounds => Command::Bounds,
            Cmd::Certify => Command::Certify,
            Cmd::Solve1d => Command::Solve1d,
            Cmd::Solve2d => Command::Solve2d,
            Cmd::Sweep => Command::Sweep,
            Cmd::PiComparison => Command::PiComparison,
        }
    }
}

/// Neumann p-Laplace eigenvalues and bounds on domains in Fermi coordinates.
#[derive(Debug, Parser)]
#[command(name = "fermi-spectra", version)]
struct Args {
    command: Cmd,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cells along the curve for the 2-D solver.
    #[arg(long)]
    ns: Option<usize>,
    /// Cells across the width (2-D solver and sweeps).
    #[arg(long)]
    nt: Option<usize>,
    /// Exponent p > 1.
    #[arg(long)]
    p: Option<f64>,
}

fn run(args: Args) -> Result<(), Error> {
    let mut config = load_config(&args.config)?;
    config.apply_overrides(&Overrides {
        out: args.out,
        ns: args.ns,
        nt: args.nt,
        p: args.p,
    })?;
    let command = config.resolve_command(Some(args.command.into()))?;
    let report = run_command(&config, command)?;
    let written = emit_report(&report, &config.output.dir)?;
    println!("{}", summary(&report.results));
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn summary(results: &Results) -> String {
    match results {
        Results::Bounds { bounds, .. } => bounds
            .iter()
            .map(|b| format!("{:?}: {:.6} (applicable: {})", b.kind, b.value, b.applicable))
            .collect::<Vec<_>>()
            .join("\n"),
        Results::Certify { certificate, .. } => format!(
            "case {}: threshold {:.6}, mu1 <= {:.6}, certified: {}",
            certificate.case_label.letter(),
            certificate.threshold,
            certificate.mu1_upper,
            certificate.certified
        ),
        Results::Solve1d {
            shooting, discretized, ..
        } => format!("mu: shooting {:.10}, discretized {:.10}", shooting.mu, discretized.mu),
        Results::Solve2d { full, odd, .. } => format!(
            "mu1 {:.8} (converged: {}), mu1_odd {:.8} (converged: {})",
            full.mu, full.converged, odd.mu, odd.converged
        ),
        Results::Sweep(s) => {
            let failed = s.points.iter().filter(|p| p.error.is_some()).count();
            format!("mu_star {:.10}, {} points, {failed} failed", s.mu_star, s.points.len())
        }
        Results::PiComparison { rows, min_b_minus_r } => {
            format!("{} points, min b - r = {min_b_minus_r:.3e}", rows.len())
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_error() { 2 } else { 1 })
        }
    }
}
