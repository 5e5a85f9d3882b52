//! `multlab`: batch driver for the multiplier experiments.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use multlab_cli::output::{Format, Meta};

#[derive(Debug, Parser)]
#[command(name = "multlab", version, about = "Schur and Fourier multiplier experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Clone, Debug, Args)]
pub struct Common {
    /// Global seed; every random start and trial derives its stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random ascent starts per estimate.
    #[arg(long, global = true, default_value_t = 20)]
    pub restarts: usize,
    /// Relative stopping tolerance of the ascent.
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SequenceArg {
    Fejer,
    Truncation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    RealSigns,
    Unimodular,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the norm of a Schur or Fourier symbol read from JSON.
    Norm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "4", value_parser = exponent)]
        p: f64,
        /// `full` or an interval `a:b` (Fourier symbols only).
        #[arg(long, default_value = "full")]
        window: String,
        /// Also estimate the `m`-fold amplification (Schur symbols only).
        #[arg(long)]
        amplify: Option<usize>,
    },
    /// Lower bounds for the triangular sign multiplier at increasing sizes.
    HilbertScan {
        #[arg(long, default_value = "4", value_parser = exponent)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        sizes: Vec<usize>,
    },
    /// Lower bounds for the triangular truncation at increasing sizes.
    RieszScan {
        #[arg(long, default_value = "4", value_parser = exponent)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        sizes: Vec<usize>,
    },
    /// The recursion `u_2 = 1`, `u_{2p} = u_p + √(u_p² + 1)` against `cot(π/2p)`.
    Cotlar {
        #[arg(long, default_value_t = 20)]
        k: u32,
    },
    /// Moments of truncated Toeplitz powers against the group trace.
    Szego {
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,6")]
        orders: Vec<u32>,
        /// Use the 2×2 coefficient `e_12` instead of the scalar `1`.
        #[arg(long)]
        block: bool,
    },
    /// Reiter-weighted compressions against `L^p(tr ⊗ τ)` norms.
    Reiter {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4", value_parser = exponent)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        sizes: Vec<usize>,
        /// Spectrum of the random element: `{-radius..radius}`.
        #[arg(long, default_value_t = 3)]
        radius: i64,
        #[arg(long, default_value_t = 1)]
        block: usize,
    },
    /// Extend a rank-one relative multiplier read from JSON.
    Extend {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Extend and verify seeded random rank-one specifications (or one from `--input`).
    VerifyExtend {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
        #[arg(long, default_value_t = 10)]
        max_support: usize,
    },
    /// Fourier norm against Toeplitz Schur norm for random symbols on ℤ_N.
    TransferCheck {
        #[arg(long, value_delimiter = ',', default_value = "8,16")]
        sizes: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4", value_parser = exponent)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long)]
        amplify: Option<usize>,
    },
    /// Unconditional constant of a support, full `n × n` unless `--input` is given.
    Uncond {
        /// JSON `{rows, cols, support: [[r, c], ...]}`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        size: usize,
        #[arg(long, default_value = "4", value_parser = exponent)]
        p: f64,
        #[arg(long, value_enum, default_value_t = SignArg::Unimodular)]
        mode: SignArg,
    },
    /// Greedy selection with distinct sums on ℤ and the transferred grid bound.
    Sumset {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,4", value_parser = exponent)]
        p: Vec<f64>,
    },
    /// Skipped block sums of an approximating sequence.
    SkippedBlocks {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.1, value_parser = positive)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = SequenceArg::Fejer)]
        sequence: SequenceArg,
        /// Group order for truncation sequences.
        #[arg(long, default_value_t = 1u64 << 62)]
        order: u64,
        /// JSON `{rows: [...], cols: [...]}` with candidate elements; naturals when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also compare the transferred symbol with the triangular truncation on `S^p`.
        #[arg(long)]
        obstruction: bool,
        #[arg(long, default_value = "4", value_parser = exponent)]
        p: f64,
    },
    /// Atomic symbols on `L^p`, `p < 1`: isometry for one atom, contraction for several.
    AtomicCheck {
        #[arg(long, default_value = "0.5", value_parser = exponent)]
        p: f64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        /// Order `N` of the cyclic group.
        #[arg(long, default_value_t = 16)]
        order: u64,
        #[arg(long, default_value_t = 2)]
        block: usize,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s}")),
    }
}

fn exponent(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        _ => positive(s),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MULTLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("MULTLAB_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("MULTLAB_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let report = match commands::run(&cli.command, &cli.common) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let meta = Meta::new(commands::name(&cli.command), cli.common.seed, report.claim);
    let text = match cli.common.format {
        Format::Csv => report.to_csv(&meta),
        Format::Json => match serde_json::to_string_pretty(&report.to_document(meta)) {
            Ok(mut s) => {
                s.push('\n');
                s
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
    };
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    eprintln!("{}: {verdict}", commands::check_label(&cli.command));
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
