mod commands;
mod report;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use koszulkit_core::algebra::{parse_presentation_with, Presentation, QuadraticAlgebra};
use koszulkit_core::koszul::{Kind, Variant};
use koszulkit_core::scalars::Field;

use commands::{Coeff, Outcome, Settings};

#[derive(Parser)]
#[command(name = "koszulkit", version, about = "Koszul calculus for quadratic algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct Shared {
    /// Largest homological degree p.
    #[arg(long, global = true)]
    max_p: Option<usize>,
    /// Largest coefficient weight m.
    #[arg(long, global = true)]
    max_weight: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "A")]
    coeff: CoeffArg,
    #[arg(long, global = true, value_enum, default_value = "standard")]
    variant: VariantArg,
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Random trials per check.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Ground field (Q or Fp for a prime p), overriding the input file.
    #[arg(long, global = true)]
    field: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoeffArg {
    #[value(name = "A")]
    Regular,
    #[value(name = "k")]
    Trivial,
    #[value(name = "dual")]
    Dual,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    Tilde,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Presentation summary and dimensions.
    Info { input: PathBuf },
    /// Bases of the spaces W_p.
    Wspaces { input: PathBuf },
    /// Koszul homology HK_p(A, M)_m.
    Homology { input: PathBuf },
    /// Koszul cohomology HK^p(A, M)_m.
    Cohomology { input: PathBuf },
    /// Higher Koszul (co)homology.
    Higher { input: PathBuf },
    /// Koszul dual presentation.
    Dual {
        input: PathBuf,
        /// Also write the presentation to this file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare A with A^! through the duality isomorphisms.
    DualityCheck {
        input: PathBuf,
        /// Largest total degree p + m compared.
        #[arg(long, default_value_t = 8)]
        max_total: usize,
    },
    /// Hochschild (co)homology of a finite-dimensional algebra from the bar complex.
    Hochschild {
        input: PathBuf,
        /// Refuse complexes with more cells than this.
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        /// Work with A truncated above this weight.
        #[arg(long)]
        truncate: Option<usize>,
    },
    /// Exactness of the left Koszul complex.
    Koszulity {
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_degree: usize,
    },
    /// Run the property suite, optionally including an input algebra.
    Selftest { input: Option<PathBuf> },
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("cannot read standard input")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
    }
}

fn presentation(path: &Path, field: Option<Field>) -> Result<Presentation> {
    let text = read_input(path)?;
    let (pres, warnings) = parse_presentation_with(&text, field).with_context(|| format!("{}", path.display()))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(pres)
}

fn positive(name: &str, v: Option<usize>) -> Result<()> {
    if v == Some(0) {
        bail!("{name} must be positive");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    let sh = &cli.shared;
    positive("--max-p", sh.max_p)?;
    positive("--max-weight", sh.max_weight)?;
    positive("--trials", sh.trials)?;
    let field = sh
        .field
        .as_deref()
        .map(|f| Field::parse(f).with_context(|| format!("bad --field {f:?}")))
        .transpose()?;
    let settings = Settings {
        max_p: sh.max_p,
        max_weight: sh.max_weight,
        coeff: match sh.coeff {
            CoeffArg::Regular => Coeff::Regular,
            CoeffArg::Trivial => Coeff::Trivial,
            CoeffArg::Dual => Coeff::Dual,
        },
        variant: match sh.variant {
            VariantArg::Standard => Variant::Standard,
            VariantArg::Tilde => Variant::Tilde,
        },
        seed: sh.seed,
        trials: sh.trials,
    };
    let p = sh.max_p.unwrap_or(6);
    let w = sh.max_weight.unwrap_or(6);
    let load = |path: &Path, bound: usize| -> Result<QuadraticAlgebra> {
        Ok(QuadraticAlgebra::new(presentation(path, field)?, bound))
    };
    match &cli.command {
        Command::Info { input } => commands::info(&load(input, p + 2)?, &settings),
        Command::Wspaces { input } => commands::wspaces(&load(input, p + 2)?, &settings),
        Command::Homology { input } => commands::koszul_homology(&load(input, w + 2)?, &settings, Kind::Chain),
        Command::Cohomology { input } => commands::koszul_homology(&load(input, w + 2)?, &settings, Kind::Cochain),
        Command::Higher { input } => commands::higher(&load(input, w + 2)?, &settings),
        Command::Dual { input, output } => commands::dual(&load(input, p + 2)?, &settings, output.as_deref()),
        Command::DualityCheck { input, max_total } => {
            positive("--max-total", Some(*max_total))?;
            commands::duality_check(&load(input, max_total + 2)?, &settings, *max_total)
        }
        Command::Hochschild { input, cap, truncate } => {
            positive("--cap", Some(*cap))?;
            positive("--truncate", *truncate)?;
            let a = load(input, truncate.map_or(16, |t| t + 1))?;
            commands::hochschild(&a, &settings, *cap, *truncate)
        }
        Command::Koszulity { input, max_degree } => {
            commands::koszulity_cmd(&load(input, *max_degree)?, &settings, *max_degree)
        }
        Command::Selftest { input } => {
            let pres = input.as_deref().map(|i| presentation(i, field)).transpose()?;
            commands::selftest(pres, &settings)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<koszulkit_core::Error>() {
        Some(err) if err.is_internal() => 2,
        _ => 1,
    }
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
    let format = cli.shared.format;
    match run(cli) {
        Ok(outcome) => {
            let text = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
                    s.push('\n');
                    s
                }
                Format::Table => report::render(&outcome.report),
            };
            print!("{text}");
            if outcome.failed {
                eprintln!("error: self-test failures");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(exit_code(&e))
        }
    }
}
