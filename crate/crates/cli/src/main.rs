//! `pvcompare`: inference on the positive/negative predictive values of two
//! paired binary diagnostic tests, plus the Monte Carlo evaluation grids.

mod ingest;
mod report;
mod simulate;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pvcompare::inference::RatioForm;
use pvcompare::{
    ci_difference, ci_ratio, global_test, individual_test, noninferiority_test,
    sample_size_difference, sample_size_ratio, CiVariant, Family, MethodId, PairedCounts, Target,
    Variant,
};

#[derive(Parser)]
#[command(
    name = "pvcompare",
    version,
    about = "Compare positive/negative predictive values of two paired diagnostic tests",
    after_help = "Counts are listed x1..x8 over the 2x2x2 table: the S=+ row then the S=- row,\n\
                  within each row (A+,B+), (A+,B-), (A-,B+), (A-,B-).\n\
                  Example (Weiner data): pvcompare analyze --counts 473,81,29,25,22,44,46,151"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis: estimates, the six CIs, and all individual and global tests
    Analyze {
        #[command(flatten)]
        source: CountsSource,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Confidence interval for one method and target
    Ci {
        #[command(flatten)]
        source: CountsSource,
        /// One of d, d(a), LR, LR(a), R, R(a)
        #[arg(long, value_parser = parse_method)]
        method: MethodId,
        #[arg(long, value_enum, default_value_t = TargetArg::Pos)]
        target: TargetArg,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Individual homogeneity test for one method and target
    Test {
        #[command(flatten)]
        source: CountsSource,
        /// One of the nine methods d, d(a), d(p), LR, ..., R(p)
        #[arg(long, value_parser = parse_method)]
        method: MethodId,
        #[arg(long, value_enum, default_value_t = TargetArg::Pos)]
        target: TargetArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Global homogeneity test (both predictive-value pairs jointly)
    GlobalTest {
        #[command(flatten)]
        source: CountsSource,
        #[arg(long, value_parser = parse_method)]
        method: MethodId,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// One-sided non-inferiority test against a margin
    Noninferiority {
        #[command(flatten)]
        source: CountsSource,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, value_enum, default_value_t = VariantArg::Classic)]
        variant: VariantArg,
        /// Difference margin (delta <= 0), for --family difference
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        /// Ratio margin (0 < rho <= 1), for the ratio families
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = TargetArg::Pos)]
        target: TargetArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Sample size for the one-sided non-inferiority design
    Samplesize {
        #[arg(long, value_enum)]
        family: SampleSizeFamily,
        /// Anticipated PPV of test A
        #[arg(long)]
        pa: f64,
        /// Anticipated PPV of test B
        #[arg(long)]
        pb: f64,
        /// Anticipated positive-diagnosis rate of test A
        #[arg(long)]
        ta: f64,
        /// Anticipated positive-diagnosis rate of test B
        #[arg(long)]
        tb: f64,
        /// Anticipated probability of (A,B,S) = (+,+,+)
        #[arg(long)]
        p1: f64,
        /// Anticipated probability of (A,B,S) = (+,+,-)
        #[arg(long)]
        p5: f64,
        /// Null margin: delta for difference, rho for ratio
        #[arg(long, allow_hyphen_values = true)]
        margin: f64,
        /// Alternative value: delta1 for difference, rho1 for ratio
        #[arg(long, allow_hyphen_values = true)]
        margin1: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.2)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a simulation grid file and write CSV + JSON reports
    Simulate {
        /// Grid file: a JSON list of {scenario, n, N, alpha, methods, metric, seed}
        #[arg(long, value_name = "FILE")]
        grid: PathBuf,
        /// Output prefix; writes <prefix>.csv and <prefix>.json
        #[arg(long, default_value = "pvcompare-report")]
        out: PathBuf,
        /// Master seed filling grid entries that omit one
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (default: all cores); results do not depend on it
        #[arg(long)]
        workers: Option<usize>,
        /// Override the replication count of every entry
        #[arg(long)]
        replications: Option<u64>,
    },
}

#[derive(Args)]
struct CountsSource {
    /// Inline counts: eight comma-separated nonnegative integers x1..x8
    #[arg(long, value_name = "X1,...,X8")]
    counts: Option<String>,
    /// Counts CSV file with header x1,...,x8 and one row
    #[arg(long, value_name = "FILE")]
    counts_csv: Option<PathBuf>,
    /// Counts JSON file of the form {"x": [x1, ..., x8]}
    #[arg(long, value_name = "FILE")]
    counts_json: Option<PathBuf>,
    /// Replace zero cells by 0.05 before analysis (never done silently)
    #[arg(long)]
    zero_sub: bool,
}

impl CountsSource {
    fn load(&self) -> Result<(PairedCounts, bool)> {
        let sources = [
            self.counts.is_some(),
            self.counts_csv.is_some(),
            self.counts_json.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if sources != 1 {
            bail!("provide exactly one of --counts, --counts-csv, --counts-json");
        }
        let counts = if let Some(spec) = &self.counts {
            ingest::parse_inline(spec)?
        } else if let Some(path) = &self.counts_csv {
            ingest::read_csv(path)?
        } else {
            ingest::read_json(self.counts_json.as_ref().unwrap())?
        };
        let counts = if self.zero_sub {
            counts.zero_substitute()
        } else {
            counts
        };
        Ok((counts, self.zero_sub))
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Pos,
    Neg,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Pos => Target::Positive,
            TargetArg::Neg => Target::Negative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Difference,
    LogRatio,
    DirectRatio,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Difference => Family::Difference,
            FamilyArg::LogRatio => Family::LogRatio,
            FamilyArg::DirectRatio => Family::DirectRatio,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Classic,
    Adjusted,
    Pooled,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Classic => Variant::Classic,
            VariantArg::Adjusted => Variant::Adjusted,
            VariantArg::Pooled => Variant::Pooled,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleSizeFamily {
    Difference,
    Ratio,
}

fn parse_method(s: &str) -> std::result::Result<MethodId, String> {
    s.parse().map_err(|e: pvcompare::Error| e.to_string())
}

fn require_text_or_json(format: Format) -> Result<()> {
    if format == Format::Csv {
        bail!("--format csv is only available for the analyze command");
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze {
            source,
            alpha,
            format,
        } => {
            let (counts, zero_sub) = source.load()?;
            let report = report::analyze(&counts, alpha, zero_sub)?;
            match format {
                Format::Text => print!("{}", report::render_text(&report)),
                Format::Json => print_json(&report)?,
                Format::Csv => print!("{}", report::render_csv(&report)),
            }
        }
        Command::Ci {
            source,
            method,
            target,
            alpha,
            format,
        } => {
            require_text_or_json(format)?;
            let (counts, _) = source.load()?;
            let variant = match method.variant {
                Variant::Classic => CiVariant::Classic,
                Variant::Adjusted => CiVariant::Adjusted,
                Variant::Pooled => {
                    bail!("method {method} does not define a confidence interval; use d, d(a), LR, LR(a), R or R(a)")
                }
            };
            let target: Target = target.into();
            let ci = match method.family {
                Family::Difference => ci_difference(&counts, variant, alpha, target)?,
                Family::LogRatio => ci_ratio(&counts, RatioForm::Log, variant, alpha, target)?,
                Family::DirectRatio => {
                    ci_ratio(&counts, RatioForm::Direct, variant, alpha, target)?
                }
            };
            match format {
                Format::Json => print_json(&ci)?,
                _ => println!(
                    "{} {:.0}% CI [{}]: ({:.4}, {:.4})",
                    method,
                    100.0 * (1.0 - alpha),
                    target_parameter(method.family, target),
                    ci.lower,
                    ci.upper
                ),
            }
        }
        Command::Test {
            source,
            method,
            target,
            format,
        } => {
            require_text_or_json(format)?;
            let (counts, _) = source.load()?;
            let target: Target = target.into();
            let t = individual_test(&counts, method, target)?;
            match format {
                Format::Json => print_json(&t)?,
                _ => println!(
                    "{} individual test [{}]: statistic = {:.4} (df = 1), p = {:.4}",
                    method,
                    target_parameter(method.family, target),
                    t.statistic,
                    t.p_value
                ),
            }
        }
        Command::GlobalTest {
            source,
            method,
            format,
        } => {
            require_text_or_json(format)?;
            let (counts, _) = source.load()?;
            let t = global_test(&counts, method)?;
            match format {
                Format::Json => print_json(&t)?,
                _ => println!(
                    "{} global test: statistic = {:.4} (df = 2), p = {:.4}",
                    method, t.statistic, t.p_value
                ),
            }
        }
        Command::Noninferiority {
            source,
            family,
            variant,
            delta,
            rho,
            alpha,
            target,
            format,
        } => {
            require_text_or_json(format)?;
            let (counts, _) = source.load()?;
            let family: Family = family.into();
            let margin = match family {
                Family::Difference => {
                    if rho.is_some() {
                        bail!("--rho does not apply to --family difference; use --delta");
                    }
                    delta.ok_or_else(|| anyhow::anyhow!("--family difference needs --delta"))?
                }
                _ => {
                    if delta.is_some() {
                        bail!("--delta does not apply to the ratio families; use --rho");
                    }
                    rho.ok_or_else(|| anyhow::anyhow!("the ratio families need --rho"))?
                }
            };
            let r = noninferiority_test(
                &counts,
                family,
                variant.into(),
                margin,
                alpha,
                target.into(),
            )?;
            match format {
                Format::Json => print_json(&r)?,
                _ => {
                    println!(
                        "non-inferiority test (margin {margin}, alpha {alpha}): z = {:.4} vs critical {:.4}, one-sided p = {:.4}",
                        r.z, r.critical, r.p_one_sided
                    );
                    println!(
                        "{}",
                        if r.reject {
                            "reject H: the data support superiority over the margin"
                        } else {
                            "do not reject H"
                        }
                    );
                }
            }
        }
        Command::Samplesize {
            family,
            pa,
            pb,
            ta,
            tb,
            p1,
            p5,
            margin,
            margin1,
            alpha,
            beta,
            format,
        } => {
            require_text_or_json(format)?;
            let inputs = pvcompare::SampleSizeInputs {
                p_a: pa,
                p_b: pb,
                t_a: ta,
                t_b: tb,
                p1,
                p5,
                alpha,
                beta,
            };
            let ss = match family {
                SampleSizeFamily::Difference => sample_size_difference(&inputs, margin, margin1)?,
                SampleSizeFamily::Ratio => sample_size_ratio(&inputs, margin, margin1)?,
            };
            match format {
                Format::Json => print_json(&serde_json::json!({
                    "inputs": inputs,
                    "margin": margin,
                    "margin1": margin1,
                    "n": ss.n,
                    "raw": ss.raw,
                }))?,
                _ => println!(
                    "required sample size: n = {} (raw {:.4}) for margins {} -> {} at alpha {}, beta {}",
                    ss.n, ss.raw, margin, margin1, alpha, beta
                ),
            }
        }
        Command::Simulate {
            grid,
            out,
            seed,
            workers,
            replications,
        } => {
            let specs = simulate::load_grid(&grid, seed, replications)?;
            let report = match workers {
                Some(threads) => rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .context("cannot build worker pool")?
                    .install(|| simulate::simulate(&specs, seed)),
                None => simulate::simulate(&specs, seed),
            };
            let csv_path = out.with_extension("csv");
            let json_path = out.with_extension("json");
            std::fs::write(&csv_path, simulate::render_csv(&report))
                .with_context(|| format!("cannot write {}", csv_path.display()))?;
            std::fs::write(&json_path, serde_json::to_string_pretty(&report)?)
                .with_context(|| format!("cannot write {}", json_path.display()))?;
            print!("{}", simulate::render_text(&report));
            println!("wrote {}", csv_path.display());
            println!("wrote {}", json_path.display());
        }
    }
    Ok(())
}

fn target_parameter(family: Family, target: Target) -> &'static str {
    match (family, target) {
        (Family::Difference, Target::Positive) => "d",
        (Family::Difference, Target::Negative) => "dbar",
        (_, Target::Positive) => "R",
        (_, Target::Negative) => "Rbar",
    }
}
