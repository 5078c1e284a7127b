//! `matchmarket` command-line frontend.
//!
//! Exit status: 0 on success, 1 when a verdict fails, 2 on usage or parse
//! errors. Reports go to stdout (or `--output`), diagnostics to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use matchmarket::buyer_optimal::{check_buyer_optimal, clearing_duals, lattice_meet, reduce_to_buyer_optimal};
use matchmarket::market::{DualSolution, Matching, MarketInstance};
use matchmarket::verify::{brute_force_optimum, verify_market_clearing, DEFAULT_ORACLE_LIMIT};
use matchmarket::{
    audit_incentive, check_equivalence, load_instance, solve_assignment, vcg_prices, InstanceFormat,
    MarketError, MisreportStrategy,
};

use matchmarket_cli::report::*;

#[derive(Debug, Parser)]
#[command(name = "matchmarket", version, about = "Assignment, market-clearing and VCG prices for matching markets")]
struct Cli {
    /// Instance format; inferred from the file extension when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Minor units per major unit for CSV input.
    #[arg(long, global = true, default_value_t = 1)]
    scale: u64,

    /// Largest n accepted by brute-force checks.
    #[arg(long, global = true, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Strategy {
    Random,
    Structured,
    Grid,
    All,
}

impl Strategy {
    fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Structured => "structured",
            Strategy::Grid => "grid",
            Strategy::All => "all",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximum-valuation assignment with the price-raising duals.
    Solve {
        input: PathBuf,
        /// Cross-check the optimum by exhaustive enumeration.
        #[arg(long)]
        oracle: bool,
    },
    /// Market-clearing prices, optionally reduced to buyer optimal.
    Prices {
        input: PathBuf,
        #[arg(long)]
        buyer_optimal: bool,
    },
    /// VCG personalized prices.
    Vcg { input: PathBuf },
    /// Compare buyer-optimal prices with VCG prices.
    Check {
        input: PathBuf,
        /// Include the alternating-path certificate of buyer optimality.
        #[arg(long)]
        certificate: bool,
        /// Certify these prices instead of the computed ones.
        #[arg(long, requires = "certificate")]
        prices: Option<PathBuf>,
    },
    /// Market-clearing verdict for supplied prices.
    Verify {
        input: PathBuf,
        #[arg(long)]
        prices: PathBuf,
    },
    /// Incentive audit for one bidder.
    Audit {
        input: PathBuf,
        #[arg(long)]
        bidder: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Strategy::All)]
        strategy: Strategy,
    },
    /// Componentwise minimum of two market-clearing price vectors.
    Meet {
        input: PathBuf,
        first: PathBuf,
        second: PathBuf,
    },
}

/// A rendered report and whether its verdict passed.
struct Rendered {
    json: String,
    passed: bool,
}

fn render<T: Serialize>(report: &T, passed: bool) -> anyhow::Result<Rendered> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    Ok(Rendered { json, passed })
}

fn read_instance(path: &Path, format: Option<Format>, scale: u64) -> anyhow::Result<MarketInstance> {
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
        _ => Format::Json,
    });
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let format = match format {
        Format::Json => InstanceFormat::Json,
        Format::Csv => InstanceFormat::Csv { scale },
    };
    load_instance(std::io::BufReader::new(file), format)
        .with_context(|| format!("cannot load {}", path.display()))
}

fn read_prices(path: &Path) -> anyhow::Result<PriceFile> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    PriceFile::parse(&text).with_context(|| path.display().to_string())
}

fn run(cli: &Cli) -> anyhow::Result<Rendered> {
    match &cli.command {
        Command::Solve { input, oracle } => {
            let instance = read_instance(input, cli.format, cli.scale)?;
            let (matching, duals) = solve_assignment(&instance);
            let mut report = SolveReport::new(&instance, &matching, &duals);
            let mut passed = true;
            if *oracle {
                let (value, _) = brute_force_optimum(&instance, cli.oracle_limit)?;
                passed = value == matching.value;
                report.oracle = Some(OracleCheck {
                    limit: cli.oracle_limit,
                    value: value.0,
                    agrees: passed,
                });
            }
            render(&report, passed)
        }
        Command::Prices {
            input,
            buyer_optimal,
        } => {
            let instance = read_instance(input, cli.format, cli.scale)?;
            let (matching, mut duals) = solve_assignment(&instance);
            let mut certificate = None;
            if *buyer_optimal {
                duals = reduce_to_buyer_optimal(&instance, &matching, &duals)?;
                let cert = check_buyer_optimal(&instance, &matching, &duals)?;
                certificate = Some(CertificateReport::new(&instance, &cert));
            }
            let passed = certificate.as_ref().is_none_or(CertificateReport::is_certified);
            let report = PricesReport {
                command: "prices".into(),
                scale: instance.scale(),
                buyer_optimal: *buyer_optimal,
                value: matching.value.0,
                assignment: pair_entries(&instance, &matching),
                prices: price_entries(&instance, &duals.prices),
                profits: profit_entries(&instance, &duals.profits),
                certificate,
            };
            render(&report, passed)
        }
        Command::Vcg { input } => {
            let instance = read_instance(input, cli.format, cli.scale)?;
            render(&VcgReportJson::new(&instance, &vcg_prices(&instance)), true)
        }
        Command::Check {
            input,
            certificate,
            prices,
        } => {
            let instance = read_instance(input, cli.format, cli.scale)?;
            let (equivalence, mut passed) = match check_equivalence(&instance) {
                Ok(report) => (report, true),
                Err(MarketError::Mismatch(report)) => (*report, false),
                Err(e) => return Err(e.into()),
            };
            let mut report = CheckReport::new(&instance, &equivalence);
            if *certificate {
                let matching = &equivalence.matching;
                let duals = match prices {
                    Some(path) => {
                        let file = read_prices(path)?;
                        let p = file.price_vector(&instance)?;
                        match clearing_duals(&instance, matching, &p) {
                            Ok(d) => d,
                            Err(e) => {
                                eprintln!("error: supplied prices are not market clearing: {e}");
                                return render(&report, false);
                            }
                        }
                    }
                    None => DualSolution {
                        prices: equivalence.pipeline_prices.clone(),
                        profits: equivalence.pipeline_profits.clone(),
                    },
                };
                let cert = CertificateReport::new(&instance, &check_buyer_optimal(&instance, matching, &duals)?);
                passed &= cert.is_certified();
                report.certificate = Some(cert);
            }
            render(&report, passed)
        }
        Command::Verify { input, prices } => {
            let instance = read_instance(input, cli.format, cli.scale)?;
            let file = read_prices(prices)?;
            let p = file.price_vector(&instance)?;
            let duals = match file.profit_vector(&instance)? {
                Some(q) => DualSolution { prices: p, profits: q },
                None => DualSolution::from_prices(&instance, p)?,
            };
            let matching = match file.assignment_vector(&instance)? {
                Some(assignment) => Matching::from_assignment(&instance, assignment.clone())
                    .unwrap_or(Matching {
                        assignment,
                        value: Default::default(),
                    }),
                None => solve_assignment(&instance).0,
            };
            let verdict = verify_market_clearing(&instance, &matching, &duals);
            if !verdict.market_clearing {
                eprintln!("verdict: not market clearing");
            }
            render(&VerifyReport::new(&instance, &verdict), verdict.market_clearing)
        }
        Command::Audit {
            input,
            bidder,
            trials,
            seed,
            strategy,
        } => {
            let instance = read_instance(input, cli.format, cli.scale)?;
            let index = instance
                .buyer_index(bidder)
                .with_context(|| format!("unknown bidder `{bidder}`"))?;
            let kind: MisreportStrategy = strategy.name().parse()?;
            let audit = audit_incentive(&instance, index, kind, *trials, *seed)?;
            if !audit.passed() {
                eprintln!("verdict: {} profitable misreports", audit.violations);
            }
            let report = AuditReportJson::new(&instance, &audit, strategy.name(), *trials, *seed);
            render(&report, audit.passed())
        }
        Command::Meet {
            input,
            first,
            second,
        } => {
            let instance = read_instance(input, cli.format, cli.scale)?;
            let a = read_prices(first)?.price_vector(&instance)?;
            let b = read_prices(second)?.price_vector(&instance)?;
            match lattice_meet(&instance, &a, &b) {
                Ok(meet) => render(
                    &MeetReport {
                        command: "meet".into(),
                        scale: instance.scale(),
                        market_clearing: true,
                        prices: price_entries(&instance, &meet.prices),
                        profits: profit_entries(&instance, &meet.profits),
                    },
                    true,
                ),
                Err(MarketError::NotMarketClearing(msg)) => {
                    eprintln!("error: input prices are not market clearing: {msg}");
                    Ok(Rendered {
                        json: String::new(),
                        passed: false,
                    })
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn emit(output: Option<&Path>, json: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, json).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(json.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|rendered| {
        if !rendered.json.is_empty() {
            emit(cli.output.as_deref(), &rendered.json)?;
        }
        Ok(rendered.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(bad) = e.downcast_ref::<MarketError>() {
                if matches!(bad, MarketError::OracleLimit { .. }) {
                    eprintln!("hint: raise --oracle-limit or drop --oracle");
                }
            }
            ExitCode::from(2)
        }
    }
}
