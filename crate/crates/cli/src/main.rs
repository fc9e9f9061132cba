use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sociokb::metrics::oracle::run_oracle_check;
use sociokb::metrics::{ClosenessMode, EigenvectorMode, MetricOptions};
use sociokb::pipeline::{cmd_export, cmd_run, cmd_validate, ExportFormat, RunConfig, RunSummary};
use sociokb::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sociokb",
    about = "Sociometric survey analysis over a rule-saturated knowledge base"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a questionnaire definition and a rule file.
    Validate {
        #[arg(long)]
        questionnaire: Option<PathBuf>,
        /// Defaults to the bundled rules.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Run the whole pipeline and write every report.
    Run(RunArgs),
    /// Run the pipeline but write only graph and fact files.
    Export(RunArgs),
    /// Compare the metric implementations with brute-force oracles.
    OracleCheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
    },
    /// Print the version.
    Version,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    questionnaire: PathBuf,
    #[arg(long)]
    responses: PathBuf,
    /// Defaults to the bundled rules.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    qpe: String,
    #[arg(long)]
    out: PathBuf,
    /// Treat every tie as reciprocated.
    #[arg(long)]
    symmetrize: bool,
    #[arg(long, default_value = "wf")]
    closeness: ClosenessMode,
    #[arg(long, default_value = "symmetrized")]
    eigenvector: EigenvectorMode,
    #[arg(long)]
    normalize_betweenness: bool,
    /// Comma-separated: pajek, graphml, csv, facts.
    #[arg(long, value_delimiter = ',', default_value = "pajek")]
    formats: Vec<ExportFormat>,
    #[arg(long, default_value_t = 3)]
    top_k: usize,
    /// Accepted for symmetry with oracle-check; the pipeline uses no randomness.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn config(self) -> RunConfig {
        let mut c = RunConfig::new(self.questionnaire, self.responses, self.qpe, self.out);
        c.rules_path = self.rules;
        c.symmetrize = self.symmetrize;
        c.metrics = MetricOptions {
            closeness: self.closeness,
            eigenvector: self.eigenvector,
            normalize_betweenness: self.normalize_betweenness,
        };
        c.formats = self.formats.into_iter().collect::<BTreeSet<_>>();
        c.top_k = self.top_k;
        c
    }
}

fn report_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    })
}

fn print_summary(s: &RunSummary) {
    println!(
        "{} networks, {} facts, {} answers ingested, saturated in {} rounds",
        s.networks, s.facts, s.ingestion.ingested, s.saturation.rounds
    );
    for p in &s.written {
        println!("wrote {}", p.display());
    }
    eprint!("{}", s.timing_table());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Validate {
            questionnaire,
            rules,
        } => match cmd_validate(questionnaire.as_deref(), rules.as_deref()) {
            Ok(problems) if problems.is_empty() => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Ok(problems) => {
                for p in problems {
                    eprintln!("{p}");
                }
                ExitCode::from(EXIT_VALIDATION)
            }
            Err(e) => report_error(&e),
        },
        Command::Run(args) => match cmd_run(&args.config()) {
            Ok(s) => {
                print_summary(&s);
                ExitCode::SUCCESS
            }
            Err(e) => report_error(&e),
        },
        Command::Export(args) => match cmd_export(&args.config()) {
            Ok(s) => {
                print_summary(&s);
                ExitCode::SUCCESS
            }
            Err(e) => report_error(&e),
        },
        Command::OracleCheck { seed, trials } => {
            let r = run_oracle_check(seed, trials as usize);
            println!(
                "{} graphs ({} exhaustive, {} random, seed {})",
                r.graphs, r.exhaustive_graphs, r.random_graphs, r.seed
            );
            println!("degree mismatches:         {}", r.degree_mismatches);
            println!(
                "max betweenness deviation: {:e}",
                r.max_betweenness_deviation
            );
            println!("max closeness deviation:   {:e}", r.max_closeness_deviation);
            println!("min eigenvector cosine:    {}", r.min_eigenvector_cosine);
            if r.passed() {
                println!("pass");
                ExitCode::SUCCESS
            } else {
                println!("FAIL: {}", r.failures.join(", "));
                ExitCode::from(EXIT_RUNTIME)
            }
        }
        Command::Version => {
            println!("sociokb {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
    }
}
