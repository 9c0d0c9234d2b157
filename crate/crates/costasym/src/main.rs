//! Command-line front end: solve single instances, sweep value grids,
//! optimize halting distributions, simulate server workload, and generate
//! synthetic corpora.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use costasym::attacker::{best_response, Certificate};
use costasym::authsim::measure_workload;
use costasym::corpus::{
    confidence_regions, gen_zipf, ConfidenceRegion, CorpusFormat, EquivalenceSets,
};
use costasym::experiment::{parse_v_grid, run_optimize, run_sweep, ScheduleSpec, SweepReport};
use costasym::game::{BreakpointKind, GameConfig};
use costasym::oracle::{enumerate_optimal, OracleLimits};
use costasym::Error;

#[derive(Parser)]
#[command(
    name = "costasym",
    version,
    about = "Randomized password-hashing schedules versus rational guessing attackers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance: print the attacker's best response as JSON.
    Solve {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Value per cracked account, in the same units as --c-max.
        #[arg(long)]
        v: f64,
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sweep a value grid; emit one baseline and one randomized row per point.
    Sweep {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Log-spaced value grid, as start:stop:points.
        #[arg(long = "v-grid")]
        v_grid: String,
        /// Recorded in report metadata.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output encoding.
        #[arg(long, value_enum, default_value_t = EmitArg::Csv)]
        emit: EmitArg,
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Search for the halting distribution that minimizes cracked accounts.
    Optimize {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Value per cracked account.
        #[arg(long)]
        v: f64,
        /// Objective-evaluation budget for the search.
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        /// Seeds the search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output encoding. CSV carries the comparison rows only; JSON also
        /// includes the optimizer result.
        #[arg(long, value_enum, default_value_t = EmitArg::Json)]
        emit: EmitArg,
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Simulate server-side login workload; print statistics as JSON.
    Authsim {
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Number of login attempts to simulate.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Fraction of attempts using the correct password.
        #[arg(long = "correct-fraction", default_value_t = 1.0)]
        correct_fraction: f64,
        /// Seeds registration and attempt sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Generate a synthetic Zipf-distributed corpus in equivalence-set form.
    GenSynthetic {
        /// Number of distinct candidate passwords.
        #[arg(long)]
        n: u64,
        /// Zipf exponent.
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Number of sampled accounts.
        #[arg(long = "n-a")]
        n_a: u64,
        /// Seeds sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    /// Lines of "frequency multiplicity" with # comments.
    Es,
    /// One password per line.
    Plaintext,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleFamilyArg {
    CostEven,
    TimeEven,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Csv,
    Json,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus path, or '-' to read from stdin.
    #[arg(long)]
    corpus: String,
    /// Corpus encoding.
    #[arg(long, value_enum, default_value_t = FormatArg::Es)]
    format: FormatArg,
}

impl CorpusArgs {
    fn load(&self) -> Result<(EquivalenceSets, String), Error> {
        let format = match self.format {
            FormatArg::Es => CorpusFormat::EquivalenceSets,
            FormatArg::Plaintext => CorpusFormat::Plaintext,
        };
        if self.corpus == "-" {
            let stdin = io::stdin();
            let corpus = EquivalenceSets::parse(stdin.lock(), format)?;
            Ok((corpus, "stdin".to_string()))
        } else {
            let reader = BufReader::new(File::open(&self.corpus)?);
            let corpus = EquivalenceSets::parse(reader, format)?;
            Ok((corpus, self.corpus.clone()))
        }
    }
}

#[derive(Args)]
struct ScheduleArgs {
    /// Breakpoint placement family.
    #[arg(long, value_enum, default_value_t = ScheduleFamilyArg::CostEven)]
    schedule: ScheduleFamilyArg,
    /// Comma-separated time multipliers starting at 1; only with
    /// --schedule custom.
    #[arg(long)]
    betas: Option<String>,
    /// Number of stop points.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Halting distribution: 'uniform' or m comma-separated weights.
    #[arg(long, default_value = "uniform")]
    q: String,
    /// Expected hashing cost budget.
    #[arg(long = "c-max", default_value_t = 1.0)]
    c_max: f64,
}

impl ScheduleArgs {
    fn kind(&self) -> Result<BreakpointKind, Error> {
        match self.schedule {
            ScheduleFamilyArg::CostEven | ScheduleFamilyArg::TimeEven => {
                if self.betas.is_some() {
                    return Err(Error::InvalidParameter(
                        "--betas applies only to --schedule custom".into(),
                    ));
                }
                Ok(match self.schedule {
                    ScheduleFamilyArg::CostEven => BreakpointKind::CostEven,
                    _ => BreakpointKind::TimeEven,
                })
            }
            ScheduleFamilyArg::Custom => {
                let text = self.betas.as_deref().ok_or_else(|| {
                    Error::InvalidParameter("--schedule custom requires --betas".into())
                })?;
                Ok(BreakpointKind::Custom(parse_float_list(text, "--betas")?))
            }
        }
    }

    fn q_weights(&self) -> Result<Option<Vec<f64>>, Error> {
        if self.q == "uniform" {
            Ok(None)
        } else {
            Ok(Some(parse_float_list(&self.q, "--q")?))
        }
    }

    fn spec(&self) -> Result<ScheduleSpec, Error> {
        Ok(ScheduleSpec {
            kind: self.kind()?,
            m: self.m,
            q: self.q_weights()?,
            c_max: self.c_max,
        })
    }
}

#[derive(Args)]
struct OracleArgs {
    /// Largest corpus eligible for exhaustive verification of locally
    /// optimal answers (0 disables; schedules with more than 3 stop points
    /// are never verified exhaustively).
    #[arg(long = "oracle-limit", default_value_t = 10)]
    oracle_limit: usize,
}

impl OracleArgs {
    fn limits(&self) -> OracleLimits {
        OracleLimits {
            max_n_p: self.oracle_limit,
            max_m: 3,
        }
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn write(&self, text: &str) -> Result<(), Error> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn parse_float_list(text: &str, what: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("{what}: '{part}' is not a number")))
        })
        .collect()
}

/// Full detail of one solved instance, for `solve` output.
#[derive(Serialize)]
struct SolveOutput {
    v: f64,
    v_over_cmax: f64,
    m: usize,
    schedule: String,
    q: Vec<f64>,
    alpha: f64,
    taus: Vec<usize>,
    prefix_len: usize,
    instruction_count: usize,
    utility: f64,
    success_rate: f64,
    certificate: Certificate,
    i_max: Option<usize>,
    region: ConfidenceRegion,
}

fn cmd_solve(
    corpus: &CorpusArgs,
    schedule: &ScheduleArgs,
    v: f64,
    oracle: &OracleArgs,
    out: &OutArgs,
) -> Result<(), Error> {
    let (corpus, _) = corpus.load()?;
    let spec = schedule.spec()?;
    let built = spec.build()?;
    let dist = corpus.to_distribution();
    let config = GameConfig::new(v, &built, &dist);
    let limits = oracle.limits();

    let mut resp = best_response(config)?;
    if resp.certificate == Certificate::LocalOnly
        && dist.len() <= limits.max_n_p
        && built.m() <= limits.max_m
    {
        resp = enumerate_optimal(config, limits)?;
    }
    let region = confidence_regions(&corpus, &[0.5])?.regions[0];

    let output = SolveOutput {
        v,
        v_over_cmax: v / built.c_max(),
        m: built.m(),
        schedule: spec.family_label().to_string(),
        q: built.q().to_vec(),
        alpha: built.alpha(),
        taus: resp.seq.taus().to_vec(),
        prefix_len: resp.seq.prefix_len(),
        instruction_count: resp.seq.instruction_count(),
        utility: resp.utility,
        success_rate: resp.success_rate,
        certificate: resp.certificate,
        i_max: resp.i_max,
        region,
    };
    let mut text = serde_json::to_string_pretty(&output).expect("serializable");
    text.push('\n');
    out.write(&text)
}

fn render(report: &SweepReport, emit: EmitArg) -> String {
    match emit {
        EmitArg::Csv => report.to_csv(),
        EmitArg::Json => report.to_json(),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Solve {
            corpus,
            schedule,
            v,
            oracle,
            out,
        } => cmd_solve(corpus, schedule, *v, oracle, out),
        Command::Sweep {
            corpus,
            schedule,
            v_grid,
            seed,
            emit,
            oracle,
            out,
        } => {
            let (corpus, corpus_id) = corpus.load()?;
            let spec = schedule.spec()?;
            let grid = parse_v_grid(v_grid)?;
            let report = run_sweep(&corpus, &corpus_id, &spec, &grid, *seed, oracle.limits())?;
            out.write(&render(&report, *emit))
        }
        Command::Optimize {
            corpus,
            schedule,
            v,
            budget,
            seed,
            emit,
            oracle,
            out,
        } => {
            let (corpus, corpus_id) = corpus.load()?;
            let spec = schedule.spec()?;
            if spec.q.is_some() {
                return Err(Error::InvalidParameter(
                    "optimize searches for --q; pass only the family and --m".into(),
                ));
            }
            let (result, report) = run_optimize(
                &corpus,
                &corpus_id,
                spec.kind.clone(),
                spec.m,
                *v,
                spec.c_max,
                *budget,
                *seed,
                oracle.limits(),
            )?;
            let text = match emit {
                EmitArg::Csv => report.to_csv(),
                EmitArg::Json => {
                    #[derive(Serialize)]
                    struct Combined<'a> {
                        optimization: &'a costasym::defender::DistributionResult,
                        report: &'a SweepReport,
                    }
                    let mut text = serde_json::to_string_pretty(&Combined {
                        optimization: &result,
                        report: &report,
                    })
                    .expect("serializable");
                    text.push('\n');
                    text
                }
            };
            out.write(&text)
        }
        Command::Authsim {
            schedule,
            trials,
            correct_fraction,
            seed,
            out,
        } => {
            let spec = schedule.spec()?;
            let built = spec.build()?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let stats = measure_workload(&built, *trials, *correct_fraction, &mut rng)?;
            let mut text = serde_json::to_string_pretty(&stats).expect("serializable");
            text.push('\n');
            out.write(&text)
        }
        Command::GenSynthetic {
            n,
            s,
            n_a,
            seed,
            out,
        } => {
            let corpus = gen_zipf(*n, *s, *n_a, *seed)?;
            let mut buffer = Vec::new();
            corpus.write_to(&mut buffer)?;
            let text = String::from_utf8(buffer).expect("corpus text is ASCII");
            out.write(&text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests land here too; only genuine usage
            // errors should exit nonzero.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_internal() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
