use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use agesched::rational::parse_rational;
use agesched::{
    cas, default_gamma, extract_witness, gd, gd_upper_bound, hs, lower_bound, optimal_channels,
    schedule_from_chain, solve_chain, stv_for, tga, verify, AoiConstraints, ConstraintsFile,
    CyclicSchedule, Error as CoreError, Rational, DEFAULT_STATE_BUDGET, MAX_SCHEDULE_CELLS,
};
use agesched_bench::{
    format_summary, parse_algorithms, parse_n_spec, run_benchmark, summarize, Algorithm,
    BenchError, BenchmarkConfig, BenchmarkRecord, CSV_HEADER,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Cyclic multi-channel schedules under per-source age-of-information deadlines.
#[derive(Parser)]
#[command(name = "agesched", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheduler {
    Tga,
    Aion,
    Gd,
    Hs,
    Stv,
    Cas,
    Exact,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build a schedule for a constraints file and print it as JSON.
    Schedule {
        /// Constraints JSON (`-` for stdin).
        input: PathBuf,
        #[arg(long, value_enum, default_value = "tga")]
        algorithm: Scheduler,
        #[arg(long, value_parser = parse_gamma)]
        gamma: Option<Rational>,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        state_budget: u64,
        /// Largest grid (channels x slots) to write out.
        #[arg(long, default_value_t = MAX_SCHEDULE_CELLS)]
        max_cells: u128,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a schedule against constraints; exits 0 iff feasible.
    Verify {
        schedule: PathBuf,
        constraints: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Print the lower bound and the value-grouping upper bound.
    Bound { input: PathBuf },
    /// Exact minimum channel count with a witness schedule (tiny instances only).
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        state_budget: u64,
    },
    /// Run the random-instance benchmark.
    Bench(BenchArgs),
}

#[derive(clap::Args)]
struct BenchArgs {
    /// JSON file with any of the flag values below; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Source count, or lo:hi:step. Repeatable.
    #[arg(long = "n")]
    n: Vec<String>,
    #[arg(long)]
    d_min: Option<u64>,
    #[arg(long)]
    d_max: Option<u64>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_gamma)]
    gamma: Option<Rational>,
    /// Comma-separated subset of lb,gd,aion,tga,oracle.
    #[arg(long)]
    algorithms: Option<String>,
    /// Seconds allowed for each TGA run before it is recorded as a timeout.
    #[arg(long)]
    time_budget: Option<f64>,
    #[arg(long)]
    state_budget: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BenchFile {
    algorithms: Option<Vec<String>>,
    d_max: Option<u64>,
    d_min: Option<u64>,
    gamma: Option<String>,
    instances: Option<usize>,
    n: Option<Vec<usize>>,
    seed: Option<u64>,
    state_budget: Option<u64>,
    time_budget: Option<f64>,
}

fn parse_gamma(text: &str) -> Result<Rational, String> {
    let g = parse_rational(text).ok_or_else(|| format!("gamma {text:?} is not a number"))?;
    if g < Rational::from_integer(0) || g >= Rational::from_integer(1) {
        return Err(format!("gamma must lie in [0, 1), got {text}"));
    }
    Ok(g)
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::StateBudgetExceeded { .. }
            | CoreError::TimeBudgetExceeded
            | CoreError::TooLarge { .. } => EXIT_BUDGET,
            CoreError::Infeasible { .. } => EXIT_INFEASIBLE,
            CoreError::Construction(_) => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        let code = match e {
            BenchError::Config(_) => EXIT_USAGE,
            _ => EXIT_INFEASIBLE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn read_text(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::usage(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_constraints(path: &PathBuf) -> Result<AoiConstraints, Failure> {
    let file = ConstraintsFile::from_json(&read_text(path)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    file.constraints()
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::usage(format!("stdout: {e}")))
        }
    }
}

fn build_schedule(
    d: &AoiConstraints,
    algorithm: Scheduler,
    gamma: &Rational,
    state_budget: u64,
    max_cells: u128,
) -> Result<CyclicSchedule, CoreError> {
    match algorithm {
        Scheduler::Tga => tga(d, gamma)?.schedule.flatten(max_cells),
        Scheduler::Aion => schedule_from_chain(&solve_chain(d)?),
        Scheduler::Gd => gd(d),
        Scheduler::Hs => hs(d),
        Scheduler::Stv => stv_for(d),
        Scheduler::Cas => cas(d),
        Scheduler::Exact => {
            let k = optimal_channels(d, state_budget)?;
            extract_witness(d, k, state_budget)
        }
    }
}

fn bench_config(args: &BenchArgs) -> Result<BenchmarkConfig, Failure> {
    let file: BenchFile = match &args.config {
        Some(p) => serde_json::from_str(&read_text(p)?)
            .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
        None => BenchFile::default(),
    };
    let n_values = if args.n.is_empty() {
        file.n.unwrap_or_else(|| (10..=100).step_by(10).collect())
    } else {
        let mut all = Vec::new();
        for spec in &args.n {
            all.extend(parse_n_spec(spec).map_err(Failure::usage)?);
        }
        all
    };
    let gamma = match (&args.gamma, &file.gamma) {
        (Some(g), _) => *g,
        (None, Some(text)) => {
            parse_gamma(text).map_err(|e| Failure::usage(format!("config gamma: {e}")))?
        }
        (None, None) => default_gamma(),
    };
    let algorithms = match (&args.algorithms, file.algorithms) {
        (Some(text), _) => parse_algorithms(text),
        (None, Some(list)) => parse_algorithms(&list.join(",")),
        (None, None) => Ok(vec![
            Algorithm::Lb,
            Algorithm::Gd,
            Algorithm::Aion,
            Algorithm::Tga,
        ]),
    }
    .map_err(Failure::usage)?;
    let time_budget = args.time_budget.or(file.time_budget);
    if time_budget.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
        return Err(Failure::usage(
            "time budget must be a positive number of seconds",
        ));
    }
    Ok(BenchmarkConfig {
        n_values,
        d_min: args.d_min.or(file.d_min).unwrap_or(2),
        d_max: args.d_max.or(file.d_max).unwrap_or(10),
        instances: args.instances.or(file.instances).unwrap_or(100),
        seed: args.seed.or(file.seed).unwrap_or(42),
        gamma,
        algorithms,
        time_budget: time_budget.map(Duration::from_secs_f64),
        state_budget: args
            .state_budget
            .or(file.state_budget)
            .unwrap_or(DEFAULT_STATE_BUDGET),
    })
}

fn record_json(r: &BenchmarkRecord) -> serde_json::Value {
    let cell = |c: agesched_bench::Cell| match c {
        agesched_bench::Cell::Channels(k) => json!(k),
        agesched_bench::Cell::Skipped => serde_json::Value::Null,
        other => json!(other.to_string()),
    };
    json!({
        "aion": cell(r.aion),
        "gd": cell(r.gd),
        "idx": r.idx,
        "lb": r.lb,
        "n": r.n,
        "oracle": cell(r.oracle),
        "seed": r.seed,
        "t_aion_ms": r.t_aion_ms,
        "t_gd_ms": r.t_gd_ms,
        "t_tga_ms": r.t_tga_ms,
        "tga": cell(r.tga),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Schedule {
            input,
            algorithm,
            gamma,
            state_budget,
            max_cells,
            output,
        } => {
            let d = read_constraints(&input)?;
            let gamma = gamma.unwrap_or_else(default_gamma);
            let s = build_schedule(&d, algorithm, &gamma, state_budget, max_cells)?;
            eprintln!(
                "{} channel(s), cycle length {}",
                s.num_channels(),
                s.cycle_length()
            );
            write_out(output.as_ref(), &(s.to_json() + "\n"))
        }
        Command::Verify {
            schedule,
            constraints,
            format,
        } => {
            let s = CyclicSchedule::from_json(&read_text(&schedule)?)
                .map_err(|e| Failure::usage(format!("{}: {e}", schedule.display())))?;
            let d = read_constraints(&constraints)?;
            let report = verify(&s, &d);
            let text = if format == Format::Json {
                json!({
                    "channel_conflicts": report.channel_conflicts.iter()
                        .map(|c| json!({"channel": c.channel, "slot": c.slot, "sources": c.sources}))
                        .collect::<Vec<_>>(),
                    "feasible": report.feasible,
                    "lower_bound": report.lower_bound,
                    "meets_lower_bound": report.meets_lower_bound,
                    "num_channels": report.num_channels,
                    "violations": report.violations.iter()
                        .map(|v| json!({"deadline": v.deadline, "source": v.source, "worst_gap": v.worst_gap}))
                        .collect::<Vec<_>>(),
                })
                .to_string()
            } else {
                format!("{report:#?}")
            };
            write_out(None, &(text + "\n"))?;
            if report.feasible {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_INFEASIBLE,
                    message: "schedule is infeasible".into(),
                })
            }
        }
        Command::Bound { input } => {
            let d = read_constraints(&input)?;
            let text = json!({
                "gd_upper_bound": gd_upper_bound(&d)?,
                "load": d.load().to_string(),
                "lower_bound": lower_bound(&d)?,
            });
            write_out(None, &(text.to_string() + "\n"))
        }
        Command::Oracle {
            input,
            state_budget,
        } => {
            let d = read_constraints(&input)?;
            let k = optimal_channels(&d, state_budget)?;
            let s = extract_witness(&d, k, state_budget)?;
            let text = format!(
                "{{\"channels\":{k},\"lower_bound\":{},\"schedule\":{}}}\n",
                lower_bound(&d)?,
                s.to_json()
            );
            write_out(None, &text)
        }
        Command::Bench(args) => {
            let cfg = bench_config(&args)?;
            let mut sink: Box<dyn Write> = match &args.output {
                Some(p) => Box::new(io::BufWriter::new(
                    fs::File::create(p)
                        .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
                )),
                None => Box::new(io::stdout().lock()),
            };
            let mut io_error = None;
            if args.format == Format::Csv {
                writeln!(sink, "{CSV_HEADER}").map_err(|e| Failure::usage(e.to_string()))?;
            }
            let records = run_benchmark(&cfg, |r| {
                if args.format == Format::Csv {
                    if let Err(e) = writeln!(sink, "{}", r.csv_row()).and_then(|_| sink.flush()) {
                        io_error.get_or_insert(e);
                    }
                }
            })?;
            if let Some(e) = io_error {
                return Err(Failure::usage(format!("writing output: {e}")));
            }
            let summary = summarize(&records);
            if args.format == Format::Json {
                let doc = json!({ "records": records.iter().map(record_json).collect::<Vec<_>>() });
                writeln!(sink, "{doc}").map_err(|e| Failure::usage(e.to_string()))?;
            }
            sink.flush().map_err(|e| Failure::usage(e.to_string()))?;
            eprint!("{}", format_summary(&summary, &cfg.algorithms));
            if records
                .iter()
                .any(|r| r.tga == agesched_bench::Cell::Timeout)
            {
                eprintln!("note: some TGA runs hit the time budget");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
