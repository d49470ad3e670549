use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qbmm::bench::{self, BenchPlan, EllTarget, Envelope};
use qbmm::fit;
use qbmm::format;
use qbmm::validate::{self, Suite};
use qbmm_core::bmm::{bmm, verify, DEFAULT_C_FIT, DEFAULT_K_LOG};
use qbmm_core::graph_collision::{all_gc, brute_force_gc, GcInstance};
use qbmm_core::instances::{side_matrices, Family};
use qbmm_core::search::{Mode, SearchConfig, SimContext, DEFAULT_C_REP};

/// Query-counting simulator for output-sensitive Boolean matrix multiplication.
#[derive(Parser)]
#[command(name = "qbmm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Faithful,
    Forced,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Faithful => Mode::Faithful,
            ModeArg::Forced => Mode::ForcedSuccess,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct SimArgs {
    #[arg(long, value_enum, default_value = "faithful")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repetition constant: each bounded-error search repeats ceil(c_rep * log2(N + 2)) times.
    #[arg(long, default_value_t = DEFAULT_C_REP)]
    c_rep: f64,
}

impl SimArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            mode: self.mode.into(),
            c_rep: self.c_rep,
            rng_seed: self.seed,
            ..SearchConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Multiply two matrix files; prints C to stdout and a report to stderr.
    Multiply {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Find all graph collisions: the graph is the complement of C, the oracles are
    /// two 0/1 vector files.
    Gc {
        c: PathBuf,
        f_a: PathBuf,
        f_b: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run a benchmark sweep and write one CSV row per cell.
    Bench {
        /// Comma-separated families (random, target-ell, threshold, single-witness).
        #[arg(long, default_value = "random", value_delimiter = ',')]
        families: Vec<Family>,
        #[arg(long, default_value = "16,32,64,128,256", value_delimiter = ',')]
        n: Vec<usize>,
        /// Comma-separated output-density targets, e.g. 1,n,n^1.5,0.25n^2,n^2.
        #[arg(long, default_value = "1,n,n^1.5,0.25n^2,n^2", value_delimiter = ',')]
        ell: Vec<EllTarget>,
        /// Comma-separated seeds; `a..b` expands to a half-open range.
        #[arg(long, default_value = "0..10", value_delimiter = ',')]
        seeds: Vec<SeedSpec>,
        #[arg(long, value_enum, default_value = "forced")]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_C_REP)]
        c_rep: f64,
        #[arg(long, default_value_t = DEFAULT_C_FIT)]
        c_fit: f64,
        #[arg(long, default_value_t = DEFAULT_K_LOG)]
        k_log: f64,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Run the calibration plan instead (every family, n in {8,16}, 200 seeds).
        #[arg(long)]
        calibration: bool,
        /// Also write each cell's A and B files into this directory.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Fit log(queries) against log(n * sqrt(ell + 1)) over a bench CSV.
    Fit {
        csv: PathBuf,
        /// Print calibrated C_fit and k_log for the rows instead of the fit.
        #[arg(long)]
        calibrate: bool,
    },
    /// Run invariant suites and print per-invariant pass counts.
    Validate {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 200)]
        seeds: u64,
    },
}

#[derive(Clone, Debug)]
struct SeedSpec(Vec<u64>);

impl std::str::FromStr for SeedSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad seed `{s}` (expected an integer or a..b)");
        match s.split_once("..") {
            Some((lo, hi)) => {
                let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
                Ok(SeedSpec((lo..hi).collect()))
            }
            None => Ok(SeedSpec(vec![s.trim().parse().map_err(|_| bad())?])),
        }
    }
}

/// Usage or input error: exit status 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<bool, Usage> {
    match command {
        Command::Multiply { a, b, sim } => {
            let a = format::read_matrix_file(&a)?;
            let b = format::read_matrix_file(&b)?;
            let (c, report) = bmm(&a, &b, sim.config())?;
            let ok = verify(&a, &b, &c);
            std::io::stdout().write_all(format::write_matrix(&c).as_bytes())?;
            eprintln!(
                "ell={} witnesses={} queries_A={} queries_B={} queries_total={} failure_budget={:.6} verify={}",
                c.count_ones(),
                report.witnesses,
                report.queries_a,
                report.queries_b,
                report.queries_total(),
                report.accumulated_failure_bound,
                if ok { "pass" } else { "fail" }
            );
            Ok(ok)
        }
        Command::Gc { c, f_a, f_b, sim } => {
            let c = format::read_matrix_file(&c)?;
            let f_a = format::read_vector_file(&f_a)?;
            let f_b = format::read_vector_file(&f_b)?;
            if f_a.len() != c.dim() || f_b.len() != c.dim() {
                return Err(Usage(format!(
                    "oracle lengths {} and {} do not match dimension {}",
                    f_a.len(),
                    f_b.len(),
                    c.dim()
                )));
            }
            let (a, b) = side_matrices(&f_a, &f_b);
            let inst = GcInstance::new(&c, &a, &b, 1);
            let mut ctx = SimContext::new(sim.config());
            let out = all_gc(&inst, &mut ctx);
            let mut stdout = std::io::stdout().lock();
            for (i, j) in &out.pairs {
                writeln!(stdout, "{i} {j}")?;
            }
            let exact = out.pairs == brute_force_gc(&inst);
            eprintln!(
                "collisions={} case={:?} queries={} failure_budget={:.6} exact={}",
                out.pairs.len(),
                out.case,
                out.charged_queries,
                out.failure_probability_bound,
                exact
            );
            Ok(true)
        }
        Command::Bench {
            families,
            n,
            ell,
            seeds,
            mode,
            c_rep,
            c_fit,
            k_log,
            jobs,
            calibration,
            dump_dir,
            out,
        } => {
            let mut plan = if calibration {
                BenchPlan::calibration(mode.into())
            } else {
                BenchPlan {
                    families,
                    ns: n,
                    ells: ell,
                    seeds: seeds.into_iter().flat_map(|s| s.0).collect(),
                    ..BenchPlan::default_sweep(mode.into())
                }
            };
            plan.c_rep = c_rep;
            plan.envelope = Envelope { c_fit, k_log };
            plan.jobs = jobs;
            if let Some(dir) = dump_dir {
                bench::dump_instances(&plan, &dir)?;
            }
            let rows = bench::run_plan(&plan)?;
            bench::write_csv_file(&out, &rows)?;
            let within = rows.iter().filter(|r| r.within_bound).count();
            let correct = rows.iter().filter(|r| r.correct).count();
            eprintln!(
                "{} rows, {within} within bound, {correct} correct -> {}",
                rows.len(),
                out.display()
            );
            Ok(true)
        }
        Command::Fit { csv, calibrate } => {
            let rows = bench::read_csv_file(&csv)?;
            if calibrate {
                let env = fit::calibrate(&rows).ok_or_else(|| Usage("no rows to calibrate".into()))?;
                println!("c_fit: {:.6}", env.c_fit);
                println!("k_log: {:.6}", env.k_log);
                return Ok(true);
            }
            let report = fit::fit_rows(&rows)?;
            println!("{report}");
            Ok(report.pass())
        }
        Command::Validate { suite, seeds } => {
            let report = validate::run(suite, seeds);
            println!("{report}");
            Ok(report.all_hold())
        }
    }
}
