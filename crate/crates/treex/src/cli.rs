//! Command-line entry point tying generators, strategies, adversaries, the
//! oracle and the analysis layer into reproducible experiments.
//!
//! Exit codes: 0 on success with all checks passing, 1 when a check fails,
//! 2 on usage or I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use crate::adversary::LbParams;
use crate::analysis::{self, CheckStatus, CsvRow, CSV_HEADER};
use crate::engine::{format_trace, ExplorationState};
use crate::generate::{gen_random, gen_star_static, gen_tightness};
use crate::oracle::{self, AnalyticFamily, OptGuard};
use crate::strategy::{self, Metric, Strategy};
use crate::tree::{parse_tree, serialize_tree, Instance};
use crate::verify;

#[derive(Parser)]
#[command(name = "treex", version, about = "energy-budgeted tree exploration simulator")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for randomized paths; every run prints its effective seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Append experiment rows to this CSV file.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Write the move trace to this file.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Dnd,
    Ldfs,
    Rdfs,
    #[value(name = "greedy-nearest")]
    GreedyNearest,
}

impl From<AlgoArg> for Strategy {
    fn from(a: AlgoArg) -> Strategy {
        match a {
            AlgoArg::Dnd => Strategy::DivideAndExplore,
            AlgoArg::Ldfs => Strategy::Ldfs,
            AlgoArg::Rdfs => Strategy::Rdfs,
            AlgoArg::GreedyNearest => Strategy::GreedyNearest,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Incl,
    Excl,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Incl => Metric::InclRoot,
            MetricArg::Excl => Metric::ExclRoot,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file in the TREE v1 format.
    Gen(GenArgs),
    /// Simulate a strategy on an instance file.
    Run(RunArgs),
    /// Run a strategy against an adaptive adversary.
    Adversary(AdversaryArgs),
    /// Compute the offline optimum of an instance or a family.
    Opt(OptArgs),
    /// Run a named property suite.
    Verify(VerifyArgs),
    /// Evaluate the closed-form lower-bound optimization.
    Lb(LbArgs),
    /// Sweep a family over parameter lists, one CSV row per configuration.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Family: tightness | star | random.
    #[arg(long)]
    family: String,
    #[arg(short, long)]
    k: Option<usize>,
    #[arg(short, long)]
    d: Option<usize>,
    #[arg(short = 'B', long)]
    budget: Option<usize>,
    #[arg(short, long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Number of agents.
    #[arg(short, long)]
    agents: usize,
    /// Energy budget per agent.
    #[arg(short = 'B', long)]
    budget: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Excl)]
    metric: MetricArg,
    /// Also compute the exact optimum and the ratio (small instances).
    #[arg(long)]
    opt: bool,
}

#[derive(Args)]
struct AdversaryArgs {
    /// Family: star | lb.
    #[arg(long)]
    family: String,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[arg(short, long)]
    k: Option<usize>,
    #[arg(short = 'B', long)]
    budget: usize,
    /// Number of subtrees (lb family).
    #[arg(short, long)]
    l: Option<usize>,
    /// Depth of the first hubs (lb family).
    #[arg(long)]
    d1: Option<usize>,
    /// Write the finalization report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct OptArgs {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(short, long)]
    agents: Option<usize>,
    #[arg(short = 'B', long)]
    budget: Option<usize>,
    /// Method on instance files: exact | naive.
    #[arg(long, default_value = "exact")]
    method: String,
    /// Analytic family instead of an instance: star | tightness | lb.
    #[arg(long)]
    family: Option<String>,
    #[arg(short, long)]
    k: Option<usize>,
    #[arg(short, long)]
    d: Option<usize>,
    #[arg(short, long)]
    l: Option<usize>,
    #[arg(long)]
    d1: Option<usize>,
    #[arg(short, long)]
    t: Option<usize>,
    /// Raise the exact-search size guard to n<=N.
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// oracle | lemma1 | lemma3 | lemma4 | ratio3 | tightness | star | lbnum.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 500)]
    count: usize,
}

#[derive(Args)]
struct LbArgs {
    /// Also print the finite-ratio convergence table.
    #[arg(long)]
    convergence: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Family: tightness | lb.
    #[arg(long)]
    family: String,
    /// Comma-separated k values (tightness).
    #[arg(short, long)]
    k: Option<String>,
    /// Comma-separated d values (tightness).
    #[arg(short, long)]
    d: Option<String>,
    /// Comma-separated budgets (lb).
    #[arg(short = 'B', long)]
    budget: Option<String>,
    #[arg(short, long)]
    l: Option<usize>,
    #[arg(long)]
    d1: Option<String>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    CheckFailed(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn parse_list(s: &Option<String>, what: &str) -> Result<Vec<usize>, CliError> {
    let Some(s) = s else { return Ok(Vec::new()) };
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad {what} list entry '{t}'")))
        })
        .collect()
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::CheckFailed(msg)) => {
            eprintln!("{msg}");
            1
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            2
        }
    }
}

fn write_csv(path: &Option<PathBuf>, rows: &[CsvRow]) -> Result<(), CliError> {
    let Some(path) = path else { return Ok(()) };
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.line());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_trace(path: &Option<PathBuf>, trace: &[crate::engine::MoveEvent]) -> Result<(), CliError> {
    let Some(path) = path else { return Ok(()) };
    fs::write(path, format_trace(trace))?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a, cli.seed),
        Command::Run(a) => cmd_run(a, cli.seed, &cli.csv, &cli.trace),
        Command::Adversary(a) => cmd_adversary(a, cli.seed, &cli.csv, &cli.trace),
        Command::Opt(a) => cmd_opt(a),
        Command::Verify(a) => cmd_verify(a, cli.seed),
        Command::Lb(a) => cmd_lb(a),
        Command::Sweep(a) => cmd_sweep(a, cli.seed, &cli.csv),
    }
}

fn cmd_gen(a: GenArgs, seed: u64) -> Result<(), CliError> {
    let instance = match a.family.as_str() {
        "tightness" => gen_tightness(need(a.k, "k")?, need(a.d, "d")?)
            .map_err(|e| CliError::Usage(e.to_string()))?,
        "star" => gen_star_static(need(a.k, "k")?, need(a.budget, "budget")?)
            .map_err(|e| CliError::Usage(e.to_string()))?,
        "random" => {
            let tree = gen_random(need(a.n, "n")?, a.max_degree, seed)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            Instance::new(tree, 1, 0)
        }
        other => return Err(CliError::Usage(format!("unknown family '{other}'"))),
    };
    eprintln!(
        "# config: gen family={} k={:?} d={:?} budget={:?} n={:?} seed={seed}",
        a.family, a.k, a.d, a.budget, a.n
    );
    let text = serialize_tree(&instance.tree);
    match a.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_run(
    a: RunArgs,
    seed: u64,
    csv: &Option<PathBuf>,
    trace: &Option<PathBuf>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.instance)?;
    let tree = parse_tree(&text).map_err(|e| CliError::Io(e.to_string()))?;
    let instance = Instance::new(tree, a.agents, a.budget);
    let strat: Strategy = a.algo.into();
    let metric: Metric = a.metric.into();
    eprintln!(
        "# config: run instance={} algo={} agents={} budget={} metric={:?} seed={seed}",
        a.instance.display(),
        strat.name(),
        a.agents,
        a.budget,
        metric
    );
    let mut st = ExplorationState::from_instance(&instance);
    let run = strategy::run(&mut st, strat);
    println!("alg {}", run.explored(metric));

    let mut opt_value = None;
    if a.opt {
        let opt_incl = oracle::opt_exact(&instance).map_err(|e| CliError::Usage(e.to_string()))?;
        let opt = match metric {
            Metric::InclRoot => opt_incl as i128,
            Metric::ExclRoot => opt_incl as i128 - 1,
        };
        opt_value = Some(opt);
        println!("opt {opt}");
        if run.explored(metric) > 0 {
            let r = Ratio::new(opt, run.explored(metric) as i128);
            println!("ratio {r} ({:.6})", *r.numer() as f64 / *r.denom() as f64);
        }
    }

    let lemma1 = if strat == Strategy::DivideAndExplore && !run.fully_explored {
        let rep = analysis::check_lemma1(&run, &instance.tree);
        println!("lemma1 {}", if rep.pass { "pass" } else { "FAIL" });
        if rep.pass {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    } else {
        CheckStatus::Skip
    };

    write_trace(trace, &run.trace)?;
    let row = CsvRow {
        family: "file".into(),
        params: format!(
            "instance={};n={}",
            a.instance.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
            instance.tree.n()
        ),
        algo: strat.name().into(),
        seed,
        metric,
        alg: run.explored(metric),
        opt: opt_value,
        ratio: opt_value.and_then(|o| {
            (run.explored(metric) > 0).then(|| Ratio::new(o, run.explored(metric) as i128))
        }),
        lemma1,
        lemma3: CheckStatus::Skip,
        lemma4: CheckStatus::Skip,
    };
    write_csv(csv, &[row])?;
    if lemma1 == CheckStatus::Fail {
        return Err(CliError::CheckFailed("lemma1 check failed".into()));
    }
    Ok(())
}

fn cmd_adversary(
    a: AdversaryArgs,
    seed: u64,
    csv: &Option<PathBuf>,
    trace: &Option<PathBuf>,
) -> Result<(), CliError> {
    let strat: Strategy = a.algo.into();
    match a.family.as_str() {
        "star" => {
            let k = need(a.k, "k")?;
            if k < 1 || a.budget < 2 || a.budget % 2 != 0 {
                return Err(CliError::Usage(format!(
                    "star adversary needs k >= 1 and an even budget >= 2, got k={k}, budget={}",
                    a.budget
                )));
            }
            eprintln!(
                "# config: adversary family=star algo={} k={k} budget={} seed={seed}",
                strat.name(),
                a.budget
            );
            let (run, _tree) = verify::run_star(k, a.budget, strat);
            let opt = (k * a.budget) as i128;
            println!("alg {}", run.explored_excl_root);
            println!("opt {opt}");
            let pass = run.explored_excl_root <= k * a.budget / 2;
            println!("bound {}", if pass { "pass" } else { "FAIL" });
            write_trace(trace, &run.trace)?;
            let row = CsvRow {
                family: "star".into(),
                params: format!("k={k};B={}", a.budget),
                algo: strat.name().into(),
                seed,
                metric: Metric::ExclRoot,
                alg: run.explored_excl_root,
                opt: Some(opt),
                ratio: (run.explored_excl_root > 0)
                    .then(|| Ratio::new(opt, run.explored_excl_root as i128)),
                lemma1: CheckStatus::Skip,
                lemma3: CheckStatus::Skip,
                lemma4: CheckStatus::Skip,
            };
            write_csv(csv, &[row])?;
            if !pass {
                return Err(CliError::CheckFailed("star bound violated".into()));
            }
            Ok(())
        }
        "lb" => {
            let l = need(a.l, "l")?;
            let d1 = need(a.d1, "d1")?;
            let params = LbParams::new(l, a.budget, d1)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            eprintln!(
                "# config: adversary family=lb algo={} l={l} budget={} d1={d1} seed={seed}",
                strat.name(),
                a.budget
            );
            let (out, failures) = verify::adversary_criterion(params, strat);
            let report_text = render_final_report(&out, strat);
            print!("{report_text}");
            write_trace(trace, &out.run.trace)?;
            if let Some(path) = &a.report {
                fs::write(path, &report_text)?;
            }
            let l3 = if out.lemma3.iter().all(|c| c.pass) {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            let l4 = if out.lemma4.iter().all(|c| c.pass) {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            let row = CsvRow {
                family: "lb217".into(),
                params: format!("l={l};B={};d1={d1}", a.budget),
                algo: strat.name().into(),
                seed,
                metric: Metric::ExclRoot,
                alg: out.run.explored_excl_root,
                opt: Some(out.report.opt_bound),
                ratio: (out.run.explored_excl_root > 0)
                    .then(|| Ratio::new(out.report.opt_bound, out.run.explored_excl_root as i128)),
                lemma1: CheckStatus::Skip,
                lemma3: l3,
                lemma4: l4,
            };
            write_csv(csv, &[row])?;
            if !failures.is_empty() {
                return Err(CliError::CheckFailed(failures.join("\n")));
            }
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown adversary family '{other}'"))),
    }
}

fn render_final_report(out: &verify::AdversaryOutcome, strat: Strategy) -> String {
    let mut s = String::new();
    let rep = &out.report;
    let _ = writeln!(s, "family lb217");
    let _ = writeln!(s, "algo {}", strat.name());
    let _ = writeln!(
        s,
        "params l={} B={} d1={} d2={} delta={}",
        rep.params.l, rep.params.budget, rep.params.d1, rep.params.d2, rep.params.delta
    );
    let _ = writeln!(s, "t {}", rep.t);
    for sub in &rep.subtrees {
        let cases: Vec<&str> = sub.case_log.iter().map(|c| c.label()).collect();
        let _ = writeln!(
            s,
            "subtree {} cases=[{}] N={} presented={} fully_explored={} a1={:?} a2={:?}",
            sub.index,
            cases.join(","),
            sub.n_budget,
            sub.presented_nonleaf,
            sub.fully_explored,
            sub.a1,
            sub.a2,
        );
    }
    let b_a: Vec<usize> = {
        // derive B_A per agent from the subtree reports
        let mut v = vec![0usize; rep.params.k()];
        for sub in &rep.subtrees {
            for &(a, ba) in &sub.a2 {
                v[a] = ba;
            }
        }
        v
    };
    let m = crate::adversary::checks::classify_m(rep, &b_a);
    let _ = writeln!(s, "partition m0={:?} m1={:?} m2={:?}", m.m0, m.m1, m.m2);
    let _ = writeln!(s, "opt_bound {}", rep.opt_bound);
    let _ = writeln!(s, "opt_replay {}", out.opt_replay_excl_root);
    let _ = writeln!(s, "alg {}", out.run.explored_excl_root);
    let _ = writeln!(
        s,
        "lemma3 {}",
        if out.lemma3.iter().all(|c| c.pass) { "pass" } else { "FAIL" }
    );
    let _ = writeln!(
        s,
        "lemma4 {}",
        if out.lemma4.iter().all(|c| c.pass) { "pass" } else { "FAIL" }
    );
    s
}

fn cmd_opt(a: OptArgs) -> Result<(), CliError> {
    if let Some(family) = &a.family {
        let fam = match family.as_str() {
            "star" => AnalyticFamily::Star {
                k: need(a.k, "k")?,
                budget: need(a.budget, "budget")?,
            },
            "tightness" => AnalyticFamily::Tightness {
                k: need(a.k, "k")?,
                d: need(a.d, "d")?,
            },
            "lb" => AnalyticFamily::LbFinalized {
                l: need(a.l, "l")?,
                budget: need(a.budget, "budget")?,
                d1: need(a.d1, "d1")?,
                t: a.t.unwrap_or(0),
            },
            other => return Err(CliError::Usage(format!("unknown analytic family '{other}'"))),
        };
        let v = oracle::opt_analytic(fam).map_err(|e| CliError::Usage(e.to_string()))?;
        println!("opt {v} (excluding the root)");
        return Ok(());
    }
    let instance_path = a
        .instance
        .as_ref()
        .ok_or_else(|| CliError::Usage("need --instance or --family".into()))?;
    let text = fs::read_to_string(instance_path)?;
    let tree = parse_tree(&text).map_err(|e| CliError::Io(e.to_string()))?;
    let instance = Instance::new(tree, need(a.agents, "agents")?, need(a.budget, "budget")?);
    let guard = OptGuard {
        max_n: a.max_n.unwrap_or(20),
        ..OptGuard::default()
    };
    let v = match a.method.as_str() {
        "exact" => oracle::opt_exact_with_guard(&instance, guard),
        "naive" => oracle::opt_naive_walks(&instance),
        other => return Err(CliError::Usage(format!("unknown method '{other}'"))),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    println!("opt {v} (including the root)");
    Ok(())
}

fn cmd_verify(a: VerifyArgs, seed: u64) -> Result<(), CliError> {
    eprintln!("# config: verify suite={} count={} seed={seed}", a.suite, a.count);
    let rep = verify::run_suite(&a.suite, a.count, seed).map_err(CliError::Usage)?;
    println!("{}", rep.summary());
    if rep.passed() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "{} of {} cases failed",
            rep.failures.len(),
            rep.cases
        )))
    }
}

fn cmd_lb(a: LbArgs) -> Result<(), CliError> {
    let (b1, value) = analysis::lb_optimum();
    println!("b1 {b1:.9}");
    println!("value {value:.9}");
    if a.convergence {
        println!("i l budget d1 ratio");
        for (i, r) in verify::convergence_points(5, 9, b1) {
            let l = 1usize << i;
            let budget = 1usize << (2 * i);
            println!(
                "{i} {l} {budget} {} {:.6}",
                r,
                *r.numer() as f64 / *r.denom() as f64
            );
        }
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs, seed: u64, csv: &Option<PathBuf>) -> Result<(), CliError> {
    let mut rows = Vec::new();
    match a.family.as_str() {
        "tightness" => {
            let ks = parse_list(&a.k, "k")?;
            let ds = parse_list(&a.d, "d")?;
            eprintln!("# config: sweep family=tightness k={ks:?} d={ds:?} seed={seed}");
            for &k in &ks {
                for &d in &ds {
                    let Ok(inst) = gen_tightness(k, d) else {
                        eprintln!("skipping infeasible k={k} d={d}");
                        continue;
                    };
                    let mut st = ExplorationState::from_instance(&inst);
                    let run = strategy::run(&mut st, Strategy::DivideAndExplore);
                    let opt = oracle::opt_analytic(AnalyticFamily::Tightness { k, d })
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    let lemma1 = if run.fully_explored {
                        CheckStatus::Skip
                    } else if analysis::check_lemma1(&run, &inst.tree).pass {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    };
                    rows.push(CsvRow {
                        family: "tightness".into(),
                        params: format!("k={k};d={d}"),
                        algo: "dnd".into(),
                        seed,
                        metric: Metric::ExclRoot,
                        alg: run.explored_excl_root,
                        opt: Some(opt),
                        ratio: (run.explored_excl_root > 0)
                            .then(|| Ratio::new(opt, run.explored_excl_root as i128)),
                        lemma1,
                        lemma3: CheckStatus::Skip,
                        lemma4: CheckStatus::Skip,
                    });
                }
            }
        }
        "lb" => {
            let l = need(a.l, "l")?;
            let budgets = parse_list(&a.budget, "budget")?;
            let d1s = parse_list(&a.d1, "d1")?;
            eprintln!("# config: sweep family=lb l={l} budgets={budgets:?} d1={d1s:?} seed={seed}");
            for (i, &budget) in budgets.iter().enumerate() {
                let d1 = d1s.get(i).copied().ok_or_else(|| {
                    CliError::Usage("need one --d1 entry per budget entry".into())
                })?;
                let params = match LbParams::new(l, budget, d1) {
                    Ok(p) => p,
                    Err(e) => {
                        eprintln!("skipping infeasible l={l} B={budget} d1={d1}: {e}");
                        continue;
                    }
                };
                let (out, _failures) =
                    verify::adversary_criterion(params, Strategy::DivideAndExplore);
                rows.push(CsvRow {
                    family: "lb217".into(),
                    params: format!("l={l};B={budget};d1={d1}"),
                    algo: "dnd".into(),
                    seed,
                    metric: Metric::ExclRoot,
                    alg: out.run.explored_excl_root,
                    opt: Some(out.report.opt_bound),
                    ratio: (out.run.explored_excl_root > 0).then(|| {
                        Ratio::new(out.report.opt_bound, out.run.explored_excl_root as i128)
                    }),
                    lemma1: CheckStatus::Skip,
                    lemma3: if out.lemma3.iter().all(|c| c.pass) {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                    lemma4: if out.lemma4.iter().all(|c| c.pass) {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    },
                });
            }
        }
        other => return Err(CliError::Usage(format!("unknown sweep family '{other}'"))),
    }
    println!("{CSV_HEADER}");
    for r in &rows {
        println!("{}", r.line());
    }
    write_csv(csv, &rows)?;
    Ok(())
}
