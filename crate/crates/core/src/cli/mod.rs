//! The `impartial` command line: `run`, `verify`, `gen` and `bench`.
//!
//! Exit codes: 0 when everything passes, 1 on a verification failure, 2 on
//! usage errors and instances outside the mechanism's class.

pub mod io;
pub mod report;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use crate::engine::{exact_distribution, monte_carlo, to_f64, Mechanism};
use crate::error::{Error, Result};
use crate::mechanisms::{default_smax, VpMode};
use crate::systems::{opt, IndependenceSystem, Instance};
use crate::verify::generators::{
    gen_chain, gen_cycle_girth, gen_fig4, gen_fig5b, gen_mutual_pair, gen_path, gen_random, gen_random_graph,
    gen_star_dependent, gen_triangle, gen_wheel, Fig4Variant, RandomKind, RANDOM_MAX_SIZE,
};
use crate::verify::{check_rank_marginals, instance_battery, ratio, run_suite, Check, Suite};
use crate::Rational;

use self::io::{parse_rational, read_distribution, read_instance, write_instance};
use self::report::{write_csv_file, ReportRow};

#[derive(Debug, Parser)]
#[command(name = "impartial", version, about = "Impartial selection under combinatorial constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a mechanism on an instance and print its output distribution.
    Run(RunArgs),
    /// Run verification suites on an instance or a generated battery.
    Verify(VerifyArgs),
    /// Write a generated instance file.
    Gen(GenArgs),
    /// Worst exact ratio per (family, mechanism) cell against its guarantee.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismName {
    Partition,
    Kpr,
    Dkpr,
    Mpr,
    #[value(name = "vertex_partition", alias = "vp")]
    VertexPartition,
}

#[derive(Debug, Args)]
pub struct MechanismArgs {
    #[arg(long, value_enum)]
    pub mechanism: MechanismName,
    /// Sparsity class of the knapsack mechanisms.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Largest agent size for dkpr, e.g. `4` or `7/2`; defaults to the instance's largest size.
    #[arg(long)]
    pub smax: Option<String>,
    /// Accept weighted scores in vertex_partition (no guarantee applies).
    #[arg(long)]
    pub permissive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub mech: MechanismArgs,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write a one-row CSV report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Record wall-clock runtimes in reports (otherwise 0, keeping them reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Feasibility,
    Impartiality,
    #[value(name = "rank_marginals")]
    RankMarginals,
    Bounds,
    Lemmas,
}

impl From<SuiteName> for Suite {
    fn from(s: SuiteName) -> Suite {
        match s {
            SuiteName::Feasibility => Suite::Feasibility,
            SuiteName::Impartiality => Suite::Impartiality,
            SuiteName::RankMarginals => Suite::RankMarginals,
            SuiteName::Bounds => Suite::Bounds,
            SuiteName::Lemmas => Suite::Lemmas,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Instance file; without it the mechanism's generated battery is used.
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub mech: MechanismArgs,
    /// Suites to run (repeatable); all by default.
    #[arg(long, value_enum)]
    pub suite: Vec<SuiteName>,
    /// Battery size when no instance is given.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check this distribution file against the rank condition instead of the mechanism's output.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Cycle,
    Star,
    Fig4a,
    Fig4b,
    Fig5b,
    Wheel,
    Random,
    Triangle,
    Path,
    #[value(name = "mutual_pair")]
    MutualPair,
    Chain,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Output file (stdout if omitted; required for `star`, which also writes `<stem>_prime.json`).
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Vertices of the wheel (or of a random graph).
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Agents of a random instance or of the uniform matroid behind `cycle`/`star`.
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    /// Rank of the uniform matroid behind `cycle`/`star`.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// System of a random instance: uniform, partition, graphic or knapsack.
    #[arg(long, default_value = "knapsack")]
    pub kind: String,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub binary: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Size perturbation of `fig5b`.
    #[arg(long, default_value = "1/100")]
    pub eps: String,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// JSON list of rows `{family, mechanism, d, smax, bound, count, n, m, k}`; a
    /// five-row matrix covering every mechanism by default.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub timing: bool,
}

/// Parse arguments, run, and return the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error that aborted a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) | Error::RankViolation { .. } => 1,
        _ => 2,
    }
}

pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

fn mechanism_for(args: &MechanismArgs, instance: Option<&Instance>) -> Result<Mechanism> {
    Ok(match args.mechanism {
        MechanismName::Partition => Mechanism::Partition,
        MechanismName::Kpr => Mechanism::Kpr { d: args.d },
        MechanismName::Mpr => Mechanism::Mpr,
        MechanismName::VertexPartition => {
            Mechanism::VertexPartition(if args.permissive { VpMode::Permissive } else { VpMode::Guarantee })
        }
        MechanismName::Dkpr => {
            let s_max = match (&args.smax, instance) {
                (Some(s), _) => parse_rational(s)?,
                (None, Some(inst)) => {
                    let s = default_smax(inst)?;
                    eprintln!("warning: --smax not given; using the largest agent size {s}");
                    s
                }
                (None, None) => {
                    let s = Rational::from_integer(RANDOM_MAX_SIZE);
                    eprintln!("warning: --smax not given; using the largest generated size {s}");
                    s
                }
            };
            Mechanism::Dkpr { d: args.d, s_max }
        }
    })
}

fn elapsed_ms(start: Instant, timing: bool) -> u64 {
    if timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    }
}

fn report_row(id: &str, inst: &Instance, mech: &Mechanism, pass: bool, runtime_ms: u64) -> Result<ReportRow> {
    let bound = mech.guarantee(inst)?;
    Ok(match ratio(inst, mech, bound) {
        Ok(mut r) => {
            r.instance_id = id.to_string();
            r.pass &= pass;
            ReportRow::from_ratio(&r, runtime_ms)
        }
        Err(Error::ZeroOptimum) => {
            let expected = exact_distribution(inst, mech)?.expected_score(&inst.scores);
            ReportRow::without_ratio(id, inst, mech, bound, expected, pass, runtime_ms)
        }
        Err(e) => return Err(e),
    })
}

fn instance_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn cmd_run(a: &RunArgs) -> Result<i32> {
    let start = Instant::now();
    let inst = read_instance(&a.instance)?;
    let mech = mechanism_for(&a.mech, Some(&inst))?;
    let opt_score = opt(&inst).map(|s| inst.score(s)).ok();
    let bound = mech.guarantee(&inst)?;
    let mut out = std::io::stdout().lock();
    let w = |e: std::io::Error| Error::Parse(format!("writing output: {e}"));
    writeln!(out, "mechanism: {mech}").map_err(w)?;
    let (expected, row) = match a.mode {
        Mode::Exact => {
            let dist = exact_distribution(&inst, &mech)?;
            writeln!(out, "support:").map_err(w)?;
            for (s, p) in dist.support() {
                writeln!(out, "  {s}  {p}").map_err(w)?;
            }
            let marginals = dist.marginals(inst.m());
            let shown: Vec<String> = marginals.as_slice().iter().map(|p| p.to_string()).collect();
            writeln!(out, "marginals: [{}]", shown.join(", ")).map_err(w)?;
            let expected = dist.expected_score(&inst.scores);
            writeln!(out, "expected score: {expected}").map_err(w)?;
            (expected, a.report.is_some().then(|| report_row(&instance_id(&a.instance), &inst, &mech, true, 0)))
        }
        Mode::Mc => {
            let rep = monte_carlo(&inst, &mech, a.trials, a.seed, true)?;
            let hw = rep.marginal_half_width();
            writeln!(out, "trials: {} (seed {})", rep.trials, rep.seed).map_err(w)?;
            let shown: Vec<String> = rep.marginals().iter().map(|p| format!("{:.4}", to_f64(*p))).collect();
            writeln!(out, "marginals: [{}] ± {hw:.4} (99%)", shown.join(", ")).map_err(w)?;
            let expected = rep.expected_score();
            writeln!(out, "expected score: {:.4} ± {:.4} (99%)", to_f64(expected), rep.score_half_width()).map_err(w)?;
            let row = opt_score.filter(|o| *o != Rational::from_integer(0)).map(|o| {
                let r = expected / o;
                ReportRow {
                    instance_id: instance_id(&a.instance),
                    mechanism: format!("{}[mc]", mech.label()),
                    m: inst.m(),
                    class: inst.system.kind_name().into(),
                    exact_ratio_num: Some(*r.numer()),
                    exact_ratio_den: Some(*r.denom()),
                    bound_num: *bound.numer(),
                    bound_den: *bound.denom(),
                    pass: r >= bound,
                    expected_score: expected.to_string(),
                    opt_score: o.to_string(),
                    runtime_ms: 0,
                }
            });
            (expected, a.report.is_some().then(|| row.ok_or(Error::ZeroOptimum)))
        }
    };
    if let Some(o) = opt_score {
        if o != Rational::from_integer(0) {
            let r = expected / o;
            writeln!(out, "optimum: {o}  ratio: {r} ({:.4})  guarantee: {bound}", to_f64(r)).map_err(w)?;
        }
    }
    if let (Some(path), Some(row)) = (&a.report, row) {
        let mut row = row?;
        row.runtime_ms = elapsed_ms(start, a.timing);
        write_csv_file(path, &[row])?;
    }
    Ok(0)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let suites: Vec<Suite> =
        if a.suite.is_empty() { Suite::ALL.to_vec() } else { a.suite.iter().map(|&s| s.into()).collect() };
    let (mech, battery) = match &a.instance {
        Some(p) => {
            let inst = read_instance(p)?;
            (mechanism_for(&a.mech, Some(&inst))?, vec![(instance_id(p), inst)])
        }
        None => {
            if a.dist.is_some() {
                return Err(Error::InvalidParam("--dist needs an instance file".into()));
            }
            let mech = mechanism_for(&a.mech, None)?;
            let battery = instance_battery(&mech, a.count, a.seed)?;
            (mech, battery)
        }
    };
    if let Some(dist_path) = &a.dist {
        let (id, inst) = &battery[0];
        let dist = read_distribution(dist_path, inst.m())?;
        let check = check_rank_marginals(&inst.system, &dist)?;
        print_check(id, &check);
        return Ok(if check.passed() { 0 } else { 1 });
    }

    struct Outcome {
        checks: Vec<Check>,
        row: Option<ReportRow>,
    }
    let results: Vec<Result<Outcome>> = battery
        .par_iter()
        .map(|(id, inst)| {
            let start = Instant::now();
            let mut checks = Vec::new();
            for &s in &suites {
                checks.extend(run_suite(s, inst, &mech, a.seed)?);
            }
            let pass = checks.iter().all(Check::passed);
            let row = match &a.report {
                Some(_) => Some(report_row(id, inst, &mech, pass, elapsed_ms(start, a.timing))?),
                None => None,
            };
            Ok(Outcome { checks, row })
        })
        .collect();

    let mut failed = 0usize;
    let mut rows = Vec::new();
    for ((id, _), res) in battery.iter().zip(results) {
        let outcome = res.inspect_err(|_| eprintln!("while verifying {id}:"))?;
        for c in outcome.checks.iter().filter(|c| !c.passed()) {
            print_check(id, c);
        }
        if outcome.checks.iter().any(|c| !c.passed()) {
            failed += 1;
        }
        rows.extend(outcome.row);
    }
    let names: Vec<&str> = suites.iter().map(|s| s.name()).collect();
    println!("{}/{} instances pass [{}]", battery.len() - failed, battery.len(), names.join(", "));
    if let Some(p) = &a.report {
        write_csv_file(p, &rows)?;
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

fn print_check(id: &str, c: &Check) {
    match &c.violation {
        None => println!("{id}: {} passed ({} cases)", c.name, c.cases),
        Some(why) => println!("{id}: {} FAILED after {} cases: {why}", c.name, c.cases),
    }
}

fn uniform_system(m: usize, k: usize) -> Result<IndependenceSystem> {
    if k >= m {
        return Err(Error::InvalidParam(format!("--k {k} must be below --m {m} for a dependent set to exist")));
    }
    Ok(IndependenceSystem::uniform(m, k))
}

pub fn cmd_gen(a: &GenArgs) -> Result<i32> {
    let inst = match a.family {
        Family::Star => {
            let path = a.output.as_ref().ok_or_else(|| Error::InvalidParam("--family star needs -o".into()))?;
            let (g, g2, meta) = gen_star_dependent(&uniform_system(a.m, a.k)?)?;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let prime = path.with_file_name(format!("{stem}_prime.json"));
            write_instance(path, &g)?;
            write_instance(&prime, &g2)?;
            eprintln!(
                "wrote {} and {} (dependent set {}, girth {})",
                path.display(),
                prime.display(),
                meta.dependent_set,
                meta.girth
            );
            return Ok(0);
        }
        Family::Cycle => {
            let (inst, meta) = gen_cycle_girth(&uniform_system(a.m, a.k)?)?;
            eprintln!("dependent set {}, girth {}", meta.dependent_set, meta.girth);
            inst
        }
        Family::Fig4a => gen_fig4(Fig4Variant::A),
        Family::Fig4b => gen_fig4(Fig4Variant::B),
        Family::Fig5b => gen_fig5b(parse_rational(&a.eps)?)?,
        Family::Wheel => gen_wheel(a.n)?,
        Family::Triangle => gen_triangle(),
        Family::Path => gen_path(),
        Family::MutualPair => gen_mutual_pair(),
        Family::Chain => gen_chain(),
        Family::Random => match a.kind.as_str() {
            "graph" => gen_random_graph(a.n, a.m, a.d, a.binary, a.seed)?,
            k => gen_random(RandomKind::parse(k)?, a.m, a.d, a.binary, a.seed)?,
        },
    };
    match &a.output {
        Some(p) => write_instance(p, &inst)?,
        None => print!("{}", io::instance_to_json(&inst)),
    }
    Ok(0)
}

/// One cell of a benchmark matrix.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRow {
    /// `battery` (the mechanism's generated battery), `wheel`, `cycle`, `star`,
    /// or a single named construction (`fig4a`, `fig5b`, `triangle`, ...).
    pub family: String,
    pub mechanism: String,
    #[serde(default = "one")]
    pub d: usize,
    pub smax: Option<String>,
    /// Overrides the mechanism's guarantee.
    pub bound: Option<String>,
    #[serde(default = "fifty")]
    pub count: usize,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
}

fn one() -> usize {
    1
}

fn fifty() -> usize {
    50
}

pub fn default_matrix() -> Vec<BenchRow> {
    let row = |mechanism: &str, smax: Option<&str>| BenchRow {
        family: "battery".into(),
        mechanism: mechanism.into(),
        d: 1,
        smax: smax.map(Into::into),
        bound: None,
        count: 50,
        n: None,
        m: None,
        k: None,
    };
    vec![
        row("partition", None),
        row("kpr", None),
        row("dkpr", Some("4")),
        row("mpr", None),
        row("vertex_partition", None),
    ]
}

fn bench_mechanism(row: &BenchRow) -> Result<Mechanism> {
    let name = MechanismName::from_str(&row.mechanism, false)
        .map_err(|_| Error::InvalidParam(format!("unknown mechanism {:?}", row.mechanism)))?;
    let smax = match (name, &row.smax) {
        (MechanismName::Dkpr, None) => Some(RANDOM_MAX_SIZE.to_string()),
        (_, s) => s.clone(),
    };
    mechanism_for(&MechanismArgs { mechanism: name, d: row.d, smax, permissive: false }, None)
}

fn bench_family(row: &BenchRow, mech: &Mechanism, seed: u64) -> Result<Vec<(String, Instance)>> {
    let (m, k) = (row.m.unwrap_or(4), row.k.unwrap_or(2));
    Ok(match row.family.as_str() {
        "battery" => instance_battery(mech, row.count, seed)?,
        "wheel" => {
            let n = row.n.ok_or_else(|| Error::InvalidParam("wheel rows need n".into()))?;
            vec![(format!("wheel{n}"), gen_wheel(n)?)]
        }
        "cycle" => vec![(format!("cycle_uniform_{m}_{k}"), gen_cycle_girth(&uniform_system(m, k)?)?.0)],
        "star" => {
            let (g, g2, _) = gen_star_dependent(&uniform_system(m, k)?)?;
            vec![(format!("star_uniform_{m}_{k}"), g), (format!("star_prime_uniform_{m}_{k}"), g2)]
        }
        "fig4a" => vec![("fig4a".into(), gen_fig4(Fig4Variant::A))],
        "fig4b" => vec![("fig4b".into(), gen_fig4(Fig4Variant::B))],
        "fig5b" => vec![("fig5b".into(), gen_fig5b(Rational::new(1, 100))?)],
        "triangle" => vec![("triangle".into(), gen_triangle())],
        "path" => vec![("path".into(), gen_path())],
        "mutual_pair" => vec![("mutual_pair".into(), gen_mutual_pair())],
        "chain" => vec![("chain".into(), gen_chain())],
        f => return Err(Error::InvalidParam(format!("unknown bench family {f:?}"))),
    })
}

/// Worst exact ratio of one matrix row. `pass` requires every instance of
/// the family to meet its bound.
pub fn bench_cell(row: &BenchRow, seed: u64, timing: bool) -> Result<ReportRow> {
    let start = Instant::now();
    let mech = bench_mechanism(row)?;
    let family = bench_family(row, &mech, seed)?;
    let fixed = row.bound.as_deref().map(parse_rational).transpose()?;
    let reports: Vec<Result<Option<_>>> = family
        .par_iter()
        .map(|(id, inst)| {
            let bound = match fixed {
                Some(b) => b,
                None => mech.guarantee(inst)?,
            };
            match ratio(inst, &mech, bound) {
                Ok(mut r) => {
                    r.instance_id = format!("{}/{id}", row.family);
                    Ok(Some(r))
                }
                Err(Error::ZeroOptimum) => Ok(None),
                Err(e) => Err(Error::InvalidParam(format!("{id}: {e}"))),
            }
        })
        .collect();
    let reports: Vec<_> = reports.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let all_pass = reports.iter().all(|r| r.pass);
    let worst = reports
        .into_iter()
        .min_by(|a, b| a.ratio.cmp(&b.ratio))
        .ok_or_else(|| Error::InvalidParam(format!("family {:?} has no instance with a positive optimum", row.family)))?;
    let mut out = ReportRow::from_ratio(&worst, elapsed_ms(start, timing));
    out.pass = all_pass;
    Ok(out)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let matrix = match &a.matrix {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<Vec<BenchRow>>(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?
        }
        None => default_matrix(),
    };
    let rows = matrix.iter().map(|r| bench_cell(r, a.seed, a.timing)).collect::<Result<Vec<_>>>()?;
    for r in &rows {
        let ratio = r.ratio().expect("positive optimum");
        println!(
            "{:<28} worst {:<10} ({:.4}) bound {}/{}  {}",
            r.mechanism,
            ratio.to_string(),
            to_f64(ratio),
            r.bound_num,
            r.bound_den,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    match &a.output {
        Some(p) => write_csv_file(p, &rows)?,
        None => report::write_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
}
