//! Command-line front end. Results go to `--out` (or stdout); the resolved
//! configuration and wall time are logged to stderr as JSON.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::augment::{estimate_failure, threshold_search};
use crate::congest::tester_verdict;
use crate::conn_tester::{run_conn_test, ConnRun};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::harness::experiments::{
    experiment_cheap_tree, experiment_g1_vs_g2, experiment_round_counts,
    experiment_threshold_scaling, experiment_union_amplification, write_rows, ExperimentRow,
    RoundsConfig, ScalingConfig, SizeRule,
};
use crate::harness::{generate, Family, InstanceSpec, Interior};
use crate::kconn::run_kconn_test;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

pub const DEFAULT_THREADS: u64 = 4;
pub const MAX_THREADS: u64 = 256;
pub const DEFAULT_TRIALS: u64 = 5000;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "stochdist",
    version,
    about = "Stochastic-distance testers, oracles and experiments"
)]
struct Cli {
    /// Worker threads for trial fan-out.
    #[arg(long, global = true, default_value_t = DEFAULT_THREADS, value_parser = clap::value_parser!(u64).range(1..=MAX_THREADS))]
    threads: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Generate a graph file.
    Gen(GenArgs),
    /// Run the connectivity tester once.
    TesterConn(TesterConnArgs),
    /// Run the k-connectivity tester over its repetition schedule.
    TesterKconn(TesterKconnArgs),
    /// Estimate Pr[Add(G, t) is not k-connected].
    Estimate(EstimateArgs),
    /// Smallest grid t whose failure estimate is at most the target.
    Threshold(ThresholdArgs),
    /// Two graphs at equal distance from connectivity with different failure rates.
    #[command(name = "exp-g1g2")]
    ExpG1g2(G1g2Args),
    /// Threshold and failure-bound scaling over an (n, s) grid.
    #[command(name = "exp-lemma31", visible_alias = "exp-scaling")]
    ExpScaling(ScalingArgs),
    /// Round counts of both testers as s grows.
    #[command(name = "exp-rounds")]
    ExpRounds(RoundsArgs),
    /// Failure after two independent augmentations versus one with doubled t.
    #[command(name = "exp-appendix", visible_alias = "exp-amplification")]
    ExpAmplification(AmplificationArgs),
    /// Frequency with which a small witness set gets an all-cheap spanning tree.
    #[command(name = "exp-lemma51", visible_alias = "exp-cheap-tree")]
    ExpCheapTree(CheapTreeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyArg {
    TwoCliques,
    ManyCliques,
    PlantedWitness,
    CirculantKconn,
    ErdosRenyi,
    Edgeless,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum InteriorArg {
    Clique,
    Cycle,
}

#[derive(Args, Debug, Serialize)]
struct OutArg {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    /// Component sizes for the clique families, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, value_enum, default_value = "clique")]
    interior: InteriorArg,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Required for erdos-renyi.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct TesterConnArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct TesterKconnArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    /// Override the repetition schedule.
    #[arg(long)]
    reps: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// Family label written into the row.
    #[arg(long, default_value = "file")]
    label: String,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct ThresholdArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    target: f64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct G1g2Args {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    n_list: Vec<usize>,
    /// Smaller-component sizes: integers or `n/<d>`.
    #[arg(long, value_delimiter = ',', default_value = "2,n/10,n/2")]
    s_list: Vec<String>,
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 10000)]
    bound_trials: u64,
    #[arg(long, default_value_t = 20000)]
    tight_trials: u64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct RoundsArgs {
    #[arg(long, default_value_t = 64)]
    conn_n: usize,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    conn_s: Vec<usize>,
    #[arg(long, default_value_t = 64)]
    kconn_n: usize,
    #[arg(long, default_value_t = 4)]
    kconn_k: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    kconn_s: Vec<usize>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct AmplificationArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 20000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Args, Debug, Serialize)]
struct CheapTreeArgs {
    #[arg(long, default_value_t = 20000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::Parse { .. } => EXIT_DOMAIN,
        Error::Capacity { .. } => EXIT_CAPACITY,
        _ => EXIT_OTHER,
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit status.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads as usize)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_OTHER;
        }
    };
    log_json("config", &cli);
    let started = Instant::now();
    let result = pool.install(|| execute(&cli.command));
    let elapsed = started.elapsed().as_secs_f64();
    match result {
        Ok(()) => {
            log_json("done", &serde_json::json!({ "wall_seconds": elapsed }));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn log_json<T: Serialize>(event: &str, value: &T) {
    let line = serde_json::json!({ "event": event, "data": value });
    eprintln!("{line}");
}

fn read_graph(path: &Path) -> Result<Graph> {
    Graph::parse(&fs::read_to_string(path)?)
}

fn emit(out: &OutArg, bytes: &[u8]) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &OutArg, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, text.as_bytes())
}

fn emit_rows(out: &OutArg, rows: &[ExperimentRow]) -> Result<()> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf)?;
    emit(out, &buf)
}

fn need<T>(value: Option<T>, flag: &str, family: &str) -> Result<T> {
    value.ok_or_else(|| Error::Domain(format!("--{flag} is required for {family}")))
}

fn instance_spec(a: &GenArgs) -> Result<InstanceSpec> {
    let interior = match a.interior {
        InteriorArg::Clique => Interior::Clique,
        InteriorArg::Cycle => Interior::Cycle,
    };
    let blocks = |sizes: Vec<usize>| -> Result<Family> {
        let total: usize = sizes.iter().sum();
        if total != a.n {
            return Err(Error::Domain(format!(
                "sizes sum to {total}, not n = {}",
                a.n
            )));
        }
        Ok(Family::Blocks { sizes, interior })
    };
    let family = match a.family {
        FamilyArg::TwoCliques => {
            let sizes = if a.sizes.is_empty() {
                vec![a.n / 2, a.n - a.n / 2]
            } else {
                a.sizes.clone()
            };
            if sizes.len() != 2 {
                return Err(Error::Domain("two-cliques takes exactly two sizes".into()));
            }
            blocks(sizes)?
        }
        FamilyArg::ManyCliques => {
            if a.sizes.is_empty() {
                return Err(Error::Domain("--sizes is required for many-cliques".into()));
            }
            blocks(a.sizes.clone())?
        }
        FamilyArg::PlantedWitness => Family::PlantedWitness {
            n: a.n,
            s: need(a.s, "s", "planted-witness")?,
            k: need(a.k, "k", "planted-witness")?,
        },
        FamilyArg::CirculantKconn => Family::CirculantKconn {
            n: a.n,
            k: need(a.k, "k", "circulant-kconn")?,
        },
        FamilyArg::ErdosRenyi => Family::ErdosRenyi {
            n: a.n,
            p: need(a.p, "p", "erdos-renyi")?,
        },
        FamilyArg::Edgeless => Family::Edgeless { n: a.n },
    };
    let seed = match a.family {
        FamilyArg::ErdosRenyi => need(a.seed, "seed", "erdos-renyi")?,
        _ => a.seed.unwrap_or(0),
    };
    Ok(InstanceSpec::new(family, seed))
}

#[derive(Serialize)]
struct ThresholdOutput {
    threshold: f64,
    k: usize,
    target: f64,
    trials: u64,
    seed: u64,
    non_edges: usize,
}

fn execute(cmd: &Command) -> Result<()> {
    let started = Instant::now();
    match cmd {
        Command::Gen(a) => {
            let spec = instance_spec(a)?;
            log_json("instance", &spec);
            let g = generate(&spec)?;
            emit(&a.out, g.to_text().as_bytes())
        }
        Command::TesterConn(a) => {
            let g = read_graph(&a.graph)?;
            let report = run_conn_test(&g, a.s, a.seed)?;
            let run = ConnRun {
                verdict: tester_verdict(&report)?,
                report,
            };
            emit_json(&a.out, &run)
        }
        Command::TesterKconn(a) => {
            let g = read_graph(&a.graph)?;
            let run = run_kconn_test(&g, a.s, a.k, a.seed, a.reps)?;
            emit_json(&a.out, &run)
        }
        Command::Estimate(a) => {
            let g = read_graph(&a.graph)?;
            let stats = estimate_failure(&g, a.k, a.t, a.trials, a.seed)?;
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.serialize(stats.csv_row(&a.label, g.n(), None))?;
            let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            emit(&a.out, &buf)
        }
        Command::Threshold(a) => {
            let g = read_graph(&a.graph)?;
            let threshold = threshold_search(&g, a.k, a.target, a.trials, a.seed)?;
            emit_json(
                &a.out,
                &ThresholdOutput {
                    threshold,
                    k: a.k,
                    target: a.target,
                    trials: a.trials,
                    seed: a.seed,
                    non_edges: g.non_edge_count(),
                },
            )
        }
        Command::ExpG1g2(a) => {
            let rows = experiment_g1_vs_g2(a.n, a.trials, a.seed)?;
            finish_experiment("g1g2", started, &a.out, &rows)
        }
        Command::ExpScaling(a) => {
            let s_list = a
                .s_list
                .iter()
                .map(|x| x.parse::<SizeRule>().map_err(Error::Domain))
                .collect::<Result<Vec<_>>>()?;
            let cfg = ScalingConfig {
                n_list: a.n_list.clone(),
                s_list,
                c: a.c,
                threshold_trials: a.trials,
                bound_trials: a.bound_trials,
                tight_trials: a.tight_trials,
            };
            let rows = experiment_threshold_scaling(&cfg, a.seed)?;
            finish_experiment("scaling", started, &a.out, &rows)
        }
        Command::ExpRounds(a) => {
            let cfg = RoundsConfig {
                conn_n: a.conn_n,
                conn_s: a.conn_s.clone(),
                kconn_n: a.kconn_n,
                kconn_k: a.kconn_k,
                kconn_s: a.kconn_s.clone(),
            };
            let rows = experiment_round_counts(&cfg, a.seed)?;
            finish_experiment("rounds", started, &a.out, &rows)
        }
        Command::ExpAmplification(a) => {
            let rows = experiment_union_amplification(a.n, a.trials, a.seed)?;
            finish_experiment("amplification", started, &a.out, &rows)
        }
        Command::ExpCheapTree(a) => {
            let rows = experiment_cheap_tree(a.trials, a.seed)?;
            finish_experiment("cheap-tree", started, &a.out, &rows)
        }
    }
}

/// Grids and trial counts are chosen for desk-scale runs, not taken from any
/// published experiment; the log line says so next to the wall time.
fn finish_experiment(
    tag: &str,
    started: Instant,
    out: &OutArg,
    rows: &[ExperimentRow],
) -> Result<()> {
    log_json(
        "experiment",
        &serde_json::json!({
            "experiment": tag,
            "rows": rows.len(),
            "grid": "artifact choice",
            "wall_seconds": started.elapsed().as_secs_f64(),
        }),
    );
    emit_rows(out, rows)
}
