//! `purerank` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or input parse error, 3 validation
//! error, 4 convergence failure, 5 I/O error. Failures print a one-line
//! JSON object `{"error": {"kind", "message"}}` on stderr.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use purerank::io::{
    align_classes, align_scores, read_classification_csv, read_scores_csv,
    write_classification_csv, write_scores_csv,
};
use purerank::metrics::DEFAULT_TOP_K;
use purerank::{
    compare, compute, compute_incremental, load_edge_list, load_multi_edge_list, multi_purerank,
    net_score, pagerank, simulate, sojourn_check, ClassId, ClassSummary, Delimiter, Error,
    ExtendedChain, Graph, GraphDelta, LoadOptions, RankCache, SojournReport, SolverOptions,
    WeightColumn,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "purerank",
    version,
    about = "Parameter-free graph ranking and PageRank comparison"
)]
struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, env = "PURERANK_WORKERS", default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label every node R, T or D.
    Classify {
        #[command(flatten)]
        graph: GraphInput,
        /// Also write the class-structure summary as JSON.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Compute PureRank scores.
    Rank {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        solver: Solver,
        /// Cache of a previous run on the input graph; requires --delta.
        #[arg(long, requires = "delta")]
        cache: Option<PathBuf>,
        /// Edge edits applied to the input graph: `src dst weight` or `src dst -`.
        #[arg(long, requires = "cache")]
        delta: Option<PathBuf>,
        /// Write the per-class local vectors for later incremental runs.
        #[arg(long)]
        save_cache: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Compute PageRank scores.
    Pagerank {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        solver: Solver,
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Compare two score files: top-k overlap, Kendall's tau-b, Pearson's r.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Classification CSV for per-class breakdowns.
        #[arg(long)]
        classes: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOP_K)]
        top_k: usize,
        /// Graph name recorded in the report.
        #[arg(long, default_value = "")]
        graph_name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo random-surfer check of the PureRank scores.
    Simulate {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        solver: Solver,
        #[arg(long, default_value_t = 100)]
        surfers: usize,
        /// Steps per surfer.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rank a multi-attribute graph through its splitting network.
    SplitRank {
        /// Lines `src dst attribute [weight]`; negative weights split the attribute.
        #[arg(short, long)]
        input: PathBuf,
        #[command(flatten)]
        solver: Solver,
        /// Positive and negative attribute names for net scores.
        #[arg(long, num_args = 2, value_names = ["POS", "NEG"], requires = "net_output")]
        net: Option<Vec<String>>,
        /// Destination of the `node,net_score` CSV.
        #[arg(long)]
        net_output: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphInput {
    /// Edge list: `src dst [weight]` per line, `#` comments.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Weights::Auto)]
    weights: Weights,
    /// Single-character field separator; whitespace when omitted.
    #[arg(long)]
    delimiter: Option<char>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weights {
    Auto,
    Required,
    Ignore,
}

#[derive(Args)]
struct Solver {
    /// L1 step norm at which iteration stops.
    #[arg(long = "tol", default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long = "max-iter", default_value_t = 50_000)]
    max_iterations: usize,
    /// Self-loop mass of the lazy chain for recurrent classes.
    #[arg(long, default_value_t = 0.5)]
    lazy_factor: f64,
}

impl Solver {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            lazy_factor: self.lazy_factor,
        }
    }
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Destination file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Json(_) => 2,
        Error::Validation(_)
        | Error::NodeOutOfRange { .. }
        | Error::UnknownClass(_)
        | Error::MissingLocal(_)
        | Error::Mismatch(_)
        | Error::InsufficientData { .. } => 3,
        Error::Convergence { .. } => 4,
        Error::Io(_) => 5,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match exit_code(e) {
        2 => "parse",
        3 => "validation",
        4 => "convergence",
        _ => "io",
    }
}

fn open(path: &Path) -> purerank::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn sink(path: Option<&Path>) -> purerank::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> purerank::Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn load_graph(input: &GraphInput) -> purerank::Result<Graph> {
    let options = LoadOptions {
        weights: match input.weights {
            Weights::Auto => WeightColumn::Auto,
            Weights::Required => WeightColumn::Required,
            Weights::Ignore => WeightColumn::Ignore,
        },
        delimiter: input
            .delimiter
            .map_or(Delimiter::Whitespace, Delimiter::Char),
    };
    load_edge_list(open(&input.input)?, options)
}

#[derive(Serialize)]
struct ScoreEntry<'a> {
    node: &'a str,
    score: f64,
    class: String,
}

fn score_entries<'a>(g: &'a Graph, scores: &[f64], classes: &[ClassId]) -> Vec<ScoreEntry<'a>> {
    scores
        .iter()
        .zip(classes)
        .enumerate()
        .map(|(i, (&score, c))| ScoreEntry {
            node: g.label(i),
            score,
            class: c.to_string(),
        })
        .collect()
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    summary: ClassSummary,
    nodes: Vec<NodeClass<'a>>,
}

#[derive(Serialize)]
struct NodeClass<'a> {
    node: &'a str,
    class: String,
}

#[derive(Serialize)]
struct ClassSolve {
    class: String,
    size: usize,
    iterations: usize,
    residual: f64,
    reused: bool,
}

#[derive(Serialize)]
struct RankReport<'a> {
    theta_t: Option<f64>,
    total_sum: f64,
    classes: Vec<ClassSolve>,
    scores: Vec<ScoreEntry<'a>>,
}

#[derive(Serialize)]
struct PageRankReport<'a> {
    damping: f64,
    iterations: usize,
    residual: f64,
    scores: Vec<ScoreEntry<'a>>,
}

#[derive(Serialize)]
struct NodeFrequency<'a> {
    node: &'a str,
    frequency: f64,
    score: f64,
}

#[derive(Serialize)]
struct SimulationReport<'a> {
    surfers: usize,
    steps: usize,
    seed: u64,
    l1_distance: f64,
    theta_t: Option<f64>,
    sojourn: Option<SojournReport>,
    /// Why `sojourn` is absent.
    sojourn_note: Option<String>,
    frequencies: Vec<NodeFrequency<'a>>,
}

fn run(cli: Cli) -> purerank::Result<()> {
    match cli.command {
        Command::Classify {
            graph,
            summary,
            out,
        } => {
            let g = load_graph(&graph)?;
            let c = purerank::classify(&g);
            if let Some(path) = summary {
                write_json(Some(&path), &c.summary(&g))?;
            }
            match out.format {
                Format::Csv => {
                    let mut w = sink(out.output.as_deref())?;
                    write_classification_csv(&mut w, &g, &c)?;
                    w.flush()?;
                }
                Format::Json => {
                    let nodes = c
                        .labels()
                        .iter()
                        .enumerate()
                        .map(|(i, id)| NodeClass {
                            node: g.label(i),
                            class: id.to_string(),
                        })
                        .collect();
                    write_json(
                        out.output.as_deref(),
                        &ClassifyReport {
                            summary: c.summary(&g),
                            nodes,
                        },
                    )?;
                }
            }
        }
        Command::Rank {
            graph,
            solver,
            cache,
            delta,
            save_cache,
            out,
        } => {
            let opts = solver.options();
            let base = load_graph(&graph)?;
            let (g, result, reused) = match (cache, delta) {
                (Some(cache), Some(delta)) => {
                    let cache = RankCache::from_json(&fs::read_to_string(&cache)?)?;
                    let delta = GraphDelta::parse(open(&delta)?, &base)?;
                    let (g, _) = delta.apply(&base)?;
                    let outcome = compute_incremental(&g, &delta, &cache, &opts)?;
                    (g, outcome.result, outcome.reused)
                }
                _ => {
                    let r = compute(&base, &opts)?;
                    (base, r, Vec::new())
                }
            };
            if let Some(path) = save_cache {
                fs::write(path, RankCache::from_result(&g, &result, &opts)?.to_json()?)?;
            }
            let labels = result.classification.labels();
            match out.format {
                Format::Csv => {
                    let mut w = sink(out.output.as_deref())?;
                    write_scores_csv(&mut w, &g, &result.pi, Some(labels))?;
                    w.flush()?;
                }
                Format::Json => {
                    let classes = result
                        .locals
                        .iter()
                        .map(|l| ClassSolve {
                            class: l.class.to_string(),
                            size: l.len(),
                            iterations: l.iterations,
                            residual: l.residual,
                            reused: reused.contains(&l.class),
                        })
                        .collect();
                    write_json(
                        out.output.as_deref(),
                        &RankReport {
                            theta_t: result.theta_t,
                            total_sum: result.total_sum,
                            classes,
                            scores: score_entries(&g, &result.pi, labels),
                        },
                    )?;
                }
            }
        }
        Command::Pagerank {
            graph,
            solver,
            damping,
            out,
        } => {
            let g = load_graph(&graph)?;
            let r = pagerank(&g, damping, &solver.options())?;
            let c = purerank::classify(&g);
            match out.format {
                Format::Csv => {
                    let mut w = sink(out.output.as_deref())?;
                    write_scores_csv(&mut w, &g, &r.gamma, Some(c.labels()))?;
                    w.flush()?;
                }
                Format::Json => write_json(
                    out.output.as_deref(),
                    &PageRankReport {
                        damping,
                        iterations: r.iterations,
                        residual: r.residual,
                        scores: score_entries(&g, &r.gamma, c.labels()),
                    },
                )?,
            }
        }
        Command::Compare {
            a,
            b,
            classes,
            top_k,
            graph_name,
            output,
        } => {
            let rows_a = read_scores_csv(open(&a)?)?;
            let rows_b = read_scores_csv(open(&b)?)?;
            let (labels, va, vb) = align_scores(&rows_a, &rows_b)?;
            let classes = match classes {
                Some(path) => Some(align_classes(
                    &labels,
                    &read_classification_csv(open(&path)?)?,
                )?),
                None => None,
            };
            let names = (a.display().to_string(), b.display().to_string());
            let report = compare(
                &va,
                &vb,
                classes.as_deref(),
                top_k,
                &graph_name,
                (&names.0, &names.1),
            )?;
            write_json(output.as_deref(), &report)?;
        }
        Command::Simulate {
            graph,
            solver,
            surfers,
            steps,
            seed,
            output,
        } => {
            let g = load_graph(&graph)?;
            let r = compute(&g, &solver.options())?;
            let chain = ExtendedChain::new(&g, &r.classification)?;
            let stats = simulate(&chain, surfers, steps, seed)?;
            let (sojourn, sojourn_note) = match r.theta_t {
                None => (None, Some("transient class is empty".to_owned())),
                Some(theta) => match sojourn_check(&stats, theta) {
                    Ok(report) => (Some(report), None),
                    Err(e @ Error::InsufficientData { .. }) => (None, Some(e.to_string())),
                    Err(e) => return Err(e),
                },
            };
            let frequencies = stats
                .frequencies
                .iter()
                .zip(&r.pi)
                .enumerate()
                .map(|(i, (&frequency, &score))| NodeFrequency {
                    node: g.label(i),
                    frequency,
                    score,
                })
                .collect();
            write_json(
                output.as_deref(),
                &SimulationReport {
                    surfers,
                    steps,
                    seed,
                    l1_distance: stats.l1_distance(&r.pi),
                    theta_t: r.theta_t,
                    sojourn,
                    sojourn_note,
                    frequencies,
                },
            )?;
        }
        Command::SplitRank {
            input,
            solver,
            net,
            net_output,
            output,
        } => {
            let mg = load_multi_edge_list(open(&input)?)?;
            let res = multi_purerank(&mg, &solver.options())?;
            let mut w = sink(output.as_deref())?;
            writeln!(w, "node,attribute,score")?;
            for (i, label) in mg.labels().iter().enumerate() {
                for (a, attribute) in mg.attributes().iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{}",
                        csv_field(label),
                        csv_field(attribute),
                        res.score(i, a)
                    )?;
                }
            }
            w.flush()?;
            if let (Some(names), Some(path)) = (net, net_output) {
                let index = |name: &str| {
                    mg.attribute_index(name)
                        .ok_or_else(|| Error::Validation(format!("unknown attribute {name:?}")))
                };
                let scores = net_score(&res, index(&names[0])?, index(&names[1])?)?;
                let mut w = sink(Some(&path))?;
                writeln!(w, "node,net_score")?;
                for (label, s) in mg.labels().iter().zip(scores) {
                    writeln!(w, "{},{s}", csv_field(label))?;
                }
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .expect("global thread pool is configured once");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "kind": error_kind(&e), "message": e.to_string() }
            });
            eprintln!("{payload}");
            ExitCode::from(exit_code(&e))
        }
    }
}
