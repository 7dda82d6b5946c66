//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bogoliubov::{rows, synthesize_u};
use crate::criteria::{analyze, edge_bounds, min_squeezing_threshold, neighbor_budget, SqueezingLevel};
use crate::error::Error;
use crate::graph::{parse_graph, ClusterGraph, GraphFormat};
use crate::matfun::{random_orthogonal, OrthogonalMatrix};
use crate::oracle::verify_theorem;

/// `verify` fails when the oracle and the closed form disagree by more than this.
pub const VERIFY_FAIL_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "cvcluster",
    version,
    about = "Minimum-squeezing analysis of continuous-variable cluster states",
    long_about = "Minimum-squeezing analysis of continuous-variable cluster states.\n\n\
        Graphs are read as JSON ({\"n\": 4, \"edges\": [[0, 1, 1.0], ...]}) or as an edge list \
        (node count on the first line, then `i j w` per line, `#` comments). Node indices start at 0."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nullifier variances, squeezing threshold and per-edge verdicts
    Analyze {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        squeezing: SqueezingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Largest input variance that still yields an inseparable cluster
    Threshold {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximum degree sum of adjacent nodes in an unweighted cluster
    Budget {
        #[command(flatten)]
        squeezing: SqueezingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bogoliubov transformation generating the cluster
    Synthesize {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        q: QArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare closed-form nullifier variances with a covariance-matrix simulation
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        squeezing: SqueezingArgs,
        #[command(flatten)]
        q: QArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph file (.json for JSON, anything else is read as an edge list)
    pub graph: PathBuf,
    /// Override the graph format guessed from the file extension
    #[arg(long, value_name = "FORMAT", value_parser = ["json", "edgelist"])]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SqueezingArgs {
    /// Squeezed-quadrature variance (vacuum = 0.25)
    #[arg(long, value_name = "V")]
    pub variance: Option<f64>,
    /// Squeezing in dB below vacuum; `--db 6` and `--db -6` both mean 6 dB of squeezing
    #[arg(long, value_name = "D", allow_hyphen_values = true)]
    pub db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QKind {
    Identity,
    Random,
}

#[derive(Debug, Args)]
pub struct QArgs {
    /// Free orthogonal factor of the transformation
    #[arg(long = "q", value_enum, default_value_t = QKind::Identity)]
    pub q: QKind,
    /// Seed for `--q random`
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    Human,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputMode::Human)]
    pub output: OutputMode,
    /// Write the result to a file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Analyze,
    Threshold,
    Budget,
    Synthesize,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqueezingSpec {
    Variance(f64),
    /// Magnitude of squeezing in dB (always nonnegative after normalization).
    Db(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QMode {
    Identity,
    Random(u64),
}

/// Resolved command-line configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub command: CommandKind,
    pub graph_path: Option<PathBuf>,
    pub graph_format: Option<GraphFormat>,
    pub squeezing: Option<SqueezingSpec>,
    pub q_mode: QMode,
    pub output: OutputMode,
    pub out_path: Option<PathBuf>,
    pub warnings: Vec<String>,
}

impl CliConfig {
    pub fn from_cli(cli: Cli) -> Self {
        let mut cfg = CliConfig {
            command: CommandKind::Budget,
            graph_path: None,
            graph_format: None,
            squeezing: None,
            q_mode: QMode::Identity,
            output: OutputMode::Human,
            out_path: None,
            warnings: Vec::new(),
        };
        let (graph, squeezing, q, output) = match cli.command {
            Command::Analyze { graph, squeezing, output } => {
                cfg.command = CommandKind::Analyze;
                (Some(graph), Some(squeezing), None, output)
            }
            Command::Threshold { graph, output } => {
                cfg.command = CommandKind::Threshold;
                (Some(graph), None, None, output)
            }
            Command::Budget { squeezing, output } => (None, Some(squeezing), None, output),
            Command::Synthesize { graph, q, output } => {
                cfg.command = CommandKind::Synthesize;
                (Some(graph), None, Some(q), output)
            }
            Command::Verify { graph, squeezing, q, output } => {
                cfg.command = CommandKind::Verify;
                (Some(graph), Some(squeezing), Some(q), output)
            }
        };
        if let Some(graph) = graph {
            cfg.graph_format = graph.format.as_deref().map(|f| f.parse().expect("clap restricts values"));
            cfg.graph_path = Some(graph.graph);
        }
        cfg.squeezing = squeezing.map(|s| match (s.variance, s.db) {
            (Some(v), _) => SqueezingSpec::Variance(v),
            (None, Some(db)) => {
                if db < 0.0 {
                    cfg.warnings.push(format!(
                        "warning: --db {db} read as {} dB of squeezing",
                        -db
                    ));
                }
                SqueezingSpec::Db(db.abs())
            }
            (None, None) => unreachable!("clap requires one squeezing flag"),
        });
        if let Some(q) = q {
            cfg.q_mode = match q.q {
                QKind::Identity => QMode::Identity,
                QKind::Random => QMode::Random(q.seed),
            };
        }
        cfg.output = output.output;
        cfg.out_path = output.out;
        cfg
    }
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_numerical() { 1 } else { 2 }, message: format!("error: {e}") }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

/// Parses `argv` (including the program name) and runs the command.
///
/// Exit codes: 0 on success, 2 on usage or input errors, 1 on numerical failure.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    let config = CliConfig::from_cli(cli);
    for w in &config.warnings {
        let _ = writeln!(stderr, "{w}");
    }
    match execute(&config) {
        Ok((text, code)) => {
            let written = match &config.out_path {
                Some(path) => std::fs::write(path, &text)
                    .map_err(|e| format!("error: cannot write {}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| format!("error: {e}")),
            };
            match written {
                Ok(()) => code,
                Err(msg) => {
                    let _ = writeln!(stderr, "{msg}");
                    2
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.message);
            f.code
        }
    }
}

fn load_graph(config: &CliConfig) -> Result<ClusterGraph, Failure> {
    let path = config.graph_path.as_ref().expect("graph commands carry a path");
    let bytes = std::fs::read(path)
        .map_err(|e| input_error(format!("error: cannot read {}: {e}", path.display())))?;
    let format = config.graph_format.unwrap_or_else(|| GraphFormat::from_path(path));
    parse_graph(&bytes, format)
        .map_err(|e| input_error(format!("error: {}: {e}", path.display())))
}

fn squeezing(config: &CliConfig) -> Result<SqueezingLevel, Failure> {
    let level = match config.squeezing.expect("squeezing commands carry a level") {
        SqueezingSpec::Variance(v) => SqueezingLevel::new(v),
        SqueezingSpec::Db(db) => SqueezingLevel::from_db(-db),
    };
    Ok(level?)
}

fn orthogonal(config: &CliConfig, n: usize) -> OrthogonalMatrix {
    match config.q_mode {
        QMode::Identity => OrthogonalMatrix::identity(n),
        QMode::Random(seed) => random_orthogonal(n, seed),
    }
}

fn json_text(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

/// Formats with six significant digits, `%g` style.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        format!("{}e{exponent}", trim(mantissa.to_string()))
    }
}

fn edge_list_text(edges: &[(usize, usize)]) -> String {
    let parts: Vec<String> = edges.iter().map(|(i, j)| format!("({i},{j})")).collect();
    let label = if edges.len() == 1 { "edge" } else { "edges" };
    format!("{label} {}", parts.join(", "))
}

fn execute(config: &CliConfig) -> Result<(String, i32), Failure> {
    use std::fmt::Write as _;
    let human = config.output == OutputMode::Human;
    let mut out = String::new();
    let mut code = 0;
    match config.command {
        CommandKind::Analyze => {
            let g = load_graph(config)?;
            let s = squeezing(config)?;
            let report = analyze(&g, s);
            if !human {
                return Ok((json_text(&report.to_json_value()), 0));
            }
            if let Some(name) = g.name() {
                let _ = writeln!(out, "graph: {name}");
            }
            let _ = writeln!(out, "nodes: {}, edges: {}", g.n(), report.edge_verdicts.len());
            let _ = writeln!(out, "squeezing: variance {} ({} dB)", sig6(s.variance()), sig6(s.db()));
            let _ = writeln!(out, "node  coefficient  variance");
            for (j, (c, v)) in report.coefficients.iter().zip(&report.variances).enumerate() {
                let _ = writeln!(out, "{j:<4}  {:<11}  {}", sig6(*c), sig6(*v));
            }
            match &report.threshold {
                Some(t) => {
                    let _ = writeln!(
                        out,
                        "threshold variance = {} ({} dB), {}",
                        sig6(t.value),
                        sig6(t.db()),
                        edge_list_text(&t.tied_edges)
                    );
                }
                None => {
                    let _ = writeln!(out, "threshold: none (graph has no edges)");
                }
            }
            for e in &report.edge_verdicts {
                let _ = writeln!(
                    out,
                    "edge ({},{}): {} < {} ? {}",
                    e.i,
                    e.j,
                    sig6(e.lhs),
                    sig6(e.weight_abs),
                    if e.inseparable { "inseparable" } else { "not certified" }
                );
            }
            let nodes: Vec<String> = report.max_demand_nodes.iter().map(|j| j.to_string()).collect();
            let _ = writeln!(out, "most demanding nodes: {}", nodes.join(", "));
        }
        CommandKind::Threshold => {
            let g = load_graph(config)?;
            let t = min_squeezing_threshold(&g)?;
            if human {
                let _ = writeln!(
                    out,
                    "threshold variance = {} ({} dB), {}",
                    sig6(t.value),
                    sig6(t.db()),
                    edge_list_text(&t.tied_edges)
                );
            } else {
                let candidates = edge_bounds(&g);
                let doc = json!({
                    "threshold": t.value,
                    "threshold_db": t.db(),
                    "argmin_edge": [t.argmin_edge.0, t.argmin_edge.1],
                    "tied_edges": t.tied_edges.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
                    "candidates": candidates,
                });
                out = json_text(&doc);
            }
        }
        CommandKind::Budget => {
            let s = squeezing(config)?;
            let b = neighbor_budget(s);
            if human {
                let _ = writeln!(out, "max adjacent-degree sum: {}", b.max_degree_sum);
                if !b.generable {
                    let _ = writeln!(out, "no unweighted cluster is generable at this squeezing");
                }
            } else {
                let doc = json!({
                    "squeezing": { "variance": s.variance(), "db": s.db() },
                    "bound": b.bound,
                    "max_degree_sum": b.max_degree_sum,
                    "generable": b.generable,
                });
                out = json_text(&doc);
            }
        }
        CommandKind::Synthesize => {
            let g = load_graph(config)?;
            let t = synthesize_u(&g, &orthogonal(config, g.n()))?;
            if human {
                for (label, m) in [("Re U", t.re_u()), ("Im U", t.im_u()), ("Q", t.q().as_matrix())] {
                    let _ = writeln!(out, "{label}:");
                    for row in rows(m) {
                        let cells: Vec<String> = row.iter().map(|x| format!("{:>12}", sig6(*x))).collect();
                        let _ = writeln!(out, "{}", cells.join(" "));
                    }
                }
            } else {
                out = t.to_json();
                out.push('\n');
            }
        }
        CommandKind::Verify => {
            let g = load_graph(config)?;
            let s = squeezing(config)?;
            let q = orthogonal(config, g.n());
            let check = verify_theorem(&g, s, &q)?;
            if check.max_rel_dev > VERIFY_FAIL_THRESHOLD || !check.max_rel_dev.is_finite() {
                code = 1;
            }
            if human {
                let _ = writeln!(out, "node  measured      formula       rel_dev");
                for (j, (m, f)) in check.measured.iter().zip(&check.formula).enumerate() {
                    let _ = writeln!(out, "{j:<4}  {:<12}  {:<12}  {}", sig6(*m), sig6(*f), sig6(((m - f) / f).abs()));
                }
                let _ = writeln!(out, "max_rel_dev = {}", sig6(check.max_rel_dev));
            } else {
                let mut doc = check.to_json_value();
                doc["q"] = json!(rows(q.as_matrix()));
                out = json_text(&doc);
            }
        }
    }
    Ok((out, code))
}
