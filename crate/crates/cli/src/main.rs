//! `causalweave` — dual-encoding constraint-based causal discovery CLI.
//!
//! Exit codes: 0 success, 2 input/flag validation failure, 3 singular
//! covariance abort during discovery, 1 anything else. Verbosity via
//! `CW_LOG={error|warn|info|debug}`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use causalweave::data::{load_csv, load_schema_file, ColumnSchema, DataTable, MissingPolicy, Role};
use causalweave::discovery::{fci_matrix, BackgroundKnowledge, DiscoveryError, FciOptions};
use causalweave::discretize::apply_bins;
use causalweave::encode::{encode, EncodedMatrix, EncodingStrategy};
use causalweave::graph::{Pag, UnifiedGraph};
use causalweave::pipeline::{
    fit_bin_specs, run_pipeline, EncodingMode, PipelineArtifacts, PipelineConfig, PipelineError,
};
use causalweave::synth::{report_to_csv, run_bench, BenchConfig};
use causalweave::Parallelism;

#[derive(Parser)]
#[command(
    name = "causalweave",
    version,
    about = "Constraint-based causal discovery over mixed tabular data, run under two \
             complementary dummy encodings and merged into a correlation-weighted \
             explanation graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run discovery end to end and write graph artifacts
    Discover(DiscoverArgs),
    /// Write the encoded design matrix and its column provenance
    Encode(EncodeArgs),
    /// Fit entropy/MDL bins for the continuous features
    Bins(BinsArgs),
    /// Score the engine on seeded synthetic ground-truth models
    Bench(BenchArgs),
    /// Re-emit a saved graph document as DOT or normalized JSON
    Export(ExportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV data file
    #[arg(long)]
    data: PathBuf,
    /// JSON schema document (column name → kind/role/categories)
    #[arg(long)]
    schema: PathBuf,
    /// What to do with rows containing missing cells
    #[arg(long, value_enum, default_value_t = MissingArg::Drop)]
    missing: MissingArg,
    /// Outcome column (overrides any role declared in the schema)
    #[arg(long)]
    outcome: Option<String>,
    /// Keep continuous features unbinned
    #[arg(long)]
    no_discretize: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MissingArg {
    Drop,
    Impute,
}

impl From<MissingArg> for MissingPolicy {
    fn from(m: MissingArg) -> Self {
        match m {
            MissingArg::Drop => MissingPolicy::DropRows,
            MissingArg::Impute => MissingPolicy::ImputeCentral,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EncodingArg {
    Dual,
    DropFirst,
    DropLast,
    /// All categories kept: demonstrates the singular-covariance failure
    Full,
}

#[derive(Args)]
struct DiscoverArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Significance level for the conditional independence tests
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = EncodingArg::Dual)]
    encoding: EncodingArg,
    /// Cap on conditioning set size (default: unbounded)
    #[arg(long)]
    max_cond_size: Option<usize>,
    /// Output directory for artifacts
    #[arg(long)]
    out: PathBuf,
    /// Recorded in the manifest; discovery itself is deterministic
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (1 = fully serial; default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = EncodingArg::DropFirst)]
    encoding: EncodingArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BinsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory (omit to print the specs to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Nodes per synthetic model
    #[arg(long, default_value_t = 6)]
    nodes: usize,
    /// Edge probability of the random DAGs
    #[arg(long, default_value_t = 0.3)]
    edge_prob: f64,
    /// Sample size per instance
    #[arg(long, default_value_t = 5000)]
    rows: usize,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Drive discovery with the exact d-separation oracle instead of data
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    max_cond_size: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    /// A graph JSON document written by `discover`
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Dot)]
    format: FormatArg,
    /// Output file (omit to print to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Dot,
    Json,
}

enum CliError {
    Validation(String),
    Singularity(String),
    Other(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Singularity(_) => ExitCode::from(3),
            CliError::Other(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Singularity(m) | CliError::Other(m) => m,
        }
    }
}

fn singularity_message(e: &DiscoveryError) -> String {
    format!(
        "{e}. Full one-hot encodings are expected to fail this way; rerun with --encoding dual \
         (or drop-first/drop-last), and check for constant columns or duplicate categories."
    )
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Discovery(ref d @ DiscoveryError::SingularityAbort { .. }) => {
                CliError::Singularity(singularity_message(d))
            }
            PipelineError::Config(m) => CliError::Validation(m),
            PipelineError::Data(d) => CliError::Validation(d.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<DiscoveryError> for CliError {
    fn from(e: DiscoveryError) -> Self {
        match e {
            DiscoveryError::SingularityAbort { .. } => {
                CliError::Singularity(singularity_message(&e))
            }
            DiscoveryError::InvalidInput(m) => CliError::Validation(m),
            other => CliError::Other(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("CW_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Discover(args) => cmd_discover(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Bins(args) => cmd_bins(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Export(args) => cmd_export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

/// Resolve --threads into an execution mode, building a scoped rayon pool
/// when needed. --threads 1 selects the plain sequential code path.
fn with_parallelism<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce(Parallelism) -> T + Send,
) -> Result<T, CliError> {
    match threads {
        Some(0) => Err(CliError::Validation("--threads must be ≥ 1".into())),
        Some(1) => Ok(f(Parallelism::Sequential)),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
            Ok(pool.install(|| f(Parallelism::Parallel)))
        }
        #[cfg(feature = "parallel")]
        None => Ok(f(Parallelism::Parallel)),
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            log::warn!("built without the `parallel` feature; running serially");
            Ok(f(Parallelism::Sequential))
        }
        #[cfg(not(feature = "parallel"))]
        None => Ok(f(Parallelism::Sequential)),
    }
}

fn load_input(input: &InputArgs) -> Result<(DataTable, Vec<ColumnSchema>), CliError> {
    if !input.data.exists() {
        return Err(CliError::Validation(format!(
            "data file `{}` does not exist",
            input.data.display()
        )));
    }
    if !input.schema.exists() {
        return Err(CliError::Validation(format!(
            "schema file `{}` does not exist",
            input.schema.display()
        )));
    }
    let mut schema =
        load_schema_file(&input.schema).map_err(|e| CliError::Validation(e.to_string()))?;
    if let Some(outcome) = &input.outcome {
        if !schema.iter().any(|c| &c.name == outcome) {
            return Err(CliError::Validation(format!(
                "--outcome column `{outcome}` not in schema"
            )));
        }
        for col in &mut schema {
            col.role = if &col.name == outcome {
                Role::Outcome
            } else {
                Role::Feature
            };
        }
    }
    let table = load_csv(&input.data, &schema, input.missing.into())
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((table, schema))
}

fn outcome_name(table: &DataTable) -> Result<String, CliError> {
    table
        .outcome_index()
        .map(|i| table.schema()[i].name.clone())
        .ok_or_else(|| {
            CliError::Validation(
                "no outcome column: declare one in the schema or pass --outcome".into(),
            )
        })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents)
        .map_err(|e| CliError::Other(format!("writing {name}: {e}")))
}

fn json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable artifact");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Manifest<'a> {
    created_unix_ms: u128,
    tool: &'static str,
    version: &'static str,
    config: ManifestConfig<'a>,
    rows: RowCounts,
    unified: Option<GraphCounts>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct ManifestConfig<'a> {
    data: String,
    schema: String,
    outcome: &'a str,
    alpha: f64,
    encoding: &'a str,
    missing: &'a str,
    discretize: bool,
    max_cond_size: Option<usize>,
    seed: Option<u64>,
    threads: Option<usize>,
}

#[derive(Serialize)]
struct RowCounts {
    loaded: usize,
    used: usize,
}

#[derive(Serialize)]
struct GraphCounts {
    nodes: usize,
    edges: usize,
    positive_edges: usize,
    negative_edges: usize,
    zero_weight_edges: usize,
}

fn graph_counts(g: &UnifiedGraph) -> GraphCounts {
    GraphCounts {
        nodes: g.n_nodes(),
        edges: g.n_edges(),
        positive_edges: g.edges().iter().filter(|e| e.weight > 0.0).count(),
        negative_edges: g.edges().iter().filter(|e| e.weight < 0.0).count(),
        zero_weight_edges: g.edges().iter().filter(|e| e.weight == 0.0).count(),
    }
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn cmd_discover(args: DiscoverArgs) -> Result<(), CliError> {
    let (table, _) = load_input(&args.input)?;
    let outcome = outcome_name(&table)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Other(format!("creating output dir: {e}")))?;

    let encoding_str = match args.encoding {
        EncodingArg::Dual => "dual",
        EncodingArg::DropFirst => "drop-first",
        EncodingArg::DropLast => "drop-last",
        EncodingArg::Full => "full",
    };
    let missing_str = match args.input.missing {
        MissingArg::Drop => "drop",
        MissingArg::Impute => "impute",
    };
    let mut files = Vec::new();

    let unified_counts = if args.encoding == EncodingArg::Full {
        // the reproducible demonstration of the dummy-variable trap
        let pag = with_parallelism(args.threads, |par| run_full_encoding(&table, &args, par))??;
        write_file(&args.out, "pag_full.json", &pag.to_json())?;
        write_file(&args.out, "pag_full.dot", &pag.to_dot())?;
        files.extend(["pag_full.json".into(), "pag_full.dot".into()]);
        log::info!("full encoding completed without a singularity (no k≥2 categorical present)");
        None
    } else {
        let artifacts = with_parallelism(args.threads, |par| {
            let cfg = PipelineConfig {
                alpha: args.alpha,
                encoding_mode: match args.encoding {
                    EncodingArg::Dual => EncodingMode::Dual,
                    EncodingArg::DropFirst => EncodingMode::DropFirstOnly,
                    EncodingArg::DropLast => EncodingMode::DropLastOnly,
                    EncodingArg::Full => unreachable!("handled above"),
                },
                outcome: outcome.clone(),
                discretize: !args.input.no_discretize,
                max_cond_size: args.max_cond_size,
                missing_policy: args.input.missing.into(),
                parallelism: par,
            };
            run_pipeline(&table, &cfg)
        })??;

        write_artifacts(&args.out, &artifacts, &mut files)?;
        let counts = graph_counts(&artifacts.unified);
        println!(
            "unified graph: {} nodes, {} edges ({} supportive, {} opposing)",
            counts.nodes, counts.edges, counts.positive_edges, counts.negative_edges
        );
        Some(counts)
    };

    files.push("manifest.json".into());
    let manifest = Manifest {
        created_unix_ms: now_ms(),
        tool: "causalweave",
        version: env!("CARGO_PKG_VERSION"),
        config: ManifestConfig {
            data: args.input.data.display().to_string(),
            schema: args.input.schema.display().to_string(),
            outcome: &outcome,
            alpha: args.alpha,
            encoding: encoding_str,
            missing: missing_str,
            discretize: !args.input.no_discretize,
            max_cond_size: args.max_cond_size,
            seed: args.seed,
            threads: args.threads,
        },
        rows: RowCounts {
            loaded: table.n_rows(),
            used: table.n_rows(),
        },
        unified: unified_counts,
        files,
    };
    write_file(&args.out, "manifest.json", &json_pretty(&manifest))?;
    Ok(())
}

fn run_full_encoding(
    table: &DataTable,
    args: &DiscoverArgs,
    par: Parallelism,
) -> Result<Pag, CliError> {
    let outcome = outcome_name(table)?;
    let prepared = if args.input.no_discretize {
        table.clone()
    } else {
        let cfg = PipelineConfig {
            parallelism: par,
            ..PipelineConfig::new(outcome.clone())
        };
        let specs = fit_bin_specs(table, &cfg)?;
        apply_bins(table, &specs).map_err(PipelineError::from)?
    };
    let m = encode(&prepared, EncodingStrategy::Full).map_err(PipelineError::from)?;
    let names = m.node_names();
    let bk = BackgroundKnowledge::sink_named(&names, &outcome)?;
    let opts = FciOptions {
        max_cond_size: args.max_cond_size,
        parallelism: par,
    };
    Ok(fci_matrix(&m, args.alpha, &opts, &bk)?)
}

fn write_artifacts(
    out: &Path,
    artifacts: &PipelineArtifacts,
    files: &mut Vec<String>,
) -> Result<(), CliError> {
    write_file(out, "unified.json", &artifacts.unified.to_json())?;
    write_file(out, "unified.dot", &artifacts.unified.to_dot())?;
    files.extend(["unified.json".into(), "unified.dot".into()]);
    if let Some(p) = &artifacts.pag_drop_first {
        write_file(out, "pag_drop_first.json", &p.to_json())?;
        write_file(out, "pag_drop_first.dot", &p.to_dot())?;
        files.extend(["pag_drop_first.json".into(), "pag_drop_first.dot".into()]);
    }
    if let Some(p) = &artifacts.pag_drop_last {
        write_file(out, "pag_drop_last.json", &p.to_json())?;
        write_file(out, "pag_drop_last.dot", &p.to_dot())?;
        files.extend(["pag_drop_last.json".into(), "pag_drop_last.dot".into()]);
    }
    write_file(out, "merge_report.json", &json_pretty(&artifacts.report))?;
    files.push("merge_report.json".into());
    write_file(out, "bin_specs.json", &json_pretty(&artifacts.bin_specs))?;
    files.push("bin_specs.json".into());
    Ok(())
}

fn cmd_encode(args: EncodeArgs) -> Result<(), CliError> {
    let (table, _) = load_input(&args.input)?;
    let strategy = match args.encoding {
        EncodingArg::DropFirst => EncodingStrategy::DropFirst,
        EncodingArg::DropLast => EncodingStrategy::DropLast,
        EncodingArg::Full => EncodingStrategy::Full,
        EncodingArg::Dual => {
            return Err(CliError::Validation(
                "encode writes one matrix; pick drop-first, drop-last, or full".into(),
            ))
        }
    };
    let prepared = if args.input.no_discretize || table.outcome_index().is_none() {
        table.clone()
    } else {
        let outcome = outcome_name(&table)?;
        let cfg = PipelineConfig::new(outcome);
        let specs = fit_bin_specs(&table, &cfg)?;
        apply_bins(&table, &specs).map_err(PipelineError::from)?
    };
    let m = encode(&prepared, strategy).map_err(PipelineError::from)?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Other(format!("creating output dir: {e}")))?;
    write_file(&args.out, "encoded.csv", &matrix_csv(&m))?;
    #[derive(Serialize)]
    struct Provenance<'a> {
        columns: &'a [causalweave::encode::ColumnProvenance],
        outcome_col: Option<usize>,
        dropped_empty_categories: &'a [(String, String)],
    }
    write_file(
        &args.out,
        "provenance.json",
        &json_pretty(&Provenance {
            columns: m.provenance(),
            outcome_col: m.outcome_col(),
            dropped_empty_categories: m.dropped_empty(),
        }),
    )?;
    println!(
        "encoded {} rows × {} columns ({})",
        m.n_rows(),
        m.n_cols(),
        match strategy {
            EncodingStrategy::DropFirst => "drop-first",
            EncodingStrategy::DropLast => "drop-last",
            EncodingStrategy::Full => "full",
        }
    );
    Ok(())
}

fn matrix_csv(m: &EncodedMatrix) -> String {
    let mut out = String::new();
    out.push_str(&m.node_names().join(","));
    out.push('\n');
    for r in 0..m.n_rows() {
        let row: Vec<String> = (0..m.n_cols())
            .map(|c| format!("{}", m.column(c)[r]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn cmd_bins(args: BinsArgs) -> Result<(), CliError> {
    let (table, _) = load_input(&args.input)?;
    let outcome = outcome_name(&table)?;
    let cfg = PipelineConfig::new(outcome);
    let specs = fit_bin_specs(&table, &cfg)?;
    for spec in &specs {
        println!(
            "{}: {} cut(s) → {}",
            spec.source_feature,
            spec.cut_points.len(),
            spec.bin_labels().join(", ")
        );
    }
    let body = json_pretty(&specs);
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Other(format!("creating output dir: {e}")))?;
            write_file(dir, "bin_specs.json", &body)?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let report = with_parallelism(args.threads, |par| {
        run_bench(&BenchConfig {
            n_nodes: args.nodes,
            edge_prob: args.edge_prob,
            n_rows: args.rows,
            instances: args.instances,
            seed: args.seed,
            alpha: args.alpha,
            oracle: args.oracle,
            max_cond_size: args.max_cond_size,
            parallelism: par,
        })
    })?
    .map_err(|e| match e {
        causalweave::synth::BenchError::InvalidConfig(m) => CliError::Validation(m),
        other => CliError::Other(other.to_string()),
    })?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Other(format!("creating output dir: {e}")))?;
    write_file(&args.out, "bench_report.json", &json_pretty(&report))?;
    write_file(&args.out, "bench_report.csv", &report_to_csv(&report))?;

    println!(
        "{} instances · {} nodes · edge prob {} · {}",
        report.instances,
        report.n_nodes,
        report.edge_prob,
        if report.oracle {
            "d-separation oracle".to_string()
        } else {
            format!("{} rows, alpha {}", report.n_rows, report.alpha)
        }
    );
    println!("mean skeleton precision  {:.4}", report.mean_precision);
    println!("mean skeleton recall     {:.4}", report.mean_recall);
    println!("mean skeleton F1         {:.4}", report.mean_f1);
    println!("mean SHD                 {:.4}", report.mean_shd);
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.graph)
        .map_err(|e| CliError::Validation(format!("reading {}: {e}", args.graph.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("not a graph document: {e}")))?;
    let kind = value
        .get("type")
        .and_then(|v| v.as_str())
        .ok_or_else(|| CliError::Validation("graph document has no `type` field".into()))?;

    let output = match (kind, args.format) {
        ("pag", FormatArg::Dot) => Pag::from_json(&text)
            .map_err(|e| CliError::Validation(e.to_string()))?
            .to_dot(),
        ("pag", FormatArg::Json) => Pag::from_json(&text)
            .map_err(|e| CliError::Validation(e.to_string()))?
            .to_json(),
        ("unified", FormatArg::Dot) => UnifiedGraph::from_json(&text)
            .map_err(|e| CliError::Validation(e.to_string()))?
            .to_dot(),
        ("unified", FormatArg::Json) => UnifiedGraph::from_json(&text)
            .map_err(|e| CliError::Validation(e.to_string()))?
            .to_json(),
        (other, _) => {
            return Err(CliError::Validation(format!(
                "unknown graph type `{other}` (expected `pag` or `unified`)"
            )))
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, output)
            .map_err(|e| CliError::Other(format!("writing {}: {e}", path.display())))?,
        None => print!("{output}"),
    }
    Ok(())
}
