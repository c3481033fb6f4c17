//! Command-line front end: solve instances, compute exact optima, cluster
//! TSPLIB files, run benchmark experiments and render reports.
//!
//! Exit codes: 0 success, 1 data or I/O error, 2 usage error. All result
//! output goes to stdout and is byte-stable under a fixed seed; timing
//! and progress notes go to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gtsp_colony::bench::{
    emit_euf_report, emit_gap_report, euf_from_table, run_experiment, table_from_runs, BenchError,
    ExperimentConfig, ReportFormat, RunRecord,
};
use gtsp_colony::ingest::{
    build_instance, cluster_fischetti, parse_gtsp_instance, parse_tsplib, write_gtsp_instance,
};
use gtsp_colony::model::Instance;
use gtsp_colony::oracle::exact_optimum_dp_with_limit;
use gtsp_colony::solvers::{run, Algorithm, SolverParams};

#[derive(Parser)]
#[command(
    name = "gtsp-colony",
    version,
    about = "Agent-based metaheuristics and exact oracles for the equality generalized TSP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a .gtsp instance with one of the five strategies
    Solve(SolveArgs),
    /// Compute the exact optimum of a small instance
    Exact(ExactArgs),
    /// Cluster a TSPLIB .tsp file into a .gtsp instance
    Cluster(ClusterArgs),
    /// Run a benchmark experiment described by a TOML config
    Bench(BenchArgs),
    /// Render gap (and optionally expected-utility) tables from a runs log
    Report(ReportArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (.gtsp)
    instance: PathBuf,
    /// Strategy: acs, racs, sacs, srm or ssas
    #[arg(long, value_parser = Algorithm::from_str)]
    alg: Algorithm,
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration budget
    #[arg(long)]
    iterations: Option<usize>,
    /// Wall-clock budget in seconds
    #[arg(long)]
    time_limit: Option<f64>,
    /// Reference optimum; when given, the gap is printed
    #[arg(long)]
    optimum: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    q0: Option<f64>,
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long)]
    ants: Option<usize>,
    #[arg(long)]
    psl: Option<f64>,
    /// SRM: draw the explore/exploit coin once per tour instead of per move
    #[arg(long)]
    srm_per_tour_q: bool,
}

#[derive(Args)]
struct ExactArgs {
    /// Instance file (.gtsp)
    instance: PathBuf,
    /// Cluster-count ceiling for the exact solver
    #[arg(long, default_value_t = gtsp_colony::oracle::DEFAULT_DP_CLUSTER_LIMIT)]
    max_clusters: usize,
}

#[derive(Args)]
struct ClusterArgs {
    /// TSPLIB file (.tsp) with EUC_2D coordinates
    input: PathBuf,
    /// Exact number of clusters
    #[arg(long, conflicts_with = "ratio")]
    clusters: Option<usize>,
    /// Nodes per cluster: the cluster count is ceil(n / ratio)
    #[arg(long, default_value_t = 5.0)]
    ratio: f64,
    /// Output path; defaults to <nc><name>.gtsp next to the input
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config (TOML)
    config: PathBuf,
    /// Output directory for reports and the runs log
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for the run grid
    #[arg(long, env = "GTSP_COLONY_JOBS")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Runs log (JSON lines, as written by `bench`)
    log: PathBuf,
    #[arg(long, default_value = "markdown", value_parser = ReportFormat::from_str)]
    format: ReportFormat,
    /// Also print the expected-utility ranking
    #[arg(long)]
    euf: bool,
    /// Score per-run gaps instead of per-problem means
    #[arg(long)]
    per_run: bool,
    /// Add this many units to every deviation before scoring
    #[arg(long)]
    translate: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_gtsp_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Costs from EUC_2D instances are integral; print them without a
/// fractional tail.
fn fmt_cost(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{value:.0}")
    } else {
        format!("{value}")
    }
}

fn fmt_tour(nodes: &[usize]) -> String {
    nodes
        .iter()
        .map(|&v| (v + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let instance = load_instance(&args.instance)?;
    let mut params = SolverParams::default();
    if let Some(v) = args.seed {
        params.seed = v;
    }
    if let Some(v) = args.iterations {
        params.max_iterations = v;
    }
    params.time_limit = args.time_limit;
    if let Some(v) = args.beta {
        params.beta = v;
    }
    if let Some(v) = args.rho {
        params.rho = v;
    }
    if let Some(v) = args.q0 {
        params.q0 = v;
    }
    if let Some(v) = args.s0 {
        params.s0 = v;
    }
    if let Some(v) = args.ants {
        params.ants = v;
    }
    if let Some(v) = args.psl {
        params.psl = v;
    }
    params.srm_per_tour_q = args.srm_per_tour_q;

    eprintln!(
        "solving {} (n={}, p={}) with {} (seed {})",
        instance.name(),
        instance.n(),
        instance.p(),
        args.alg,
        params.seed
    );
    let result = run(args.alg, &instance, &params)?;
    println!("best cost: {}", fmt_cost(result.best_cost));
    if let Some(reference) = args.optimum {
        let gap = gtsp_colony::bench::gap(result.best_cost, reference)?;
        println!("gap: {gap:.4}%");
    }
    println!("tour: {}", fmt_tour(&result.best_tour.nodes));
    eprintln!(
        "{} iterations in {:.3}s",
        result.iterations_used, result.wall_time
    );
    Ok(())
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let instance = load_instance(&args.instance)?;
    let exact = exact_optimum_dp_with_limit(&instance, args.max_clusters)?;
    println!("optimum: {}", fmt_cost(exact.optimum_cost));
    println!("tour: {}", fmt_tour(&exact.optimum_tour.nodes));
    eprintln!("{} states expanded", exact.states_expanded);
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut nodes = parse_tsplib(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    if nodes.name.is_empty() {
        nodes.name = args
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "instance".into());
    }
    let nc = match args.clusters {
        Some(nc) => nc,
        None => {
            if !args.ratio.is_finite() || args.ratio <= 0.0 {
                bail!("--ratio must be positive");
            }
            (nodes.n() as f64 / args.ratio).ceil() as usize
        }
    };
    let clustering = cluster_fischetti(&nodes, nc)?;
    nodes.name = format!("{nc}{}", nodes.name);
    let instance = build_instance(&nodes, &clustering)?;
    let output = args.output.unwrap_or_else(|| {
        args.input
            .parent()
            .unwrap_or(Path::new("."))
            .join(format!("{}.gtsp", instance.name()))
    });
    fs::write(&output, write_gtsp_instance(&instance)?)
        .with_context(|| format!("writing {}", output.display()))?;
    println!(
        "wrote {} ({} sets, {} nodes)",
        output.display(),
        instance.p(),
        instance.n()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config: ExperimentConfig =
        toml::from_str(&text).with_context(|| format!("parsing {}", args.config.display()))?;
    if args.jobs.is_some() {
        config.jobs = args.jobs;
    }
    let base_dir = args
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let out_dir = args
        .output
        .or_else(|| config.output_dir.as_ref().map(|d| base_dir.join(d)))
        .unwrap_or_else(|| base_dir.clone());
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;

    let output = run_experiment(&config, &base_dir)?;

    let gap_csv = emit_gap_report(&output.gap_table, ReportFormat::Csv);
    let gap_md = emit_gap_report(&output.gap_table, ReportFormat::Markdown);
    fs::write(out_dir.join("gap_table.csv"), &gap_csv)?;
    fs::write(out_dir.join("gap_table.md"), &gap_md)?;

    let mut log = fs::File::create(out_dir.join("runs.jsonl"))?;
    for record in &output.runs {
        writeln!(log, "{}", serde_json::to_string(record)?)?;
    }

    print!("{gap_md}");
    match euf_from_table(&output.gap_table, config.per_run, config.translate) {
        Ok(stats) => {
            let euf_csv = emit_euf_report(&stats, ReportFormat::Csv);
            let euf_md = emit_euf_report(&stats, ReportFormat::Markdown);
            fs::write(out_dir.join("euf_table.csv"), &euf_csv)?;
            fs::write(out_dir.join("euf_table.md"), &euf_md)?;
            println!();
            print!("{euf_md}");
        }
        Err(err @ BenchError::EufDomain { .. }) => {
            eprintln!("expected-utility table skipped: {err}");
        }
        Err(err) => return Err(err.into()),
    }
    eprintln!("reports written to {}", out_dir.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let text =
        fs::read_to_string(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
    let mut runs: Vec<RunRecord> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        runs.push(
            serde_json::from_str(line)
                .with_context(|| format!("{}:{}", args.log.display(), lineno + 1))?,
        );
    }
    if runs.is_empty() {
        bail!("{} contains no run records", args.log.display());
    }
    let table = table_from_runs(&runs);
    print!("{}", emit_gap_report(&table, args.format));
    if args.euf {
        let stats = euf_from_table(&table, args.per_run, args.translate)?;
        println!();
        print!("{}", emit_euf_report(&stats, args.format));
    }
    Ok(())
}
