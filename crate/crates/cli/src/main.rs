use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use saswarm::bench::{load_benchmarks, run_grid_with};
use saswarm::orlib::{load_file, render_tables, write_fig2_csv, write_results_csv};
use saswarm::{rpe, run_swarm, summarize_fig2, ExperimentGrid, InstanceSelector};

mod config;

use config::FileConfig;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Input(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Config(_) => 2,
            Failure::Input(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) | Failure::Input(m) | Failure::Other(m) => f.write_str(m),
        }
    }
}

impl From<saswarm::Error> for Failure {
    fn from(e: saswarm::Error) -> Self {
        let msg = e.to_string();
        if e.is_input_error() {
            return Failure::Input(msg);
        }
        match e {
            saswarm::Error::Config(_) | saswarm::Error::InvalidArgument(_) => Failure::Config(msg),
            saswarm::Error::InvalidInstance(_) => Failure::Input(msg),
            _ => Failure::Other(msg),
        }
    }
}

#[derive(Parser)]
#[command(name = "saswarm", version, about = "Swarms of simulated annealing agents for the multidimensional knapsack problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one swarm on one problem of an OR-Library mknap file.
    Solve(SolveArgs),
    /// Run a replicated experiment grid and write a results CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    generations: Option<usize>,
    /// SA temperature levels per agent run.
    #[arg(long)]
    outer: Option<usize>,
    /// Stop a run once the known optimum is reached.
    #[arg(long)]
    stop_at_optimum: bool,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// 1-based problem index within the file.
    #[arg(long, default_value_t = 1)]
    problem: usize,
    #[arg(long)]
    coordinator: Option<String>,
    #[arg(long)]
    swarm_size: Option<usize>,
    /// SA proposals per temperature level.
    #[arg(long)]
    inner: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the agents (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BenchArgs {
    file: PathBuf,
    #[arg(long, value_delimiter = ',')]
    problems: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    coordinators: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    swarm_sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    inner: Option<Vec<usize>>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed_base: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-coordinator RPE averaged over swarm sizes.
    #[arg(long)]
    fig2_out: Option<PathBuf>,
    /// Replications run concurrently (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Override a problem's optimum, e.g. `--optimum 6=10618`.
    #[arg(long = "optimum", value_parser = parse_optimum)]
    optima: Vec<(usize, f64)>,
    /// Suppress per-cell progress on stderr.
    #[arg(long, short)]
    quiet: bool,
    #[command(flatten)]
    common: Common,
}

fn parse_optimum(s: &str) -> Result<(usize, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected PROBLEM=VALUE")?;
    let k = k.trim().parse().map_err(|_| format!("bad problem index {k:?}"))?;
    let v = v.trim().parse().map_err(|_| format!("bad optimum {v:?}"))?;
    Ok((k, v))
}

fn cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn base_config(file: &FileConfig, common: &Common) -> Result<saswarm::SwarmConfig, Failure> {
    let mut cfg = file.swarm()?;
    if let Some(g) = common.generations {
        cfg.generations = g;
    }
    if let Some(o) = common.outer {
        cfg.sa.outer_iterations = o;
    }
    cfg.stop_at_optimum |= common.stop_at_optimum;
    Ok(cfg)
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let mut cfg = base_config(&file, &args.common)?;
    if let Some(c) = &args.coordinator {
        cfg.coordinator = file.coordinator(c)?;
    }
    if let Some(n) = args.swarm_size {
        cfg.swarm_size = n;
    }
    if let Some(i) = args.inner {
        cfg.sa.inner_iterations = i;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;

    let bench = load_file(&args.file)?;
    let instance = bench.problem(args.problem).ok_or_else(|| {
        Failure::Config(format!(
            "{} has {} problems, no problem {}",
            args.file.display(),
            bench.problems.len(),
            args.problem
        ))
    })?;
    let instance = match file.optima()?.iter().find(|(k, _)| *k == args.problem) {
        Some(&(_, v)) => instance.clone().with_known_optimum(Some(v)),
        None => instance.clone(),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or_else(cores))
        .build()
        .map_err(|e| Failure::Config(format!("cannot start worker pool: {e}")))?;
    let result = pool.install(|| run_swarm(&instance, &cfg))?;

    let mut out = io::stdout().lock();
    let w = |e: io::Error| Failure::Other(e.to_string());
    writeln!(out, "instance     {} (n={}, m={})", instance.name(), instance.n(), instance.m()).map_err(w)?;
    writeln!(out, "coordinator  {} swarm={} inner={} seed={}", cfg.coordinator, cfg.swarm_size, cfg.sa.inner_iterations, cfg.seed).map_err(w)?;
    writeln!(out, "best         {}", result.best.fitness()).map_err(w)?;
    if let Some(opt) = instance.known_optimum() {
        writeln!(out, "optimum      {opt}").map_err(w)?;
        writeln!(out, "rpe          {:.5}", rpe(opt, result.best.fitness())?).map_err(w)?;
    }
    writeln!(out, "found at     generation {} of {}", result.best_generation, result.generations_executed).map_err(w)?;
    writeln!(out, "time         {:.4}s", result.wall_time.as_secs_f64()).map_err(w)?;
    writeln!(out, "x            {}", result.best.bit_string()).map_err(w)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Other(format!("cannot create {}: {e}", path.display())))
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let fb = &file.bench;
    let base = base_config(&file, &args.common)?;

    let problems = args.problems.or_else(|| fb.problems.clone()).unwrap_or_else(|| vec![6, 7]);
    let names = args
        .coordinators
        .or_else(|| fb.coordinators.clone())
        .unwrap_or_else(|| vec!["esa".into(), "bco".into(), "pso".into()]);
    let coordinators = names.iter().map(|n| file.coordinator(n)).collect::<Result<Vec<_>, _>>()?;
    let swarm_sizes = args
        .swarm_sizes
        .or_else(|| fb.swarm_sizes.clone())
        .unwrap_or_else(|| vec![5, 10, 15, 20, 30, 40, 50]);
    let inner = args.inner.or_else(|| fb.inner.clone()).unwrap_or_else(|| vec![1, 5, 10]);
    let replications = args.replications.or(fb.replications).unwrap_or(50);
    let seed_base = args.seed_base.or(fb.seed_base).unwrap_or(0);
    let jobs = args.jobs.or(fb.jobs).unwrap_or_else(cores);
    let out_path = args.out.or_else(|| fb.out.clone()).unwrap_or_else(|| "results.csv".into());
    let fig2_path = args.fig2_out.or_else(|| fb.fig2_out.clone());

    let mut optima = file.optima()?;
    optima.extend(args.optima);
    // Later entries are flags; they must win.
    optima.reverse();

    let selector = InstanceSelector { path: args.file, problems };
    let grid = ExperimentGrid {
        benchmarks: load_benchmarks(&[selector], &optima)?,
        coordinators,
        swarm_sizes,
        inner_iterations: inner,
        replications,
        seed_base,
        base,
    };
    grid.validate()?;

    // Open outputs before the long run so a bad path fails fast.
    let mut out = create(&out_path)?;
    let mut fig2 = fig2_path.as_deref().map(create).transpose()?;

    let total = grid.cells().len();
    let mut done = 0;
    let cells = run_grid_with(&grid, jobs, |c| {
        done += 1;
        if !args.quiet {
            eprintln!(
                "[{done}/{total}] {} {} N={} inner={} rpe={:.5} cpu={:.3}s",
                c.benchmark, c.coordinator, c.swarm_size, c.inner_iters, c.rpe, c.cpu_mean_s
            );
        }
    })?;

    write_results_csv(&cells, &mut out)?;
    out.flush().map_err(|e| Failure::Other(e.to_string()))?;
    if let Some(f) = fig2.as_mut() {
        write_fig2_csv(&summarize_fig2(&cells)?, &mut *f)?;
        f.flush().map_err(|e| Failure::Other(e.to_string()))?;
    }
    print!("{}", render_tables(&cells));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
