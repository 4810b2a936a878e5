mod config;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use fhdr_core::harness::{self, emit_report, report_summary, run_trials, Mode, CSV_DELTA_FRACTION};
use fhdr_core::single_round::{confidence, coverage_probability, rounds_for_confidence};
use fhdr_server::{AppState, Registry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use config::{merge_serve, merge_simulate, FileConfig, ServeFile, SimulateFile};

#[derive(Parser)]
#[command(
    name = "fhdr",
    version,
    about = "Interactive favorite-tuple search over high-dimensional tables"
)]
struct Cli {
    /// TOML file with [simulate] and [serve] tables; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a uniform synthetic dataset as CSV.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run simulated users against the engine and report metrics.
    Simulate(SimulateArgs),
    /// Serve the session API.
    Serve(ServeArgs),
    /// Print the probability that one sampled attribute subset holds every key.
    Coverage {
        #[arg(long)]
        cand: usize,
        #[arg(long)]
        dint: usize,
        #[arg(long)]
        w: usize,
        /// Target confidence for the round count.
        #[arg(long)]
        conf: Option<f64>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "p1" => Ok(Mode::P1),
        "p2" => Ok(Mode::P2),
        _ => Err(format!("expected p1 or p2, got {s:?}")),
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// CSV dataset; synthetic uniform data when absent.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Key-attribute counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    dint: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Question budgets for p2, comma separated.
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<usize>>,
    /// Output sizes, comma separated.
    #[arg(long = "K", value_delimiter = ',')]
    k_output: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    /// CSV report path; a `.txt` summary is written next to it.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Run repetitions on one thread.
    #[arg(long)]
    sequential: bool,
}

impl From<SimulateArgs> for SimulateFile {
    fn from(a: SimulateArgs) -> Self {
        SimulateFile {
            dataset: a.dataset,
            n: a.n,
            d: a.d,
            dint: a.dint,
            mode: a.mode,
            q: a.q,
            k_output: a.k_output,
            reps: a.reps,
            seed: a.seed,
            m: a.m,
            report: a.report,
            sequential: a.sequential.then_some(true),
        }
    }
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    host: Option<String>,
    #[arg(long)]
    port: Option<u16>,
    /// CSV dataset to register under its file stem; repeatable.
    #[arg(long = "dataset")]
    datasets: Vec<PathBuf>,
    /// Idle seconds before a session is closed as if the user quit.
    #[arg(long)]
    ttl_secs: Option<u64>,
}

fn write_dataset(x: &fhdr_core::Dataset, out: &Path) -> anyhow::Result<()> {
    let mut w =
        csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
    w.write_record(x.attribute_names())?;
    for row in x.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn simulate(args: SimulateArgs, file: SimulateFile) -> anyhow::Result<()> {
    let plan = merge_simulate(args.into(), file)?;
    let mut rows = Vec::new();
    for cell in plan.cells() {
        let run = run_trials(&cell, plan.exec)?;
        print!("{}", report_summary(std::slice::from_ref(&run.metrics)));
        rows.push(run.metrics);
    }
    if let Some(path) = &plan.report {
        let summary = emit_report(&rows, path)?;
        eprintln!("wrote {} and {}", path.display(), summary.display());
    }
    Ok(())
}

fn serve(args: ServeArgs, file: ServeFile) -> anyhow::Result<()> {
    let plan = merge_serve(
        ServeFile {
            host: args.host,
            port: args.port,
            datasets: Some(args.datasets),
            ttl_secs: args.ttl_secs,
        },
        file,
    );
    let mut registry = Registry::new();
    for path in &plan.datasets {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .with_context(|| format!("no usable file name in {}", path.display()))?;
        let x = registry
            .load_csv(name, path, CSV_DELTA_FRACTION)
            .with_context(|| format!("loading {}", path.display()))?;
        log::info!(
            "registered {name}: {} skyline rows, {} attributes",
            x.n(),
            x.d()
        );
    }
    if registry.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = fhdr_core::dataset::skyline(&harness::gen_uniform(2000, 40, &mut rng)?);
        log::info!(
            "no datasets given; serving synthetic uniform data ({} rows)",
            x.n()
        );
        registry.insert("synthetic", Arc::new(x), None);
    }
    let addr: SocketAddr = format!("{}:{}", plan.host, plan.port)
        .parse()
        .context("bad host or port")?;
    let state = AppState::with_ttl(registry, Duration::from_secs(plan.ttl_secs));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(fhdr_server::serve(addr, state))?;
    Ok(())
}

fn coverage(cand: usize, dint: usize, w: usize, conf: Option<f64>) -> anyhow::Result<()> {
    let c = coverage_probability(cand, dint, w)?;
    println!("p_cover = {}/{} = {:.6}", c.numerator, c.denominator, c.p);
    println!("lower bound = {:.6}", c.bound);
    if let Some(conf) = conf {
        if c.p == 0.0 {
            bail!("coverage probability is zero; no round count reaches {conf}");
        }
        let n = rounds_for_confidence(c.p, conf)?;
        println!(
            "rounds for {conf} = {n} (confidence {:.6})",
            confidence(c.p, n)
        );
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Gen { n, d, seed, out } => {
            let x = harness::gen_uniform(n, d, &mut ChaCha8Rng::seed_from_u64(seed))?;
            write_dataset(&x, &out)?;
            eprintln!("wrote {n}x{d} to {}", out.display());
            Ok(())
        }
        Command::Simulate(args) => simulate(args, file.simulate),
        Command::Serve(args) => serve(args, file.serve),
        Command::Coverage {
            cand,
            dint,
            w,
            conf,
        } => coverage(cand, dint, w, conf),
    }
}
