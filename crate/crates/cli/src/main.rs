use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use oncograph_core::analysis::{betweenness, derived_cell_profile};
use oncograph_core::dynamics::CellState;
use oncograph_core::graph::density;
use oncograph_core::harness::output::seed_entries;
use oncograph_core::harness::{
    builtin_baselines, builtin_switches, format_ids, format_sci, run_baseline,
    run_switch_comparison, ArtifactDir, ExperimentConfig, ProfileTables, SeedEntry,
    SwitchComparison,
};
use oncograph_core::snapshot::load_snapshot;
use oncograph_core::{Error as CoreError, GraphSnapshot, RngSeed};
use oncograph_service::SessionService;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "oncograph",
    version,
    about = "Graph agent-based tumor growth simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a JSON config file.
    Simulate {
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the four patient baselines under the first switch preset.
    Baselines {
        #[arg(long, default_value = "out/baselines")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the three switch presets on one patient baseline.
    SwitchCompare {
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=4))]
        patient: u8,
        #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
        #[arg(long, default_value = "out/switch_compare")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print density, state counts, top betweenness nodes and the profile of a snapshot.
    Analyze {
        snapshot: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Render a profile_tables.csv as markdown tables.
    Tables { csv: PathBuf },
    /// Host the session API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Idle session lifetime in seconds.
        #[arg(long, default_value_t = 3600)]
        ttl: u64,
        /// Where session logs are persisted, on demand and at shutdown.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
}

/// Failure carrying its exit code: 2 for bad input, 1 for everything else.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 2,
            error: error.into(),
        }
    }

    fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(err: CoreError) -> Self {
        if err.is_input_error() {
            Failure::usage(err)
        } else {
            Failure::runtime(err)
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::usage)
}

fn in_file(path: &Path) -> impl FnOnce(CoreError) -> Failure + '_ {
    move |err| {
        let code = if err.is_input_error() { 2 } else { 1 };
        Failure {
            code,
            error: anyhow!(err).context(format!("in {}", path.display())),
        }
    }
}

fn report(out: &Path, files: usize) {
    println!("wrote {files} files and manifest.json to {}", out.display());
}

fn simulate(config_path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> CmdResult {
    let mut config =
        ExperimentConfig::from_json(&read_input(config_path)?).map_err(in_file(config_path))?;
    if let Some(seed) = seed {
        config.baseline.master_seed = RngSeed(seed);
    }
    if let Some(out) = out {
        config.out_dir = out;
    }
    let records = run_baseline(&config.baseline)?;
    let mut dir = ArtifactDir::create(&config.out_dir)?;
    dir.write_records(&records)?;
    let mut seeds = seed_entries(&records);
    if !config.switches.is_empty() {
        let comparison = run_switch_comparison(&config.baseline, &config.switches, config.n_seeds)?;
        dir.write_comparison(&comparison)?;
        seeds.extend(replicate_entries(&comparison));
    }
    // The output location is not part of the experiment, so it stays out of
    // the manifest and identical runs hash identically wherever they land.
    let mut echo = serde_json::to_value(&config).expect("config serializes");
    echo.as_object_mut()
        .expect("config is an object")
        .remove("out_dir");
    let manifest = dir.finish("simulate", echo, seeds)?;
    report(&config.out_dir, manifest.files.len());
    Ok(())
}

fn replicate_entries(comparison: &SwitchComparison) -> Vec<SeedEntry> {
    comparison
        .rows
        .iter()
        .flat_map(|row| {
            row.replicates
                .iter()
                .enumerate()
                .map(move |(j, r)| SeedEntry {
                    label: row.label.clone(),
                    repetition: j,
                    seed: r.seed,
                })
        })
        .collect()
}

fn baselines(out: &Path, seed: u64) -> CmdResult {
    let configs: Vec<_> = builtin_baselines()
        .into_iter()
        .map(|b| b.with_seed(RngSeed(seed)))
        .collect();
    let mut records = Vec::new();
    for config in &configs {
        tracing::info!(patient = %config.name, "running baseline");
        records.extend(run_baseline(config)?);
    }
    let mut dir = ArtifactDir::create(out)?;
    dir.write_records(&records)?;
    let echo = json!({ "seed": seed, "baselines": configs });
    let manifest = dir.finish("baselines", echo, seed_entries(&records))?;
    print!(
        "{}",
        fs::read_to_string(out.join("profile_tables.md")).map_err(Failure::runtime)?
    );
    report(out, manifest.files.len());
    Ok(())
}

fn switch_compare(patient: u8, n_seeds: usize, out: &Path, seed: u64) -> CmdResult {
    let base = builtin_baselines()
        .into_iter()
        .nth(patient as usize - 1)
        .expect("patient range checked by the parser")
        .with_seed(RngSeed(seed));
    let switches = builtin_switches();
    let comparison = run_switch_comparison(&base, &switches, n_seeds)?;
    let mut dir = ArtifactDir::create(out)?;
    dir.write_comparison(&comparison)?;
    let echo = json!({ "patient": patient, "seed": seed, "n_seeds": n_seeds, "baseline": base, "switches": switches });
    let manifest = dir.finish("switch-compare", echo, replicate_entries(&comparison))?;
    print!("{}", comparison.to_csv());
    for other in 1..comparison.rows.len() {
        let test = comparison.inflamed_sign_test(0, other);
        println!(
            "inflamed {} > {}: wins={} losses={} ties={} p={:.3e}",
            comparison.rows[0].label,
            comparison.rows[other].label,
            test.wins,
            test.losses,
            test.ties,
            test.p_value
        );
    }
    report(out, manifest.files.len());
    Ok(())
}

fn analyze(path: &Path, top: usize) -> CmdResult {
    let doc = GraphSnapshot::from_json(&read_input(path)?).map_err(in_file(path))?;
    let (graph, states) = load_snapshot(&doc).map_err(in_file(path))?;
    println!("nodes: {}", graph.node_count());
    println!("edges: {}", graph.edge_count());
    println!("density: {:.6}", density(&graph));
    let counts: Vec<String> = CellState::ALL
        .iter()
        .map(|&s| {
            format!(
                "{}={}",
                s.as_str(),
                states.iter().filter(|&&x| x == s).count()
            )
        })
        .collect();
    println!("states: {}", counts.join(" "));
    let profile = derived_cell_profile(&graph, 1).map_err(Failure::runtime)?;
    println!("top betweenness:");
    for (rank, (node, value)) in betweenness(&graph).top(top).into_iter().enumerate() {
        println!(
            "  {:>2}. node {:<6} {}",
            rank + 1,
            node.0,
            format_sci(value)
        );
    }
    println!("derived cells: {}", format_ids(&profile.derived_cell_ids));
    println!(
        "essential genomic profile: {}",
        format_sci(profile.essential_genomic_profile)
    );
    println!("mean betweenness: {}", format_sci(profile.mean_betweenness));
    Ok(())
}

fn tables(path: &Path) -> CmdResult {
    let text = read_input(path)?;
    let tables = ProfileTables::from_csv(text.as_bytes()).map_err(in_file(path))?;
    print!("{}", tables.to_markdown());
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        tokio::signal::ctrl_c().await.ok();
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    tracing::info!("shutting down");
}

fn serve(host: &str, port: u16, ttl: u64, log_dir: Option<PathBuf>) -> CmdResult {
    let runtime = tokio::runtime::Runtime::new().map_err(Failure::runtime)?;
    runtime.block_on(async {
        let addr = format!("{host}:{port}");
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))
            .map_err(Failure::runtime)?;
        let local = listener.local_addr().map_err(Failure::runtime)?;
        println!("listening on http://{local}");
        let service = Arc::new(SessionService::new(Duration::from_secs(ttl), log_dir));
        oncograph_service::serve(listener, service, shutdown_signal())
            .await
            .map_err(Failure::runtime)
    })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("ONCOGRAPH_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Failure::usage(anyhow!(
                "ONCOGRAPH_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(Failure::runtime)
}

fn fail(err: impl Display, code: u8) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();

    let result = configure_threads().and_then(|()| match cli.command {
        Cmd::Simulate { config, seed, out } => simulate(&config, seed, out),
        Cmd::Baselines { out, seed } => baselines(&out, seed),
        Cmd::SwitchCompare {
            patient,
            seeds,
            out,
            seed,
        } => switch_compare(patient, seeds as usize, &out, seed),
        Cmd::Analyze { snapshot, top } => analyze(&snapshot, top),
        Cmd::Tables { csv } => tables(&csv),
        Cmd::Serve {
            host,
            port,
            ttl,
            log_dir,
        } => serve(&host, port, ttl, log_dir),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => fail(format!("{:#}", failure.error), failure.code),
    }
}
