use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use orderflow_cli::{commands, exit_code, scenario, Settings};

/// Order-flow persistence analysis: splitting/herding decomposition, investor and
/// brokerage simulators, and significance tests.
#[derive(Parser)]
#[command(name = "orderflow", version)]
struct Cli {
    /// key=value settings file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an event log and print an activity summary as JSON.
    IngestCheck(IngestCheck),
    /// Write C(τ), C_split, C_herd, S(τ), top-agent diagonals and the lag-1 pair scatter.
    Decompose(Decompose),
    /// Simulate an investor-level event log.
    Simulate(Simulate),
    /// Relabel investors as brokers.
    Map(MapCmd),
    /// Shuffle test of the herding component.
    Nulltest(Nulltest),
    /// Same-sign probabilities and decomposition conditioned on price changes.
    Condprob(Condprob),
    /// Sweep a null-hypothesis scenario and tabulate the mean splitting ratio.
    Scenario(ScenarioCmd),
}

#[derive(Args)]
struct IngestCheck {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Drop agents with fewer events.
    #[arg(long)]
    min_events: Option<u64>,
    #[arg(long)]
    top_k: Option<usize>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Decompose {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    tau_max: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of most active agents with per-agent curves.
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    min_events: Option<u64>,
}

#[derive(Args)]
struct Simulate {
    /// splitting, public-info, imitation or antiherding.
    #[arg(long)]
    model: Option<String>,
    /// Number of events.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output log path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    investors: Option<usize>,
    /// Metaorder size tail exponent.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    v_min: Option<u64>,
    /// Concurrently active metaorders.
    #[arg(long)]
    pool_size: Option<usize>,
    /// Run-length tail exponent of the public-information model.
    #[arg(long)]
    run_tail: Option<f64>,
    #[arg(long)]
    n_min: Option<u64>,
    /// Zipf exponent of public-information investor frequencies.
    #[arg(long)]
    zipf: Option<f64>,
    /// Target variance of public-information investor frequencies.
    #[arg(long)]
    variance: Option<f64>,
    /// Imitation probability.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    network_seed: Option<u64>,
    #[arg(long)]
    splitters: Option<usize>,
    #[arg(long)]
    contrarians: Option<usize>,
    #[arg(long)]
    contrarian_share: Option<f64>,
    #[arg(long)]
    flag_prob: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    response: Option<f64>,
}

#[derive(Args)]
struct MapCmd {
    /// fixed, dynamic or correlated.
    #[arg(long)]
    kind: Option<String>,
    /// Broker profile: azn, uniform:M, variance:M:V, zipf:M:S or a broker,frequency CSV.
    #[arg(long)]
    profile: Option<String>,
    /// Probability of copying the attachment parent's broker (correlated maps).
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the investor,broker assignment (fixed and correlated maps).
    #[arg(long)]
    map_out: Option<PathBuf>,
    /// Network size for correlated maps; defaults to the log's metadata.
    #[arg(long)]
    investors: Option<usize>,
    #[arg(long)]
    network_seed: Option<u64>,
}

#[derive(Args)]
struct Nulltest {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// independent or joint.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_events: Option<u64>,
}

#[derive(Args)]
struct Condprob {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    tau_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_events: Option<u64>,
}

#[derive(Args)]
struct ScenarioCmd {
    /// public-info-frb, imitation-frb, any-drb or splitting-frb.
    #[arg(long)]
    name: Option<String>,
    /// key=v1,v2,... or key=start:stop:count; key is var, or phi for imitation-frb.
    #[arg(long)]
    sweep: Option<String>,
    /// Seeds per sweep point.
    #[arg(long)]
    seeds: Option<u64>,
    /// First seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Events per run.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    brokers: Option<usize>,
    #[arg(long)]
    investors: Option<usize>,
    /// Investor model behind a dynamic map.
    #[arg(long)]
    investor_model: Option<String>,
    /// Broker profile for imitation-frb.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    pool_size: Option<usize>,
    /// Upper lag of the averaged splitting ratio.
    #[arg(long)]
    tau_hi: Option<usize>,
}

fn path(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

fn run(cli: Cli) -> Result<()> {
    let mut s = match &cli.config {
        Some(path) => Settings::read(path)?,
        None => Settings::default(),
    };
    match cli.command {
        Command::IngestCheck(a) => {
            s.set_opt("input", &path(&a.input));
            s.set_opt("min_events", &a.min_events);
            s.set_opt("top_k", &a.top_k);
            s.set_opt("out", &path(&a.out));
            commands::ingest_check(&s)
        }
        Command::Decompose(a) => {
            s.set_opt("input", &path(&a.input));
            s.set_opt("tau_max", &a.tau_max);
            s.set_opt("out", &path(&a.out));
            s.set_opt("top_k", &a.top_k);
            s.set_opt("min_events", &a.min_events);
            commands::run_decompose(&s)
        }
        Command::Simulate(a) => {
            s.set_opt("model", &a.model);
            s.set_opt("n", &a.n);
            s.set_opt("seed", &a.seed);
            s.set_opt("out", &path(&a.out));
            s.set_opt("investors", &a.investors);
            s.set_opt("beta", &a.beta);
            s.set_opt("v_min", &a.v_min);
            s.set_opt("pool_size", &a.pool_size);
            s.set_opt("run_tail", &a.run_tail);
            s.set_opt("n_min", &a.n_min);
            s.set_opt("zipf", &a.zipf);
            s.set_opt("variance", &a.variance);
            s.set_opt("p", &a.p);
            s.set_opt("network_seed", &a.network_seed);
            s.set_opt("splitters", &a.splitters);
            s.set_opt("contrarians", &a.contrarians);
            s.set_opt("contrarian_share", &a.contrarian_share);
            s.set_opt("flag_prob", &a.flag_prob);
            s.set_opt("window", &a.window);
            s.set_opt("response", &a.response);
            commands::simulate(&s)
        }
        Command::Map(a) => {
            s.set_opt("kind", &a.kind);
            s.set_opt("profile", &a.profile);
            s.set_opt("phi", &a.phi);
            s.set_opt("input", &path(&a.input));
            s.set_opt("out", &path(&a.out));
            s.set_opt("seed", &a.seed);
            s.set_opt("map_out", &path(&a.map_out));
            s.set_opt("investors", &a.investors);
            s.set_opt("network_seed", &a.network_seed);
            commands::run_map(&s)
        }
        Command::Nulltest(a) => {
            s.set_opt("input", &path(&a.input));
            s.set_opt("replicates", &a.replicates);
            s.set_opt("alpha", &a.alpha);
            s.set_opt("tau_max", &a.tau_max);
            s.set_opt("seed", &a.seed);
            s.set_opt("scheme", &a.scheme);
            s.set_opt("out", &path(&a.out));
            s.set_opt("min_events", &a.min_events);
            commands::nulltest(&s)
        }
        Command::Condprob(a) => {
            s.set_opt("input", &path(&a.input));
            s.set_opt("tau_max", &a.tau_max);
            s.set_opt("out", &path(&a.out));
            s.set_opt("min_events", &a.min_events);
            commands::condprob(&s)
        }
        Command::Scenario(a) => {
            s.set_opt("name", &a.name);
            s.set_opt("sweep", &a.sweep);
            s.set_opt("seeds", &a.seeds);
            s.set_opt("seed", &a.seed);
            s.set_opt("n", &a.n);
            s.set_opt("out", &path(&a.out));
            s.set_opt("brokers", &a.brokers);
            s.set_opt("investors", &a.investors);
            s.set_opt("investor_model", &a.investor_model);
            s.set_opt("profile", &a.profile);
            s.set_opt("p", &a.p);
            s.set_opt("beta", &a.beta);
            s.set_opt("pool_size", &a.pool_size);
            s.set_opt("tau_hi", &a.tau_hi);
            scenario::run(&s)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
