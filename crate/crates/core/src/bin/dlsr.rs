use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dlsr::experiment::{self, ExperimentConfig, OneOrMany};
use dlsr::simulator::Mode;
use dlsr::Error;

#[derive(Parser)]
#[command(name = "dlsr", version, about = "Distributed reconstruction of graph signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graph and write its edge list, points and spectrum.
    GenGraph(Common),
    /// Build and certify a sampling plan.
    Plan(Common),
    /// Run every job of an experiment and write traces and summaries.
    Run(Common),
    /// Tabulate convergence probability over mu x beta x delta.
    Sweep(Common),
    /// Reconstruct the Intel lab temperature field.
    RealData(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    MessagePassing,
    ClosedForm,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults apply when omitted.
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k_nn: Option<usize>,
    #[arg(long)]
    edge_list: Option<PathBuf>,
    #[arg(long)]
    sample_size: Option<usize>,
    /// Explicit cutoff; switches the omega policy to explicit.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    #[arg(long)]
    zero_delays: bool,
    #[arg(long)]
    intel_data: Option<PathBuf>,
    #[arg(long)]
    intel_locations: Option<PathBuf>,
}

fn many(v: Vec<f64>) -> OneOrMany<f64> {
    if v.len() == 1 {
        OneOrMany::One(v[0])
    } else {
        OneOrMany::Many(v)
    }
}

impl Common {
    fn config(self) -> dlsr::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = self.out {
            cfg.output = Some(o);
        }
        if let Some(m) = self.mode {
            cfg.mode = Some(match m {
                ModeArg::MessagePassing => Mode::MessagePassing,
                ModeArg::ClosedForm => Mode::ClosedForm,
            });
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(k) = self.k_nn {
            cfg.k_nn = k;
        }
        if self.edge_list.is_some() {
            cfg.edge_list = self.edge_list;
        }
        if let Some(m) = self.sample_size {
            cfg.sample_size = m;
        }
        if let Some(w) = self.omega {
            cfg.omega = Some(w);
            cfg.omega_policy = experiment::OmegaPolicy::Explicit;
        }
        if self.steps.is_some() {
            cfg.steps = self.steps;
        }
        if let Some(v) = self.mu {
            cfg.mu = many(v);
        }
        if let Some(v) = self.beta {
            cfg.beta = many(v);
        }
        if let Some(v) = self.delta {
            cfg.delta = many(v);
        }
        cfg.zero_delays |= self.zero_delays;
        if self.intel_data.is_some() {
            cfg.intel_data = self.intel_data;
        }
        if self.intel_locations.is_some() {
            cfg.intel_locations = self.intel_locations;
        }
        Ok(cfg)
    }
}

fn dispatch(command: Command) -> dlsr::Result<String> {
    match command {
        Command::GenGraph(c) => {
            let cfg = c.config()?;
            let g = experiment::gen_graph(&cfg)?;
            Ok(format!(
                "{} vertices, {} edges -> {}",
                g.n(),
                g.edges().len(),
                cfg.output_dir().display()
            ))
        }
        Command::Plan(c) => json(&experiment::plan(&c.config()?)?),
        Command::Run(c) => {
            let report = experiment::run(&c.config()?)?;
            json(&report.runs)
        }
        Command::Sweep(c) => {
            let cfg = c.config()?;
            let cells = experiment::sweep(&cfg)?;
            Ok(format!(
                "{} cells -> {}",
                cells.len(),
                cfg.output_dir().join("sweep.csv").display()
            ))
        }
        Command::RealData(c) => json(&experiment::real_data(&c.config()?)?.run),
    }
}

fn json<T: serde::Serialize>(value: &T) -> dlsr::Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Error::exit_code(&e) as u8)
        }
    }
}
