use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use geams_core::experiment::{run_experiment, write_outputs, ExperimentPlan};
use geams_core::sim::{run_on_topology, SimOptions};
use geams_core::{generate_topology, Protocol, ScenarioConfig, Topology};

#[derive(Parser)]
#[command(name = "geams-sim", version, about = "GEAMS vs GPSR sensor-network routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print a summary.
    Run(RunArgs),
    /// Run the protocol x size x seed matrix.
    Experiment(ExperimentArgs),
    /// Print the default scenario file.
    Config,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON). Flags override its keys.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "GEAMS_SIM_OUT", default_value = "geams-out")]
    out_dir: PathBuf,
    /// Also write the per-packet log.
    #[arg(long)]
    packets: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    protocol: Option<Protocol>,
    /// Sensor count (sink and source come on top).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use this placement (`node_id,x,y`; node 0 sink, node 1 source).
    #[arg(long)]
    topology_in: Option<PathBuf>,
    /// Save the placement used.
    #[arg(long)]
    topology_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated protocols.
    #[arg(long, value_delimiter = ',')]
    protocol: Option<Vec<Protocol>>,
    /// Comma-separated sensor counts.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    /// Seeds as `a..b` (inclusive) or a comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    /// Parallel runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn load_scenario(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => Ok(ScenarioConfig::from_path(p)?),
        None => Ok(ScenarioConfig::default()),
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().with_context(|| format!("bad seed range start in `{text}`"))?;
        let b: u64 = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .with_context(|| format!("bad seed range end in `{text}`"))?;
        if b < a {
            bail!("empty seed range `{text}`");
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().with_context(|| format!("bad seed `{s}`")))
        .collect()
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = load_scenario(args.common.scenario.as_deref())?;
    if let Some(p) = args.protocol {
        cfg.protocol = p;
    }
    if let Some(n) = args.nodes {
        cfg.nodes = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;

    let topo = match &args.topology_in {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("cannot open topology {}", path.display()))?;
            Topology::read_csv(cfg.field(), file)
                .with_context(|| format!("reading {}", path.display()))?
                .with_seed(cfg.seed)
        }
        None => generate_topology(cfg.seed, cfg.nodes, &cfg.field())?,
    };
    if let Some(path) = &args.topology_out {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        topo.write_csv(file)?;
    }

    let options = SimOptions {
        keep_packet_log: args.common.packets,
    };
    let mut report = run_on_topology(&cfg, cfg.protocol, &topo, options)?;
    report.seed = cfg.seed;
    let files = write_outputs(&args.common.out_dir, std::slice::from_ref(&report), args.common.packets)?;

    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into());
    println!("protocol        {}", report.protocol);
    println!("sensors         {}", report.n_sensors);
    println!("seed            {}", report.seed);
    println!("dead nodes      {}", report.dead_nodes);
    println!(
        "delivered       {}/{} ({})",
        report.delivered,
        report.emitted,
        fmt(report.delivery_ratio())
    );
    println!("delay mean (s)  {}", fmt(report.delay_mean));
    println!("energy mean (J) {}", fmt(report.mean_energy));
    println!("energy var      {}", fmt(report.energy_variance));
    println!("summary         {}", files.summary.display());
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let cfg = load_scenario(args.common.scenario.as_deref())?;
    let mut plan = ExperimentPlan::from_scenario(cfg);
    if let Some(p) = args.protocol {
        plan.protocols = p;
    }
    if let Some(n) = args.nodes {
        plan.node_counts = n;
    }
    if let Some(s) = &args.seeds {
        plan.seeds = parse_seeds(s)?;
    }
    if args.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    plan.validate()?;
    let (reports, files) = run_experiment(&plan, args.jobs, &args.common.out_dir, args.common.packets)?;
    println!("{} runs", reports.len());
    println!("summary     {}", files.summary.display());
    println!("regional    {}", files.regional.display());
    println!("comparison  {}", files.comparison.display());
    if let Some(p) = files.packets {
        println!("packets     {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Config => {
            println!("{}", ScenarioConfig::default().to_json_pretty());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs() {
        assert_eq!(parse_seeds("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("1..=2").unwrap(), vec![1, 2]);
        assert_eq!(parse_seeds("4, 9").unwrap(), vec![4, 9]);
        assert!(parse_seeds("3..1").is_err());
        assert!(parse_seeds("x").is_err());
    }
}
