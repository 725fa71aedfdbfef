use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oppsim_cli::config::{parse_scenario, MobilitySpec, Parsed};
use oppsim_cli::eventlog::read_event_log;
use oppsim_cli::runner::{build_mobility, run_scenario, write_report_files, OUTPUT_DIR_ENV};
use oppsim_cli::sweep::{summary_table, sweep, Axis};
use oppsim_core::metrics::MetricsReport;
use oppsim_core::mobility::{parse_bonnmotion, serialize_bonnmotion, Dims};

#[derive(Parser)]
#[command(name = "oppsim", version, about = "Opportunistic network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        config: PathBuf,
        /// Output directory; overrides the environment and the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every combination of the given axes.
    Sweep {
        config: PathBuf,
        /// `key=v1,v2,...`; repeatable.
        #[arg(long, required = true)]
        axis: Vec<Axis>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the metrics report from an event log.
    Metrics {
        log: PathBuf,
        /// Also write report.json and delay_cdf.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a BonnMotion movement file.
    ValidateTrace {
        file: PathBuf,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        dims: u8,
    },
    /// Write the scenario's synthetic movement as a BonnMotion file.
    GenMobility {
        config: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn load(config: &Path) -> Result<Parsed, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(config).map_err(|e| format!("{}: {e}", config.display()))?;
    Ok(parse_scenario(&text, config.parent())?)
}

fn output_dir(flag: Option<PathBuf>, configured: &Path) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| configured.to_path_buf())
}

fn run(config: &Path, out: Option<PathBuf>) -> CliResult {
    let parsed = load(config)?;
    for (k, v) in &parsed.defaults {
        eprintln!("default {k} = {v}");
    }
    let dir = output_dir(out, &parsed.scenario.output_dir);
    let o = run_scenario(&parsed.scenario, &parsed.defaults, &dir)?;
    let r = &o.report;
    let show = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.4}"));
    println!("output           {}", o.dir.display());
    println!("generated        {}", r.generated);
    println!("delivery_ratio   {}", show(r.delivery_ratio));
    println!("avg_delay_s      {}", show(r.avg_delivery_time));
    println!("liked_ratio      {}", show(r.liked_ratio));
    println!("nonliked_ratio   {}", show(r.nonliked_ratio));
    println!("cov              {:.4}", r.cov);
    println!("contacts         {}", r.contact_count);
    println!("avg_contact_s    {}", show(r.avg_contact_time));
    Ok(())
}

fn run_sweep(config: &Path, axes: &[Axis], out: Option<PathBuf>) -> CliResult {
    let text = fs::read_to_string(config).map_err(|e| format!("{}: {e}", config.display()))?;
    let parsed = parse_scenario(&text, config.parent())?;
    let dir = output_dir(out, &parsed.scenario.output_dir);
    let outcome = sweep(&text, config.parent(), axes, &dir)?;
    print!("{}", summary_table(&outcome, axes));
    let failed = outcome.failures().count();
    if failed > 0 {
        for c in outcome.failures() {
            if let Err(e) = &c.result {
                eprintln!("cell {} failed: {e}", c.cell.name());
            }
        }
        return Err(format!("{failed} of {} cells failed", outcome.cells.len()).into());
    }
    Ok(())
}

fn metrics(log: &Path, out: Option<PathBuf>) -> CliResult {
    let file = fs::File::open(log).map_err(|e| format!("{}: {e}", log.display()))?;
    let ledger = read_event_log(BufReader::new(file))?;
    let report = MetricsReport::from_ledger(&ledger);
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            write_report_files(&report, &dir)?;
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn validate_trace(file: &Path, dims: u8) -> CliResult {
    let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let dims = Dims::from_count(dims).expect("clap restricts dims to 2 or 3");
    let trajectories = parse_bonnmotion::<f64>(&text, dims)?;
    let end = trajectories
        .iter()
        .map(|t| t.end_time())
        .fold(f64::NEG_INFINITY, f64::max);
    let waypoints: usize = trajectories.iter().map(|t| t.waypoints().len()).sum();
    println!(
        "ok: {} nodes, {waypoints} waypoints, last waypoint at {end} s",
        trajectories.len()
    );
    Ok(())
}

fn gen_mobility(config: &Path, output: Option<PathBuf>) -> CliResult {
    let parsed = load(config)?;
    let s = &parsed.scenario;
    if matches!(s.mobility, MobilitySpec::Trace { .. }) {
        return Err("gen-mobility needs a synthetic model (rwp, swim or static)".into());
    }
    let mobility = build_mobility(s)?;
    let text = serialize_bonnmotion(mobility.trajectories(), Dims::Two);
    match output {
        Some(path) => fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run(&config, out),
        Command::Sweep { config, axis, out } => run_sweep(&config, &axis, out),
        Command::Metrics { log, out } => metrics(&log, out),
        Command::ValidateTrace { file, dims } => validate_trace(&file, dims),
        Command::GenMobility { config, output } => gen_mobility(&config, output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
