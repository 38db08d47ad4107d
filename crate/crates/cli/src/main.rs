use clap::{Args, Parser, Subcommand};
use phaseflow_core::io::{self, JobResult, RunManifest};
use phaseflow_core::{Error, GaugeSpec};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Phase-space flow fields, basis propagation and tunneling benchmarks.
#[derive(Parser)]
#[command(name = "phaseflow", version = io::VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample density, flux and velocity of the initial state over the manifest's box.
    FlowField(RunArgs),
    /// Basis-center trajectories and advected parcels.
    Trajectories(RunArgs),
    /// Propagate the basis and write observables and basis parameters.
    Propagate(RunArgs),
    /// Split-operator reference run.
    Reference(RunArgs),
    /// Run every benchmark method against the split-operator reference.
    Benchmark(RunArgs),
    /// Run the fast invariant suite.
    Validate,
    /// Print the default manifest for a scenario.
    Manifest(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario: harmonic, double-well or barrier.
    #[arg(long, default_value = "harmonic", conflicts_with = "config")]
    scenario: String,
    /// default, regularized-bohmian, bohmian-limit or custom:swirl.
    #[arg(long)]
    gauge: Option<GaugeSpec>,
    /// TOML run manifest; replaces the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides PHASEFLOW_OUT_DIR and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the propagation horizon.
    #[arg(long)]
    t_final: Option<f64>,
}

impl RunArgs {
    fn manifest(&self) -> Result<RunManifest, Error> {
        let mut m = match &self.config {
            Some(path) => RunManifest::load(path)?,
            None => RunManifest::for_scenario(&self.scenario, GaugeSpec::RegularizedBohmian)?,
        };
        if let Some(g) = &self.gauge {
            m.propagation.gauge = g.clone();
        }
        if let Some(t) = self.t_final {
            m.propagation.t_final = t;
        }
        m.validate()?;
        Ok(m)
    }
}

fn prepare(args: &RunArgs) -> Result<(RunManifest, PathBuf), Error> {
    let m = args.manifest()?;
    let out = m.resolve_output_dir(args.out.as_deref());
    std::fs::create_dir_all(&out)?;
    m.save(&out.join("manifest.toml"))?;
    Ok((m, out))
}

fn report(out: &Path, scenario: &str, jobs: Vec<JobResult>) -> Result<serde_json::Value, Error> {
    io::write_results(out, scenario, &jobs)?;
    Ok(json!({ "output_dir": out, "jobs": jobs }))
}

fn run(cli: Cli) -> Result<(serde_json::Value, bool), Error> {
    let summary = match cli.command {
        Command::FlowField(a) => {
            let (m, out) = prepare(&a)?;
            let path = io::run_flow_field(&m, &out)?;
            json!({ "output_dir": out, "files": [path] })
        }
        Command::Trajectories(a) => {
            let (m, out) = prepare(&a)?;
            let job = io::run_trajectories(&m, &out)?;
            report(&out, &m.scenario, vec![job])?
        }
        Command::Propagate(a) => {
            let (m, out) = prepare(&a)?;
            let job = io::run_propagation(&m, &out)?;
            report(&out, &m.scenario, vec![job])?
        }
        Command::Reference(a) => {
            let (m, out) = prepare(&a)?;
            let job = io::run_reference(&m, &out)?;
            report(&out, &m.scenario, vec![job])?
        }
        Command::Benchmark(a) => {
            let (m, out) = prepare(&a)?;
            let jobs = io::run_benchmark(&m, &out)?;
            json!({ "output_dir": out, "jobs": jobs })
        }
        Command::Manifest(a) => {
            print!("{}", a.manifest()?.to_toml()?);
            return Ok((serde_json::Value::Null, true));
        }
        Command::Validate => {
            let checks = io::validate_suite();
            let ok = checks.iter().all(|c| c.passed);
            return Ok((json!({ "passed": ok, "checks": checks }), ok));
        }
    };
    Ok((summary, true))
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "config",
        Error::Io(_) | Error::Csv(_) => "io",
        Error::DensityFloor { .. } | Error::NodeProximity { .. } => "density-floor",
        Error::BoundaryLeak(_) => "boundary-leak",
        Error::Solver(_) => "solver",
        _ => "invalid-input",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((summary, ok)) => {
            if !summary.is_null() {
                println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}", json!({ "error": { "kind": "validation", "message": "invariant checks failed" } }));
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": error_kind(&e), "message": e.to_string() } }));
            ExitCode::from(2)
        }
    }
}
