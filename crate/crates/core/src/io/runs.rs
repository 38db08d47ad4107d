//! Experiment drivers behind the command-line subcommands.

use super::manifest::{Method, RunManifest};
use super::output::{CsvWriter, Metadata};
use super::scenario::{InitialState, Scenario};
use crate::fields::{sample_flow, velocity, Ansatz, FlowOptions, GaugeSpec};
use crate::grid::{
    ansatz_to_grid, quality_factor, tunneling_probability_ansatz, tunneling_probability_grid, GridState, SplitOperator,
};
use crate::propagator::{absolute_floor, propagate_with, EvolvingState, Failure, PropagationConfig, Snapshot};
use crate::{Error, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

fn require_1d(scenario: &Scenario, what: &str) -> Result<()> {
    if scenario.dims() != 1 {
        return Err(Error::Config(format!("{what} is only available for one-dimensional scenarios")));
    }
    Ok(())
}

fn metadata(manifest: &RunManifest, gauge: &GaugeSpec) -> Result<Metadata> {
    let s = manifest.scenario()?;
    Ok(Metadata::new(&s.name, &gauge.to_string(), manifest.seed, s.physics.hbar))
}

fn flow_options(ansatz: &Ansatz, scenario: &Scenario, config: &PropagationConfig) -> Result<FlowOptions> {
    Ok(FlowOptions { backend: config.backend, density_floor: absolute_floor(ansatz, &scenario.physics, config)? })
}

/// One field sample per point of the sampling box, for the initial state in the manifest's gauge.
pub fn run_flow_field(manifest: &RunManifest, out_dir: &Path) -> Result<PathBuf> {
    let scenario = manifest.scenario()?;
    require_1d(&scenario, "flow-field sampling")?;
    let cfg = &manifest.propagation;
    let ansatz = scenario.initial_ansatz()?;
    let options = flow_options(&ansatz, &scenario, cfg)?;
    let path = out_dir.join("fields.csv");
    let meta = metadata(manifest, &cfg.gauge)?
        .with("time", ansatz.time)
        .with("smoothing_alpha", cfg.widths.alpha)
        .with("flux_backend", format!("{:?}", cfg.backend).to_lowercase());
    let header = ["p", "x", "density", "flux_p", "flux_x", "velocity_p", "velocity_x", "below_floor"];
    let mut w = CsvWriter::create(&path, &meta, &header)?;
    for p in manifest.sampling.p_axis() {
        for x in manifest.sampling.x_axis() {
            let s = sample_flow(&cfg.gauge, &ansatz, &scenario.potential, &cfg.widths, &scenario.physics, &[p], &[x], options)?;
            w.row(&[
                p,
                x,
                s.density,
                s.flux_p[0],
                s.flux_x[0],
                s.velocity_p[0],
                s.velocity_x[0],
                if s.below_floor { 1.0 } else { 0.0 },
            ])?;
        }
    }
    w.finish()?;
    Ok(path)
}

/// Outcome of one propagation-type job.
#[derive(Clone, Debug, Serialize)]
pub struct JobResult {
    pub method: String,
    pub completed: bool,
    pub failure_time: Option<f64>,
    pub message: Option<String>,
    pub files: Vec<PathBuf>,
}

impl JobResult {
    fn new(method: &str, failure: Option<&Failure>, files: Vec<PathBuf>) -> Self {
        JobResult {
            method: method.into(),
            completed: failure.is_none(),
            failure_time: failure.map(|f| f.time),
            message: failure.map(|f| f.message.clone()),
            files,
        }
    }
}

#[derive(Serialize)]
struct ResultFile<'a> {
    scenario: &'a str,
    version: &'a str,
    jobs: &'a [JobResult],
}

/// Writes `result.toml` summarizing job outcomes and failure times.
pub fn write_results(out_dir: &Path, scenario: &str, jobs: &[JobResult]) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("result.toml");
    let text = toml::to_string(&ResultFile { scenario, version: super::output::VERSION, jobs })
        .map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Basis-center trajectories, plus massless parcels advected by the sampled field with Heun's method
/// between consecutive snapshots.
pub fn run_trajectories(manifest: &RunManifest, out_dir: &Path) -> Result<JobResult> {
    let scenario = manifest.scenario()?;
    require_1d(&scenario, "trajectory output")?;
    let cfg = &manifest.propagation;
    let initial = EvolvingState::from_ansatz(scenario.initial_ansatz()?)?;
    let meta = metadata(manifest, &cfg.gauge)?.with("dt", cfg.dt);
    let basis_path = out_dir.join("basis_trajectories.csv");
    let mut basis = CsvWriter::create(&basis_path, &meta, &["t", "state", "p", "x", "velocity_p", "velocity_x"])?;
    let mut snapshots: Vec<Ansatz> = Vec::new();
    let run = propagate_with(&initial, &scenario.potential, &scenario.physics, cfg, |snap: &Snapshot| {
        for (k, (b, d)) in snap.state.ansatz.basis.iter().zip(&snap.diagnostics).enumerate() {
            basis.row(&[snap.time, k as f64, b.centers_p[0], b.centers_x[0], d.velocity_p[0], d.velocity_x[0]])?;
        }
        snapshots.push(snap.state.ansatz.clone());
        Ok(())
    })?;
    basis.finish()?;

    let parcels_path = out_dir.join("parcels.csv");
    let mut parcels = CsvWriter::create(
        &parcels_path,
        &meta.clone().with("parcel_integrator", "heun"),
        &["t", "parcel", "p", "x", "stopped"],
    )?;
    let field = |ansatz: &Ansatz, p: f64, x: f64| -> Result<Option<(f64, f64)>> {
        let options = flow_options(ansatz, &scenario, cfg)?;
        match velocity(&cfg.gauge, ansatz, &scenario.potential, &cfg.widths, &scenario.physics, &[p], &[x], options) {
            Ok((vp, vx)) => Ok(Some((vp[0], vx[0]))),
            Err(Error::DensityFloor { .. }) | Err(Error::NodeProximity { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut state: Vec<(f64, f64, bool)> = parcel_seeds(manifest).into_iter().map(|(p, x)| (p, x, false)).collect();
    for (n, ansatz) in snapshots.iter().enumerate() {
        for (j, (p, x, stopped)) in state.iter().enumerate() {
            parcels.row(&[ansatz.time, j as f64, *p, *x, if *stopped { 1.0 } else { 0.0 }])?;
        }
        let Some(next) = snapshots.get(n + 1) else { break };
        let h = next.time - ansatz.time;
        for (p, x, stopped) in state.iter_mut().filter(|s| !s.2) {
            let Some((kp, kx)) = field(ansatz, *p, *x)? else {
                *stopped = true;
                continue;
            };
            let (pp, xp) = (*p + h * kp, *x + h * kx);
            let Some((lp, lx)) = field(next, pp, xp)? else {
                *stopped = true;
                continue;
            };
            *p += 0.5 * h * (kp + lp);
            *x += 0.5 * h * (kx + lx);
        }
    }
    parcels.finish()?;
    Ok(JobResult::new(&cfg.gauge.to_string(), run.failure.as_ref(), vec![basis_path, parcels_path]))
}

/// A coarse 5 × 5 lattice inside the sampling box.
fn parcel_seeds(manifest: &RunManifest) -> Vec<(f64, f64)> {
    let b = &manifest.sampling;
    let lerp = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i as f64 + 1.0) / 6.0;
    (0..5).flat_map(|i| (0..5).map(move |j| (lerp(b.p_min, b.p_max, i), lerp(b.x_min, b.x_max, j)))).collect()
}

/// Observables and basis parameters over the propagation window.
pub fn run_propagation(manifest: &RunManifest, out_dir: &Path) -> Result<JobResult> {
    let scenario = manifest.scenario()?;
    let cfg = &manifest.propagation;
    let hbar = scenario.physics.hbar;
    let initial = EvolvingState::from_ansatz(scenario.initial_ansatz()?)?;
    let meta = metadata(manifest, &cfg.gauge)?.with("dt", cfg.dt).with("epsilon", cfg.epsilon);
    let obs_path = out_dir.join("observables.csv");
    let basis_path = out_dir.join("basis.csv");
    let one_d = scenario.dims() == 1;
    let mut obs = CsvWriter::create(&obs_path, &meta, &["t", "norm", "energy", "p_tun"])?;
    let mut basis = CsvWriter::create(
        &basis_path,
        &meta,
        &["t", "state", "dim", "p", "x", "magnitude", "slow_phase", "fast_phase", "fast_phase_rate"],
    )?;
    let run = propagate_with(&initial, &scenario.potential, &scenario.physics, cfg, |snap: &Snapshot| {
        let ptun = if one_d { tunneling_probability_ansatz(&snap.state.ansatz, hbar)? } else { f64::NAN };
        obs.row(&[snap.time, snap.norm, snap.energy, ptun])?;
        let st = &snap.state;
        for (k, b) in st.ansatz.basis.iter().enumerate() {
            for n in 0..b.dim() {
                basis.row(&[
                    snap.time,
                    k as f64,
                    n as f64,
                    b.centers_p[n],
                    b.centers_x[n],
                    st.magnitudes[k],
                    st.slow_phases[k],
                    st.fast_phases[k],
                    snap.diagnostics[k].fast_phase_rate,
                ])?;
            }
        }
        Ok(())
    })?;
    obs.finish()?;
    basis.finish()?;
    Ok(JobResult::new(&cfg.gauge.to_string(), run.failure.as_ref(), vec![obs_path, basis_path]))
}

/// Split-operator reference states at the snapshot interval of the manifest.
#[derive(Clone, Debug)]
pub struct ReferenceRun {
    pub times: Vec<f64>,
    pub states: Vec<GridState>,
    /// First time the boundary invariant failed, if any.
    pub contaminated_at: Option<f64>,
}

fn output_interval(manifest: &RunManifest) -> f64 {
    manifest.propagation.dt * manifest.propagation.output_stride as f64
}

fn reference_initial(scenario: &Scenario, manifest: &RunManifest) -> Result<GridState> {
    let mass = scenario.physics.masses[0];
    let hbar = scenario.physics.hbar;
    match scenario.reference.as_ref().unwrap_or(&scenario.initial) {
        InitialState::GridGaussian { center, width } => GridState::gaussian(manifest.grid, *center, *width, hbar, mass),
        InitialState::AnsatzTable { .. } => ansatz_to_grid(&scenario.initial_ansatz()?, manifest.grid, hbar, mass),
    }
}

pub fn reference_states(manifest: &RunManifest) -> Result<ReferenceRun> {
    let scenario = manifest.scenario()?;
    require_1d(&scenario, "the grid reference")?;
    let interval = output_interval(manifest);
    let per_output = (interval / manifest.grid_dt).round() as usize;
    if per_output == 0 || ((per_output as f64) * manifest.grid_dt - interval).abs() > 1e-9 * interval {
        return Err(Error::Config(format!(
            "grid_dt {} must divide the output interval {interval}",
            manifest.grid_dt
        )));
    }
    let outputs = (manifest.propagation.t_final / interval).round() as usize;
    let mut state = reference_initial(&scenario, manifest)?;
    let mut solver = SplitOperator::new(
        manifest.grid,
        &scenario.potential,
        manifest.grid_dt,
        scenario.physics.hbar,
        scenario.physics.masses[0],
    )?;
    let mut run = ReferenceRun { times: vec![0.0], states: vec![state.clone()], contaminated_at: None };
    for n in 1..=outputs {
        solver.advance(&mut state, per_output)?;
        state.time = n as f64 * interval;
        if run.contaminated_at.is_none() && state.check_boundary().is_err() {
            run.contaminated_at = Some(state.time);
        }
        run.times.push(state.time);
        run.states.push(state.clone());
    }
    Ok(run)
}

pub fn run_reference(manifest: &RunManifest, out_dir: &Path) -> Result<JobResult> {
    let scenario = manifest.scenario()?;
    let reference = reference_states(manifest)?;
    let path = out_dir.join("reference.csv");
    let meta = metadata(manifest, &manifest.propagation.gauge)?
        .with_method(Method::SplitOperator.name())
        .with("grid_points", manifest.grid.n_points)
        .with("grid_dt", manifest.grid_dt);
    let mut w = CsvWriter::create(&path, &meta, &["t", "p_tun", "norm", "energy", "boundary_ratio"])?;
    for s in &reference.states {
        w.row(&[s.time, tunneling_probability_grid(s), s.norm_sq(), s.energy(&scenario.potential), s.boundary_ratio()])?;
    }
    w.finish()?;
    let failure = reference
        .contaminated_at
        .map(|t| Failure { time: t, message: "boundary leak: reference contaminated".into() });
    Ok(JobResult::new(Method::SplitOperator.name(), failure.as_ref(), vec![path]))
}

/// One benchmark row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub t: f64,
    pub p_tun: f64,
    /// `NaN` when the quality factor is undefined.
    pub quality: f64,
    pub norm: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct MethodSeries {
    pub method: Method,
    pub rows: Vec<BenchmarkRow>,
    pub failure: Option<Failure>,
}

impl MethodSeries {
    /// Trapezoidal time average of the defined quality factors on `[t0, t1]`.
    pub fn mean_quality(&self, t0: f64, t1: f64) -> Option<f64> {
        let pts: Vec<_> = self
            .rows
            .iter()
            .filter(|r| r.t >= t0 - 1e-9 && r.t <= t1 + 1e-9 && r.quality.is_finite())
            .map(|r| (r.t, r.quality))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let area: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
        Some(area / (pts.last()?.0 - pts[0].0))
    }

    pub fn at(&self, t: f64) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| (r.t - t).abs() < 1e-9)
    }
}

fn benchmark_method(manifest: &RunManifest, reference: &ReferenceRun, method: Method) -> Result<MethodSeries> {
    let scenario = manifest.scenario()?;
    let (hbar, mass) = (scenario.physics.hbar, scenario.physics.masses[0]);
    if method == Method::SplitOperator {
        let rows = reference
            .states
            .iter()
            .map(|s| BenchmarkRow {
                t: s.time,
                p_tun: tunneling_probability_grid(s),
                quality: quality_factor(s, s).ok().flatten().unwrap_or(f64::NAN),
                norm: s.norm_sq(),
                energy: s.energy(&scenario.potential),
            })
            .collect();
        let failure = reference.contaminated_at.map(|t| Failure { time: t, message: "boundary leak".into() });
        return Ok(MethodSeries { method, rows, failure });
    }
    let cfg = manifest.method_config(method);
    let initial = EvolvingState::from_ansatz(scenario.initial_ansatz()?)?;
    let interval = output_interval(manifest);
    let mut rows = Vec::new();
    let run = propagate_with(&initial, &scenario.potential, &scenario.physics, &cfg, |snap: &Snapshot| {
        let n = (snap.time / interval).round() as usize;
        let quality = match (reference.states.get(n), ansatz_to_grid(&snap.state.ansatz, manifest.grid, hbar, mass)) {
            (Some(r), Ok(g)) if (r.time - snap.time).abs() < 1e-9 => quality_factor(r, &g)?.unwrap_or(f64::NAN),
            _ => f64::NAN,
        };
        rows.push(BenchmarkRow {
            t: snap.time,
            p_tun: tunneling_probability_ansatz(&snap.state.ansatz, hbar)?,
            quality,
            norm: snap.norm,
            energy: snap.energy,
        });
        Ok(())
    })?;
    Ok(MethodSeries { method, rows, failure: run.failure })
}

/// All requested methods, run concurrently against a shared split-operator reference.
pub fn benchmark(manifest: &RunManifest) -> Result<Vec<MethodSeries>> {
    let reference = reference_states(manifest)?;
    let methods = if manifest.methods.is_empty() { Method::ALL.to_vec() } else { manifest.methods.clone() };
    let results: Vec<Result<MethodSeries>> = std::thread::scope(|scope| {
        let handles: Vec<_> = methods
            .iter()
            .map(|&m| {
                let reference = &reference;
                scope.spawn(move || benchmark_method(manifest, reference, m))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Solver("benchmark job panicked".into()))))
            .collect()
    });
    results.into_iter().collect()
}

pub fn run_benchmark(manifest: &RunManifest, out_dir: &Path) -> Result<Vec<JobResult>> {
    let series = benchmark(manifest)?;
    let mut jobs = Vec::new();
    for s in &series {
        let cfg = manifest.method_config(s.method);
        let gauge = if s.method == Method::Ccs { "none (ccs centers)".to_string() } else { cfg.gauge.to_string() };
        let meta = metadata(manifest, &cfg.gauge)?;
        let meta = Metadata { gauge, ..meta }.with_method(s.method.name()).with("dt", cfg.dt).with("epsilon", cfg.epsilon);
        let path = out_dir.join(format!("benchmark_{}.csv", s.method.name()));
        let mut w = CsvWriter::create(&path, &meta, &["t", "p_tun", "quality", "norm", "energy"])?;
        for r in &s.rows {
            w.row(&[r.t, r.p_tun, r.quality, r.norm, r.energy])?;
        }
        w.finish()?;
        jobs.push(JobResult::new(s.method.name(), s.failure.as_ref(), vec![path]));
    }
    write_results(out_dir, &manifest.scenario, &jobs)?;
    Ok(jobs)
}
