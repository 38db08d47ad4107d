//! Time evolution of a coherent-state ansatz.
//!
//! Basis centers move along a phase-space velocity field (a gauge flow of the
//! smoothed density, or the single-state expectation values of the CCS
//! scheme). Amplitudes `a_k = b_k·exp(i(γ_k + γ̃_k))` follow from a regularized
//! least-squares fit to the Schrödinger equation in the parameters `(b_k, γ_k)`,
//! while the fast phases `γ̃_k` are integrated from the center motion. All of
//! it is advanced together by classical RK4.

mod matrices;

pub use matrices::{energy, BasisMatrices};

use crate::fields::{
    bohmian_limit_fields, density_and_flux, husimi, Ansatz, FluxBackend, GaugeSpec, HusimiWidths, Physics,
};
use crate::gauss::BasisState;
use crate::potential::Potential;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Magnitude below which an amplitude is advanced in Cartesian rather than polar form.
pub const LINEAR_CHART_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Rk4,
}

/// What drives the basis centers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterDynamics {
    /// Velocity field of the configured gauge, evaluated at each center.
    #[default]
    GaugeFlow,
    /// Coupled coherent states: `ṗ = -⟨∂V/∂x⟩_k`, `ẋ = p̄_k/m`.
    Ccs,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Regularization strength of the least-squares amplitude fit.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Diagonal of the regularization matrix, two entries per basis state; empty means identity.
    #[serde(default)]
    pub regularizer_diag: Vec<f64>,
    pub gauge: GaugeSpec,
    #[serde(default)]
    pub centers: CenterDynamics,
    pub widths: HusimiWidths,
    /// Density floor relative to the largest density found at a basis center.
    #[serde(default = "default_floor")]
    pub density_floor: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub backend: FluxBackend,
    /// Emit a snapshot every `output_stride` steps (and always at the end).
    #[serde(default = "default_stride")]
    pub output_stride: usize,
}

fn default_epsilon() -> f64 {
    1e-6
}

fn default_floor() -> f64 {
    1e-12
}

fn default_stride() -> usize {
    1
}

impl PropagationConfig {
    pub fn new(gauge: GaugeSpec, widths: HusimiWidths) -> Self {
        PropagationConfig {
            dt: 1e-3,
            t_final: 0.0,
            epsilon: default_epsilon(),
            regularizer_diag: Vec::new(),
            gauge,
            centers: CenterDynamics::GaugeFlow,
            widths,
            density_floor: default_floor(),
            integrator: Integrator::Rk4,
            backend: FluxBackend::Exact,
            output_stride: 1,
        }
    }

    /// CCS propagation; the smoothing widths are unused but kept for uniform configs.
    pub fn ccs(widths: HusimiWidths) -> Self {
        PropagationConfig { centers: CenterDynamics::Ccs, ..Self::new(GaugeSpec::Default, widths) }
    }

    pub fn validate(&self, hbar: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("t_final must be >= 0, got {}", self.t_final)));
        }
        if self.regularizer_diag.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Config("regularizer diagonal entries must be positive".into()));
        }
        if !(self.density_floor >= 0.0) {
            return Err(Error::Config("density floor must be >= 0".into()));
        }
        if self.output_stride == 0 {
            return Err(Error::Config("output stride must be >= 1".into()));
        }
        self.widths.validate(hbar)
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Ansatz with its amplitudes split into magnitude, slow phase and fast phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolvingState {
    pub ansatz: Ansatz,
    pub slow_phases: Vec<f64>,
    pub fast_phases: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl EvolvingState {
    /// Fast phases start at zero; the slow phase carries `arg a_k`.
    pub fn from_ansatz(ansatz: Ansatz) -> Result<Self> {
        ansatz.validate()?;
        let n = ansatz.len();
        Ok(EvolvingState {
            magnitudes: ansatz.amplitudes.iter().map(|a| a.norm()).collect(),
            slow_phases: ansatz.amplitudes.iter().map(|a| a.arg()).collect(),
            fast_phases: vec![0.0; n],
            ansatz,
        })
    }

    pub fn time(&self) -> f64 {
        self.ansatz.time
    }

    fn amplitude(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.magnitudes[k], self.slow_phases[k] + self.fast_phases[k])
    }

    /// Checks `a_k = b_k·exp(i(γ_k + γ̃_k))` and `b_k ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        let n = self.ansatz.len();
        if self.slow_phases.len() != n || self.fast_phases.len() != n || self.magnitudes.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.magnitudes.len() });
        }
        for k in 0..n {
            let a = self.ansatz.amplitudes[k];
            if !(self.magnitudes[k] >= 0.0) || (self.amplitude(k) - a).norm() > 1e-12 * (1.0 + a.norm()) {
                return Err(Error::InvalidParameter(format!("amplitude {k} is inconsistent with its polar parts")));
            }
        }
        Ok(())
    }
}

/// Per-basis-state diagnostics recorded with each snapshot.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisDiagnostics {
    pub velocity_p: Vec<f64>,
    pub velocity_x: Vec<f64>,
    pub fast_phase_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub state: EvolvingState,
    pub norm: f64,
    pub energy: f64,
    pub diagnostics: Vec<BasisDiagnostics>,
}

/// Where and why a run stopped early.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub time: f64,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationRun {
    pub snapshots: Vec<Snapshot>,
    pub failure: Option<Failure>,
}

impl PropagationRun {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a run always holds its initial snapshot")
    }
}

/// Center velocity `(ṗ̄, x̄̇)` of a single basis state under CCS.
pub fn ccs_velocity(state: &BasisState, potential: &Potential, physics: &Physics) -> (Vec<f64>, Vec<f64>) {
    let hbar = physics.hbar;
    let dims = state.dim();
    let mut pdot = vec![0.0; dims];
    let mut xdot = vec![0.0; dims];
    for n in 0..dims {
        let m = state.mode(n);
        pdot[n] = -potential.terms_on(n).map(|t| t.gradient_element_1d(&m, &m, hbar).re).sum::<f64>();
        xdot[n] = m.p / physics.masses[n];
    }
    (pdot, xdot)
}

/// Density the gauge flow divides by; `|ψ|²` in the Bohmian limit.
fn flow_density(gauge: &GaugeSpec, ansatz: &Ansatz, widths: &HusimiWidths, physics: &Physics, p: &[f64], x: &[f64]) -> Result<f64> {
    match gauge {
        GaugeSpec::BohmianLimit => Ok(ansatz.value(x, physics.hbar).norm_sqr()),
        _ => husimi(ansatz, widths, p, x, physics.hbar),
    }
}

/// Absolute density floor for the current ansatz.
pub fn absolute_floor(ansatz: &Ansatz, physics: &Physics, config: &PropagationConfig) -> Result<f64> {
    if config.centers == CenterDynamics::Ccs || config.density_floor == 0.0 {
        return Ok(0.0);
    }
    let mut peak: f64 = 0.0;
    for b in &ansatz.basis {
        peak = peak.max(flow_density(&config.gauge, ansatz, &config.widths, physics, &b.centers_p, &b.centers_x)?);
    }
    Ok(config.density_floor * peak)
}

/// Velocities of every basis center; errors if any center sits below `floor`.
pub fn center_velocities(
    ansatz: &Ansatz,
    potential: &Potential,
    physics: &Physics,
    config: &PropagationConfig,
    floor: f64,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if config.centers == CenterDynamics::Ccs {
        return Ok(ansatz.basis.iter().map(|b| ccs_velocity(b, potential, physics)).collect());
    }
    let mut out = Vec::with_capacity(ansatz.len());
    for b in &ansatz.basis {
        let (p, x) = (&b.centers_p, &b.centers_x);
        if let GaugeSpec::BohmianLimit = config.gauge {
            let f = bohmian_limit_fields(ansatz, potential, physics, x[0], 0.0)?;
            if !(f.density > floor) {
                return Err(Error::DensityFloor { density: f.density, floor, p: p.clone(), x: x.clone() });
            }
            out.push((vec![f.force], vec![f.momentum / physics.masses[0]]));
            continue;
        }
        let (density, flux) = density_and_flux(&config.gauge, ansatz, potential, &config.widths, physics, p, x, config.backend)?;
        if !(density > floor) {
            return Err(Error::DensityFloor { density, floor, p: p.clone(), x: x.clone() });
        }
        out.push((flux.p.iter().map(|j| j / density).collect(), flux.x.iter().map(|j| j / density).collect()));
    }
    Ok(out)
}

/// `γ̃̇_k = (p̄_k·x̄̇_k - ⟨χ_k|Ĥ|χ_k⟩)/ħ`.
pub fn fast_phase_rates(basis: &[BasisState], velocities: &[(Vec<f64>, Vec<f64>)], matrices: &BasisMatrices, hbar: f64) -> Vec<f64> {
    basis
        .iter()
        .zip(velocities)
        .enumerate()
        .map(|(k, (b, (_, xdot)))| {
            let px: f64 = b.centers_p.iter().zip(xdot).map(|(p, v)| p * v).sum();
            (px - matrices.h(k, k).re) / hbar
        })
        .collect()
}

/// Local coordinates of one amplitude `w_k = a_k·exp(-iγ̃_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    /// `(b, γ)` with `w = b·exp(iγ)`.
    Polar,
    /// `(Re w, Im w)`.
    Linear,
}

impl Chart {
    /// `∂w/∂z1`, `∂w/∂z2`.
    fn tangents(self, z1: f64, z2: f64) -> [Complex64; 2] {
        match self {
            Chart::Polar => {
                let e = Complex64::from_polar(1.0, z2);
                [e, Complex64::new(0.0, z1) * e]
            }
            Chart::Linear => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
        }
    }
}

/// The regularized normal equations `A ζ̇ = b` for the amplitude parameters.
///
/// `tangents[k]` holds `∂ψ/∂ζ` coefficients on `χ_k` (fast phase included);
/// `residual[k] = ⟨χ_k|(-i/ħ)Ĥψ - ψ_t⟩` with `ψ_t` the part of `∂ψ/∂t` not
/// driven by `ζ̇`.
pub fn least_squares_system(
    matrices: &BasisMatrices,
    tangents: &[[Complex64; 2]],
    residual: &[Complex64],
    epsilon: f64,
    regularizer_diag: &[f64],
) -> (DMatrix<f64>, DVector<f64>) {
    let k = tangents.len();
    let n = 2 * k;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for i in 0..k {
        for s in 0..2 {
            let gi = tangents[i][s].conj();
            b[2 * i + s] = (gi * residual[i]).re;
            for j in 0..k {
                let sij = gi * matrices.s(i, j);
                for r in 0..2 {
                    a[(2 * i + s, 2 * j + r)] = (sij * tangents[j][r]).re;
                }
            }
        }
    }
    for i in 0..n {
        a[(i, i)] += epsilon * regularizer_diag.get(i).copied().unwrap_or(1.0);
    }
    (a, b)
}

/// Solves the normal equations by Cholesky factorization.
pub fn solve_least_squares(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Solver("least-squares matrix is not positive definite; increase epsilon".into()))?;
    let x = chol.solve(b);
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::Solver("least-squares solution is not finite".into()))
    }
}

/// Everything the right-hand side computes at one point.
struct Evaluation {
    derivative: Vec<f64>,
    velocities: Vec<(Vec<f64>, Vec<f64>)>,
    fast_rates: Vec<f64>,
    norm: f64,
    energy: f64,
}

/// Flattened per-basis layout `[p̄ (N), x̄ (N), z1, z2, γ̃]`.
struct Layout {
    dims: usize,
}

impl Layout {
    fn stride(&self) -> usize {
        2 * self.dims + 3
    }
    fn p(&self, k: usize) -> usize {
        k * self.stride()
    }
    fn x(&self, k: usize) -> usize {
        k * self.stride() + self.dims
    }
    fn z(&self, k: usize) -> usize {
        k * self.stride() + 2 * self.dims
    }
    fn fast(&self, k: usize) -> usize {
        k * self.stride() + 2 * self.dims + 2
    }
}

/// Drives an [`EvolvingState`] under a fixed potential and configuration.
pub struct Propagator<'a> {
    pub potential: &'a Potential,
    pub physics: &'a Physics,
    pub config: &'a PropagationConfig,
}

impl<'a> Propagator<'a> {
    pub fn new(potential: &'a Potential, physics: &'a Physics, config: &'a PropagationConfig) -> Result<Self> {
        physics.validate()?;
        potential.validate()?;
        config.validate(physics.hbar)?;
        Ok(Propagator { potential, physics, config })
    }

    fn check(&self, state: &EvolvingState) -> Result<()> {
        state.validate()?;
        let dims = state.ansatz.dim();
        if dims != self.potential.dims {
            return Err(Error::DimensionMismatch { expected: self.potential.dims, found: dims });
        }
        if self.physics.masses.len() != dims {
            return Err(Error::DimensionMismatch { expected: dims, found: self.physics.masses.len() });
        }
        if self.config.centers == CenterDynamics::GaugeFlow {
            self.config.widths.check_dim(dims)?;
            if !self.config.gauge.supports_dims(dims) {
                return Err(Error::Config(format!("gauge {} does not support {dims} dimensions", self.config.gauge)));
            }
        }
        let k = state.ansatz.len();
        if !self.config.regularizer_diag.is_empty() && self.config.regularizer_diag.len() != 2 * k {
            return Err(Error::Config(format!(
                "regularizer diagonal needs {} entries, got {}",
                2 * k,
                self.config.regularizer_diag.len()
            )));
        }
        Ok(())
    }

    fn charts(state: &EvolvingState) -> Vec<Chart> {
        state.magnitudes.iter().map(|&b| if b < LINEAR_CHART_THRESHOLD { Chart::Linear } else { Chart::Polar }).collect()
    }

    fn pack(state: &EvolvingState, charts: &[Chart]) -> Vec<f64> {
        let layout = Layout { dims: state.ansatz.dim() };
        let mut y = vec![0.0; state.ansatz.len() * layout.stride()];
        for (k, b) in state.ansatz.basis.iter().enumerate() {
            y[layout.p(k)..layout.p(k) + layout.dims].copy_from_slice(&b.centers_p);
            y[layout.x(k)..layout.x(k) + layout.dims].copy_from_slice(&b.centers_x);
            let (z1, z2) = match charts[k] {
                Chart::Polar => (state.magnitudes[k], state.slow_phases[k]),
                Chart::Linear => {
                    let w = Complex64::from_polar(state.magnitudes[k], state.slow_phases[k]);
                    (w.re, w.im)
                }
            };
            y[layout.z(k)] = z1;
            y[layout.z(k) + 1] = z2;
            y[layout.fast(k)] = state.fast_phases[k];
        }
        y
    }

    fn unpack(template: &EvolvingState, charts: &[Chart], y: &[f64], time: f64) -> EvolvingState {
        let dims = template.ansatz.dim();
        let layout = Layout { dims };
        let k = template.ansatz.len();
        let mut basis = Vec::with_capacity(k);
        let (mut mags, mut slow, mut fast) = (Vec::with_capacity(k), Vec::with_capacity(k), Vec::with_capacity(k));
        for i in 0..k {
            basis.push(BasisState {
                centers_p: y[layout.p(i)..layout.p(i) + dims].to_vec(),
                centers_x: y[layout.x(i)..layout.x(i) + dims].to_vec(),
                widths: template.ansatz.basis[i].widths.clone(),
            });
            let (z1, z2) = (y[layout.z(i)], y[layout.z(i) + 1]);
            let (b, g) = match charts[i] {
                Chart::Polar if z1 < 0.0 => (-z1, z2 + std::f64::consts::PI),
                Chart::Polar => (z1, z2),
                Chart::Linear => {
                    let w = Complex64::new(z1, z2);
                    (w.norm(), w.arg())
                }
            };
            mags.push(b);
            slow.push(g);
            fast.push(y[layout.fast(i)]);
        }
        let amplitudes = (0..k).map(|i| Complex64::from_polar(mags[i], slow[i] + fast[i])).collect();
        EvolvingState {
            ansatz: Ansatz { amplitudes, basis, time },
            slow_phases: slow,
            fast_phases: fast,
            magnitudes: mags,
        }
    }

    fn evaluate(&self, template: &EvolvingState, charts: &[Chart], y: &[f64], time: f64, floor: f64) -> Result<Evaluation> {
        let hbar = self.physics.hbar;
        let layout = Layout { dims: template.ansatz.dim() };
        let dims = layout.dims;
        let k = template.ansatz.len();
        let state = Self::unpack(template, charts, y, time);
        let ansatz = &state.ansatz;
        let velocities = center_velocities(ansatz, self.potential, self.physics, self.config, floor)?;
        let mats = BasisMatrices::new(&ansatz.basis, self.potential, self.physics);
        let fast_rates = fast_phase_rates(&ansatz.basis, &velocities, &mats, hbar);
        let a = &ansatz.amplitudes;

        // Coefficients of ψ_t on χ_l: the constant part and the (x - x̄_l) slopes per dimension.
        let mut constant = vec![Complex64::new(0.0, 0.0); k];
        let mut slopes = vec![vec![Complex64::new(0.0, 0.0); dims]; k];
        for l in 0..k {
            let b = &ansatz.basis[l];
            let (pdot, xdot) = &velocities[l];
            let mut c = Complex64::new(0.0, fast_rates[l]);
            for n in 0..dims {
                let s2 = b.widths[n] * b.widths[n];
                slopes[l][n] = a[l] * Complex64::new(xdot[n] / s2, pdot[n] / hbar);
                c -= Complex64::new(0.0, b.centers_p[n] * xdot[n] / hbar);
            }
            constant[l] = a[l] * c;
        }
        let h_psi = BasisMatrices::apply(&mats.hamiltonian, a);
        let mut residual = vec![Complex64::new(0.0, 0.0); k];
        for i in 0..k {
            let mut psi_t = Complex64::new(0.0, 0.0);
            for l in 0..k {
                psi_t += mats.s(i, l) * constant[l];
                for n in 0..dims {
                    psi_t += mats.displacement[n][i * k + l] * slopes[l][n];
                }
            }
            residual[i] = Complex64::new(0.0, -1.0 / hbar) * h_psi[i] - psi_t;
        }
        let tangents: Vec<[Complex64; 2]> = (0..k)
            .map(|i| {
                let phase = Complex64::from_polar(1.0, y[layout.fast(i)]);
                let t = charts[i].tangents(y[layout.z(i)], y[layout.z(i) + 1]);
                [phase * t[0], phase * t[1]]
            })
            .collect();
        let (am, bv) = least_squares_system(&mats, &tangents, &residual, self.config.epsilon, &self.config.regularizer_diag);
        let zdot = solve_least_squares(am, &bv)?;

        let mut derivative = vec![0.0; y.len()];
        for i in 0..k {
            let (pdot, xdot) = &velocities[i];
            derivative[layout.p(i)..layout.p(i) + dims].copy_from_slice(pdot);
            derivative[layout.x(i)..layout.x(i) + dims].copy_from_slice(xdot);
            derivative[layout.z(i)] = zdot[2 * i];
            derivative[layout.z(i) + 1] = zdot[2 * i + 1];
            derivative[layout.fast(i)] = fast_rates[i];
        }
        let (norm, e) = mats.norm_and_energy(a);
        Ok(Evaluation { derivative, velocities, fast_rates, norm, energy: e / norm })
    }

    /// One RK4 step of centers, amplitude parameters and fast phases. `dt` may be negative.
    pub fn step(&self, state: &EvolvingState, dt: f64) -> Result<EvolvingState> {
        self.check(state)?;
        let floor = absolute_floor(&state.ansatz, self.physics, self.config)?;
        let charts = Self::charts(state);
        let t0 = state.time();
        let y0 = Self::pack(state, &charts);
        let axpy = |h: f64, k: &[f64]| y0.iter().zip(k).map(|(y, k)| y + h * k).collect::<Vec<_>>();
        let k1 = self.evaluate(state, &charts, &y0, t0, floor)?.derivative;
        let k2 = self.evaluate(state, &charts, &axpy(0.5 * dt, &k1), t0 + 0.5 * dt, floor)?.derivative;
        let k3 = self.evaluate(state, &charts, &axpy(0.5 * dt, &k2), t0 + 0.5 * dt, floor)?.derivative;
        let k4 = self.evaluate(state, &charts, &axpy(dt, &k3), t0 + dt, floor)?.derivative;
        let y1: Vec<f64> = (0..y0.len()).map(|i| y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
        Ok(Self::unpack(state, &charts, &y1, t0 + dt))
    }

    /// Time derivatives `(ṗ̄, x̄̇)` per center and `γ̃̇`, plus norm and energy, at the current state.
    pub fn snapshot(&self, state: &EvolvingState) -> Result<Snapshot> {
        self.check(state)?;
        let floor = absolute_floor(&state.ansatz, self.physics, self.config)?;
        let charts = Self::charts(state);
        let y = Self::pack(state, &charts);
        let ev = self.evaluate(state, &charts, &y, state.time(), floor)?;
        Ok(Snapshot {
            time: state.time(),
            state: state.clone(),
            norm: ev.norm,
            energy: ev.energy,
            diagnostics: ev
                .velocities
                .into_iter()
                .zip(ev.fast_rates)
                .map(|((vp, vx), r)| BasisDiagnostics { velocity_p: vp, velocity_x: vx, fast_phase_rate: r })
                .collect(),
        })
    }

    /// Time derivative of the amplitude parameters `(ż1, ż2)` per basis state at the current state.
    pub fn amplitude_rates(&self, state: &EvolvingState) -> Result<Vec<[f64; 2]>> {
        self.check(state)?;
        let floor = absolute_floor(&state.ansatz, self.physics, self.config)?;
        let charts = Self::charts(state);
        let y = Self::pack(state, &charts);
        let ev = self.evaluate(state, &charts, &y, state.time(), floor)?;
        let layout = Layout { dims: state.ansatz.dim() };
        Ok((0..state.ansatz.len()).map(|k| [ev.derivative[layout.z(k)], ev.derivative[layout.z(k) + 1]]).collect())
    }
}

/// Runs to `config.t_final`, keeping snapshots at the output stride. A failing
/// step ends the run and is recorded; earlier snapshots are kept.
pub fn propagate(initial: &EvolvingState, potential: &Potential, physics: &Physics, config: &PropagationConfig) -> Result<PropagationRun> {
    propagate_with(initial, potential, physics, config, |_| Ok(()))
}

/// [`propagate`] with a callback invoked on every emitted snapshot.
pub fn propagate_with(
    initial: &EvolvingState,
    potential: &Potential,
    physics: &Physics,
    config: &PropagationConfig,
    mut on_snapshot: impl FnMut(&Snapshot) -> Result<()>,
) -> Result<PropagationRun> {
    let prop = Propagator::new(potential, physics, config)?;
    if initial.fast_phases.iter().any(|g| *g != 0.0) {
        return Err(Error::InvalidParameter("initial fast phases must be zero".into()));
    }
    let first = prop.snapshot(initial)?;
    on_snapshot(&first)?;
    let mut run = PropagationRun { snapshots: vec![first], failure: None };
    let steps = config.steps();
    let mut state = initial.clone();
    for n in 1..=steps {
        let next = prop.step(&state, config.dt).and_then(|mut s| {
            // Re-anchor time to the grid so long runs do not accumulate drift.
            s.ansatz.time = initial.time() + n as f64 * config.dt;
            if n % config.output_stride == 0 || n == steps {
                let snap = prop.snapshot(&s)?;
                on_snapshot(&snap)?;
                run.snapshots.push(snap);
            }
            Ok(s)
        });
        match next {
            Ok(s) => state = s,
            Err(e) => {
                run.failure = Some(Failure { time: state.time(), message: e.to_string() });
                break;
            }
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests;
