//! One-dimensional grid reference: split-operator propagation and observables.

use crate::fields::Ansatz;
use crate::gauss::Gaussian;
use crate::potential::Potential;
use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Edge-to-peak amplitude ratio above which a run counts as contaminated.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// Periodic grid `x_k = x_min + k·Δx`, `k < n_points`, `Δx = (x_max - x_min)/n_points`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        let g = GridSpec { x_min, x_max, n_points };
        g.validate()?;
        Ok(g)
    }

    /// `[-16, 16)` with 2048 points, so `Δx = 1/64` and `x = 0` is a grid point.
    pub fn benchmark() -> Self {
        GridSpec { x_min: -16.0, x_max: 16.0, n_points: 2048 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n_points.is_power_of_two() || self.n_points < 2 {
            return Err(Error::InvalidParameter(format!("grid size must be a power of two, got {}", self.n_points)));
        }
        if !(self.x_max > self.x_min) {
            return Err(Error::InvalidParameter("grid requires x_max > x_min".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.x(k))
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / (self.x_max - self.x_min);
        (0..n).map(|k| if k < n / 2 { k as f64 * dk } else { (k as f64 - n as f64) * dk }).collect()
    }

    /// Heaviside weights for `x > 0`, with the `x = 0` sample at one half.
    pub fn heaviside(&self) -> Vec<f64> {
        let tol = 1e-9 * self.dx();
        self.points().map(|x| if x > tol { 1.0 } else if x.abs() <= tol { 0.5 } else { 0.0 }).collect()
    }
}

/// Wavefunction samples on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub values: Vec<Complex64>,
    pub time: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl GridState {
    /// Samples `f` on the grid, unnormalized.
    pub fn from_fn(spec: GridSpec, hbar: f64, mass: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        spec.validate()?;
        Ok(GridState {
            x_min: spec.x_min,
            x_max: spec.x_max,
            n_points: spec.n_points,
            values: spec.points().map(f).collect(),
            time: 0.0,
            hbar,
            mass,
        })
    }

    /// `exp(-(x-center)²/(2 width²))`, normalized.
    pub fn gaussian(spec: GridSpec, center: f64, width: f64, hbar: f64, mass: f64) -> Result<Self> {
        let mut g = Self::from_fn(spec, hbar, mass, |x| Complex64::new((-(x - center).powi(2) / (2.0 * width * width)).exp(), 0.0))?;
        g.normalize();
        g.check_boundary()?;
        Ok(g)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { x_min: self.x_min, x_max: self.x_max, n_points: self.n_points }
    }

    pub fn dx(&self) -> f64 {
        self.spec().dx()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sq().sqrt();
        self.values.iter_mut().for_each(|v| *v /= s);
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &GridState) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.dx()
    }

    /// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`.
    pub fn fidelity(&self, other: &GridState) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sq() * other.norm_sq())
    }

    /// Largest edge amplitude relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let edge = self.values[0].norm().max(self.values[self.n_points - 1].norm());
        if peak > 0.0 {
            edge / peak
        } else {
            f64::INFINITY
        }
    }

    pub fn check_boundary(&self) -> Result<()> {
        let r = self.boundary_ratio();
        if r < BOUNDARY_TOLERANCE {
            Ok(())
        } else {
            Err(Error::BoundaryLeak(r))
        }
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩` with the kinetic part evaluated spectrally.
    pub fn energy(&self, potential: &Potential) -> f64 {
        let spec = self.spec();
        let mut buf = self.values.clone();
        FftPlanner::new().plan_fft_forward(self.n_points).process(&mut buf);
        let k = spec.wavenumbers();
        let kin: f64 = buf.iter().zip(&k).map(|(v, k)| v.norm_sqr() * k * k).sum::<f64>() * self.dx()
            / self.n_points as f64
            * self.hbar
            * self.hbar
            / (2.0 * self.mass);
        let pot: f64 = self.values.iter().zip(spec.points()).map(|(v, x)| v.norm_sqr() * potential.value_1d(0, x)).sum::<f64>()
            * self.dx();
        (kin + pot) / self.norm_sq()
    }

    /// Wigner function at `(p, x_j)` by direct summation over grid-symmetric offsets.
    pub fn wigner(&self, p: f64, j: usize) -> f64 {
        let dx = self.dx();
        let reach = j.min(self.n_points - 1 - j);
        let mut s = Complex64::new(0.0, 0.0);
        for m in 0..=reach {
            let c = self.values[j - m].conj() * self.values[j + m];
            let phase = Complex64::from_polar(1.0, -2.0 * p * m as f64 * dx / self.hbar);
            if m == 0 {
                s += c;
            } else {
                s +=c * phase + (self.values[j + m].conj() * self.values[j - m]) * phase.conj();
            }
        }
        s.re * dx / (PI * self.hbar)
    }
}

/// Strang-split propagator `exp(-iVdt/2ħ) exp(-iTdt/ħ) exp(-iVdt/2ħ)` with cached transforms.
pub struct SplitOperator {
    spec: GridSpec,
    dt: f64,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl SplitOperator {
    pub fn new(spec: GridSpec, potential: &Potential, dt: f64, hbar: f64, mass: f64) -> Result<Self> {
        spec.validate()?;
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be finite and nonzero, got {dt}")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(spec.n_points);
        let inverse = planner.plan_fft_inverse(spec.n_points);
        let scratch = vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
        let n = spec.n_points as f64;
        Ok(SplitOperator {
            spec,
            dt,
            half_potential: spec
                .points()
                .map(|x| Complex64::from_polar(1.0, -potential.value_1d(0, x) * dt / (2.0 * hbar)))
                .collect(),
            kinetic: spec
                .wavenumbers()
                .iter()
                .map(|k| Complex64::from_polar(1.0 / n, -hbar * k * k * dt / (2.0 * mass)))
                .collect(),
            forward,
            inverse,
            scratch,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One Strang step in place.
    pub fn step(&mut self, state: &mut GridState) -> Result<()> {
        if state.spec() != self.spec {
            return Err(Error::InvalidParameter("grid state does not match the propagator grid".into()));
        }
        let v = &mut state.values;
        v.iter_mut().zip(&self.half_potential).for_each(|(a, b)| *a *= b);
        self.forward.process_with_scratch(v, &mut self.scratch);
        v.iter_mut().zip(&self.kinetic).for_each(|(a, b)| *a *= b);
        self.inverse.process_with_scratch(v, &mut self.scratch);
        v.iter_mut().zip(&self.half_potential).for_each(|(a, b)| *a *= b);
        state.time += self.dt;
        Ok(())
    }

    pub fn advance(&mut self, state: &mut GridState, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(state)?;
        }
        Ok(())
    }
}

/// One Strang step returning a new state.
pub fn split_operator_step(state: &GridState, potential: &Potential, dt: f64) -> Result<GridState> {
    let mut prop = SplitOperator::new(state.spec(), potential, dt, state.hbar, state.mass)?;
    let mut next = state.clone();
    prop.step(&mut next)?;
    Ok(next)
}

/// Unnormalized samples of the ansatz wavefunction.
pub fn ansatz_values(ansatz: &Ansatz, spec: &GridSpec, hbar: f64) -> Vec<Complex64> {
    spec.points().map(|x| ansatz.value(&[x], hbar)).collect()
}

/// Projects a one-dimensional ansatz onto the grid and normalizes it.
pub fn ansatz_to_grid(ansatz: &Ansatz, spec: GridSpec, hbar: f64, mass: f64) -> Result<GridState> {
    spec.validate()?;
    if ansatz.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: ansatz.dim() });
    }
    let mut g = GridState {
        x_min: spec.x_min,
        x_max: spec.x_max,
        n_points: spec.n_points,
        values: ansatz_values(ansatz, &spec, hbar),
        time: ansatz.time,
        hbar,
        mass,
    };
    g.check_boundary()?;
    g.normalize();
    Ok(g)
}

/// `⟨ψ|h(x̂)|ψ⟩/⟨ψ|ψ⟩` on the grid.
pub fn tunneling_probability_grid(state: &GridState) -> f64 {
    let h = state.spec().heaviside();
    state.values.iter().zip(&h).map(|(v, w)| w * v.norm_sqr()).sum::<f64>() * state.dx() / state.norm_sq()
}

/// `⟨ψ|h(x̂)|ψ⟩/⟨ψ|ψ⟩` from pairwise half-line Gaussian integrals.
pub fn tunneling_probability_ansatz(ansatz: &Ansatz, hbar: f64) -> Result<f64> {
    if ansatz.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: ansatz.dim() });
    }
    let mut total = 0.0;
    for (i, j, c, mult) in ansatz.hermitian_pairs() {
        let g = Gaussian::product(&ansatz.basis[i].mode(0), &ansatz.basis[j].mode(0), hbar);
        total += mult * (c * g.integral_above(0.0)).re;
    }
    Ok((total / ansatz.norm_sq(hbar)).clamp(0.0, 1.0))
}

/// Quality factor `|⟨ref|h|ψ⟩|² / (⟨ref|h|ref⟩⟨ψ|h|ψ⟩)`; `None` when either
/// half-space weight is numerically zero.
pub fn quality_factor(reference: &GridState, trial: &GridState) -> Result<Option<f64>> {
    if reference.spec() != trial.spec() {
        return Err(Error::InvalidParameter("quality factor requires states on the same grid".into()));
    }
    let h = reference.spec().heaviside();
    let mut cross = Complex64::new(0.0, 0.0);
    let (mut wr, mut wt) = (0.0, 0.0);
    for ((r, t), w) in reference.values.iter().zip(&trial.values).zip(&h) {
        cross += r.conj() * t * *w;
        wr += w * r.norm_sqr();
        wt += w * t.norm_sqr();
    }
    if wr <= 1e-30 / reference.dx() || wt <= 1e-30 / reference.dx() {
        return Ok(None);
    }
    Ok(Some((cross.norm_sqr() / (wr * wt)).min(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_grid_has_origin() {
        let g = GridSpec::benchmark();
        assert_eq!(g.x(1024), 0.0);
        assert!((g.dx() - 1.0 / 64.0).abs() < 1e-16);
        assert_eq!(g.heaviside()[1024], 0.5);
        assert!(GridSpec::new(-1.0, 1.0, 1000).is_err());
    }

    #[test]
    fn symmetric_state_is_half_tunneled() {
        let g = GridState::gaussian(GridSpec::benchmark(), 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((tunneling_probability_grid(&g) - 0.5).abs() < 1e-12);
        let far = GridState::gaussian(GridSpec::benchmark(), -6.0, 1.0, 1.0, 1.0).unwrap();
        assert!(tunneling_probability_grid(&far) < 1e-8);
    }

    #[test]
    fn quality_factor_trivial_cases() {
        let spec = GridSpec::new(-8.0, 8.0, 256).unwrap();
        let a = GridState::gaussian(spec, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((quality_factor(&a, &a).unwrap().unwrap() - 1.0).abs() < 1e-14);
        let mut b = a.clone();
        b.values.iter_mut().for_each(|v| *v *= Complex64::from_polar(1.0, 0.7));
        assert!((quality_factor(&a, &b).unwrap().unwrap() - 1.0).abs() < 1e-14);
        let far = GridState::gaussian(spec, -5.0, 0.3, 1.0, 1.0).unwrap();
        assert!(quality_factor(&a, &far).unwrap().is_none());
    }

    #[test]
    fn step_is_unitary() {
        let mut g = GridState::gaussian(GridSpec::benchmark(), -4.0, 1.0, 1.0, 1.0).unwrap();
        let mut prop = SplitOperator::new(g.spec(), &Potential::barrier(), 1e-3, 1.0, 1.0).unwrap();
        for _ in 0..10 {
            let before = g.norm_sq();
            prop.step(&mut g).unwrap();
            assert!((g.norm_sq() - before).abs() < 1e-12);
        }
    }
}
