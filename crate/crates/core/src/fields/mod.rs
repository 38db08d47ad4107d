//! Densities, flows, gauges and velocity fields of ansatz states.

mod bohm;
mod density;
mod flow;
mod gauge;
mod velocity;

pub use bohm::{bohmian_limit_fields, wavefunction_derivatives, BohmianFields};
pub use density::{husimi, wigner};
pub use flow::{husimi_flow_default, wigner_flow, FluxBackend, DEFAULT_SINC_ORDER};
pub(crate) use flow::product_except;
pub use gauge::{
    custom_gauge_flux, gauge_potential, reg_bohm_gauge_flux, reg_bohm_momentum, reg_bohm_momentum_with_slope,
    GaugePotential, SwirlGauge,
};
pub use velocity::{density_and_flux, sample_flow, velocity, FlowOptions, FlowSample};

use crate::gauss::pair::check_shared_widths;
use crate::gauss::{overlap, BasisState};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Reduced Planck constant and per-dimension masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub hbar: f64,
    pub masses: Vec<f64>,
}

impl Physics {
    /// `ħ = m = 1` in `dims` dimensions.
    pub fn unit(dims: usize) -> Self {
        Physics { hbar: 1.0, masses: vec![1.0; dims] }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) || self.masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter("hbar and masses must be positive and finite".into()));
        }
        Ok(())
    }
}

impl Default for Physics {
    fn default() -> Self {
        Physics::unit(1)
    }
}

/// `Σ_k a_k |p̄_k, x̄_k, ς⟩` at time `time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    pub amplitudes: Vec<Complex64>,
    pub basis: Vec<BasisState>,
    pub time: f64,
}

impl Ansatz {
    pub fn new(amplitudes: Vec<Complex64>, basis: Vec<BasisState>, time: f64) -> Result<Self> {
        let a = Ansatz { amplitudes, basis, time };
        a.validate()?;
        Ok(a)
    }

    /// A single normalized coherent state.
    pub fn coherent(state: BasisState) -> Result<Self> {
        Ansatz::new(vec![Complex64::new(1.0, 0.0)], vec![state], 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.basis.is_empty() {
            return Err(Error::InvalidParameter("ansatz basis is empty".into()));
        }
        if self.amplitudes.len() != self.basis.len() {
            return Err(Error::DimensionMismatch { expected: self.basis.len(), found: self.amplitudes.len() });
        }
        for b in &self.basis {
            b.validate()?;
            check_shared_widths(&self.basis[0], b)?;
        }
        let n = self.norm_sq(1.0);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter(format!("ansatz norm must be finite and positive, got {n}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.basis[0].dim()
    }

    pub fn widths(&self) -> &[f64] {
        &self.basis[0].widths
    }

    /// `⟨ψ|ψ⟩`.
    pub fn norm_sq(&self, hbar: f64) -> f64 {
        let mut total = 0.0;
        for (i, (ai, bi)) in self.amplitudes.iter().zip(&self.basis).enumerate() {
            for (aj, bj) in self.amplitudes.iter().zip(&self.basis).skip(i) {
                let s = ai.conj() * aj * overlap(bi, bj, hbar).unwrap_or_default();
                total += if std::ptr::eq(bi, bj) { s.re } else { 2.0 * s.re };
            }
        }
        total
    }

    /// The same state scaled to unit norm.
    pub fn normalized(&self, hbar: f64) -> Self {
        let s = self.norm_sq(hbar).sqrt();
        Ansatz { amplitudes: self.amplitudes.iter().map(|a| a / s).collect(), ..self.clone() }
    }

    /// Wavefunction value.
    pub fn value(&self, x: &[f64], hbar: f64) -> Complex64 {
        self.amplitudes.iter().zip(&self.basis).map(|(a, b)| a * b.value(x, hbar)).sum()
    }

    /// `a*_{k1} a_{k2}` for `k1 <= k2`, with the multiplicity of the Hermitian pair.
    pub(crate) fn hermitian_pairs(&self) -> impl Iterator<Item = (usize, usize, Complex64, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| {
            (i..n).map(move |j| {
                let c = self.amplitudes[i].conj() * self.amplitudes[j];
                (i, j, c, if i == j { 1.0 } else { 2.0 })
            })
        })
    }
}

/// Smoothing widths `(ϖp, ϖx)` per dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HusimiWidths {
    pub p: Vec<f64>,
    pub x: Vec<f64>,
    pub alpha: f64,
}

impl HusimiWidths {
    /// `ϖp = αħ/(√2 ς)`, `ϖx = ας/√2` for each basis width `ς`.
    pub fn scaled(basis_widths: &[f64], hbar: f64, alpha: f64) -> Result<Self> {
        let r2 = std::f64::consts::SQRT_2;
        let w = HusimiWidths {
            p: basis_widths.iter().map(|s| alpha * hbar / (r2 * s)).collect(),
            x: basis_widths.iter().map(|s| alpha * s / r2).collect(),
            alpha,
        };
        w.validate(hbar)?;
        Ok(w)
    }

    /// The standard Husimi widths, `α = 1`.
    pub fn standard(basis_widths: &[f64], hbar: f64) -> Result<Self> {
        Self::scaled(basis_widths, hbar, 1.0)
    }

    pub fn validate(&self, hbar: f64) -> Result<()> {
        if self.p.len() != self.x.len() {
            return Err(Error::DimensionMismatch { expected: self.p.len(), found: self.x.len() });
        }
        if !(self.alpha >= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {}", self.alpha)));
        }
        for (wp, wx) in self.p.iter().zip(&self.x) {
            if !(*wp > 0.0 && *wx > 0.0 && wp.is_finite() && wx.is_finite()) {
                return Err(Error::InvalidParameter("smoothing widths must be positive and finite".into()));
            }
            if wp * wx < 0.5 * hbar * (1.0 - 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "smoothing widths violate wp*wx >= hbar/2: {wp} * {wx}"
                )));
            }
        }
        Ok(())
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.p.len() });
        }
        Ok(())
    }
}

/// User-supplied gauge: one potential `A_n(pₙ, xₙ)` per dimension.
#[derive(Clone)]
pub struct CustomGauge {
    pub name: String,
    pub potentials: Vec<Arc<dyn GaugePotential>>,
}

impl fmt::Debug for CustomGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomGauge").field("name", &self.name).finish()
    }
}

impl PartialEq for CustomGauge {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

/// Flow gauge selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GaugeSpec {
    Default,
    RegularizedBohmian,
    BohmianLimit,
    CustomPotential(CustomGauge),
}

impl GaugeSpec {
    /// The built-in four-Gaussian swirl gauge in one dimension.
    pub fn swirl() -> Self {
        GaugeSpec::CustomPotential(CustomGauge { name: "swirl".into(), potentials: vec![Arc::new(SwirlGauge)] })
    }

    pub fn supports_dims(&self, dims: usize) -> bool {
        match self {
            GaugeSpec::BohmianLimit => dims == 1,
            GaugeSpec::CustomPotential(g) => g.potentials.len() == dims,
            _ => true,
        }
    }
}

impl fmt::Display for GaugeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeSpec::Default => write!(f, "default"),
            GaugeSpec::RegularizedBohmian => write!(f, "regularized-bohmian"),
            GaugeSpec::BohmianLimit => write!(f, "bohmian-limit"),
            GaugeSpec::CustomPotential(g) => write!(f, "custom:{}", g.name),
        }
    }
}

impl FromStr for GaugeSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(GaugeSpec::Default),
            "regularized-bohmian" | "rbg" => Ok(GaugeSpec::RegularizedBohmian),
            "bohmian-limit" => Ok(GaugeSpec::BohmianLimit),
            "custom:swirl" | "swirl" => Ok(GaugeSpec::swirl()),
            other => Err(Error::Config(format!(
                "unknown gauge '{other}' (expected default, regularized-bohmian, bohmian-limit, custom:swirl)"
            ))),
        }
    }
}

impl TryFrom<String> for GaugeSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GaugeSpec> for String {
    fn from(g: GaugeSpec) -> String {
        g.to_string()
    }
}

/// Momentum and position flux components per dimension.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Flux {
    pub p: Vec<f64>,
    pub x: Vec<f64>,
}

impl Flux {
    pub fn zeros(dim: usize) -> Self {
        Flux { p: vec![0.0; dim], x: vec![0.0; dim] }
    }

    pub fn add(&self, other: &Flux) -> Flux {
        Flux {
            p: self.p.iter().zip(&other.p).map(|(a, b)| a + b).collect(),
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
        }
    }
}

pub(crate) fn check_point(ansatz: &Ansatz, p: &[f64], x: &[f64]) -> Result<()> {
    crate::gauss::pair::check_point(ansatz.dim(), p, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_names_round_trip() {
        for g in [GaugeSpec::Default, GaugeSpec::RegularizedBohmian, GaugeSpec::BohmianLimit, GaugeSpec::swirl()] {
            assert_eq!(g.to_string().parse::<GaugeSpec>().unwrap(), g);
        }
        assert!("sideways".parse::<GaugeSpec>().is_err());
        assert!(!GaugeSpec::BohmianLimit.supports_dims(2));
    }

    #[test]
    fn widths_respect_uncertainty_bound() {
        let w = HusimiWidths::scaled(&[0.5], 1.0, 1.1).unwrap();
        assert!(w.p[0] * w.x[0] > 0.5);
        let std = HusimiWidths::standard(&[0.5], 1.0).unwrap();
        assert!((std.p[0] * std.x[0] - 0.5).abs() < 1e-15);
        let bad = HusimiWidths { p: vec![0.1], x: vec![0.1], alpha: 1.0 };
        assert!(bad.validate(1.0).is_err());
    }

    #[test]
    fn ansatz_invariants() {
        let b = BasisState::scalar(0.0, 0.0, 0.5).unwrap();
        assert!(Ansatz::new(vec![], vec![], 0.0).is_err());
        assert!(Ansatz::new(vec![Complex64::new(1.0, 0.0); 2], vec![b.clone()], 0.0).is_err());
        let other = BasisState::scalar(0.0, 1.0, 0.6).unwrap();
        assert!(Ansatz::new(vec![Complex64::new(1.0, 0.0); 2], vec![b.clone(), other], 0.0).is_err());
        let a = Ansatz::new(vec![Complex64::new(2.0, 0.0)], vec![b], 0.0).unwrap();
        assert!((a.norm_sq(1.0) - 4.0).abs() < 1e-14);
        assert!((a.normalized(1.0).norm_sq(1.0) - 1.0).abs() < 1e-14);
    }
}
