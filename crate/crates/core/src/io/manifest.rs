use super::scenario::Scenario;
use crate::fields::{GaugeSpec, HusimiWidths};
use crate::grid::GridSpec;
use crate::propagator::PropagationConfig;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Environment variable that overrides the manifest's output directory.
pub const OUTPUT_DIR_ENV: &str = "PHASEFLOW_OUT_DIR";

/// Smoothing scale for the tunneling benchmark: slightly above the minimum so the density has no zeros.
pub const BENCHMARK_ALPHA: f64 = 1.1;

/// Benchmark methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "RBG-exact")]
    RbgExact,
    #[serde(rename = "RBG-approx-flux")]
    RbgApproxFlux,
    #[serde(rename = "Default-gauge")]
    DefaultGauge,
    #[serde(rename = "CCS")]
    Ccs,
    #[serde(rename = "SplitOperator")]
    SplitOperator,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::RbgExact, Method::RbgApproxFlux, Method::DefaultGauge, Method::Ccs, Method::SplitOperator];

    pub fn name(self) -> &'static str {
        match self {
            Method::RbgExact => "RBG-exact",
            Method::RbgApproxFlux => "RBG-approx-flux",
            Method::DefaultGauge => "Default-gauge",
            Method::Ccs => "CCS",
            Method::SplitOperator => "SplitOperator",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub fields: bool,
    pub trajectories: bool,
    pub observables: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { fields: true, trajectories: true, observables: true }
    }
}

/// Rectangular `(p, x)` sampling box, `points` samples per axis including both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub p_min: f64,
    pub p_max: f64,
    pub p_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
}

impl SamplingBox {
    pub fn square(half_width: f64, points: usize) -> Self {
        SamplingBox { p_min: -half_width, p_max: half_width, p_points: points, x_min: -half_width, x_max: half_width, x_points: points }
    }

    fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![0.5 * (min + max)];
        }
        (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn p_axis(&self) -> Vec<f64> {
        Self::axis(self.p_min, self.p_max, self.p_points)
    }

    pub fn x_axis(&self) -> Vec<f64> {
        Self::axis(self.x_min, self.x_max, self.x_points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_points == 0 || self.x_points == 0 || !(self.p_max >= self.p_min) || !(self.x_max >= self.x_min) {
            return Err(Error::Config("sampling box needs min <= max and at least one point per axis".into()));
        }
        Ok(())
    }
}

/// Per-method time step and regularization, for methods whose stability differs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOverride {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub scenario: String,
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub outputs: Outputs,
    pub sampling: SamplingBox,
    pub output_dir: PathBuf,
    pub grid: GridSpec,
    /// Time step of the split-operator reference.
    pub grid_dt: f64,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub overrides: Vec<MethodOverride>,
    /// Seed for randomized checks, recorded in every output header.
    #[serde(default)]
    pub seed: u64,
}

impl RunManifest {
    /// Defaults for a built-in scenario in the given gauge.
    pub fn for_scenario(name: &str, gauge: GaugeSpec) -> Result<Self> {
        let scenario = Scenario::builtin(name)?;
        // The phase-portrait scenarios use the standard Husimi widths.
        let alpha = if name == "barrier" { BENCHMARK_ALPHA } else { 1.0 };
        let widths = HusimiWidths::scaled(&scenario.basis_widths()?, scenario.physics.hbar, alpha)?;
        let mut propagation = PropagationConfig::new(gauge, widths);
        let (t_final, sampling) = match name {
            "barrier" => (10.0, SamplingBox { p_min: -6.0, p_max: 6.0, p_points: 41, x_min: -7.0, x_max: 7.0, x_points: 41 }),
            "double-well" => (10.0, SamplingBox { p_min: -4.0, p_max: 4.0, p_points: 33, x_min: -3.0, x_max: 8.0, x_points: 45 }),
            _ => (2.0 * std::f64::consts::PI, SamplingBox::square(3.0, 25)),
        };
        propagation.t_final = t_final;
        propagation.output_stride = 50;
        if name == "barrier" {
            propagation.dt = BENCHMARK_DT;
            propagation.epsilon = BENCHMARK_EPSILON;
            propagation.output_stride = (0.05 / BENCHMARK_DT).round() as usize;
        }
        Ok(RunManifest {
            scenario: name.into(),
            propagation,
            outputs: Outputs::default(),
            sampling,
            output_dir: PathBuf::from("out"),
            grid: GridSpec::benchmark(),
            grid_dt: 1e-3,
            methods: if name == "barrier" { Method::ALL.to_vec() } else { Vec::new() },
            overrides: if name == "barrier" {
                vec![
                    MethodOverride { method: Method::RbgApproxFlux, dt: Some(APPROX_FLUX_DT), epsilon: None },
                    MethodOverride { method: Method::Ccs, dt: None, epsilon: Some(CCS_EPSILON) },
                ]
            } else {
                Vec::new()
            },
            seed: 0,
        })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::builtin(&self.scenario)
    }

    pub fn validate(&self) -> Result<()> {
        let scenario = self.scenario()?;
        let dims = scenario.dims();
        if !self.propagation.gauge.supports_dims(dims) {
            return Err(Error::Config(format!(
                "gauge {} is not available for the {dims}-dimensional scenario {}",
                self.propagation.gauge, self.scenario
            )));
        }
        self.propagation.validate(scenario.physics.hbar)?;
        self.propagation.widths.check_dim(dims)?;
        self.sampling.validate()?;
        self.grid.validate()?;
        if !(self.grid_dt > 0.0) {
            return Err(Error::Config("grid_dt must be positive".into()));
        }
        for o in &self.overrides {
            if o.dt.is_some_and(|d| !(d > 0.0)) || o.epsilon.is_some_and(|e| !(e > 0.0)) {
                return Err(Error::Config(format!("override for {} must be positive", o.method)));
            }
        }
        Ok(())
    }

    /// Propagation settings for one benchmark method.
    pub fn method_config(&self, method: Method) -> PropagationConfig {
        let mut cfg = self.propagation.clone();
        match method {
            Method::RbgExact => {
                cfg.gauge = GaugeSpec::RegularizedBohmian;
                cfg.backend = crate::fields::FluxBackend::Exact;
            }
            Method::RbgApproxFlux => {
                cfg.gauge = GaugeSpec::RegularizedBohmian;
                cfg.backend = crate::fields::FluxBackend::Approximate;
            }
            Method::DefaultGauge => cfg.gauge = GaugeSpec::Default,
            Method::Ccs => cfg.centers = crate::propagator::CenterDynamics::Ccs,
            Method::SplitOperator => {}
        }
        if let Some(o) = self.overrides.iter().find(|o| o.method == method) {
            if let Some(dt) = o.dt {
                // Keep the snapshot times shared across methods.
                let interval = self.propagation.dt * self.propagation.output_stride as f64;
                cfg.dt = dt;
                cfg.output_stride = ((interval / dt).round() as usize).max(1);
            }
            if let Some(e) = o.epsilon {
                cfg.epsilon = e;
            }
        }
        cfg
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: RunManifest = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    /// Output directory: explicit argument, then the environment override, then the manifest.
    pub fn resolve_output_dir(&self, explicit: Option<&Path>) -> PathBuf {
        if let Some(p) = explicit {
            return p.to_path_buf();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_dir.clone(),
        }
    }
}

/// Benchmark propagation step, from a convergence study of the tunneling probability.
pub const BENCHMARK_DT: f64 = 2.5e-3;
/// Least-squares regularization for the benchmark basis.
pub const BENCHMARK_EPSILON: f64 = 1e-6;
/// CCS amplitudes are unstable at the benchmark regularization; this is the smallest converged value.
pub const CCS_EPSILON: f64 = 1e-4;
/// The local-harmonic flux loses stability after the second barrier crossing at the benchmark step.
pub const APPROX_FLUX_DT: f64 = 1.25e-3;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip_is_canonical() {
        for name in Scenario::BUILTIN {
            let m = RunManifest::for_scenario(name, GaugeSpec::RegularizedBohmian).unwrap();
            let text = m.to_toml().unwrap();
            let back = RunManifest::from_toml(&text).unwrap();
            assert_eq!(back.to_toml().unwrap(), text);
        }
    }

    #[test]
    fn gauge_dimensionality_is_checked() {
        let mut m = RunManifest::for_scenario("harmonic", GaugeSpec::BohmianLimit).unwrap();
        m.validate().unwrap();
        m.propagation.dt = -1.0;
        assert!(m.validate().is_err());
        let text = RunManifest::for_scenario("harmonic", GaugeSpec::Default).unwrap().to_toml().unwrap();
        let text = format!("bogus = 1\n{text}");
        assert!(RunManifest::from_toml(&text).is_err());
    }

    #[test]
    fn overrides_keep_snapshot_times() {
        let m = RunManifest::for_scenario("barrier", GaugeSpec::RegularizedBohmian).unwrap();
        let base = m.method_config(Method::RbgExact);
        let mut m = m.clone();
        m.overrides = vec![MethodOverride { method: Method::Ccs, dt: Some(1e-3), epsilon: None }];
        let ccs = m.method_config(Method::Ccs);
        let a = base.dt * base.output_stride as f64;
        let b = ccs.dt * ccs.output_stride as f64;
        assert!((a - b).abs() < 1e-12);
        assert_eq!(ccs.centers, crate::propagator::CenterDynamics::Ccs);
        assert_eq!("rbg-exact".parse::<Method>().unwrap(), Method::RbgExact);
    }
}
