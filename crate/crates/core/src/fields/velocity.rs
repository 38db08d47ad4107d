use super::{
    bohmian_limit_fields, custom_gauge_flux, husimi, husimi_flow_default, reg_bohm_gauge_flux, Ansatz, Flux,
    FluxBackend, GaugeSpec, HusimiWidths, Physics,
};
use crate::potential::Potential;
use crate::{Error, Result};
use serde::Serialize;

/// Evaluation settings shared by field sampling and propagation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    pub backend: FluxBackend,
    /// Absolute density below which velocities are undefined.
    pub density_floor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { backend: FluxBackend::Exact, density_floor: 0.0 }
    }
}

/// Density, flux and velocity at one phase-space point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowSample {
    pub p: Vec<f64>,
    pub x: Vec<f64>,
    pub density: f64,
    pub flux_p: Vec<f64>,
    pub flux_x: Vec<f64>,
    pub velocity_p: Vec<f64>,
    pub velocity_x: Vec<f64>,
    /// Set when the density is below the floor; velocities are then NaN.
    pub below_floor: bool,
}

/// Density and total flux in the requested gauge.
pub fn density_and_flux(
    gauge: &GaugeSpec,
    ansatz: &Ansatz,
    potential: &Potential,
    widths: &HusimiWidths,
    physics: &Physics,
    p: &[f64],
    x: &[f64],
    backend: FluxBackend,
) -> Result<(f64, Flux)> {
    if !gauge.supports_dims(ansatz.dim()) {
        return Err(Error::Config(format!("gauge {gauge} does not support {} dimensions", ansatz.dim())));
    }
    if let GaugeSpec::BohmianLimit = gauge {
        let f = bohmian_limit_fields(ansatz, potential, physics, x[0], 0.0)?;
        let flux = Flux { p: vec![f.density * f.force], x: vec![f.density * f.momentum / physics.masses[0]] };
        return Ok((f.density, flux));
    }
    let density = husimi(ansatz, widths, p, x, physics.hbar)?;
    let default = husimi_flow_default(ansatz, potential, widths, physics, p, x, backend)?;
    let flux = match gauge {
        GaugeSpec::Default => default,
        GaugeSpec::RegularizedBohmian => default.add(&reg_bohm_gauge_flux(ansatz, widths, physics, p, x)?),
        GaugeSpec::CustomPotential(g) => default.add(&custom_gauge_flux(g, p, x)?),
        GaugeSpec::BohmianLimit => unreachable!(),
    };
    Ok((density, flux))
}

/// Full sample; points below the density floor are flagged rather than failing.
pub fn sample_flow(
    gauge: &GaugeSpec,
    ansatz: &Ansatz,
    potential: &Potential,
    widths: &HusimiWidths,
    physics: &Physics,
    p: &[f64],
    x: &[f64],
    options: FlowOptions,
) -> Result<FlowSample> {
    let result = density_and_flux(gauge, ansatz, potential, widths, physics, p, x, options.backend);
    let (density, flux) = match result {
        Ok(v) => v,
        Err(Error::NodeProximity { .. }) | Err(Error::DensityFloor { .. }) => {
            let nan = vec![f64::NAN; p.len()];
            return Ok(FlowSample {
                p: p.to_vec(),
                x: x.to_vec(),
                density: 0.0,
                flux_p: nan.clone(),
                flux_x: nan.clone(),
                velocity_p: nan.clone(),
                velocity_x: nan,
                below_floor: true,
            });
        }
        Err(e) => return Err(e),
    };
    let below = !(density > options.density_floor && density > 0.0);
    let div = |v: &Vec<f64>| v.iter().map(|j| if below { f64::NAN } else { j / density }).collect::<Vec<_>>();
    Ok(FlowSample {
        p: p.to_vec(),
        x: x.to_vec(),
        density,
        velocity_p: div(&flux.p),
        velocity_x: div(&flux.x),
        flux_p: flux.p,
        flux_x: flux.x,
        below_floor: below,
    })
}

/// Velocity `(v_p, v_x) = J/density`; errors below the density floor.
pub fn velocity(
    gauge: &GaugeSpec,
    ansatz: &Ansatz,
    potential: &Potential,
    widths: &HusimiWidths,
    physics: &Physics,
    p: &[f64],
    x: &[f64],
    options: FlowOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (density, flux) = density_and_flux(gauge, ansatz, potential, widths, physics, p, x, options.backend)?;
    if !(density > options.density_floor && density > 0.0) {
        return Err(Error::DensityFloor { density, floor: options.density_floor, p: p.to_vec(), x: x.to_vec() });
    }
    Ok((flux.p.iter().map(|j| j / density).collect(), flux.x.iter().map(|j| j / density).collect()))
}
