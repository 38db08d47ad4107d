//! Fast invariant checks run by the `validate` subcommand.

use super::manifest::RunManifest;
use super::scenario::{golden_values, load_table_i, Scenario, BENCHMARK_CENTER, GOLDEN_POINTS};
use crate::fields::{velocity, Ansatz, FlowOptions, GaugeSpec, HusimiWidths, Physics};
use crate::gauss::BasisState;
use crate::grid::{ansatz_to_grid, tunneling_probability_ansatz, tunneling_probability_grid, GridSpec, GridState, SplitOperator};
use crate::potential::Potential;
use crate::Result;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<(bool, String)>) -> Check {
    match result {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn golden() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for name in Scenario::BUILTIN {
        let s = Scenario::builtin(name)?;
        let gold = golden_values(name).unwrap_or_default();
        for (x, g) in GOLDEN_POINTS.iter().zip(gold) {
            worst = worst.max((s.potential.value(&[*x]) - g).abs());
        }
    }
    Ok((worst < 1e-12, format!("max deviation {worst:e}")))
}

fn manifest_round_trip() -> Result<(bool, String)> {
    for name in Scenario::BUILTIN {
        let text = RunManifest::for_scenario(name, GaugeSpec::RegularizedBohmian)?.to_toml()?;
        if RunManifest::from_toml(&text)?.to_toml()? != text {
            return Ok((false, format!("{name} manifest is not canonical")));
        }
    }
    Ok((true, "all built-in manifests canonical".into()))
}

fn ground_state_velocities(gauge: GaugeSpec, expected: impl Fn(f64, f64) -> (f64, f64)) -> Result<(bool, String)> {
    let ansatz = Ansatz::coherent(BasisState::scalar(0.0, 0.0, 1.0)?)?;
    let widths = HusimiWidths::standard(&[1.0], 1.0)?;
    let v = Potential::harmonic();
    let phys = Physics::unit(1);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let (p, x) = (-2.25 + 0.5 * i as f64, -2.25 + 0.5 * j as f64);
            let (vp, vx) = velocity(&gauge, &ansatz, &v, &widths, &phys, &[p], &[x], FlowOptions::default())?;
            let (ep, ex) = expected(p, x);
            worst = worst.max((vp[0] - ep).abs()).max((vx[0] - ex).abs());
        }
    }
    Ok((worst < 1e-8, format!("max error {worst:e} over 10x10 points")))
}

fn split_operator_norm() -> Result<(bool, String)> {
    let spec = GridSpec::new(-12.0, 12.0, 512)?;
    let mut s = GridState::gaussian(spec, 1.5, 1.0, 1.0, 1.0)?;
    let mut solver = SplitOperator::new(spec, &Potential::harmonic(), 1e-2, 1.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        solver.step(&mut s)?;
        worst = worst.max((s.norm_sq() - 1.0).abs());
    }
    Ok((worst < 1e-12, format!("max norm drift {worst:e} over 100 steps")))
}

fn table_fidelity() -> Result<(bool, String)> {
    let spec = GridSpec::benchmark();
    let g = ansatz_to_grid(&load_table_i(), spec, 1.0, 1.0)?;
    let f = g.fidelity(&GridState::gaussian(spec, BENCHMARK_CENTER, 1.0, 1.0, 1.0)?);
    Ok((f > 0.999, format!("fidelity {f}")))
}

fn tunneling_cross_check() -> Result<(bool, String)> {
    let a = load_table_i().normalized(1.0);
    let g = ansatz_to_grid(&a, GridSpec::benchmark(), 1.0, 1.0)?;
    let d = (tunneling_probability_ansatz(&a, 1.0)? - tunneling_probability_grid(&g)).abs();
    Ok((d < 1e-6, format!("ansatz vs grid difference {d:e}")))
}

/// Runs every check; none of them takes more than a fraction of a second.
pub fn validate_suite() -> Vec<Check> {
    vec![
        check("builtin-potentials-golden", golden()),
        check("manifest-round-trip", manifest_round_trip()),
        check("harmonic-default-half-rate", ground_state_velocities(GaugeSpec::Default, |p, x| (-x / 2.0, p / 2.0))),
        check("harmonic-rbg-stationary", ground_state_velocities(GaugeSpec::RegularizedBohmian, |_, _| (0.0, 0.0))),
        check("split-operator-unitarity", split_operator_norm()),
        check("table-ansatz-fidelity", table_fidelity()),
        check("tunneling-ansatz-vs-grid", tunneling_cross_check()),
    ]
}
