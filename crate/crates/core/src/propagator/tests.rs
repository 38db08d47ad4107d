use super::*;
use phaseflow_oracle::{integrate_real, trapezoid};
use std::f64::consts::PI;

fn one_state(p: f64, x: f64, width: f64) -> EvolvingState {
    EvolvingState::from_ansatz(Ansatz::coherent(BasisState::scalar(p, x, width).unwrap()).unwrap()).unwrap()
}

fn rbg(width: f64) -> PropagationConfig {
    PropagationConfig::new(GaugeSpec::RegularizedBohmian, HusimiWidths::scaled(&[width], 1.0, 1.1).unwrap())
}

#[test]
fn ground_state_is_stationary_with_eigenphase() {
    let v = Potential::harmonic();
    let phys = Physics::unit(1);
    let cfg = rbg(1.0);
    let prop = Propagator::new(&v, &phys, &cfg).unwrap();
    let mut s = one_state(0.0, 0.0, 1.0);
    let dt = 0.01;
    let steps = (2.0 * PI / dt).round() as usize;
    for _ in 0..steps {
        let next = prop.step(&s, dt).unwrap();
        let b = &next.ansatz.basis[0];
        assert!(b.centers_p[0].abs() < 1e-8 && b.centers_x[0].abs() < 1e-8);
        s = next;
    }
    let t = s.time();
    assert!((s.magnitudes[0] - 1.0).abs() < 1e-6);
    let total = s.slow_phases[0] + s.fast_phases[0];
    let expected = -0.5 * t;
    assert!(((total - expected + PI).rem_euclid(2.0 * PI) - PI).abs() < 1e-6, "{total} vs {expected}");
}

/// Zero-amplitude probe at `(0, x0)` beside the ground state; it is carried by the flow without disturbing it.
fn probe_state(x0: f64) -> EvolvingState {
    let basis = vec![BasisState::scalar(0.0, 0.0, 1.0).unwrap(), BasisState::scalar(0.0, x0, 1.0).unwrap()];
    let a = Ansatz::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], basis, 0.0).unwrap();
    EvolvingState::from_ansatz(a).unwrap()
}

/// Probe center `(p, x)` at the end and the time actually reached.
fn run_probe(dt: f64, t_final: f64) -> (f64, f64, f64) {
    let v = Potential::harmonic();
    let phys = Physics::unit(1);
    let cfg = PropagationConfig::new(GaugeSpec::Default, HusimiWidths::standard(&[1.0], 1.0).unwrap());
    let prop = Propagator::new(&v, &phys, &cfg).unwrap();
    let mut s = probe_state(1.0);
    for _ in 0..(t_final / dt).round() as usize {
        s = prop.step(&s, dt).unwrap();
    }
    (s.ansatz.basis[1].centers_p[0], s.ansatz.basis[1].centers_x[0], s.time())
}

#[test]
fn default_gauge_rotates_at_half_rate() {
    // v = (-x/2, p/2) starting from (0, 1): x = cos(t/2), p = -sin(t/2).
    let (p, x, t) = run_probe(0.05, 2.0 * PI);
    assert!((x - (t / 2.0).cos()).abs() < 1e-6 && (p + (t / 2.0).sin()).abs() < 1e-6, "{p} {x}");
}

#[test]
fn rk4_global_order() {
    let err = |dt: f64| {
        let (p, x, t) = run_probe(dt, 2.0 * PI);
        ((x - (t / 2.0).cos()).powi(2) + (p + (t / 2.0).sin()).powi(2)).sqrt()
    };
    let ratio = err(0.4) / err(0.2);
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn ccs_fast_phase_matches_classical_action() {
    let v = Potential::harmonic();
    let phys = Physics::unit(1);
    let cfg = PropagationConfig::ccs(HusimiWidths::scaled(&[1.0], 1.0, 1.1).unwrap());
    let prop = Propagator::new(&v, &phys, &cfg).unwrap();
    let (p0, x0) = (0.3, 1.2);
    let mut s = one_state(p0, x0, 1.0);
    let dt = 0.01;
    let steps = (2.0 * PI / dt).round() as usize;
    for _ in 0..steps {
        s = prop.step(&s, dt).unwrap();
    }
    let t = s.time();
    // Classical path and ⟨H⟩ = (p² + x²)/2 + 1/2 for the unit-width state.
    let path = |t: f64| (p0 * t.cos() - x0 * t.sin(), x0 * t.cos() + p0 * t.sin());
    let action = integrate_real(
        |t| {
            let (p, x) = path(t);
            p * p - 0.5 * (p * p + x * x) - 0.5
        },
        0.0,
        t,
        1e-13,
        1e-13,
    );
    assert!((s.fast_phases[0] - action).abs() < 1e-6, "{} vs {action}", s.fast_phases[0]);
    let (p, x) = path(t);
    let b = &s.ansatz.basis[0];
    assert!((b.centers_p[0] - p).abs() < 1e-8 && (b.centers_x[0] - x).abs() < 1e-8);
    assert!((s.magnitudes[0] - 1.0).abs() < 1e-8);
    assert!(s.slow_phases[0].abs() < 1e-8);
}

#[test]
fn ccs_barrier_force_matches_quadrature() {
    let v = Potential::barrier();
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let b = BasisState::scalar(0.0, 4.0, w).unwrap();
    let (pdot, xdot) = ccs_velocity(&b, &v, &Physics::unit(1));
    let m = b.mode(0);
    let q = -integrate_real(|y| m.value(y, 1.0).norm_sqr() * v.derivative_1d(0, y, 1), -6.0, 14.0, 1e-15, 1e-14);
    assert!((pdot[0] - q).abs() < 1e-10, "{} vs {q}", pdot[0]);
    assert_eq!(xdot[0], 0.0);
}

fn two_state_barrier() -> EvolvingState {
    let basis = vec![BasisState::scalar(0.5, -1.5, 0.5).unwrap(), BasisState::scalar(-0.3, -1.0, 0.5).unwrap()];
    let a = Ansatz::new(vec![Complex64::new(0.8, 0.1), Complex64::new(-0.2, 0.5)], basis, 0.0).unwrap();
    EvolvingState::from_ansatz(a).unwrap()
}

#[test]
fn regularization_damps_rates() {
    let v = Potential::barrier();
    let phys = Physics::unit(1);
    let state = two_state_barrier();
    let mut last = f64::INFINITY;
    for eps in [1e-6, 1e-3, 1e-1, 1e1, 1e3] {
        let mut cfg = rbg(0.5);
        cfg.epsilon = eps;
        let prop = Propagator::new(&v, &phys, &cfg).unwrap();
        let rates = prop.amplitude_rates(&state).unwrap();
        let size: f64 = rates.iter().map(|r| r[0] * r[0] + r[1] * r[1]).sum::<f64>().sqrt();
        assert!(size < last, "eps {eps}: {size} !< {last}");
        last = size;
    }
}

#[test]
fn least_squares_matrix_is_spd() {
    let state = two_state_barrier();
    let mats = BasisMatrices::new(&state.ansatz.basis, &Potential::barrier(), &Physics::unit(1));
    let tangents: Vec<_> = (0..2)
        .map(|k| {
            let ph = Complex64::from_polar(1.0, state.slow_phases[k]);
            [ph, Complex64::new(0.0, state.magnitudes[k]) * ph]
        })
        .collect();
    let residual = vec![Complex64::new(0.0, 0.0); 2];
    let d = [1.0, 2.0, 0.5, 3.0];
    let eps = 1e-6;
    let (a, _) = least_squares_system(&mats, &tangents, &residual, eps, &d);
    assert!((&a - a.transpose()).amax() < 1e-14);
    let min = a.symmetric_eigen().eigenvalues.min();
    assert!(min >= eps * 0.5 * (1.0 - 1e-9), "{min}");
}

#[test]
fn time_reversal() {
    let v = Potential::barrier();
    let phys = Physics::unit(1);
    let cfg = PropagationConfig::ccs(HusimiWidths::scaled(&[0.5], 1.0, 1.1).unwrap());
    let prop = Propagator::new(&v, &phys, &cfg).unwrap();
    let s0 = two_state_barrier();
    for dt in [0.02, 0.01] {
        let back = prop.step(&prop.step(&s0, dt).unwrap(), -dt).unwrap();
        for (a, b) in s0.ansatz.basis.iter().zip(&back.ansatz.basis) {
            let e = (a.centers_p[0] - b.centers_p[0]).abs() + (a.centers_x[0] - b.centers_x[0]).abs();
            assert!(e < 50.0 * dt.powi(5), "dt {dt}: {e}");
        }
    }
}

#[test]
fn zero_steps_echo_initial_state() {
    let v = Potential::harmonic();
    let phys = Physics::unit(1);
    let s = one_state(0.2, 0.1, 1.0);
    let run = propagate(&s, &v, &phys, &rbg(1.0)).unwrap();
    assert_eq!(run.snapshots.len(), 1);
    assert_eq!(run.last().state, s);
    assert!(run.failure.is_none());
}

#[test]
fn energy_conserved_over_ten_periods() {
    let v = Potential::harmonic();
    let phys = Physics::unit(1);
    let s = one_state(0.4, -0.9, 1.0);
    for mut cfg in [PropagationConfig::ccs(HusimiWidths::scaled(&[1.0], 1.0, 1.1).unwrap()), rbg(1.0)] {
        cfg.dt = 0.02;
        cfg.t_final = 20.0 * PI;
        cfg.output_stride = 50;
        let run = propagate(&s, &v, &phys, &cfg).unwrap();
        assert!(run.failure.is_none(), "{:?}", run.failure);
        let e0 = run.snapshots[0].energy;
        let drift = run.snapshots.iter().map(|s| (s.energy - e0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-4, "{:?}: drift {drift}", cfg.centers);
        let norms: Vec<f64> = run.snapshots.iter().map(|s| s.norm).collect();
        assert!(norms.iter().all(|n| (n - 1.0).abs() < 1e-4));
        let _ = trapezoid(&norms, 1.0);
    }
}

#[test]
fn floor_violation_is_reported() {
    let v = Potential::harmonic();
    let phys = Physics::unit(1);
    let mut cfg = rbg(1.0);
    cfg.density_floor = 10.0;
    let prop = Propagator::new(&v, &phys, &cfg).unwrap();
    let err = prop.step(&probe_state(1.0), 0.01).unwrap_err();
    assert!(matches!(err, Error::DensityFloor { .. }), "{err}");
}

#[test]
fn polar_flip_keeps_magnitude_nonnegative() {
    let s = two_state_barrier();
    let charts = [Chart::Polar, Chart::Polar];
    let mut y = Propagator::pack(&s, &charts);
    let layout = Layout { dims: 1 };
    y[layout.z(0)] = -0.3;
    let back = Propagator::unpack(&s, &charts, &y, 0.0);
    assert!((back.magnitudes[0] - 0.3).abs() < 1e-15);
    back.validate().unwrap();
    assert!((back.ansatz.amplitudes[0] - Complex64::from_polar(-0.3, s.slow_phases[0])).norm() < 1e-15);
}
