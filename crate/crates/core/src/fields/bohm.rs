//! Bohmian-limit fields of a one-dimensional ansatz, from analytic derivatives
//! of the Gaussian sum.

use super::{Ansatz, Physics};
use crate::potential::Potential;
use crate::{Error, Result};
use num_complex::Complex64;

/// `(ψ, ψ', ψ'', ψ''')` at `x`.
pub fn wavefunction_derivatives(ansatz: &Ansatz, x: f64, hbar: f64) -> [Complex64; 4] {
    let mut d = [Complex64::new(0.0, 0.0); 4];
    for (a, b) in ansatz.amplitudes.iter().zip(&ansatz.basis) {
        let m = b.mode(0);
        let v = a * m.value(x, hbar);
        let g = m.log_gradient(x, hbar);
        let inv = 1.0 / (m.width * m.width);
        d[0] += v;
        d[1] += v * g;
        d[2] += v * (g * g - inv);
        d[3] += v * (g * g * g - 3.0 * inv * g);
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BohmianFields {
    /// `pB = Re[p̂ψ/ψ] = ħ Im(ψ'/ψ)`.
    pub momentum: f64,
    /// `Vq = -(ħ²/2m) |ψ|''/|ψ|`.
    pub quantum_potential: f64,
    /// `-∂(V + Vq)/∂x`.
    pub force: f64,
    /// `|ψ(x)|²`.
    pub density: f64,
}

/// Bohmian momentum, quantum potential and total force at `x`.
///
/// Fails when `|ψ(x)|` is below `amplitude_floor`, where the fields are singular.
pub fn bohmian_limit_fields(
    ansatz: &Ansatz,
    potential: &Potential,
    physics: &Physics,
    x: f64,
    amplitude_floor: f64,
) -> Result<BohmianFields> {
    if ansatz.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: ansatz.dim() });
    }
    let hbar = physics.hbar;
    let mass = physics.masses[0];
    let [psi, d1, d2, d3] = wavefunction_derivatives(ansatz, x, hbar);
    if !(psi.norm() > amplitude_floor) {
        return Err(Error::NodeProximity { amplitude: psi.norm(), x });
    }
    let u = d1 / psi;
    let u2 = d2 / psi;
    let u3 = d3 / psi;
    // R''/R and its derivative, with (ψ''/ψ)' = ψ'''/ψ - (ψ''/ψ)(ψ'/ψ) and (ψ'/ψ)' = ψ''/ψ - (ψ'/ψ)²
    let curv = u2.re + u.im * u.im;
    let du = u2 - u * u;
    let dcurv = (u3 - u2 * u).re + 2.0 * u.im * du.im;
    let k = -hbar * hbar / (2.0 * mass);
    Ok(BohmianFields {
        momentum: hbar * u.im,
        quantum_potential: k * curv,
        force: -potential.derivative_1d(0, x, 1) - k * dcurv,
        density: psi.norm_sqr(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BasisState;
    use phaseflow_oracle::{derivative, derivative_c};

    #[test]
    fn derivatives_match_finite_differences() {
        let basis = vec![BasisState::scalar(0.7, -0.2, 0.6).unwrap(), BasisState::scalar(-0.5, 0.9, 0.6).unwrap()];
        let a = Ansatz::new(vec![Complex64::new(0.7, 0.2), Complex64::new(-0.4, 0.3)], basis, 0.0).unwrap();
        let x = 0.31;
        let d = wavefunction_derivatives(&a, x, 1.0);
        for k in 1..4 {
            let fd = derivative_c(|y| wavefunction_derivatives(&a, y, 1.0)[k - 1], x, 1e-3);
            assert!((d[k] - fd).norm() < 1e-8, "order {k}");
        }
    }

    #[test]
    fn single_gaussian_fields() {
        // |ψ| = exp(-(x-x̄)²/2ς²) up to a constant, so Vq = (ħ²/2mς²)(1 - (x-x̄)²/ς²).
        let s = 0.7;
        let a = Ansatz::coherent(BasisState::scalar(1.2, 0.3, s).unwrap()).unwrap();
        let phys = Physics::unit(1);
        let v = Potential::free(1);
        for x in [-0.5, 0.3, 1.1] {
            let f = bohmian_limit_fields(&a, &v, &phys, x, 1e-12).unwrap();
            let d = x - 0.3;
            assert!((f.momentum - 1.2).abs() < 1e-13);
            let vq = 0.5 / (s * s) * (1.0 - d * d / (s * s));
            assert!((f.quantum_potential - vq).abs() < 1e-12);
            let dvq = derivative(|y| bohmian_limit_fields(&a, &v, &phys, y, 1e-12).unwrap().quantum_potential, x, 1e-3);
            assert!((f.force + dvq).abs() < 1e-8);
        }
    }

    #[test]
    fn node_is_reported() {
        let basis = vec![BasisState::scalar(0.0, -1.0, 0.5).unwrap(), BasisState::scalar(0.0, 1.0, 0.5).unwrap()];
        let a = Ansatz::new(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)], basis, 0.0).unwrap();
        let r = bohmian_limit_fields(&a, &Potential::free(1), &Physics::unit(1), 0.0, 1e-12);
        assert!(matches!(r, Err(Error::NodeProximity { .. })));
    }
}
