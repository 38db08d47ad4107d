//! Gauge fluxes: the regularized Bohmian gauge and user-supplied potentials.
//!
//! A gauge potential `A_n` adds the divergence-free flux
//! `(δJ_p, δJ_x) = (-∂A/∂x, ∂A/∂p)`. The regularized Bohmian choice makes the
//! total position flux `p̃(x) Q / m`, with `p̃` the smoothed Bohmian momentum.

use super::flow::product_except;
use super::{check_point, Ansatz, CustomGauge, Flux, HusimiWidths, Physics};
use crate::gauss::pair::HusimiFactor;
use crate::gauss::{Gaussian, ZERO};
use crate::{Error, Result};
use num_complex::Complex64;

/// A smooth phase-space potential with analytic partial derivatives.
pub trait GaugePotential: Send + Sync {
    fn value(&self, p: f64, x: f64) -> f64;
    fn d_dp(&self, p: f64, x: f64) -> f64;
    fn d_dx(&self, p: f64, x: f64) -> f64;
}

/// `A = π Σ_{δx,δp=±1} exp(-¾((x+δx)² + (p+δp)²))`, four Gaussian swirls.
#[derive(Clone, Copy, Debug, Default)]
pub struct SwirlGauge;

impl SwirlGauge {
    fn lobes(p: f64, x: f64) -> impl Iterator<Item = (f64, f64, f64)> {
        [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)].into_iter().map(move |(dx, dp)| {
            let (u, v) = (x + dx, p + dp);
            (u, v, std::f64::consts::PI * (-0.75 * (u * u + v * v)).exp())
        })
    }
}

impl GaugePotential for SwirlGauge {
    fn value(&self, p: f64, x: f64) -> f64 {
        Self::lobes(p, x).map(|(_, _, e)| e).sum()
    }
    fn d_dp(&self, p: f64, x: f64) -> f64 {
        Self::lobes(p, x).map(|(_, v, e)| -1.5 * v * e).sum()
    }
    fn d_dx(&self, p: f64, x: f64) -> f64 {
        Self::lobes(p, x).map(|(u, _, e)| -1.5 * u * e).sum()
    }
}

/// `(δJ_p, δJ_x) = (-∂A/∂x, ∂A/∂p)` per dimension.
pub fn custom_gauge_flux(gauge: &CustomGauge, p: &[f64], x: &[f64]) -> Result<Flux> {
    if gauge.potentials.len() != p.len() || p.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: gauge.potentials.len(), found: p.len() });
    }
    let mut f = Flux::zeros(p.len());
    for (n, a) in gauge.potentials.iter().enumerate() {
        f.p[n] = -a.d_dx(p[n], x[n]);
        f.x[n] = a.d_dp(p[n], x[n]);
    }
    Ok(f)
}

fn other_dim_weights(ansatz: &Ansatz, widths: &HusimiWidths, i: usize, j: usize, n: usize, p: &[f64], x: &[f64], hbar: f64) -> Complex64 {
    let (bi, bj) = (&ansatz.basis[i], &ansatz.basis[j]);
    (0..ansatz.dim())
        .filter(|&m| m != n)
        .map(|m| HusimiFactor::new(&bi.mode(m), &bj.mode(m), widths.p[m], widths.x[m], p[m], x[m], hbar).value())
        .product()
}

/// Regularized Bohmian momentum `p̃_n` and its slope `∂p̃_n/∂x_n`.
///
/// `p̃ = Σ a*a ⟨k1|{p̂,G}|k2⟩ w / (2 Σ a*a ⟨k1|G|k2⟩ w)` with the position window
/// `G = exp(-(x̂-x)²/2ϖx²)` and `w` the pair Husimi factors of the other dimensions.
pub fn reg_bohm_momentum_with_slope(
    ansatz: &Ansatz,
    widths: &HusimiWidths,
    n: usize,
    p: &[f64],
    x: &[f64],
    hbar: f64,
) -> Result<(f64, f64)> {
    check_point(ansatz, p, x)?;
    widths.check_dim(ansatz.dim())?;
    if n >= ansatz.dim() {
        return Err(Error::DimensionMismatch { expected: ansatz.dim(), found: n + 1 });
    }
    let (xn, wx) = (x[n], widths.x[n]);
    let wx2 = wx * wx;
    let (mut num, mut dnum, mut den, mut dden) = (0.0, 0.0, 0.0, 0.0);
    let k = ansatz.len();
    for i in 0..k {
        for j in 0..k {
            let c = ansatz.amplitudes[i].conj() * ansatz.amplitudes[j];
            let w = if ansatz.dim() == 1 { Complex64::new(1.0, 0.0) } else { other_dim_weights(ansatz, widths, i, j, n, p, x, hbar) };
            let (mi, mj) = (ansatz.basis[i].mode(n), ansatz.basis[j].mode(n));
            let g = Gaussian::product(&mi, &mj, hbar).windowed(xn, wx);
            let m = g.moments(2);
            let [f0, f1] = mj.momentum_poly(hbar);
            let y = f0 * m[0] + f1 * m[1];
            let dy = (f0 * (m[1] - xn * m[0]) + f1 * (m[2] - xn * m[1])) / wx2;
            let cw = c * w;
            num += (cw * y).re;
            dnum += (cw * dy).re;
            if i <= j {
                let mult = if i == j { 1.0 } else { 2.0 };
                den += mult * (cw * m[0]).re;
                dden += mult * (cw * (m[1] - xn * m[0]) / wx2).re;
            }
        }
    }
    if !(den > 0.0 && den.is_finite()) {
        return Err(Error::DensityFloor { density: den, floor: 0.0, p: p.to_vec(), x: x.to_vec() });
    }
    Ok((num / den, (dnum * den - num * dden) / (den * den)))
}

/// Regularized Bohmian momentum along dimension `n`.
pub fn reg_bohm_momentum(ansatz: &Ansatz, widths: &HusimiWidths, n: usize, p: &[f64], x: &[f64], hbar: f64) -> Result<f64> {
    Ok(reg_bohm_momentum_with_slope(ansatz, widths, n, p, x, hbar)?.0)
}

/// Gauge potential `A_n = (1/m) Σ a*a [(p̃ - p̄avg) f̄ + ħ²/2ς²] Q`, for diagnostics.
pub fn gauge_potential(
    ansatz: &Ansatz,
    widths: &HusimiWidths,
    physics: &Physics,
    n: usize,
    p: &[f64],
    x: &[f64],
) -> Result<f64> {
    let hbar = physics.hbar;
    let (pt, _) = reg_bohm_momentum_with_slope(ansatz, widths, n, p, x, hbar)?;
    let mut a = 0.0;
    let mut factors = vec![ZERO; ansatz.dim()];
    for (i, j, c, mult) in ansatz.hermitian_pairs() {
        let (bi, bj) = (&ansatz.basis[i], &ansatz.basis[j]);
        for (m, fm) in factors.iter_mut().enumerate() {
            *fm = HusimiFactor::new(&bi.mode(m), &bj.mode(m), widths.p[m], widths.x[m], p[m], x[m], hbar).value();
        }
        let hf = HusimiFactor::new(&bi.mode(n), &bj.mode(n), widths.p[n], widths.x[n], p[n], x[n], hbar);
        let s2 = bi.widths[n] * bi.widths[n];
        let term = (pt - hf.p_avg) * hf.cumulative_p().value() + hbar * hbar / (2.0 * s2) * factors[n];
        a += mult * (c * product_except(&factors, n) * term).re;
    }
    Ok(a / physics.masses[n])
}

/// Regularized Bohmian gauge flux `(δJ_p, δJ_x)`, relative to the default gauge.
pub fn reg_bohm_gauge_flux(
    ansatz: &Ansatz,
    widths: &HusimiWidths,
    physics: &Physics,
    p: &[f64],
    x: &[f64],
) -> Result<Flux> {
    check_point(ansatz, p, x)?;
    widths.check_dim(ansatz.dim())?;
    let dim = ansatz.dim();
    let hbar = physics.hbar;
    let mut moms = Vec::with_capacity(dim);
    for n in 0..dim {
        moms.push(reg_bohm_momentum_with_slope(ansatz, widths, n, p, x, hbar)?);
    }
    let mut flux = Flux::zeros(dim);
    let mut factors = vec![ZERO; dim];
    let mut hf = Vec::with_capacity(dim);
    for (i, j, c, mult) in ansatz.hermitian_pairs() {
        let (bi, bj) = (&ansatz.basis[i], &ansatz.basis[j]);
        hf.clear();
        for m in 0..dim {
            let f = HusimiFactor::new(&bi.mode(m), &bj.mode(m), widths.p[m], widths.x[m], p[m], x[m], hbar);
            factors[m] = f.value();
            hf.push(f);
        }
        let q: Complex64 = factors.iter().product();
        for n in 0..dim {
            let (pt, slope) = moms[n];
            let f = &hf[n];
            let s2 = bi.widths[n] * bi.widths[n];
            let kappa = hbar * hbar / (hbar * hbar + 2.0 * s2 * widths.p[n] * widths.p[n]);
            let mass = physics.masses[n];
            // position: p̃ Q - K∘(pW)
            let default_x = f.p_avg + kappa * (p[n] - f.p_avg);
            flux.x[n] += mult * (c * q * (pt - default_x)).re / mass;
            // momentum: -∂A/∂x
            let cum = f.cumulative_p().value();
            let inner = slope * cum + ((pt - f.p_avg) * cum + hbar * hbar / (2.0 * s2) * factors[n]) * f.x_log_derivative();
            flux.p[n] -= mult * (c * product_except(&factors, n) * inner).re / mass;
        }
    }
    Ok(flux)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BasisState;
    use phaseflow_oracle::derivative;

    #[test]
    fn swirl_partials_match_finite_differences() {
        let g = SwirlGauge;
        for (p, x) in [(0.3, -0.2), (-1.1, 0.8), (2.0, 1.5)] {
            assert!((g.d_dp(p, x) - derivative(|q| g.value(q, x), p, 1e-3)).abs() < 1e-9);
            assert!((g.d_dx(p, x) - derivative(|y| g.value(p, y), x, 1e-3)).abs() < 1e-9);
        }
    }

    #[test]
    fn single_state_momentum_is_center_momentum() {
        let a = Ansatz::coherent(BasisState::scalar(1.3, 0.4, 0.5).unwrap()).unwrap();
        let w = HusimiWidths::scaled(&[0.5], 1.0, 1.1).unwrap();
        for x in [-1.0, 0.4, 2.0] {
            let (pt, slope) = reg_bohm_momentum_with_slope(&a, &w, 0, &[0.0], &[x], 1.0).unwrap();
            assert!((pt - 1.3).abs() < 1e-13 && slope.abs() < 1e-12);
        }
    }

    #[test]
    fn slope_matches_finite_difference() {
        let basis = vec![BasisState::scalar(1.0, -0.5, 0.5).unwrap(), BasisState::scalar(-0.7, 0.6, 0.5).unwrap()];
        let a = Ansatz::new(vec![Complex64::new(0.8, 0.1), Complex64::new(0.2, -0.6)], basis, 0.0).unwrap();
        let w = HusimiWidths::scaled(&[0.5], 1.0, 1.1).unwrap();
        let x0 = 0.13;
        let (_, slope) = reg_bohm_momentum_with_slope(&a, &w, 0, &[0.0], &[x0], 1.0).unwrap();
        let fd = derivative(|x| reg_bohm_momentum(&a, &w, 0, &[0.0], &[x], 1.0).unwrap(), x0, 1e-3);
        assert!((slope - fd).abs() < 1e-8, "{slope} vs {fd}");
    }

    #[test]
    fn gauge_flux_derives_from_potential() {
        let basis = vec![BasisState::scalar(1.0, -0.5, 0.5).unwrap(), BasisState::scalar(-0.7, 0.6, 0.5).unwrap()];
        let a = Ansatz::new(vec![Complex64::new(0.8, 0.1), Complex64::new(0.2, -0.6)], basis, 0.0).unwrap();
        let w = HusimiWidths::scaled(&[0.5], 1.0, 1.1).unwrap();
        let phys = Physics::unit(1);
        let (p, x) = (0.3, 0.2);
        let f = reg_bohm_gauge_flux(&a, &w, &phys, &[p], &[x]).unwrap();
        let dadx = derivative(|y| gauge_potential(&a, &w, &phys, 0, &[p], &[y]).unwrap(), x, 1e-3);
        let dadp = derivative(|q| gauge_potential(&a, &w, &phys, 0, &[q], &[x]).unwrap(), p, 1e-3);
        assert!((f.p[0] + dadx).abs() < 1e-9, "{} vs {}", f.p[0], -dadx);
        assert!((f.x[0] - dadp).abs() < 1e-9, "{} vs {}", f.x[0], dadp);
    }
}
