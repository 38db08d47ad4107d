//! Exact smoothed momentum flux of one pair and one potential term.
//!
//! The pair flux is
//! `-(1/2πħ) ∫dx' G(x-x') ∫dy exp(-ipy/ħ - ϖp²y²/2ħ²) χ₁*(x'-y/2) χ₂(x'+y/2) [V(x'+y/2) - V(x'-y/2)]/y`.
//! Splitting the difference quotient into its two halves, the `y` integral of
//! each half is a principal value `π·erfi(...)` and the remaining integral
//! is of the `I_r^(2)` form below.

use super::special::{erf_scaled, Scaled};
use super::{Mode, I, MAX_ORDER, ZERO};
use crate::potential::PotentialTerm;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

fn poly_eval(c: &[Complex64], x: Complex64) -> Complex64 {
    c.iter().rev().fold(ZERO, |acc, &k| acc * x + k)
}

fn poly_derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(k, &v)| v * k as f64).collect()
}

/// `I_r(a,b,μ) = (1/√2π) ∫ xʳ exp(-x²/2 + μx) erf(ax + b) dx` in scaled form.
pub fn i2_scaled(r: usize, a: Complex64, b: Complex64, mu: Complex64) -> Result<Scaled> {
    if r > MAX_ORDER {
        return Err(Error::OrderTooHigh { order: r, max: MAX_ORDER });
    }
    let d = 2.0 * a * a + 1.0;
    if d.re <= 0.0 {
        return Err(Error::Divergent(format!("I2 requires Re(a²+1/2) > 0, got a = {a}")));
    }
    let sd = d.sqrt();
    // P_{r+1} = P' + μP,  Q_{r+1} = Q' + (μ - 2ab)Q/d + 2aP/√(πd)
    let mut pp = vec![Complex64::new(1.0, 0.0)];
    let mut qq: Vec<Complex64> = vec![ZERO];
    let qlin = 1.0 / d;
    let qconst = -2.0 * a * b / d;
    let pfac = 2.0 * a / (PI.sqrt() * sd);
    for _ in 0..r {
        let mut np = poly_derivative(&pp);
        np.resize(pp.len() + 1, ZERO);
        for (k, &c) in pp.iter().enumerate() {
            np[k + 1] += c;
        }
        let mut nq = poly_derivative(&qq);
        nq.resize(qq.len().max(pp.len()) + 1, ZERO);
        for (k, &c) in qq.iter().enumerate() {
            nq[k + 1] += c * qlin;
            nq[k] += c * qconst;
        }
        for (k, &c) in pp.iter().enumerate() {
            nq[k] += c * pfac;
        }
        pp = np;
        qq = nq;
    }
    let kappa = (a * mu + b) / sd;
    let half = mu * mu * 0.5;
    let first = erf_scaled(kappa).mul(Scaled::exp(half)).scale(poly_eval(&pp, mu));
    let q = poly_eval(&qq, mu);
    let second = if q == ZERO { Scaled::ZERO } else { Scaled::exp(half - kappa * kappa).scale(q) };
    Ok(first.add(second))
}

/// `I_r^(2)(a, b, μ)`.
pub fn i2_family(r: usize, a: Complex64, b: Complex64, mu: Complex64) -> Result<Complex64> {
    Ok(i2_scaled(r, a, b, mu)?.value())
}

// One half of the difference quotient, the part where the potential acts on the ket side.
fn ket_half(term: &PotentialTerm, k1: &Mode, k2: &Mode, wp: f64, wx: f64, p: f64, x: f64, hbar: f64) -> Result<Scaled> {
    let s2 = k1.width * k1.width;
    let wx2 = wx * wx;
    let a0 = 1.0 / (8.0 * wx2) + wp * wp / (2.0 * hbar * hbar) + 1.0 / (2.0 * s2);
    let b01 = -1.0 / (2.0 * wx2) - 1.0 / s2;
    let b02 = Complex64::new(x / (2.0 * wx2) + k2.x / s2, -(p - k2.p) / hbar);
    let g0 = 1.0 / ((2.0 * PI).sqrt() * wx);
    let norm_sq = 1.0 / (PI * s2).sqrt();
    let alpha = 1.0 / (2.0 * wx2) + 1.0 / s2 - term.quad_coeff;
    let beta = Complex64::new(x / wx2 + (k1.x + k2.x) / s2, (k2.p - k1.p) / hbar) + term.lin_coeff;
    let gamma0 = Complex64::new(
        -x * x / (2.0 * wx2) - (k1.x * k1.x + k2.x * k2.x) / (2.0 * s2),
        (k1.p * k1.x - k2.p * k2.x) / hbar,
    );
    let sa0 = a0.sqrt();
    let b2 = b01 / (2.0 * sa0);
    let c2 = b02 / (2.0 * sa0);
    let sa = (2.0 * alpha).sqrt();
    let r = term.power;
    let inner = i2_scaled(r, I * b2 / sa, I * c2, beta / sa)?;
    let factor = PI * g0 * norm_sq * (2.0 * PI).sqrt() * sa.powi(-(r as i32 + 1));
    Ok(inner.mul(Scaled::exp(gamma0)).scale(-I * term.coefficient * factor))
}

/// Exact pair contribution `J^H_{p,k1k2}` of one potential term in one dimension.
///
/// The two basis modes must share their width; `wp`, `wx` are the smoothing widths.
#[allow(clippy::too_many_arguments)]
pub fn i0_flux_integral(
    term: &PotentialTerm,
    k1: &Mode,
    k2: &Mode,
    wp: f64,
    wx: f64,
    p: f64,
    x: f64,
    hbar: f64,
) -> Result<Complex64> {
    if k1.width != k2.width {
        return Err(Error::WidthMismatch);
    }
    if term.coefficient == ZERO {
        return Ok(ZERO);
    }
    if 1.0 / (2.0 * wx * wx) + 1.0 / (k1.width * k1.width) - term.quad_coeff <= 0.0 {
        return Err(Error::Divergent("flux integral envelope is not normalizable".into()));
    }
    let ket = ket_half(term, k1, k2, wp, wx, p, x, hbar)?;
    let bra = ket_half(&term.conj(), k2, k1, wp, wx, p, x, hbar)?;
    let total = ket.add(Scaled { mant: bra.mant.conj(), log: bra.log });
    Ok(total.value() / (2.0 * PI * hbar))
}
