//! Closed-form integrals between squeezed coherent states.
//!
//! Every quantity here reduces to Gaussian moments `∫ y^r exp(-a y² + b y + c) dy`
//! with complex `a, b, c`, evaluated by the two-term moment recursion.

pub mod flux;
pub mod pair;
pub mod smoothed;
pub mod special;

use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use flux::{i0_flux_integral, i2_family};
pub use pair::{f_bar, f_bar_times_husimi, pair_husimi, pair_husimi_1d, pair_wigner, pair_wigner_1d, PairMoments};
pub use smoothed::i4_integral;
pub use special::{erf, erfc, erfcx, erfi, faddeeva, Scaled};

/// Largest polynomial power or Hermite order accepted by the closed forms.
pub const MAX_ORDER: usize = 16;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// One squeezed coherent state, `∏ₙ (πςₙ²)^(-1/4) exp(-(xₙ-x̄ₙ)²/(2ςₙ²) + i p̄ₙ(xₙ-x̄ₙ)/ħ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisState {
    pub centers_p: Vec<f64>,
    pub centers_x: Vec<f64>,
    pub widths: Vec<f64>,
}

impl BasisState {
    pub fn new(centers_p: Vec<f64>, centers_x: Vec<f64>, widths: Vec<f64>) -> Result<Self> {
        let state = BasisState { centers_p, centers_x, widths };
        state.validate()?;
        Ok(state)
    }

    /// A one-dimensional state.
    pub fn scalar(p: f64, x: f64, width: f64) -> Result<Self> {
        Self::new(vec![p], vec![x], vec![width])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.widths.len();
        if n == 0 || self.centers_p.len() != n || self.centers_x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.centers_p.len().max(self.centers_x.len()) });
        }
        if let Some(w) = self.widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("basis width must be positive and finite, got {w}")));
        }
        if self.centers_p.iter().chain(&self.centers_x).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("basis centers must be finite".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.widths.len()
    }

    pub fn mode(&self, n: usize) -> Mode {
        Mode { p: self.centers_p[n], x: self.centers_x[n], width: self.widths[n] }
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.dim()).map(move |n| self.mode(n))
    }

    /// Wavefunction value at a configuration-space point.
    pub fn value(&self, x: &[f64], hbar: f64) -> Complex64 {
        self.modes().zip(x).map(|(m, &y)| m.value(y, hbar)).product()
    }
}

/// One dimension of a [`BasisState`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub p: f64,
    pub x: f64,
    pub width: f64,
}

impl Mode {
    pub fn new(p: f64, x: f64, width: f64) -> Self {
        Mode { p, x, width }
    }

    pub fn ln_norm(&self) -> f64 {
        -0.25 * (PI * self.width * self.width).ln()
    }

    pub fn value(&self, y: f64, hbar: f64) -> Complex64 {
        let d = y - self.x;
        Complex64::new(self.ln_norm() - d * d / (2.0 * self.width * self.width), self.p * d / hbar).exp()
    }

    /// Logarithmic derivative `χ'/χ`, linear in `y`.
    pub fn log_gradient(&self, y: f64, hbar: f64) -> Complex64 {
        Complex64::new(-(y - self.x) / (self.width * self.width), self.p / hbar)
    }

    /// Momentum operator acting on the mode, `p̂χ = f(y)χ`, as polynomial coefficients in `y`.
    pub fn momentum_poly(&self, hbar: f64) -> [Complex64; 2] {
        let s2 = self.width * self.width;
        [Complex64::new(self.p, -hbar * self.x / s2), Complex64::new(0.0, hbar / s2)]
    }

    /// `p̂²χ = (ħ²/ς² + f²)χ` as polynomial coefficients.
    pub fn momentum_sq_poly(&self, hbar: f64) -> [Complex64; 3] {
        let [f0, f1] = self.momentum_poly(hbar);
        let s2 = self.width * self.width;
        [f0 * f0 + hbar * hbar / s2, 2.0 * f0 * f1, f1 * f1]
    }
}

/// `exp(-a y² + b y + c)` with `Re a > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl Gaussian {
    /// The product `conj(χ_bra(y)) χ_ket(y)`, normalization included.
    pub fn product(bra: &Mode, ket: &Mode, hbar: f64) -> Self {
        let (s1, s2) = (bra.width * bra.width, ket.width * ket.width);
        Gaussian {
            a: Complex64::new(0.5 / s1 + 0.5 / s2, 0.0),
            b: Complex64::new(bra.x / s1 + ket.x / s2, (ket.p - bra.p) / hbar),
            c: Complex64::new(
                bra.ln_norm() + ket.ln_norm() - bra.x * bra.x / (2.0 * s1) - ket.x * ket.x / (2.0 * s2),
                (bra.p * bra.x - ket.p * ket.x) / hbar,
            ),
        }
    }

    /// Multiplies by `exp(q y² + l y + k)`.
    pub fn times(self, q: Complex64, l: Complex64, k: Complex64) -> Self {
        Gaussian { a: self.a - q, b: self.b + l, c: self.c + k }
    }

    /// Multiplies by the smoothing window `exp(-(y-x)²/(2w²))`.
    pub fn windowed(self, x: f64, w: f64) -> Self {
        let h = 0.5 / (w * w);
        self.times(Complex64::new(-h, 0.0), Complex64::new(2.0 * h * x, 0.0), Complex64::new(-h * x * x, 0.0))
    }

    pub fn is_convergent(&self) -> bool {
        self.a.re > 0.0
    }

    /// `∫ exp(...) dy`.
    pub fn integral(&self) -> Complex64 {
        (PI / self.a).sqrt() * (self.b * self.b / (4.0 * self.a) + self.c).exp()
    }

    /// Moments `M_r = ∫ y^r exp(...) dy` for `r = 0..=rmax`.
    pub fn moments(&self, rmax: usize) -> Vec<Complex64> {
        let mut m = Vec::with_capacity(rmax + 1);
        m.push(self.integral());
        if rmax >= 1 {
            m.push(self.b / (2.0 * self.a) * m[0]);
        }
        for r in 1..rmax {
            let next = (self.b * m[r] + r as f64 * m[r - 1]) / (2.0 * self.a);
            m.push(next);
        }
        m
    }

    /// `∫ P(y) exp(...) dy` for polynomial coefficients in ascending order.
    pub fn integrate_poly(&self, coeffs: &[Complex64]) -> Complex64 {
        if coeffs.is_empty() {
            return ZERO;
        }
        let m = self.moments(coeffs.len() - 1);
        coeffs.iter().zip(&m).map(|(c, m)| c * m).sum()
    }

    /// `∫_{y0}^∞ exp(...) dy`.
    pub fn integral_above(&self, y0: f64) -> Complex64 {
        let sa = self.a.sqrt();
        let u = sa * y0 - self.b / (2.0 * sa);
        let scaled = special::erfc_scaled(u).mul(Scaled::exp(self.b * self.b / (4.0 * self.a) + self.c));
        scaled.value() * 0.5 * (PI / self.a).sqrt()
    }
}

pub(crate) fn check_dims(k1: &BasisState, k2: &BasisState) -> Result<()> {
    if k1.dim() != k2.dim() {
        return Err(Error::DimensionMismatch { expected: k1.dim(), found: k2.dim() });
    }
    Ok(())
}

/// One-dimensional overlap `⟨bra|ket⟩`.
pub fn overlap_1d(bra: &Mode, ket: &Mode, hbar: f64) -> Complex64 {
    Gaussian::product(bra, ket, hbar).integral()
}

/// `⟨bra|ket⟩`.
pub fn overlap(bra: &BasisState, ket: &BasisState, hbar: f64) -> Result<Complex64> {
    check_dims(bra, ket)?;
    Ok(bra.modes().zip(ket.modes()).map(|(a, b)| overlap_1d(&a, &b, hbar)).product())
}

/// `⟨bra|p̂²|ket⟩` in one dimension.
pub fn momentum_sq_1d(bra: &Mode, ket: &Mode, hbar: f64) -> Complex64 {
    Gaussian::product(bra, ket, hbar).integrate_poly(&ket.momentum_sq_poly(hbar))
}

/// `⟨bra|p̂|ket⟩` in one dimension.
pub fn momentum_1d(bra: &Mode, ket: &Mode, hbar: f64) -> Complex64 {
    Gaussian::product(bra, ket, hbar).integrate_poly(&ket.momentum_poly(hbar))
}

/// `⟨bra|(ŷ - x̄_ket)|ket⟩` in one dimension.
pub fn displacement_1d(bra: &Mode, ket: &Mode, hbar: f64) -> Complex64 {
    Gaussian::product(bra, ket, hbar).integrate_poly(&[Complex64::new(-ket.x, 0.0), Complex64::new(1.0, 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use phaseflow_oracle::integrate;

    fn quad_element(bra: Mode, ket: Mode, f: impl Fn(f64) -> Complex64) -> Complex64 {
        integrate(|y| bra.value(y, 1.0).conj() * f(y) * ket.value(y, 1.0), -30.0, 30.0, 1e-14, 1e-13)
    }

    #[test]
    fn overlap_examples() {
        let a = BasisState::scalar(0.0, 0.0, 1.0).unwrap();
        let b = BasisState::scalar(0.0, 2.0, 1.0).unwrap();
        assert!((overlap(&a, &b, 1.0).unwrap() - (-1f64).exp()).norm() < 1e-14);
        let c = BasisState::new(vec![0.3, -1.2], vec![0.1, 2.0], vec![0.7, 1.3]).unwrap();
        assert!((overlap(&c, &c, 1.0).unwrap() - 1.0).norm() < 1e-14);
        assert!(overlap(&a, &c, 1.0).is_err());
    }

    #[test]
    fn matrix_elements_match_quadrature() {
        let bra = Mode::new(0.7, -0.4, 0.6);
        let ket = Mode::new(-1.1, 0.3, 0.9);
        let s = quad_element(bra, ket, |_| Complex64::new(1.0, 0.0));
        assert!((overlap_1d(&bra, &ket, 1.0) - s).norm() < 1e-12);
        let d = quad_element(bra, ket, |y| Complex64::new(y - ket.x, 0.0));
        assert!((displacement_1d(&bra, &ket, 1.0) - d).norm() < 1e-12);
        // p̂ acting on the ket by differentiation
        let p = quad_element(bra, ket, |y| -I * ket.log_gradient(y, 1.0));
        assert!((momentum_1d(&bra, &ket, 1.0) - p).norm() < 1e-12);
        let p2 = quad_element(bra, ket, |y| {
            let g = ket.log_gradient(y, 1.0);
            -(g * g - 1.0 / (ket.width * ket.width))
        });
        assert!((momentum_sq_1d(&bra, &ket, 1.0) - p2).norm() < 1e-12);
    }

    #[test]
    fn half_line_integral() {
        let g = Gaussian::product(&Mode::new(0.5, 0.2, 0.8), &Mode::new(-0.3, -0.6, 0.8), 1.0);
        let q = integrate(|y| (-g.a * y * y + g.b * y + g.c).exp(), 0.3, 30.0, 1e-15, 1e-14);
        assert!((g.integral_above(0.3) - q).norm() < 1e-13);
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(BasisState::scalar(0.0, 0.0, 0.0).is_err());
        assert!(BasisState::new(vec![0.0], vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(BasisState::scalar(f64::NAN, 0.0, 1.0).is_err());
    }
}
