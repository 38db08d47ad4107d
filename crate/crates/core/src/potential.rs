//! Separable potentials built from terms `c·xʳ·exp(v₂x² + v₁x)`.

use crate::gauss::{Gaussian, Mode, MAX_ORDER, ZERO};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialTerm {
    pub coefficient: Complex64,
    pub power: usize,
    pub quad_coeff: f64,
    pub lin_coeff: Complex64,
    pub dim: usize,
}

impl PotentialTerm {
    pub fn new(coefficient: Complex64, power: usize, quad_coeff: f64, lin_coeff: Complex64, dim: usize) -> Result<Self> {
        let term = PotentialTerm { coefficient, power, quad_coeff, lin_coeff, dim };
        term.validate()?;
        Ok(term)
    }

    /// `c·xʳ` on dimension 0.
    pub fn monomial(c: f64, power: usize) -> Self {
        PotentialTerm { coefficient: c.into(), power, quad_coeff: 0.0, lin_coeff: ZERO, dim: 0 }
    }

    /// `c·exp(-(x/width)²)` on dimension 0.
    pub fn gaussian(c: f64, width: f64) -> Self {
        PotentialTerm { coefficient: c.into(), power: 0, quad_coeff: -1.0 / (width * width), lin_coeff: ZERO, dim: 0 }
    }

    pub fn on_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quad_coeff <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "potential term quadratic exponent must be <= 0, got {}",
                self.quad_coeff
            )));
        }
        if self.power > MAX_ORDER {
            return Err(Error::OrderTooHigh { order: self.power, max: MAX_ORDER });
        }
        if !(self.coefficient.is_finite() && self.lin_coeff.is_finite()) {
            return Err(Error::InvalidParameter("potential term coefficients must be finite".into()));
        }
        Ok(())
    }

    /// The term with conjugated coefficient and linear exponent.
    pub fn conj(&self) -> Self {
        PotentialTerm { coefficient: self.coefficient.conj(), lin_coeff: self.lin_coeff.conj(), ..*self }
    }

    fn envelope(&self, y: f64) -> Complex64 {
        (self.quad_coeff * y * y + self.lin_coeff * y).exp()
    }

    pub fn value(&self, y: f64) -> Complex64 {
        self.coefficient * y.powi(self.power as i32) * self.envelope(y)
    }

    /// Polynomial `P` with `dⁿ/dyⁿ term = P(y)·exp(v₂y² + v₁y)`, ascending coefficients.
    pub fn derivative_poly(&self, order: usize) -> Vec<Complex64> {
        let mut poly = vec![ZERO; self.power + 1];
        poly[self.power] = self.coefficient;
        for _ in 0..order {
            let mut next = vec![ZERO; poly.len() + 1];
            for (k, &c) in poly.iter().enumerate() {
                if k > 0 {
                    next[k - 1] += c * k as f64;
                }
                next[k] += c * self.lin_coeff;
                next[k + 1] += c * 2.0 * self.quad_coeff;
            }
            while next.len() > 1 && next.last() == Some(&ZERO) {
                next.pop();
            }
            poly = next;
        }
        poly
    }

    pub fn derivative(&self, y: f64, order: usize) -> Complex64 {
        let poly = self.derivative_poly(order);
        poly.iter().rev().fold(ZERO, |acc, &c| acc * y + c) * self.envelope(y)
    }

    /// `⟨bra|term|ket⟩` for the term's own dimension.
    pub fn element_1d(&self, bra: &Mode, ket: &Mode, hbar: f64) -> Complex64 {
        let g = Gaussian::product(bra, ket, hbar).times(self.quad_coeff.into(), self.lin_coeff, ZERO);
        self.coefficient * g.moments(self.power)[self.power]
    }

    /// `⟨bra|∂term/∂y|ket⟩`.
    pub fn gradient_element_1d(&self, bra: &Mode, ket: &Mode, hbar: f64) -> Complex64 {
        let g = Gaussian::product(bra, ket, hbar).times(self.quad_coeff.into(), self.lin_coeff, ZERO);
        g.integrate_poly(&self.derivative_poly(1))
    }

    pub fn is_polynomial(&self) -> bool {
        self.quad_coeff == 0.0 && self.lin_coeff == ZERO
    }
}

/// Sum of separable terms over `dims` dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub dims: usize,
    pub terms: Vec<PotentialTerm>,
}

impl Potential {
    pub fn new(dims: usize, terms: Vec<PotentialTerm>) -> Result<Self> {
        let v = Potential { dims, terms };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            t.validate()?;
            if t.dim >= self.dims {
                return Err(Error::DimensionMismatch { expected: self.dims, found: t.dim + 1 });
            }
        }
        Ok(())
    }

    /// `V = x²/2`.
    pub fn harmonic() -> Self {
        Potential { dims: 1, terms: vec![PotentialTerm::monomial(0.5, 2)] }
    }

    /// `V = (x-5)²x²/50`.
    pub fn double_well() -> Self {
        Potential {
            dims: 1,
            terms: vec![
                PotentialTerm::monomial(1.0 / 50.0, 4),
                PotentialTerm::monomial(-10.0 / 50.0, 3),
                PotentialTerm::monomial(25.0 / 50.0, 2),
            ],
        }
    }

    /// `V = x²/2 + 25·exp(-(x/0.35)²)`.
    pub fn barrier() -> Self {
        Potential { dims: 1, terms: vec![PotentialTerm::monomial(0.5, 2), PotentialTerm::gaussian(25.0, 0.35)] }
    }

    pub fn free(dims: usize) -> Self {
        Potential { dims, terms: Vec::new() }
    }

    pub fn terms_on(&self, dim: usize) -> impl Iterator<Item = &PotentialTerm> {
        self.terms.iter().filter(move |t| t.dim == dim)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.value(x[t.dim]).re).sum()
    }

    /// One-dimensional slice value for dimension `dim`.
    pub fn value_1d(&self, dim: usize, y: f64) -> f64 {
        self.terms_on(dim).map(|t| t.value(y).re).sum()
    }

    pub fn derivative_1d(&self, dim: usize, y: f64, order: usize) -> f64 {
        self.terms_on(dim).map(|t| t.derivative(y, order).re).sum()
    }

    /// Largest polynomial degree when every term on `dim` is a pure monomial.
    pub fn polynomial_degree(&self, dim: usize) -> Option<usize> {
        let mut deg = 0;
        for t in self.terms_on(dim) {
            if !t.is_polynomial() {
                return None;
            }
            deg = deg.max(t.power);
        }
        Some(deg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use phaseflow_oracle::{derivative, integrate};

    #[test]
    fn builtins_and_derivatives() {
        let dw = Potential::double_well();
        for x in [-1.3, 0.0, 2.5, 5.0, 7.1] {
            let exact = (x - 5.0) * (x - 5.0) * x * x / 50.0;
            assert!((dw.value(&[x]) - exact).abs() < 1e-12);
        }
        let b = Potential::barrier();
        for x in [-0.7, -0.1, 0.2, 0.9] {
            for order in 1..=3 {
                let fd = derivative(|y| b.derivative_1d(0, y, order - 1), x, 1e-3);
                assert!((b.derivative_1d(0, x, order) - fd).abs() < 1e-6 * (1.0 + fd.abs()), "order {order} at {x}");
            }
        }
    }

    #[test]
    fn elements_match_quadrature() {
        let bra = Mode::new(0.3, -0.2, 0.5);
        let ket = Mode::new(-0.7, 0.4, 0.5);
        let term = PotentialTerm::new(Complex64::new(1.3, 0.4), 3, -0.6, Complex64::new(0.2, -0.5), 0).unwrap();
        let q = integrate(|y| bra.value(y, 1.0).conj() * term.value(y) * ket.value(y, 1.0), -20.0, 20.0, 1e-15, 1e-13);
        let e = term.element_1d(&bra, &ket, 1.0);
        assert!((e - q).norm() < 1e-13, "{e} vs {q}");
        let q1 = integrate(|y| bra.value(y, 1.0).conj() * term.derivative(y, 1) * ket.value(y, 1.0), -20.0, 20.0, 1e-15, 1e-13);
        assert!((term.gradient_element_1d(&bra, &ket, 1.0) - q1).norm() < 1e-12);
    }

    #[test]
    fn rejects_growing_envelope() {
        assert!(PotentialTerm::new(1.0.into(), 0, 0.1, ZERO, 0).is_err());
        assert!(PotentialTerm::new(1.0.into(), 17, 0.0, ZERO, 0).is_err());
        assert!(Potential::new(1, vec![PotentialTerm::monomial(1.0, 2).on_dim(1)]).is_err());
    }
}
