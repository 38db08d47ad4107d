//! Pair quasiprobability terms `W_{k1k2}` and `Q_{k1k2}` for states sharing a width.

use super::special::{erfc_scaled, faddeeva_scaled, Scaled};
use super::{check_dims, BasisState, Mode, I};
use crate::fields::HusimiWidths;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Complex centers of a pair term.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMoments {
    pub p_avg: Vec<Complex64>,
    pub x_avg: Vec<Complex64>,
}

impl PairMoments {
    pub fn new(k1: &BasisState, k2: &BasisState, hbar: f64) -> Result<Self> {
        check_shared_widths(k1, k2)?;
        let (p_avg, x_avg) = k1.modes().zip(k2.modes()).map(|(a, b)| pair_centers(&a, &b, hbar)).unzip();
        Ok(PairMoments { p_avg, x_avg })
    }
}

/// `(p̄avg, x̄avg)` of one dimension.
pub fn pair_centers(k1: &Mode, k2: &Mode, hbar: f64) -> (Complex64, Complex64) {
    let s2 = k1.width * k1.width;
    let p = 0.5 * Complex64::new(k1.p + k2.p, hbar * (k1.x - k2.x) / s2);
    let x = 0.5 * Complex64::new(k1.x + k2.x, -(k1.p - k2.p) * s2 / hbar);
    (p, x)
}

pub(crate) fn check_shared_widths(k1: &BasisState, k2: &BasisState) -> Result<()> {
    check_dims(k1, k2)?;
    if k1.widths != k2.widths {
        return Err(Error::WidthMismatch);
    }
    Ok(())
}

/// One-dimensional pair Wigner term.
pub fn pair_wigner_1d(k1: &Mode, k2: &Mode, p: f64, x: f64, hbar: f64) -> Complex64 {
    let (pa, xa) = pair_centers(k1, k2, hbar);
    let s2 = k1.width * k1.width;
    let h2 = hbar * hbar;
    let dp = p - pa;
    let dx = x - xa;
    let e = -s2 / (2.0 * h2) * (k1.p * k1.p + k2.p * k2.p) - dx * dx / s2 + s2 / h2 * (pa * pa - dp * dp);
    e.exp() / (PI * hbar)
}

/// `∏ₙ W_{k1k2,n}(pₙ, xₙ)`.
pub fn pair_wigner(k1: &BasisState, k2: &BasisState, p: &[f64], x: &[f64], hbar: f64) -> Result<Complex64> {
    check_shared_widths(k1, k2)?;
    check_point(k1.dim(), p, x)?;
    Ok((0..k1.dim()).map(|n| pair_wigner_1d(&k1.mode(n), &k2.mode(n), p[n], x[n], hbar)).product())
}

pub(crate) fn check_point(dim: usize, p: &[f64], x: &[f64]) -> Result<()> {
    if p.len() != dim || x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: p.len().max(x.len()) });
    }
    Ok(())
}

/// One dimension of a pair Husimi term, kept in factored form so that products
/// with `f̄` can be formed without overflow.
#[derive(Clone, Copy, Debug)]
pub struct HusimiFactor {
    pub p_avg: Complex64,
    pub x_avg: Complex64,
    /// Real prefactor.
    pub pref: f64,
    /// Exponent without the momentum-Gaussian part.
    pub rest: Complex64,
    /// `s̄²`, so the full exponent is `rest - s̄²(p - p̄avg)²`.
    pub s_sq: f64,
    /// `ς² + 2ϖx²`, the position variance scale.
    pub x_var: f64,
    pub p: f64,
    pub x: f64,
}

impl HusimiFactor {
    pub fn new(k1: &Mode, k2: &Mode, wp: f64, wx: f64, p: f64, x: f64, hbar: f64) -> Self {
        let (pa, xa) = pair_centers(k1, k2, hbar);
        let s2 = k1.width * k1.width;
        let h2 = hbar * hbar;
        let x_var = s2 + 2.0 * wx * wx;
        let p_var = 2.0 * s2 * wp * wp + h2;
        let dx = xa - x;
        HusimiFactor {
            p_avg: pa,
            x_avg: xa,
            pref: k1.width / (PI * (x_var * p_var).sqrt()),
            rest: -(k1.p * k1.p + k2.p * k2.p) * s2 / (2.0 * h2) + pa * pa * s2 / h2 - dx * dx / x_var,
            s_sq: s2 / p_var,
            x_var,
            p,
            x,
        }
    }

    pub fn z(&self) -> Complex64 {
        self.p - self.p_avg
    }

    pub fn exponent(&self) -> Complex64 {
        let z = self.z();
        self.rest - self.s_sq * z * z
    }

    pub fn value(&self) -> Complex64 {
        self.pref * self.exponent().exp()
    }

    /// `∂Q/∂x / Q`.
    pub fn x_log_derivative(&self) -> Complex64 {
        2.0 * (self.x_avg - self.x) / self.x_var
    }

    /// `∫_{-∞}^{p} Q dp' = f̄(p - p̄avg) Q`, evaluated in scaled form.
    pub fn cumulative_p(&self) -> Scaled {
        let s = self.s_sq.sqrt();
        erfc_scaled(-s * self.z())
            .mul(Scaled::exp(self.rest))
            .scale(Complex64::new(self.pref * PI.sqrt() / (2.0 * s), 0.0))
    }
}

/// One-dimensional pair Husimi term.
pub fn pair_husimi_1d(k1: &Mode, k2: &Mode, wp: f64, wx: f64, p: f64, x: f64, hbar: f64) -> Complex64 {
    HusimiFactor::new(k1, k2, wp, wx, p, x, hbar).value()
}

/// `∏ₙ Q_{k1k2,n}(pₙ, xₙ)`.
pub fn pair_husimi(
    k1: &BasisState,
    k2: &BasisState,
    widths: &HusimiWidths,
    p: &[f64],
    x: &[f64],
    hbar: f64,
) -> Result<Complex64> {
    check_shared_widths(k1, k2)?;
    check_point(k1.dim(), p, x)?;
    widths.check_dim(k1.dim())?;
    Ok((0..k1.dim())
        .map(|n| pair_husimi_1d(&k1.mode(n), &k2.mode(n), widths.p[n], widths.x[n], p[n], x[n], hbar))
        .product())
}

/// `s̄ = ς/√(2ς²ϖp² + ħ²)` for one dimension.
pub fn f_bar_scale(width: f64, wp: f64, hbar: f64) -> f64 {
    let s2 = width * width;
    (s2 / (2.0 * s2 * wp * wp + hbar * hbar)).sqrt()
}

/// `f̄(z) = (√π/2s̄) exp(z²s̄²)(1 + erf(zs̄))` for dimension `n`, in scaled form.
pub fn f_bar_scaled(k1: &BasisState, k2: &BasisState, n: usize, widths: &HusimiWidths, z: Complex64, hbar: f64) -> Result<Scaled> {
    check_shared_widths(k1, k2)?;
    widths.check_dim(k1.dim())?;
    if n >= k1.dim() {
        return Err(Error::DimensionMismatch { expected: k1.dim(), found: n + 1 });
    }
    let s = f_bar_scale(k1.widths[n], widths.p[n], hbar);
    Ok(faddeeva_scaled(-I * s * z).scale(Complex64::new(PI.sqrt() / (2.0 * s), 0.0)))
}

/// `f̄(z)`; overflows to infinity only when the true value does.
pub fn f_bar(k1: &BasisState, k2: &BasisState, n: usize, widths: &HusimiWidths, z: Complex64, hbar: f64) -> Result<Complex64> {
    Ok(f_bar_scaled(k1, k2, n, widths, z, hbar)?.value())
}

/// `f̄(p - p̄avg) Q''` for one dimension, the form that stays finite.
pub fn f_bar_times_husimi(k1: &Mode, k2: &Mode, wp: f64, wx: f64, p: f64, x: f64, hbar: f64) -> Complex64 {
    HusimiFactor::new(k1, k2, wp, wx, p, x, hbar).cumulative_p().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use phaseflow_oracle::{integrate, integrate_2d};

    fn wigner_quad(k1: &Mode, k2: &Mode, p: f64, x: f64, hbar: f64) -> Complex64 {
        integrate(
            |y| (-I * p * y / hbar).exp() * k1.value(x - y / 2.0, hbar).conj() * k2.value(x + y / 2.0, hbar),
            -40.0,
            40.0,
            1e-15,
            1e-13,
        ) / (2.0 * PI * hbar)
    }

    #[test]
    fn wigner_center_value() {
        let k = Mode::new(0.4, -1.0, 0.7);
        assert!((pair_wigner_1d(&k, &k, 0.4, -1.0, 1.0) - 1.0 / PI).norm() < 1e-15);
    }

    #[test]
    fn wigner_matches_transform() {
        for hbar in [1.0, 0.6] {
            let k1 = Mode::new(0.8, 1.1, 0.6);
            let k2 = Mode::new(-0.8, -1.1, 0.6);
            for (p, x) in [(0.0, 0.0), (0.3, -0.5), (-1.2, 0.9)] {
                let got = pair_wigner_1d(&k1, &k2, p, x, hbar);
                let want = wigner_quad(&k1, &k2, p, x, hbar);
                assert!((got - want).norm() < 1e-12, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn husimi_diagonal_and_limit() {
        let k = Mode::new(0.0, 0.0, 0.5);
        let (wp, wx) = (1.0 / (2f64.sqrt() * 0.5), 0.5 / 2f64.sqrt());
        assert!((pair_husimi_1d(&k, &k, wp, wx, 0.0, 0.0, 1.0) - 1.0 / (2.0 * PI)).norm() < 1e-15);
        let k1 = Mode::new(0.3, 0.2, 0.5);
        let k2 = Mode::new(-0.5, 0.6, 0.5);
        let w = pair_wigner_1d(&k1, &k2, 0.1, 0.3, 1.0);
        let q = pair_husimi_1d(&k1, &k2, 1e-3, 1e-3, 0.1, 0.3, 1.0);
        assert!((w - q).norm() / w.norm() < 1e-3);
    }

    #[test]
    fn husimi_is_smoothed_wigner() {
        let hbar = 0.8;
        let k1 = Mode::new(0.3, 0.2, 0.55);
        let k2 = Mode::new(-0.5, 0.6, 0.55);
        let (wp, wx) = (0.9, 0.4);
        let (p, x) = (0.2, -0.1);
        let smoothed = integrate_2d(
            |u, v| {
                let kern = (-(u * u) / (2.0 * wp * wp) - v * v / (2.0 * wx * wx)).exp() / (2.0 * PI * wp * wx);
                pair_wigner_1d(&k1, &k2, p + u, x + v, hbar) * kern
            },
            (-10.0 * wp, 10.0 * wp),
            (-10.0 * wx, 10.0 * wx),
            1e-13,
            1e-12,
        );
        let q = pair_husimi_1d(&k1, &k2, wp, wx, p, x, hbar);
        assert!((q - smoothed).norm() < 1e-10, "{q} vs {smoothed}");
    }

    #[test]
    fn cumulative_matches_quadrature_and_survives_overflow() {
        let k1 = Mode::new(0.3, 0.2, 0.5);
        let k2 = Mode::new(-1.5, 0.6, 0.5);
        let (wp, wx) = (1.1, 0.4);
        let cum = integrate(|q| pair_husimi_1d(&k1, &k2, wp, wx, q, 0.3, 1.0), -30.0, 0.7, 1e-15, 1e-13);
        assert!((f_bar_times_husimi(&k1, &k2, wp, wx, 0.7, 0.3, 1.0) - cum).norm() < 1e-13);
        // Far in the tail of a distant pair the naive product is inf * 0.
        let far1 = Mode::new(-60.0, 0.0, 0.5);
        let far2 = Mode::new(60.0, 0.0, 0.5);
        let v = f_bar_times_husimi(&far1, &far2, wp, wx, 70.0, 0.0, 1.0);
        assert!(v.is_finite());
    }

    proptest::proptest! {
        #[test]
        fn swapping_the_pair_conjugates(
            p1 in -4.0..4.0f64, x1 in -4.0..4.0f64,
            p2 in -4.0..4.0f64, x2 in -4.0..4.0f64, w in 0.3..2.0f64,
            p in -5.0..5.0f64, x in -5.0..5.0f64,
        ) {
            // Pair terms are only defined for a shared width.
            let (k1, k2) = (Mode::new(p1, x1, w), Mode::new(p2, x2, w));
            let (a, b) = (pair_wigner_1d(&k1, &k2, p, x, 1.0), pair_wigner_1d(&k2, &k1, p, x, 1.0));
            proptest::prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
            let (a, b) = (pair_husimi_1d(&k1, &k2, 0.9, 0.6, p, x, 1.0), pair_husimi_1d(&k2, &k1, 0.9, 0.6, p, x, 1.0));
            proptest::prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
            // Diagonal terms are real and non-negative.
            let d = pair_husimi_1d(&k1, &k1, 0.9, 0.6, p, x, 1.0);
            proptest::prop_assert!(d.im.abs() <= 1e-14 * (1.0 + d.re) && d.re >= 0.0);
        }
    }
}
