//! Smoothed transform of `χ₁*(u) uʳ χ₂(u)`-type products with unequal widths,
//! the building block of the approximate momentum flux.
//!
//! With `u = x' - λ/2` on the bra and `z = x' + λ/2` on the ket the transform is
//! `(1/2πħ) ∫∫ G(x - (u+z)/2) exp(-ip(z-u)/ħ - ϖp²(z-u)²/2ħ²) χ₁*(u) zʳ χ₂(z) du dz`,
//! a bivariate Gaussian moment. Integrating out `u` leaves a Gaussian in `z` whose
//! moments follow `m_{k+1} = Z m_k + k v m_{k-1}`.

use super::{Mode, MAX_ORDER};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[allow(clippy::too_many_arguments)]
pub fn i4_integral(r: usize, k1: &Mode, k2: &Mode, wp: f64, wx: f64, p: f64, x: f64, hbar: f64) -> Result<Complex64> {
    if r > MAX_ORDER {
        return Err(Error::OrderTooHigh { order: r, max: MAX_ORDER });
    }
    Ok(i4_moments(r, k1, k2, wp, wx, p, x, hbar)[r])
}

/// All orders `0..=rmax` at once.
#[allow(clippy::too_many_arguments)]
pub fn i4_moments(rmax: usize, k1: &Mode, k2: &Mode, wp: f64, wx: f64, p: f64, x: f64, hbar: f64) -> Vec<Complex64> {
    let (s1, s2) = (k1.width * k1.width, k2.width * k2.width);
    let wx2 = wx * wx;
    let h2 = hbar * hbar;
    let shared = 1.0 / (8.0 * wx2) + wp * wp / (2.0 * h2);
    let quu = shared + 0.5 / s1;
    let qzz = shared + 0.5 / s2;
    let quz = 1.0 / (4.0 * wx2) - wp * wp / h2;
    let lu = Complex64::new(x / (2.0 * wx2) + k1.x / s1, (p - k1.p) / hbar);
    let lz = Complex64::new(x / (2.0 * wx2) + k2.x / s2, (k2.p - p) / hbar);
    let k = Complex64::new(
        -x * x / (2.0 * wx2) - k1.x * k1.x / (2.0 * s1) - k2.x * k2.x / (2.0 * s2),
        (k1.p * k1.x - k2.p * k2.x) / hbar,
    );
    let az = qzz - quz * quz / (4.0 * quu);
    let bz = lz - lu * quz / (2.0 * quu);
    let cz = k + lu * lu / (4.0 * quu);
    let g0 = 1.0 / ((2.0 * PI).sqrt() * wx);
    let pref = g0 * (k1.ln_norm() + k2.ln_norm()).exp() * (PI / quu).sqrt() * (PI / az).sqrt() / (2.0 * PI * hbar);
    let base = pref * (cz + bz * bz / (4.0 * az)).exp();
    let zc = bz / (2.0 * az);
    let v = 1.0 / (2.0 * az);
    let mut m = vec![Complex64::new(1.0, 0.0)];
    if rmax >= 1 {
        m.push(zc);
    }
    for j in 1..rmax {
        let next = zc * m[j] + j as f64 * v * m[j - 1];
        m.push(next);
    }
    m.into_iter().map(|mj| mj * base).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::pair_husimi_1d;
    use phaseflow_oracle::integrate_2d;

    fn quad(r: i32, k1: &Mode, k2: &Mode, wp: f64, wx: f64, p: f64, x: f64) -> Complex64 {
        let g0 = 1.0 / ((2.0 * PI).sqrt() * wx);
        integrate_2d(
            |u, z| {
                let c = (u + z) / 2.0 - x;
                let l = z - u;
                g0 * (-c * c / (2.0 * wx * wx)).exp()
                    * Complex64::new(-wp * wp * l * l / 2.0, -p * l).exp()
                    * k1.value(u, 1.0).conj()
                    * z.powi(r)
                    * k2.value(z, 1.0)
            },
            (-8.0, 8.0),
            (-8.0, 8.0),
            1e-13,
            1e-11,
        ) / (2.0 * PI)
    }

    #[test]
    fn order_zero_equal_widths_is_husimi() {
        let k1 = Mode::new(0.7, -0.3, 0.5);
        let k2 = Mode::new(-0.4, 0.5, 0.5);
        let got = i4_integral(0, &k1, &k2, 0.8, 0.45, 0.3, 0.2, 1.0).unwrap();
        let want = pair_husimi_1d(&k1, &k2, 0.8, 0.45, 0.3, 0.2, 1.0);
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn unequal_widths_match_quadrature() {
        let k1 = Mode::new(0.7, -0.3, 0.5);
        let k2 = Mode::new(-0.4, 0.5, 0.6);
        for r in 0..3 {
            let got = i4_integral(r, &k1, &k2, 0.8, 0.45, 0.3, 0.2, 1.0).unwrap();
            let want = quad(r as i32, &k1, &k2, 0.8, 0.45, 0.3, 0.2);
            assert!((got - want).norm() < 1e-10, "r={r}: {got} vs {want}");
        }
    }
}
