//! Brute-force numerical references for the test suites.
//!
//! Nothing here knows about coherent states or closed forms; every routine is
//! plain quadrature over a user closure so it can adjudicate the analytic code.

use num_complex::Complex64;

// 15-point Kronrod nodes on [0, 1] (symmetric) with Kronrod and embedded Gauss weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const INITIAL_PANELS: usize = 64;

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += s * WGK[j];
        if j % 2 == 1 {
            rg += s * WG[j / 2];
        }
    }
    ((rk * h), ((rk - rg) * h).norm())
}

/// Adaptive Gauss-Kronrod (7/15) integral of a complex integrand over `[a, b]`.
///
/// Starts from 64 equal panels, then subdivides the panel with the largest error estimate until the total
/// estimate is below `max(abs_tol, rel_tol*|I|)` or the interval budget runs out.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Complex64 {
    // Start from a uniform split so narrow features cannot hide between nodes.
    let mut pieces = Vec::with_capacity(INITIAL_PANELS);
    for k in 0..INITIAL_PANELS {
        let lo = a + (b - a) * k as f64 / INITIAL_PANELS as f64;
        let hi = a + (b - a) * (k + 1) as f64 / INITIAL_PANELS as f64;
        let (v, e) = kronrod(&mut f, lo, hi);
        pieces.push((lo, hi, v, e));
    }
    for _ in 0..20_000 {
        let total: Complex64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) {
            break;
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod(&mut f, lo, mid);
        let (v2, e2) = kronrod(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    pieces.iter().map(|p| p.2).sum()
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, abs_tol, rel_tol).re
}

/// Nested 2-D quadrature over the rectangle `[ax, bx] x [ay, by]`.
pub fn integrate_2d<F: FnMut(f64, f64) -> Complex64>(
    mut f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    abs_tol: f64,
    rel_tol: f64,
) -> Complex64 {
    integrate(
        |x| integrate(|y| f(x, y), ay, by, 0.1 * abs_tol, 0.1 * rel_tol),
        ax,
        bx,
        abs_tol,
        rel_tol,
    )
}

/// Composite trapezoid sum of equally spaced samples.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => h * (samples[1..n - 1].iter().sum::<f64>() + 0.5 * (samples[0] + samples[n - 1])),
    }
}

/// Fourth-order central difference of a scalar function.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central difference of a complex-valued function.
pub fn derivative_c<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
    (f(x - 2.0 * h) - f(x - h) * 8.0 + f(x + h) * 8.0 - f(x + 2.0 * h)) / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let v = integrate_real(|x| (-x * x).exp(), -10.0, 10.0, 1e-14, 1e-13);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_integral() {
        // ∫ e^{-x^2} cos(3x) = √π e^{-9/4}
        let v = integrate_real(|x| (-x * x).exp() * (3.0 * x).cos(), -10.0, 10.0, 1e-14, 1e-13);
        assert!((v - std::f64::consts::PI.sqrt() * (-2.25f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn two_dimensional() {
        let v = integrate_2d(
            |x, y| Complex64::new((-x * x - 2.0 * y * y).exp(), 0.0),
            (-8.0, 8.0),
            (-8.0, 8.0),
            1e-12,
            1e-12,
        );
        let exact = std::f64::consts::PI / 2f64.sqrt();
        assert!((v.re - exact).abs() < 1e-10);
    }
}
