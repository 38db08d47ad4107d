use super::{check_point, Ansatz, Flux, HusimiWidths, Physics};
use crate::gauss::pair::HusimiFactor;
use crate::gauss::smoothed::i4_moments;
use crate::gauss::{i0_flux_integral, pair::pair_centers, pair_wigner_1d, Mode, ZERO};
use crate::potential::{Potential, PotentialTerm};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Sinc-series truncation used when the potential is not a low-degree polynomial.
pub const DEFAULT_SINC_ORDER: usize = 8;

/// How the smoothed momentum flux is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxBackend {
    /// Closed-form smoothing of the full nonlocal Wigner flux.
    #[default]
    Exact,
    /// Local harmonic approximation, `-Re Σ a*a K∘(χ₁* V' χ₂)`.
    Approximate,
}

impl std::str::FromStr for FluxBackend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(FluxBackend::Exact),
            "approximate" | "approx" => Ok(FluxBackend::Approximate),
            _ => Err(Error::Config(format!("unknown flux backend '{s}'"))),
        }
    }
}

/// Product of all entries except index `skip`.
pub(crate) fn product_except(values: &[Complex64], skip: usize) -> Complex64 {
    values.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| v).product()
}

fn hermite_values(t: Complex64, nmax: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(1.0, 0.0), 2.0 * t];
    for n in 1..nmax {
        let next = 2.0 * t * h[n] - 2.0 * n as f64 * h[n - 1];
        h.push(next);
    }
    h.truncate(nmax + 1);
    h
}

/// Wigner flow `(J^W_p, J^W_x)` with the momentum component from the sinc
/// series truncated after `truncation_order + 1` terms.
pub fn wigner_flow(
    ansatz: &Ansatz,
    potential: &Potential,
    physics: &Physics,
    p: &[f64],
    x: &[f64],
    truncation_order: usize,
) -> Result<Flux> {
    check_point(ansatz, p, x)?;
    let dim = ansatz.dim();
    let hbar = physics.hbar;
    for n in 0..dim {
        if let Some(deg) = potential.polynomial_degree(n) {
            if deg > 2 * truncation_order + 2 {
                return Err(Error::Config(format!(
                    "sinc truncation order {truncation_order} cannot represent a degree-{deg} polynomial exactly"
                )));
            }
        }
    }
    let mut flux = Flux::zeros(dim);
    // series weights (-1)^k (ħ/2)^{2k} / (2k+1)! times ∂^{2k+1}V
    let mut series: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for n in 0..dim {
        let mut fact = 1.0;
        let mut coeffs = Vec::with_capacity(truncation_order + 1);
        for k in 0..=truncation_order {
            if k > 0 {
                fact *= (2 * k) as f64 * (2 * k + 1) as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * (0.5 * hbar).powi(2 * k as i32) / fact;
            coeffs.push(w * potential.derivative_1d(n, x[n], 2 * k + 1));
        }
        series.push(coeffs);
    }
    let mut factors = vec![ZERO; dim];
    for (i, j, c, mult) in ansatz.hermitian_pairs() {
        let (bi, bj) = (&ansatz.basis[i], &ansatz.basis[j]);
        for n in 0..dim {
            factors[n] = pair_wigner_1d(&bi.mode(n), &bj.mode(n), p[n], x[n], hbar);
        }
        let w: Complex64 = factors.iter().product();
        for n in 0..dim {
            flux.x[n] += mult * (c * w).re * p[n] / physics.masses[n];
            let (pa, _) = pair_centers(&bi.mode(n), &bj.mode(n), hbar);
            let s = bi.widths[n] / hbar;
            let h = hermite_values(s * (p[n] - pa), 2 * truncation_order);
            let mut acc = ZERO;
            let mut ck = 1.0;
            for (k, coef) in series[n].iter().enumerate() {
                acc += ck * h[2 * k] * *coef;
                ck *= s * s;
            }
            flux.p[n] -= mult * (c * w * acc).re;
        }
    }
    Ok(flux)
}

/// `exp(v₂y² + v₁y)·χ(y) = c'·χ'(y)` with `χ'` a normalized coherent state.
pub(crate) fn absorb_envelope(mode: &Mode, v2: f64, v1: Complex64, hbar: f64) -> (Complex64, Mode) {
    let s2 = mode.width * mode.width;
    let denom = 1.0 - 2.0 * v2 * s2;
    let width = mode.width / denom.sqrt();
    let w2 = width * width;
    let x = w2 * (mode.x / s2 + v1.re);
    let p = mode.p + hbar * v1.im;
    let ln_c = Complex64::new(
        0.5 * (width / mode.width).ln() - mode.x * mode.x / (2.0 * s2) + x * x / (2.0 * w2),
        (p * x - mode.p * mode.x) / hbar,
    );
    (ln_c.exp(), Mode::new(p, x, width))
}

fn approximate_term(term: &PotentialTerm, k1: &Mode, k2: &Mode, wp: f64, wx: f64, p: f64, x: f64, hbar: f64) -> Complex64 {
    let poly = term.derivative_poly(1);
    let (scale, shifted) = absorb_envelope(k2, term.quad_coeff, term.lin_coeff, hbar);
    let m = i4_moments(poly.len() - 1, k1, &shifted, wp, wx, p, x, hbar);
    scale * poly.iter().zip(&m).map(|(a, b)| a * b).sum::<Complex64>()
}

/// Smoothed momentum flux of a monomial of degree at most two, where the Wigner
/// flux is the local `-V'(x) W` and smoothing only needs `Q` and `∂Q/∂x`.
fn local_term_flux(term: &PotentialTerm, f: &HusimiFactor, q: Complex64, wx: f64, x: f64) -> Option<Complex64> {
    if !term.is_polynomial() {
        return None;
    }
    match term.power {
        0 => Some(ZERO),
        1 => Some(-term.coefficient * q),
        2 => Some(-2.0 * term.coefficient * (x * q + wx * wx * q * f.x_log_derivative())),
        _ => None,
    }
}

/// Husimi flow in the default gauge, `K∘J^W`.
pub fn husimi_flow_default(
    ansatz: &Ansatz,
    potential: &Potential,
    widths: &HusimiWidths,
    physics: &Physics,
    p: &[f64],
    x: &[f64],
    backend: FluxBackend,
) -> Result<Flux> {
    check_point(ansatz, p, x)?;
    widths.check_dim(ansatz.dim())?;
    let dim = ansatz.dim();
    let hbar = physics.hbar;
    let mut flux = Flux::zeros(dim);
    let mut factors = vec![ZERO; dim];
    let mut hf: Vec<HusimiFactor> = Vec::with_capacity(dim);
    for (i, j, c, mult) in ansatz.hermitian_pairs() {
        let (bi, bj) = (&ansatz.basis[i], &ansatz.basis[j]);
        hf.clear();
        for n in 0..dim {
            let f = HusimiFactor::new(&bi.mode(n), &bj.mode(n), widths.p[n], widths.x[n], p[n], x[n], hbar);
            factors[n] = f.value();
            hf.push(f);
        }
        let q: Complex64 = factors.iter().product();
        for n in 0..dim {
            let s2 = bi.widths[n] * bi.widths[n];
            let kappa = hbar * hbar / (hbar * hbar + 2.0 * s2 * widths.p[n] * widths.p[n]);
            let pa = hf[n].p_avg;
            flux.x[n] += mult * (c * q * (pa + kappa * (p[n] - pa))).re / physics.masses[n];
        }
        for n in 0..dim {
            let others = product_except(&factors, n);
            let (m1, m2) = (bi.mode(n), bj.mode(n));
            match backend {
                FluxBackend::Exact => {
                    let mut jp = ZERO;
                    for t in potential.terms_on(n) {
                        jp += match local_term_flux(t, &hf[n], factors[n], widths.x[n], x[n]) {
                            Some(v) => v,
                            None => i0_flux_integral(t, &m1, &m2, widths.p[n], widths.x[n], p[n], x[n], hbar)?,
                        };
                    }
                    flux.p[n] += mult * (c * others * jp).re;
                }
                FluxBackend::Approximate => {
                    let mut fwd = ZERO;
                    let mut bwd = ZERO;
                    for t in potential.terms_on(n) {
                        fwd += approximate_term(t, &m1, &m2, widths.p[n], widths.x[n], p[n], x[n], hbar);
                        if i != j {
                            bwd += approximate_term(t, &m2, &m1, widths.p[n], widths.x[n], p[n], x[n], hbar);
                        }
                    }
                    // both orderings of the pair, since this kernel is not Hermitian
                    let total = c * others * fwd + c.conj() * others.conj() * bwd;
                    flux.p[n] -= total.re;
                }
            }
        }
    }
    Ok(flux)
}
