use super::{check_point, Ansatz, HusimiWidths};
use crate::gauss::{pair_husimi_1d, pair_wigner_1d};
use crate::Result;

/// `W(p, x) = Σ a*_{k1} a_{k2} W_{k1k2}(p, x)`.
pub fn wigner(ansatz: &Ansatz, p: &[f64], x: &[f64], hbar: f64) -> Result<f64> {
    check_point(ansatz, p, x)?;
    let mut total = 0.0;
    for (i, j, c, mult) in ansatz.hermitian_pairs() {
        let (bi, bj) = (&ansatz.basis[i], &ansatz.basis[j]);
        let w: num_complex::Complex64 =
            (0..ansatz.dim()).map(|n| pair_wigner_1d(&bi.mode(n), &bj.mode(n), p[n], x[n], hbar)).product();
        total += mult * (c * w).re;
    }
    Ok(total)
}

/// Generalized Husimi density.
pub fn husimi(ansatz: &Ansatz, widths: &HusimiWidths, p: &[f64], x: &[f64], hbar: f64) -> Result<f64> {
    check_point(ansatz, p, x)?;
    widths.check_dim(ansatz.dim())?;
    let mut total = 0.0;
    for (i, j, c, mult) in ansatz.hermitian_pairs() {
        let (bi, bj) = (&ansatz.basis[i], &ansatz.basis[j]);
        let q: num_complex::Complex64 = (0..ansatz.dim())
            .map(|n| pair_husimi_1d(&bi.mode(n), &bj.mode(n), widths.p[n], widths.x[n], p[n], x[n], hbar))
            .product();
        total += mult * (c * q).re;
    }
    Ok(total)
}
