//! Pairwise basis matrices: overlaps, Hamiltonian and displacement elements.

use crate::fields::{product_except, Ansatz, Physics};
use crate::gauss::{displacement_1d, momentum_sq_1d, overlap_1d, BasisState};
use crate::potential::Potential;
use num_complex::Complex64;

/// Dense `K × K` complex matrices stored row-major, `m[k * K + l] = ⟨χ_k|·|χ_l⟩`.
#[derive(Clone, Debug)]
pub struct BasisMatrices {
    pub size: usize,
    pub overlap: Vec<Complex64>,
    pub hamiltonian: Vec<Complex64>,
    /// Per dimension: `⟨χ_k|(x̂_n - x̄_{l,n})|χ_l⟩`.
    pub displacement: Vec<Vec<Complex64>>,
}

impl BasisMatrices {
    pub fn new(basis: &[BasisState], potential: &Potential, physics: &Physics) -> Self {
        let k = basis.len();
        let dims = basis.first().map_or(0, |b| b.dim());
        let hbar = physics.hbar;
        let mut overlap = vec![Complex64::new(0.0, 0.0); k * k];
        let mut hamiltonian = overlap.clone();
        let mut displacement = vec![overlap.clone(); dims];
        let mut s1 = vec![Complex64::new(0.0, 0.0); dims];
        let mut h1 = s1.clone();
        let mut d1 = s1.clone();
        for i in 0..k {
            for j in 0..k {
                for n in 0..dims {
                    let (a, b) = (basis[i].mode(n), basis[j].mode(n));
                    s1[n] = overlap_1d(&a, &b, hbar);
                    d1[n] = displacement_1d(&a, &b, hbar);
                    h1[n] = momentum_sq_1d(&a, &b, hbar) / (2.0 * physics.masses[n])
                        + potential.terms_on(n).map(|t| t.element_1d(&a, &b, hbar)).sum::<Complex64>();
                }
                let idx = i * k + j;
                overlap[idx] = s1.iter().product();
                let mut h = Complex64::new(0.0, 0.0);
                for n in 0..dims {
                    let rest = product_except(&s1, n);
                    h += h1[n] * rest;
                    displacement[n][idx] = d1[n] * rest;
                }
                hamiltonian[idx] = h;
            }
        }
        BasisMatrices { size: k, overlap, hamiltonian, displacement }
    }

    pub fn s(&self, k: usize, l: usize) -> Complex64 {
        self.overlap[k * self.size + l]
    }

    pub fn h(&self, k: usize, l: usize) -> Complex64 {
        self.hamiltonian[k * self.size + l]
    }

    /// `Σ_l M_kl a_l`.
    pub fn apply(m: &[Complex64], a: &[Complex64]) -> Vec<Complex64> {
        let k = a.len();
        (0..k).map(|i| (0..k).map(|j| m[i * k + j] * a[j]).sum()).collect()
    }

    /// `⟨ψ|ψ⟩` and `⟨ψ|Ĥ|ψ⟩` for amplitudes `a`.
    pub fn norm_and_energy(&self, a: &[Complex64]) -> (f64, f64) {
        let sa = Self::apply(&self.overlap, a);
        let ha = Self::apply(&self.hamiltonian, a);
        let n: Complex64 = a.iter().zip(&sa).map(|(x, y)| x.conj() * y).sum();
        let e: Complex64 = a.iter().zip(&ha).map(|(x, y)| x.conj() * y).sum();
        (n.re, e.re)
    }
}

/// Normalized energy expectation of an ansatz.
pub fn energy(ansatz: &Ansatz, potential: &Potential, physics: &Physics) -> f64 {
    let m = BasisMatrices::new(&ansatz.basis, potential, physics);
    let (n, e) = m.norm_and_energy(&ansatz.amplitudes);
    e / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use phaseflow_oracle::{derivative_c, integrate};

    #[test]
    fn hamiltonian_matches_quadrature() {
        let basis = [BasisState::scalar(0.4, -0.3, 0.5).unwrap(), BasisState::scalar(-1.0, 0.6, 0.5).unwrap()];
        let v = Potential::barrier();
        let phys = Physics::unit(1);
        let m = BasisMatrices::new(&basis, &v, &phys);
        let (a, b) = (basis[0].mode(0), basis[1].mode(0));
        let ket = |y: f64| b.value(y, 1.0);
        let q = integrate(
            |y| {
                let lap = derivative_c(|z| derivative_c(ket, z, 1e-3), y, 1e-3);
                a.value(y, 1.0).conj() * (-0.5 * lap + v.value(&[y]) * ket(y))
            },
            -12.0,
            12.0,
            1e-13,
            1e-12,
        );
        assert!((m.h(0, 1) - q).norm() < 1e-6, "{} vs {q}", m.h(0, 1));
        let hermitian = m.h(1, 0).conj();
        assert!((m.h(0, 1) - hermitian).norm() < 1e-12);
    }

    #[test]
    fn two_dimensional_factorization() {
        let k1 = BasisState::new(vec![0.3, -0.2], vec![0.1, 0.5], vec![0.7, 1.1]).unwrap();
        let k2 = BasisState::new(vec![-0.4, 0.6], vec![0.2, -0.3], vec![0.7, 1.1]).unwrap();
        let v = Potential::new(2, vec![crate::PotentialTerm::monomial(0.5, 2), crate::PotentialTerm::monomial(0.3, 4).on_dim(1)]).unwrap();
        let phys = Physics { hbar: 1.0, masses: vec![1.0, 2.0] };
        let m = BasisMatrices::new(&[k1.clone(), k2.clone()], &v, &phys);
        let m1 = |n: usize| {
            let pot = Potential::new(1, v.terms_on(n).map(|t| t.on_dim(0)).collect()).unwrap();
            let ph = Physics { hbar: 1.0, masses: vec![phys.masses[n]] };
            let b = |k: &BasisState| BasisState::scalar(k.centers_p[n], k.centers_x[n], k.widths[n]).unwrap();
            BasisMatrices::new(&[b(&k1), b(&k2)], &pot, &ph)
        };
        let (a, b) = (m1(0), m1(1));
        let expect = a.h(0, 1) * b.s(0, 1) + a.s(0, 1) * b.h(0, 1);
        assert!((m.h(0, 1) - expect).norm() < 1e-13);
    }
}
