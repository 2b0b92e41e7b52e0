//! Single-qubit density matrices in the `{|e⟩, |g⟩}` basis.

use core::fmt;

use crate::C64;
#[allow(unused_imports)] // only used without std
use num_traits::Float;

/// Raw 2×2 complex matrix, row-major, index 0 = `|e⟩`, index 1 = `|g⟩`.
pub type Mat2 = [[C64; 2]; 2];

pub(crate) const ZERO2: Mat2 = [[C64::new(0.0, 0.0); 2]; 2];

/// `|u⟩⟨v|`.
pub(crate) fn outer(u: &[C64; 2], v: &[C64; 2]) -> Mat2 {
    [
        [u[0] * v[0].conj(), u[0] * v[1].conj()],
        [u[1] * v[0].conj(), u[1] * v[1].conj()],
    ]
}

pub(crate) fn add_scaled(acc: &mut Mat2, m: &Mat2, s: C64) {
    for i in 0..2 {
        for j in 0..2 {
            acc[i][j] += m[i][j] * s;
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite 2×2 matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct QubitDensityMatrix {
    m: Mat2,
}

impl fmt::Debug for QubitDensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entry(&self.m[0]).entry(&self.m[1]).finish()
    }
}

impl QubitDensityMatrix {
    /// Accepts any matrix proportional to a density matrix and rescales it to
    /// unit trace. The Hermitian part is kept; the anti-Hermitian residue of
    /// rounding is discarded.
    pub fn from_unnormalized(m: &Mat2) -> Self {
        let tr = m[0][0].re + m[1][1].re;
        let off = (m[0][1] + m[1][0].conj()) * 0.5;
        Self {
            m: [
                [C64::new(m[0][0].re / tr, 0.0), off / tr],
                [off.conj() / tr, C64::new(m[1][1].re / tr, 0.0)],
            ],
        }
    }

    pub fn pure(ket: &[C64; 2]) -> Self {
        Self::from_unnormalized(&outer(ket, ket))
    }

    pub fn maximally_mixed() -> Self {
        Self {
            m: [
                [C64::new(0.5, 0.0), C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
            ],
        }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                err = err.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        err
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = (self.m[0][1] + self.m[1][0].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - r, mean + r]
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
    pub fn expectation(&self, ket: &[C64; 2]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += ket[i].conj() * self.m[i][j] * ket[j];
            }
        }
        acc.re
    }

    /// `σ_z ρ σ_z`: flips the sign of the coherences.
    pub fn sigma_z_conjugated(&self) -> Self {
        let mut m = self.m;
        m[0][1] = -m[0][1];
        m[1][0] = -m[1][0];
        Self { m }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut err = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                err = err.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        err
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_state_is_rank_one() {
        let s = 0.5_f64.sqrt();
        let rho = QubitDensityMatrix::pure(&[C64::new(s, 0.0), C64::new(0.0, s)]);
        let [lo, hi] = rho.eigenvalues();
        assert!(lo.abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        assert!(rho.hermiticity_error() == 0.0);
        assert!((rho.expectation(&[C64::new(s, 0.0), C64::new(0.0, s)]) - 1.0).abs() < 1e-15);
        assert!(
            rho.expectation(&[C64::new(s, 0.0), C64::new(0.0, -s)])
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn normalization_rescales_trace() {
        let m = [
            [C64::new(2.0, 0.0), C64::new(0.5, 0.5)],
            [C64::new(0.5, -0.5), C64::new(2.0, 0.0)],
        ];
        let rho = QubitDensityMatrix::from_unnormalized(&m);
        assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((rho.matrix()[0][1] - C64::new(0.125, 0.125)).norm() < 1e-15);
    }
}
