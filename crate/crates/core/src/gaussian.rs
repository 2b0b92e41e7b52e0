//! Complex Gaussians `exp(q·x² + l·x + c)` and their closed-form inner products.

use core::f64::consts::PI;

use crate::C64;
#[allow(unused_imports)] // only used without std
use num_traits::Float;

/// The function `x ↦ exp(quad·x² + lin·x + offset)` on the real line.
///
/// Square integrable whenever `quad.re < 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexGaussian {
    pub quad: C64,
    pub lin: C64,
    pub offset: C64,
}

impl ComplexGaussian {
    pub fn eval(&self, x: f64) -> C64 {
        (self.quad * x * x + self.lin * x + self.offset).exp()
    }

    /// `∫ conj(self(x))·other(x) dx`, linear in `other`.
    ///
    /// Uses `∫ exp(−αx² + βx + γ) dx = √(π/α)·exp(β²/(4α) + γ)` for
    /// `Re α > 0`; `√` is the principal branch, which is the analytic
    /// continuation from real positive `α`.
    pub fn inner(&self, other: &Self) -> C64 {
        let alpha = -(self.quad.conj() + other.quad);
        let beta = self.lin.conj() + other.lin;
        let gamma = self.offset.conj() + other.offset;
        debug_assert!(
            alpha.re > 0.0,
            "inner product of non-normalizable Gaussians"
        );
        (C64::new(PI, 0.0) / alpha).sqrt() * (beta * beta / (alpha * 4.0) + gamma).exp()
    }

    /// `∫ |self(x)|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).re
    }
}

/// Probability density of a real normal distribution.
pub(crate) fn normal_pdf(x: f64, mean: f64, std_dev: f64) -> f64 {
    let z = (x - mean) / std_dev;
    (-0.5 * z * z).exp() / (std_dev * (2.0 * PI).sqrt())
}
