//! How well the position readout completes the teleportation.
//!
//! With `Φ_i^±` the n = 0 packets of atom `i` after its own interaction time,
//!
//! ```text
//! A = |Φ₁⁺(x₁)|²|Φ₂⁺(x₂)|² + |Φ₁⁻(x₁)|²|Φ₂⁻(x₂)|²      same-branch pairs
//! B = |Φ₁⁺(x₁)|²|Φ₂⁻(x₂)|² + |Φ₁⁻(x₁)|²|Φ₂⁺(x₂)|²      mixed pairs
//! C = (|Φ₂⁺(x₂)|² + |Φ₂⁻(x₂)|²)·2Re(Φ₁⁺(x₁)Φ₁⁻(x₁)*)
//! ```
//!
//! Contracting `ρ″` at `(x₁, x₂)` gives
//!
//! ```text
//! F_α  = ⟨α|ρ₁f|α⟩   = 1 − B sin²θ / (A + B + C cosθ)
//! F_α′ = ⟨α′|ρ₁f|α′⟩ = 1 − A sin²θ / (A + B + C cosθ)
//! ```
//!
//! and, since `sin²θ ≤ 1` and `C cosθ ≥ −|C|`, the θ-independent bounds
//! `F_α ≥ 1 − B/(A+B−|C|)` and `F_α′ ≥ 1 − A/(A+B−|C|)`.
//!
//! A frequently quoted variant of the fidelity has `sin²(θ/2)` and
//! `cos(θ/2)` in place of `sin²θ` and `cosθ`; it does not agree with `ρ₁f`
//! (at θ = π it fails to give `F_α = 1` for `|α⟩ = |g⟩`). It is available as
//! [`fidelity_pair_as_printed`] for comparison only.
//!
//! Positions are in units of `σ_x`; `A`, `B`, `C` are SI (1/m²).

use alloc::vec::Vec;

use thiserror::Error;

use crate::protocol::{Atom, InteractionTimes, WavepacketLabel};
use crate::wavepackets::{BranchSign, PhysicalParams};
use crate::C64;
#[allow(unused_imports)] // only used without std
use num_traits::Float;

/// Absolute floor (1/m², the scale of `A`, `B`, `C`) below which a
/// denominator is treated as zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FidelityError {
    #[error("fidelity denominator {0:e} is degenerate")]
    DegenerateDenominator(f64),
    #[error("branches are not distinguishable here (A + B − |C| = {0:e})")]
    NotDistinguishable(f64),
    #[error("a surface grid needs at least two points per axis and an increasing range")]
    InvalidGrid,
    #[error("eps_tau must be finite and non-negative, got {0}")]
    InvalidTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcValues {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// The four branch amplitudes at one position pair.
#[derive(Debug, Clone, Copy)]
struct PointBranches {
    /// `Φ₁^±(x₁)`, SI.
    f: [C64; 2],
    /// `|Φ₁^±(x₁)|²`
    p1: [f64; 2],
    /// `|Φ₂^±(x₂)|²`
    p2: [f64; 2],
}

impl PointBranches {
    fn at(x1: f64, x2: f64, times: &InteractionTimes, params: &PhysicalParams) -> Self {
        let s = params.sigma_x();
        let packet = |atom, branch| {
            WavepacketLabel::Deflected {
                atom,
                fock_n: 0,
                branch,
            }
            .resolve(times, params)
        };
        let [f1p, f1m] = BranchSign::BOTH.map(|b| packet(Atom::One, b));
        let [f2p, f2m] = BranchSign::BOTH.map(|b| packet(Atom::Two, b));
        Self {
            f: [f1p.amplitude(x1 * s), f1m.amplitude(x1 * s)],
            p1: [f1p.density(x1 * s), f1m.density(x1 * s)],
            p2: [f2p.density(x2 * s), f2m.density(x2 * s)],
        }
    }

    fn abc(&self) -> AbcValues {
        let [p1p, p1m] = self.p1;
        let [p2p, p2m] = self.p2;
        AbcValues {
            a: p1p * p2p + p1m * p2m,
            b: p1p * p2m + p1m * p2p,
            c: (p2p + p2m) * 2.0 * (self.f[0] * self.f[1].conj()).re,
        }
    }

    /// `A + B + C·κ` for `|κ| ≤ 1`, written so that no cancellation occurs:
    /// `(p2⁺+p2⁻)·[(1−|κ|)(p1⁺+p1⁻) + |κ|·|Φ₁⁺ + sgn(κ)Φ₁⁻|²]`.
    fn mixed_denominator(&self, kappa: f64) -> f64 {
        let sign = if kappa >= 0.0 { 1.0 } else { -1.0 };
        let coherent = (self.f[0] + self.f[1] * sign).norm_sqr();
        let k = kappa.abs();
        (self.p2[0] + self.p2[1]) * ((1.0 - k) * (self.p1[0] + self.p1[1]) + k * coherent)
    }

    /// `A + B − |C| = (p2⁺+p2⁻)·|Φ₁⁺ ∓ Φ₁⁻|²`, exactly zero for identical branches.
    fn gap(&self) -> f64 {
        let interference = (self.f[0] * self.f[1].conj()).re;
        let sign = if interference >= 0.0 { -1.0 } else { 1.0 };
        (self.p2[0] + self.p2[1]) * (self.f[0] + self.f[1] * sign).norm_sqr()
    }
}

pub fn abc(x1: f64, x2: f64, times: &InteractionTimes, params: &PhysicalParams) -> AbcValues {
    PointBranches::at(x1, x2, times, params).abc()
}

/// `(F_α, F_α′)` at one position pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPair {
    pub alpha: f64,
    pub alpha_prime: f64,
    /// False when either value left `[0, 1]` by more than rounding; such a
    /// value is reported as computed, never clamped.
    pub in_range: bool,
}

impl FidelityPair {
    fn new(alpha: f64, alpha_prime: f64) -> Self {
        let ok = |f: f64| (-1e-9..=1.0 + 1e-9).contains(&f);
        Self {
            alpha,
            alpha_prime,
            in_range: ok(alpha) && ok(alpha_prime),
        }
    }
}

pub fn fidelity_pair(
    x1: f64,
    x2: f64,
    theta: f64,
    times: &InteractionTimes,
    params: &PhysicalParams,
) -> Result<FidelityPair, FidelityError> {
    let pb = PointBranches::at(x1, x2, times, params);
    let AbcValues { a, b, .. } = pb.abc();
    let denom = pb.mixed_denominator(theta.cos());
    if !(denom > DEGENERACY_THRESHOLD) {
        return Err(FidelityError::DegenerateDenominator(denom));
    }
    let s2 = theta.sin().powi(2);
    Ok(FidelityPair::new(
        1.0 - b * s2 / denom,
        1.0 - a * s2 / denom,
    ))
}

/// The half-angle variant, `1 − B sin²(θ/2)/(A + B + C cos(θ/2))`; see the
/// module docs for why it is not the fidelity of `ρ₁f`.
pub fn fidelity_pair_as_printed(
    x1: f64,
    x2: f64,
    theta: f64,
    times: &InteractionTimes,
    params: &PhysicalParams,
) -> Result<FidelityPair, FidelityError> {
    let pb = PointBranches::at(x1, x2, times, params);
    let AbcValues { a, b, .. } = pb.abc();
    let denom = pb.mixed_denominator((0.5 * theta).cos());
    if !(denom > DEGENERACY_THRESHOLD) {
        return Err(FidelityError::DegenerateDenominator(denom));
    }
    let s2 = (0.5 * theta).sin().powi(2);
    Ok(FidelityPair::new(
        1.0 - b * s2 / denom,
        1.0 - a * s2 / denom,
    ))
}

/// θ-independent lower bounds `(F̲_α, F̲_α′)`.
///
/// Where the branches overlap strongly the bounds go negative, which is
/// still a true (if empty) statement about a fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBounds {
    pub alpha: f64,
    pub alpha_prime: f64,
}

pub fn lower_bounds(
    x1: f64,
    x2: f64,
    times: &InteractionTimes,
    params: &PhysicalParams,
) -> Result<LowerBounds, FidelityError> {
    let pb = PointBranches::at(x1, x2, times, params);
    let AbcValues { a, b, .. } = pb.abc();
    let gap = pb.gap();
    if !(gap > DEGENERACY_THRESHOLD) {
        return Err(FidelityError::NotDistinguishable(gap));
    }
    Ok(LowerBounds {
        alpha: 1.0 - b / gap,
        alpha_prime: 1.0 - a / gap,
    })
}

/// Rectangular grid of position pairs, σ_x units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceGrid {
    pub x1_min: f64,
    pub x1_max: f64,
    pub x1_count: usize,
    pub x2_min: f64,
    pub x2_max: f64,
    pub x2_count: usize,
}

impl Default for SurfaceGrid {
    /// 201 × 201 over `[−10, 10]²`.
    fn default() -> Self {
        Self::square(10.0, 201)
    }
}

impl SurfaceGrid {
    pub fn square(half_width: f64, count: usize) -> Self {
        Self {
            x1_min: -half_width,
            x1_max: half_width,
            x1_count: count,
            x2_min: -half_width,
            x2_max: half_width,
            x2_count: count,
        }
    }

    pub fn validate(&self) -> Result<(), FidelityError> {
        let axis_ok =
            |lo: f64, hi: f64, n: usize| n >= 2 && lo.is_finite() && hi.is_finite() && lo < hi;
        if axis_ok(self.x1_min, self.x1_max, self.x1_count)
            && axis_ok(self.x2_min, self.x2_max, self.x2_count)
        {
            Ok(())
        } else {
            Err(FidelityError::InvalidGrid)
        }
    }

    /// Evenly spaced, end points included; symmetric ranges give exactly
    /// mirrored nodes.
    fn node(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        let last = (n - 1) as f64;
        (lo * (last - i as f64) + hi * i as f64) / last
    }

    pub fn x1(&self, i: usize) -> f64 {
        Self::node(self.x1_min, self.x1_max, self.x1_count, i)
    }

    pub fn x2(&self, j: usize) -> f64 {
        Self::node(self.x2_min, self.x2_max, self.x2_count, j)
    }

    pub fn len(&self) -> usize {
        self.x1_count * self.x2_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub x1: f64,
    pub x2: f64,
    /// `None` where the branches are not distinguishable. Stored bounds are
    /// floored at 0, which keeps them valid lower bounds.
    pub bounds: Option<LowerBounds>,
}

impl SurfacePoint {
    /// Bounds at one node, floored at 0; `None` where the branches cannot
    /// be told apart.
    pub fn evaluate(x1: f64, x2: f64, times: &InteractionTimes, params: &PhysicalParams) -> Self {
        let bounds = lower_bounds(x1, x2, times, params)
            .ok()
            .map(|lb| LowerBounds {
                alpha: lb.alpha.max(0.0),
                alpha_prime: lb.alpha_prime.max(0.0),
            });
        Self { x1, x2, bounds }
    }

    pub fn is_degenerate(&self) -> bool {
        self.bounds.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySurface {
    pub grid: SurfaceGrid,
    pub eps_tau: f64,
    /// Row-major: `x1` outer, `x2` inner.
    pub points: Vec<SurfacePoint>,
}

impl FidelitySurface {
    pub fn at(&self, i: usize, j: usize) -> &SurfacePoint {
        &self.points[i * self.grid.x2_count + j]
    }
}

/// Lower bounds on a grid with both atoms interacting for `ετ`.
pub fn fidelity_surface(
    grid: SurfaceGrid,
    eps_tau: f64,
    params: &PhysicalParams,
) -> Result<FidelitySurface, FidelityError> {
    grid.validate()?;
    if !(eps_tau.is_finite() && eps_tau >= 0.0) {
        return Err(FidelityError::InvalidTime(eps_tau));
    }
    let tau = params.time_from_eps_tau(eps_tau);
    let times = InteractionTimes {
        tau1: tau,
        tau2: tau,
    };
    let mut points = Vec::with_capacity(grid.len());
    for i in 0..grid.x1_count {
        let x1 = grid.x1(i);
        for j in 0..grid.x2_count {
            let x2 = grid.x2(j);
            points.push(SurfacePoint::evaluate(x1, x2, &times, params));
        }
    }
    Ok(FidelitySurface {
        grid,
        eps_tau,
        points,
    })
}

#[cfg(test)]
mod tests {
    use core::f64::consts::PI;

    use super::*;

    fn times(eps_tau: f64) -> (InteractionTimes, PhysicalParams) {
        let p = PhysicalParams::reference();
        (
            InteractionTimes::from_eps_tau(&p, eps_tau, eps_tau).unwrap(),
            p,
        )
    }

    #[test]
    fn parity_swaps_a_and_b() {
        let (t, p) = times(6.0);
        for &(x1, x2) in &[(0.3, 1.7), (-2.0, 4.5), (5.5, -0.25)] {
            let v = abc(x1, x2, &t, &p);
            let m = abc(x1, -x2, &t, &p);
            assert_eq!(v.b, m.a);
            assert_eq!(v.a, m.b);
        }
    }

    #[test]
    fn zero_time_is_fully_coherent() {
        let (t, p) = times(0.0);
        for &(x1, x2) in &[(0.0, 0.0), (1.0, -2.0), (-3.0, 0.5)] {
            let v = abc(x1, x2, &t, &p);
            assert_eq!(v.a, v.b);
            assert!((v.c.abs() - (v.a + v.b)).abs() <= 1e-12 * (v.a + v.b));
            assert!(
                matches!(lower_bounds(x1, x2, &t, &p), Err(FidelityError::NotDistinguishable(g)) if g == 0.0)
            );
        }
    }

    #[test]
    fn separated_lobes() {
        let (t, p) = times(10.0);
        let v = abc(3.31, 3.31, &t, &p);
        assert!(v.a / v.b > 1e6);
        assert!(v.c.abs() / v.a < 1e-3);
    }

    #[test]
    fn theta_zero_is_perfect() {
        let (t, p) = times(2.0);
        let f = fidelity_pair(0.4, -1.3, 0.0, &t, &p).unwrap();
        assert_eq!((f.alpha, f.alpha_prime), (1.0, 1.0));
    }

    #[test]
    fn deep_same_sign_lobe_is_perfect_for_every_theta() {
        let (t, p) = times(10.0);
        for i in 0..=8 {
            let theta = PI * f64::from(i) / 8.0;
            let f = fidelity_pair(4.0, 4.0, theta, &t, &p).unwrap();
            assert!(f.alpha > 1.0 - 1e-6, "θ={theta}: {}", f.alpha);
        }
    }

    #[test]
    fn plateaus_at_long_times() {
        let (t, p) = times(10.0);
        let same = lower_bounds(5.0, 5.0, &t, &p).unwrap();
        assert!(same.alpha >= 0.99 && same.alpha_prime <= 0.01);
        let mixed = lower_bounds(5.0, -5.0, &t, &p).unwrap();
        assert!(mixed.alpha <= 0.01 && mixed.alpha_prime >= 0.99);
    }

    #[test]
    fn printed_variant_misses_theta_pi() {
        let (t, p) = times(1.0);
        let derived = fidelity_pair(0.7, 0.2, PI, &t, &p).unwrap();
        let printed = fidelity_pair_as_printed(0.7, 0.2, PI, &t, &p).unwrap();
        assert!((derived.alpha - 1.0).abs() < 1e-12);
        assert!(printed.alpha < 0.9);
    }

    #[test]
    fn surface_validation() {
        let p = PhysicalParams::reference();
        assert_eq!(
            fidelity_surface(SurfaceGrid::square(10.0, 1), 1.0, &p),
            Err(FidelityError::InvalidGrid)
        );
        assert_eq!(
            fidelity_surface(SurfaceGrid::default(), -1.0, &p),
            Err(FidelityError::InvalidTime(-1.0))
        );
        let s = fidelity_surface(SurfaceGrid::square(10.0, 21), 0.0, &p).unwrap();
        assert!(s.points.iter().all(SurfacePoint::is_degenerate));
        assert_eq!(s.grid.x1(10), 0.0);
    }
}
