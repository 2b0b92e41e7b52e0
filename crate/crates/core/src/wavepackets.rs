//! Translational wavefunctions of an atom crossing the nodal region.
//!
//! Every atom starts in a real minimum-uncertainty Gaussian centred at the
//! node with zero mean momentum. Inside the cavity the dressed state `χ_n^±`
//! exerts the constant force `∓√(n+1)·m·a`, `a = ħkε/m`, so after an
//! interaction time `τ` the packet is a Gaussian that has accelerated
//! towards `∓x`:
//!
//! ```text
//! Φ_n^±(x, τ) = exp(∓i·m·a_n·τ·x/ħ) · exp(−(x ± a_n·τ²/2)² / W(τ))
//!               / ((2π)^¼ · √(σ + iħτ/(2mσ)))
//! W(τ)       = 4σ·(σ + iħτ/(2mσ)) = 4σ² + 2iħτ/m
//! a_n        = √(n+1)·a
//! ```
//!
//! This is the exact Schrödinger-picture solution for kinetic energy plus a
//! linear potential, up to the branch-independent global phase
//! `exp(−i·m·a_n²·τ³/(6ħ))`, which is dropped. All positions are SI metres
//! here; callers working in units of `σ_x` convert at their boundary.

use core::f64::consts::PI;

use thiserror::Error;

use crate::gaussian::ComplexGaussian;
use crate::C64;
#[allow(unused_imports)] // only used without std
use num_traits::Float;

/// Reduced Planck constant (J·s), CODATA 2018 exact value.
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be finite and strictly positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error(
        "packet width times wave number is {product}; the nodal linearization needs it below 1"
    )]
    PacketTooWide { product: f64 },
    #[error("interaction time must be finite and non-negative, got {0}")]
    NegativeTime(f64),
}

/// Physical knobs of the atom-cavity system, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    coupling: f64,
    wavelength: f64,
    sigma_x: f64,
    hbar: f64,
}

impl PhysicalParams {
    pub fn new(
        mass: f64,
        coupling: f64,
        wavelength: f64,
        sigma_x: f64,
    ) -> Result<Self, ParamError> {
        Self::with_hbar(mass, coupling, wavelength, sigma_x, HBAR)
    }

    pub fn with_hbar(
        mass: f64,
        coupling: f64,
        wavelength: f64,
        sigma_x: f64,
        hbar: f64,
    ) -> Result<Self, ParamError> {
        for (name, value) in [
            ("mass", mass),
            ("coupling", coupling),
            ("wavelength", wavelength),
            ("sigma_x", sigma_x),
            ("hbar", hbar),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        let product = sigma_x * 2.0 * PI / wavelength;
        if product >= 1.0 {
            return Err(ParamError::PacketTooWide { product });
        }
        let params = Self {
            mass,
            coupling,
            wavelength,
            sigma_x,
            hbar,
        };
        let a = params.acceleration();
        if !(a.is_finite() && a > 0.0) {
            return Err(ParamError::NotPositive {
                name: "acceleration",
                value: a,
            });
        }
        Ok(params)
    }

    /// λ = 10 µm, ε = 10⁵ s⁻¹, m = 10⁻²⁶ kg, σ_x = λ/10.
    pub fn reference() -> Self {
        Self::new(1e-26, 1e5, 1e-5, 1e-6).expect("reference parameters are valid")
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// `a = ħkε/m`, the n = 0 deflection acceleration.
    pub fn acceleration(&self) -> f64 {
        self.hbar * self.wave_number() * self.coupling / self.mass
    }

    /// Interaction time for a dimensionless `ετ`.
    pub fn time_from_eps_tau(&self, eps_tau: f64) -> f64 {
        eps_tau / self.coupling
    }

    /// Width of `|Φ(x, τ)|²` (standard deviation, metres).
    pub fn spread(&self, tau: f64) -> f64 {
        let r = self.hbar * tau / (2.0 * self.mass * self.sigma_x * self.sigma_x);
        self.sigma_x * (1.0 + r * r).sqrt()
    }
}

/// Sign of the dressed state a branch came from; `Plus` is `χ⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub const BOTH: [BranchSign; 2] = [BranchSign::Plus, BranchSign::Minus];

    pub fn value(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            BranchSign::Plus => BranchSign::Minus,
            BranchSign::Minus => BranchSign::Plus,
        }
    }
}

/// One field-deflected translational state `Φ_n^±` after interaction time `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectedWavepacket {
    pub branch: BranchSign,
    pub fock_n: u32,
    pub tau: f64,
    pub params: PhysicalParams,
}

impl DeflectedWavepacket {
    pub fn new(
        branch: BranchSign,
        fock_n: u32,
        tau: f64,
        params: PhysicalParams,
    ) -> Result<Self, ParamError> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(ParamError::NegativeTime(tau));
        }
        Ok(Self {
            branch,
            fock_n,
            tau,
            params,
        })
    }

    /// The undeflected initial packet.
    pub fn initial(params: PhysicalParams) -> Self {
        Self {
            branch: BranchSign::Plus,
            fock_n: 0,
            tau: 0.0,
            params,
        }
    }

    /// Signed acceleration of the packet centre, `∓√(n+1)·a`.
    pub fn signed_acceleration(&self) -> f64 {
        -self.branch.value() * f64::from(self.fock_n + 1).sqrt() * self.params.acceleration()
    }

    /// Centre of `|Φ|²` in metres.
    pub fn center(&self) -> f64 {
        0.5 * self.signed_acceleration() * self.tau * self.tau
    }

    /// Mean wave number `⟨p⟩/ħ`.
    pub fn mean_wave_number(&self) -> f64 {
        self.params.mass * self.signed_acceleration() * self.tau / self.params.hbar
    }

    pub fn spread(&self) -> f64 {
        self.params.spread(self.tau)
    }

    /// `σ + iħτ/(2mσ)`.
    fn complex_sigma(&self) -> C64 {
        let p = &self.params;
        C64::new(p.sigma_x, p.hbar * self.tau / (2.0 * p.mass * p.sigma_x))
    }

    fn complex_width(&self) -> C64 {
        self.complex_sigma() * (4.0 * self.params.sigma_x)
    }

    fn inverse_normalization(&self) -> C64 {
        self.complex_sigma().sqrt() * (2.0 * PI).powf(0.25)
    }

    pub fn amplitude(&self, x: f64) -> C64 {
        let phase = C64::new(0.0, self.mean_wave_number() * x).exp();
        let d = x - self.center();
        phase * (-(d * d) / self.complex_width()).exp() / self.inverse_normalization()
    }

    /// `|Φ(x)|²`, evaluated without the phase factor so that mirror-image
    /// packets give bitwise mirror-image densities.
    pub fn density(&self, x: f64) -> f64 {
        let d = x - self.center();
        (-2.0 * d * d * self.complex_width().inv().re).exp()
            / self.inverse_normalization().norm_sqr()
    }

    /// Same wavefunction written as `exp(q·x² + l·x + c)`.
    pub fn gaussian(&self) -> ComplexGaussian {
        let w = self.complex_width();
        let x0 = self.center();
        ComplexGaussian {
            quad: -w.inv(),
            lin: C64::new(0.0, self.mean_wave_number()) + w.inv() * (2.0 * x0),
            offset: -(w.inv() * (x0 * x0)) - self.inverse_normalization().ln(),
        }
    }

    /// `⟨self|other⟩` in closed form.
    pub fn overlap(&self, other: &DeflectedWavepacket) -> C64 {
        if self == other {
            return C64::new(1.0, 0.0);
        }
        self.gaussian().inner(&other.gaussian())
    }
}

/// `(2πσ²)^(−1/4)·exp(−x²/(4σ²))`, per √metre.
pub fn initial_amplitude(x: f64, params: &PhysicalParams) -> C64 {
    let s = params.sigma_x;
    C64::new(
        (2.0 * PI * s * s).powf(-0.25) * (-x * x / (4.0 * s * s)).exp(),
        0.0,
    )
}

pub fn deflected_amplitude(x: f64, wp: &DeflectedWavepacket) -> C64 {
    wp.amplitude(x)
}

pub fn position_density(x: f64, wp: &DeflectedWavepacket) -> f64 {
    wp.density(x)
}

/// `⟨Φ_n^+|Φ_n^-⟩` for one atom after interaction time `tau`.
///
/// Real and non-negative for symmetric branches: the two packets are
/// mirror images, so the integrand's imaginary part is odd.
pub fn branch_overlap(tau: f64, fock_n: u32, params: &PhysicalParams) -> C64 {
    let plus = DeflectedWavepacket {
        branch: BranchSign::Plus,
        fock_n,
        tau,
        params: *params,
    };
    let minus = DeflectedWavepacket {
        branch: BranchSign::Minus,
        ..plus
    };
    if tau == 0.0 {
        return C64::new(1.0, 0.0);
    }
    plus.overlap(&minus)
}

/// The deflected packet with the complex width `4σ² + iħτ/(2m)` exactly as it
/// appears in the usual printed form of this solution.
///
/// That width disagrees with the `σ + iħτ/(2mσ)` normalization printed next
/// to it, so this function is not normalized for `τ > 0` (its norm is about
/// 0.89 at ετ = 10 with the reference parameters). Kept only so that reports
/// can quantify the difference.
pub fn printed_form_amplitude(x: f64, wp: &DeflectedWavepacket) -> C64 {
    let p = &wp.params;
    let width = C64::new(
        4.0 * p.sigma_x * p.sigma_x,
        p.hbar * wp.tau / (2.0 * p.mass),
    );
    let phase = C64::new(0.0, wp.mean_wave_number() * x).exp();
    let d = x - wp.center();
    phase * (-(d * d) / width).exp() / wp.inverse_normalization()
}
