//! The joint atom 1 ⊗ atom 2 ⊗ field state once both atoms have left the
//! cavity, and the probabilities of every photon-number / atom-2 outcome.
//!
//! Translational factors are kept symbolic as [`WavepacketLabel`]s; inner
//! products between labels are evaluated in closed form only when a Gram
//! matrix is needed. The expansion is produced by literally running the two
//! cavity passages on labelled product states: each `|e,n⟩` or `|g,n+1⟩`
//! component is split into dressed states, and the dressed state `χ_n^±`
//! replaces the atom's initial packet by `Φ_n^±`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::wavepackets::{BranchSign, DeflectedWavepacket, ParamError, PhysicalParams};
use crate::C64;
#[allow(unused_imports)] // only used without std
use num_traits::Float;

/// Amplitudes below this magnitude are dropped when merging terms.
const MERGE_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Internal {
    Excited,
    Ground,
}

impl Internal {
    /// Row index in the `{|e⟩, |g⟩}` basis.
    pub fn index(self) -> usize {
        match self {
            Internal::Excited => 0,
            Internal::Ground => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Internal::Excited => "e",
            Internal::Ground => "g",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    One,
    Two,
}

/// State `cos(θ/2)|e⟩ + e^{iφ} sin(θ/2)|g⟩` to be teleported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngles {
    theta: f64,
    phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum AngleError {
    #[error("theta must lie in [0, π], got {0}")]
    Theta(f64),
    #[error("phi must lie in [0, 2π), got {0}")]
    Phi(f64),
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self, AngleError> {
        if !(0.0..=PI).contains(&theta) {
            return Err(AngleError::Theta(theta));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(AngleError::Phi(phi));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `[cos(θ/2), e^{iφ} sin(θ/2)]` in the `{|e⟩, |g⟩}` basis.
    pub fn ket(&self) -> [C64; 2] {
        let half = 0.5 * self.theta;
        [
            C64::new(half.cos(), 0.0),
            C64::from_polar(half.sin(), self.phi),
        ]
    }

    /// `−σ_z|α⟩` up to the global sign: `cos(θ/2)|e⟩ − e^{iφ} sin(θ/2)|g⟩`.
    pub fn flipped_ket(&self) -> [C64; 2] {
        let [e, g] = self.ket();
        [e, -g]
    }
}

/// Interaction durations of atom 1 and atom 2, seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionTimes {
    pub tau1: f64,
    pub tau2: f64,
}

impl InteractionTimes {
    pub fn new(tau1: f64, tau2: f64) -> Result<Self, ParamError> {
        for t in [tau1, tau2] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(ParamError::NegativeTime(t));
            }
        }
        Ok(Self { tau1, tau2 })
    }

    pub fn from_eps_tau(
        params: &PhysicalParams,
        eps_tau1: f64,
        eps_tau2: f64,
    ) -> Result<Self, ParamError> {
        Self::new(
            params.time_from_eps_tau(eps_tau1),
            params.time_from_eps_tau(eps_tau2),
        )
    }

    pub fn of(&self, atom: Atom) -> f64 {
        match atom {
            Atom::One => self.tau1,
            Atom::Two => self.tau2,
        }
    }
}

/// Translational state of one atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WavepacketLabel {
    Initial {
        atom: Atom,
    },
    Deflected {
        atom: Atom,
        fock_n: u32,
        branch: BranchSign,
    },
}

impl WavepacketLabel {
    pub fn atom(&self) -> Atom {
        match *self {
            WavepacketLabel::Initial { atom } | WavepacketLabel::Deflected { atom, .. } => atom,
        }
    }

    pub fn resolve(
        &self,
        times: &InteractionTimes,
        params: &PhysicalParams,
    ) -> DeflectedWavepacket {
        match *self {
            WavepacketLabel::Initial { .. } => DeflectedWavepacket::initial(*params),
            WavepacketLabel::Deflected {
                atom,
                fock_n,
                branch,
            } => DeflectedWavepacket {
                branch,
                fock_n,
                tau: times.of(atom),
                params: *params,
            },
        }
    }

    /// `⟨self|other⟩`; both labels must belong to the same atom.
    pub fn overlap(&self, other: &Self, times: &InteractionTimes, params: &PhysicalParams) -> C64 {
        assert_eq!(
            self.atom(),
            other.atom(),
            "overlap between packets of different atoms"
        );
        if self == other {
            return C64::new(1.0, 0.0);
        }
        self.resolve(times, params)
            .overlap(&other.resolve(times, params))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTerm {
    pub amplitude: C64,
    pub atom1: Internal,
    pub atom2: Internal,
    pub fock: u32,
    pub wp1: WavepacketLabel,
    pub wp2: WavepacketLabel,
}

impl JointTerm {
    fn same_basis(&self, other: &JointTerm) -> bool {
        self.atom1 == other.atom1
            && self.atom2 == other.atom2
            && self.fock == other.fock
            && self.wp1 == other.wp1
            && self.wp2 == other.wp2
    }

    fn internal(&self, atom: Atom) -> Internal {
        match atom {
            Atom::One => self.atom1,
            Atom::Two => self.atom2,
        }
    }

    fn with_atom(
        &self,
        atom: Atom,
        internal: Internal,
        fock: u32,
        wp: WavepacketLabel,
        amp: C64,
    ) -> JointTerm {
        let mut t = *self;
        t.amplitude = amp;
        t.fock = fock;
        match atom {
            Atom::One => {
                t.atom1 = internal;
                t.wp1 = wp;
            }
            Atom::Two => {
                t.atom2 = internal;
                t.wp2 = wp;
            }
        }
        t
    }
}

/// `|ψ(t₃)⟩` as a sum of labelled product terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemExpansion {
    pub terms: Vec<JointTerm>,
    pub angles: BlochAngles,
    pub times: InteractionTimes,
    pub params: PhysicalParams,
}

/// How wavepacket overlaps enter probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchMode {
    /// Distinct wavepacket labels are treated as orthogonal (τ → ∞).
    Asymptotic,
    /// Closed-form overlaps at the actual interaction times.
    Exact,
}

/// One atom's passage through the nodal region, applied to every term.
///
/// With `Φ^±` the packets attached to `χ_n^±`:
/// `|e,n⟩   → ½(Φ⁺+Φ⁻)|e,n⟩ + ½(Φ⁺−Φ⁻)|g,n+1⟩`,
/// `|g,n+1⟩ → ½(Φ⁺−Φ⁻)|e,n⟩ + ½(Φ⁺+Φ⁻)|g,n+1⟩`,
/// and `|g,0⟩` is left alone.
fn cavity_passage(terms: &[JointTerm], atom: Atom) -> Vec<JointTerm> {
    let mut out = Vec::with_capacity(terms.len() * 4);
    for t in terms {
        let wp = match atom {
            Atom::One => t.wp1,
            Atom::Two => t.wp2,
        };
        assert!(
            matches!(wp, WavepacketLabel::Initial { .. }),
            "atom {atom:?} crosses the cavity twice"
        );
        let (n, from_excited) = match (t.internal(atom), t.fock) {
            (Internal::Ground, 0) => {
                out.push(*t);
                continue;
            }
            (Internal::Excited, n) => (n, true),
            (Internal::Ground, np1) => (np1 - 1, false),
        };
        for branch in BranchSign::BOTH {
            let wp = WavepacketLabel::Deflected {
                atom,
                fock_n: n,
                branch,
            };
            let eta = branch.value();
            let (ce, cg) = if from_excited {
                (0.5, 0.5 * eta)
            } else {
                (0.5 * eta, 0.5)
            };
            out.push(t.with_atom(atom, Internal::Excited, n, wp, t.amplitude * ce));
            out.push(t.with_atom(atom, Internal::Ground, n + 1, wp, t.amplitude * cg));
        }
    }
    out
}

/// Sums terms with identical labels, keeping first-occurrence order, and
/// drops negligible amplitudes.
fn merge_terms(terms: Vec<JointTerm>) -> Vec<JointTerm> {
    let mut merged: Vec<JointTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged.iter_mut().find(|m| m.same_basis(&t)) {
            Some(m) => m.amplitude += t.amplitude,
            None => merged.push(t),
        }
    }
    merged.retain(|t| t.amplitude.norm() >= MERGE_CUTOFF);
    merged
}

/// Joint state after atom 1 (initially `|e⟩`) and then atom 2 (initially
/// `|α⟩`) have crossed the initially empty cavity.
pub fn build_expansion_t3(
    angles: BlochAngles,
    times: InteractionTimes,
    params: PhysicalParams,
) -> SystemExpansion {
    let [ce, cg] = angles.ket();
    let start = JointTerm {
        amplitude: ce,
        atom1: Internal::Excited,
        atom2: Internal::Excited,
        fock: 0,
        wp1: WavepacketLabel::Initial { atom: Atom::One },
        wp2: WavepacketLabel::Initial { atom: Atom::Two },
    };
    let initial = [
        start,
        JointTerm {
            amplitude: cg,
            atom2: Internal::Ground,
            ..start
        },
    ];
    let after_one = cavity_passage(&initial, Atom::One);
    let after_two = cavity_passage(&after_one, Atom::Two);
    SystemExpansion {
        terms: merge_terms(after_two),
        angles,
        times,
        params,
    }
}

/// A (photon number, atom-2 state) measurement outcome.
pub type Sector = (u32, Internal);

/// Outcomes in the order they are listed in the protocol's outcome table.
pub const SECTORS: [Sector; 5] = [
    (2, Internal::Ground),
    (1, Internal::Excited),
    (1, Internal::Ground),
    (0, Internal::Ground),
    (0, Internal::Excited),
];

/// Outcomes after which position measurements can complete the teleportation.
pub const SUCCESS_SECTORS: [Sector; 2] = [(1, Internal::Ground), (0, Internal::Excited)];

pub fn is_success_sector(sector: Sector) -> bool {
    SUCCESS_SECTORS.contains(&sector)
}

impl SystemExpansion {
    /// `⟨a|b⟩` for two product terms without their amplitudes.
    pub fn basis_overlap(&self, a: &JointTerm, b: &JointTerm) -> C64 {
        if a.atom1 != b.atom1 || a.atom2 != b.atom2 || a.fock != b.fock {
            return C64::new(0.0, 0.0);
        }
        a.wp1.overlap(&b.wp1, &self.times, &self.params)
            * a.wp2.overlap(&b.wp2, &self.times, &self.params)
    }

    fn weight<'a>(
        &self,
        terms: impl Iterator<Item = &'a JointTerm> + Clone,
        mode: BranchMode,
    ) -> f64 {
        match mode {
            BranchMode::Asymptotic => terms.map(|t| t.amplitude.norm_sqr()).sum(),
            BranchMode::Exact => {
                let mut acc = C64::new(0.0, 0.0);
                for i in terms.clone() {
                    for j in terms.clone() {
                        acc += j.amplitude.conj() * i.amplitude * self.basis_overlap(j, i);
                    }
                }
                acc.re
            }
        }
    }

    /// `Σ_ij a_i a_j* ⟨term_j|term_i⟩` with exact overlaps; 1 for any valid input.
    pub fn gram_norm(&self) -> f64 {
        self.weight(self.terms.iter(), BranchMode::Exact)
    }

    pub fn sector_terms(&self, sector: Sector) -> impl Iterator<Item = &JointTerm> + Clone {
        self.terms
            .iter()
            .filter(move |t| (t.fock, t.atom2) == sector)
    }

    pub fn sector_probability(&self, sector: Sector, mode: BranchMode) -> f64 {
        self.weight(self.sector_terms(sector), mode)
    }

    pub fn fock_values(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.terms.iter().map(|t| t.fock).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowVerdict {
    /// Teleportation completes once the atomic positions are measured.
    SuccessfulPendingPositions,
    Unsuccessful,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRow {
    pub fock: u32,
    pub atom2: Internal,
    pub probability: f64,
    pub verdict: RowVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchTable {
    pub rows: Vec<BranchRow>,
    pub mode: BranchMode,
}

impl BranchTable {
    pub fn get(&self, fock: u32, atom2: Internal) -> Option<&BranchRow> {
        self.rows
            .iter()
            .find(|r| r.fock == fock && r.atom2 == atom2)
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.probability).sum()
    }

    pub fn success_probability(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.verdict == RowVerdict::SuccessfulPendingPositions)
            .map(|r| r.probability)
            .sum()
    }

    pub fn failure_probability(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.verdict == RowVerdict::Unsuccessful)
            .map(|r| r.probability)
            .sum()
    }

    /// Probability of `fock` photons regardless of atom 2.
    pub fn fock_probability(&self, fock: u32) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.fock == fock)
            .map(|r| r.probability)
            .sum()
    }
}

impl SystemExpansion {
    pub fn branch_table(&self, mode: BranchMode) -> BranchTable {
        let rows = SECTORS
            .iter()
            .map(|&(fock, atom2)| BranchRow {
                fock,
                atom2,
                probability: self.sector_probability((fock, atom2), mode),
                verdict: if is_success_sector((fock, atom2)) {
                    RowVerdict::SuccessfulPendingPositions
                } else {
                    RowVerdict::Unsuccessful
                },
            })
            .collect();
        BranchTable { rows, mode }
    }
}

pub fn branch_probabilities(
    angles: BlochAngles,
    times: InteractionTimes,
    params: PhysicalParams,
    mode: BranchMode,
) -> BranchTable {
    build_expansion_t3(angles, times, params).branch_table(mode)
}

pub fn success_probability(
    angles: BlochAngles,
    times: InteractionTimes,
    params: PhysicalParams,
    mode: BranchMode,
) -> f64 {
    branch_probabilities(angles, times, params, mode).success_probability()
}
