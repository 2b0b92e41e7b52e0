//! The measurement cascade: photon number and atom 2 first, then the
//! positions of both atoms, leaving atom 1 in a conditional state.
//!
//! Projecting `|ψ(t₃)⟩` on the two successful (photon, atom 2) outcomes and
//! tracing out the field and atom 2 leaves a state of atom 1's internal and
//! both translational degrees of freedom,
//!
//! ```text
//! ρ″ = Σ_{k,l} |Φ₁^{μ₁}Φ₂^{μ₂}⟩⟨Φ₁^{ν₁}Φ₂^{ν₂}| ⊗ R(k,l),   k = (μ₁,μ₂), l = (ν₁,ν₂)
//! ```
//!
//! with 2×2 blocks `R(k,l) = (1/8)(1+μ₂ν₂)|μ₁μ₂⟩⟨ν₁ν₂|` in the orthogonal
//! limit and `|η,η′⟩ = cos(θ/2)|e⟩ + ηη′e^{iφ}sin(θ/2)|g⟩`. The blocks are
//! not hard-coded: [`condition_on_field_and_atom2`] extracts them from the
//! symbolic expansion. Conditioning on positions `(x₁, x₂)` contracts the
//! translational part pointwise.
//!
//! Positions at this layer are in units of `σ_x`, and densities are per `σ_x²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::gaussian::normal_pdf;
use crate::protocol::Atom;
use crate::protocol::{
    build_expansion_t3, is_success_sector, BlochAngles, BranchMode, BranchTable, InteractionTimes,
    Internal, SystemExpansion, WavepacketLabel, SUCCESS_SECTORS,
};
use crate::qubit::{add_scaled, outer, Mat2, QubitDensityMatrix, ZERO2};
use crate::wavepackets::{BranchSign, DeflectedWavepacket, PhysicalParams};
use crate::C64;
#[allow(unused_imports)] // only used without std
use num_traits::Float;

/// Below this joint density (per σ_x²) conditioning on a position pair is
/// treated as ill-defined.
pub const NEGLIGIBLE_DENSITY: f64 = 1e-30;

/// Rejections tolerated by the position sampler before giving up.
pub const MAX_REJECTIONS: u64 = 1_000_000;

/// `(μ₁, μ₂)` in the order used to index [`ConditionalState`] blocks.
pub const BRANCH_PAIRS: [(BranchSign, BranchSign); 4] = [
    (BranchSign::Plus, BranchSign::Plus),
    (BranchSign::Plus, BranchSign::Minus),
    (BranchSign::Minus, BranchSign::Plus),
    (BranchSign::Minus, BranchSign::Minus),
];

pub fn pair_index(mu1: BranchSign, mu2: BranchSign) -> usize {
    let bit = |s| match s {
        BranchSign::Plus => 0,
        BranchSign::Minus => 1,
    };
    2 * bit(mu1) + bit(mu2)
}

fn sign_index(s: BranchSign) -> usize {
    match s {
        BranchSign::Plus => 0,
        BranchSign::Minus => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MeasurementError {
    #[error(
        "joint position density {density:e} is negligible; this outcome effectively never occurs"
    )]
    NegligibleDensity { density: f64 },
    #[error("position sampler gave up after {rejections} rejections")]
    SamplerExhausted { rejections: u64 },
}

/// `ρ″` after a successful photon-number and atom-2 measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState {
    blocks: [[Mat2; 4]; 4],
    normalization: f64,
    packets1: [DeflectedWavepacket; 2],
    packets2: [DeflectedWavepacket; 2],
    pub angles: BlochAngles,
    pub times: InteractionTimes,
    pub params: PhysicalParams,
    pub mode: BranchMode,
}

/// Projects on `span{|g₂⟩|1⟩, |e₂⟩|0⟩}`, normalizes by the success
/// probability computed in `mode`, and traces out the field and atom 2.
pub fn condition_on_field_and_atom2(
    expansion: &SystemExpansion,
    mode: BranchMode,
) -> ConditionalState {
    let mut raw = [[ZERO2; 4]; 4];
    for sector in SUCCESS_SECTORS {
        let mut v = [[C64::new(0.0, 0.0); 2]; 4];
        for t in expansion.sector_terms(sector) {
            let (
                WavepacketLabel::Deflected {
                    atom: Atom::One,
                    fock_n: 0,
                    branch: mu1,
                },
                WavepacketLabel::Deflected {
                    atom: Atom::Two,
                    fock_n: 0,
                    branch: mu2,
                },
            ) = (t.wp1, t.wp2)
            else {
                panic!("unexpected wavepackets in a success sector: {t:?}");
            };
            v[pair_index(mu1, mu2)][t.atom1.index()] += t.amplitude;
        }
        for k in 0..4 {
            for l in 0..4 {
                add_scaled(&mut raw[k][l], &outer(&v[k], &v[l]), C64::new(1.0, 0.0));
            }
        }
    }
    let normalization: f64 = SUCCESS_SECTORS
        .iter()
        .map(|&s| expansion.sector_probability(s, mode))
        .sum();
    assert!(normalization > 0.0, "no weight in the success subspace");

    let mut blocks = raw;
    for row in blocks.iter_mut() {
        for b in row.iter_mut() {
            for r in b.iter_mut() {
                for z in r.iter_mut() {
                    *z /= normalization;
                }
            }
        }
    }
    let packet = |atom: Atom, branch| {
        WavepacketLabel::Deflected {
            atom,
            fock_n: 0,
            branch,
        }
        .resolve(&expansion.times, &expansion.params)
    };
    ConditionalState {
        blocks,
        normalization,
        packets1: [
            packet(Atom::One, BranchSign::Plus),
            packet(Atom::One, BranchSign::Minus),
        ],
        packets2: [
            packet(Atom::Two, BranchSign::Plus),
            packet(Atom::Two, BranchSign::Minus),
        ],
        angles: expansion.angles,
        times: expansion.times,
        params: expansion.params,
        mode,
    }
}

impl ConditionalState {
    /// Success probability the state was normalized by.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Internal block `R(k, l)`.
    pub fn block(&self, k: usize, l: usize) -> &Mat2 {
        &self.blocks[k][l]
    }

    /// `|μ₁,μ₂⟩ = cos(θ/2)|e⟩ + μ₁μ₂e^{iφ}sin(θ/2)|g⟩`.
    pub fn internal_state(&self, k: usize) -> [C64; 2] {
        let (mu1, mu2) = BRANCH_PAIRS[k];
        let [e, g] = self.angles.ket();
        [e, g * (mu1.value() * mu2.value())]
    }

    /// Scalar weight `w` with `R(k,l) = w |k⟩⟨l|` (that proportionality
    /// holds for every block).
    pub fn branch_weight(&self, k: usize, l: usize) -> C64 {
        let u = self.internal_state(k);
        let v = self.internal_state(l);
        let r = &self.blocks[k][l];
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += u[i].conj() * r[i][j] * v[j];
            }
        }
        acc
    }

    /// Translational amplitudes `Φ₁^{μ₁}(x₁)Φ₂^{μ₂}(x₂)` per σ_x, in pair order.
    fn pair_amplitudes(&self, x1: f64, x2: f64) -> [C64; 4] {
        let s = self.params.sigma_x();
        let root = s.sqrt();
        let a1 = self.packets1.map(|p| p.amplitude(x1 * s) * root);
        let a2 = self.packets2.map(|p| p.amplitude(x2 * s) * root);
        BRANCH_PAIRS.map(|(m1, m2)| a1[sign_index(m1)] * a2[sign_index(m2)])
    }

    /// `⟨x₁,x₂|ρ″|x₁,x₂⟩`, an unnormalized atom-1 operator.
    pub fn position_block(&self, x1: f64, x2: f64) -> Mat2 {
        let w = self.pair_amplitudes(x1, x2);
        let mut m = ZERO2;
        for k in 0..4 {
            for l in 0..4 {
                add_scaled(&mut m, &self.blocks[k][l], w[k] * w[l].conj());
            }
        }
        m
    }

    /// The four `|Φ₁^{μ₁}|²|Φ₂^{μ₂}|²` lobes as (centre, spread) pairs per atom, σ_x units.
    pub fn lobes(&self) -> [((f64, f64), (f64, f64)); 4] {
        let s = self.params.sigma_x();
        let lobe = |p: &DeflectedWavepacket| (p.center() / s, p.spread() / s);
        BRANCH_PAIRS.map(|(m1, m2)| {
            (
                lobe(&self.packets1[sign_index(m1)]),
                lobe(&self.packets2[sign_index(m2)]),
            )
        })
    }
}

/// `Tr₁⟨x₁,x₂|ρ″|x₁,x₂⟩`, per σ_x².
pub fn joint_position_density(x1: f64, x2: f64, cond: &ConditionalState) -> f64 {
    let m = cond.position_block(x1, x2);
    m[0][0].re + m[1][1].re
}

/// `ρ₁f` after finding the atoms at `(x₁, x₂)` (σ_x units).
pub fn reduced_atom1_state(
    x1: f64,
    x2: f64,
    cond: &ConditionalState,
) -> Result<QubitDensityMatrix, MeasurementError> {
    let m = cond.position_block(x1, x2);
    let density = m[0][0].re + m[1][1].re;
    if !(density > NEGLIGIBLE_DENSITY) {
        return Err(MeasurementError::NegligibleDensity { density });
    }
    Ok(QubitDensityMatrix::from_unnormalized(&m))
}

/// `σ_z ρ σ_z`, which maps `|α′⟩⟨α′|` back to `|α⟩⟨α|`.
pub fn apply_sigma_z_correction(rho: &QubitDensityMatrix) -> QubitDensityMatrix {
    rho.sigma_z_conjugated()
}

/// Identifies one protocol run: the master seed of a batch and the run's
/// index within it. Each run draws from its own ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunSeed {
    pub master: u64,
    pub run: u64,
}

impl RunSeed {
    pub fn new(master: u64, run: u64) -> Self {
        Self { master, run }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.run);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Success,
    SuccessAfterCorrection,
    Failure,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Success => "success",
            Verdict::SuccessAfterCorrection => "success-after-correction",
            Verdict::Failure => "failure",
        }
    }

    pub fn is_success(self) -> bool {
        !matches!(self, Verdict::Failure)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub seed: RunSeed,
    pub fock_outcome: u32,
    pub atom2_outcome: Internal,
    /// `(x₁, x₂)` in σ_x units; only for outcomes that call for them.
    pub positions: Option<(f64, f64)>,
    pub verdict: Verdict,
    /// Atom-1 state before any correction.
    pub rho1f: Option<QubitDensityMatrix>,
    /// `⟨α|ρ|α⟩` after the σ_z correction, if one was applied.
    pub fidelity_to_alpha: Option<f64>,
    /// Proposals rejected while sampling positions.
    pub rejections: u64,
}

/// Everything a batch of runs shares, prepared once.
#[derive(Debug, Clone)]
pub struct ProtocolSampler {
    table: BranchTable,
    cond: ConditionalState,
    lobes: [((f64, f64), (f64, f64)); 4],
}

impl ProtocolSampler {
    pub fn new(angles: BlochAngles, times: InteractionTimes, params: PhysicalParams) -> Self {
        let expansion = build_expansion_t3(angles, times, params);
        let table = expansion.branch_table(BranchMode::Exact);
        let cond = condition_on_field_and_atom2(&expansion, BranchMode::Exact);
        let lobes = cond.lobes();
        Self { table, cond, lobes }
    }

    pub fn table(&self) -> &BranchTable {
        &self.table
    }

    pub fn conditional_state(&self) -> &ConditionalState {
        &self.cond
    }

    /// Equal-weight mixture of the four lobes, per σ_x².
    fn proposal_density(&self, x1: f64, x2: f64) -> f64 {
        self.lobes
            .iter()
            .map(|&((c1, s1), (c2, s2))| normal_pdf(x1, c1, s1) * normal_pdf(x2, c2, s2))
            .sum::<f64>()
            * 0.25
    }

    /// Rejection sampling from `joint_position_density`.
    ///
    /// The proposal dominates `normalization × density` pointwise because
    /// the interference term `2Re(Φ⁺Φ⁻*)` can at most equal the sum of the
    /// two lobe densities it couples.
    fn sample_positions(&self, rng: &mut ChaCha8Rng) -> Result<(f64, f64, u64), MeasurementError> {
        let mut rejections = 0;
        while rejections < MAX_REJECTIONS {
            let ((c1, s1), (c2, s2)) = self.lobes[rng.random_range(0..4)];
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let (x1, x2) = (c1 + s1 * z1, c2 + s2 * z2);
            let target = joint_position_density(x1, x2, &self.cond);
            let envelope = self.proposal_density(x1, x2);
            debug_assert!(target * self.cond.normalization() <= envelope * (1.0 + 1e-9) + 1e-300);
            let u: f64 = rng.random();
            if target > NEGLIGIBLE_DENSITY && u * envelope < target * self.cond.normalization() {
                return Ok((x1, x2, rejections));
            }
            rejections += 1;
        }
        Err(MeasurementError::SamplerExhausted { rejections })
    }

    pub fn run(&self, seed: RunSeed) -> Result<MeasurementRecord, MeasurementError> {
        let mut rng = seed.rng();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut row = self.table.rows[self.table.rows.len() - 1];
        for r in &self.table.rows {
            acc += r.probability;
            if u < acc {
                row = *r;
                break;
            }
        }
        let mut record = MeasurementRecord {
            seed,
            fock_outcome: row.fock,
            atom2_outcome: row.atom2,
            positions: None,
            verdict: Verdict::Failure,
            rho1f: None,
            fidelity_to_alpha: None,
            rejections: 0,
        };
        if !is_success_sector((row.fock, row.atom2)) {
            return Ok(record);
        }
        let (x1, x2, rejections) = self.sample_positions(&mut rng)?;
        let rho = reduced_atom1_state(x1, x2, &self.cond)?;
        let (corrected, verdict) = if x1 * x2 < 0.0 {
            (
                apply_sigma_z_correction(&rho),
                Verdict::SuccessAfterCorrection,
            )
        } else {
            (rho, Verdict::Success)
        };
        record.positions = Some((x1, x2));
        record.verdict = verdict;
        record.rho1f = Some(rho);
        record.fidelity_to_alpha = Some(corrected.expectation(&self.cond.angles.ket()));
        record.rejections = rejections;
        Ok(record)
    }
}

/// One complete protocol run; deterministic in `seed`.
pub fn sample_run(
    seed: RunSeed,
    angles: BlochAngles,
    times: InteractionTimes,
    params: PhysicalParams,
) -> Result<MeasurementRecord, MeasurementError> {
    ProtocolSampler::new(angles, times, params).run(seed)
}
