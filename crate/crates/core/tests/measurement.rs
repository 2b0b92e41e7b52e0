mod common;

use std::f64::consts::PI;

use common::{reference, simpson, simpson_2d};
use proptest::prelude::*;
use teleport_core::{
    apply_sigma_z_correction, build_expansion_t3, condition_on_field_and_atom2,
    joint_position_density, position_density, reduced_atom1_state, BlochAngles, BranchMode,
    BranchSign, ConditionalState, DeflectedWavepacket, InteractionTimes, Internal, ProtocolSampler,
    QubitDensityMatrix, RunSeed, Verdict, C64,
};

/// `2p(1−p)` with `p = ½erfc(c/(s√2))`, the mass of a lobe centred at
/// `c = 3.313035σ` with spread `s = 1.130500σ` that lands on the wrong side
/// of one axis, combined over both axes (ετ = 10, scipy erfc).
const MISCLASSIFIED_MASS_AT_EPS_TAU_10: f64 = 0.003377439463054115;

fn cond(theta: f64, phi: f64, eps_tau: f64) -> ConditionalState {
    let p = reference();
    let times = InteractionTimes::from_eps_tau(&p, eps_tau, eps_tau).unwrap();
    let e = build_expansion_t3(BlochAngles::new(theta, phi).unwrap(), times, p);
    condition_on_field_and_atom2(&e, BranchMode::Exact)
}

fn sampler(theta: f64, eps_tau: f64) -> ProtocolSampler {
    let p = reference();
    let times = InteractionTimes::from_eps_tau(&p, eps_tau, eps_tau).unwrap();
    ProtocolSampler::new(BlochAngles::new(theta, 0.3).unwrap(), times, p)
}

#[test]
fn joint_density_integrates_to_one() {
    for (theta, phi) in [(PI / 2.0, 0.0), (0.4, 1.9), (2.9, 5.0)] {
        let c = cond(theta, phi, 10.0);
        let total = simpson_2d(
            |x1, x2| joint_position_density(x1, x2, &c),
            -15.0,
            15.0,
            300,
        );
        assert!((total - 1.0).abs() < 1e-4, "θ={theta}: {total}");
    }
}

#[test]
fn theta_zero_gives_four_equal_lobes() {
    let c = cond(0.0, 0.0, 10.0);
    for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let mass = simpson_2d(
            |x1, x2| joint_position_density(s1 * x1, s2 * x2, &c),
            0.0,
            15.0,
            150,
        );
        assert!((mass - 0.25).abs() < 0.01, "quadrant ({s1},{s2}): {mass}");
        let peak = joint_position_density(-3.31 * s1, -3.31 * s2, &c);
        assert!(peak > joint_position_density(-s1, -s2, &c));
    }
    let rho = reduced_atom1_state(1.3, -2.0, &c).unwrap();
    assert!(
        rho.max_abs_diff(&QubitDensityMatrix::pure(&[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0)
        ])) < 1e-15
    );
}

#[test]
fn deep_lobe_state_is_close_to_alpha() {
    let c = cond(PI / 2.0, 0.0, 10.0);
    let rho = reduced_atom1_state(3.31, 3.31, &c).unwrap();
    assert!(rho.expectation(&c.angles.ket()) >= 0.99);
}

#[test]
fn sigma_z_correction_properties() {
    let a = BlochAngles::new(1.0, 4.0).unwrap();
    let alpha_prime = QubitDensityMatrix::pure(&a.flipped_ket());
    let fixed = apply_sigma_z_correction(&alpha_prime);
    assert!(fixed.max_abs_diff(&QubitDensityMatrix::pure(&a.ket())) < 1e-15);
    assert_eq!(apply_sigma_z_correction(&fixed), alpha_prime);
    let mixed = QubitDensityMatrix::maximally_mixed();
    assert_eq!(apply_sigma_z_correction(&mixed), mixed);
}

/// Mass of the four lobes that lies in quadrants where `sign(x₁x₂)` names
/// the other branch-pair class.
fn misclassified_mass(eps_tau: f64) -> f64 {
    let p = reference();
    let s = p.sigma_x();
    let tau = p.time_from_eps_tau(eps_tau);
    // Fraction of one packet on the positive half-line.
    let positive = |b| {
        let wp = DeflectedWavepacket::new(b, 0, tau, p).unwrap();
        simpson(|x| position_density(x * s, &wp) * s, 0.0, 25.0, 5000)
    };
    let q = [positive(BranchSign::Plus), positive(BranchSign::Minus)];
    let mut wrong = 0.0;
    for (i, m1) in [1.0, -1.0].into_iter().enumerate() {
        for (j, m2) in [1.0, -1.0].into_iter().enumerate() {
            // Branch + moves to negative x, so the lobe's typical sign of
            // x₁x₂ is μ₁μ₂ and the wrong side has sign −μ₁μ₂.
            let same = q[i] * q[j] + (1.0 - q[i]) * (1.0 - q[j]);
            wrong += 0.25 * if m1 * m2 > 0.0 { 1.0 - same } else { same };
        }
    }
    wrong
}

#[test]
fn sign_rule_misclassification_mass() {
    let at_10 = misclassified_mass(10.0);
    assert!(
        (at_10 - MISCLASSIFIED_MASS_AT_EPS_TAU_10).abs() < 1e-9,
        "{at_10}"
    );
    // The lobes have to separate a little further before the rule errs on
    // less than 1e-4 of the mass.
    assert!(misclassified_mass(12.0) < 1e-4);
    assert!(misclassified_mass(12.0) < at_10 && at_10 < misclassified_mass(8.0));
}

#[test]
fn correction_never_hurts_in_mixed_quadrants() {
    let c = cond(1.3, 0.8, 10.0);
    let alpha = c.angles.ket();
    for i in 0..=20 {
        for j in 0..=20 {
            let x1 = 3.0 + 0.35 * i as f64;
            let x2 = -(3.0 + 0.35 * j as f64);
            for (a, b) in [(x1, x2), (x2, x1)] {
                let rho = reduced_atom1_state(a, b, &c).unwrap();
                let raw = rho.expectation(&alpha);
                let fixed = apply_sigma_z_correction(&rho).expectation(&alpha);
                assert!(fixed >= raw, "({a},{b}): {fixed} < {raw}");
            }
        }
    }
}

#[test]
fn sampler_is_deterministic() {
    let s = sampler(PI / 2.0, 10.0);
    for run in 0..50 {
        let seed = RunSeed::new(7, run);
        assert_eq!(s.run(seed).unwrap(), s.run(seed).unwrap());
    }
    assert_ne!(
        s.run(RunSeed::new(7, 0)).unwrap(),
        s.run(RunSeed::new(8, 0)).unwrap()
    );
}

#[test]
fn records_respect_the_table() {
    let s = sampler(2.0, 6.0);
    for run in 0..2000 {
        let r = s.run(RunSeed::new(11, run)).unwrap();
        let success_row = matches!(
            (r.fock_outcome, r.atom2_outcome),
            (1, Internal::Ground) | (0, Internal::Excited)
        );
        assert_eq!(success_row, r.positions.is_some());
        assert_eq!(success_row, r.verdict.is_success());
        assert_eq!(success_row, r.rho1f.is_some());
        if let Some((x1, x2)) = r.positions {
            let corrected = x1 * x2 < 0.0;
            assert_eq!(corrected, r.verdict == Verdict::SuccessAfterCorrection);
        }
    }
}

#[test]
fn row_frequencies_match_probabilities() {
    let s = sampler(PI / 2.0, 10.0);
    let n = 100_000u64;
    let mut counts = vec![0u64; s.table().rows.len()];
    for run in 0..n {
        let r = s.run(RunSeed::new(2024, run)).unwrap();
        let k = s
            .table()
            .rows
            .iter()
            .position(|row| row.fock == r.fock_outcome && row.atom2 == r.atom2_outcome)
            .unwrap();
        counts[k] += 1;
    }
    for (row, &k) in s.table().rows.iter().zip(&counts) {
        let p = row.probability;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        let f = k as f64 / n as f64;
        assert!((f - p).abs() <= 3.0 * sd, "{row:?}: {f} vs {p} ± {sd}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn conditioned_state_is_a_density_matrix(
        x1 in -8.0..8.0f64,
        x2 in -8.0..8.0f64,
        theta in 0.0..=PI,
        phi in 0.0..(2.0 * PI),
        eps_tau in 0.5..10.0f64,
    ) {
        let c = cond(theta, phi, eps_tau);
        let rho = reduced_atom1_state(x1, x2, &c).unwrap();
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(rho.eigenvalues()[0] > -1e-12);
    }

    #[test]
    fn joint_density_is_point_symmetric(
        x1 in -8.0..8.0f64,
        x2 in -8.0..8.0f64,
        theta in 0.0..=PI,
        phi in 0.0..(2.0 * PI),
        eps_tau in 0.0..10.0f64,
    ) {
        let c = cond(theta, phi, eps_tau);
        let d = joint_position_density(x1, x2, &c);
        let m = joint_position_density(-x1, -x2, &c);
        prop_assert!(d >= 0.0);
        prop_assert!((d - m).abs() <= 1e-12 * d.max(1e-300), "{} vs {}", d, m);
    }
}
