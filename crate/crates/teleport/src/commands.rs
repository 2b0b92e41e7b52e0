//! The four study commands as pure functions from a [`RunConfig`] to the
//! text they emit. Nothing here touches the file system.

use std::fmt::Write as _;

use rayon::prelude::*;
use teleport_core::{
    build_expansion_t3, BranchMode, BranchTable, MeasurementError, MeasurementRecord,
    ProtocolSampler, RowVerdict, RunSeed, SurfacePoint, Verdict,
};

use crate::config::RunConfig;
use crate::oracle::{certify_analytic, CertificationReport, OracleError, Tolerances};

pub const FIDELITY_MAP_HEADER: &str =
    "x1_sigma,x2_sigma,f_alpha_lb,f_alphaprime_lb,degenerate_flag";
pub const TABLE_HEADER: &str = "kind,fock,atom2,verdict,asymptotic,exact,delta";
pub const SAMPLE_HEADER: &str =
    "seed,run,fock,atom2,verdict,x1_sigma,x2_sigma,fidelity_to_alpha,rejections";

/// Shortest decimal string that parses back to the same `f64`; `-0` prints as `0`.
pub fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v}")
}

/// Lower-bound surface over `cfg.map_grid` at `cfg.times`, one CSV row per
/// node, `x1` outer. Degenerate nodes carry empty value fields.
pub fn fidelity_map(cfg: &RunConfig) -> String {
    let grid = cfg.map_grid;
    let rows: Vec<String> = (0..grid.x1_count)
        .into_par_iter()
        .map(|i| {
            let x1 = grid.x1(i);
            let mut out = String::new();
            for j in 0..grid.x2_count {
                let p = SurfacePoint::evaluate(x1, grid.x2(j), &cfg.times, &cfg.params);
                let _ = match p.bounds {
                    Some(b) => writeln!(
                        out,
                        "{},{},{},{},0",
                        num(p.x1),
                        num(p.x2),
                        num(b.alpha),
                        num(b.alpha_prime)
                    ),
                    None => writeln!(out, "{},{},,,1", num(p.x1), num(p.x2)),
                };
            }
            out
        })
        .collect();
    let mut out = String::with_capacity(rows.iter().map(String::len).sum::<usize>() + 64);
    out.push_str(FIDELITY_MAP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
    }
    out
}

/// Both outcome tables side by side, then failure, success and grand totals.
pub fn table(cfg: &RunConfig) -> String {
    let e = build_expansion_t3(cfg.angles, cfg.times, cfg.params);
    let asym = e.branch_table(BranchMode::Asymptotic);
    let exact = e.branch_table(BranchMode::Exact);
    table_text(&asym, &exact)
}

fn table_text(asym: &BranchTable, exact: &BranchTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TABLE_HEADER}");
    for (a, x) in asym.rows.iter().zip(&exact.rows) {
        debug_assert_eq!((a.fock, a.atom2), (x.fock, x.atom2));
        let verdict = match a.verdict {
            RowVerdict::SuccessfulPendingPositions => "successful-pending-positions",
            RowVerdict::Unsuccessful => "unsuccessful",
        };
        let _ = writeln!(
            out,
            "row,{},{},{verdict},{},{},{}",
            a.fock,
            a.atom2.symbol(),
            num(a.probability),
            num(x.probability),
            num(x.probability - a.probability)
        );
    }
    let totals = [
        (
            "unsuccessful",
            asym.failure_probability(),
            exact.failure_probability(),
        ),
        (
            "successful",
            asym.success_probability(),
            exact.success_probability(),
        ),
        ("all", asym.total(), exact.total()),
    ];
    for (name, a, x) in totals {
        let _ = writeln!(out, "total,,,{name},{},{},{}", num(a), num(x), num(x - a));
    }
    out
}

/// Aggregates of a batch of runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub shots: u64,
    pub successes: u64,
    pub corrected: u64,
    pub success_frequency: f64,
    /// Binomial standard error `√(f(1−f)/N)`.
    pub success_stderr: f64,
    /// Mean of `⟨α|ρ|α⟩` after correction over successful runs.
    pub mean_corrected_fidelity: f64,
    pub mean_rejections: f64,
}

impl SampleSummary {
    pub fn from_records(records: &[MeasurementRecord]) -> Self {
        let shots = records.len() as u64;
        let ok: Vec<&MeasurementRecord> =
            records.iter().filter(|r| r.verdict.is_success()).collect();
        let successes = ok.len() as u64;
        let corrected = ok
            .iter()
            .filter(|r| r.verdict == Verdict::SuccessAfterCorrection)
            .count() as u64;
        let f = successes as f64 / shots as f64;
        let mean = |v: &mut dyn Iterator<Item = f64>| {
            let (s, n) = v.fold((0.0, 0u64), |(s, n), x| (s + x, n + 1));
            if n == 0 {
                f64::NAN
            } else {
                s / n as f64
            }
        };
        Self {
            shots,
            successes,
            corrected,
            success_frequency: f,
            success_stderr: (f * (1.0 - f) / shots as f64).sqrt(),
            mean_corrected_fidelity: mean(&mut ok.iter().filter_map(|r| r.fidelity_to_alpha)),
            mean_rejections: mean(&mut ok.iter().map(|r| r.rejections as f64)),
        }
    }

    pub fn to_lines(&self, prefix: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{prefix}shots={}", self.shots);
        let _ = writeln!(out, "{prefix}successes={}", self.successes);
        let _ = writeln!(out, "{prefix}corrected={}", self.corrected);
        let _ = writeln!(
            out,
            "{prefix}success_frequency={}",
            num(self.success_frequency)
        );
        let _ = writeln!(out, "{prefix}success_stderr={}", num(self.success_stderr));
        let _ = writeln!(
            out,
            "{prefix}mean_corrected_fidelity={}",
            num(self.mean_corrected_fidelity)
        );
        let _ = writeln!(out, "{prefix}mean_rejections={}", num(self.mean_rejections));
        out
    }
}

/// `cfg.shots` runs from master seed `cfg.seed`, in run order.
pub fn sample_records(cfg: &RunConfig) -> Result<Vec<MeasurementRecord>, MeasurementError> {
    let sampler = ProtocolSampler::new(cfg.angles, cfg.times, cfg.params);
    (0..cfg.shots)
        .into_par_iter()
        .map(|run| sampler.run(RunSeed::new(cfg.seed, run)))
        .collect()
}

/// One CSV row per run followed by `# key=value` summary lines.
pub fn sample(cfg: &RunConfig) -> Result<(String, SampleSummary), MeasurementError> {
    let records = sample_records(cfg)?;
    let summary = SampleSummary::from_records(&records);
    let mut out = String::with_capacity(records.len() * 96);
    let _ = writeln!(out, "{SAMPLE_HEADER}");
    for r in &records {
        let (x1, x2) = r
            .positions
            .map_or((String::new(), String::new()), |(a, b)| (num(a), num(b)));
        let f = r.fidelity_to_alpha.map_or(String::new(), num);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{x1},{x2},{f},{}",
            r.seed.master,
            r.seed.run,
            r.fock_outcome,
            r.atom2_outcome.symbol(),
            r.verdict.as_str(),
            r.rejections
        );
    }
    out.push_str(&summary.to_lines("# "));
    Ok((out, summary))
}

/// Certification report text and the first violated tolerance, if any.
pub fn verify(cfg: &RunConfig) -> Result<(CertificationReport, Option<String>), OracleError> {
    let report = certify_analytic(&cfg.tau_list, &cfg.params, &cfg.oracle_grid)?;
    let violation = report.first_violation(&Tolerances::default());
    Ok((report, violation))
}
