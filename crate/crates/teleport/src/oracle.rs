//! Brute-force check of the analytic wavepackets: a split-operator
//! Schrödinger propagator on a periodic grid, plus grid quadrature.
//!
//! One Strang step is `e^{−iV·dt/2ħ} · F⁻¹ e^{−iħk²dt/2m} F · e^{−iV·dt/2ħ}`.
//! For kinetic energy plus a linear potential the only splitting error is a
//! global phase of order `dt²`, so densities come out at round-off level and
//! the scheme's order shows up in the complex amplitude. The amplitude is
//! therefore compared with the exact solution, phase included, which is built
//! here from the free Gaussian and the uniform-force transformation rather
//! than taken from the wavepackets module under test.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use rustfft::FftPlanner;
use teleport_core::wavepackets::printed_form_amplitude;
use teleport_core::{branch_overlap, BranchSign, DeflectedWavepacket, PhysicalParams, C64};
use thiserror::Error;

/// Probability allowed in the outer edge bands before a run is rejected.
pub const EDGE_MASS_LIMIT: f64 = 1e-6;
/// Width of each edge band as a fraction of the grid span.
pub const EDGE_FRACTION: f64 = 0.05;
/// Bound on the kinetic phase one step may accumulate over the occupied band.
pub const MAX_STEP_PHASE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("time step too large: kinetic phase {phase:.3} rad per step exceeds {MAX_STEP_PHASE}")]
    TimeStepTooLarge { phase: f64 },
    #[error("wavefunctions live on different grids")]
    GridMismatch,
    #[error("invalid duration {0}")]
    InvalidDuration(f64),
}

/// Periodic position grid `x_i = x_min + i·dx`, `dx = (x_max − x_min)/n`.
///
/// Positions are in units of `σ_x`; the number of steps of a propagation is
/// `⌈duration/dt⌉`, with the step shortened so they tile the duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    /// Nominal time step, s.
    pub dt: f64,
}

impl GridSpec {
    /// 4096 points over ±20σ with `dt = 10⁻³/ε`.
    pub fn default_for(params: &PhysicalParams) -> Self {
        Self::symmetric(20.0, 4096, 1e-3 / params.coupling())
    }

    pub fn symmetric(half_width: f64, n_points: usize, dt: f64) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            n_points,
            dt,
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.n_points < 256 || !self.n_points.is_power_of_two() {
            return Err(OracleError::InvalidGrid(format!(
                "n_points must be a power of two ≥ 256, got {}",
                self.n_points
            )));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(OracleError::InvalidGrid(format!(
                "need x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(OracleError::InvalidGrid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        Ok(())
    }

    /// Grid spacing in metres.
    pub fn dx(&self, params: &PhysicalParams) -> f64 {
        (self.x_max - self.x_min) * params.sigma_x() / self.n_points as f64
    }

    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points,
            ..*self
        }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..*self }
    }

    /// Checks that a packet pushed by `force` for `duration` stays well inside
    /// the grid and that the step resolves its kinetic phase.
    pub fn check_adequate(
        &self,
        force: f64,
        duration: f64,
        params: &PhysicalParams,
    ) -> Result<(), OracleError> {
        self.validate()?;
        let s = params.sigma_x();
        let shift = (0.5 * force * duration * duration / params.mass()).abs() / s;
        let needed = shift + 8.0 * params.spread(duration) / s;
        if self.x_min > -needed || self.x_max < needed {
            return Err(OracleError::GridTooSmall(format!(
                "grid [{}, {}]σ does not span ±{needed:.2}σ",
                self.x_min, self.x_max
            )));
        }
        let k_max = (force * duration / params.hbar()).abs() + 8.0 / (2.0 * s);
        let phase = params.hbar() * k_max * k_max / (2.0 * params.mass()) * self.dt;
        if phase >= MAX_STEP_PHASE {
            return Err(OracleError::TimeStepTooLarge { phase });
        }
        Ok(())
    }
}

/// Samples of a wavefunction on a [`GridSpec`], per √metre.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub samples: Vec<C64>,
    /// Spacing, m.
    pub dx: f64,
    /// First grid point, m.
    pub x_min: f64,
}

impl GridWavefunction {
    pub fn sample(grid: &GridSpec, params: &PhysicalParams, f: impl Fn(f64) -> C64) -> Self {
        let dx = grid.dx(params);
        let x_min = grid.x_min * params.sigma_x();
        let samples = (0..grid.n_points)
            .map(|i| f(x_min + dx * i as f64))
            .collect();
        Self { samples, dx, x_min }
    }

    /// The initial packet every atom enters with.
    pub fn initial(grid: &GridSpec, params: &PhysicalParams) -> Self {
        let wp = DeflectedWavepacket::initial(*params);
        Self::sample(grid, params, |x| wp.amplitude(x))
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.dx * i as f64
    }

    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn density(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, z)| (self.x(i), z.norm_sqr()))
    }

    /// `⟨x⟩` in metres.
    pub fn centroid(&self) -> f64 {
        self.density().map(|(x, p)| x * p).sum::<f64>() * self.dx / self.norm_sqr()
    }

    /// Probability within `EDGE_FRACTION` of the span from either end.
    pub fn edge_mass(&self) -> f64 {
        let n = self.samples.len();
        let band = ((n as f64) * EDGE_FRACTION).ceil() as usize;
        let edge: f64 = self.samples[..band]
            .iter()
            .chain(&self.samples[n - band..])
            .map(|z| z.norm_sqr())
            .sum();
        edge * self.dx
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.samples.len() == other.samples.len()
            && self.dx == other.dx
            && self.x_min == other.x_min
    }
}

/// `Σ conj(a_i)·b_i·dx`.
pub fn quadrature_overlap(a: &GridWavefunction, b: &GridWavefunction) -> Result<C64, OracleError> {
    if !a.same_grid(b) {
        return Err(OracleError::GridMismatch);
    }
    let sum: C64 = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(u, v)| u.conj() * v)
        .sum();
    Ok(sum * a.dx)
}

/// Propagates under `p²/2m + V(x)` with the nodal potential of one dressed
/// branch, `V = ±√(n+1)·ħεk·x`.
pub fn propagate(
    initial: &GridWavefunction,
    branch: BranchSign,
    fock_n: u32,
    duration: f64,
    params: &PhysicalParams,
    grid: &GridSpec,
) -> Result<GridWavefunction, OracleError> {
    propagate_linear(
        initial,
        branch_force(branch, fock_n, params),
        duration,
        params,
        grid,
    )
}

/// Force `−dV/dx` exerted by a dressed branch, N.
pub fn branch_force(branch: BranchSign, fock_n: u32, params: &PhysicalParams) -> f64 {
    -branch.value()
        * f64::from(fock_n + 1).sqrt()
        * params.hbar()
        * params.coupling()
        * params.wave_number()
}

/// Strang-split propagation under `p²/2m − force·x`.
pub fn propagate_linear(
    initial: &GridWavefunction,
    force: f64,
    duration: f64,
    params: &PhysicalParams,
    grid: &GridSpec,
) -> Result<GridWavefunction, OracleError> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(OracleError::InvalidDuration(duration));
    }
    grid.check_adequate(force, duration, params)?;
    let n = grid.n_points;
    if initial.samples.len() != n || initial.dx != grid.dx(params) {
        return Err(OracleError::GridMismatch);
    }
    let mut psi = initial.clone();
    let steps = (duration / grid.dt).ceil() as usize;
    if steps == 0 {
        return Ok(psi);
    }
    let dt = duration / steps as f64;
    let hbar = params.hbar();

    // V = −F·x; the half-step factor is exp(+iF·x·dt/(2ħ)).
    let half_kick: Vec<C64> = (0..n)
        .map(|i| C64::from_polar(1.0, force * psi.x(i) * dt / (2.0 * hbar)))
        .collect();
    let full_kick: Vec<C64> = half_kick.iter().map(|z| z * z).collect();
    let dk = 2.0 * PI / (n as f64 * psi.dx);
    let drift: Vec<C64> = (0..n)
        .map(|j| {
            let m = if j < n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            };
            let k = m * dk;
            C64::from_polar(1.0 / n as f64, -hbar * k * k * dt / (2.0 * params.mass()))
        })
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut scratch = vec![C64::new(0.0, 0.0); forward.get_inplace_scratch_len()];

    let data = &mut psi.samples;
    for (z, k) in data.iter_mut().zip(&half_kick) {
        *z *= k;
    }
    for step in 0..steps {
        forward.process_with_scratch(data, &mut scratch);
        for (z, d) in data.iter_mut().zip(&drift) {
            *z *= d;
        }
        inverse.process_with_scratch(data, &mut scratch);
        let kick = if step + 1 == steps {
            &half_kick
        } else {
            &full_kick
        };
        for (z, k) in data.iter_mut().zip(kick) {
            *z *= k;
        }
    }

    let edge = psi.edge_mass();
    if edge > EDGE_MASS_LIMIT {
        return Err(OracleError::GridTooSmall(format!(
            "{edge:.3e} of the probability reached the outer {}% of the grid",
            EDGE_FRACTION * 100.0
        )));
    }
    Ok(psi)
}

/// Exact solution for the initial packet under a uniform force:
/// `ψ(x,t) = exp(iFtx/ħ − iF²t³/(6mħ)) · ψ_free(x − Ft²/(2m), t)`, with the
/// freely spreading Gaussian
/// `ψ_free(x,t) = (2πσ²)^(−¼) (1 + iħt/(2mσ²))^(−½) exp(−x²/(4σ²(1 + iħt/(2mσ²))))`.
pub fn exact_amplitude(x: f64, force: f64, t: f64, params: &PhysicalParams) -> C64 {
    let (m, hbar, s) = (params.mass(), params.hbar(), params.sigma_x());
    let spreading = C64::new(1.0, hbar * t / (2.0 * m * s * s));
    let y = x - force * t * t / (2.0 * m);
    let free = (2.0 * PI * s * s).powf(-0.25) / spreading.sqrt()
        * (-(y * y) / (spreading * (4.0 * s * s))).exp();
    let phase = force * t * x / hbar - force * force * t.powi(3) / (6.0 * m * hbar);
    C64::from_polar(1.0, phase) * free
}

/// `(Σ |a_i − b_i|²·dx)^½` with `a, b` rescaled to σ units.
fn amplitude_error(
    psi: &GridWavefunction,
    exact: impl Fn(f64) -> C64,
    params: &PhysicalParams,
) -> f64 {
    let s = params.sigma_x();
    let sum: f64 = psi
        .samples
        .iter()
        .enumerate()
        .map(|(i, z)| (z - exact(psi.x(i))).norm_sqr() * s)
        .sum();
    (sum * psi.dx / s).sqrt()
}

/// `(Σ (ρ_i − ρ(x_i))²·dx)^½` with densities and positions in σ units.
fn density_error(
    psi: &GridWavefunction,
    density: impl Fn(f64) -> f64,
    params: &PhysicalParams,
) -> f64 {
    let s = params.sigma_x();
    let sum: f64 = psi
        .density()
        .map(|(x, p)| ((p - density(x)) * s).powi(2))
        .sum();
    (sum * psi.dx / s).sqrt()
}

/// Errors of one branch at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCertificate {
    pub branch: BranchSign,
    /// `|1 − ‖ψ‖²|` after propagation.
    pub norm_drift: f64,
    /// Grid density vs the closed-form density, σ units.
    pub density_l2: f64,
    /// Grid centroid vs the closed-form centre, in σ.
    pub centroid_error: f64,
    /// Complex amplitude vs the exact solution at `dt` and at `dt/2`.
    pub amplitude_l2: f64,
    pub amplitude_l2_half_dt: f64,
    /// `amplitude_l2 / amplitude_l2_half_dt`; 4 for a second-order scheme.
    pub dt_ratio: f64,
    pub order: f64,
    /// Density L² change when the grid spacing is halved.
    pub dx_change: f64,
    /// Density L² error of the printed-width formula (information only).
    pub printed_form_density_l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeCertificate {
    pub eps_tau: f64,
    /// `⟨Φ⁺|Φ⁻⟩` from the two propagated grids.
    pub oracle_overlap: C64,
    /// The closed form it is checked against.
    pub closed_overlap: C64,
    pub overlap_error: f64,
    pub branches: [BranchCertificate; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub grid: GridSpec,
    pub times: Vec<TimeCertificate>,
}

/// Tolerances a certification has to meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub density_l2: f64,
    pub centroid_sigma: f64,
    pub overlap: f64,
    pub norm_drift: f64,
    pub order_min: f64,
    pub order_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            density_l2: 1e-3,
            centroid_sigma: 0.01,
            overlap: 1e-3,
            norm_drift: 1e-8,
            order_min: 1.8,
            order_max: 2.2,
        }
    }
}

struct Run {
    psi: GridWavefunction,
    cert: BranchCertificate,
}

fn certify_branch(
    branch: BranchSign,
    tau: f64,
    params: &PhysicalParams,
    grid: &GridSpec,
) -> Result<Run, OracleError> {
    let initial = GridWavefunction::initial(grid, params);
    if tau == 0.0 {
        return Ok(Run {
            psi: initial,
            cert: BranchCertificate {
                branch,
                norm_drift: 0.0,
                density_l2: 0.0,
                centroid_error: 0.0,
                amplitude_l2: 0.0,
                amplitude_l2_half_dt: 0.0,
                dt_ratio: f64::NAN,
                order: f64::NAN,
                dx_change: 0.0,
                printed_form_density_l2: 0.0,
            },
        });
    }
    let s = params.sigma_x();
    let force = branch_force(branch, 0, params);
    let wp = DeflectedWavepacket::new(branch, 0, tau, *params)
        .map_err(|_| OracleError::InvalidDuration(tau))?;

    let psi = propagate_linear(&initial, force, tau, params, grid)?;
    let half_grid = grid.with_dt(grid.dt / 2.0);
    let psi_half = propagate_linear(&initial, force, tau, params, &half_grid)?;
    let fine_grid = grid.refined();
    let psi_fine = propagate_linear(
        &GridWavefunction::initial(&fine_grid, params),
        force,
        tau,
        params,
        &fine_grid,
    )?;

    let exact = |x| exact_amplitude(x, force, tau, params);
    let err = amplitude_error(&psi, exact, params);
    let err_half = amplitude_error(&psi_half, exact, params);
    let dt_ratio = err / err_half;
    // Fine-grid samples at even indices sit on the coarse grid points.
    let dx_change = {
        let sum: f64 = psi
            .samples
            .iter()
            .zip(psi_fine.samples.iter().step_by(2))
            .map(|(a, b)| ((a.norm_sqr() - b.norm_sqr()) * s).powi(2))
            .sum();
        (sum * psi.dx / s).sqrt()
    };
    let cert = BranchCertificate {
        branch,
        norm_drift: (1.0 - psi.norm_sqr()).abs(),
        density_l2: density_error(&psi, |x| wp.density(x), params),
        centroid_error: (psi.centroid() - wp.center()).abs() / s,
        amplitude_l2: err,
        amplitude_l2_half_dt: err_half,
        dt_ratio,
        order: dt_ratio.log2(),
        dx_change,
        printed_form_density_l2: density_error(
            &psi,
            |x| printed_form_amplitude(x, &wp).norm_sqr(),
            params,
        ),
    };
    Ok(Run { psi, cert })
}

/// Certifies the analytic packets of both branches at every `ετ` in
/// `eps_tau_list`. Independent runs go in parallel.
pub fn certify_analytic(
    eps_tau_list: &[f64],
    params: &PhysicalParams,
    grid: &GridSpec,
) -> Result<CertificationReport, OracleError> {
    grid.validate()?;
    for &e in eps_tau_list {
        if !(e.is_finite() && e >= 0.0) {
            return Err(OracleError::InvalidDuration(e));
        }
    }
    let jobs: Vec<(usize, BranchSign)> = (0..eps_tau_list.len())
        .flat_map(|i| BranchSign::BOTH.map(|b| (i, b)))
        .collect();
    let runs: Vec<Run> = jobs
        .par_iter()
        .map(|&(i, b)| certify_branch(b, params.time_from_eps_tau(eps_tau_list[i]), params, grid))
        .collect::<Result<_, _>>()?;

    let times = eps_tau_list
        .iter()
        .zip(runs.chunks_exact(2))
        .map(|(&eps_tau, pair)| {
            let tau = params.time_from_eps_tau(eps_tau);
            let closed_overlap = branch_overlap(tau, 0, params);
            let (oracle_overlap, overlap_error) = if tau == 0.0 {
                (closed_overlap, 0.0)
            } else {
                let o = quadrature_overlap(&pair[0].psi, &pair[1].psi)?;
                (o, (o - closed_overlap).norm())
            };
            Ok(TimeCertificate {
                eps_tau,
                oracle_overlap,
                closed_overlap,
                overlap_error,
                branches: [pair[0].cert, pair[1].cert],
            })
        })
        .collect::<Result<_, OracleError>>()?;
    Ok(CertificationReport { grid: *grid, times })
}

fn branch_key(b: BranchSign) -> &'static str {
    match b {
        BranchSign::Plus => "plus",
        BranchSign::Minus => "minus",
    }
}

impl CertificationReport {
    /// Flat `key=value` lines, one quantity per line.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let g = &self.grid;
        let _ = writeln!(out, "grid.x_min_sigma={}", g.x_min);
        let _ = writeln!(out, "grid.x_max_sigma={}", g.x_max);
        let _ = writeln!(out, "grid.n_points={}", g.n_points);
        let _ = writeln!(out, "grid.dt={:e}", g.dt);
        let _ = writeln!(out, "times={}", self.times.len());
        for (i, t) in self.times.iter().enumerate() {
            let p = format!("time.{i}");
            let _ = writeln!(out, "{p}.eps_tau={}", t.eps_tau);
            let _ = writeln!(out, "{p}.overlap_oracle_re={:e}", t.oracle_overlap.re);
            let _ = writeln!(out, "{p}.overlap_oracle_im={:e}", t.oracle_overlap.im);
            let _ = writeln!(out, "{p}.overlap_closed_re={:e}", t.closed_overlap.re);
            let _ = writeln!(out, "{p}.overlap_closed_im={:e}", t.closed_overlap.im);
            let _ = writeln!(out, "{p}.overlap_error={:e}", t.overlap_error);
            for c in &t.branches {
                let q = format!("{p}.{}", branch_key(c.branch));
                let _ = writeln!(out, "{q}.norm_drift={:e}", c.norm_drift);
                let _ = writeln!(out, "{q}.density_l2={:e}", c.density_l2);
                let _ = writeln!(out, "{q}.centroid_error_sigma={:e}", c.centroid_error);
                let _ = writeln!(out, "{q}.amplitude_l2={:e}", c.amplitude_l2);
                let _ = writeln!(out, "{q}.amplitude_l2_half_dt={:e}", c.amplitude_l2_half_dt);
                let _ = writeln!(out, "{q}.dt_ratio={}", c.dt_ratio);
                let _ = writeln!(out, "{q}.order={}", c.order);
                let _ = writeln!(out, "{q}.dx_change={:e}", c.dx_change);
                let _ = writeln!(
                    out,
                    "{q}.printed_form_density_l2={:e}",
                    c.printed_form_density_l2
                );
            }
        }
        out
    }

    /// First tolerance this report violates, as `key=value > limit`.
    pub fn first_violation(&self, tol: &Tolerances) -> Option<String> {
        for (i, t) in self.times.iter().enumerate() {
            let p = format!("time.{i}");
            if !(t.overlap_error < tol.overlap) {
                return Some(format!(
                    "{p}.overlap_error={:e} ≥ {:e}",
                    t.overlap_error, tol.overlap
                ));
            }
            for c in &t.branches {
                let q = format!("{p}.{}", branch_key(c.branch));
                let checks = [
                    ("norm_drift", c.norm_drift, tol.norm_drift),
                    ("density_l2", c.density_l2, tol.density_l2),
                    ("centroid_error_sigma", c.centroid_error, tol.centroid_sigma),
                ];
                for (name, value, limit) in checks {
                    if !(value < limit) {
                        return Some(format!("{q}.{name}={value:e} ≥ {limit:e}"));
                    }
                }
                // No propagation, no order to observe.
                if t.eps_tau > 0.0 && !(tol.order_min..=tol.order_max).contains(&c.order) {
                    return Some(format!(
                        "{q}.order={} outside [{}, {}]",
                        c.order, tol.order_min, tol.order_max
                    ));
                }
            }
        }
        None
    }
}

/// Parses the `key=value` report format; blank lines and `#` comments are
/// skipped.
pub fn parse_key_value(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: missing '='", n + 1))?;
        if map
            .insert(k.trim().to_owned(), v.trim().to_owned())
            .is_some()
        {
            return Err(format!("line {}: duplicate key {k}", n + 1));
        }
    }
    Ok(map)
}
