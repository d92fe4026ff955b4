//! Independent discrete-ordinates solver for the two model kinetic
//! equations on a truncated half-space. It shares no machinery with the
//! singular-eigenfunction stack and is used to cross-validate the analytic
//! slip constant and Knudsen-layer profiles.
//!
//! The solver works on the defect field `g = h − h_as_known` (the known part
//! of the asymptotics: the gradient term for the slip problem, the constant
//! background for diffusion), which satisfies the homogeneous equation with
//! wall inflow `g(0, μ>0) = −h_as_known(0, μ)`. Discretization: diamond
//! differencing on a mesh graded toward the wall, ordinates from Gauss rules
//! matched to the model weight, plain source iteration.
//!
//! At the truncated right end the asymptotic condition (`g` tends to an
//! isotropic constant, zero net current) is imposed by specular reflection.
//! A vacuum condition there would be wrong for the conservative slip
//! problem: the defect tends to `2U₀ ≠ 0`, and with an absorbing right
//! boundary the far field would sag linearly across the whole slab instead
//! of settling at the constant.

use std::fmt;

use serde::Serialize;

use crate::dispersion::{KineticModel, ModelKind};
use crate::halfspace::{HalfSpaceSolution, Problem, SolveError};
use crate::quadrature::gauss_legendre;

/// Truncation of the Maxwell velocity half-line: the Gaussian weight is below
/// 1e-15 beyond.
const MAXWELL_MU_MAX: f64 = 6.0;

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Slab length in mean free paths.
    pub domain_length: f64,
    /// Number of spatial cells (graded toward the wall).
    pub cells: usize,
    /// Ordinates per half-range.
    pub ordinates: usize,
    /// Source-iteration stopping tolerance on the scalar moment.
    pub sweep_tol: f64,
    pub max_sweeps: usize,
    /// Geometric growth ratio of cell widths away from the wall.
    pub grading_ratio: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            domain_length: 25.0,
            cells: 2000,
            ordinates: 64,
            sweep_tol: 1e-10,
            max_sweeps: 60_000,
            grading_ratio: 1.05,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<(), OracleError> {
        if self.domain_length < 10.0 {
            return Err(OracleError::InvalidConfig(format!(
                "domain length {} < 10 mean free paths",
                self.domain_length
            )));
        }
        if self.cells < 16 {
            return Err(OracleError::InvalidConfig("fewer than 16 cells".into()));
        }
        if self.ordinates < 4 || self.ordinates % 2 != 0 {
            return Err(OracleError::InvalidConfig(format!(
                "ordinates per half-range must be even and ≥ 4, got {}",
                self.ordinates
            )));
        }
        if !(self.grading_ratio >= 1.0 && self.grading_ratio <= 1.5) {
            return Err(OracleError::InvalidConfig(format!(
                "grading ratio {} outside [1.0, 1.5]",
                self.grading_ratio
            )));
        }
        if self.sweep_tol <= 0.0 {
            return Err(OracleError::InvalidConfig("sweep_tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum OracleError {
    InvalidConfig(String),
    /// Source iteration ran out of sweeps; carries the spectral-radius
    /// estimate measured from successive iterates.
    NotConverged {
        sweeps: usize,
        last_delta: f64,
        spectral_radius: f64,
    },
    /// The far-field window is not asymptotic (domain too short).
    NonAsymptotic { window_residual: f64, value: f64 },
    /// Analytic and numeric sides describe different problems.
    Mismatch(String),
    Solve(SolveError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::InvalidConfig(m) => write!(f, "invalid oracle config: {m}"),
            OracleError::NotConverged {
                sweeps,
                last_delta,
                spectral_radius,
            } => write!(
                f,
                "source iteration not converged after {sweeps} sweeps \
                 (last delta {last_delta:.3e}, spectral radius ≈ {spectral_radius:.6})"
            ),
            OracleError::NonAsymptotic {
                window_residual,
                value,
            } => write!(
                f,
                "far-field window not asymptotic: residual {window_residual:.3e} \
                 around fitted constant {value:.6e}; use a longer domain"
            ),
            OracleError::Mismatch(m) => write!(f, "problem mismatch: {m}"),
            OracleError::Solve(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for OracleError {}

impl From<SolveError> for OracleError {
    fn from(e: SolveError) -> Self {
        OracleError::Solve(e)
    }
}

/// Converged discrete-ordinates field on the truncated half-space.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    problem: Problem,
    config: OracleConfig,
    /// Cell centers, ascending from the wall.
    x: Vec<f64>,
    widths: Vec<f64>,
    /// Ordinates (positive half), Gauss nodes for the model weight.
    mu: Vec<f64>,
    /// Scattering weights `W_k` (kernel weight folded in), one half-range.
    weights: Vec<f64>,
    /// Cell-average defect field, `field[k * cells + i]`; first `n_mu`
    /// blocks are the positive ordinates, then the negatives (mirrored).
    field: Vec<f64>,
    /// Scalar moment per cell.
    scalar: Vec<f64>,
    sweeps: usize,
    spectral_radius: f64,
    /// Fitted far-field constant of the defect, with uncertainty inputs.
    constant: f64,
    window_residual: f64,
    window_shift: f64,
    /// Same constant from an internal half-resolution solve.
    coarse_constant: f64,
}

impl OracleSolution {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn x_centers(&self) -> &[f64] {
        &self.x
    }

    pub fn cell_widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    /// Scattering weights (kernel folded in), one half-range.
    pub fn scattering_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Max over cells of the kernel-weighted residual of the discrete
    /// equations at the converged iterate: one extra sweep is run from the
    /// stored scalar source and the scalar shift it produces is returned.
    /// Bounded by the stopping tolerance at convergence.
    pub fn balance_residual(&self) -> f64 {
        let n = self.x.len();
        let nk = self.mu.len();
        let mut new_scalar = vec![0.0; n];
        for k in 0..nk {
            let m = self.mu[k];
            let mut psi_in = wall_inflow(&self.problem, m);
            let mut right = 0.0;
            for i in 0..n {
                let r = m / self.widths[i];
                let psi_out = (self.scalar[i] + (r - 0.5) * psi_in) / (r + 0.5);
                new_scalar[i] += self.weights[k] * 0.5 * (psi_in + psi_out);
                psi_in = psi_out;
                right = psi_out;
            }
            let mut psi = right;
            for i in (0..n).rev() {
                let r = m / self.widths[i];
                let psi_out = (self.scalar[i] + (r - 0.5) * psi) / (r + 0.5);
                new_scalar[i] += self.weights[k] * 0.5 * (psi + psi_out);
                psi = psi_out;
            }
        }
        new_scalar
            .iter()
            .zip(&self.scalar)
            .fold(0.0f64, |w, (a, b)| w.max((a - b).abs()))
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.mu
    }

    pub fn scalar_moment(&self) -> &[f64] {
        &self.scalar
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    /// Defect value at cell `i`, ordinate index `k` (0..2·n_mu; positives
    /// first).
    pub fn defect_at(&self, i: usize, k: usize) -> f64 {
        self.field[k * self.x.len() + i]
    }

    pub fn n_ordinates(&self) -> usize {
        self.mu.len()
    }
}

/// Builds a Gauss rule for `∫ w(t) f(t) dt` on `[lo, hi]` by the discretized
/// Stieltjes procedure: orthogonal-polynomial recurrence from a fine
/// composite Gauss–Legendre discretization, nodes by bisection on the
/// interlacing brackets, weights from the Christoffel function.
pub(crate) fn gauss_rule_for_weight(
    w: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && hi > lo);
    // Discretize the measure.
    let panels = 16.max(2 * n);
    let (gx, gw) = gauss_legendre(24);
    let mut nodes = Vec::with_capacity(panels * 24);
    let mut masses = Vec::with_capacity(panels * 24);
    for p in 0..panels {
        let a = lo + (hi - lo) * p as f64 / panels as f64;
        let b = lo + (hi - lo) * (p + 1) as f64 / panels as f64;
        for (t, wt) in gx.iter().zip(&gw) {
            let x = 0.5 * (a + b) + 0.5 * (b - a) * t;
            nodes.push(x);
            masses.push(0.5 * (b - a) * wt * w(x));
        }
    }
    // Monic three-term recurrence by Stieltjes.
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let m = nodes.len();
    let mut p_prev = vec![0.0; m];
    let mut p_cur = vec![1.0; m];
    let mut norm_prev = 0.0;
    for k in 0..n {
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for j in 0..m {
            let pj2 = p_cur[j] * p_cur[j] * masses[j];
            s0 += pj2;
            s1 += nodes[j] * pj2;
        }
        alpha[k] = s1 / s0;
        beta[k] = if k == 0 { s0 } else { s0 / norm_prev };
        norm_prev = s0;
        for j in 0..m {
            let next = (nodes[j] - alpha[k]) * p_cur[j] - beta[k] * p_prev[j];
            p_prev[j] = p_cur[j];
            p_cur[j] = next;
        }
    }
    // Orthonormal evaluation for root-finding and Christoffel weights.
    let eval_all = |t: f64, upto: usize| -> Vec<f64> {
        let mut vals = Vec::with_capacity(upto + 1);
        let mut q_prev = 0.0;
        let mut q_cur = 1.0 / beta[0].sqrt();
        vals.push(q_cur);
        for k in 0..upto {
            let b_next = if k + 1 < n { beta[k + 1].sqrt() } else { 1.0 };
            let q_next = ((t - alpha[k]) * q_cur - if k == 0 { 0.0 } else { beta[k].sqrt() * q_prev }) / b_next;
            q_prev = q_cur;
            q_cur = q_next;
            vals.push(q_cur);
        }
        vals
    };
    let poly = |t: f64, k: usize| -> f64 { *eval_all(t, k).last().unwrap() };
    // Roots by interlacing: roots of q_{k+1} bracketed by those of q_k.
    let mut roots: Vec<f64> = vec![alpha[0]];
    for k in 2..=n {
        let mut brackets = Vec::with_capacity(k + 1);
        brackets.push(lo);
        brackets.extend_from_slice(&roots);
        brackets.push(hi);
        let mut next = Vec::with_capacity(k);
        for win in brackets.windows(2) {
            let (mut a, mut b) = (win[0], win[1]);
            let (fa, fb) = (poly(a, k), poly(b, k));
            debug_assert!(fa * fb <= 0.0, "interlacing violated");
            let _ = fb;
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let fm = poly(mid, k);
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a < 1e-15 * (hi - lo) {
                    break;
                }
            }
            next.push(0.5 * (a + b));
        }
        roots = next;
    }
    // Christoffel weights: λ_i = 1/Σ_{k<n} q_k(x_i)².
    let weights: Vec<f64> = roots
        .iter()
        .map(|&r| {
            let vals = eval_all(r, n - 1);
            1.0 / vals.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    (roots, weights)
}

/// Spatial mesh graded toward the wall: widths grow geometrically from the
/// first cell by `ratio`, capped so the grid fills the slab exactly.
fn graded_mesh(length: f64, cells: usize, ratio: f64) -> Vec<f64> {
    let cap = 2.0 * length / cells as f64;
    let total = |d0: f64| -> f64 {
        let mut sum = 0.0;
        let mut d = d0;
        for _ in 0..cells {
            sum += d.min(cap);
            d *= ratio;
        }
        sum
    };
    let mut lo = 0.0;
    let mut hi = length / cells as f64;
    // total is monotone in d0; bisect to fill `length` exactly.
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < length {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d0 = 0.5 * (lo + hi);
    let mut widths = Vec::with_capacity(cells);
    let mut d = d0;
    let mut acc = 0.0;
    for i in 0..cells {
        let w = if i + 1 == cells {
            length - acc
        } else {
            d.min(cap)
        };
        widths.push(w);
        acc += w;
        d *= ratio;
    }
    widths
}

fn split_in_half(widths: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(widths.len() * 2);
    for &w in widths {
        out.push(0.5 * w);
        out.push(0.5 * w);
    }
    out
}

/// Ordinates and scattering weights for the model: half-range
/// Gauss–Legendre for the constant-mean-free-path kernel, a Gauss rule for
/// the Gaussian weight on the truncated half-line for the Maxwell kernel.
/// The returned weights fold in the full kernel, so the scattering integral
/// is `Σ_k W_k (g_k⁺ + g_k⁻)`.
fn build_ordinates(model: &KineticModel, n: usize) -> (Vec<f64>, Vec<f64>) {
    match model.kind() {
        ModelKind::ConstMfp => {
            let (x, w) = gauss_legendre(n);
            let mu: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
            let wt: Vec<f64> = mu
                .iter()
                .zip(&w)
                .map(|(&m, &wi)| 0.75 * (1.0 - m * m) * 0.5 * wi)
                .collect();
            (mu, wt)
        }
        ModelKind::Maxwell => {
            let (mu, w) = gauss_rule_for_weight(|t| (-t * t).exp(), 0.0, MAXWELL_MU_MAX, n);
            let coef = model.kernel_coef();
            let wt: Vec<f64> = w.iter().map(|&wi| coef * wi).collect();
            (mu, wt)
        }
    }
}

/// Wall inflow of the defect field: `−h_as_known(0, μ)`.
fn wall_inflow(problem: &Problem, mu: f64) -> f64 {
    match problem {
        Problem::Kramers(p) => 2.0 * p.g_v * mu,
        Problem::Diffusion(p) => -p.g_n / (1.0 - p.c),
    }
}

/// Kinetic model matching a half-space problem.
pub fn model_for(problem: &Problem) -> Result<KineticModel, OracleError> {
    match problem {
        Problem::Kramers(_) => Ok(KineticModel::const_mfp()),
        Problem::Diffusion(p) => Ok(KineticModel::maxwell(p.c).map_err(SolveError::from)?),
    }
}

/// Solves the defect transport problem by diamond-differenced source
/// iteration. `model` must match the problem's kinetic equation.
pub fn solve_transport(
    model: &KineticModel,
    problem: &Problem,
    cfg: &OracleConfig,
) -> Result<OracleSolution, OracleError> {
    cfg.validate()?;
    match (model.kind(), problem) {
        (ModelKind::ConstMfp, Problem::Kramers(_)) => {}
        (ModelKind::Maxwell, Problem::Diffusion(p)) => {
            if (model.c() - p.c).abs() > 1e-14 {
                return Err(OracleError::Mismatch(format!(
                    "model c = {} but problem c = {}",
                    model.c(),
                    p.c
                )));
            }
        }
        _ => {
            return Err(OracleError::Mismatch(format!(
                "{} model paired with {} problem",
                model.name(),
                problem.name()
            )))
        }
    }

    let widths = graded_mesh(cfg.domain_length, cfg.cells, cfg.grading_ratio);
    let solved = sweep_to_convergence(model, problem, cfg, &widths)?;
    let (constant, window_residual, window_shift) =
        fit_far_field(&solved.x, &solved.widths, &solved.scalar, cfg.domain_length);

    // Half-resolution solve for the grid-sensitivity part of the uncertainty.
    let coarse_widths: Vec<f64> = widths.chunks(2).map(|c| c.iter().sum()).collect();
    let coarse = sweep_to_convergence(model, problem, cfg, &coarse_widths)?;
    let (coarse_constant, _, _) = fit_far_field(
        &coarse.x,
        &coarse.widths,
        &coarse.scalar,
        cfg.domain_length,
    );

    Ok(OracleSolution {
        problem: *problem,
        config: *cfg,
        x: solved.x,
        widths: solved.widths,
        mu: solved.mu,
        weights: solved.weights,
        field: solved.field,
        scalar: solved.scalar,
        sweeps: solved.sweeps,
        spectral_radius: solved.rho,
        constant,
        window_residual,
        window_shift,
        coarse_constant,
    })
}

struct SweepResult {
    x: Vec<f64>,
    widths: Vec<f64>,
    mu: Vec<f64>,
    weights: Vec<f64>,
    field: Vec<f64>,
    scalar: Vec<f64>,
    sweeps: usize,
    rho: f64,
}

fn sweep_to_convergence(
    model: &KineticModel,
    problem: &Problem,
    cfg: &OracleConfig,
    widths: &[f64],
) -> Result<SweepResult, OracleError> {
    let n = widths.len();
    let (mu, weights) = build_ordinates(model, cfg.ordinates);
    let nk = mu.len();
    let mut x = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &w in widths {
        x.push(acc + 0.5 * w);
        acc += w;
    }

    let inflow: Vec<f64> = mu.iter().map(|&m| wall_inflow(problem, m)).collect();
    let scale: f64 = inflow.iter().fold(1.0f64, |s, v| s.max(v.abs()));

    let mut q = vec![0.0; n]; // scattering source (previous scalar moment)
    let mut scalar = vec![0.0; n];
    let mut field = vec![0.0; 2 * nk * n];
    let mut right_edge = vec![0.0; nk];
    let mut deltas: Vec<f64> = Vec::new();
    let mut sweeps = 0;
    let stop = 0.5 * cfg.sweep_tol * scale;

    loop {
        sweeps += 1;
        let mut new_scalar = vec![0.0; n];
        for k in 0..nk {
            let m = mu[k];
            // Positive direction: wall inflow, march right.
            let mut psi_in = inflow[k];
            for i in 0..n {
                let r = m / widths[i];
                let psi_out = (q[i] + (r - 0.5) * psi_in) / (r + 0.5);
                let bar = 0.5 * (psi_in + psi_out);
                field[k * n + i] = bar;
                new_scalar[i] += weights[k] * bar;
                psi_in = psi_out;
            }
            right_edge[k] = psi_in;
            // Negative direction: specular reflection at the right end.
            let mut psi = right_edge[k];
            for i in (0..n).rev() {
                let r = m / widths[i];
                let psi_out = (q[i] + (r - 0.5) * psi) / (r + 0.5);
                let bar = 0.5 * (psi + psi_out);
                field[(nk + k) * n + i] = bar;
                new_scalar[i] += weights[k] * bar;
                psi = psi_out;
            }
        }
        let mut delta = 0.0f64;
        for i in 0..n {
            delta = delta.max((new_scalar[i] - scalar[i]).abs());
        }
        scalar = new_scalar;
        q.copy_from_slice(&scalar);
        deltas.push(delta);
        if delta < stop {
            break;
        }
        if sweeps >= cfg.max_sweeps {
            let rho = spectral_radius_estimate(&deltas);
            return Err(OracleError::NotConverged {
                sweeps,
                last_delta: delta,
                spectral_radius: rho,
            });
        }
    }

    let rho = spectral_radius_estimate(&deltas);
    Ok(SweepResult {
        x,
        widths: widths.to_vec(),
        mu,
        weights,
        field,
        scalar,
        sweeps,
        rho,
    })
}

fn spectral_radius_estimate(deltas: &[f64]) -> f64 {
    let n = deltas.len();
    if n < 12 {
        return 0.0;
    }
    let tail = &deltas[n - 10..];
    let mut ratios = 0.0;
    let mut count = 0;
    for w in tail.windows(2) {
        if w[0] > 0.0 && w[1] > 0.0 {
            ratios += w[1] / w[0];
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        ratios / count as f64
    }
}

/// Width-weighted constant fit of the scalar defect over `[L/2, 3L/4]`,
/// with the window max-deviation and a shifted-window fit for the
/// uncertainty estimate.
fn fit_far_field(x: &[f64], widths: &[f64], scalar: &[f64], length: f64) -> (f64, f64, f64) {
    let window_fit = |lo: f64, hi: f64| -> (f64, f64) {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..x.len() {
            if x[i] >= lo && x[i] <= hi {
                num += widths[i] * scalar[i];
                den += widths[i];
            }
        }
        let value = num / den.max(1e-300);
        let mut dev = 0.0f64;
        for i in 0..x.len() {
            if x[i] >= lo && x[i] <= hi {
                dev = dev.max((scalar[i] - value).abs());
            }
        }
        (value, dev)
    };
    let (value, dev) = window_fit(0.5 * length, 0.75 * length);
    let (shifted, _) = window_fit(0.45 * length, 0.65 * length);
    (value, dev, (value - shifted).abs())
}

/// Fitted far-field constant of the defect with its uncertainty.
///
/// The value is the least-squares constant over `x ∈ [L/2, 3L/4]`; the
/// uncertainty combines the window sensitivity and the shift under grid
/// halving. A window residual above 1% of the working scale means the
/// domain is too short to be asymptotic.
pub fn extract_constant(sol: &OracleSolution) -> Result<(f64, f64), OracleError> {
    let scale = sol
        .mu
        .iter()
        .map(|&m| wall_inflow(&sol.problem, m).abs())
        .fold(sol.constant.abs(), f64::max)
        .max(1e-300);
    if sol.window_residual > 0.01 * scale {
        return Err(OracleError::NonAsymptotic {
            window_residual: sol.window_residual,
            value: sol.constant,
        });
    }
    let uncertainty =
        sol.window_shift + (sol.constant - sol.coarse_constant).abs() / 3.0 + sol.window_residual;
    Ok((sol.constant, uncertainty))
}

/// Convergence study of the extracted constant under nested cell refinement
/// (each level splits every cell in half, keeping the mesh family
/// self-similar).
///
/// Errors are measured against `reference` when the caller has an
/// independent value (the analytic constant in cross-validation), otherwise
/// against the Richardson limit of the finest pair. The per-pair slopes
/// `log2(e_ℓ/e_{ℓ+1})` are reported coarsest first.
///
/// Diamond differencing's O(h²) truncation carries a small constant for this
/// functional (the window mean of a conservative field picks up an O(h⁴)
/// superconvergent component), so the quadratic regime is measured at the
/// coarsest admissible meshes, where unresolved small-μ wall layers dominate
/// the error; past it the observed order rises above 2 rather than below.
pub fn convergence_slope(
    model: &KineticModel,
    problem: &Problem,
    base: &OracleConfig,
    reference: Option<f64>,
) -> Result<ConvergenceStudy, OracleError> {
    base.validate()?;
    const LEVELS: usize = 4;
    let mut widths = graded_mesh(base.domain_length, base.cells, base.grading_ratio);
    let mut cells = Vec::with_capacity(LEVELS);
    let mut constants = Vec::with_capacity(LEVELS);
    for level in 0..LEVELS {
        if level > 0 {
            widths = split_in_half(&widths);
        }
        let solved = sweep_to_convergence(model, problem, base, &widths)?;
        let (value, _, _) =
            fit_far_field(&solved.x, &solved.widths, &solved.scalar, base.domain_length);
        cells.push(widths.len());
        constants.push(value);
    }
    let n = constants.len();
    let richardson = constants[n - 1] + (constants[n - 1] - constants[n - 2]) / 3.0;
    let reference = reference.unwrap_or(richardson);
    let errors: Vec<f64> = constants.iter().map(|v| (v - reference).abs()).collect();
    let slopes: Vec<f64> = errors
        .windows(2)
        .map(|w| if w[1] > 0.0 { (w[0] / w[1]).log2() } else { f64::NAN })
        .collect();
    Ok(ConvergenceStudy {
        cells,
        constants,
        errors,
        slopes,
        richardson,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub cells: Vec<usize>,
    /// Extracted far-field constant per level.
    pub constants: Vec<f64>,
    /// Error against the reference per level.
    pub errors: Vec<f64>,
    /// Per-pair measured orders, coarsest first; the first entry is the
    /// quadratic-regime measurement.
    pub slopes: Vec<f64>,
    pub richardson: f64,
}

/// Comparison of the analytic solution against the discrete-ordinates field.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub problem: String,
    /// Analytic asymptotic constant of the defect (2U₀ for slip, 0 for
    /// diffusion).
    pub analytic_constant: f64,
    pub oracle_constant: f64,
    pub oracle_uncertainty: f64,
    pub constant_rel_gap: f64,
    pub constant_tolerance: f64,
    /// Sup of |defect_analytic − defect_oracle| over the sampled grid,
    /// relative to the field scale.
    pub profile_rel_gap: f64,
    pub profile_tolerance: f64,
    pub pass: bool,
    pub diagnosis: String,
}

/// Compares constants at 1% and profiles at 2% on a subsampled common grid.
pub fn compare(
    analytic: &HalfSpaceSolution,
    numeric: &OracleSolution,
) -> Result<CompareReport, OracleError> {
    let (a_const, scale_const) = match (analytic.problem(), &numeric.problem) {
        (Problem::Kramers(pa), Problem::Kramers(pn)) => {
            if (pa.g_v - pn.g_v).abs() > 1e-14 {
                return Err(OracleError::Mismatch("different G_v".into()));
            }
            (2.0 * analytic.constant(), (2.0 * analytic.constant()).abs())
        }
        (Problem::Diffusion(pa), Problem::Diffusion(pn)) => {
            if (pa.c - pn.c).abs() > 1e-14 || (pa.g_n - pn.g_n).abs() > 1e-14 {
                return Err(OracleError::Mismatch("different c or G_n".into()));
            }
            // The defect decays to zero; measure against the background.
            (0.0, analytic.constant().abs())
        }
        _ => {
            return Err(OracleError::Mismatch(
                "comparing different problem kinds".into(),
            ))
        }
    };

    let extraction = extract_constant(numeric);
    let (o_const, o_unc, diagnosis) = match &extraction {
        Ok((v, u)) => (*v, *u, String::new()),
        Err(OracleError::NonAsymptotic {
            window_residual,
            value,
        }) => (
            *value,
            f64::NAN,
            format!(
                "far-field window residual {window_residual:.3e}: domain too short to be asymptotic"
            ),
        ),
        Err(e) => return Err(e.clone()),
    };

    let const_gap = (a_const - o_const).abs() / scale_const.max(1e-300);

    // Profile comparison on a subsampled (x, μ) grid.
    let n = numeric.x.len();
    let nk = numeric.mu.len();
    let mut field_scale = 1e-300f64;
    for v in &numeric.field {
        field_scale = field_scale.max(v.abs());
    }
    let mut worst = 0.0f64;
    let x_stride = (n / 40).max(1);
    let k_stride = (nk / 12).max(1);
    for i in (0..n).step_by(x_stride) {
        let xc = numeric.x[i];
        for k in (0..nk).step_by(k_stride) {
            for (sign, idx) in [(1.0, k), (-1.0, nk + k)] {
                let mu = sign * numeric.mu[k];
                if mu.abs() >= analytic.model().velocity_interval().1 {
                    continue;
                }
                let ana = analytic.defect(xc, mu)?;
                let num = numeric.field[idx * n + i];
                worst = worst.max((ana - num).abs());
            }
        }
    }
    let profile_gap = worst / field_scale;

    let const_tol = 0.01;
    let profile_tol = 0.02;
    let pass = diagnosis.is_empty() && const_gap < const_tol && profile_gap < profile_tol;
    Ok(CompareReport {
        problem: numeric.problem.name().to_string(),
        analytic_constant: a_const,
        oracle_constant: o_const,
        oracle_uncertainty: o_unc,
        constant_rel_gap: const_gap,
        constant_tolerance: const_tol,
        profile_rel_gap: profile_gap,
        profile_tolerance: profile_tol,
        pass,
        diagnosis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfspace::KramersProblem;

    fn small_cfg() -> OracleConfig {
        OracleConfig {
            domain_length: 15.0,
            cells: 300,
            ordinates: 24,
            sweep_tol: 1e-9,
            max_sweeps: 30_000,
            grading_ratio: 1.05,
        }
    }

    #[test]
    fn gauss_rule_for_gaussian_weight() {
        let (x, w) = gauss_rule_for_weight(|t| (-t * t).exp(), 0.0, 6.0, 32);
        assert_eq!(x.len(), 32);
        let mass: f64 = w.iter().sum();
        let exact = 0.5 * std::f64::consts::PI.sqrt();
        assert!((mass - exact).abs() < 1e-12, "mass {mass}");
        let m1: f64 = x.iter().zip(&w).map(|(xi, wi)| xi * wi).sum();
        assert!((m1 - 0.5).abs() < 1e-12, "first moment {m1}");
        // High moment vs closed form: ∫₀^∞ t⁴ e^{-t²} = 3√π/8.
        let m4: f64 = x.iter().zip(&w).map(|(xi, wi)| xi.powi(4) * wi).sum();
        assert!((m4 - 3.0 * std::f64::consts::PI.sqrt() / 8.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_rule_flat_weight_matches_legendre() {
        let (x, w) = gauss_rule_for_weight(|_| 1.0, 0.0, 1.0, 16);
        let (xl, wl) = gauss_legendre(16);
        for (a, b) in x.iter().zip(xl.iter().map(|t| 0.5 * (t + 1.0))) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in w.iter().zip(wl.iter().map(|t| 0.5 * t)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mesh_fills_domain_and_grades() {
        let widths = graded_mesh(25.0, 500, 1.05);
        let total: f64 = widths.iter().sum();
        assert!((total - 25.0).abs() < 1e-9);
        assert!(widths[0] < widths[widths.len() / 2]);
        let refined = split_in_half(&widths);
        assert_eq!(refined.len(), 1000);
        assert!((refined.iter().sum::<f64>() - 25.0).abs() < 1e-9);
    }

    #[test]
    fn zero_gradient_converges_immediately() {
        let model = KineticModel::const_mfp();
        let problem = Problem::Kramers(KramersProblem { g_v: 0.0 });
        let sol = solve_transport(&model, &problem, &small_cfg()).unwrap();
        assert!(sol.sweeps() <= 2);
        for v in sol.scalar_moment() {
            assert_eq!(*v, 0.0);
        }
        let (value, unc) = extract_constant(&sol).unwrap();
        assert_eq!(value, 0.0);
        assert!(unc.abs() < 1e-12);
    }

    #[test]
    fn kramers_slip_constant_within_percent() {
        let model = KineticModel::const_mfp();
        let problem = Problem::Kramers(KramersProblem { g_v: 1.0 });
        let sol = solve_transport(&model, &problem, &small_cfg()).unwrap();
        let (two_u0, unc) = extract_constant(&sol).unwrap();
        let reference = 2.0 * 0.581946;
        assert!(
            (two_u0 - reference).abs() < 0.01 * reference,
            "2U₀ = {two_u0:.6} ± {unc:.1e} vs {reference:.6}"
        );
    }

    #[test]
    fn mismatched_problem_rejected() {
        let model = KineticModel::const_mfp();
        let problem = Problem::Diffusion(crate::halfspace::DiffusionProblem {
            c: 0.5,
            g_n: 1.0,
        });
        assert!(matches!(
            solve_transport(&model, &problem, &small_cfg()),
            Err(OracleError::Mismatch(_))
        ));
    }

    #[test]
    fn short_domain_rejected_by_config() {
        let mut cfg = small_cfg();
        cfg.domain_length = 5.0;
        let model = KineticModel::const_mfp();
        let problem = Problem::Kramers(KramersProblem { g_v: 1.0 });
        assert!(matches!(
            solve_transport(&model, &problem, &cfg),
            Err(OracleError::InvalidConfig(_))
        ));
    }
}
