//! Analytic solutions of the two half-space boundary value problems: the
//! isothermal-slip problem (constant-mean-free-path model) and the diffusion
//! of a light binary-gas component (Maxwell model, 0 < c < 1).
//!
//! Both solutions have the form `h(x,μ) = h_as(x,μ) ± ∫ e^{-x/η} Φ_η(μ) a(η) dη`
//! with the continuum coefficient fixed by the wall condition `h(0,μ>0) = 0`:
//!
//! * slip: `h_as = 2U₀ + 2G_v(x-μ)`, `U₀ = V₁ G_v`,
//!   `a(η) = 2G_v·η/N(η) = 2G_v·(1-η²)/(X⁺(η)λ⁻(η))`;
//! * diffusion: constant background `h_as = G_n/(1-c)`,
//!   `a(η) = [G_n/(1-c)]·η/N(η) = [G_n/(1-c)]·e^{-η²}/(X⁺(η)λ⁻(η))`.
//!
//! The two printed forms of `a` are computed independently and their
//! agreement is recorded; a disagreement is a construction error, since their
//! equality is exactly the orthogonality-theorem derivation.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dispersion::{DispersionError, KineticModel, ModelKind};
use crate::eigen::{ContinuumCoefficient, EigenError, EigenPairing};
use crate::quadrature::{gauss_integral, pv_of_pchip, Interval, QuadError, QuadratureConfig};
use crate::xfunction::{CanonicalX, GammaWeight, XError};

/// Default θ grid for solver stacks.
pub const DEFAULT_THETA_GRID: usize = 768;
/// Default spectral nodes for the continuum coefficient.
pub const DEFAULT_COEFF_NODES: usize = 128;
/// Mutual-agreement bound on the two coefficient routes.
pub const ROUTE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KramersProblem {
    /// Dimensionless mass-velocity gradient far from the wall.
    pub g_v: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiffusionProblem {
    /// Collision ratio, strictly inside (0, 1).
    pub c: f64,
    /// Dimensionless concentration gradient.
    pub g_n: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Problem {
    Kramers(KramersProblem),
    Diffusion(DiffusionProblem),
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Kramers(_) => "kramers",
            Problem::Diffusion(_) => "diffusion",
        }
    }
}

#[derive(Debug, Clone)]
pub enum SolveError {
    InvalidParameter(String),
    Domain(String),
    /// The two printed forms of a(η) disagree beyond [`ROUTE_TOL`].
    RouteDisagreement { max_rel: f64 },
    /// Canonical-function identity failed; the solver refuses this model.
    IdentityRejected { residual: f64 },
    X(XError),
    Eigen(EigenError),
    Quadrature(QuadError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            SolveError::Domain(m) => write!(f, "domain error: {m}"),
            SolveError::RouteDisagreement { max_rel } => write!(
                f,
                "the two coefficient routes disagree: max relative gap {max_rel:.3e}"
            ),
            SolveError::IdentityRejected { residual } => write!(
                f,
                "canonical-function identity residual {residual:.3e}; solver refuses"
            ),
            SolveError::X(e) => write!(f, "{e}"),
            SolveError::Eigen(e) => write!(f, "{e}"),
            SolveError::Quadrature(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolveError {}

impl From<XError> for SolveError {
    fn from(e: XError) -> Self {
        match e {
            XError::Rejected { residual } => SolveError::IdentityRejected { residual },
            other => SolveError::X(other),
        }
    }
}

impl From<EigenError> for SolveError {
    fn from(e: EigenError) -> Self {
        SolveError::Eigen(e)
    }
}

impl From<QuadError> for SolveError {
    fn from(e: QuadError) -> Self {
        SolveError::Quadrature(e)
    }
}

impl From<DispersionError> for SolveError {
    fn from(e: DispersionError) -> Self {
        SolveError::X(XError::Dispersion(e))
    }
}

/// Moment profile table: density moment of h, its asymptotic part, and the
/// Knudsen-layer defect.
#[derive(Debug, Clone, Serialize)]
pub struct MomentProfile {
    pub x: Vec<f64>,
    pub moment: Vec<f64>,
    pub asymptotic: Vec<f64>,
    pub defect: Vec<f64>,
}

/// Analytic half-space solution; immutable, evaluators are pure.
#[derive(Debug, Clone)]
pub struct HalfSpaceSolution {
    problem: Problem,
    pairing: EigenPairing,
    /// U₀ for the slip problem, the background G_n/(1-c) for diffusion.
    constant: f64,
    /// η/N-route coefficient on the spectral grid.
    a: ContinuumCoefficient,
    /// Closed-form route at the same nodes.
    a_alt: Vec<f64>,
    route_max_rel: f64,
    /// +1: h = h_as + damped expansion (slip); −1: h = h_as − expansion.
    expansion_sign: f64,
    /// Scale of the δ-term coefficient: d(μ)a(μ) = scale·Re[1/(X⁺λ⁻)].
    coef_scale: f64,
    identity_residual: f64,
    coefficient_im_max: f64,
}

impl HalfSpaceSolution {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn model(&self) -> &KineticModel {
        self.pairing.model()
    }

    pub fn pairing(&self) -> &EigenPairing {
        &self.pairing
    }

    /// Slip constant U₀, or the diffusion background `G_n/(1-c)`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn coefficient(&self) -> &ContinuumCoefficient {
        &self.a
    }

    pub fn coefficient_alt(&self) -> &[f64] {
        &self.a_alt
    }

    pub fn route_max_rel(&self) -> f64 {
        self.route_max_rel
    }

    pub fn identity_residual(&self) -> f64 {
        self.identity_residual
    }

    /// Worst relative imaginary residue seen in the closed-form route.
    pub fn coefficient_im_max(&self) -> f64 {
        self.coefficient_im_max
    }

    /// Scale against which boundary residuals are measured: `|G_v|` for the
    /// slip problem, `|G_n/(1-c)|` for diffusion.
    pub fn residual_scale(&self) -> f64 {
        match self.problem {
            Problem::Kramers(p) => p.g_v.abs(),
            Problem::Diffusion(_) => self.constant.abs(),
        }
    }

    /// Full asymptotic distribution far from the wall.
    pub fn h_as(&self, x: f64, mu: f64) -> f64 {
        match self.problem {
            Problem::Kramers(p) => 2.0 * self.constant + 2.0 * p.g_v * (x - mu),
            Problem::Diffusion(_) => self.constant,
        }
    }

    /// The part of the asymptotics known before solving (what an independent
    /// transport solver subtracts): the gradient term for slip, the full
    /// background for diffusion.
    pub fn h_as_known(&self, x: f64, mu: f64) -> f64 {
        match self.problem {
            Problem::Kramers(p) => 2.0 * p.g_v * (x - mu),
            Problem::Diffusion(_) => self.constant,
        }
    }

    /// Defect field `h − h_as_known`; for slip this tends to `2U₀` far from
    /// the wall, for diffusion it decays to zero.
    pub fn defect(&self, x: f64, mu: f64) -> Result<f64, SolveError> {
        Ok(self.evaluate_h(x, mu)? - self.h_as_known(x, mu))
    }

    /// Distribution function `h(x, μ)` for `x ≥ 0` and μ inside the velocity
    /// interval.
    pub fn evaluate_h(&self, x: f64, mu: f64) -> Result<f64, SolveError> {
        if x < 0.0 {
            return Err(SolveError::Domain(format!("x = {x} < 0")));
        }
        let (vlo, vhi) = self.model().velocity_interval();
        if mu <= vlo || mu >= vhi {
            return Err(SolveError::Domain(format!(
                "μ = {mu} outside the velocity interval ({vlo}, {vhi})"
            )));
        }
        Ok(self.h_as(x, mu) + self.expansion_sign * self.knudsen_term(x, mu))
    }

    /// Damped continuum superposition `∫ e^{-x/η} Φ_η(μ) a(η) dη`.
    fn knudsen_term(&self, x: f64, mu: f64) -> f64 {
        let table = self.pairing.scaled_coefficient_table(&self.a, Some(x));
        let integral = pv_of_pchip(&table, mu).unwrap_or(0.0);
        let lo = self.a.lo();
        let hi = self.a.hi();
        if mu > lo && mu < hi {
            // δ term with the e^{±μ²}/(1-μ²) cancellation done analytically:
            // d(μ)a(μ) = scale·Re[1/(X⁺(μ)λ⁻(μ))].
            let x_fn = self.pairing.gamma().canonical();
            let delta = match (x_fn.x_plus(mu), self.model().boundary_values(mu)) {
                (Ok(xp), Ok(bp)) => {
                    let inv = (xp * bp.lambda_minus).finv();
                    self.coef_scale * inv.re * bp.lambda_plus.re * (-x / mu).exp()
                }
                _ => 0.0,
            };
            integral + delta
        } else {
            integral
        }
    }

    /// Sup of `|h(0, μ)|` over an inflow grid: the wall condition residual.
    pub fn boundary_residual(&self, mu_lo: f64, mu_hi: f64, n: usize) -> Result<f64, SolveError> {
        let mut worst = 0.0f64;
        for k in 0..n {
            let mu = mu_lo + (mu_hi - mu_lo) * k as f64 / (n - 1).max(1) as f64;
            worst = worst.max(self.evaluate_h(0.0, mu)?.abs());
        }
        Ok(worst)
    }

    /// Density-moment profile `m(x) = ∫ w(μ) h(x,μ) dμ` over the full
    /// velocity interval, with the asymptotic part and the decaying defect.
    pub fn moment_profile(
        &self,
        xs: &[f64],
        cfg: &QuadratureConfig,
    ) -> Result<MomentProfile, SolveError> {
        let (vlo, vhi) = self.model().velocity_interval();
        let margin = 1e-9 * (vhi - vlo);
        let mut moment = Vec::with_capacity(xs.len());
        let mut asymptotic = Vec::with_capacity(xs.len());
        let mut defect = Vec::with_capacity(xs.len());
        for &x in xs {
            if x < 0.0 {
                return Err(SolveError::Domain(format!("x = {x} < 0")));
            }
            let m = gauss_integral(
                |mu| {
                    self.model().weight(mu)
                        * self
                            .evaluate_h(x, mu)
                            .unwrap_or(0.0)
                },
                Interval::new(vlo + margin, vhi - margin)?,
                cfg,
            )?;
            let mas = gauss_integral(
                |mu| self.model().weight(mu) * self.h_as(x, mu),
                Interval::new(vlo + margin, vhi - margin)?,
                cfg,
            )?;
            moment.push(m);
            asymptotic.push(mas);
            defect.push(m - mas);
        }
        Ok(MomentProfile {
            x: xs.to_vec(),
            moment,
            asymptotic,
            defect,
        })
    }
}

/// Shared construction: stack build, identity gate, two coefficient routes.
struct SolverStack {
    pairing: EigenPairing,
    identity_residual: f64,
}

fn build_stack(model: KineticModel, grid_size: usize) -> Result<SolverStack, SolveError> {
    let x = Arc::new(CanonicalX::build(model, grid_size)?);
    let gamma = GammaWeight::new(Arc::clone(&x))?;
    let identity_residual = x.check_identity(&gamma)?;
    Ok(SolverStack {
        pairing: EigenPairing::new(gamma),
        identity_residual,
    })
}

struct Routes {
    nodes: Vec<f64>,
    primary: Vec<f64>,
    alt: Vec<f64>,
    max_rel: f64,
    im_max: f64,
}

/// `a(η)` by the η/N route (primary) and the closed X⁺λ⁻ form (alternative),
/// with `scale` = 2G_v or G_n/(1-c).
fn coefficient_routes(
    stack: &SolverStack,
    scale: f64,
    nodes: usize,
) -> Result<Routes, SolveError> {
    let pairing = &stack.pairing;
    let model = pairing.model().clone();
    let x_fn = pairing.gamma().canonical();
    let eta_nodes = pairing.spectral_nodes(nodes);
    let mut primary = Vec::with_capacity(eta_nodes.len());
    let mut alt = Vec::with_capacity(eta_nodes.len());
    let mut im_max = 0.0f64;
    for &eta in &eta_nodes {
        let n = pairing.normalization(eta)?;
        primary.push(scale * eta / n);
        let xp = x_fn.x_plus(eta)?;
        let bp = model.boundary_values(eta)?;
        let inv = (xp * bp.lambda_minus).finv();
        im_max = im_max.max(inv.im.abs() / inv.re.abs().max(1e-300));
        let shape = match model.kind() {
            ModelKind::ConstMfp => 1.0 - eta * eta,
            ModelKind::Maxwell => (-eta * eta).exp(),
        };
        alt.push(scale * shape * inv.re);
    }
    let sup_a = primary.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_rel = if scale == 0.0 {
        0.0
    } else {
        primary
            .iter()
            .zip(&alt)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
            / sup_a.max(1e-300)
    };
    Ok(Routes {
        nodes: eta_nodes,
        primary,
        alt,
        max_rel,
        im_max,
    })
}

/// Solves the isothermal-slip problem: `U₀ = V₁ G_v` plus the Knudsen-layer
/// expansion fixed by the wall condition.
pub fn solve_kramers(
    problem: &KramersProblem,
    grid_size: usize,
    coeff_nodes: usize,
) -> Result<HalfSpaceSolution, SolveError> {
    if !problem.g_v.is_finite() {
        return Err(SolveError::InvalidParameter("G_v must be finite".into()));
    }
    let stack = build_stack(KineticModel::const_mfp(), grid_size)?;
    let v1 = stack.pairing.gamma().canonical().v1_constant()?;
    let u0 = v1 * problem.g_v;
    let scale = 2.0 * problem.g_v;
    let routes = coefficient_routes(&stack, scale, coeff_nodes)?;
    if routes.max_rel > ROUTE_TOL {
        return Err(SolveError::RouteDisagreement {
            max_rel: routes.max_rel,
        });
    }
    let a = ContinuumCoefficient::from_nodes(0.0, 1.0, &routes.nodes, &routes.primary);
    Ok(HalfSpaceSolution {
        problem: Problem::Kramers(*problem),
        constant: u0,
        a,
        a_alt: routes.alt,
        route_max_rel: routes.max_rel,
        expansion_sign: 1.0,
        coef_scale: scale,
        identity_residual: stack.identity_residual,
        coefficient_im_max: routes.im_max,
        pairing: stack.pairing,
    })
}

/// Solves the light-component diffusion problem for `0 < c < 1`: constant
/// background `G_n/(1-c)` minus the decaying continuum expansion.
pub fn solve_diffusion(
    problem: &DiffusionProblem,
    grid_size: usize,
    coeff_nodes: usize,
) -> Result<HalfSpaceSolution, SolveError> {
    if !(problem.c > 0.0 && problem.c < 1.0) {
        return Err(SolveError::InvalidParameter(format!(
            "collision ratio c = {} outside (0, 1)",
            problem.c
        )));
    }
    if !problem.g_n.is_finite() {
        return Err(SolveError::InvalidParameter("G_n must be finite".into()));
    }
    let stack = build_stack(KineticModel::maxwell(problem.c)?, grid_size)?;
    let background = problem.g_n / (1.0 - problem.c);
    let routes = coefficient_routes(&stack, background, coeff_nodes)?;
    if routes.max_rel > ROUTE_TOL {
        return Err(SolveError::RouteDisagreement {
            max_rel: routes.max_rel,
        });
    }
    let hi = stack.pairing.model().spectrum_grid_hi();
    let a = ContinuumCoefficient::from_nodes(0.0, hi, &routes.nodes, &routes.primary);
    Ok(HalfSpaceSolution {
        problem: Problem::Diffusion(*problem),
        constant: background,
        a,
        a_alt: routes.alt,
        route_max_rel: routes.max_rel,
        expansion_sign: -1.0,
        coef_scale: background,
        identity_residual: stack.identity_residual,
        coefficient_im_max: routes.im_max,
        pairing: stack.pairing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_kramers(g_v: f64) -> HalfSpaceSolution {
        solve_kramers(&KramersProblem { g_v }, 256, 96).unwrap()
    }

    #[test]
    fn slip_constant_is_v1_gv() {
        let s = quick_kramers(1.0);
        assert!((s.constant() - 0.581946).abs() < 5e-6, "U₀ = {}", s.constant());
        let s2 = quick_kramers(-2.5);
        assert!((s2.constant() + 2.5 * 0.581946).abs() < 2e-5);
    }

    #[test]
    fn routes_agree() {
        let s = quick_kramers(1.0);
        assert!(s.route_max_rel() < ROUTE_TOL, "route gap {}", s.route_max_rel());
        assert!(s.coefficient_im_max() < 1e-8);
    }

    #[test]
    fn homogeneous_problem_is_zero() {
        let s = quick_kramers(0.0);
        assert_eq!(s.constant(), 0.0);
        for v in s.coefficient().values() {
            assert_eq!(*v, 0.0);
        }
        for &(x, mu) in &[(0.0, 0.5), (1.0, -0.3), (5.0, 0.9)] {
            assert_eq!(s.evaluate_h(x, mu).unwrap(), 0.0);
        }
    }

    #[test]
    fn wall_condition() {
        let s = quick_kramers(1.0);
        let res = s.boundary_residual(0.05, 0.95, 31).unwrap();
        assert!(res < 1e-4 * s.residual_scale(), "wall residual {res:.2e}");
        let h = s.evaluate_h(0.0, 0.5).unwrap();
        assert!(h.abs() < 1e-4, "h(0, 0.5) = {h:.2e}");
    }

    #[test]
    fn far_field_matches_asymptotics() {
        let s = quick_kramers(1.0);
        for &mu in &[-0.7, -0.2, 0.3, 0.8] {
            let h = s.evaluate_h(30.0, mu).unwrap();
            assert!(
                (h - s.h_as(30.0, mu)).abs() < 1e-6,
                "far-field gap at μ = {mu}"
            );
        }
    }

    #[test]
    fn linearity_in_gradient() {
        let a = quick_kramers(0.7);
        let b = quick_kramers(1.4);
        assert!((2.0 * a.constant() - b.constant()).abs() < 1e-12);
        for (va, vb) in a.coefficient().values().iter().zip(b.coefficient().values()) {
            assert!((2.0 * va - vb).abs() <= 1e-12 * vb.abs());
        }
        let ha = a.evaluate_h(0.7, 0.4).unwrap();
        let hb = b.evaluate_h(0.7, 0.4).unwrap();
        assert!((2.0 * ha - hb).abs() < 1e-12 * hb.abs().max(1.0));
    }

    #[test]
    fn defect_decays_monotonically() {
        let s = quick_kramers(1.0);
        let xs = [0.1, 1.0, 3.0, 5.0, 10.0, 30.0];
        let prof = s
            .moment_profile(&xs, &QuadratureConfig::with_tolerances(1e-9, 1e-8))
            .unwrap();
        for w in prof.defect.windows(2) {
            assert!(
                w[1].abs() <= w[0].abs() + 1e-12,
                "defect not decaying: {:?}",
                prof.defect
            );
        }
        assert!(prof.defect[0].abs() > 1e-3, "no Knudsen layer at the wall?");
        assert!(prof.defect[5].abs() < 1e-6 * prof.defect[0].abs());
    }

    #[test]
    fn negative_x_rejected() {
        let s = quick_kramers(1.0);
        assert!(matches!(
            s.evaluate_h(-0.1, 0.5),
            Err(SolveError::Domain(_))
        ));
    }

    #[test]
    fn diffusion_solution_residuals() {
        let s = solve_diffusion(&DiffusionProblem { c: 0.5, g_n: 1.0 }, 256, 96).unwrap();
        assert!((s.constant() - 2.0).abs() < 1e-12);
        let res = s.boundary_residual(0.1, 3.0, 31).unwrap();
        assert!(
            res < 1e-4 * s.residual_scale(),
            "diffusion wall residual {res:.2e}"
        );
        assert!(s.coefficient_im_max() < 1e-8);
        // Far field: h → background.
        let h = s.evaluate_h(40.0, 1.0).unwrap();
        assert!((h - 2.0).abs() < 1e-5);
    }

    #[test]
    fn diffusion_coefficient_single_signed() {
        let s = solve_diffusion(&DiffusionProblem { c: 0.3, g_n: 1.0 }, 256, 96).unwrap();
        for (eta, v) in s.coefficient().grid().iter().zip(s.coefficient().values()) {
            if *eta > 1e-6 && *eta < 3.0 {
                assert!(*v > 0.0, "a({eta}) = {v} changes sign");
            }
        }
    }

    #[test]
    fn diffusion_rejects_bad_c() {
        for c in [0.0, 1.0, 1.2, -0.5] {
            assert!(matches!(
                solve_diffusion(&DiffusionProblem { c, g_n: 1.0 }, 128, 64),
                Err(SolveError::InvalidParameter(_))
            ));
        }
    }
}
