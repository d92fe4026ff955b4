//! Scalar products with the singular eigenfunctions, their normalization,
//! and expansion/reconstruction over the continuous spectrum.
//!
//! The eigenfunctions combine a principal-value kernel with a δ term,
//! `Φ_η(μ) = k·η P 1/(η-μ) + d(η) λ(η) δ(η-μ)` (k the kernel coefficient,
//! d the model's delta normalizer), and only their *pairings* against smooth
//! functions are numbers. Every pairing here is therefore a PV integral plus
//! an explicit point-evaluation term; δ terms are never discretized as
//! spikes. In the δ term, `d(η)·ρ(η)` always collapses to `γ(η)`, which is
//! how the `e^{±η²}` factors of the Maxwell model cancel analytically.
//!
//! The orthogonality relations verified against these pairings:
//!
//! * `(1, Φ_η) = η` (Maxwell) and `(μ, Φ_η) = η`, `(1, Φ_η) = 0`
//!   (constant-mean-free-path),
//! * discrete-mode values `(Φ_∞, Φ_∞) = -4/3` and `(μ, Φ_∞) = -(4/3)V₁`,
//! * the smeared normalization `∫ b(η')(Φ_η, Φ_η') dη' = N(η) b(η)` with
//!   `N(η) = d(η) γ(η) |λ⁺(η)|²`,
//! * closure: expanding a smooth function and reconstructing it returns the
//!   function up to its discrete-mode projection.

use std::fmt;

use crate::dispersion::{KineticModel, ModelKind};
use crate::interp::Pchip;
use crate::quadrature::{
    gauss_integral, gauss_legendre, pv_of_pchip, Interval, QuadError, QuadratureConfig,
};
use crate::xfunction::{GammaWeight, XError};

/// Default spectral grid for continuum coefficients.
pub const DEFAULT_SPECTRAL_NODES: usize = 128;

#[derive(Debug, Clone)]
pub enum EigenError {
    Endpoint { eta: f64 },
    Unsupported(String),
    /// N(η) not finite/nonzero on the expansion grid.
    Degenerate { eta: f64 },
    /// Reconstruction point outside the coefficient grid hull.
    OutsideGrid { mu: f64 },
    X(XError),
    Quadrature(QuadError),
}

impl fmt::Display for EigenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigenError::Endpoint { eta } => write!(f, "η = {eta} is a spectrum endpoint"),
            EigenError::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            EigenError::Degenerate { eta } => {
                write!(f, "normalization N(η) degenerate at η = {eta}")
            }
            EigenError::OutsideGrid { mu } => {
                write!(f, "μ = {mu} outside the coefficient grid hull")
            }
            EigenError::X(e) => write!(f, "{e}"),
            EigenError::Quadrature(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EigenError {}

impl From<XError> for EigenError {
    fn from(e: XError) -> Self {
        EigenError::X(e)
    }
}

impl From<crate::dispersion::DispersionError> for EigenError {
    fn from(e: crate::dispersion::DispersionError) -> Self {
        EigenError::X(XError::Dispersion(e))
    }
}

impl From<QuadError> for EigenError {
    fn from(e: QuadError) -> Self {
        EigenError::Quadrature(e)
    }
}

/// Continuum coefficient table `a(η)` on a spectral grid, with its
/// interpolation rule. The grid hull is extended to the spectrum endpoints by
/// clamped linear extrapolation so that spectral integrals can run over the
/// full interval.
#[derive(Debug, Clone)]
pub struct ContinuumCoefficient {
    eta: Vec<f64>,
    values: Vec<f64>,
    interp: Pchip,
}

impl ContinuumCoefficient {
    /// Builds the table from interior nodes, extending to `[lo, hi]`.
    pub fn from_nodes(lo: f64, hi: f64, nodes: &[f64], values: &[f64]) -> Self {
        assert_eq!(nodes.len(), values.len());
        assert!(nodes.len() >= 4, "too few spectral nodes");
        let mut eta = Vec::with_capacity(nodes.len() + 2);
        let mut v = Vec::with_capacity(nodes.len() + 2);
        if nodes[0] > lo {
            eta.push(lo);
            v.push(extrapolate(nodes[0], values[0], nodes[1], values[1], lo));
        }
        eta.extend_from_slice(nodes);
        v.extend_from_slice(values);
        let n = nodes.len();
        if nodes[n - 1] < hi {
            eta.push(hi);
            v.push(extrapolate(
                nodes[n - 1],
                values[n - 1],
                nodes[n - 2],
                values[n - 2],
                hi,
            ));
        }
        let interp = Pchip::smooth(eta.clone(), v.clone());
        ContinuumCoefficient { eta, values: v, interp }
    }

    pub fn zero(lo: f64, hi: f64) -> Self {
        let nodes: Vec<f64> = (0..8)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / 8.0)
            .collect();
        ContinuumCoefficient::from_nodes(lo, hi, &nodes, &vec![0.0; 8])
    }

    pub fn grid(&self) -> &[f64] {
        &self.eta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lo(&self) -> f64 {
        self.eta[0]
    }

    pub fn hi(&self) -> f64 {
        *self.eta.last().unwrap()
    }

    pub fn eval(&self, eta: f64) -> f64 {
        self.interp.eval(eta)
    }
}

/// Linear extrapolation clamped to 3× the boundary magnitude; endpoint panels
/// are short enough that the clamp never matters for well-behaved data.
fn extrapolate(x0: f64, y0: f64, x1: f64, y1: f64, target: f64) -> f64 {
    let slope = (y1 - y0) / (x1 - x0);
    let raw = y0 + slope * (target - x0);
    let bound = 3.0 * y0.abs().max(1e-300);
    raw.clamp(-bound, bound)
}

/// Pairing engine over the scalar product `(f, g) = ∫ ρ(μ) f g dμ` with
/// `ρ = kernel_shape·γ`. Immutable and cheap to share.
#[derive(Debug, Clone)]
pub struct EigenPairing {
    gamma: GammaWeight,
}

impl EigenPairing {
    pub fn new(gamma: GammaWeight) -> Self {
        EigenPairing { gamma }
    }

    pub fn gamma(&self) -> &GammaWeight {
        &self.gamma
    }

    pub fn model(&self) -> &KineticModel {
        self.gamma.model()
    }

    fn hull(&self) -> (f64, f64) {
        let grid = self.gamma.canonical().theta_table().grid();
        (grid[0], *grid.last().unwrap())
    }

    fn check_interior(&self, eta: f64) -> Result<(), EigenError> {
        let (lo, hi) = self.hull();
        if eta <= lo || eta >= hi {
            return Err(EigenError::Endpoint { eta });
        }
        Ok(())
    }

    /// `(f, Φ_η)` for smooth `f`: the η-scaled PV integral of `ρ f` plus the
    /// δ term `λ(η) γ(η) f(η)`.
    ///
    /// Sign convention: the eigenfunction kernel is `P 1/(η−μ)`, the negative
    /// of the `1/(μ−η)` kernel the PV quadrature uses.
    pub fn pair_smooth(&self, f: &dyn Fn(f64) -> f64, eta: f64) -> Result<f64, EigenError> {
        self.check_interior(eta)?;
        let table = self.product_table(f);
        let pv = pv_of_pchip(&table, eta)?;
        let model = self.model();
        let delta = model.lambda_real(eta) * self.gamma.gamma_at(eta) * f(eta);
        Ok(-model.kernel_coef() * eta * pv + delta)
    }

    /// `(f, Φ_∞) = ∫ ρ f` — the discrete-mode pairing of the
    /// constant-mean-free-path model, by adaptive quadrature of exact γ.
    pub fn pair_discrete(
        &self,
        f: &dyn Fn(f64) -> f64,
        cfg: &QuadratureConfig,
    ) -> Result<f64, EigenError> {
        if self.model().kind() != ModelKind::ConstMfp {
            return Err(EigenError::Unsupported(
                "discrete modes exist only for the constant-mean-free-path model".into(),
            ));
        }
        let x = self.gamma.canonical().clone();
        let model = self.model().clone();
        let v = gauss_integral(
            |m| {
                let g = x.gamma_complex(m).map(|c| c.re).unwrap_or(0.0);
                model.kernel_shape(m) * g * f(m)
            },
            Interval::new(0.0, 1.0)?,
            cfg,
        )?;
        Ok(v)
    }

    /// `N(η) = d(η) γ(η) |λ⁺(η)|²`, real with the sign of γ.
    pub fn normalization(&self, eta: f64) -> Result<f64, EigenError> {
        self.check_interior(eta)?;
        let bp = self.model().boundary_values(eta)?;
        Ok(self.model().delta_normalizer(eta) * self.gamma.gamma_at(eta) * bp.modulus_squared())
    }

    /// Spectral grid for continuum coefficients: Gauss nodes over the
    /// spectrum (clustered at both endpoints) plus ladders of nodes across
    /// every interior dispersion zero, where `1/N(η)` is quasi-resonant.
    pub fn spectral_nodes(&self, nodes: usize) -> Vec<f64> {
        let (lo, hi) = self.hull();
        let (xg, _) = gauss_legendre(nodes);
        let mut grid: Vec<f64> = xg
            .iter()
            .map(|&t| lo + 0.5 * (hi - lo) * (t + 1.0))
            .collect();
        for zero in self.model().dispersion_zeros() {
            grid.push(zero.eta);
            let w = zero.width.max(1e-12 * (hi - lo));
            // Eight nodes per octave from w/16 to 64w on both flanks: the
            // cubic table stays percent-accurate across the 1/|λ⁺|² peak.
            let ratio = 2.0f64.powf(1.0 / 8.0);
            let mut offset = w / 16.0;
            while offset <= 64.0 * w {
                for s in [-1.0, 1.0] {
                    let eta = zero.eta + s * offset;
                    if eta > lo && eta < hi {
                        grid.push(eta);
                    }
                }
                offset *= ratio;
            }
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min_sep = 1e-10 * (hi - lo);
        grid.dedup_by(|a, b| (*a - *b).abs() < min_sep);
        grid
    }

    /// Expansion coefficients `a(η) = (f, Φ_η)/N(η)` on the spectral grid.
    pub fn expand(
        &self,
        f: &dyn Fn(f64) -> f64,
        nodes: usize,
    ) -> Result<ContinuumCoefficient, EigenError> {
        let (lo, hi) = self.hull();
        let eta_nodes = self.spectral_nodes(nodes);
        let mut values = Vec::with_capacity(eta_nodes.len());
        for &eta in &eta_nodes {
            let n = self.normalization(eta)?;
            if !n.is_finite() || n == 0.0 {
                return Err(EigenError::Degenerate { eta });
            }
            values.push(self.pair_smooth(f, eta)? / n);
        }
        Ok(ContinuumCoefficient::from_nodes(lo, hi, &eta_nodes, &values))
    }

    /// `∫ a(η) Φ_η(μ) dη`: the PV integral of `k·η·a(η)/(η−μ)` plus the δ
    /// term `d(μ) λ(μ) a(μ)`.
    ///
    /// For μ inside the spectrum both pieces fire; for μ in the velocity
    /// interval but outside the spectrum (negative μ in the half-space
    /// problems) the kernel is regular and only the integral survives.
    pub fn reconstruct(&self, a: &ContinuumCoefficient, mu: f64) -> Result<f64, EigenError> {
        let (lo, hi) = self.hull();
        let (vlo, vhi) = self.model().velocity_interval();
        if mu <= vlo || mu >= vhi {
            return Err(EigenError::OutsideGrid { mu });
        }
        let model = self.model();
        let kernel = self.scaled_coefficient_table(a, None);
        if mu > lo && mu < hi {
            let pv = pv_of_pchip(&kernel, mu)?;
            let delta = model.delta_normalizer(mu) * model.lambda_real(mu) * a.eval(mu);
            Ok(pv + delta)
        } else {
            // Pole outside the hull: ordinary integral, no δ term.
            Ok(pv_of_pchip(&kernel, mu)?)
        }
    }

    /// Smeared double pairing `∫ b(η') (Φ_η, Φ_η') dη'`, evaluated by the
    /// composed quadrature `(F, Φ_η)` with `F = ∫ b(η') Φ_η' dη'`. Against
    /// the normalization relation this must equal `N(η) b(η)`.
    pub fn double_pairing(
        &self,
        b: &dyn Fn(f64) -> f64,
        eta: f64,
    ) -> Result<f64, EigenError> {
        self.check_interior(eta)?;
        let (lo, hi) = self.hull();
        let model = self.model().clone();
        let grid = self.gamma.canonical().theta_table().grid();
        let sb: Vec<f64> = grid
            .iter()
            .map(|&s| model.kernel_coef() * s * b(s))
            .collect();
        let sb_table = Pchip::smooth(grid.to_vec(), sb);
        let smeared = move |tau: f64| -> f64 {
            if tau <= lo || tau >= hi {
                // ρ vanishes at the hull ends; the product is zero there.
                return 0.0;
            }
            let pv = pv_of_pchip(&sb_table, tau).unwrap_or(0.0);
            pv + model.delta_normalizer(tau) * model.lambda_real(tau) * b(tau)
        };
        self.pair_smooth(&smeared, eta)
    }

    /// Closure residual of the expansion: reconstructs `expand(f)` on
    /// `probe_mu` and returns the sup-norm against the expected image — `f`
    /// itself when no discrete modes exist, `f` minus its discrete-mode
    /// projection `(f,Φ_∞)/(Φ_∞,Φ_∞)` for the constant-mean-free-path model.
    pub fn closure_residual(
        &self,
        f: &dyn Fn(f64) -> f64,
        nodes: usize,
        probe_mu: &[f64],
        cfg: &QuadratureConfig,
    ) -> Result<f64, EigenError> {
        let a = self.expand(f, nodes)?;
        let shift = match self.model().kind() {
            ModelKind::ConstMfp => {
                let num = self.pair_discrete(f, cfg)?;
                let den = self.pair_discrete(&|_| 1.0, cfg)?;
                num / den
            }
            ModelKind::Maxwell => 0.0,
        };
        let mut worst = 0.0f64;
        for &mu in probe_mu {
            let rec = self.reconstruct(&a, mu)?;
            worst = worst.max((rec - (f(mu) - shift)).abs());
        }
        Ok(worst)
    }

    /// Table of `ρ(μ_i) f(μ_i)` on the θ grid, ready for panel-exact PV
    /// integration.
    fn product_table(&self, f: &dyn Fn(f64) -> f64) -> Pchip {
        let grid = self.gamma.canonical().theta_table().grid();
        let rho = self.gamma.rho_samples();
        let vals: Vec<f64> = grid.iter().zip(rho).map(|(&m, &r)| r * f(m)).collect();
        Pchip::smooth(grid.to_vec(), vals)
    }

    /// Table of `k·η·a(η)·damping(η)` on the coefficient grid.
    pub(crate) fn scaled_coefficient_table(
        &self,
        a: &ContinuumCoefficient,
        damping: Option<f64>,
    ) -> Pchip {
        let k = self.model().kernel_coef();
        let vals: Vec<f64> = a
            .grid()
            .iter()
            .zip(a.values())
            .map(|(&eta, &v)| {
                let damp = match damping {
                    Some(x) if eta > 0.0 => (-x / eta).exp(),
                    Some(_) => 0.0,
                    None => 1.0,
                };
                k * eta * v * damp
            })
            .collect();
        Pchip::smooth(a.grid().to_vec(), vals)
    }
}

/// Convenience: `V₁` from the pairing stack (constant-mean-free-path).
pub fn v1_of(pairing: &EigenPairing) -> Result<f64, EigenError> {
    Ok(pairing.gamma().canonical().v1_constant()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xfunction::CanonicalX;
    use std::sync::Arc;

    fn cmfp_pairing(grid: usize) -> EigenPairing {
        let x = Arc::new(CanonicalX::build(KineticModel::const_mfp(), grid).unwrap());
        EigenPairing::new(GammaWeight::new(x).unwrap())
    }

    fn maxwell_pairing(c: f64, grid: usize) -> EigenPairing {
        let x = Arc::new(CanonicalX::build(KineticModel::maxwell(c).unwrap(), grid).unwrap());
        EigenPairing::new(GammaWeight::new(x).unwrap())
    }

    #[test]
    fn maxwell_unit_pairing_equals_eta() {
        for &c in &[0.3, 0.5, 0.9] {
            let p = maxwell_pairing(c, 256);
            for &eta in &[0.2, 0.5, 1.0] {
                let v = p.pair_smooth(&|_| 1.0, eta).unwrap();
                assert!(
                    (v - eta).abs() < 1e-6,
                    "c = {c}: (1, Φ_{eta}) = {v}"
                );
            }
        }
    }

    #[test]
    fn cmfp_velocity_pairing_equals_eta() {
        let p = cmfp_pairing(256);
        for &eta in &[0.1, 0.5, 0.9] {
            let v = p.pair_smooth(&|m| m, eta).unwrap();
            assert!((v - eta).abs() < 1e-6, "(μ, Φ_{eta}) = {v}");
        }
    }

    #[test]
    fn cmfp_continuum_orthogonal_to_discrete() {
        let p = cmfp_pairing(256);
        for &eta in &[0.2, 0.6, 0.85] {
            let v = p.pair_smooth(&|_| 1.0, eta).unwrap();
            assert!(v.abs() < 1e-6, "(1, Φ_{eta}) = {v}");
        }
    }

    #[test]
    fn cmfp_discrete_pairings() {
        let p = cmfp_pairing(256);
        let cfg = QuadratureConfig::tight();
        let self_pair = p.pair_discrete(&|_| 1.0, &cfg).unwrap();
        assert!((self_pair + 4.0 / 3.0).abs() < 1e-8, "(Φ∞,Φ∞) = {self_pair}");
        let v1 = v1_of(&p).unwrap();
        let mu_pair = p.pair_discrete(&|m| m, &cfg).unwrap();
        assert!(
            (mu_pair + 4.0 / 3.0 * v1).abs() < 1e-7,
            "(μ,Φ∞) = {mu_pair} vs {}",
            -4.0 / 3.0 * v1
        );
        assert!((mu_pair + 0.775928).abs() < 1e-5);
        let zero = p.pair_discrete(&|_| 0.0, &cfg).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn maxwell_rejects_discrete_pairing() {
        let p = maxwell_pairing(0.5, 128);
        assert!(matches!(
            p.pair_discrete(&|_| 1.0, &QuadratureConfig::default()),
            Err(EigenError::Unsupported(_))
        ));
    }

    #[test]
    fn normalization_sign_and_composition() {
        let p = cmfp_pairing(256);
        for &eta in &[0.1, 0.5, 0.9] {
            let n = p.normalization(eta).unwrap();
            let g = p.gamma().gamma_at(eta);
            assert_eq!(n.signum(), g.signum());
            let bp = p.model().boundary_values(eta).unwrap();
            let direct = g * bp.modulus_squared() / (1.0 - eta * eta);
            assert!((n - direct).abs() < 1e-12 * n.abs());
        }
        let pm = maxwell_pairing(0.5, 128);
        let eta = 1.0;
        let n = pm.normalization(eta).unwrap();
        let direct = (eta * eta).exp()
            * pm.gamma().gamma_at(eta)
            * pm.model().boundary_values(eta).unwrap().modulus_squared();
        assert!((n - direct).abs() < 1e-12 * n.abs());
    }

    #[test]
    fn smeared_delta_normalization() {
        let p = cmfp_pairing(256);
        let b = |s: f64| s * (1.0 - s) * (2.0 - s);
        for &eta in &[0.35, 0.6] {
            let lhs = p.double_pairing(&b, eta).unwrap();
            let rhs = p.normalization(eta).unwrap() * b(eta);
            assert!(
                (lhs - rhs).abs() < 1e-3 * rhs.abs(),
                "η = {eta}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn cmfp_closure_of_velocity_function() {
        // The continuum image of μ is μ − V₁ pointwise.
        let p = cmfp_pairing(256);
        let v1 = v1_of(&p).unwrap();
        let a = p.expand(&|m| m, DEFAULT_SPECTRAL_NODES).unwrap();
        let mut worst = 0.0f64;
        for k in 1..=17 {
            let mu = 0.05 + 0.05 * k as f64;
            let rec = p.reconstruct(&a, mu).unwrap();
            worst = worst.max((rec - (mu - v1)).abs());
        }
        assert!(worst < 1e-3, "sup |reconstruct − (μ−V₁)| = {worst:.2e}");
    }

    #[test]
    fn cmfp_closure_general_function() {
        let p = cmfp_pairing(256);
        let probes: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
        let res = p
            .closure_residual(
                &|m| (-m).exp(),
                DEFAULT_SPECTRAL_NODES,
                &probes,
                &QuadratureConfig::tight(),
            )
            .unwrap();
        assert!(res < 1e-3, "closure residual {res:.2e}");
    }

    #[test]
    fn maxwell_closure_of_unity() {
        let p = maxwell_pairing(0.5, 256);
        let a = p.expand(&|_| 1.0, DEFAULT_SPECTRAL_NODES).unwrap();
        for &mu in &[0.2, 0.7, 1.5] {
            let rec = p.reconstruct(&a, mu).unwrap();
            assert!((rec - 1.0).abs() < 1e-4, "reconstruct(expand(1))({mu}) = {rec}");
        }
    }

    #[test]
    fn zero_expansion_stays_zero() {
        let p = cmfp_pairing(128);
        let a = p.expand(&|_| 0.0, 64).unwrap();
        for v in a.values() {
            assert_eq!(*v, 0.0);
        }
        assert_eq!(p.reconstruct(&a, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn reconstruct_neg_mu_has_no_delta_term() {
        let p = cmfp_pairing(128);
        let a = p.expand(&|m| m, 64).unwrap();
        // Regular kernel for μ < 0; value must be finite and smooth.
        let v = p.reconstruct(&a, -0.5).unwrap();
        assert!(v.is_finite());
        assert!(matches!(
            p.reconstruct(&a, -1.5),
            Err(EigenError::OutsideGrid { .. })
        ));
    }

    #[test]
    fn pairing_rejects_endpoints() {
        let p = cmfp_pairing(128);
        assert!(matches!(
            p.pair_smooth(&|_| 1.0, 0.0),
            Err(EigenError::Endpoint { .. })
        ));
        assert!(matches!(
            p.pair_smooth(&|_| 1.0, 1.0),
            Err(EigenError::Endpoint { .. })
        ));
    }
}
