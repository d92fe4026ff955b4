//! Dispersion functions of the two model kinetic equations, their boundary
//! values on the cut, and the continuous argument θ(μ).
//!
//! Two models are supported:
//!
//! * `Maxwell` — collision kernel `(c/√π) e^{-μ²}` on the full velocity line,
//!   with collision ratio `0 < c ≤ 1` and half-space spectrum `(0, ∞)`;
//!   dispersion function `λ_c(z) = 1 + z (c/√π) ∫ e^{-τ²}/(τ-z) dτ`.
//! * `ConstMfp` — collision kernel `(3/4)(1-μ²)` on `(-1, 1)`, half-space
//!   spectrum `(0, 1)`; dispersion function
//!   `λ(z) = -1/2 + (3/2)(1-z²) λ₀(z)` with
//!   `λ₀(z) = 1 + (z/2) ln((1-z)/(1+z))`.
//!
//! On the cut the boundary values are `λ±(μ) = λ(μ) ± iπ μ w(μ)` with `w` the
//! kernel weight; `θ(μ) = arg λ⁺(μ)` is taken on the continuous branch with
//! `θ(0) = 0`, which is automatic from `atan2` because `Im λ⁺ > 0` on the open
//! spectrum.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::interp::Pchip;
use crate::quadrature::{
    cauchy_integral, gauss_integral, pv_integral, Interval, QuadError, QuadratureConfig,
};

/// Practical right end of the Maxwell spectrum grid: the Gaussian weight is
/// below 1e-22 beyond, so every spectral integral truncated here is converged
/// far past the working tolerances.
pub const MAXWELL_GRID_HI: f64 = 7.2;

const LAMBDA_CACHE_PANELS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Maxwell,
    ConstMfp,
}

#[derive(Debug, Clone)]
pub enum DispersionError {
    /// Evaluation requested on the spectral cut; use the boundary-value
    /// operation instead.
    OnCut(String),
    /// μ at a spectrum endpoint; endpoint limits live in [`ThetaTable`].
    Endpoint { mu: f64 },
    InvalidParameter(String),
    /// The continuous branch of θ could not be resolved.
    Branch(String),
    Quadrature(QuadError),
}

impl fmt::Display for DispersionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DispersionError::OnCut(msg) => write!(f, "evaluation on the cut: {msg}"),
            DispersionError::Endpoint { mu } => {
                write!(f, "μ = {mu} is a spectrum endpoint; use the tabulated limits")
            }
            DispersionError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            DispersionError::Branch(msg) => write!(f, "branch resolution failed: {msg}"),
            DispersionError::Quadrature(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DispersionError {}

impl From<QuadError> for DispersionError {
    fn from(e: QuadError) -> Self {
        DispersionError::Quadrature(e)
    }
}

/// One of the two model kinetic equations, with its weight, spectrum and
/// delta-term normalizer. Cheap to clone; the Maxwell on-axis dispersion
/// table is shared behind an `Arc`.
#[derive(Debug, Clone)]
pub struct KineticModel {
    kind: ModelKind,
    c: f64,
    lambda_cache: Option<Arc<Pchip>>,
}

impl KineticModel {
    /// Maxwell-weighted model with collision ratio `c ∈ (0, 1]`.
    pub fn maxwell(c: f64) -> Result<Self, DispersionError> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(DispersionError::InvalidParameter(format!(
                "collision ratio c = {c} outside (0, 1]"
            )));
        }
        let cfg = QuadratureConfig::with_tolerances(1e-13, 1e-12);
        let n = LAMBDA_CACHE_PANELS;
        let mut x = Vec::with_capacity(n + 1);
        let mut y = Vec::with_capacity(n + 1);
        let mut d = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = 0.5 * MAXWELL_GRID_HI * (1.0 - (PI * i as f64 / n as f64).cos());
            let (value, deriv) = maxwell_lambda_real_and_deriv(t, c, &cfg)?;
            x.push(t);
            y.push(value);
            d.push(deriv);
        }
        Ok(KineticModel {
            kind: ModelKind::Maxwell,
            c,
            lambda_cache: Some(Arc::new(Pchip::with_slopes(x, y, &d))),
        })
    }

    /// Constant-mean-free-path model (collision frequency proportional to
    /// speed); everything is in closed form.
    pub fn const_mfp() -> Self {
        KineticModel {
            kind: ModelKind::ConstMfp,
            c: 1.0,
            lambda_cache: None,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Collision ratio; meaningful for the Maxwell model only.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Maxwell => "maxwell",
            ModelKind::ConstMfp => "cmfp",
        }
    }

    /// Continuous spectrum of the half-space problem.
    pub fn spectrum(&self) -> Interval {
        match self.kind {
            ModelKind::Maxwell => Interval::new(0.0, f64::INFINITY).unwrap(),
            ModelKind::ConstMfp => Interval::new(0.0, 1.0).unwrap(),
        }
    }

    /// Right end of the working grid on the spectrum (finite truncation of
    /// `(0, ∞)` for the Maxwell model).
    pub fn spectrum_grid_hi(&self) -> f64 {
        match self.kind {
            ModelKind::Maxwell => MAXWELL_GRID_HI,
            ModelKind::ConstMfp => 1.0,
        }
    }

    /// Full velocity interval of the kinetic equation (both signs of μ).
    pub fn velocity_interval(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::Maxwell => (-MAXWELL_GRID_HI, MAXWELL_GRID_HI),
            ModelKind::ConstMfp => (-1.0, 1.0),
        }
    }

    /// Scalar coefficient in front of the collision kernel: `c/√π` or `3/4`.
    pub fn kernel_coef(&self) -> f64 {
        match self.kind {
            ModelKind::Maxwell => self.c / PI.sqrt(),
            ModelKind::ConstMfp => 0.75,
        }
    }

    /// Shape factor of the kernel weight: `e^{-μ²}` or `1-μ²`.
    pub fn kernel_shape(&self, mu: f64) -> f64 {
        match self.kind {
            ModelKind::Maxwell => (-mu * mu).exp(),
            ModelKind::ConstMfp => 1.0 - mu * mu,
        }
    }

    /// Kernel weight `w(μ)` (positive on the interior of the velocity
    /// interval).
    pub fn weight(&self, mu: f64) -> f64 {
        self.kernel_coef() * self.kernel_shape(mu)
    }

    /// Coefficient of the `λ(η)δ(η−μ)` term in the eigenfunctions:
    /// `e^{η²}` or `1/(1-η²)`.
    pub fn delta_normalizer(&self, eta: f64) -> f64 {
        match self.kind {
            ModelKind::Maxwell => (eta * eta).exp(),
            ModelKind::ConstMfp => 1.0 / (1.0 - eta * eta),
        }
    }

    /// On-axis principal value of the dispersion function (the real part of
    /// both boundary values).
    ///
    /// Maxwell uses `1 - 2cμ² ∫₀¹ e^{-μ²(1-t²)} dt`, cached on a dense grid;
    /// the constant-mean-free-path value is closed-form.
    pub fn lambda_real(&self, mu: f64) -> f64 {
        match self.kind {
            ModelKind::ConstMfp => cmfp_lambda_real(mu),
            ModelKind::Maxwell => {
                let m = mu.abs();
                if let Some(cache) = &self.lambda_cache {
                    if m <= cache.hi() {
                        return cache.eval(m);
                    }
                }
                maxwell_lambda_real_and_deriv(m, self.c, &QuadratureConfig::tight())
                    .expect("Dawson-type integrand is smooth and bounded")
                    .0
            }
        }
    }

    /// dλ/dμ of the on-axis value; needed for the exact-slope θ tables.
    fn lambda_real_deriv(&self, mu: f64) -> f64 {
        match self.kind {
            ModelKind::ConstMfp => {
                if mu == 0.0 {
                    return 0.0;
                }
                let l0 = 1.0 + 0.5 * mu * ((1.0 - mu) / (1.0 + mu)).ln();
                let l0p = 0.5 * ((1.0 - mu) / (1.0 + mu)).ln() - mu / (1.0 - mu * mu);
                1.5 * (-2.0 * mu * l0 + (1.0 - mu * mu) * l0p)
            }
            ModelKind::Maxwell => {
                // λ' = -2cμ[1 + I(1-2μ²)] with I = ∫₀¹ e^{-μ²(1-t²)} dt; the
                // Dawson-type factor is recovered from the cached value except
                // at small μ, where the subtraction loses digits.
                let dawson_like = if mu < 1e-3 {
                    1.0 - 2.0 * mu * mu / 3.0
                } else {
                    (1.0 - self.lambda_real(mu)) / (2.0 * self.c * mu * mu)
                };
                -2.0 * self.c * mu * (1.0 + dawson_like * (1.0 - 2.0 * mu * mu))
            }
        }
    }

    /// dθ/dμ on the open spectrum, with the analytic endpoint limits.
    pub fn theta_slope_exact(&self, mu: f64) -> f64 {
        if mu == 0.0 {
            return PI * self.weight(0.0);
        }
        if self.kind == ModelKind::ConstMfp && mu >= 1.0 {
            // Im vanishes linearly and Re → -1/2: θ' → (3π/4)·2 / (1/2)·... = 3π.
            return 3.0 * PI;
        }
        let re = self.lambda_real(mu);
        let im = self.im_lambda_plus(mu);
        let rep = self.lambda_real_deriv(mu);
        let imp = match self.kind {
            ModelKind::Maxwell => {
                self.c * PI.sqrt() * (-mu * mu).exp() * (1.0 - 2.0 * mu * mu)
            }
            ModelKind::ConstMfp => 0.75 * PI * (1.0 - 3.0 * mu * mu),
        };
        let denom = re * re + im * im;
        (imp * re - rep * im) / denom
    }

    /// PV-quadrature route to the Maxwell on-axis value; retained as an
    /// independent oracle for the cached closed form.
    pub fn lambda_real_pv_oracle(
        &self,
        mu: f64,
        cfg: &QuadratureConfig,
    ) -> Result<f64, DispersionError> {
        match self.kind {
            ModelKind::ConstMfp => {
                let pv = pv_integral(
                    |t| 0.75 * t * (1.0 - t * t),
                    Interval::new(-1.0, 1.0)?,
                    mu,
                    cfg,
                )?;
                Ok(pv)
            }
            ModelKind::Maxwell => {
                let t = cfg.semiinfinite_cutoff.max(mu.abs() + 4.0) + 2.0;
                let pv = pv_integral(|x| (-x * x).exp(), Interval::new(-t, t)?, mu, cfg)?;
                Ok(1.0 + mu * self.kernel_coef() * pv)
            }
        }
    }

    /// `Im λ⁺(μ) = π μ w(μ)` on the open spectrum.
    pub fn im_lambda_plus(&self, mu: f64) -> f64 {
        PI * mu * self.weight(mu)
    }

    /// Boundary values `λ±(μ)` on the cut.
    pub fn boundary_values(&self, mu: f64) -> Result<BoundaryPair, DispersionError> {
        let hi = match self.kind {
            ModelKind::Maxwell => f64::INFINITY,
            ModelKind::ConstMfp => 1.0,
        };
        if !(mu > 0.0 && mu < hi) {
            return Err(DispersionError::Endpoint { mu });
        }
        let re = self.lambda_real(mu);
        let im = self.im_lambda_plus(mu);
        Ok(BoundaryPair {
            mu,
            lambda_plus: Complex64::new(re, im),
            lambda_minus: Complex64::new(re, -im),
        })
    }

    /// Continuous argument of `λ⁺(μ)`; equals `atan2(Im λ⁺, Re λ⁺)`, which is
    /// already the branch with θ(0) = 0 since `Im λ⁺ > 0` inside the spectrum.
    pub fn theta_exact(&self, mu: f64) -> f64 {
        if mu == 0.0 {
            return 0.0;
        }
        if self.kind == ModelKind::ConstMfp && mu >= 1.0 {
            return PI;
        }
        self.im_lambda_plus(mu).atan2(self.lambda_real(mu))
    }

    /// Interior zeros of the on-axis dispersion value, with the resonance
    /// width `Im λ⁺/|dλ/dμ|`.
    ///
    /// Where `λ_real` crosses zero with small `Im λ⁺` the weight `1/N(η)`
    /// develops a narrow quasi-resonance; spectral grids must cluster nodes
    /// there or continuum coefficients are undersampled.
    pub fn dispersion_zeros(&self) -> Vec<DispersionZero> {
        let hi = self.spectrum_grid_hi();
        let n = 4000;
        let mut zeros = Vec::new();
        let mut prev_mu = hi * 0.5e-4;
        let mut prev = self.lambda_real(prev_mu);
        for k in 1..=n {
            let mu = hi * (k as f64 - 0.5) / n as f64;
            let cur = self.lambda_real(mu);
            if prev == 0.0 || prev * cur < 0.0 {
                let (mut a, mut b) = (prev_mu, mu);
                let fa = prev;
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    if fa * self.lambda_real(m) <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                let eta = 0.5 * (a + b);
                let slope = self.lambda_real_deriv(eta).abs().max(1e-300);
                zeros.push(DispersionZero {
                    eta,
                    width: self.im_lambda_plus(eta) / slope,
                });
            }
            prev_mu = mu;
            prev = cur;
        }
        zeros
    }

    /// Dispersion function off the real axis / off the cut.
    pub fn lambda_of(
        &self,
        z: Complex64,
        cfg: &QuadratureConfig,
    ) -> Result<Complex64, DispersionError> {
        match self.kind {
            ModelKind::ConstMfp => lambda_cmfp(z),
            ModelKind::Maxwell => lambda_maxwell(z, self.c, cfg),
        }
    }
}

/// A zero of the on-axis dispersion value inside the spectrum.
#[derive(Debug, Clone, Copy)]
pub struct DispersionZero {
    pub eta: f64,
    /// Lorentzian half-width of the induced `1/|λ⁺|²` peak.
    pub width: f64,
}

/// Boundary values of the dispersion function at one cut point.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPair {
    pub mu: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

impl BoundaryPair {
    pub fn theta(&self) -> f64 {
        self.lambda_plus.im.atan2(self.lambda_plus.re)
    }

    /// `λ⁺λ⁻ = |λ⁺|²`.
    pub fn modulus_squared(&self) -> f64 {
        self.lambda_plus.norm_sqr()
    }
}

/// `λ₀(z) = 1 + (z/2) ln((1-z)/(1+z))` on the branch analytic off `[-1, 1]`
/// (real for real z outside the cut).
pub fn lambda0(z: Complex64) -> Result<Complex64, DispersionError> {
    if z.im == 0.0 && z.re.abs() <= 1.0 {
        return Err(DispersionError::OnCut(format!(
            "λ₀ at z = {} on [-1, 1]",
            z.re
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    // Written as Log(z-1) - Log(z+1): the principal-branch jumps on the two
    // rays (-∞, 1) and (-∞, -1) cancel outside [-1, 1], leaving the single
    // cut the defining integral has.
    let log_ratio = (z - one).ln() - (z + one).ln();
    Ok(one + 0.5 * z * log_ratio)
}

/// Constant-mean-free-path dispersion function
/// `λ(z) = -1/2 + (3/2)(1-z²) λ₀(z)` for z off `[-1, 1]`.
pub fn lambda_cmfp(z: Complex64) -> Result<Complex64, DispersionError> {
    let l0 = lambda0(z)?;
    Ok(Complex64::new(-0.5, 0.0) + 1.5 * (Complex64::new(1.0, 0.0) - z * z) * l0)
}

/// Maxwell dispersion function via the truncated full-line Cauchy integral;
/// requires z off the real axis (the on-axis value is [`KineticModel::lambda_real`]).
pub fn lambda_maxwell(
    z: Complex64,
    c: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64, DispersionError> {
    if z.im == 0.0 {
        return Err(DispersionError::OnCut(format!(
            "λ_c at real z = {}; use the on-axis boundary operations",
            z.re
        )));
    }
    let t = cfg.semiinfinite_cutoff.max(z.re.abs() + 4.0) + 2.0;
    let integral = cauchy_integral(|x| (-x * x).exp(), Interval::new(-t, t)?, z, cfg)?;
    Ok(Complex64::new(1.0, 0.0) + z * (c / PI.sqrt()) * integral)
}

fn cmfp_lambda_real(mu: f64) -> f64 {
    let m = mu.abs();
    if m == 1.0 {
        return -0.5;
    }
    let l0 = 1.0 + 0.5 * m * ((1.0 - m) / (1.0 + m)).ln();
    -0.5 + 1.5 * (1.0 - m * m) * l0
}

/// `1 - 2cμ² ∫₀¹ e^{-μ²(1-t²)} dt` and its μ-derivative, the
/// exponentially-stable form of the Maxwell on-axis value.
fn maxwell_lambda_real_and_deriv(
    mu: f64,
    c: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64), DispersionError> {
    if mu == 0.0 {
        return Ok((1.0, 0.0));
    }
    let m2 = mu * mu;
    let dawson_like = gauss_integral(
        |t| (-m2 * (1.0 - t * t)).exp(),
        Interval::new(0.0, 1.0)?,
        cfg,
    )?;
    let value = 1.0 - 2.0 * c * m2 * dawson_like;
    let deriv = -2.0 * c * mu * (1.0 + dawson_like * (1.0 - 2.0 * m2));
    Ok((value, deriv))
}

// ---------------------------------------------------------------------------
// θ table
// ---------------------------------------------------------------------------

/// Tolerance on the interpolated phase: panels are refined until the cubic
/// table reproduces θ to this accuracy at panel midpoints. Downstream, the
/// weight γ inherits this as its relative phase-consistency level.
const PHASE_TOL: f64 = 2.5e-10;
const MAX_REFINE_PASSES: usize = 14;
const MAX_GRID_NODES: usize = 60_000;

/// Branch-continuous samples of θ(μ) over the spectrum, with the measured
/// winding index and endpoint limits. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ThetaTable {
    grid: Vec<f64>,
    theta: Vec<f64>,
    kappa: i32,
    endpoint_limits: (f64, f64),
    interp: Pchip,
}

impl ThetaTable {
    /// Samples θ on an endpoint-clustered grid of at least `grid_size + 1`
    /// nodes and refines panels until the interpolant is phase-accurate and
    /// no panel jump reaches π/2.
    pub fn build(model: &KineticModel, grid_size: usize) -> Result<Self, DispersionError> {
        if grid_size < 64 {
            return Err(DispersionError::InvalidParameter(format!(
                "grid_size = {grid_size} < 64"
            )));
        }
        let hi = model.spectrum_grid_hi();
        let n = grid_size;
        let mut grid: Vec<f64> = (0..=n)
            .map(|i| 0.5 * hi * (1.0 - (PI * i as f64 / n as f64).cos()))
            .collect();
        let mut theta: Vec<f64> = grid.iter().map(|&m| model.theta_exact(m)).collect();
        theta[0] = 0.0;
        let end_slopes = (
            model.theta_slope_exact(0.0),
            model.theta_slope_exact(hi),
        );

        for _pass in 0..MAX_REFINE_PASSES {
            let interp = Pchip::spline(grid.clone(), theta.clone(), Some(end_slopes));
            let mut inserts: Vec<(usize, f64)> = Vec::new();
            for i in 0..grid.len() - 1 {
                let mid = 0.5 * (grid[i] + grid[i + 1]);
                if mid <= grid[i] || mid >= grid[i + 1] {
                    continue;
                }
                let jump = (theta[i + 1] - theta[i]).abs() >= 0.5 * PI;
                let miss = (interp.eval(mid) - model.theta_exact(mid)).abs() > PHASE_TOL;
                if jump || miss {
                    inserts.push((i, mid));
                }
            }
            if inserts.is_empty() {
                break;
            }
            if grid.len() + inserts.len() > MAX_GRID_NODES {
                return Err(DispersionError::Branch(format!(
                    "θ grid exceeded {MAX_GRID_NODES} nodes without resolving the branch; \
                     the dispersion argument varies too fast for this configuration"
                )));
            }
            for (k, (i, mid)) in inserts.iter().enumerate() {
                grid.insert(i + 1 + k, *mid);
                theta.insert(i + 1 + k, model.theta_exact(*mid));
            }
        }

        // A π/2 jump that survived refinement means the branch sweep is
        // narrower than floating-point resolution.
        for i in 0..grid.len() - 1 {
            if (theta[i + 1] - theta[i]).abs() >= 0.5 * PI {
                return Err(DispersionError::Branch(format!(
                    "unresolved θ jump of {:.3} across [{:.16}, {:.16}]",
                    theta[i + 1] - theta[i],
                    grid[i],
                    grid[i + 1]
                )));
            }
        }

        let last = *theta.last().unwrap();
        let kappa = (last / PI).round() as i32;
        if !(0..=1).contains(&kappa) {
            return Err(DispersionError::Branch(format!(
                "measured winding index {kappa} outside {{0, 1}}"
            )));
        }
        let interp = Pchip::spline(grid.clone(), theta.clone(), Some(end_slopes));
        Ok(ThetaTable {
            grid,
            theta,
            kappa,
            endpoint_limits: (0.0, last),
            interp,
        })
    }

    /// Table with prescribed samples; used by tests and diagnostics.
    #[cfg(test)]
    pub(crate) fn from_samples(grid: Vec<f64>, theta: Vec<f64>) -> Self {
        let first = theta[0];
        let last = *theta.last().unwrap();
        let kappa = (last / PI).round() as i32;
        let interp = Pchip::spline(grid.clone(), theta.clone(), None);
        ThetaTable {
            grid,
            theta,
            kappa,
            endpoint_limits: (first, last),
            interp,
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Measured winding index `round((θ(hi) - θ(lo))/π)`.
    pub fn kappa(&self) -> i32 {
        self.kappa
    }

    pub fn endpoint_limits(&self) -> (f64, f64) {
        self.endpoint_limits
    }

    pub fn hi(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn interp(&self) -> &Pchip {
        &self.interp
    }

    /// Interpolated θ, clamped to the tabulated range.
    pub fn theta_at(&self, mu: f64) -> f64 {
        self.interp.eval(mu.clamp(self.grid[0], self.hi()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lambda0_reference_points() {
        assert!((lambda0(Complex64::new(0.0, 1e-12)).unwrap().re - 1.0).abs() < 1e-9);
        // Analytic continuation is real on (1, ∞).
        let v = lambda0(Complex64::new(2.0, 0.0)).unwrap();
        assert!((v.re - (1.0 - 3.0f64.ln())).abs() < 1e-14);
        assert!(v.im.abs() < 1e-14);
        assert!(lambda0(Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn lambda0_boundary_value_from_above() {
        // λ₀⁺(0.5) = 1 + 0.25 ln(1/3) + iπ·0.25, approached with a small
        // positive imaginary part.
        let v = lambda0(Complex64::new(0.5, 1e-9)).unwrap();
        assert!((v.re - (1.0 + 0.25 * (1.0f64 / 3.0).ln())).abs() < 1e-7);
        assert!((v.im - 0.25 * PI).abs() < 1e-7);
        assert!((v.re - 0.725347).abs() < 1e-5);
    }

    #[test]
    fn lambda_cmfp_reference_points() {
        let v = lambda_cmfp(Complex64::new(0.0, 1e-12)).unwrap();
        assert!((v.re - 1.0).abs() < 1e-9);
        // λ(μ→1⁻) → -1/2 on the boundary.
        assert!((cmfp_lambda_real(1.0) + 0.5).abs() < 1e-15);
        assert!((cmfp_lambda_real(1.0 - 1e-9) + 0.5).abs() < 1e-6);
    }

    #[test]
    fn lambda_cmfp_matches_defining_integral() {
        let cfg = QuadratureConfig::tight();
        for x in [3.0, -2.0, 1.5] {
            let direct = gauss_integral(
                |t| 0.75 * t * (1.0 - t * t) / (t - x),
                Interval::new(-1.0, 1.0).unwrap(),
                &cfg,
            )
            .unwrap();
            let closed = lambda_cmfp(Complex64::new(x, 0.0)).unwrap();
            assert!((closed.re - direct).abs() < 1e-10, "at z = {x}");
            assert!(closed.im.abs() < 1e-12);
        }
    }

    #[test]
    fn cmfp_boundary_imaginary_part() {
        let m = KineticModel::const_mfp();
        let bp = m.boundary_values(0.5).unwrap();
        assert!((bp.lambda_plus.im - 0.75 * PI * 0.5 * 0.75).abs() < 1e-14);
        assert!((bp.lambda_plus.im - 0.883573).abs() < 1e-6);
        // Real part agrees with the PV quadrature of the defining integral.
        let pv = m
            .lambda_real_pv_oracle(0.5, &QuadratureConfig::tight())
            .unwrap();
        assert!((bp.lambda_plus.re - pv).abs() < 1e-10);
    }

    #[test]
    fn maxwell_two_path_agreement() {
        let cfg = QuadratureConfig::tight();
        for &c in &[0.3, 0.7, 1.0] {
            let m = KineticModel::maxwell(c).unwrap();
            for &mu in &[0.25, 0.5, 1.0, 2.0] {
                let fast = m.lambda_real(mu);
                let pv = m.lambda_real_pv_oracle(mu, &cfg).unwrap();
                assert!(
                    (fast - pv).abs() < 1e-9,
                    "c = {c}, μ = {mu}: {fast} vs {pv}"
                );
            }
        }
    }

    #[test]
    fn maxwell_imaginary_axis_value_is_real() {
        let v = lambda_maxwell(
            Complex64::new(0.0, 1.0),
            0.5,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(v.im.abs() < 1e-10, "Im = {}", v.im);
    }

    #[test]
    fn maxwell_rejects_real_axis() {
        assert!(lambda_maxwell(Complex64::new(0.5, 0.0), 0.5, &QuadratureConfig::default())
            .is_err());
    }

    #[test]
    fn maxwell_boundary_near_zero() {
        let m = KineticModel::maxwell(1.0).unwrap();
        let bp = m.boundary_values(1e-8).unwrap();
        assert!((bp.lambda_plus.re - 1.0).abs() < 1e-7);
        assert!(bp.lambda_plus.im.abs() < 1e-7);
    }

    #[test]
    fn maxwell_rejects_bad_c() {
        assert!(KineticModel::maxwell(1.5).is_err());
        assert!(KineticModel::maxwell(0.0).is_err());
        assert!(KineticModel::maxwell(-0.2).is_err());
    }

    #[test]
    fn theta_cmfp_endpoints_and_winding() {
        let m = KineticModel::const_mfp();
        let t = ThetaTable::build(&m, 256).unwrap();
        assert_eq!(t.kappa(), 1);
        assert_eq!(t.endpoint_limits().0, 0.0);
        assert!((t.endpoint_limits().1 - PI).abs() < 1e-12);
        for &mu in &[0.1, 0.4, 0.7, 0.95] {
            let v = t.theta_at(mu);
            assert!(v > 0.0 && v < PI);
        }
    }

    #[test]
    fn theta_maxwell_windings() {
        let m1 = KineticModel::maxwell(1.0).unwrap();
        let t1 = ThetaTable::build(&m1, 256).unwrap();
        assert_eq!(t1.kappa(), 1);
        assert!((t1.endpoint_limits().1 - PI).abs() < 1e-10);

        let m05 = KineticModel::maxwell(0.5).unwrap();
        let t05 = ThetaTable::build(&m05, 256).unwrap();
        assert_eq!(t05.kappa(), 0);
        assert!(t05.endpoint_limits().1.abs() < 1e-10);

        // c = 0.9 crosses Re λ⁺ = 0 twice; still winding zero.
        let m09 = KineticModel::maxwell(0.9).unwrap();
        let t09 = ThetaTable::build(&m09, 256).unwrap();
        assert_eq!(t09.kappa(), 0);
        let theta_max = t09.theta().iter().cloned().fold(0.0f64, f64::max);
        assert!(theta_max > 0.5 * PI, "θ should exceed π/2, got {theta_max}");
    }

    #[test]
    fn theta_small_mu_slope() {
        let m = KineticModel::const_mfp();
        let mu = 1e-3;
        let expected = PI * mu * m.weight(mu) / 1.0;
        let got = m.theta_exact(mu);
        assert!((got - expected).abs() < 0.05 * expected);
    }

    #[test]
    fn theta_cmfp_endpoint_approach() {
        let m = KineticModel::const_mfp();
        let mu = 1.0 - 1e-4;
        assert!((m.theta_exact(mu) - PI).abs() < 1e-3);
    }

    #[test]
    fn theta_interpolant_phase_accuracy() {
        let m = KineticModel::const_mfp();
        let t = ThetaTable::build(&m, 256).unwrap();
        let mut worst = 0.0f64;
        for k in 1..2000 {
            let mu = k as f64 / 2000.0;
            worst = worst.max((t.theta_at(mu) - m.theta_exact(mu)).abs());
        }
        assert!(worst < 5.0 * PHASE_TOL, "worst phase miss {worst:.3e}");
    }

    #[test]
    fn rejects_small_grid() {
        let m = KineticModel::const_mfp();
        assert!(ThetaTable::build(&m, 32).is_err());
    }

    proptest! {
        #[test]
        fn boundary_conjugate_symmetry(mu in 0.01f64..0.99, c in 0.2f64..1.0) {
            let m = KineticModel::maxwell(c).unwrap();
            let bp = m.boundary_values(mu).unwrap();
            prop_assert!((bp.lambda_minus - bp.lambda_plus.conj()).norm() < 1e-12);
            let mc = KineticModel::const_mfp();
            let bc = mc.boundary_values(mu).unwrap();
            prop_assert!((bc.lambda_minus - bc.lambda_plus.conj()).norm() < 1e-12);
            // Upper-half-plane argument stays in (0, π).
            prop_assert!(bp.theta() > 0.0 && bp.theta() < PI);
        }
    }
}
