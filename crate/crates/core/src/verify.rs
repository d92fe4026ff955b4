//! Verification suites: the orthogonality theorems, moment identities,
//! canonical-function identity, and expansion closure as executable checks.
//! Shared between the command-line `verify` command and the acceptance
//! tests.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dispersion::{KineticModel, ModelKind};
use crate::eigen::{EigenPairing, DEFAULT_SPECTRAL_NODES};
use crate::quadrature::QuadratureConfig;
use crate::report::{Check, SuiteReport};
use crate::xfunction::{CanonicalX, GammaWeight, Normalization, XError};

/// Reference slip integral value quoted to six decimals.
pub const V1_REFERENCE: f64 = 0.581946;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// θ-grid size for the solver stack.
    pub grid: usize,
    /// Spectral nodes for expansions.
    pub nodes: usize,
    /// Seed for the randomized closure test functions.
    pub seed: u64,
    /// Diagnostic override of the canonical normalization.
    pub force_normalization: Option<Normalization>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            grid: crate::halfspace::DEFAULT_THETA_GRID,
            nodes: DEFAULT_SPECTRAL_NODES,
            seed: 0,
            force_normalization: None,
        }
    }
}

fn build_pairing(
    model: &KineticModel,
    opts: &VerifyOptions,
) -> Result<EigenPairing, XError> {
    let theta = crate::dispersion::ThetaTable::build(model, opts.grid)?;
    let x = match opts.force_normalization {
        Some(n) => Arc::new(CanonicalX::with_normalization(model.clone(), theta, n)),
        None => Arc::new(CanonicalX::new(model.clone(), theta)?),
    };
    let gamma = GammaWeight::new(Arc::clone(&x))?;
    Ok(EigenPairing::new(gamma))
}

/// Orthogonality-theorem suite for one model.
pub fn suite_theorems(
    model: &KineticModel,
    opts: &VerifyOptions,
) -> Result<SuiteReport, XError> {
    let mut report = SuiteReport::new(
        "theorems",
        model.name(),
        (model.kind() == ModelKind::Maxwell).then(|| model.c()),
    );
    let pairing = build_pairing(model, opts)?;
    let cfg = QuadratureConfig::tight();
    match model.kind() {
        ModelKind::ConstMfp => {
            let x = pairing.gamma().canonical();
            let v1 = x.v1_constant()?;
            report.push(Check::new(
                "slip-integral-reference",
                "V₁ against the six-decimal reference value",
                (v1 - V1_REFERENCE).abs(),
                5e-6,
            ));

            let self_pair = pairing
                .pair_discrete(&|_| 1.0, &cfg)
                .map_err(eigen_to_x)?;
            report.push(Check::new(
                "discrete-self-pairing",
                "(Φ∞, Φ∞) = -4/3",
                (self_pair + 4.0 / 3.0).abs(),
                1e-8,
            ));

            let mu_pair = pairing.pair_discrete(&|m| m, &cfg).map_err(eigen_to_x)?;
            report.push(Check::new(
                "discrete-velocity-pairing",
                "(μ, Φ∞) = -(4/3)V₁",
                (mu_pair + 4.0 / 3.0 * v1).abs(),
                1e-7,
            ));

            let eta_grid = interior_grid(0.0, 1.0, 20);
            let mut worst_vel = 0.0f64;
            let mut worst_orth = 0.0f64;
            for &eta in &eta_grid {
                let v = pairing.pair_smooth(&|m| m, eta).map_err(eigen_to_x)?;
                worst_vel = worst_vel.max((v - eta).abs());
                let o = pairing.pair_smooth(&|_| 1.0, eta).map_err(eigen_to_x)?;
                worst_orth = worst_orth.max(o.abs());
            }
            report.push(Check::new(
                "continuum-velocity-pairing",
                "(μ, Φ_η) = η on a 20-point spectral grid",
                worst_vel,
                1e-6,
            ));
            report.push(Check::new(
                "continuum-discrete-orthogonality",
                "(1, Φ_η) = 0 on a 20-point spectral grid",
                worst_orth,
                1e-6,
            ));

            let m0 = pairing.gamma().moment(0, &cfg)?;
            let m1 = pairing.gamma().moment(1, &cfg)?;
            report.push(Check::new(
                "gamma-moment-0",
                "(3/4)∫(1-μ²)γ dμ = -1",
                (m0 + 1.0).abs(),
                1e-7,
            ));
            report.push(Check::new(
                "gamma-moment-1",
                "(3/4)∫μ(1-μ²)γ dμ = -V₁",
                (m1 + v1).abs(),
                1e-7,
            ));
        }
        ModelKind::Maxwell => {
            let mut worst = 0.0f64;
            for &eta in &[0.2, 0.5, 1.0, 2.0] {
                let v = pairing.pair_smooth(&|_| 1.0, eta).map_err(eigen_to_x)?;
                worst = worst.max((v - eta).abs());
            }
            report.push(Check::new(
                "unit-pairing",
                "(1, Φ_η) = η at η ∈ {0.2, 0.5, 1.0, 2.0}",
                worst,
                1e-6,
            ));
        }
    }
    Ok(report)
}

/// Canonical-function suite: identity residual, negative control, Riemann
/// ratio on the cut, γ realness.
pub fn suite_canonical(
    model: &KineticModel,
    opts: &VerifyOptions,
) -> Result<SuiteReport, XError> {
    let mut report = SuiteReport::new(
        "canonical",
        model.name(),
        (model.kind() == ModelKind::Maxwell).then(|| model.c()),
    );
    let pairing = build_pairing(model, opts)?;
    let gamma = pairing.gamma();
    let x = gamma.canonical();

    let residual = x.identity_residual(gamma, &x.default_identity_samples())?;
    report.push(Check::new(
        "canonical-identity",
        "X(z) equals its integral representation at 5 off-cut points",
        residual,
        1e-6,
    ));

    // Negative control: the rejected normalization must fail loudly.
    let rejected = match x.normalization() {
        Normalization::OneOverZ => Normalization::UnitAtInfinity,
        Normalization::UnitAtInfinity => Normalization::OneOverZ,
    };
    let theta = crate::dispersion::ThetaTable::build(model, opts.grid)?;
    let wrong = Arc::new(CanonicalX::with_normalization(
        model.clone(),
        theta,
        rejected,
    ));
    let wrong_gamma = GammaWeight::new(Arc::clone(&wrong))?;
    let wrong_residual =
        wrong.identity_residual(&wrong_gamma, &wrong.default_identity_samples())?;
    report.push(Check::new(
        "canonical-negative-control",
        "the rejected normalization leaves an O(1) identity gap",
        // Inverted: passes when the gap is LARGE.
        if wrong_residual > 1e-1 { 0.0 } else { 1.0 },
        0.5,
    ));

    let hi = x.theta_table().hi();
    let mut ratio_worst = 0.0f64;
    for k in 1..=20 {
        let mu = hi * k as f64 / 21.0;
        let xp = x.x_plus(mu)?;
        let bp = model.boundary_values(mu)?;
        let gap = (xp / xp.conj() - bp.lambda_plus / bp.lambda_minus).norm();
        ratio_worst = ratio_worst.max(gap);
    }
    report.push(Check::new(
        "riemann-ratio",
        "X⁺/X⁻ = λ⁺/λ⁻ at 20 interior cut points",
        ratio_worst,
        1e-8,
    ));

    report.push(Check::new(
        "gamma-realness",
        "sup |Im γ|/|γ| over the sample grid",
        gamma.max_im_ratio(),
        1e-8,
    ));
    Ok(report)
}

/// Closure suite: smeared delta-normalization and expand/reconstruct
/// round-trips with fixed and seeded test functions.
pub fn suite_closure(
    model: &KineticModel,
    opts: &VerifyOptions,
) -> Result<SuiteReport, XError> {
    let mut report = SuiteReport::new(
        "closure",
        model.name(),
        (model.kind() == ModelKind::Maxwell).then(|| model.c()),
    );
    let pairing = build_pairing(model, opts)?;
    let cfg = QuadratureConfig::tight();
    let hi = model.spectrum_grid_hi();

    // Smeared delta-normalization at 5 interior spectral points.
    let smear_etas = interior_grid(0.0, hi.min(2.5), 5);
    let b: Box<dyn Fn(f64) -> f64> = match model.kind() {
        ModelKind::ConstMfp => Box::new(|s: f64| s * (1.0 - s) * (2.0 - s)),
        ModelKind::Maxwell => Box::new(|s: f64| s * (-s * s).exp()),
    };
    let mut worst_rel = 0.0f64;
    for &eta in &smear_etas {
        let lhs = pairing.double_pairing(&*b, eta).map_err(eigen_to_x)?;
        let rhs = pairing.normalization(eta).map_err(eigen_to_x)? * b(eta);
        worst_rel = worst_rel.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
    }
    report.push(Check::new(
        "smeared-normalization",
        "∫b(η')(Φ_η,Φ_η')dη' = N(η)b(η), relative, 5 interior η",
        worst_rel,
        1e-3,
    ));

    // Round-trips: two fixed analytic functions plus one seeded sample.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let raw = [
        rng.gen_range(0.3..1.0),
        rng.gen_range(0.3..1.0),
        rng.gen_range(0.3..1.0),
    ];
    let total: f64 = raw.iter().sum();
    // Convex combination keeps the seeded sample on the same unit scale as
    // the fixed test functions.
    let (c1, c2, c3) = (raw[0] / total, raw[1] / total, raw[2] / total);
    let probes = match model.kind() {
        ModelKind::ConstMfp => interior_grid(0.05, 0.95, 16),
        ModelKind::Maxwell => interior_grid(0.2, 3.0, 16),
    };
    let fns: Vec<(&str, Box<dyn Fn(f64) -> f64>)> = vec![
        ("exp", Box::new(|m: f64| (-m).exp())),
        ("rational", Box::new(|m: f64| 1.0 / (1.0 + m * m))),
        (
            "seeded",
            Box::new(move |m: f64| c1 * (-m).exp() + c2 / (1.0 + m * m) + c3 * (0.5 * m).cos() * (-0.5 * m * m).exp()),
        ),
    ];
    for (name, f) in &fns {
        let res = pairing
            .closure_residual(&**f, opts.nodes, &probes, &cfg)
            .map_err(eigen_to_x)?;
        report.push(Check::new(
            &format!("closure-roundtrip-{name}"),
            "sup |reconstruct(expand(f)) − image(f)| on interior probes",
            res,
            1e-3,
        ));
    }
    Ok(report)
}

fn interior_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64)
        .collect()
}

fn eigen_to_x(e: crate::eigen::EigenError) -> XError {
    match e {
        crate::eigen::EigenError::X(x) => x,
        other => XError::Unsupported(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_suite_passes_cmfp() {
        let opts = VerifyOptions {
            grid: 256,
            nodes: 96,
            ..Default::default()
        };
        let r = suite_theorems(&KineticModel::const_mfp(), &opts).unwrap();
        assert!(r.pass, "{:#?}", r.checks);
    }

    #[test]
    fn canonical_suite_passes_and_negative_control_fires() {
        let opts = VerifyOptions {
            grid: 256,
            nodes: 96,
            ..Default::default()
        };
        let r = suite_canonical(&KineticModel::const_mfp(), &opts).unwrap();
        assert!(r.pass, "{:#?}", r.checks);

        // Forcing the wrong normalization must fail the identity check.
        let forced = VerifyOptions {
            force_normalization: Some(Normalization::UnitAtInfinity),
            ..opts
        };
        let r2 = suite_canonical(&KineticModel::const_mfp(), &forced).unwrap();
        assert!(!r2.pass);
    }

    #[test]
    fn closure_suite_deterministic_per_seed() {
        let opts = VerifyOptions {
            grid: 256,
            nodes: 64,
            seed: 7,
            ..Default::default()
        };
        let m = KineticModel::const_mfp();
        let a = suite_closure(&m, &opts).unwrap();
        let b = suite_closure(&m, &opts).unwrap();
        assert!(a.pass, "{:#?}", a.checks);
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
    }
}
