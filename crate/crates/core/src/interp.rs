//! Monotone cubic Hermite interpolation (Fritsch–Carlson slopes).
//!
//! Every tabulated quantity in this crate (θ(μ), γ(μ), continuum
//! coefficients) is stored as a `Pchip` so that singular integrals over the
//! table can be evaluated panel by panel in closed form.

/// Piecewise cubic Hermite interpolant with monotonicity-preserving slopes.
///
/// Panels are stored in the power basis relative to the left knot, which is
/// what the closed-form Cauchy/principal-value panel integrals in
/// [`crate::quadrature`] consume.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Power-basis coefficients `[c0, c1, c2, c3]` per panel, in `s = t - x[i]`.
    coeffs: Vec<[f64; 4]>,
}

impl Pchip {
    /// Builds the interpolant through `(x, y)` with Fritsch–Carlson slopes.
    /// Knots must be strictly ascending and finite, with at least two points.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        check_knots(&x, &y);
        let d = fritsch_carlson_slopes(&x, &y);
        Pchip::from_hermite(x, y, &d)
    }

    /// Cubic Hermite interpolant with caller-supplied derivatives. With exact
    /// slopes the interpolation error is O(h⁴) instead of the O(h³) the
    /// shape-limited slopes give; the dispersion tables rely on this.
    pub fn with_slopes(x: Vec<f64>, y: Vec<f64>, d: &[f64]) -> Self {
        check_knots(&x, &y);
        assert_eq!(x.len(), d.len(), "pchip: slope length mismatch");
        Pchip::from_hermite(x, y, d)
    }

    /// Globally C² cubic spline through `(x, y)`; `clamp` fixes the end
    /// slopes (natural boundary otherwise).
    ///
    /// C² matters where the interpolant is fed to the singular-integral
    /// kernels: a jump in the second derivative at a knot puts an
    /// `(t-k)² ln|t-k|` wiggle into the principal-value transform, and the θ
    /// tables would imprint that wiggle on every quantity built from V(z).
    pub fn spline(x: Vec<f64>, y: Vec<f64>, clamp: Option<(f64, f64)>) -> Self {
        check_knots(&x, &y);
        let n = x.len();
        if n == 2 {
            let d0 = (y[1] - y[0]) / (x[1] - x[0]);
            return Pchip::from_hermite(x, y, &[d0, d0]);
        }
        // Tridiagonal system for the knot slopes d_i.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            let dl = (y[i] - y[i - 1]) / hl;
            let dr = (y[i + 1] - y[i]) / hr;
            sub[i] = 1.0 / hl;
            diag[i] = 2.0 * (1.0 / hl + 1.0 / hr);
            sup[i] = 1.0 / hr;
            rhs[i] = 3.0 * (dl / hl + dr / hr);
        }
        match clamp {
            Some((s0, _)) => {
                diag[0] = 1.0;
                rhs[0] = s0;
            }
            None => {
                // Natural: second derivative zero at the first knot.
                let h = x[1] - x[0];
                diag[0] = 2.0;
                sup[0] = 1.0;
                rhs[0] = 3.0 * (y[1] - y[0]) / h;
            }
        }
        match clamp {
            Some((_, s1)) => {
                diag[n - 1] = 1.0;
                rhs[n - 1] = s1;
            }
            None => {
                let h = x[n - 1] - x[n - 2];
                sub[n - 1] = 1.0;
                diag[n - 1] = 2.0;
                rhs[n - 1] = 3.0 * (y[n - 1] - y[n - 2]) / h;
            }
        }
        // Thomas sweep.
        let mut d = vec![0.0; n];
        let mut cp = vec![0.0; n];
        cp[0] = sup[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - sub[i] * cp[i - 1];
            cp[i] = sup[i] / m;
            d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            d[i] -= cp[i] * d[i + 1];
        }
        Pchip::from_hermite(x, y, &d)
    }

    /// Copy of the interpolant with a constant added to the values.
    pub fn shifted(&self, offset: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.y {
            *v += offset;
        }
        for c in &mut out.coeffs {
            c[0] += offset;
        }
        out
    }

    /// Hermite interpolant with 4-point finite-difference slopes and no shape
    /// limiter: full O(h⁴) accuracy for smooth data.
    ///
    /// The Fritsch–Carlson limiter zeroes the slope wherever neighboring
    /// secants change sign, which costs several digits around smooth extrema;
    /// quadrature-bound product tables use this constructor instead.
    pub fn smooth(x: Vec<f64>, y: Vec<f64>) -> Self {
        check_knots(&x, &y);
        if x.len() < 4 {
            let d = fritsch_carlson_slopes(&x, &y);
            return Pchip::from_hermite(x, y, &d);
        }
        let n = x.len();
        let mut d = vec![0.0; n];
        for i in 0..n {
            // Nearest 4-point stencil, one-sided at the ends.
            let s = i.saturating_sub(1).min(n - 4);
            d[i] = lagrange4_derivative(&x[s..s + 4], &y[s..s + 4], x[i]);
        }
        Pchip::from_hermite(x, y, &d)
    }

    fn from_hermite(x: Vec<f64>, y: Vec<f64>, d: &[f64]) -> Self {
        let mut coeffs = Vec::with_capacity(x.len() - 1);
        for i in 0..x.len() - 1 {
            let h = x[i + 1] - x[i];
            let delta = (y[i + 1] - y[i]) / h;
            let c2 = (3.0 * delta - 2.0 * d[i] - d[i + 1]) / h;
            let c3 = (d[i] + d[i + 1] - 2.0 * delta) / (h * h);
            coeffs.push([y[i], d[i], c2, c3]);
        }
        Pchip { x, y, coeffs }
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn n_panels(&self) -> usize {
        self.coeffs.len()
    }

    pub fn panel(&self, i: usize) -> (f64, f64, [f64; 4]) {
        (self.x[i], self.x[i + 1], self.coeffs[i])
    }

    /// Index of the panel containing `t` (clamped to the end panels).
    pub fn panel_index(&self, t: f64) -> usize {
        if t <= self.x[0] {
            return 0;
        }
        if t >= *self.x.last().unwrap() {
            return self.coeffs.len() - 1;
        }
        // partition_point returns the first knot > t; the panel starts one left.
        let k = self.x.partition_point(|&v| v <= t);
        (k - 1).min(self.coeffs.len() - 1)
    }

    /// Evaluates the interpolant. Outside the knot range the end panels are
    /// extended, i.e. the evaluation extrapolates with the boundary cubics.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.panel_index(t);
        let s = t - self.x[i];
        let [c0, c1, c2, c3] = self.coeffs[i];
        c0 + s * (c1 + s * (c2 + s * c3))
    }

    /// Integral of the interpolant over `[a, b]` within the knot range.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        assert!(a <= b, "pchip: inverted integration range");
        let mut total = 0.0;
        for i in 0..self.coeffs.len() {
            let (lo, hi, c) = self.panel(i);
            let l = a.max(lo);
            let r = b.min(hi);
            if l >= r {
                continue;
            }
            total += antiderivative(c, r - lo) - antiderivative(c, l - lo);
        }
        total
    }
}

fn antiderivative(c: [f64; 4], s: f64) -> f64 {
    s * (c[0] + s * (c[1] / 2.0 + s * (c[2] / 3.0 + s * c[3] / 4.0)))
}

/// Derivative at `t` of the cubic through four (x, y) pairs.
fn lagrange4_derivative(x: &[f64], y: &[f64], t: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..4 {
        let mut denom = 1.0;
        for k in 0..4 {
            if k != j {
                denom *= x[j] - x[k];
            }
        }
        // d/dt Π_{k≠j}(t - x_k) = Σ_{m≠j} Π_{k≠j,m}(t - x_k)
        let mut basis_deriv = 0.0;
        for m in 0..4 {
            if m == j {
                continue;
            }
            let mut prod = 1.0;
            for k in 0..4 {
                if k != j && k != m {
                    prod *= t - x[k];
                }
            }
            basis_deriv += prod;
        }
        total += y[j] * basis_deriv / denom;
    }
    total
}

fn check_knots(x: &[f64], y: &[f64]) {
    assert_eq!(x.len(), y.len(), "pchip: length mismatch");
    assert!(x.len() >= 2, "pchip: need at least two knots");
    for i in 1..x.len() {
        assert!(
            x[i] > x[i - 1] && x[i].is_finite(),
            "pchip: knots must be strictly ascending and finite"
        );
    }
}

fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut h = vec![0.0; n - 1];
    let mut delta = vec![0.0; n - 1];
    for i in 0..n - 1 {
        h[i] = x[i + 1] - x[i];
        delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// One-sided three-point slope estimate with the usual shape limiters.
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        s = 0.0;
    } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
        s = 3.0 * d0;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knot_values() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let y: Vec<f64> = x.iter().map(|&t| (3.0 * t).sin()).collect();
        let p = Pchip::new(x.clone(), y.clone());
        for (xi, yi) in x.iter().zip(&y) {
            assert!((p.eval(*xi) - yi).abs() < 1e-14);
        }
    }

    #[test]
    fn close_to_smooth_function_between_knots() {
        let n = 400;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&t| (2.0 * t).exp()).collect();
        let p = Pchip::new(x, y);
        for k in 0..1000 {
            let t = k as f64 / 999.0;
            let err = (p.eval(t) - (2.0 * t).exp()).abs();
            // Boundary panels carry the one-sided slope estimate's O(h²) error.
            assert!(err < 1e-7, "err {err} at {t}");
        }
    }

    #[test]
    fn exact_slopes_gain_an_order() {
        let n = 400;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&t| (2.0 * t).exp()).collect();
        let d: Vec<f64> = x.iter().map(|&t| 2.0 * (2.0 * t).exp()).collect();
        let p = Pchip::with_slopes(x, y, &d);
        for k in 0..1000 {
            let t = k as f64 / 999.0;
            let err = (p.eval(t) - (2.0 * t).exp()).abs();
            assert!(err < 2e-11, "err {err} at {t}");
        }
    }

    #[test]
    fn smooth_constructor_handles_extrema() {
        // A хump: limited slopes lose ~4 digits at the crest, the
        // finite-difference slopes keep O(h⁴).
        let n = 200;
        let x: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 / (n - 1) as f64).collect();
        let f = |t: f64| t * (-t * t).exp();
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let p = Pchip::smooth(x, y);
        for k in 0..2000 {
            let t = 2.0 * k as f64 / 1999.0;
            let err = (p.eval(t) - f(t)).abs();
            assert!(err < 3e-9, "err {err} at {t}");
        }
    }

    #[test]
    fn preserves_monotone_data() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let y = vec![0.0, 0.1, 0.11, 2.0, 2.01];
        let p = Pchip::new(x, y);
        let mut prev = p.eval(0.0);
        for k in 1..=400 {
            let t = 4.0 * k as f64 / 400.0;
            let v = p.eval(t);
            assert!(v >= prev - 1e-12, "overshoot at {t}");
            prev = v;
        }
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // pchip reproduces straight lines exactly, so its integral must too.
        let x = vec![0.0, 0.3, 1.1, 2.0];
        let y: Vec<f64> = x.iter().map(|&t| 2.0 * t + 1.0).collect();
        let p = Pchip::new(x, y);
        let exact = |t: f64| t * t + t;
        assert!((p.integrate(0.0, 2.0) - exact(2.0)).abs() < 1e-14);
        assert!((p.integrate(0.2, 1.7) - (exact(1.7) - exact(0.2))).abs() < 1e-14);
    }
}
