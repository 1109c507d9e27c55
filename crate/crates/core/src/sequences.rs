//! Explicit field sequences on the unit cylinder B'_1 x (0,1): a
//! divergence-free / curl-free pair whose pointwise product concentrates on
//! the axis, the map family whose Jacobian determinant does the same, and
//! the exact beta-moment values n^{k+1} ∫_0^1 r^k (1-r)^{n a} dr that all of
//! their weak limits reduce to.
//!
//! Conventions: r = |x'| is the cross-sectional radius (first N-1
//! coordinates), the axial coordinate sits in slot N-1. The direction x'/r
//! is undefined on the axis; evaluators return 0 for those components at
//! r = 0 and quadrature grids and sample clouds never place points there.

use crate::error::{Error, Result};
use crate::geometry::{central_diff, Dim, Domain, Point, ScalarField, VectorField};

/// Below this cross-sectional radius the x'/r direction is treated as
/// singular and the affected components evaluate to 0.
pub const AXIS_EPS: f64 = 1e-12;

/// Derivatives of (1-r)^n grow like n per order, so the default
/// finite-difference step is scaled down with n to keep central-difference
/// truncation and rounding balanced (~eps^{1/3}/n).
fn scaled_fd_step(n: u32) -> f64 {
    6e-6 / (n as f64).max(1.0)
}

fn cross_radius(dim: Dim, x: &Point) -> f64 {
    match dim {
        Dim::Two => x[0].abs(),
        Dim::Three => x[0].hypot(x[1]),
    }
}

/// Conjugate exponent, with p = 1 mapped to +inf.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Validates 1 <= p <= N-1 and returns (p', q) with
/// 1/p + 1/q = 1 + 1/(N-1). For N = 2 this forces p = q = 1.
pub fn admissible_exponents(dim: Dim, p: f64) -> Result<(f64, f64)> {
    let nm1 = (dim.n() - 1) as f64;
    if !p.is_finite() || p < 1.0 || p > nm1 {
        return Err(Error::InvalidExponentPair(format!(
            "p = {p} outside [1, {nm1}] for dimension {}",
            dim.n()
        )));
    }
    let q = 1.0 / (1.0 + 1.0 / nm1 - 1.0 / p);
    Ok((conjugate_exponent(p), q))
}

/// The coupled pair: sigma_n = n^{(N-1)/p} (1-r)^n e_N is divergence free
/// (axial, x_N-independent), eta_n = grad(n^{(N-1)/p'} (1-r)^n x_N) is a
/// gradient. Their dot product n^{N-1} (1-r)^{2n} does not depend on p: the
/// cross-sectional part of eta_n is orthogonal to sigma_n and the prefactors
/// recombine through 1/p + 1/p' = 1.
pub struct CounterexamplePair {
    pub dim: Dim,
    pub p: f64,
    /// Companion exponent with 1/p + 1/q = 1 + 1/(N-1).
    pub q: f64,
    pub n: u32,
    pub sigma: VectorField,
    pub eta: VectorField,
    /// Scalar potential with eta = grad(potential), recorded so curl-freeness
    /// is checkable against finite differences of an independent evaluation.
    pub potential: ScalarField,
}

fn eta_value(dim: Dim, b: f64, n: u32, x: &Point) -> Point {
    let nf = n as f64;
    let ni = n as i32;
    let ax = dim.n() - 1;
    let r = cross_radius(dim, x);
    let mut out = [0.0; 3];
    out[ax] = b * (1.0 - r).powi(ni);
    if r > AXIS_EPS {
        let da = -nf * (1.0 - r).powi(ni - 1);
        for j in 0..ax {
            out[j] = b * da * x[ax] * x[j] / r;
        }
    }
    out
}

fn eta_hessian(dim: Dim, b: f64, n: u32, x: &Point) -> [[f64; 3]; 3] {
    let nf = n as f64;
    let ni = n as i32;
    let ax = dim.n() - 1;
    let r = cross_radius(dim, x);
    let mut h = [[0.0; 3]; 3];
    if r <= AXIS_EPS {
        return h;
    }
    let g1 = -nf * (1.0 - r).powi(ni - 1);
    let g2 = nf * (nf - 1.0) * (1.0 - r).powi(ni - 2);
    for j in 0..ax {
        for k in 0..ax {
            let delta = if j == k { 1.0 } else { 0.0 };
            h[j][k] =
                b * x[ax] * (g2 * x[j] * x[k] / (r * r) + g1 * (delta / r - x[j] * x[k] / (r * r * r)));
        }
        h[j][ax] = b * g1 * x[j] / r;
        h[ax][j] = h[j][ax];
    }
    h
}

pub fn counterexample_fields(dim: Dim, p: f64, n: u32) -> Result<CounterexamplePair> {
    let (_, q) = admissible_exponents(dim, p)?;
    if n == 0 {
        return Err(Error::DegenerateFamily("sequence index must be >= 1".into()));
    }
    let nm1 = (dim.n() - 1) as f64;
    let nf = n as f64;
    let ni = n as i32;
    let ax = dim.n() - 1;
    let a_sig = nf.powf(nm1 / p);
    // 1/p' = 1 - 1/p, so the prefactor degenerates to 1 at p = 1.
    let b_eta = nf.powf(nm1 * (1.0 - 1.0 / p));
    let h_fd = scaled_fd_step(n);

    let sigma = VectorField::new(dim, move |x| {
        let mut out = [0.0; 3];
        out[ax] = a_sig * (1.0 - cross_radius(dim, x)).powi(ni);
        out
    })
    .with_jacobian(move |x| {
        let r = cross_radius(dim, x);
        let mut jac = [[0.0; 3]; 3];
        if r > AXIS_EPS {
            let d = -a_sig * nf * (1.0 - r).powi(ni - 1);
            for j in 0..ax {
                jac[ax][j] = d * x[j] / r;
            }
        }
        jac
    })
    .on_domain(Domain::Cylinder)
    .with_fd_step(h_fd);

    let eta = VectorField::new(dim, move |x| eta_value(dim, b_eta, n, x))
        .with_jacobian(move |x| eta_hessian(dim, b_eta, n, x))
        .on_domain(Domain::Cylinder)
        .with_fd_step(h_fd);

    let potential = ScalarField::new(dim, move |x| {
        b_eta * (1.0 - cross_radius(dim, x)).powi(ni) * x[ax]
    })
    .with_grad(move |x| eta_value(dim, b_eta, n, x))
    .on_domain(Domain::Cylinder)
    .with_fd_step(h_fd);

    Ok(CounterexamplePair { dim, p, q, n, sigma, eta, potential })
}

/// The same potential as `counterexample_fields`, declared on the unit ball
/// instead of the cylinder: the closed form extends unchanged, and sphere
/// profiles around the origin then stay inside the declared domain.
pub fn potential_on_ball(dim: Dim, p: f64, n: u32) -> Result<ScalarField> {
    admissible_exponents(dim, p)?;
    if n == 0 {
        return Err(Error::DegenerateFamily("sequence index must be >= 1".into()));
    }
    let nm1 = (dim.n() - 1) as f64;
    let ni = n as i32;
    let ax = dim.n() - 1;
    let b_eta = (n as f64).powf(nm1 * (1.0 - 1.0 / p));
    Ok(ScalarField::new(dim, move |x| {
        b_eta * (1.0 - cross_radius(dim, x)).powi(ni) * x[ax]
    })
    .with_grad(move |x| eta_value(dim, b_eta, n, x))
    .on_domain(Domain::Ball { center: [0.0; 3], radius: 1.0 })
    .with_fd_step(scaled_fd_step(n)))
}

/// Closed form of sigma_n . eta_n = n^{N-1} (1-r)^{2n}, valid for every
/// admissible p.
pub fn pointwise_product(dim: Dim, n: u32) -> ScalarField {
    let ni = n as i32;
    let lead = (n as f64).powi(dim.n() as i32 - 1);
    ScalarField::new(dim, move |x| {
        lead * (1.0 - cross_radius(dim, x)).powi(2 * ni)
    })
    .on_domain(Domain::Cylinder)
}

/// Residuals of the differential structure over a sample cloud.
#[derive(Debug, Clone)]
pub struct StructureReport {
    /// max |div sigma_n| by central differences (exactly 0 in exact
    /// arithmetic: the only nonzero component is axial and x_N-independent).
    pub max_div_sigma: f64,
    /// max over j < k of |d_j eta_k - d_k eta_j| by central differences.
    pub max_curl_eta: f64,
    /// max |eta - grad(potential)| with the gradient by central differences
    /// of an independent potential evaluation.
    pub max_gradient_mismatch: f64,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify_structure(pair: &CounterexamplePair, points: &[Point], tol: f64) -> StructureReport {
    let h = pair.eta.fd_step();
    let mut max_div: f64 = 0.0;
    let mut max_curl: f64 = 0.0;
    let mut max_mismatch: f64 = 0.0;
    for x in points {
        max_div = max_div.max(pair.sigma.div_residual_fd(x));
        max_curl = max_curl.max(pair.eta.curl_residual_fd(x));
        let eta = pair.eta.eval(x);
        for (j, eta_j) in eta.iter().enumerate().take(pair.dim.n()) {
            let dj = central_diff(|p| pair.potential.eval(p), x, j, h);
            max_mismatch = max_mismatch.max((dj - eta_j).abs());
        }
    }
    StructureReport {
        max_div_sigma: max_div,
        max_curl_eta: max_curl,
        max_gradient_mismatch: max_mismatch,
        samples: points.len(),
        tol,
        pass: max_div <= tol && max_curl <= tol && max_mismatch <= tol,
    }
}

/// The moment family n^{k+1} ∫_0^1 r^k (1-r)^{n a} dr, evaluated in closed
/// form (never by quadrature): repeated integration by parts gives
/// k! ∏_{j=1}^{k+1} n/(n a + j), which converges to k!/a^{k+1}.
#[derive(Debug, Clone, Copy)]
pub struct BetaAsymptotic {
    pub k: u32,
    pub alpha: f64,
}

impl BetaAsymptotic {
    pub fn new(k: u32, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidExponent(alpha, "beta moment needs alpha > 0"));
        }
        Ok(BetaAsymptotic { k, alpha })
    }

    /// Exact value at index n.
    pub fn value(&self, n: u32) -> f64 {
        let nf = n as f64;
        let mut v = factorial(self.k);
        for j in 1..=(self.k + 1) {
            v *= nf / (nf * self.alpha + j as f64);
        }
        v
    }

    /// Limit k!/alpha^{k+1}.
    pub fn limit(&self) -> f64 {
        factorial(self.k) / self.alpha.powi(self.k as i32 + 1)
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// The map u_n(x) = (1-r)^n (n x', x_N): bounded in W^{1,N-1}, weak limit 0,
/// while det(Du_n) concentrates on the axis. The Jacobian is analytic:
/// the in-plane block is -n(1-r)^{n-1} [n x' (x')^T / r - (1-r) I], the
/// axial row is (1-r)^{n-1} [-n x_N (x')^T / r, (1-r)].
pub fn jacobian_example_fields(dim: Dim, n: u32) -> Result<VectorField> {
    if n == 0 {
        return Err(Error::DegenerateFamily("sequence index must be >= 1".into()));
    }
    let nf = n as f64;
    let ni = n as i32;
    let ax = dim.n() - 1;
    Ok(VectorField::new(dim, move |x| {
        let g = (1.0 - cross_radius(dim, x)).powi(ni);
        let mut out = [0.0; 3];
        for j in 0..ax {
            out[j] = nf * g * x[j];
        }
        out[ax] = g * x[ax];
        out
    })
    .with_jacobian(move |x| {
        let r = cross_radius(dim, x);
        let gm1 = (1.0 - r).powi(ni - 1);
        let mut jac = [[0.0; 3]; 3];
        for i in 0..ax {
            for j in 0..ax {
                let delta = if i == j { 1.0 } else { 0.0 };
                let quad = if r > AXIS_EPS { x[i] * x[j] / r } else { 0.0 };
                jac[i][j] = -nf * gm1 * (nf * quad - (1.0 - r) * delta);
            }
        }
        if r > AXIS_EPS {
            for j in 0..ax {
                jac[ax][j] = -nf * gm1 * x[ax] * x[j] / r;
            }
        }
        jac[ax][ax] = gm1 * (1.0 - r);
        jac
    })
    .on_domain(Domain::Cylinder)
    .with_fd_step(scaled_fd_step(n)))
}

/// Closed form det(Du_n) = n^{N-1} (1-r)^{nN} - n^N r (1-r)^{nN-1} for the
/// map above, kept independent of the Jacobian code path so the two can be
/// compared.
pub fn jacobian_example_det(dim: Dim, n: u32) -> ScalarField {
    let nn = dim.n() as i32;
    let nf = n as f64;
    let ni = n as i32;
    ScalarField::new(dim, move |x| {
        let r = cross_radius(dim, x);
        nf.powi(nn - 1) * (1.0 - r).powi(ni * nn) - nf.powi(nn) * r * (1.0 - r).powi(ni * nn - 1)
    })
    .on_domain(Domain::Cylinder)
}

/// max over r of the in-plane amplitude n r (1-r)^n = (n/(n+1))^{n+1},
/// which tends to 1/e: the map family does not converge uniformly even
/// though it converges weakly to 0. (The full sup-norm of |u_n| is 1 for
/// every n since the map fixes the axis segment (0, x_N); the in-plane
/// block is the component whose amplitude has the nontrivial limit.)
pub fn in_plane_sup(n: u32) -> f64 {
    let nf = n as f64;
    (nf / (nf + 1.0)).powi(n as i32 + 1)
}

/// Numeric maximization of n r (1-r)^n over [0,1]: coarse scan plus
/// golden-section refinement, as an oracle for `in_plane_sup`.
pub fn in_plane_sup_scan(n: u32, coarse: usize) -> f64 {
    let nf = n as f64;
    let ni = n as i32;
    let f = |r: f64| nf * r * (1.0 - r).powi(ni);
    let coarse = coarse.max(8);
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=coarse {
        let v = f(i as f64 / coarse as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = (best_i.saturating_sub(1)) as f64 / coarse as f64;
    let mut hi = ((best_i + 1).min(coarse)) as f64 / coarse as f64;
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = f(a);
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    fa.max(fb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sampling::{cylinder_cloud, DEFAULT_SEED};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn exponent_relation_matches_the_three_regimes() {
        let (pc, q) = admissible_exponents(Dim::Three, 1.0).unwrap();
        assert!(pc.is_infinite());
        assert_abs_diff_eq!(q, 2.0, epsilon = 1e-15);
        let (pc, q) = admissible_exponents(Dim::Three, 1.5).unwrap();
        assert_abs_diff_eq!(pc, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q, 1.2, epsilon = 1e-15);
        let (_, q) = admissible_exponents(Dim::Two, 1.0).unwrap();
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-15);
        assert!(admissible_exponents(Dim::Three, 2.5).is_err());
        assert!(admissible_exponents(Dim::Two, 1.2).is_err());
        assert!(admissible_exponents(Dim::Three, 0.9).is_err());
    }

    #[test]
    fn sigma_matches_the_plane_closed_form() {
        // N = 2, p = 1, n = 5: sigma = 5 (1-|x_1|)^5 e_2.
        let pair = counterexample_fields(Dim::Two, 1.0, 5).unwrap();
        let v = pair.sigma.eval(&[0.3, 0.4, 0.0]);
        assert_abs_diff_eq!(v[0], 0.0);
        assert_abs_diff_eq!(v[1], 5.0 * 0.7f64.powi(5), epsilon = 1e-15);
    }

    #[test]
    fn dot_product_is_p_independent() {
        let points = cylinder_cloud(Dim::Three, 64, 0.05, DEFAULT_SEED);
        for &n in &[3u32, 17, 64] {
            let product = pointwise_product(Dim::Three, n);
            for p in [1.0, 1.25, 1.5, 2.0] {
                let pair = counterexample_fields(Dim::Three, p, n).unwrap();
                for x in &points {
                    let s = pair.sigma.eval(x);
                    let e = pair.eta.eval(x);
                    let dot: f64 = (0..3).map(|i| s[i] * e[i]).sum();
                    let want = product.eval(x);
                    let scale = want.abs().max(1e-30);
                    assert!(
                        (dot - want).abs() <= 1e-10 * scale,
                        "p={p} n={n}: {dot} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn eta_is_the_gradient_of_its_potential() {
        let points = cylinder_cloud(Dim::Three, 200, 0.05, DEFAULT_SEED);
        for (p, n) in [(1.0, 8u32), (1.5, 64), (1.0, 256)] {
            let pair = counterexample_fields(Dim::Three, p, n).unwrap();
            let rep = verify_structure(&pair, &points, 1e-6);
            assert!(
                rep.pass,
                "p={p} n={n}: div {:.2e} curl {:.2e} grad {:.2e}",
                rep.max_div_sigma, rep.max_curl_eta, rep.max_gradient_mismatch
            );
            // Divergence cancels exactly, not merely to FD accuracy.
            assert_eq!(rep.max_div_sigma, 0.0);
        }
    }

    #[test]
    fn perturbed_sigma_is_caught_by_the_divergence_residual() {
        let pair = counterexample_fields(Dim::Three, 1.0, 8).unwrap();
        let bad = VectorField::new(Dim::Three, move |x| {
            let mut v = pair.sigma.eval(x);
            v[0] += x[0];
            v
        })
        .on_domain(Domain::Cylinder);
        let res = bad.div_residual_fd(&[0.3, 0.2, 0.5]);
        assert!((res - 1.0).abs() < 1e-6, "negative control residual {res}");
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let points = cylinder_cloud(Dim::Three, 100, 0.08, DEFAULT_SEED ^ 1);
        let pair = counterexample_fields(Dim::Three, 1.5, 16).unwrap();
        let map = jacobian_example_fields(Dim::Three, 16).unwrap();
        for x in &points {
            for (a, b) in [
                (pair.sigma.jacobian_at(x), pair.sigma.jacobian_fd(x)),
                (pair.eta.jacobian_at(x), pair.eta.jacobian_fd(x)),
                (map.jacobian_at(x), map.jacobian_fd(x)),
            ] {
                for i in 0..3 {
                    for j in 0..3 {
                        assert!(
                            (a[i][j] - b[i][j]).abs() < 1e-6,
                            "entry ({i},{j}): {} vs {}",
                            a[i][j],
                            b[i][j]
                        );
                    }
                }
            }
        }
    }

    fn det3(m: &[[f64; 3]; 3]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn closed_form_determinant_matches_the_jacobian() {
        let points = cylinder_cloud(Dim::Three, 150, 0.05, DEFAULT_SEED ^ 2);
        for &n in &[4u32, 16, 64] {
            let map = jacobian_example_fields(Dim::Three, n).unwrap();
            let det = jacobian_example_det(Dim::Three, n);
            for x in &points {
                let d1 = det3(&map.jacobian_at(x));
                let d2 = det.eval(x);
                let scale = d2.abs().max(1e-12);
                assert!((d1 - d2).abs() <= 1e-8 * scale, "n={n}: {d1} vs {d2}");
            }
        }
        // Plane case: det = first-row expansion of the 2x2 block.
        let map = jacobian_example_fields(Dim::Two, 9).unwrap();
        let det = jacobian_example_det(Dim::Two, 9);
        for x in [[0.3, 0.4, 0.0], [-0.7, 0.9, 0.0], [0.05, 0.5, 0.0]] {
            let j = map.jacobian_at(&x);
            let d1 = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            assert_abs_diff_eq!(d1, det.eval(&x), epsilon = 1e-10);
        }
    }

    #[test]
    fn map_fixes_the_axis() {
        let map = jacobian_example_fields(Dim::Three, 12).unwrap();
        let v = map.eval(&[0.0, 0.0, 0.62]);
        assert_abs_diff_eq!(v[0], 0.0);
        assert_abs_diff_eq!(v[1], 0.0);
        assert_abs_diff_eq!(v[2], 0.62, epsilon = 1e-15);
    }

    #[test]
    fn beta_values_and_limits() {
        let b = BetaAsymptotic::new(0, 1.0).unwrap();
        assert_abs_diff_eq!(b.value(9), 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(b.limit(), 1.0);
        assert_abs_diff_eq!(BetaAsymptotic::new(1, 2.0).unwrap().limit(), 0.25);
        assert_abs_diff_eq!(BetaAsymptotic::new(2, 1.0).unwrap().limit(), 2.0);
        assert!(BetaAsymptotic::new(1, 0.0).is_err());
    }

    #[test]
    fn beta_error_decays_like_one_over_n() {
        for (k, alpha) in [(0u32, 1.0), (1, 2.0), (2, 1.0)] {
            let b = BetaAsymptotic::new(k, alpha).unwrap();
            let limit = b.limit();
            let mut n = 16u32;
            let mut prev = f64::NEG_INFINITY;
            while n <= 4096 {
                let v = b.value(n);
                // Values increase toward the limit from below.
                assert!(v > prev && v < limit, "k={k} a={alpha} n={n}");
                // n * |value - limit| stays bounded by the explicit constant
                // limit * (k+1)(k+2)/(2 alpha) with margin for the O(1/n^2) tail.
                let c = limit * ((k + 1) * (k + 2)) as f64 / (2.0 * alpha);
                assert!(
                    (n as f64) * (limit - v) <= 1.05 * c,
                    "k={k} a={alpha} n={n}: {} vs {c}",
                    (n as f64) * (limit - v)
                );
                prev = v;
                n *= 2;
            }
        }
    }

    #[test]
    fn in_plane_amplitude_tends_to_one_over_e() {
        for &n in &[5u32, 60, 1000] {
            let scan = in_plane_sup_scan(n, 64);
            assert!(
                (scan - in_plane_sup(n)).abs() <= 1e-12,
                "n={n}: {scan} vs {}",
                in_plane_sup(n)
            );
        }
        assert!((in_plane_sup(10_000) - (-1.0f64).exp()).abs() < 1e-3);
        // The full value norm stays below 1 and approaches it near the axis
        // top: the 1/e limit concerns the in-plane block only.
        let map = jacobian_example_fields(Dim::Three, 40).unwrap();
        let points = cylinder_cloud(Dim::Three, 400, 0.01, DEFAULT_SEED ^ 3);
        for x in &points {
            let v = map.eval(x);
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!(norm <= 1.0 + 1e-12, "norm {norm} at {x:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn product_identity_for_random_parameters(
            n in 1u32..200,
            p in 1.0f64..2.0,
            rho in 0.05f64..0.9,
            angle in 0.0f64..std::f64::consts::TAU,
            z in 0.05f64..0.95,
        ) {
            let pair = counterexample_fields(Dim::Three, p, n).unwrap();
            let x = [rho * angle.cos(), rho * angle.sin(), z];
            let s = pair.sigma.eval(&x);
            let e = pair.eta.eval(&x);
            let dot: f64 = (0..3).map(|i| s[i] * e[i]).sum();
            let want = pointwise_product(Dim::Three, n).eval(&x);
            let scale = want.abs().max(1e-280);
            prop_assert!((dot - want).abs() <= 1e-10 * scale);
        }

        #[test]
        fn beta_value_monotone_in_n(k in 0u32..4, alpha in 0.2f64..4.0, n in 1u32..2000) {
            let b = BetaAsymptotic::new(k, alpha).unwrap();
            prop_assert!(b.value(n) < b.value(2 * n));
            prop_assert!(b.value(2 * n) < b.limit());
        }
    }
}
