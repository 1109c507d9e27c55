//! Weak-limit estimation: pair a scalar sequence against cylinder test
//! functions, tabulate over the index ladder, extrapolate the limit with a
//! power-law fit, and reduce a family of limits to the coefficient of a
//! line-concentrated measure (c * delta_{x'=0} tensor dx_N).
//!
//! Reference masses for the explicit sequences are kept in one place here.
//! In the plane the cross-section integral runs over both half-segments,
//! which doubles the one-sided constant; `ConcentrationMass` carries both
//! values so reports can show the pair.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{gauss_legendre, norm_n, offset, CylinderRule, Dim, Point, SphereQuad, VectorField};

/// Default sequence-index ladder used by experiments and tests.
pub const DEFAULT_LADDER: [u32; 7] = [8, 16, 32, 64, 128, 256, 512];

/// Separable test function psi(x) = chi(|x'|) g(x_N) on the unit cylinder.
/// chi is the cross-sectional profile, g the axial one; the pairing of
/// c * delta_{x'=0} tensor dx_N against psi is c * chi(0) * int_0^1 g.
#[derive(Clone)]
pub struct CylinderTestFunction {
    name: &'static str,
    chi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CylinderTestFunction {
    pub fn new(
        name: &'static str,
        chi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CylinderTestFunction { name, chi: Arc::new(chi), g: Arc::new(g) }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn eval(&self, dim: Dim, x: &Point) -> f64 {
        (self.chi)(norm_n(x, dim.n() - 1)) * (self.g)(x[dim.n() - 1])
    }

    pub fn chi_at_zero(&self) -> f64 {
        (self.chi)(0.0)
    }

    /// int_0^1 g, by 64-point Gauss quadrature.
    pub fn axial_integral(&self) -> f64 {
        let (nodes, weights) = gauss_legendre(64);
        nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| 0.5 * w * (self.g)(0.5 * (t + 1.0)))
            .sum()
    }

    /// chi(0) * int_0^1 g: the pairing of the unit line measure against psi.
    pub fn delta_mass(&self) -> f64 {
        self.chi_at_zero() * self.axial_integral()
    }
}

/// Three test functions with distinct profiles and distinct delta masses,
/// all positive at the axis so each one sees a line-concentrated limit.
pub fn standard_test_family() -> Vec<CylinderTestFunction> {
    vec![
        CylinderTestFunction::new("quartic-bump", |r| (1.0 - r * r).powi(2), |_| 1.0),
        CylinderTestFunction::new(
            "cosine-axial",
            |r| (std::f64::consts::FRAC_PI_2 * r).cos().powi(2),
            |t| t,
        ),
        CylinderTestFunction::new("flat-top", |r| (1.0 - r.powi(4)).powi(3), |t| 1.0 + t * t),
    ]
}

/// ∫_cylinder f(x) psi(x) dx over the rule's nodes.
pub fn pair(f: impl Fn(&Point) -> f64, psi: &CylinderTestFunction, rule: &CylinderRule) -> f64 {
    let dim = rule.dim();
    rule.integrate(|x| f(x) * psi.eval(dim, x))
}

/// Values of one scalar quantity along an index ladder.
#[derive(Debug, Clone)]
pub struct PairingTable {
    entries: Vec<(u32, f64)>,
}

impl PairingTable {
    pub fn from_entries(entries: Vec<(u32, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyGrid("pairing table has no entries".into()));
        }
        for window in entries.windows(2) {
            if window[1].0 <= window[0].0 {
                return Err(Error::InconsistentGrid(format!(
                    "ladder indices must increase: {} then {}",
                    window[0].0, window[1].0
                )));
            }
        }
        if let Some((n, v)) = entries.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSamples(format!("non-finite value {v} at n = {n}")));
        }
        Ok(PairingTable { entries })
    }

    /// Evaluates `f` along the ladder.
    pub fn from_fn(ns: &[u32], mut f: impl FnMut(u32) -> Result<f64>) -> Result<Self> {
        let mut entries = Vec::with_capacity(ns.len());
        for &n in ns {
            entries.push((n, f(n)?));
        }
        PairingTable::from_entries(entries)
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, &(_, v)| m.max(v.abs()))
    }
}

/// Power-law extrapolation v_n ~ value + c n^{-rate}; `residual` is the RMS
/// misfit over the tail that was used.
#[derive(Debug, Clone, Copy)]
pub struct LimitEstimate {
    pub value: f64,
    pub rate: f64,
    pub residual: f64,
}

const RATE_LO: f64 = 0.05;
const RATE_HI: f64 = 6.0;

/// Least-squares (a, c) for fixed beta; returns (a, c, sse) or None when the
/// basis degenerates (n^{-beta} effectively constant over the tail).
fn fit_fixed_rate(tail: &[(u32, f64)], beta: f64) -> Option<(f64, f64, f64)> {
    let m = tail.len() as f64;
    let (mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0);
    for &(n, v) in tail {
        let z = (n as f64).powf(-beta);
        s1 += z;
        s2 += z * z;
        t0 += v;
        t1 += z * v;
    }
    let det = m * s2 - s1 * s1;
    if det <= 1e-30 * m * s2.max(1e-300) {
        return None;
    }
    let a = (s2 * t0 - s1 * t1) / det;
    let c = (m * t1 - s1 * t0) / det;
    let sse: f64 = tail
        .iter()
        .map(|&(n, v)| {
            let e = a + c * (n as f64).powf(-beta) - v;
            e * e
        })
        .sum();
    Some((a, c, sse))
}

/// Fits the tail (last half, at least four entries) of the table. A
/// constant tail short-circuits to rate 0. The decay rate is found by a
/// logarithmic grid scan over [0.05, 6] refined by golden section.
pub fn limit_extrapolate(table: &PairingTable) -> Result<LimitEstimate> {
    let entries = table.entries();
    let m = entries.len();
    if m < 4 {
        return Err(Error::InsufficientData { need: 4, got: m });
    }
    let tail_len = (m / 2).max(4);
    let tail = &entries[m - tail_len..];

    let hi = tail.iter().fold(f64::NEG_INFINITY, |a, &(_, v)| a.max(v));
    let lo = tail.iter().fold(f64::INFINITY, |a, &(_, v)| a.min(v));
    let scale = hi.abs().max(lo.abs()).max(1.0);
    if hi - lo <= 1e-13 * scale {
        let mean = tail.iter().map(|&(_, v)| v).sum::<f64>() / tail_len as f64;
        return Ok(LimitEstimate { value: mean, rate: 0.0, residual: hi - lo });
    }

    let grid = 96;
    let beta_at = |i: usize| RATE_LO * (RATE_HI / RATE_LO).powf(i as f64 / (grid - 1) as f64);
    let mut best = (f64::INFINITY, RATE_LO);
    for i in 0..grid {
        let beta = beta_at(i);
        if let Some((_, _, sse)) = fit_fixed_rate(tail, beta) {
            if sse < best.0 {
                best = (sse, beta);
            }
        }
    }
    let (mut lo_b, mut hi_b) = (best.1 / 1.35, best.1 * 1.35);
    lo_b = lo_b.max(RATE_LO);
    hi_b = hi_b.min(RATE_HI);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let sse_at = |b: f64| fit_fixed_rate(tail, b).map_or(f64::INFINITY, |(_, _, s)| s);
    let mut a = hi_b - phi * (hi_b - lo_b);
    let mut b = lo_b + phi * (hi_b - lo_b);
    let (mut fa, mut fb) = (sse_at(a), sse_at(b));
    for _ in 0..120 {
        if fa > fb {
            lo_b = a;
            a = b;
            fa = fb;
            b = lo_b + phi * (hi_b - lo_b);
            fb = sse_at(b);
        } else {
            hi_b = b;
            b = a;
            fb = fa;
            a = hi_b - phi * (hi_b - lo_b);
            fa = sse_at(a);
        }
        if hi_b - lo_b < 1e-10 {
            break;
        }
    }
    let beta = if fa < fb { a } else { b };
    let (value, _, sse) =
        fit_fixed_rate(tail, beta).ok_or_else(|| Error::DegenerateFamily("rate fit degenerated".into()))?;
    Ok(LimitEstimate { value, rate: beta, residual: (sse / tail_len as f64).sqrt() })
}

/// True when the ladder extrapolates to 0 relative to its own scale.
pub fn weak_null_check(table: &PairingTable, rel_tol: f64) -> Result<bool> {
    let est = limit_extrapolate(table)?;
    Ok(est.value.abs() <= rel_tol * table.max_abs().max(1e-300))
}

/// Coefficient of the line measure in two cross-section conventions: the
/// plane integrates both half-segments (`direct`), while the one-sided
/// constant treats the two-point unit sphere of the cross-section as having
/// measure 1 (`one_sided`). The two agree for N = 3.
#[derive(Debug, Clone, Copy)]
pub struct ConcentrationMass {
    pub direct: f64,
    pub one_sided: f64,
}

fn cross_sphere_measure(dim: Dim) -> (f64, f64) {
    match dim {
        // |S^1| = 2 pi.
        Dim::Three => (std::f64::consts::TAU, std::f64::consts::TAU),
        // Two points; one-sided convention counts them as measure 1.
        Dim::Two => (2.0, 1.0),
    }
}

impl ConcentrationMass {
    fn scaled(dim: Dim, factor: f64) -> Self {
        let (direct, one_sided) = cross_sphere_measure(dim);
        ConcentrationMass { direct: direct * factor, one_sided: one_sided * factor }
    }

    /// sigma_n . eta_n --> |S^{N-2}| (N-2)! / 2^{N-1} as a line measure.
    pub fn product(dim: Dim) -> Self {
        Self::scaled(dim, 1.0 / 2f64.powi(dim.n() as i32 - 1))
    }

    /// sigma_n at p = 1 --> |S^{N-2}| (N-2)! as a line measure.
    pub fn axial_p1(dim: Dim) -> Self {
        Self::scaled(dim, 1.0)
    }

    /// det(Du_n) --> |S^{N-2}| (N-2)! / N^N as a line measure.
    pub fn jacobian(dim: Dim) -> Self {
        Self::scaled(dim, 1.0 / (dim.n() as f64).powi(dim.n() as i32))
    }
}

/// Per-test-function coefficients limit / delta_mass, their mean, and the
/// relative spread; `detected` when the spread is below 5%.
#[derive(Debug, Clone)]
pub struct ConcentrationReport {
    pub coefficients: Vec<f64>,
    pub mean: f64,
    pub relative_spread: f64,
    pub detected: bool,
}

/// `items` pairs each test function's extrapolated limit with its delta
/// mass chi(0) * int g. A concentration on the axis line makes every ratio
/// equal to the measure's coefficient.
pub fn concentration_coefficient(items: &[(f64, f64)]) -> Result<ConcentrationReport> {
    if items.len() < 2 {
        return Err(Error::InsufficientData { need: 2, got: items.len() });
    }
    let mut coefficients = Vec::with_capacity(items.len());
    for &(limit, mass) in items {
        if mass.abs() < 1e-12 {
            return Err(Error::DegenerateFamily(
                "test function vanishes on the concentration line".into(),
            ));
        }
        coefficients.push(limit / mass);
    }
    let mean = coefficients.iter().sum::<f64>() / coefficients.len() as f64;
    if mean.abs() < 1e-300 {
        return Err(Error::DegenerateFamily("all coefficients vanish".into()));
    }
    let hi = coefficients.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = coefficients.iter().cloned().fold(f64::INFINITY, f64::min);
    let relative_spread = (hi - lo) / mean.abs();
    Ok(ConcentrationReport { coefficients, mean, relative_spread, detected: relative_spread < 0.05 })
}

/// Flux of `f` through concentric spheres: r^{N-1} ∫_{S^{N-1}} f(x0+ry).y ds(y).
/// Constant in r exactly when f is divergence free in the enclosed shell;
/// each sphere must stay inside the field's domain.
pub fn radial_flux_profile(
    f: &VectorField,
    x0: &Point,
    radii: &[f64],
    quad: &SphereQuad,
) -> Result<Vec<(f64, f64)>> {
    if f.dim() != quad.dim {
        return Err(Error::UnsupportedDimension(quad.dim.n()));
    }
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::DomainViolation(format!("flux radius {r} must be positive")));
        }
        if let Some(domain) = f.domain() {
            if !domain.contains_sphere(f.dim(), x0, r) {
                return Err(Error::DomainViolation(format!(
                    "flux sphere of radius {r} around {x0:?} leaves the domain"
                )));
            }
        }
        let n = f.dim().n();
        let shell = quad.integrate(|y| {
            let v = f.eval(&offset(x0, r, y));
            (0..n).map(|i| v[i] * y[i]).sum::<f64>()
        });
        out.push((r, r.powi(n as i32 - 1) * shell));
    }
    Ok(out)
}
