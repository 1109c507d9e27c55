//! Good-radius selection: tabulate a per-sphere gradient norm over an
//! annulus of radii, remove radii where it exceeds a threshold, and certify
//! the measure of what was removed with a Chebyshev bound computed from the
//! same panel data, so the inequality chain
//!
//!   lambda |removed| <= sum_{removed} T_i w_i
//!                    <= (1/r_lo^{N-1}) sum_i T_i mid_i^{N-1} w_i
//!
//! is exact at grid resolution. On the kept radii the sphere restrictions
//! land in a trace space selected by the companion exponent; the module also
//! provides the cap-maximal profile that drives the exceptional-set bounds
//! in the integrable-exponent regime.

use crate::error::{Error, Result};
use crate::geometry::{offset, Dim, Field, Point, SphereQuad};
use crate::intervals::IntervalSet;
use crate::lorentz::{lorentz_or_l1_norm, WeightedSamples};

/// Which per-sphere functional the profile tabulates, applied to the pair
/// (u_n, u): `Power(q)` integrates |Du_n|^q + |Du|^q over the unit-sphere
/// parameterization, `Lorentz` takes the L^{N-1,1} norm of |Du_n| + |Du| on
/// the sphere of radius r with its true surface measure r^{N-1} ds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereNorm {
    Power(f64),
    Lorentz,
}

/// Midpoint tabulation of a sphere functional over uniform radial panels.
#[derive(Debug, Clone)]
pub struct SphereProfile {
    dim: Dim,
    r_lo: f64,
    r_hi: f64,
    mids: Vec<f64>,
    widths: Vec<f64>,
    values: Vec<f64>,
}

impl SphereProfile {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn r_lo(&self) -> f64 {
        self.r_lo
    }

    pub fn r_hi(&self) -> f64 {
        self.r_hi
    }

    pub fn mids(&self) -> &[f64] {
        &self.mids
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Midpoint approximation of ∫ T(r) dr over the annulus of radii.
    pub fn dr_integral(&self) -> f64 {
        self.values.iter().zip(&self.widths).map(|(t, w)| t * w).sum()
    }

    /// Midpoint approximation of ∫ T(r) r^{N-1} dr: for the `Power` norm
    /// this is the volume integral of the gradient powers over the annulus.
    pub fn weighted_integral(&self) -> f64 {
        let e = self.dim.n() as i32 - 1;
        self.mids
            .iter()
            .zip(&self.widths)
            .zip(&self.values)
            .map(|((m, w), t)| t * m.powi(e) * w)
            .sum()
    }

    fn panel(&self, i: usize) -> (f64, f64) {
        let lo = self.r_lo + self.widths[..i].iter().sum::<f64>();
        (lo, lo + self.widths[i])
    }
}

fn check_radius_window(r_lo: f64, r_hi: f64, panels: usize) -> Result<()> {
    if panels == 0 {
        return Err(Error::EmptyGrid("selection profile needs at least one panel".into()));
    }
    if !r_lo.is_finite() || !r_hi.is_finite() || r_lo <= 0.0 || r_hi <= r_lo {
        return Err(Error::DomainViolation(format!(
            "radius window [{r_lo}, {r_hi}] must satisfy 0 < r_lo < r_hi < inf"
        )));
    }
    Ok(())
}

/// Tabulates the chosen sphere functional of (u_n, u) at the midpoints of
/// `panels` uniform radial panels spanning [r_lo, r_hi] around x0. Fields
/// with a declared domain must contain every midpoint sphere.
#[allow(clippy::too_many_arguments)]
pub fn gradient_sphere_profile(
    u_n: &dyn Field,
    u: &dyn Field,
    x0: &Point,
    r_lo: f64,
    r_hi: f64,
    panels: usize,
    norm: SphereNorm,
    quad: &SphereQuad,
) -> Result<SphereProfile> {
    check_radius_window(r_lo, r_hi, panels)?;
    if u_n.dim() != u.dim() || u_n.dim() != quad.dim {
        return Err(Error::UnsupportedDimension(quad.dim.n()));
    }
    if let SphereNorm::Power(q) = norm {
        if !q.is_finite() || q < 1.0 {
            return Err(Error::InvalidExponent(q, "sphere profile power must be in [1, inf)"));
        }
    }
    let dim = u_n.dim();
    let width = (r_hi - r_lo) / panels as f64;
    let mut mids = Vec::with_capacity(panels);
    let mut widths = Vec::with_capacity(panels);
    let mut values = Vec::with_capacity(panels);
    for i in 0..panels {
        let r = r_lo + (i as f64 + 0.5) * width;
        for f in [u_n, u] {
            if let Some(domain) = f.domain() {
                if !domain.contains_sphere(dim, x0, r) {
                    return Err(Error::DomainViolation(format!(
                        "profile sphere of radius {r} around {x0:?} leaves the field's domain"
                    )));
                }
            }
        }
        let t = match norm {
            SphereNorm::Power(q) => quad.integrate(|y| {
                let x = offset(x0, r, y);
                u_n.jacobian_norm(&x).powf(q) + u.jacobian_norm(&x).powf(q)
            }),
            SphereNorm::Lorentz => {
                let vals: Vec<f64> = quad
                    .nodes
                    .iter()
                    .map(|y| {
                        let x = offset(x0, r, y);
                        u_n.jacobian_norm(&x) + u.jacobian_norm(&x)
                    })
                    .collect();
                let scale = r.powi(dim.n() as i32 - 1);
                let weights: Vec<f64> = quad.weights.iter().map(|w| w * scale).collect();
                lorentz_or_l1_norm(&WeightedSamples::new(vals, weights)?, (dim.n() - 1) as f64)?
            }
        };
        mids.push(r);
        widths.push(width);
        values.push(t);
    }
    Ok(SphereProfile { dim, r_lo, r_hi, mids, widths, values })
}

/// Outcome of thresholding a profile at `lambda`. The bounds majorize
/// `removed_measure` by construction; `bound_annulus` is the one stated for
/// volume integrals (it equals weighted_integral / (lambda r_lo^{N-1})).
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub lambda: f64,
    pub kept: IntervalSet,
    pub removed: IntervalSet,
    pub removed_measure: f64,
    pub bound_dr: f64,
    pub bound_annulus: f64,
}

/// Removes every panel whose profile value exceeds `lambda` and keeps the
/// rest, with Chebyshev majorants computed from the same panel data.
pub fn select_good_radii(profile: &SphereProfile, lambda: f64) -> Result<SelectionResult> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidExponent(lambda, "selection threshold must be positive"));
    }
    let mut kept = IntervalSet::empty();
    let mut removed = IntervalSet::empty();
    let mut removed_measure = 0.0;
    let mut removed_mass = 0.0;
    for (i, (&t, &w)) in profile.values.iter().zip(&profile.widths).enumerate() {
        let (lo, hi) = profile.panel(i);
        if t > lambda {
            removed.push(lo, hi);
            removed_measure += w;
            removed_mass += t * w;
        } else {
            kept.push(lo, hi);
        }
    }
    // lambda |removed| <= sum_removed T w <= sum_all T w, panel by panel.
    debug_assert!(lambda * removed_measure <= removed_mass * (1.0 + 1e-12) + 1e-300);
    let e = profile.dim.n() as i32 - 1;
    Ok(SelectionResult {
        lambda,
        kept,
        removed,
        removed_measure,
        bound_dr: profile.dr_integral() / lambda,
        bound_annulus: profile.weighted_integral() / (lambda * profile.r_lo.powi(e)),
    })
}

impl SphereProfile {
    /// Midpoints of the panels inside `set` (e.g. the kept radii).
    pub fn midpoints_in(&self, set: &IntervalSet) -> Vec<f64> {
        self.mids.iter().copied().filter(|&r| set.contains(r)).collect()
    }
}

/// Trace norm on the sphere of radius r for the difference u_n - u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceNorm {
    /// L^s(∂B_r) with the surface measure r^{N-1} ds.
    Ls(f64),
    /// sup over the quadrature nodes.
    C0,
    /// W^{1,N-1}(∂B_r): values plus tangential gradients, power N-1.
    SobolevSphere,
}

/// Embedding gate for the trace space: restrictions of W^{1,q} functions to
/// good spheres are compact into L^s only for s below the trace Sobolev
/// exponent (1/q - 1/(N-1))^{-1} when q < N-1, into every finite L^s at
/// q = N-1, and into C^0 only when q > N-1.
pub fn validate_trace_norm(dim: Dim, q: f64, norm: TraceNorm) -> Result<()> {
    let nm1 = (dim.n() - 1) as f64;
    if !q.is_finite() || q < 1.0 {
        return Err(Error::ExponentOutOfRange(format!("gradient exponent q = {q} must be >= 1")));
    }
    match norm {
        TraceNorm::Ls(s) => {
            if !s.is_finite() || s < 1.0 {
                return Err(Error::ExponentOutOfRange(format!("trace exponent s = {s} must be >= 1")));
            }
            if q < nm1 {
                // Tiny relative slack keeps the strict inequality honest at
                // representable boundary values like s = s_star.
                let s_star = 1.0 / (1.0 / q - 1.0 / nm1);
                if s >= s_star * (1.0 - 1e-12) {
                    return Err(Error::ExponentOutOfRange(format!(
                        "s = {s} is not below the trace exponent {s_star} for q = {q} < {nm1}"
                    )));
                }
            }
            Ok(())
        }
        TraceNorm::C0 => {
            if q <= nm1 {
                return Err(Error::ExponentOutOfRange(format!(
                    "sup-norm traces need q > {nm1}, got q = {q}"
                )));
            }
            Ok(())
        }
        TraceNorm::SobolevSphere => {
            if q < nm1 {
                return Err(Error::ExponentOutOfRange(format!(
                    "sphere Sobolev traces need q >= {nm1}, got q = {q}"
                )));
            }
            Ok(())
        }
    }
}

fn value_diff_sq(u_n: &dyn Field, u: &dyn Field, x: &Point, comps: usize) -> f64 {
    let a = u_n.value(x);
    let b = u.value(x);
    (0..comps).map(|c| (a[c] - b[c]) * (a[c] - b[c])).sum()
}

/// Squared Frobenius norm of the tangential part of D(u_n - u) on the
/// sphere through x = x0 + r y: rows are projected by (I - y y^T) and scaled
/// by r, matching the differential of y -> u(x0 + r y).
fn tangential_diff_sq(u_n: &dyn Field, u: &dyn Field, x: &Point, y: &Point, r: f64, dim: Dim, comps: usize) -> f64 {
    let ja = u_n.jacobian(x);
    let jb = u.jacobian(x);
    let n = dim.n();
    let mut total = 0.0;
    for c in 0..comps {
        let mut row = [0.0; 3];
        for j in 0..n {
            row[j] = ja[c][j] - jb[c][j];
        }
        let radial: f64 = (0..n).map(|j| row[j] * y[j]).sum();
        for j in 0..n {
            let t = (row[j] - radial * y[j]) * r;
            total += t * t;
        }
    }
    total
}

/// sup over `radii` of the trace norm of u_n - u on ∂B_r(x0). The norm must
/// already have passed `validate_trace_norm` for the intended exponent; this
/// function only computes.
pub fn trace_convergence_sup(
    u_n: &dyn Field,
    u: &dyn Field,
    x0: &Point,
    radii: &[f64],
    norm: TraceNorm,
    quad: &SphereQuad,
) -> Result<f64> {
    if u_n.dim() != u.dim() || u_n.dim() != quad.dim {
        return Err(Error::UnsupportedDimension(quad.dim.n()));
    }
    if u_n.components() != u.components() {
        return Err(Error::InvalidSamples(format!(
            "field pair has {} vs {} components",
            u_n.components(),
            u.components()
        )));
    }
    if radii.is_empty() {
        return Err(Error::EmptyGrid("trace sup needs at least one radius".into()));
    }
    let dim = u_n.dim();
    let comps = u_n.components();
    let e = dim.n() as i32 - 1;
    let nm1 = (dim.n() - 1) as f64;
    let mut sup: f64 = 0.0;
    for &r in radii {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::DomainViolation(format!("trace radius {r} must be positive")));
        }
        let value = match norm {
            TraceNorm::Ls(s) => {
                let surf = r.powi(e);
                (surf * quad.integrate(|y| value_diff_sq(u_n, u, &offset(x0, r, y), comps).powf(s / 2.0)))
                    .powf(1.0 / s)
            }
            TraceNorm::C0 => quad
                .nodes
                .iter()
                .map(|y| value_diff_sq(u_n, u, &offset(x0, r, y), comps).sqrt())
                .fold(0.0f64, f64::max),
            TraceNorm::SobolevSphere => {
                let surf = r.powi(e);
                (surf * quad.integrate(|y| {
                    let x = offset(x0, r, y);
                    value_diff_sq(u_n, u, &x, comps).powf(nm1 / 2.0)
                        + tangential_diff_sq(u_n, u, &x, y, r, dim, comps).powf(nm1 / 2.0)
                }))
                .powf(1.0 / nm1)
            }
        };
        sup = sup.max(value);
    }
    Ok(sup)
}

/// Tabulates the cap-maximal function T(r) = sup_z ∫_{B(z,h) ∩ S} Λ(x0+ry) ds(y)
/// at panel midpoints, with the sup taken over caps centered at the
/// quadrature nodes. Exact for constant Λ up to cap discretization.
#[allow(clippy::too_many_arguments)]
pub fn cap_maximal_profile(
    lam: impl Fn(&Point) -> f64,
    dim: Dim,
    x0: &Point,
    r_lo: f64,
    r_hi: f64,
    panels: usize,
    cap_radius: f64,
    quad: &SphereQuad,
) -> Result<SphereProfile> {
    check_radius_window(r_lo, r_hi, panels)?;
    if dim != quad.dim {
        return Err(Error::UnsupportedDimension(quad.dim.n()));
    }
    if !(cap_radius > 0.0 && cap_radius <= 2.0) {
        return Err(Error::InvalidCapRadius(cap_radius));
    }
    let h2 = cap_radius * cap_radius;
    let m = quad.nodes.len();
    // Cap membership depends only on the node geometry, so build the index
    // lists once and reuse them for every radius.
    let membership: Vec<Vec<u32>> = quad
        .nodes
        .iter()
        .map(|z| {
            (0..m)
                .filter(|&j| {
                    let y = &quad.nodes[j];
                    let d2: f64 = (0..3).map(|k| (y[k] - z[k]) * (y[k] - z[k])).sum();
                    d2 <= h2
                })
                .map(|j| j as u32)
                .collect()
        })
        .collect();
    let width = (r_hi - r_lo) / panels as f64;
    let mut mids = Vec::with_capacity(panels);
    let mut widths = Vec::with_capacity(panels);
    let mut values = Vec::with_capacity(panels);
    for i in 0..panels {
        let r = r_lo + (i as f64 + 0.5) * width;
        let weighted: Vec<f64> = (0..m)
            .map(|j| quad.weights[j] * lam(&offset(x0, r, &quad.nodes[j])))
            .collect();
        let best = membership
            .iter()
            .map(|cap| cap.iter().map(|&j| weighted[j as usize]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        mids.push(r);
        widths.push(width);
        values.push(best);
    }
    Ok(SphereProfile { dim, r_lo, r_hi, mids, widths, values })
}

/// Radii where a profile exceeds `threshold`, with the same Chebyshev
/// majorants as `select_good_radii` (the removed side of the selection).
#[derive(Debug, Clone)]
pub struct ExceptionalSet {
    pub threshold: f64,
    pub set: IntervalSet,
    pub measure: f64,
    pub bound_dr: f64,
    pub bound_annulus: f64,
}

pub fn exceptional_set(profile: &SphereProfile, threshold: f64) -> Result<ExceptionalSet> {
    let sel = select_good_radii(profile, threshold)?;
    Ok(ExceptionalSet {
        threshold,
        set: sel.removed,
        measure: sel.removed_measure,
        bound_dr: sel.bound_dr,
        bound_annulus: sel.bound_annulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cap_area, sphere_quadrature, Domain, ScalarField};
    use crate::sequences::potential_on_ball;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn zero_field(dim: Dim) -> ScalarField {
        ScalarField::new(dim, |_| 0.0).with_grad(|_| [0.0; 3])
    }

    fn linear_field(dim: Dim, c: f64) -> ScalarField {
        ScalarField::new(dim, move |x| c * x[0]).with_grad(move |_| [c, 0.0, 0.0])
    }

    #[test]
    fn constant_gradient_profile_and_selection() {
        let quad = sphere_quadrature(Dim::Three, 24).unwrap();
        let u_n = linear_field(Dim::Three, 2.0);
        let u = zero_field(Dim::Three);
        let profile = gradient_sphere_profile(
            &u_n, &u, &[0.0; 3], 0.25, 0.75, 8, SphereNorm::Power(2.0), &quad,
        )
        .unwrap();
        // T(r) = |S^2| * 2^2 for every r.
        for &t in profile.values() {
            assert_abs_diff_eq!(t, 16.0 * PI, epsilon = 1e-10);
        }
        let keep_all = select_good_radii(&profile, 17.0 * PI).unwrap();
        assert_abs_diff_eq!(keep_all.kept.measure(), 0.5, epsilon = 1e-12);
        assert_eq!(keep_all.removed_measure, 0.0);
        let drop_all = select_good_radii(&profile, 15.0 * PI).unwrap();
        assert_abs_diff_eq!(drop_all.removed_measure, 0.5, epsilon = 1e-12);
        assert!(drop_all.kept.is_empty());
        // Chebyshev chain: |removed| <= bound_dr <= bound_annulus.
        assert!(drop_all.removed_measure <= drop_all.bound_dr + 1e-12);
        assert!(drop_all.bound_dr <= drop_all.bound_annulus + 1e-12);
    }

    #[test]
    fn profile_weighted_integral_matches_annulus_quadrature() {
        // sum_i T_i mid^{N-1} w_i midpoints the volume integral of
        // |Du_n|^q + |Du|^q over the annulus.
        let quad = sphere_quadrature(Dim::Three, 24).unwrap();
        let u_n = potential_on_ball(Dim::Three, 1.0, 8).unwrap();
        let u = zero_field(Dim::Three);
        let profile = gradient_sphere_profile(
            &u_n, &u, &[0.0; 3], 0.25, 0.75, 64, SphereNorm::Power(2.0), &quad,
        )
        .unwrap();
        let grid = crate::geometry::RadialGrid::uniform(0.25, 0.75, 64, 8).unwrap();
        let dens = ScalarField::new(Dim::Three, {
            let f = potential_on_ball(Dim::Three, 1.0, 8).unwrap();
            move |x: &Point| {
                let g = f.grad_at(x);
                g[0] * g[0] + g[1] * g[1] + g[2] * g[2]
            }
        });
        let exact =
            crate::geometry::annulus_integral(&dens, &[0.0; 3], 0.25, 0.75, &grid, &quad).unwrap();
        let got = profile.weighted_integral();
        assert!(
            (got - exact).abs() <= 0.01 * exact.abs(),
            "midpoint {got} vs gauss {exact}"
        );
    }

    #[test]
    fn counterexample_selection_chain_is_exact_at_grid_resolution() {
        let quad = sphere_quadrature(Dim::Three, 16).unwrap();
        let u = zero_field(Dim::Three);
        for &n in &[8u32, 64] {
            let u_n = potential_on_ball(Dim::Three, 1.0, n).unwrap();
            let profile = gradient_sphere_profile(
                &u_n, &u, &[0.0; 3], 0.25, 0.75, 48, SphereNorm::Power(2.0), &quad,
            )
            .unwrap();
            for lambda in [1.0, 10.0, 100.0] {
                let sel = select_good_radii(&profile, lambda).unwrap();
                let removed_mass: f64 = profile
                    .values()
                    .iter()
                    .zip(profile.widths())
                    .filter(|(&t, _)| t > lambda)
                    .map(|(&t, &w)| t * w)
                    .sum();
                assert!(lambda * sel.removed_measure <= removed_mass + 1e-12);
                assert!(removed_mass / lambda <= sel.bound_annulus + 1e-12);
                assert!(sel.removed_measure <= sel.bound_annulus + 1e-12);
                assert_abs_diff_eq!(
                    sel.kept.measure() + sel.removed_measure,
                    0.5,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn lorentz_profile_of_a_constant_gradient() {
        // |grad| = c constant: L^{2,1} norm on the sphere of radius r is
        // c * (4 pi r^2)^{1/2}.
        let quad = sphere_quadrature(Dim::Three, 24).unwrap();
        let u_n = linear_field(Dim::Three, 3.0);
        let u = zero_field(Dim::Three);
        let profile = gradient_sphere_profile(
            &u_n, &u, &[0.0; 3], 0.4, 0.6, 4, SphereNorm::Lorentz, &quad,
        )
        .unwrap();
        for (r, t) in profile.mids().iter().zip(profile.values()) {
            assert_abs_diff_eq!(*t, 3.0 * (4.0 * PI * r * r).sqrt(), epsilon = 1e-8);
        }
    }

    #[test]
    fn profile_rejects_bad_windows_and_domains() {
        let quad = sphere_quadrature(Dim::Three, 8).unwrap();
        let u = zero_field(Dim::Three);
        assert!(gradient_sphere_profile(
            &u, &u, &[0.0; 3], 0.0, 0.5, 8, SphereNorm::Power(2.0), &quad
        )
        .is_err());
        assert!(gradient_sphere_profile(
            &u, &u, &[0.0; 3], 0.5, 0.25, 8, SphereNorm::Power(2.0), &quad
        )
        .is_err());
        let bounded = ScalarField::new(Dim::Three, |_| 0.0)
            .on_domain(Domain::Ball { center: [0.0; 3], radius: 0.5 });
        assert!(matches!(
            gradient_sphere_profile(
                &bounded, &u, &[0.0; 3], 0.25, 0.75, 8, SphereNorm::Power(2.0), &quad
            ),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn trace_norm_validation_follows_the_embedding() {
        // q < N-1: s must stay below (1/q - 1/(N-1))^{-1} = 6 at q = 1.5.
        assert!(validate_trace_norm(Dim::Three, 1.5, TraceNorm::Ls(5.0)).is_ok());
        assert!(validate_trace_norm(Dim::Three, 1.5, TraceNorm::Ls(6.0)).is_err());
        // q = N-1: any finite s, no sup norm.
        assert!(validate_trace_norm(Dim::Three, 2.0, TraceNorm::Ls(40.0)).is_ok());
        assert!(validate_trace_norm(Dim::Three, 2.0, TraceNorm::C0).is_err());
        // q > N-1: sup norm allowed.
        assert!(validate_trace_norm(Dim::Three, 2.5, TraceNorm::C0).is_ok());
        assert!(validate_trace_norm(Dim::Three, 2.0, TraceNorm::SobolevSphere).is_ok());
        assert!(validate_trace_norm(Dim::Three, 1.5, TraceNorm::SobolevSphere).is_err());
        assert!(validate_trace_norm(Dim::Three, 0.5, TraceNorm::Ls(2.0)).is_err());
    }

    #[test]
    fn trace_sup_decreases_along_the_family() {
        let quad = sphere_quadrature(Dim::Three, 16).unwrap();
        let u = zero_field(Dim::Three);
        validate_trace_norm(Dim::Three, 2.0, TraceNorm::Ls(2.0)).unwrap();
        let mut prev = f64::INFINITY;
        for &n in &[8u32, 16, 32, 64] {
            let u_n = potential_on_ball(Dim::Three, 1.0, n).unwrap();
            let profile = gradient_sphere_profile(
                &u_n, &u, &[0.0; 3], 0.25, 0.75, 48, SphereNorm::Power(2.0), &quad,
            )
            .unwrap();
            let sel = select_good_radii(&profile, 10.0).unwrap();
            let radii = profile.midpoints_in(&sel.kept);
            assert!(!radii.is_empty(), "n={n}: everything removed at lambda=10");
            let sup =
                trace_convergence_sup(&u_n, &u, &[0.0; 3], &radii, TraceNorm::Ls(2.0), &quad)
                    .unwrap();
            assert!(sup < prev, "n={n}: {sup} !< {prev}");
            prev = sup;
        }
    }

    #[test]
    fn c0_trace_of_an_explicit_difference() {
        let quad = sphere_quadrature(Dim::Three, 24).unwrap();
        // Constant difference: node sampling is exact.
        let one = ScalarField::new(Dim::Three, |_| 1.0).with_grad(|_| [0.0; 3]);
        let u = zero_field(Dim::Three);
        let sup =
            trace_convergence_sup(&one, &u, &[0.0; 3], &[0.5], TraceNorm::C0, &quad).unwrap();
        assert_abs_diff_eq!(sup, 1.0);
        // Smooth difference: node sampling undershoots the true max 0.25 by
        // at most the node-spacing resolution.
        let u_n = ScalarField::new(Dim::Three, |x| x[0] * x[0]).with_grad(|x| [2.0 * x[0], 0.0, 0.0]);
        let sup =
            trace_convergence_sup(&u_n, &u, &[0.0; 3], &[0.5], TraceNorm::C0, &quad).unwrap();
        assert!(sup <= 0.25 && sup > 0.24, "node-sampled sup {sup}");
    }

    #[test]
    fn sobolev_sphere_norm_of_a_linear_function() {
        // u = x_1 on ∂B_r: |u|^2 integrates to 4 pi r^4 / 3; the tangential
        // gradient of a linear function has |P e_1|^2 = 1 - y_1^2, which
        // integrates to (8 pi / 3) r^2 on the unit sphere, scaled by r^2.
        let quad = sphere_quadrature(Dim::Three, 32).unwrap();
        let u_n = linear_field(Dim::Three, 1.0);
        let u = zero_field(Dim::Three);
        let r: f64 = 0.5;
        let got = trace_convergence_sup(
            &u_n, &u, &[0.0; 3], &[r], TraceNorm::SobolevSphere, &quad,
        )
        .unwrap();
        let want = (r.powi(2)
            * (4.0 * PI / 3.0 * r.powi(2) + 8.0 * PI / 3.0 * r.powi(2)))
        .sqrt();
        assert_abs_diff_eq!(got, want, epsilon = 1e-8);
    }

    #[test]
    fn cap_profile_of_constant_density_matches_cap_area() {
        for dim in [Dim::Two, Dim::Three] {
            let quad = sphere_quadrature(dim, 32).unwrap();
            for h in [0.3, 0.7, 1.2] {
                let profile = cap_maximal_profile(
                    |_| 2.5, dim, &[0.0; 3], 0.3, 0.7, 2, h, &quad,
                )
                .unwrap();
                let want = 2.5 * cap_area(dim, h).unwrap();
                let tol = 2.5 * 2.0 * quad.node_spacing();
                for &t in profile.values() {
                    assert!((t - want).abs() <= tol, "dim {dim:?} h {h}: {t} vs {want}");
                }
            }
        }
    }

    #[test]
    fn cap_profile_rejects_bad_radii_and_thresholds_correctly() {
        let quad = sphere_quadrature(Dim::Three, 12).unwrap();
        assert!(matches!(
            cap_maximal_profile(|_| 1.0, Dim::Three, &[0.0; 3], 0.3, 0.7, 4, 0.0, &quad),
            Err(Error::InvalidCapRadius(_))
        ));
        assert!(matches!(
            cap_maximal_profile(|_| 1.0, Dim::Three, &[0.0; 3], 0.3, 0.7, 4, 2.5, &quad),
            Err(Error::InvalidCapRadius(_))
        ));
        // Density concentrated near the axis: profile decreases with r as
        // the cap over the pole sees (1 - r|y'|)-type decay.
        let profile = cap_maximal_profile(
            |x: &Point| (1.0 - x[0].hypot(x[1])).powi(8),
            Dim::Three,
            &[0.0; 3],
            0.2,
            0.8,
            6,
            0.5,
            &quad,
        )
        .unwrap();
        let v = profile.values();
        for i in 1..v.len() {
            assert!(v[i] < v[i - 1], "cap mass should fall with radius: {v:?}");
        }
        let exc = exceptional_set(&profile, v[2]).unwrap();
        // Exactly the first two panels exceed the threshold T(mid_2).
        assert_abs_diff_eq!(exc.measure, 0.2, epsilon = 1e-12);
        assert!(exc.measure <= exc.bound_dr + 1e-12);
        assert!(exc.set.contains(profile.mids()[0]));
        assert!(!exc.set.contains(profile.mids()[3]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn selection_bounds_majorize_for_random_profiles(
            values in proptest::collection::vec(0.0f64..50.0, 4..40),
            lambda in 0.5f64..20.0,
        ) {
            let panels = values.len();
            let width = 0.5 / panels as f64;
            let profile = SphereProfile {
                dim: Dim::Three,
                r_lo: 0.25,
                r_hi: 0.75,
                mids: (0..panels).map(|i| 0.25 + (i as f64 + 0.5) * width).collect(),
                widths: vec![width; panels],
                values,
            };
            let sel = select_good_radii(&profile, lambda).unwrap();
            prop_assert!(sel.removed_measure <= sel.bound_dr * (1.0 + 1e-12) + 1e-15);
            prop_assert!(sel.bound_dr <= sel.bound_annulus * (1.0 + 1e-12) + 1e-15);
            let total = sel.kept.measure() + sel.removed_measure;
            prop_assert!((total - 0.5).abs() < 1e-10);
        }
    }
}
