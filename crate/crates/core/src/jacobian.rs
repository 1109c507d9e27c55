//! Distributional Jacobians: cofactor algebra, the divergence-form pairing
//! <Det Du, psi> = -∫ u^1 Σ_j cof(Du)_{1j} ∂_j psi dx, and its agreement or
//! disagreement with the pointwise pairing ∫ det(Du) psi dx. For C^1 maps
//! the two coincide (row expansion plus the Piola identity); the
//! concentrating map family and the point-singular map x/|x| witness the
//! failure modes below W^{1,N} regularity.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{offset, CylinderRule, Dim, Point, RadialGrid, SphereQuad, VectorField};
use crate::lorentz::{equiintegrability_modulus, ModulusMode, WeightedSamples};

/// Cofactor matrix: cof(A)_{ij} = (-1)^{i+j} times the (i,j) minor, so
/// A cof(A)^T = cof(A)^T A = det(A) I. Entries outside the leading N x N
/// block are zero.
pub fn cofactor(dim: Dim, a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    match dim {
        Dim::Two => {
            c[0][0] = a[1][1];
            c[0][1] = -a[1][0];
            c[1][0] = -a[0][1];
            c[1][1] = a[0][0];
        }
        Dim::Three => {
            c[0][0] = a[1][1] * a[2][2] - a[1][2] * a[2][1];
            c[0][1] = -(a[1][0] * a[2][2] - a[1][2] * a[2][0]);
            c[0][2] = a[1][0] * a[2][1] - a[1][1] * a[2][0];
            c[1][0] = -(a[0][1] * a[2][2] - a[0][2] * a[2][1]);
            c[1][1] = a[0][0] * a[2][2] - a[0][2] * a[2][0];
            c[1][2] = -(a[0][0] * a[2][1] - a[0][1] * a[2][0]);
            c[2][0] = a[0][1] * a[1][2] - a[0][2] * a[1][1];
            c[2][1] = -(a[0][0] * a[1][2] - a[0][2] * a[1][0]);
            c[2][2] = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        }
    }
    c
}

/// Determinant of the leading N x N block.
pub fn det(dim: Dim, a: &[[f64; 3]; 3]) -> f64 {
    match dim {
        Dim::Two => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        Dim::Three => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
    }
}

/// C^1 test function with an analytic gradient, for divergence-form
/// pairings. Instances used with the pairings below must vanish on the
/// boundary of the integration domain so the by-parts identity carries no
/// boundary term.
#[derive(Clone)]
pub struct C1TestFunction {
    name: &'static str,
    eval: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    grad: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
}

impl C1TestFunction {
    pub fn new(
        name: &'static str,
        eval: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        C1TestFunction { name, eval: Arc::new(eval), grad: Arc::new(grad) }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    pub fn grad(&self, x: &Point) -> Point {
        (self.grad)(x)
    }
}

fn cross_radius_sq(dim: Dim, x: &Point) -> f64 {
    match dim {
        Dim::Two => x[0] * x[0],
        Dim::Three => x[0] * x[0] + x[1] * x[1],
    }
}

/// Three bumps vanishing on the cylinder boundary (cross-section radius 1
/// and both axial ends), with hand-checked gradients; all are positive at
/// the axis midpoint.
pub fn compact_bumps(dim: Dim) -> Vec<C1TestFunction> {
    let ax = dim.n() - 1;
    let quartic = C1TestFunction::new(
        "quartic",
        move |x| {
            let rho2 = cross_radius_sq(dim, x);
            let t = x[ax];
            (1.0 - rho2).powi(2) * (t * (1.0 - t)).powi(2)
        },
        move |x| {
            let rho2 = cross_radius_sq(dim, x);
            let t = x[ax];
            let axial = (t * (1.0 - t)).powi(2);
            let mut g = [0.0; 3];
            for j in 0..ax {
                g[j] = -4.0 * x[j] * (1.0 - rho2) * axial;
            }
            g[ax] = (1.0 - rho2).powi(2) * 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
            g
        },
    );
    let cubic_sine = C1TestFunction::new(
        "cubic-sine",
        move |x| {
            let rho2 = cross_radius_sq(dim, x);
            let t = x[ax];
            (1.0 - rho2).powi(3) * (std::f64::consts::PI * t).sin().powi(2)
        },
        move |x| {
            let rho2 = cross_radius_sq(dim, x);
            let t = x[ax];
            let pi = std::f64::consts::PI;
            let mut g = [0.0; 3];
            for j in 0..ax {
                g[j] = -6.0 * x[j] * (1.0 - rho2).powi(2) * (pi * t).sin().powi(2);
            }
            g[ax] = (1.0 - rho2).powi(3) * pi * (2.0 * pi * t).sin();
            g
        },
    );
    let cosine = C1TestFunction::new(
        "cosine",
        move |x| {
            let rho2 = cross_radius_sq(dim, x);
            let t = x[ax];
            let pi = std::f64::consts::PI;
            (pi * rho2 / 2.0).cos().powi(2) * (t * (1.0 - t)).powi(3)
        },
        move |x| {
            let rho2 = cross_radius_sq(dim, x);
            let t = x[ax];
            let pi = std::f64::consts::PI;
            let axial = (t * (1.0 - t)).powi(3);
            let mut g = [0.0; 3];
            for j in 0..ax {
                g[j] = -pi * x[j] * (pi * rho2).sin() * axial;
            }
            g[ax] =
                (pi * rho2 / 2.0).cos().powi(2) * 3.0 * (t * (1.0 - t)).powi(2) * (1.0 - 2.0 * t);
            g
        },
    );
    vec![quartic, cubic_sine, cosine]
}

/// Radial bump (1 - |x-x0|^2/R^2)^2, compactly supported in B(x0, R).
pub fn radial_bump(dim: Dim, x0: Point, radius: f64) -> C1TestFunction {
    let n = dim.n();
    let r2 = radius * radius;
    C1TestFunction::new(
        "radial-bump",
        move |x| {
            let rho2: f64 = (0..n).map(|j| (x[j] - x0[j]) * (x[j] - x0[j])).sum();
            let s = 1.0 - rho2 / r2;
            if s > 0.0 { s * s } else { 0.0 }
        },
        move |x| {
            let rho2: f64 = (0..n).map(|j| (x[j] - x0[j]) * (x[j] - x0[j])).sum();
            let s = 1.0 - rho2 / r2;
            let mut g = [0.0; 3];
            if s > 0.0 {
                for j in 0..n {
                    g[j] = -4.0 * s * (x[j] - x0[j]) / r2;
                }
            }
            g
        },
    )
}

/// ∫ det(Du) psi dx over the cylinder.
pub fn pointwise_det_pairing(u: &VectorField, psi: &C1TestFunction, rule: &CylinderRule) -> f64 {
    let dim = rule.dim();
    rule.integrate(|x| det(dim, &u.jacobian_at(x)) * psi.eval(x))
}

/// -∫ u^1 Σ_j cof(Du)_{1j} ∂_j psi dx over the cylinder (first row of the
/// cofactor matrix against the test gradient, weighted by the first
/// component of the map).
pub fn distributional_det_pairing(
    u: &VectorField,
    psi: &C1TestFunction,
    rule: &CylinderRule,
) -> f64 {
    let dim = rule.dim();
    let n = dim.n();
    -rule.integrate(|x| {
        let c = cofactor(dim, &u.jacobian_at(x));
        let g = psi.grad(x);
        let u1 = u.eval(x)[0];
        u1 * (0..n).map(|j| c[0][j] * g[j]).sum::<f64>()
    })
}

/// ∫ over B(x0, grid.hi()) with a product radial x sphere rule.
fn ball_pair(
    grid: &RadialGrid,
    quad: &SphereQuad,
    x0: &Point,
    f: impl Fn(&Point) -> f64,
) -> f64 {
    let e = quad.dim.n() as i32 - 1;
    grid.integrate(|r| r.powi(e) * quad.integrate(|y| f(&offset(x0, r, y))))
}

/// Ball version of `pointwise_det_pairing`.
pub fn pointwise_det_pairing_ball(
    u: &VectorField,
    psi: &C1TestFunction,
    x0: &Point,
    grid: &RadialGrid,
    quad: &SphereQuad,
) -> f64 {
    let dim = quad.dim;
    ball_pair(grid, quad, x0, |x| det(dim, &u.jacobian_at(x)) * psi.eval(x))
}

/// Ball version of `distributional_det_pairing`.
pub fn distributional_det_pairing_ball(
    u: &VectorField,
    psi: &C1TestFunction,
    x0: &Point,
    grid: &RadialGrid,
    quad: &SphereQuad,
) -> f64 {
    let dim = quad.dim;
    let n = dim.n();
    -ball_pair(grid, quad, x0, |x| {
        let c = cofactor(dim, &u.jacobian_at(x));
        let g = psi.grad(x);
        let u1 = u.eval(x)[0];
        u1 * (0..n).map(|j| c[0][j] * g[j]).sum::<f64>()
    })
}

/// Both pairings and their gap, normalised by the L^1 mass of the pointwise
/// integrand so that pairings vanishing by symmetry still compare cleanly.
#[derive(Debug, Clone, Copy)]
pub struct DetConsistency {
    pub pointwise: f64,
    pub distributional: f64,
    pub relative_gap: f64,
}

pub fn det_consistency(u: &VectorField, psi: &C1TestFunction, rule: &CylinderRule) -> DetConsistency {
    let dim = rule.dim();
    let pointwise = pointwise_det_pairing(u, psi, rule);
    let distributional = distributional_det_pairing(u, psi, rule);
    let mass = rule.integrate(|x| (det(dim, &u.jacobian_at(x)) * psi.eval(x)).abs());
    let scale = pointwise.abs().max(distributional.abs()).max(mass).max(1e-12);
    DetConsistency {
        pointwise,
        distributional,
        relative_gap: (pointwise - distributional).abs() / scale,
    }
}

/// max over sample points and rows i of |Σ_j ∂_j cof(Du)_{ij}| by central
/// differences with the field's step: the Piola identity says the rows of
/// the cofactor matrix are divergence free for C^2 maps.
pub fn piola_residual(u: &VectorField, points: &[Point]) -> f64 {
    let dim = u.dim();
    let n = dim.n();
    let h = u.fd_step();
    let mut worst: f64 = 0.0;
    for x in points {
        for i in 0..n {
            let mut div = 0.0;
            for j in 0..n {
                let mut xp = *x;
                let mut xm = *x;
                xp[j] += h;
                xm[j] -= h;
                let cp = cofactor(dim, &u.jacobian_at(&xp));
                let cm = cofactor(dim, &u.jacobian_at(&xm));
                div += (cp[i][j] - cm[i][j]) / (2.0 * h);
            }
            worst = worst.max(div.abs());
        }
    }
    worst
}

/// Smooth maps of low polynomial degree whose determinant pairings have
/// closed forms reachable by moderate quadrature: identity, a shear, a
/// genuinely mixing map, a diagonal square, and a non-symmetric linear map.
pub fn polynomial_test_maps(dim: Dim) -> Vec<VectorField> {
    match dim {
        Dim::Three => vec![
            VectorField::new(dim, |x| *x),
            VectorField::new(dim, |x| [x[0] + x[1] * x[1], x[1], x[2]]),
            VectorField::new(dim, |x| [x[0] * x[1], x[0] + x[1], x[2] * x[2]]),
            VectorField::new(dim, |x| [x[0] * x[0], x[1] * x[1], x[2] * x[2]]),
            VectorField::new(dim, |x| {
                [x[0] + 0.3 * x[2], x[1] - 0.2 * x[0], x[2] + 0.1 * x[1]]
            }),
        ],
        Dim::Two => vec![
            VectorField::new(dim, |x| *x),
            VectorField::new(dim, |x| [x[0] + x[1] * x[1], x[1], 0.0]),
            VectorField::new(dim, |x| [x[0] * x[1], x[0] + x[1], 0.0]),
            VectorField::new(dim, |x| [x[0] * x[0], x[1] * x[1], 0.0]),
            VectorField::new(dim, |x| [x[0] + 0.3 * x[1], x[1] - 0.2 * x[0], 0.0]),
        ],
    }
}

/// Equi-integrability modulus of |grad u^component| over the cylinder in
/// L^{N-1,1}: the quantity whose uniform smallness along a map family keeps
/// the distributional determinant continuous under weak convergence.
pub fn gradient_lorentz_modulus(
    u: &VectorField,
    component: usize,
    rule: &CylinderRule,
    delta: f64,
) -> Result<f64> {
    let dim = rule.dim();
    let n = dim.n();
    if component >= n {
        return Err(Error::DomainViolation(format!(
            "gradient component {component} out of range for an N={n} map"
        )));
    }
    let samples = WeightedSamples::from_pairs(rule.weighted_values(|x| {
        let row = u.jacobian_at(x)[component];
        (0..n).map(|j| row[j] * row[j]).sum::<f64>().sqrt()
    }))?;
    equiintegrability_modulus(&samples, delta, ModulusMode::Lorentz((n - 1) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sphere_quadrature, Domain};
    use crate::pairing::{limit_extrapolate, ConcentrationMass, PairingTable, DEFAULT_LADDER};
    use crate::sequences::{jacobian_example_det, jacobian_example_fields};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn polynomial_maps(dim: Dim) -> Vec<VectorField> {
        polynomial_test_maps(dim)
    }

    #[test]
    fn cofactor_identity_on_random_matrices() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for dim in [Dim::Two, Dim::Three] {
            let n = dim.n();
            for _ in 0..50 {
                let mut a = [[0.0; 3]; 3];
                for row in a.iter_mut().take(n) {
                    for v in row.iter_mut().take(n) {
                        *v = next();
                    }
                }
                let c = cofactor(dim, &a);
                let d = det(dim, &a);
                for (i, a_row) in a.iter().enumerate().take(n) {
                    for (k, c_row) in c.iter().enumerate().take(n) {
                        let dot: f64 = a_row.iter().zip(c_row).take(n).map(|(x, y)| x * y).sum();
                        let want = if i == k { d } else { 0.0 };
                        assert_abs_diff_eq!(dot, want, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pairings_agree_for_polynomial_maps() {
        for dim in [Dim::Three, Dim::Two] {
            let rule = CylinderRule::standard(dim).unwrap();
            let bumps = compact_bumps(dim);
            for (i, u) in polynomial_maps(dim).iter().enumerate() {
                for psi in &bumps {
                    let c = det_consistency(u, psi, &rule);
                    assert!(
                        c.relative_gap < 1e-6,
                        "dim {dim:?} map {i} psi {}: gap {} ({} vs {})",
                        psi.name(),
                        c.relative_gap,
                        c.pointwise,
                        c.distributional
                    );
                }
            }
        }
    }

    #[test]
    fn identity_map_pairing_matches_the_test_integral() {
        // det = 1, so the pointwise pairing is just ∫ psi.
        let rule = CylinderRule::standard(Dim::Three).unwrap();
        let u = VectorField::new(Dim::Three, |x| *x);
        let psi = &compact_bumps(Dim::Three)[0];
        let got = pointwise_det_pairing(&u, psi, &rule);
        let want = rule.integrate(|x| psi.eval(x));
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn piola_residual_small_for_smooth_maps_large_at_a_singularity() {
        let points: Vec<Point> = crate::geometry::sampling::cylinder_cloud(
            Dim::Three,
            60,
            0.1,
            crate::geometry::sampling::DEFAULT_SEED,
        );
        for u in polynomial_maps(Dim::Three) {
            assert!(piola_residual(&u, &points) < 1e-6);
        }
        // x/|x| is not C^1 at the origin; probes whose FD stencils straddle
        // the singular point report a macroscopic residual. (A mere kink is
        // not enough: the identity is algebraic in Du and cancels there.)
        let singular = VectorField::new(Dim::Three, |x| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().max(1e-300);
            [x[0] / r, x[1] / r, x[2] / r]
        });
        let near_origin = [[1e-6, 0.0, 0.0], [0.0, -2e-6, 1e-6]];
        assert!(piola_residual(&singular, &near_origin) > 1.0);
    }

    #[test]
    fn singular_map_separates_the_two_pairings() {
        // u = x/|x| on the unit ball: pointwise det = 0 a.e., while the
        // divergence-form pairing returns |B_1| psi(0) = (4 pi / 3) psi(0).
        let dim = Dim::Three;
        let u = VectorField::new(dim, |x| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if r < 1e-14 {
                return [0.0; 3];
            }
            [x[0] / r, x[1] / r, x[2] / r]
        })
        .with_jacobian(|x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            let r = r2.sqrt();
            let mut j = [[0.0; 3]; 3];
            if r < 1e-14 {
                return j;
            }
            for i in 0..3 {
                for k in 0..3 {
                    let delta = if i == k { 1.0 } else { 0.0 };
                    j[i][k] = (delta - x[i] * x[k] / r2) / r;
                }
            }
            j
        })
        .on_domain(Domain::Ball { center: [0.0; 3], radius: 1.0 });
        let psi = radial_bump(dim, [0.0; 3], 1.0);
        let grid = RadialGrid::uniform(0.0, 1.0, 48, 8).unwrap();
        let quad = sphere_quadrature(dim, 24).unwrap();
        let distributional = distributional_det_pairing_ball(&u, &psi, &[0.0; 3], &grid, &quad);
        let pointwise = pointwise_det_pairing_ball(&u, &psi, &[0.0; 3], &grid, &quad);
        assert!(pointwise.abs() < 1e-10, "pointwise {pointwise}");
        assert_abs_diff_eq!(distributional, 4.0 * PI / 3.0, epsilon = 1e-6);
        // Cofactor first row of the analytic Jacobian is y_1 y_j / |x|^2.
        let x = [0.3, -0.2, 0.5];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let c = cofactor(dim, &u.jacobian_at(&x));
        for j in 0..3 {
            assert_abs_diff_eq!(c[0][j], x[0] * x[j] / r2 / r2, epsilon = 1e-12);
        }
    }

    #[test]
    fn concentrating_family_pairs_to_the_axis_measure() {
        let rule = CylinderRule::standard(Dim::Three).unwrap();
        let psi = &compact_bumps(Dim::Three)[0];
        // psi delta mass: chi(0) = 1 times ∫ (t(1-t))^2 = 1/30.
        let mass_psi = 1.0 / 30.0;
        let table = PairingTable::from_fn(&DEFAULT_LADDER, |n| {
            let d = jacobian_example_det(Dim::Three, n);
            Ok(rule.integrate(|x| d.eval(x) * psi.eval(x)))
        })
        .unwrap();
        let est = limit_extrapolate(&table).unwrap();
        let want = ConcentrationMass::jacobian(Dim::Three).direct * mass_psi;
        assert!(
            (est.value - want).abs() <= 0.01 * want.abs(),
            "{} vs {want}",
            est.value
        );
        // Pointwise pairing of the actual map agrees with the closed form.
        let u16 = jacobian_example_fields(Dim::Three, 16).unwrap();
        let direct = pointwise_det_pairing(&u16, psi, &rule);
        let closed = rule.integrate(|x| jacobian_example_det(Dim::Three, 16).eval(x) * psi.eval(x));
        assert_abs_diff_eq!(direct, closed, epsilon = 1e-10);
    }

    #[test]
    fn plane_family_matches_the_segment_oracle() {
        // 1-D oracle: cross-section integral 2 ∫_0^1 det_n(r) chi(r) dr times
        // the axial integral of g. The integrand lives at scale 1/n near
        // r = 0, so the segment is split there before applying Gauss nodes.
        let rule = CylinderRule::standard(Dim::Two).unwrap();
        let psi = &compact_bumps(Dim::Two)[0];
        let (nodes, weights) = crate::geometry::gauss_legendre(64);
        let seg = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| -> f64 {
            nodes
                .iter()
                .zip(&weights)
                .map(|(t, w)| 0.5 * (b - a) * w * f(a + 0.5 * (b - a) * (t + 1.0)))
                .sum()
        };
        let oracle = |n: u32| {
            let d = jacobian_example_det(Dim::Two, n);
            let g = |r: f64| d.eval(&[r, 0.0, 0.0]) * (1.0 - r * r).powi(2);
            let split = (4.0 / n as f64).min(1.0);
            let cross = seg(&g, 0.0, split) + seg(&g, split, 1.0);
            let axial = seg(&|s| (s * (1.0 - s)).powi(2), 0.0, 1.0);
            2.0 * cross * axial
        };
        let table_rule = PairingTable::from_fn(&DEFAULT_LADDER, |n| {
            let d = jacobian_example_det(Dim::Two, n);
            Ok(rule.integrate(|x| d.eval(x) * psi.eval(x)))
        })
        .unwrap();
        let table_oracle = PairingTable::from_fn(&DEFAULT_LADDER, |n| Ok(oracle(n))).unwrap();
        for ((n1, a), (n2, b)) in table_rule.entries().iter().zip(table_oracle.entries()) {
            assert_eq!(n1, n2);
            assert!((a - b).abs() <= 1e-7 * a.abs().max(1e-12), "n={n1}: {a} vs {b}");
        }
        let est = limit_extrapolate(&table_oracle).unwrap();
        let want = ConcentrationMass::jacobian(Dim::Two).direct * (1.0 / 30.0);
        assert!((est.value - want).abs() <= 0.02 * want.abs(), "{} vs {want}", est.value);
    }

    #[test]
    fn oscillating_family_keeps_the_determinant_continuous() {
        // u_n = u + sin(n x_1)/n e_1: gradients stay bounded and oscillate,
        // the first gradient row is Lorentz equi-integrable, and the
        // distributional pairing converges to the limit map's pairing.
        let rule = CylinderRule::standard(Dim::Three).unwrap();
        let psi = &compact_bumps(Dim::Three)[0];
        let base = || {
            VectorField::new(Dim::Three, |x| [x[0] + 0.2 * x[1] * x[2], x[1], x[2]]).with_jacobian(
                |x| [[1.0, 0.2 * x[2], 0.2 * x[1]], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            )
        };
        let perturbed = |n: u32| {
            let nf = n as f64;
            VectorField::new(Dim::Three, move |x| {
                [x[0] + 0.2 * x[1] * x[2] + (nf * x[0]).sin() / nf, x[1], x[2]]
            })
            .with_jacobian(move |x| {
                [
                    [1.0 + (nf * x[0]).cos(), 0.2 * x[2], 0.2 * x[1]],
                    [0.0, 1.0, 0.0],
                    [0.0, 0.0, 1.0],
                ]
            })
        };
        let reference = distributional_det_pairing(&base(), psi, &rule);
        let table = PairingTable::from_fn(&DEFAULT_LADDER, |n| {
            Ok(distributional_det_pairing(&perturbed(n), psi, &rule))
        })
        .unwrap();
        let est = limit_extrapolate(&table).unwrap();
        assert!(
            (est.value - reference).abs() <= 1e-3 * reference.abs(),
            "{} vs {reference}",
            est.value
        );
        // Bounded gradients: modulus shrinks with delta and is tiny at 1e-4.
        let m_big = gradient_lorentz_modulus(&perturbed(64), 0, &rule, 1e-1).unwrap();
        let m_small = gradient_lorentz_modulus(&perturbed(64), 0, &rule, 1e-4).unwrap();
        assert!(m_small < m_big);
        assert!(m_small < 0.05, "modulus {m_small}");
    }

    #[test]
    fn concentrating_family_fails_lorentz_equiintegrability() {
        // |grad u_n^1| ~ n^2 near the axis: over the shrinking disc
        // r < 2/n (measure delta_n) the L^{2,1} modulus does not vanish.
        let rule = CylinderRule::standard(Dim::Three).unwrap();
        for &n in &[8u32, 32, 128] {
            let u = jacobian_example_fields(Dim::Three, n).unwrap();
            let delta = PI * (2.0 / n as f64).powi(2);
            let m = gradient_lorentz_modulus(&u, 0, &rule, delta).unwrap();
            assert!(m > 0.1, "n={n}: modulus {m}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn cofactor_transpose_product_is_det_identity(
            entries in proptest::collection::vec(-3.0f64..3.0, 9),
        ) {
            let mut a = [[0.0; 3]; 3];
            for (row, chunk) in a.iter_mut().zip(entries.chunks_exact(3)) {
                row.copy_from_slice(chunk);
            }
            let c = cofactor(Dim::Three, &a);
            let d = det(Dim::Three, &a);
            for (i, c_row) in c.iter().enumerate() {
                for (k, a_row) in a.iter().enumerate() {
                    let dot: f64 = c_row.iter().zip(a_row).map(|(x, y)| x * y).sum();
                    let want = if i == k { d } else { 0.0 };
                    prop_assert!((dot - want).abs() <= 1e-10);
                }
            }
        }
    }
}
