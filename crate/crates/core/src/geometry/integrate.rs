use super::{offset, sphere_quadrature, Dim, Point, RadialGrid, ScalarField, SphereQuad};
use crate::error::{Error, Result};

const SPAN_TOL: f64 = 1e-10;

/// ∫ over the annulus {r_lo < |x - x0| < r_hi} of `f`, as the radial
/// composite-Gauss sum of r^{N-1} times sphere integrals. The grid must span
/// exactly [r_lo, r_hi].
pub fn annulus_integral(
    f: &ScalarField,
    x0: &Point,
    r_lo: f64,
    r_hi: f64,
    grid: &RadialGrid,
    quad: &SphereQuad,
) -> Result<f64> {
    if f.dim() != quad.dim {
        return Err(Error::UnsupportedDimension(quad.dim.n()));
    }
    if (grid.lo() - r_lo).abs() > SPAN_TOL || (grid.hi() - r_hi).abs() > SPAN_TOL {
        return Err(Error::EmptyGrid(format!(
            "grid spans [{}, {}], requested [{r_lo}, {r_hi}]",
            grid.lo(),
            grid.hi()
        )));
    }
    if let Some(domain) = f.domain() {
        for r in [r_lo.max(grid.nodes().first().copied().unwrap_or(r_lo)), r_hi] {
            if !domain.contains_sphere(f.dim(), x0, r) {
                return Err(Error::DomainViolation(format!(
                    "sphere of radius {r} around {x0:?} leaves the field's domain"
                )));
            }
        }
    }
    let exponent = (f.dim().n() - 1) as i32;
    Ok(grid.integrate(|r| {
        let shell: f64 = quad.integrate(|y| f.eval(&offset(x0, r, y)));
        r.powi(exponent) * shell
    }))
}

/// ∫ over the ball B(x0, r) of `f`; the grid must span [0, r].
pub fn ball_integral(
    f: &ScalarField,
    x0: &Point,
    r: f64,
    grid: &RadialGrid,
    quad: &SphereQuad,
) -> Result<f64> {
    annulus_integral(f, x0, 0.0, r, grid, quad)
}

/// Product rule on the cylinder: unit cross-section ball in the first
/// N-1 coordinates times the axial interval (0, 1).
///
/// N = 3 integrates in polar cross-section coordinates (radius × angle);
/// N = 2 integrates the cross-section segment (-1, 1) directly as the two
/// half-segments {±r : r ∈ (0, 1)}, which is the convention every reported
/// cross-section constant uses. Radial nodes are interior, so the axis
/// {x' = 0} is never sampled.
pub struct CylinderRule {
    dim: Dim,
    radial: RadialGrid,
    angular: Option<SphereQuad>,
    axial_nodes: Vec<f64>,
    axial_weights: Vec<f64>,
}

impl CylinderRule {
    pub fn new(dim: Dim, radial: RadialGrid, angular_order: usize, axial_order: usize) -> Result<Self> {
        if (radial.lo() - 0.0).abs() > SPAN_TOL || (radial.hi() - 1.0).abs() > SPAN_TOL {
            return Err(Error::EmptyGrid(format!(
                "cylinder cross-section grid must span [0, 1], got [{}, {}]",
                radial.lo(),
                radial.hi()
            )));
        }
        let angular = match dim {
            Dim::Three => Some(sphere_quadrature(Dim::Two, angular_order)?),
            Dim::Two => None,
        };
        let (gx, gw) = super::gauss_legendre(axial_order.max(2));
        let axial_nodes: Vec<f64> = gx.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let axial_weights: Vec<f64> = gw.iter().map(|w| 0.5 * w).collect();
        Ok(CylinderRule {
            dim,
            radial,
            angular,
            axial_nodes,
            axial_weights,
        })
    }

    /// Default rule: cross-section radius graded toward the axis (where the
    /// profiles concentrate), light angular and axial orders.
    pub fn standard(dim: Dim) -> Result<Self> {
        let radial = RadialGrid::graded_toward_lo(0.0, 1.0, 48, 16)?;
        CylinderRule::new(dim, radial, 16, 12)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn radial(&self) -> &RadialGrid {
        &self.radial
    }

    /// Σ over the rule of f(x) dx.
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        match self.dim {
            Dim::Three => {
                let angular = self.angular.as_ref().unwrap();
                self.radial.integrate(|r| {
                    let mut acc = 0.0;
                    for (y, wy) in angular.nodes.iter().zip(&angular.weights) {
                        for (z, wz) in self.axial_nodes.iter().zip(&self.axial_weights) {
                            acc += wy * wz * f(&[r * y[0], r * y[1], *z]);
                        }
                    }
                    r * acc
                })
            }
            Dim::Two => self.radial.integrate(|r| {
                let mut acc = 0.0;
                for sign in [1.0, -1.0] {
                    for (z, wz) in self.axial_nodes.iter().zip(&self.axial_weights) {
                        acc += wz * f(&[sign * r, *z, 0.0]);
                    }
                }
                acc
            }),
        }
    }

    /// Weighted sample list (value, weight) of an integrand over the rule's
    /// nodes; weights include all Jacobian factors and sum to the domain
    /// volume.
    pub fn weighted_values(&self, f: impl Fn(&Point) -> f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        match self.dim {
            Dim::Three => {
                let angular = self.angular.as_ref().unwrap();
                for (r, wr) in self.radial.nodes().iter().zip(self.radial.weights()) {
                    for (y, wy) in angular.nodes.iter().zip(&angular.weights) {
                        for (z, wz) in self.axial_nodes.iter().zip(&self.axial_weights) {
                            out.push((f(&[r * y[0], r * y[1], *z]), wr * r * wy * wz));
                        }
                    }
                }
            }
            Dim::Two => {
                for (r, wr) in self.radial.nodes().iter().zip(self.radial.weights()) {
                    for sign in [1.0, -1.0] {
                        for (z, wz) in self.axial_nodes.iter().zip(&self.axial_weights) {
                            out.push((f(&[sign * r, *z, 0.0]), wr * wz));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Convenience wrapper: integrate a closure over the cylinder.
pub fn cylinder_integral(rule: &CylinderRule, f: impl Fn(&Point) -> f64) -> f64 {
    rule.integrate(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn ball_volumes() {
        let quad3 = sphere_quadrature(Dim::Three, 8).unwrap();
        let grid = RadialGrid::uniform(0.0, 1.0, 8, 8).unwrap();
        let one3 = ScalarField::new(Dim::Three, |_| 1.0);
        let v3 = ball_integral(&one3, &[0.0; 3], 1.0, &grid, &quad3).unwrap();
        assert_abs_diff_eq!(v3, 4.0 * PI / 3.0, epsilon = 1e-12);

        let quad2 = sphere_quadrature(Dim::Two, 8).unwrap();
        let one2 = ScalarField::new(Dim::Two, |_| 1.0);
        let v2 = ball_integral(&one2, &[0.0; 3], 1.0, &grid, &quad2).unwrap();
        assert_abs_diff_eq!(v2, PI, epsilon = 1e-12);
    }

    #[test]
    fn annulus_area_in_the_plane() {
        let quad = sphere_quadrature(Dim::Two, 8).unwrap();
        let grid = RadialGrid::uniform(1.0, 2.0, 4, 6).unwrap();
        let one = ScalarField::new(Dim::Two, |_| 1.0);
        let a = annulus_integral(&one, &[0.0; 3], 1.0, 2.0, &grid, &quad).unwrap();
        assert_abs_diff_eq!(a, 3.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn radial_beta_profile_over_unit_disc() {
        // ∫_{B²}(1-|x|)^8 dx = 2π ∫ r(1-r)^8 dr = 2π·B(2,9) = 2π/90.
        let quad = sphere_quadrature(Dim::Two, 8).unwrap();
        let grid = RadialGrid::uniform(0.0, 1.0, 8, 8).unwrap();
        let f = ScalarField::new(Dim::Two, |x| (1.0 - super::super::norm_n(x, 2)).powi(8));
        let v = ball_integral(&f, &[0.0; 3], 1.0, &grid, &quad).unwrap();
        assert_abs_diff_eq!(v, 2.0 * PI / 90.0, epsilon = 1e-13);
    }

    #[test]
    fn annulus_split_is_additive() {
        let quad = sphere_quadrature(Dim::Three, 12).unwrap();
        let f = ScalarField::new(Dim::Three, |x| (x[0] + 0.3).exp() + x[2] * x[2]);
        let left = RadialGrid::uniform(0.2, 0.5, 6, 10).unwrap();
        let right = RadialGrid::uniform(0.5, 0.9, 8, 10).unwrap();
        let joined = left.concat(&right).unwrap();
        let a = annulus_integral(&f, &[0.0; 3], 0.2, 0.5, &left, &quad).unwrap();
        let b = annulus_integral(&f, &[0.0; 3], 0.5, 0.9, &right, &quad).unwrap();
        let whole = annulus_integral(&f, &[0.0; 3], 0.2, 0.9, &joined, &quad).unwrap();
        assert_abs_diff_eq!(a + b, whole, epsilon = 1e-12 * whole.abs().max(1.0));
    }

    #[test]
    fn grid_must_match_requested_interval() {
        let quad = sphere_quadrature(Dim::Three, 4).unwrap();
        let grid = RadialGrid::uniform(0.0, 0.5, 4, 4).unwrap();
        let one = ScalarField::new(Dim::Three, |_| 1.0);
        assert!(annulus_integral(&one, &[0.0; 3], 0.0, 1.0, &grid, &quad).is_err());
    }

    #[test]
    fn domain_violation_is_reported() {
        let quad = sphere_quadrature(Dim::Three, 4).unwrap();
        let grid = RadialGrid::uniform(0.0, 1.0, 4, 4).unwrap();
        let f = ScalarField::new(Dim::Three, |_| 1.0).on_domain(Domain::Ball {
            center: [0.0; 3],
            radius: 0.5,
        });
        let err = ball_integral(&f, &[0.0; 3], 1.0, &grid, &quad);
        assert!(matches!(err, Err(Error::DomainViolation(_))));
    }

    #[test]
    fn cylinder_volume_both_dimensions() {
        let rule3 = CylinderRule::standard(Dim::Three).unwrap();
        assert_abs_diff_eq!(rule3.integrate(|_| 1.0), PI, epsilon = 1e-10);
        let rule2 = CylinderRule::standard(Dim::Two).unwrap();
        // Segment (-1,1) × (0,1), direct convention: area 2.
        assert_abs_diff_eq!(rule2.integrate(|_| 1.0), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn cylinder_resolves_concentrating_profiles() {
        // N=3: ∫ n²(1-|x'|)^{2n} dx = 2π n² B(2, 2n+1) = 2π n²/((2n+1)(2n+2)).
        let rule = CylinderRule::standard(Dim::Three).unwrap();
        for n in [8i32, 64, 512] {
            let nf = n as f64;
            let v = rule.integrate(|x| {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                nf * nf * (1.0 - r).powi(2 * n)
            });
            let exact = 2.0 * PI * nf * nf / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0));
            assert_abs_diff_eq!(v, exact, epsilon = 1e-9 * exact);
        }
    }

    use super::super::Domain;
}
