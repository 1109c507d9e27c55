//! Geometry layer: dimensions, domains, fields, and the quadrature rules the
//! rest of the crate integrates with. All rules are deterministic; nodes are
//! interior (Gauss points radially, offset angles), so evaluators with a
//! singular axis or a kink at a sphere are never sampled on their bad set.

mod domain;
mod field;
mod integrate;
mod quad;
mod radial;
pub mod sampling;

pub use domain::{Dim, Domain, Point};
pub use field::{central_diff, Field, ScalarField, VectorField};
pub use integrate::{annulus_integral, ball_integral, cylinder_integral, CylinderRule};
pub use quad::{cap_area, gauss_legendre, sphere_integral, sphere_quadrature, SphereQuad};
pub use radial::{Grading, RadialGrid};

/// Euclidean norm of the first `n` coordinates.
pub(crate) fn norm_n(x: &Point, n: usize) -> f64 {
    x[..n].iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// x0 + r * y, componentwise over all three slots.
pub(crate) fn offset(x0: &Point, r: f64, y: &Point) -> Point {
    [x0[0] + r * y[0], x0[1] + r * y[1], x0[2] + r * y[2]]
}
