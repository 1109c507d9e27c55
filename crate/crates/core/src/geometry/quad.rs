use std::f64::consts::PI;

use super::{offset, Dim, Point, ScalarField};
use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the three-term recurrence; nodes are accurate to
/// machine precision for the orders used here (≤ a few hundred). Weights sum
/// to 2 and the rule integrates polynomials of degree < 2n exactly.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                let (_, d) = legendre_and_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // Enforce the exact midpoint for odd orders.
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Quadrature rule on the unit sphere S_{N-1}.
///
/// N = 2: `order` equally spaced angles (offset by half a step), equal
/// weights summing to 2π; trigonometric polynomials of degree < order are
/// integrated exactly.
///
/// N = 3: product of an `order`-point Gauss–Legendre rule in cos(polar) and
/// `2·order` uniform azimuths; weights sum to 4π and spherical polynomials of
/// total degree < order are integrated exactly (even degree < 2·order in the
/// polar direction). Nodes never sit on the poles or on any coordinate axis.
#[derive(Debug, Clone)]
pub struct SphereQuad {
    pub dim: Dim,
    pub order: usize,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

impl SphereQuad {
    /// Approximate angular spacing between neighbouring nodes, used to set
    /// tolerances for indicator-function integrands.
    pub fn node_spacing(&self) -> f64 {
        match self.dim {
            Dim::Two => 2.0 * PI / self.order as f64,
            Dim::Three => PI / self.order as f64,
        }
    }

    /// Σ w_j g(y_j) for a closure on unit directions.
    pub fn integrate(&self, mut g: impl FnMut(&Point) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * g(y))
            .sum()
    }
}

pub fn sphere_quadrature(dim: Dim, order: usize) -> Result<SphereQuad> {
    if order < 2 {
        return Err(Error::InvalidOrder(order, 2));
    }
    match dim {
        Dim::Two => {
            let mut nodes = Vec::with_capacity(order);
            let w = 2.0 * PI / order as f64;
            for j in 0..order {
                let theta = 2.0 * PI * (j as f64 + 0.5) / order as f64;
                nodes.push([theta.cos(), theta.sin(), 0.0]);
            }
            Ok(SphereQuad {
                dim,
                order,
                weights: vec![w; order],
                nodes,
            })
        }
        Dim::Three => {
            let (t, wt) = gauss_legendre(order);
            let n_az = 2 * order;
            let w_az = 2.0 * PI / n_az as f64;
            let mut nodes = Vec::with_capacity(order * n_az);
            let mut weights = Vec::with_capacity(order * n_az);
            for (ti, wi) in t.iter().zip(&wt) {
                let s = (1.0 - ti * ti).sqrt();
                for j in 0..n_az {
                    let phi = 2.0 * PI * (j as f64 + 0.5) / n_az as f64;
                    nodes.push([s * phi.cos(), s * phi.sin(), *ti]);
                    weights.push(wi * w_az);
                }
            }
            Ok(SphereQuad {
                dim,
                order,
                nodes,
                weights,
            })
        }
    }
}

/// Surface integral of `f` over the sphere of radius `r` around `x0`.
///
/// Returns Σ w_j f(x0 + r·y_j); no r^{N-1} surface Jacobian is applied, so a
/// constant c integrates to c·|S_{N-1}| for every radius. The caller owns the
/// scaling (annulus integration multiplies by r^{N-1} itself).
pub fn sphere_integral(f: &ScalarField, x0: &Point, r: f64, quad: &SphereQuad) -> Result<f64> {
    if f.dim() != quad.dim {
        return Err(Error::UnsupportedDimension(quad.dim.n()));
    }
    if r < 0.0 {
        return Err(Error::DomainViolation(format!("negative radius {r}")));
    }
    if let Some(domain) = f.domain() {
        if !domain.contains_sphere(f.dim(), x0, r) {
            return Err(Error::DomainViolation(format!(
                "sphere of radius {r} around {x0:?} leaves the field's domain"
            )));
        }
    }
    Ok(quad.integrate(|y| f.eval(&offset(x0, r, y))))
}

/// Surface measure of the chord-metric cap B(e1, h) ∩ S_{N-1}, i.e. the set
/// of unit vectors within Euclidean distance h of a fixed one.
///
/// N = 2: arc length 4·arcsin(h/2). N = 3: exactly π·h² (the spherical cap of
/// polar angle θ with h = 2 sin(θ/2) has area 2π(1 − cos θ) = π h²).
pub fn cap_area(dim: Dim, h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 2.0) {
        return Err(Error::InvalidCapRadius(h));
    }
    Ok(match dim {
        Dim::Two => 4.0 * (h / 2.0).asin(),
        Dim::Three => PI * h * h,
    })
}
