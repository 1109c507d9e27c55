use crate::error::{Error, Result};

/// Points are stored as `[f64; 3]`; in dimension 2 the last slot stays zero.
/// Cylinder conventions: the cross-section coordinates are the first
/// `N - 1` slots and the axial coordinate is slot `N - 1`.
pub type Point = [f64; 3];

/// Ambient dimension, restricted to the two cases the experiments run in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }

    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Surface measure of the unit sphere S_{N-1}: 2π for N = 2, 4π for N = 3.
    pub fn sphere_area(self) -> f64 {
        match self {
            Dim::Two => 2.0 * std::f64::consts::PI,
            Dim::Three => 4.0 * std::f64::consts::PI,
        }
    }

    /// Volume of the unit ball: π for N = 2, 4π/3 for N = 3.
    pub fn ball_volume(self) -> f64 {
        self.sphere_area() / self.n() as f64
    }
}

/// Supported integration domains. `Cylinder` is the unit cross-section ball
/// times the axial interval (0, 1), the stage for all concentration runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball { center: Point, radius: f64 },
    Annulus { center: Point, r_lo: f64, r_hi: f64 },
    Cylinder,
}

impl Domain {
    /// Whether the closed sphere of radius `r` around `x0` stays inside.
    pub fn contains_sphere(&self, dim: Dim, x0: &Point, r: f64) -> bool {
        match self {
            Domain::Ball { center, radius } => {
                dist(dim, x0, center) + r <= radius + 1e-12
            }
            Domain::Annulus { center, r_lo, r_hi } => {
                let d = dist(dim, x0, center);
                d - r >= r_lo - 1e-12 && d + r <= r_hi + 1e-12
            }
            Domain::Cylinder => {
                let n = dim.n();
                let cross = super::norm_n(x0, n - 1);
                let z = x0[n - 1];
                cross + r <= 1.0 + 1e-12 && z - r >= -1e-12 && z + r <= 1.0 + 1e-12
            }
        }
    }

    pub fn contains_point(&self, dim: Dim, x: &Point) -> bool {
        self.contains_sphere(dim, x, 0.0)
    }
}

fn dist(dim: Dim, a: &Point, b: &Point) -> f64 {
    let n = dim.n();
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    super::norm_n(&d, n)
}
