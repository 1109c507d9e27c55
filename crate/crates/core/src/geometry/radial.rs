use super::gauss_legendre;
use crate::error::{Error, Result};

/// Panel grading for radial grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    /// Panel widths shrink geometrically toward the lower endpoint by the
    /// given ratio (< 1). Used when mass piles up at small radii.
    TowardLo { ratio: f64 },
    /// Panel widths shrink geometrically toward the upper endpoint.
    TowardHi { ratio: f64 },
}

/// Composite Gauss rule on an interval of radii: ordered panels, per-panel
/// Gauss–Legendre nodes. All nodes are interior, so integrands may be
/// singular at the endpoints.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    lo: f64,
    hi: f64,
    grading: Grading,
    gauss_order: usize,
    /// Panel boundaries, strictly increasing, len = panels + 1.
    edges: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(lo: f64, hi: f64, panels: usize, gauss_order: usize, grading: Grading) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(Error::EmptyGrid(format!("interval [{lo}, {hi}]")));
        }
        if panels == 0 {
            return Err(Error::EmptyGrid("zero panels".into()));
        }
        if gauss_order == 0 {
            return Err(Error::InvalidOrder(0, 1));
        }
        if let Grading::TowardLo { ratio } | Grading::TowardHi { ratio } = grading {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::EmptyGrid(format!("grading ratio {ratio} outside (0,1)")));
            }
        }
        let mut widths = Vec::with_capacity(panels);
        match grading {
            Grading::Uniform => {
                widths.resize(panels, (hi - lo) / panels as f64);
            }
            Grading::TowardLo { ratio } => {
                // Width of panel k (from lo): ∝ ratio^(panels-1-k).
                let mut raw: Vec<f64> = (0..panels)
                    .map(|k| ratio.powi((panels - 1 - k) as i32))
                    .collect();
                let total: f64 = raw.iter().sum();
                raw.iter_mut().for_each(|w| *w *= (hi - lo) / total);
                widths = raw;
            }
            Grading::TowardHi { ratio } => {
                let mut raw: Vec<f64> = (0..panels).map(|k| ratio.powi(k as i32)).collect();
                let total: f64 = raw.iter().sum();
                raw.iter_mut().for_each(|w| *w *= (hi - lo) / total);
                widths = raw;
            }
        }
        let mut edges = Vec::with_capacity(panels + 1);
        edges.push(lo);
        let mut acc = lo;
        for w in &widths {
            acc += w;
            edges.push(acc);
        }
        *edges.last_mut().unwrap() = hi;

        let (gx, gw) = gauss_legendre(gauss_order);
        let mut nodes = Vec::with_capacity(panels * gauss_order);
        let mut weights = Vec::with_capacity(panels * gauss_order);
        for p in 0..panels {
            let (a, b) = (edges[p], edges[p + 1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Ok(RadialGrid {
            lo,
            hi,
            grading,
            gauss_order,
            edges,
            nodes,
            weights,
        })
    }

    pub fn uniform(lo: f64, hi: f64, panels: usize, gauss_order: usize) -> Result<Self> {
        Self::new(lo, hi, panels, gauss_order, Grading::Uniform)
    }

    /// Default grid for profiles concentrating at the lower endpoint:
    /// geometric grading with ratio 0.5 and at least 32 panels resolves
    /// (1-r)^{2n}-type mass down to widths ~2^{-panels}.
    pub fn graded_toward_lo(lo: f64, hi: f64, panels: usize, gauss_order: usize) -> Result<Self> {
        Self::new(lo, hi, panels.max(32), gauss_order, Grading::TowardLo { ratio: 0.5 })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn gauss_order(&self) -> usize {
        self.gauss_order
    }

    pub fn panel_edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn panel_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Σ w_i g(r_i).
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(r, w)| w * g(*r)).sum()
    }

    /// Concatenate with a grid starting where this one ends.
    pub fn concat(&self, right: &RadialGrid) -> Result<RadialGrid> {
        if (self.hi - right.lo).abs() > 1e-12 {
            return Err(Error::EmptyGrid(format!(
                "cannot join [{}, {}] with [{}, {}]",
                self.lo, self.hi, right.lo, right.hi
            )));
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&right.edges[1..]);
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&right.nodes);
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&right.weights);
        Ok(RadialGrid {
            lo: self.lo,
            hi: right.hi,
            grading: self.grading,
            gauss_order: self.gauss_order,
            edges,
            nodes,
            weights,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_interval_length() {
        let g = RadialGrid::uniform(0.25, 0.75, 8, 4).unwrap();
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 0.5, epsilon = 1e-14);
        let g = RadialGrid::graded_toward_lo(0.0, 1.0, 48, 16).unwrap();
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn resolves_sharp_boundary_layer_profiles() {
        // n² ∫_0^1 r (1-r)^{2n} dr = n² / ((2n+1)(2n+2)) exactly.
        let g = RadialGrid::graded_toward_lo(0.0, 1.0, 48, 16).unwrap();
        for n in [8u32, 64, 512, 4096] {
            let nf = n as f64;
            let quad = g.integrate(|r| nf * nf * r * (1.0 - r).powi(2 * n as i32));
            let exact = nf * nf / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0));
            assert_abs_diff_eq!(quad, exact, epsilon = 1e-12 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn grading_shrinks_panels_toward_lower_end() {
        let g = RadialGrid::graded_toward_lo(0.0, 1.0, 32, 4).unwrap();
        let e = g.panel_edges();
        let first = e[1] - e[0];
        let last = e[e.len() - 1] - e[e.len() - 2];
        assert!(first < last * 1e-6, "first {first} vs last {last}");
    }

    #[test]
    fn concatenation_is_additive() {
        let left = RadialGrid::uniform(0.0, 0.4, 5, 6).unwrap();
        let right = RadialGrid::uniform(0.4, 1.0, 7, 6).unwrap();
        let joined = left.concat(&right).unwrap();
        let f = |r: f64| (3.0 * r).sin() + r * r;
        let split = left.integrate(f) + right.integrate(f);
        let whole = joined.integrate(f);
        assert_abs_diff_eq!(split, whole, epsilon = 1e-12);
    }
}
