//! 1-D elliptic bench: -(a u')' = f on (0, 1) with u(0) = u(1) = 0 and a
//! piecewise-constant coefficient. The solve is exact up to quadrature of
//! the load: u'(x) = (c - F(x)) / a(x) with F the antiderivative of f and c
//! fixed by ∫ u' = 0, so the flux a u' = c - F is continuous across
//! coefficient jumps by construction. Coefficient families whose values are
//! not uniformly bounded (a stiff inclusion of height n on measure 1/n)
//! still flux-converge to the harmonic-mean limit; the bound tracker
//! records which L^rho norms of the family stay bounded along the way.

use crate::error::{Error, Result};
use crate::geometry::gauss_legendre;
use crate::pairing::{limit_extrapolate, PairingTable};

const GL_ORDER: usize = 16;

/// Gauss-Legendre sum of f over [a, b].
fn gl_segment(nodes: &[f64], weights: &[f64], a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(t, w)| half * w * f(mid + half * t))
        .sum()
}

/// Piecewise-constant coefficient on [0, 1]: `values[k]` on
/// (breakpoints[k], breakpoints[k+1]).
#[derive(Debug, Clone)]
pub struct LaminateCoefficient {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl LaminateCoefficient {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::InconsistentGrid(format!(
                "{} breakpoints with {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if (breakpoints[0]).abs() > 1e-12 || (breakpoints[breakpoints.len() - 1] - 1.0).abs() > 1e-12
        {
            return Err(Error::InconsistentGrid(format!(
                "coefficient must span [0, 1], got [{}, {}]",
                breakpoints[0],
                breakpoints[breakpoints.len() - 1]
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InconsistentGrid(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InconsistentGrid("coefficient values must be finite".into()));
        }
        let mut breakpoints = breakpoints;
        let m = breakpoints.len();
        breakpoints[0] = 0.0;
        breakpoints[m - 1] = 1.0;
        Ok(LaminateCoefficient { breakpoints, values })
    }

    pub fn constant(v: f64) -> Result<Self> {
        LaminateCoefficient::new(vec![0.0, 1.0], vec![v])
    }

    /// `cells` identical cells, each the lower value on its left half and
    /// the higher on its right half.
    pub fn periodic_two_phase(a_left: f64, a_right: f64, cells: u32) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InconsistentGrid("need at least one cell".into()));
        }
        let m = cells as usize;
        let mut breakpoints = Vec::with_capacity(2 * m + 1);
        let mut values = Vec::with_capacity(2 * m);
        for k in 0..m {
            breakpoints.push(k as f64 / m as f64);
            breakpoints.push((k as f64 + 0.5) / m as f64);
            values.push(a_left);
            values.push(a_right);
        }
        breakpoints.push(1.0);
        LaminateCoefficient::new(breakpoints, values)
    }

    /// Value n on (0, 1/n) and 1 elsewhere: L^1-bounded but not
    /// L^rho-bounded for rho > 1, with harmonic mean 1/(1 - 1/n + 1/n^2).
    pub fn stiff_inclusion(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InconsistentGrid("stiff inclusion needs n >= 2".into()));
        }
        let nf = n as f64;
        LaminateCoefficient::new(vec![0.0, 1.0 / nf, 1.0], vec![nf, 1.0])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn panel_of(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|b| *b <= x);
        k.saturating_sub(1).min(self.values.len() - 1)
    }

    /// Value at x (clamped to [0, 1]); breakpoints take the right panel.
    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.panel_of(x.clamp(0.0, 1.0))]
    }

    /// (∫ 1/a)^{-1}, the exact effective coefficient of 1-D laminates.
    pub fn harmonic_mean(&self) -> Result<f64> {
        let min = self.min_value();
        if min <= 0.0 {
            return Err(Error::NonCoercive(min));
        }
        let inv: f64 = self
            .values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| (w[1] - w[0]) / v)
            .sum();
        Ok(1.0 / inv)
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| (w[1] - w[0]) * v)
            .sum()
    }

    /// L^rho norm over [0, 1], rho >= 1 (closed form: the coefficient is
    /// piecewise constant).
    pub fn lp_norm(&self, rho: f64) -> Result<f64> {
        if !rho.is_finite() || rho < 1.0 {
            return Err(Error::InvalidExponent(rho, "coefficient norms need rho >= 1"));
        }
        let acc: f64 = self
            .values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| (w[1] - w[0]) * v.abs().powf(rho))
            .sum();
        Ok(acc.powf(1.0 / rho))
    }
}

/// Harmonic mean of the coefficient: the exact limit coefficient of the
/// two-point problem under weak-* convergence of 1/a.
pub fn effective_coefficient(a: &LaminateCoefficient) -> Result<f64> {
    a.harmonic_mean()
}

/// Solution of -(a u')' = f, u(0) = u(1) = 0, stored through its flux
/// constant and per-breakpoint antiderivative tables. Point evaluations
/// integrate with Gauss panels that follow the coefficient's breakpoints,
/// so every quadrature sees a smooth integrand.
pub struct TwoPointSolution {
    a: LaminateCoefficient,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    c: f64,
    f_anti: Vec<f64>,
    u_anti: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub fn solve_two_point(
    a: LaminateCoefficient,
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> Result<TwoPointSolution> {
    let min = a.min_value();
    if min <= 0.0 {
        return Err(Error::NonCoercive(min));
    }
    let (nodes, weights) = gauss_legendre(GL_ORDER);
    let bp = a.breakpoints().to_vec();
    let m = a.values().len();

    let mut f_anti = Vec::with_capacity(m + 1);
    f_anti.push(0.0);
    for k in 0..m {
        let inc = gl_segment(&nodes, &weights, bp[k], bp[k + 1], &f);
        let prev = f_anti[k];
        f_anti.push(prev + inc);
    }

    // c = (∫ F/a) / (∫ 1/a) makes ∫ u' vanish.
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..m {
        let big_f = |t: f64| f_anti[k] + gl_segment(&nodes, &weights, bp[k], t, &f);
        num += gl_segment(&nodes, &weights, bp[k], bp[k + 1], big_f) / a.values()[k];
        den += (bp[k + 1] - bp[k]) / a.values()[k];
    }
    let c = num / den;

    let mut u_anti = Vec::with_capacity(m + 1);
    u_anti.push(0.0);
    for k in 0..m {
        let du = |t: f64| {
            (c - f_anti[k] - gl_segment(&nodes, &weights, bp[k], t, &f)) / a.values()[k]
        };
        let inc = gl_segment(&nodes, &weights, bp[k], bp[k + 1], du);
        let prev = u_anti[k];
        u_anti.push(prev + inc);
    }

    Ok(TwoPointSolution {
        a,
        f: Box::new(f),
        c,
        f_anti,
        u_anti,
        nodes,
        weights,
    })
}

impl TwoPointSolution {
    pub fn coefficient(&self) -> &LaminateCoefficient {
        &self.a
    }

    /// The constant c in u' = (c - F)/a; equals the flux at F = 0.
    pub fn flux_constant(&self) -> f64 {
        self.c
    }

    /// F(x) = ∫_0^x f.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let k = self.a.panel_of(x);
        let bp = self.a.breakpoints();
        self.f_anti[k] + gl_segment(&self.nodes, &self.weights, bp[k], x, &self.f)
    }

    /// a u' = c - F, continuous across coefficient jumps.
    pub fn flux(&self, x: f64) -> f64 {
        self.c - self.antiderivative(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.flux(x) / self.a.eval(x)
    }

    pub fn value(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let k = self.a.panel_of(x);
        let bp = self.a.breakpoints();
        let v = self.a.values()[k];
        let du = |t: f64| {
            (self.c
                - self.f_anti[k]
                - gl_segment(&self.nodes, &self.weights, bp[k], t, &self.f))
                / v
        };
        self.u_anti[k] + gl_segment(&self.nodes, &self.weights, bp[k], x, du)
    }

    /// max(|u(0)|, |u(1)|); the left value is zero by construction, the
    /// right one measures how exactly ∫ u' = 0 was enforced.
    pub fn boundary_residual(&self) -> f64 {
        let last = *self.u_anti.last().unwrap();
        self.u_anti[0].abs().max(last.abs())
    }

    fn panelwise(&self, g: impl Fn(f64) -> f64) -> f64 {
        let bp = self.a.breakpoints();
        (0..self.a.values().len())
            .map(|k| gl_segment(&self.nodes, &self.weights, bp[k], bp[k + 1], &g))
            .sum()
    }

    /// ∫ a |u'|^2 = ∫ (c - F)^2 / a.
    pub fn energy(&self) -> f64 {
        self.panelwise(|x| {
            let flux = self.flux(x);
            flux * flux / self.a.eval(x)
        })
    }

    /// ∫ f u by nested quadrature, an independent path from `energy`.
    pub fn compliance(&self) -> f64 {
        self.panelwise(|x| (self.f)(x) * self.value(x))
    }

    /// |∫ a |u'|^2 - ∫ f u|: zero for the exact solution, so the gap is a
    /// direct consistency check of the solve plus quadrature.
    pub fn energy_identity_gap(&self) -> f64 {
        (self.energy() - self.compliance()).abs()
    }

    /// ⟨a u', psi⟩.
    pub fn pair_flux(&self, psi: impl Fn(f64) -> f64) -> f64 {
        self.panelwise(|x| self.flux(x) * psi(x))
    }

    /// ⟨a |u'|^2, psi⟩.
    pub fn pair_energy_density(&self, psi: impl Fn(f64) -> f64) -> f64 {
        self.panelwise(|x| {
            let flux = self.flux(x);
            flux * flux / self.a.eval(x) * psi(x)
        })
    }

    fn merged_edges(&self, other: &TwoPointSolution) -> Vec<f64> {
        let mut edges: Vec<f64> = self
            .a
            .breakpoints()
            .iter()
            .chain(other.a.breakpoints())
            .copied()
            .collect();
        edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
        edges.dedup_by(|p, q| (*p - *q).abs() <= 1e-15);
        edges
    }

    /// ||u - v||_{L^2}.
    pub fn state_l2_distance(&self, other: &TwoPointSolution) -> f64 {
        let edges = self.merged_edges(other);
        let acc: f64 = edges
            .windows(2)
            .map(|w| {
                gl_segment(&self.nodes, &self.weights, w[0], w[1], |x| {
                    let d = self.value(x) - other.value(x);
                    d * d
                })
            })
            .sum();
        acc.sqrt()
    }

    /// ||u' - v'||_{L^2}.
    pub fn gradient_l2_distance(&self, other: &TwoPointSolution) -> f64 {
        let edges = self.merged_edges(other);
        let acc: f64 = edges
            .windows(2)
            .map(|w| {
                gl_segment(&self.nodes, &self.weights, w[0], w[1], |x| {
                    let d = self.derivative(x) - other.derivative(x);
                    d * d
                })
            })
            .sum();
        acc.sqrt()
    }
}

/// Per-rung comparison of a coefficient family against its harmonic-mean
/// limit problem: flux and energy-density pairings with their limit values,
/// L^2 distance of states, L^2 gap of gradients (which does not vanish),
/// and the per-solve energy-identity gaps.
#[derive(Debug, Clone)]
pub struct HLimitReport {
    pub effective: f64,
    pub flux_limit: f64,
    pub energy_limit: f64,
    pub ns: Vec<u32>,
    pub flux_pairings: Vec<f64>,
    pub energy_pairings: Vec<f64>,
    pub state_errors: Vec<f64>,
    pub gradient_gaps: Vec<f64>,
    pub energy_identity_gaps: Vec<f64>,
}

impl HLimitReport {
    pub fn flux_errors(&self) -> Vec<f64> {
        self.flux_pairings.iter().map(|v| (v - self.flux_limit).abs()).collect()
    }

    pub fn energy_errors(&self) -> Vec<f64> {
        self.energy_pairings.iter().map(|v| (v - self.energy_limit).abs()).collect()
    }
}

/// Solve the family along `ns`, extrapolate the harmonic means to the
/// limit coefficient, solve the limit problem once, and tabulate the
/// weak-convergence diagnostics against it. Report only; callers decide
/// which columns must pass which thresholds.
pub fn flux_convergence_test(
    family: impl Fn(u32) -> Result<LaminateCoefficient>,
    f: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    psi: impl Fn(f64) -> f64,
    ns: &[u32],
) -> Result<HLimitReport> {
    let means = PairingTable::from_fn(ns, |n| family(n)?.harmonic_mean())?;
    let effective = limit_extrapolate(&means)?.value;
    let limit = solve_two_point(LaminateCoefficient::constant(effective)?, f.clone())?;
    let flux_limit = limit.pair_flux(&psi);
    let energy_limit = limit.pair_energy_density(&psi);

    let mut report = HLimitReport {
        effective,
        flux_limit,
        energy_limit,
        ns: ns.to_vec(),
        flux_pairings: Vec::with_capacity(ns.len()),
        energy_pairings: Vec::with_capacity(ns.len()),
        state_errors: Vec::with_capacity(ns.len()),
        gradient_gaps: Vec::with_capacity(ns.len()),
        energy_identity_gaps: Vec::with_capacity(ns.len()),
    };
    for &n in ns {
        let sol = solve_two_point(family(n)?, f.clone())?;
        report.flux_pairings.push(sol.pair_flux(&psi));
        report.energy_pairings.push(sol.pair_energy_density(&psi));
        report.state_errors.push(sol.state_l2_distance(&limit));
        report.gradient_gaps.push(sol.gradient_l2_distance(&limit));
        report.energy_identity_gaps.push(sol.energy_identity_gap());
    }
    Ok(report)
}

/// L^rho norms of a coefficient family along `ns`, with a coarse
/// bounded/unbounded verdict: the tail is flagged unbounded when it still
/// grows by more than 50% over the second half of the ladder.
#[derive(Debug, Clone)]
pub struct CoefficientBoundTrack {
    pub rho: f64,
    pub ns: Vec<u32>,
    pub norms: Vec<f64>,
    pub bounded: bool,
}

pub fn coefficient_bound_track(
    family: impl Fn(u32) -> Result<LaminateCoefficient>,
    rho: f64,
    ns: &[u32],
) -> Result<CoefficientBoundTrack> {
    if !rho.is_finite() || rho < 1.0 {
        return Err(Error::InvalidExponent(rho, "coefficient norms need rho >= 1"));
    }
    if ns.is_empty() {
        return Err(Error::InsufficientData { need: 1, got: 0 });
    }
    let mut norms = Vec::with_capacity(ns.len());
    for &n in ns {
        norms.push(family(n)?.lp_norm(rho)?);
    }
    let last = norms[norms.len() - 1];
    let mid = norms[(norms.len() - 1) / 2];
    let bounded = last <= 1.5 * mid;
    Ok(CoefficientBoundTrack { rho, ns: ns.to_vec(), norms, bounded })
}
