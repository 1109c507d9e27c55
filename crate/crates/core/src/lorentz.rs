//! Non-increasing rearrangements, distribution functions, Lorentz L^{p,1}
//! norms and equi-integrability moduli for weighted sample sets.
//!
//! Samples stand for a simple function: value f(x_j) on a set of measure
//! w_j. Everything downstream (rearrangement, both norm formulas, moduli) is
//! then an exact finite sum, so the identities between the two Lorentz
//! formulas and the equimeasurability of the rearrangement hold to rounding,
//! not to quadrature error.

use crate::error::{Error, Result};

/// Weighted samples (f(x_j), w_j) with w_j > 0, representing |f| on a set of
/// total measure Σ w_j. Absolute values are taken by the rearrangement ops.
#[derive(Debug, Clone)]
pub struct WeightedSamples {
    values: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl WeightedSamples {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::InvalidSamples(format!(
                "{} values vs {} weights",
                values.len(),
                weights.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSamples("non-finite value".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidSamples("weights must be positive and finite".into()));
        }
        let total = weights.iter().sum();
        Ok(WeightedSamples { values, weights, total })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (values, weights) = pairs.into_iter().unzip();
        Self::new(values, weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total measure of the underlying set.
    pub fn total_measure(&self) -> f64 {
        self.total
    }

    pub fn scaled(&self, c: f64) -> WeightedSamples {
        WeightedSamples {
            values: self.values.iter().map(|v| c * v).collect(),
            weights: self.weights.clone(),
            total: self.total,
        }
    }

    /// Merged levels of |f|: distinct absolute values in descending order
    /// paired with the cumulative measure of samples at or above each level.
    /// Both the distribution function and the rearrangement read off this one
    /// pass, which is what makes them exactly equimeasurable.
    fn descending_levels(&self) -> Vec<(f64, f64)> {
        let mut pairs: Vec<(f64, f64)> = self
            .values
            .iter()
            .zip(&self.weights)
            .filter(|(v, _)| v.abs() > 0.0)
            .map(|(v, w)| (v.abs(), *w))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut levels: Vec<(f64, f64)> = Vec::new();
        let mut cum = 0.0;
        for (v, w) in pairs {
            cum += w;
            match levels.last_mut() {
                Some((lv, lc)) if *lv == v => *lc = cum,
                _ => levels.push((v, cum)),
            }
        }
        levels
    }
}

/// Right-continuous step function: `values[i]` on [breaks[i], breaks[i+1]),
/// identically 0 outside [breaks[0], breaks[last]]. Breaks are strictly
/// increasing; `breaks.len() == values.len() + 1` (a bare `[x]` with no
/// values is the zero function).
#[derive(Debug, Clone)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::InconsistentGrid(format!(
                "{} breaks vs {} values",
                breaks.len(),
                values.len()
            )));
        }
        if !breaks.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InconsistentGrid("breaks must be strictly increasing".into()));
        }
        Ok(StepFunction { breaks, values })
    }

    pub fn zero() -> Self {
        StepFunction { breaks: vec![0.0], values: Vec::new() }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_lo(&self) -> f64 {
        self.breaks[0]
    }

    pub fn support_hi(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.values.is_empty() || x < self.breaks[0] || x >= self.support_hi() {
            return 0.0;
        }
        let idx = self.breaks.partition_point(|b| *b <= x) - 1;
        self.values[idx.min(self.values.len() - 1)]
    }

    /// Exact ∫ f over the support.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(v, w)| v * (w[1] - w[0]))
            .sum()
    }

    /// Exact Σ g(value)·width.
    pub fn integral_of(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.values
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(v, w)| g(*v) * (w[1] - w[0]))
            .sum()
    }

    /// Merge adjacent equal values; drop leading/trailing zero-value pieces
    /// (the function is 0 outside its representation anyway).
    pub fn canonical(&self) -> StepFunction {
        let mut pieces: Vec<(f64, f64, f64)> = self
            .values
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(v, w)| (w[0], w[1], *v))
            .collect();
        while pieces.first().is_some_and(|p| p.2 == 0.0) {
            pieces.remove(0);
        }
        while pieces.last().is_some_and(|p| p.2 == 0.0) {
            pieces.pop();
        }
        if pieces.is_empty() {
            return StepFunction::zero();
        }
        let mut breaks = vec![pieces[0].0];
        let mut values = Vec::new();
        for (_, hi, v) in pieces {
            match values.last() {
                Some(last) if *last == v => {
                    *breaks.last_mut().unwrap() = hi;
                }
                _ => {
                    values.push(v);
                    breaks.push(hi);
                }
            }
        }
        StepFunction { breaks, values }
    }
}

impl PartialEq for StepFunction {
    /// Equality of the represented functions: canonical forms match exactly.
    fn eq(&self, other: &Self) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        (a.values.is_empty() && b.values.is_empty())
            || (a.breaks == b.breaks && a.values == b.values)
    }
}

/// Distribution function d(λ) = |{ |f| > λ }| on [0, ∞), a non-increasing
/// step function vanishing beyond max |f|.
pub fn distribution_function(s: &WeightedSamples) -> StepFunction {
    let levels = s.descending_levels();
    if levels.is_empty() {
        return StepFunction::zero();
    }
    // Ascending λ-breaks: 0, v_m, …, v_1; d = cum_k on [v_{k+1}, v_k).
    let mut breaks = Vec::with_capacity(levels.len() + 1);
    breaks.push(0.0);
    breaks.extend(levels.iter().rev().map(|(v, _)| *v));
    let values: Vec<f64> = levels.iter().rev().map(|(_, c)| *c).collect();
    StepFunction { breaks, values }
}

/// Non-increasing rearrangement f*(t) = inf { λ ≥ 0 : d(λ) ≤ t } on
/// [0, total measure); equals level v_k on [cum_{k-1}, cum_k).
pub fn rearrangement(s: &WeightedSamples) -> StepFunction {
    let levels = s.descending_levels();
    if levels.is_empty() {
        return StepFunction::zero();
    }
    let mut breaks = Vec::with_capacity(levels.len() + 1);
    breaks.push(0.0);
    breaks.extend(levels.iter().map(|(_, c)| *c));
    let values: Vec<f64> = levels.iter().map(|(v, _)| *v).collect();
    StepFunction { breaks, values }
}

/// Distribution function of a non-negative step function. For non-increasing
/// input (a rearrangement) the superlevel measures are read directly off the
/// breaks, so `distribution_of_step(rearrangement(s))` is bit-for-bit equal
/// to `distribution_function(s)`.
pub fn distribution_of_step(f: &StepFunction) -> StepFunction {
    let nonincreasing = f.values.windows(2).all(|w| w[0] >= w[1]);
    if nonincreasing && f.values.iter().all(|v| *v > 0.0) && !f.values.is_empty() {
        let t0 = f.breaks[0];
        let mut levels: Vec<(f64, f64)> = Vec::with_capacity(f.values.len());
        for (k, v) in f.values.iter().enumerate() {
            let cum = if t0 == 0.0 { f.breaks[k + 1] } else { f.breaks[k + 1] - t0 };
            match levels.last_mut() {
                Some((lv, lc)) if *lv == *v => *lc = cum,
                _ => levels.push((*v, cum)),
            }
        }
        let mut breaks = Vec::with_capacity(levels.len() + 1);
        breaks.push(0.0);
        breaks.extend(levels.iter().rev().map(|(v, _)| *v));
        let values: Vec<f64> = levels.iter().rev().map(|(_, c)| *c).collect();
        return StepFunction { breaks, values };
    }
    let samples = WeightedSamples::from_pairs(
        f.values
            .iter()
            .zip(f.breaks.windows(2))
            .map(|(v, w)| (*v, w[1] - w[0])),
    )
    .expect("step widths are positive");
    distribution_function(&samples)
}

/// L^{p,1} norm by the distribution-function formula ∫_0^∞ d(λ)^{1/p} dλ,
/// an exact step sum. Requires p > 1; for p = 1 the space collapses to L¹,
/// see [`l1_norm`] / [`lorentz_or_l1_norm`].
pub fn lorentz_norm(s: &WeightedSamples, p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidExponent(p, "Lorentz norm needs p > 1"));
    }
    let d = distribution_function(s);
    Ok(d.integral_of(|v| v.powf(1.0 / p)))
}

/// Same norm through the rearrangement formula
/// (1/p) ∫_0^∞ t^{1/p - 1} f*(t) dt, summed in closed form per step as
/// Σ f*_k (t_k^{1/p} - t_{k-1}^{1/p}). Agrees with [`lorentz_norm`] to
/// rounding; both are exposed so the identity stays checkable from outside.
pub fn lorentz_norm_rearranged(s: &WeightedSamples, p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidExponent(p, "Lorentz norm needs p > 1"));
    }
    let f = rearrangement(s);
    let inv_p = 1.0 / p;
    let mut acc = 0.0;
    for (v, w) in f.values.iter().zip(f.breaks.windows(2)) {
        acc += v * (w[1].powf(inv_p) - w[0].powf(inv_p));
    }
    Ok(acc)
}

/// Exact ∫ |f|.
pub fn l1_norm(s: &WeightedSamples) -> f64 {
    s.values
        .iter()
        .zip(&s.weights)
        .map(|(v, w)| v.abs() * w)
        .sum()
}

/// ‖·‖_{L^{p,1}} for p > 1, ‖·‖_{L¹} for p = 1 (the two coincide as limits:
/// ∫ d(λ) dλ = ∫ |f| by the layer-cake identity).
pub fn lorentz_or_l1_norm(s: &WeightedSamples, p: f64) -> Result<f64> {
    if p == 1.0 {
        Ok(l1_norm(s))
    } else {
        lorentz_norm(s, p)
    }
}

/// Which functional measures the mass a small set can carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulusMode {
    /// sup over sets of measure δ of ∫_E |f| = ∫_0^δ f*(t) dt.
    L1,
    /// sup over sets of measure δ of ‖f‖_{L^{p,1}(E)}
    /// = ∫_0^∞ min(d(λ), δ)^{1/p} dλ (the worst set is a superlevel set).
    Lorentz(f64),
}

/// Equi-integrability modulus at budget δ ∈ (0, total measure].
pub fn equiintegrability_modulus(s: &WeightedSamples, delta: f64, mode: ModulusMode) -> Result<f64> {
    let total = s.total_measure();
    if !(delta > 0.0 && delta <= total * (1.0 + 1e-12)) || !delta.is_finite() {
        return Err(Error::InvalidDelta { delta, total });
    }
    match mode {
        ModulusMode::L1 => {
            let f = rearrangement(s);
            let mut acc = 0.0;
            for (v, w) in f.values.iter().zip(f.breaks.windows(2)) {
                if w[0] >= delta {
                    break;
                }
                acc += v * (w[1].min(delta) - w[0]);
            }
            Ok(acc)
        }
        ModulusMode::Lorentz(p) => {
            if !p.is_finite() || p < 1.0 {
                return Err(Error::InvalidExponent(p, "Lorentz modulus needs p ≥ 1"));
            }
            let d = distribution_function(s);
            Ok(d.integral_of(|v| v.min(delta).powf(1.0 / p)))
        }
    }
}
