//! Finite unions of disjoint closed intervals on the line, used for kept /
//! removed radius sets. All operations keep the components sorted and merged.

/// Union of disjoint intervals [a, b] with a ≤ b, sorted by left endpoint.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    parts: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn single(a: f64, b: f64) -> Self {
        let mut s = IntervalSet::empty();
        s.push(a, b);
        s
    }

    pub fn from_parts(parts: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut s = IntervalSet::empty();
        for (a, b) in parts {
            s.push(a, b);
        }
        s
    }

    /// Insert an interval, merging overlaps and adjacencies.
    pub fn push(&mut self, a: f64, b: f64) {
        if a.is_nan() || b.is_nan() || b <= a {
            return;
        }
        let mut merged = Vec::with_capacity(self.parts.len() + 1);
        let mut lo = a;
        let mut hi = b;
        let mut placed = false;
        for &(pa, pb) in &self.parts {
            if pb < lo - 1e-15 {
                merged.push((pa, pb));
            } else if pa > hi + 1e-15 {
                if !placed {
                    merged.push((lo, hi));
                    placed = true;
                }
                merged.push((pa, pb));
            } else {
                lo = lo.min(pa);
                hi = hi.max(pb);
            }
        }
        if !placed {
            merged.push((lo, hi));
        }
        merged.sort_by(|x, y| x.0.total_cmp(&y.0));
        self.parts = merged;
    }

    pub fn parts(&self) -> &[(f64, f64)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Intersection with [a, b].
    pub fn clip(&self, a: f64, b: f64) -> IntervalSet {
        let mut out = IntervalSet::empty();
        for &(pa, pb) in &self.parts {
            let lo = pa.max(a);
            let hi = pb.min(b);
            if hi > lo {
                out.push(lo, hi);
            }
        }
        out
    }

    /// Complement within [a, b].
    pub fn complement_in(&self, a: f64, b: f64) -> IntervalSet {
        let clipped = self.clip(a, b);
        let mut out = IntervalSet::empty();
        let mut cursor = a;
        for &(pa, pb) in &clipped.parts {
            if pa > cursor {
                out.push(cursor, pa);
            }
            cursor = cursor.max(pb);
        }
        if cursor < b {
            out.push(cursor, b);
        }
        out
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = IntervalSet::empty();
        for &(a, b) in &self.parts {
            for &(c, d) in &other.parts {
                let lo = a.max(c);
                let hi = b.min(d);
                if hi > lo {
                    out.push(lo, hi);
                }
            }
        }
        out
    }
}
