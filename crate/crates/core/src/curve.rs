//! Exact piecewise-linear curves: rate curves built from a distribution and a
//! per-score weight, their inverses, linear combinations, and concave
//! maximization by breakpoint scan.

use crate::error::{Error, Result};
use crate::model::{Score, ScoreDistribution};

/// Breakpoints closer than this are merged when curves are combined.
pub const MERGE_TOLERANCE: f64 = 1e-13;
/// Slack allowed when evaluating slightly outside the domain.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;
/// Slopes within this of zero count as flat.
pub const SLOPE_TOLERANCE: f64 = 1e-12;

/// Continuous piecewise-linear function on `[xs[0], xs[n]]`.
///
/// Slopes are stored explicitly (not recomputed from the values) so that
/// one-sided derivatives stay exact even on very short segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    scores: Option<Vec<Score>>,
}

/// Maximizer set of a concave curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxInterval {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl PiecewiseLinearCurve {
    /// Builds a curve from breakpoints, values and per-segment slopes.
    pub fn from_parts(xs: Vec<f64>, ys: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || ys.len() != xs.len() || slopes.len() + 1 != xs.len() {
            return Err(Error::InvalidInput(format!(
                "curve needs n+1 breakpoints/values and n slopes (got {}, {}, {})",
                xs.len(),
                ys.len(),
                slopes.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("curve breakpoints must be strictly increasing".into()));
        }
        Ok(Self { xs, ys, slopes, scores: None })
    }

    /// Linear interpolation through points with strictly increasing `xs`.
    pub fn from_points(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidInput("need at least two points".into()));
        }
        let slopes = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();
        Self::from_parts(xs, ys, slopes)
    }

    /// `beta -> offset + <weight, pmf . r^{-1}(beta)>` on `[0, 1]`.
    ///
    /// Segments run from `beta = 0` upward and admit the highest scores
    /// first; zero-mass scores contribute no segment.
    pub fn rate_curve(dist: &ScoreDistribution, weight: &[f64], offset: f64) -> Result<Self> {
        if weight.len() != dist.len() {
            return Err(Error::GridMismatch { expected: dist.len(), got: weight.len() });
        }
        let mut xs = vec![0.0];
        let mut ys = vec![offset];
        let mut slopes = Vec::new();
        let mut scores = Vec::new();
        let mut acc = 0.0;
        for c in dist.support_desc() {
            acc += dist.mass(c) * weight[c - 1];
            xs.push(dist.tail(c));
            ys.push(offset + acc);
            slopes.push(weight[c - 1]);
            scores.push(c);
        }
        let mut curve = Self::from_parts(xs, ys, slopes)?;
        curve.scores = Some(scores);
        Ok(curve)
    }

    /// `t -> offset + <value, pmf . r^{-1}(T^{-1}(t))>` where
    /// `T(beta) = <weight, pmf . r^{-1}(beta)>`, on `[0, <pmf, weight>]`.
    /// Requires `weight > 0` on the support.
    pub fn transferred_rate_curve(
        dist: &ScoreDistribution,
        weight: &[f64],
        value: &[f64],
        offset: f64,
    ) -> Result<Self> {
        if weight.len() != dist.len() || value.len() != dist.len() {
            return Err(Error::GridMismatch { expected: dist.len(), got: weight.len().min(value.len()) });
        }
        let mut xs = vec![0.0];
        let mut ys = vec![offset];
        let mut slopes = Vec::new();
        let mut scores = Vec::new();
        let (mut t, mut acc) = (0.0, 0.0);
        for c in dist.support_desc() {
            let w = weight[c - 1];
            if !(w > 0.0) {
                return Err(Error::Precondition(format!("constraint weight at score {c} is {w}, must be positive")));
            }
            t += dist.mass(c) * w;
            acc += dist.mass(c) * value[c - 1];
            xs.push(t);
            ys.push(offset + acc);
            slopes.push(value[c - 1] / w);
            scores.push(c);
        }
        let mut curve = Self::from_parts(xs, ys, slopes)?;
        curve.scores = Some(scores);
        Ok(curve)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Score generating each segment, for curves built from a distribution.
    pub fn segment_scores(&self) -> Option<&[Score]> {
        self.scores.as_deref()
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn num_segments(&self) -> usize {
        self.slopes.len()
    }

    fn clamp_domain(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < self.x_min() - DOMAIN_TOLERANCE || x > self.x_max() + DOMAIN_TOLERANCE {
            return Err(Error::OutOfDomain { what: "curve argument", value: x });
        }
        Ok(x.clamp(self.x_min(), self.x_max()))
    }

    /// Index `k` with `xs[k] <= x < xs[k+1]` (last segment at the right end).
    fn segment_at(&self, x: f64) -> usize {
        let k = self.xs.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.slopes.len() - 1)
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let x = self.clamp_domain(x)?;
        let k = self.segment_at(x);
        if x == self.xs[k + 1] {
            return Ok(self.ys[k + 1]);
        }
        Ok(self.ys[k] + self.slopes[k] * (x - self.xs[k]))
    }

    /// Like [`evaluate`](Self::evaluate), but returns the stored value when
    /// `x` lies within `tol` of a breakpoint.
    pub fn evaluate_snapped(&self, x: f64, tol: f64) -> Result<f64> {
        let x = self.clamp_domain(x)?;
        let k = self.xs.partition_point(|&b| b < x);
        for j in [k.saturating_sub(1), k.min(self.xs.len() - 1)] {
            if (self.xs[j] - x).abs() <= tol {
                return Ok(self.ys[j]);
            }
        }
        self.evaluate(x)
    }

    /// Slope just to the right of `x` (the last slope at the right end).
    pub fn right_slope(&self, x: f64) -> Result<f64> {
        let x = self.clamp_domain(x)?;
        Ok(self.slopes[self.segment_at(x)])
    }

    /// Slope just to the left of `x` (the first slope at the left end).
    pub fn left_slope(&self, x: f64) -> Result<f64> {
        let x = self.clamp_domain(x)?;
        let k = self.xs.partition_point(|&b| b < x);
        Ok(self.slopes[k.saturating_sub(1).min(self.slopes.len() - 1)])
    }

    /// Score of the segment to the right of `x`, if this is a rate curve.
    pub fn right_score(&self, x: f64) -> Result<Option<Score>> {
        let x = self.clamp_domain(x)?;
        Ok(self.scores.as_ref().map(|s| s[self.segment_at(x)]))
    }

    /// Score of the segment to the left of `x`, if this is a rate curve.
    pub fn left_score(&self, x: f64) -> Result<Option<Score>> {
        let x = self.clamp_domain(x)?;
        let k = self.xs.partition_point(|&b| b < x);
        Ok(self.scores.as_ref().map(|s| s[k.saturating_sub(1).min(s.len() - 1)]))
    }

    /// Errors with the first place the slope increases by more than `tol`.
    pub fn check_concave(&self, tol: f64) -> Result<()> {
        for k in 1..self.slopes.len() {
            let rise = self.slopes[k] - self.slopes[k - 1];
            if rise > tol {
                return Err(Error::NotConcave { at: self.xs[k], rise });
            }
        }
        Ok(())
    }

    pub fn is_concave(&self, tol: f64) -> bool {
        self.check_concave(tol).is_ok()
    }

    /// Maximizer interval of a concave curve, treating slopes within `tol`
    /// of zero as flat. Concavity is assumed, not checked.
    pub fn argmax(&self, tol: f64) -> MaxInterval {
        let lo = match self.slopes.iter().position(|&s| s <= tol) {
            Some(k) => self.xs[k],
            None => self.x_max(),
        };
        let hi = match self.slopes.iter().rposition(|&s| s >= -tol) {
            Some(k) => self.xs[k + 1],
            None => self.x_min(),
        };
        let hi = hi.max(lo);
        let value = self.evaluate(lo).expect("lo is a breakpoint");
        MaxInterval { lo, hi, value }
    }

    /// Maximum value over the breakpoints (exact for any piecewise-linear curve).
    pub fn max_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Inverse of a strictly increasing curve.
    pub fn inverse(&self) -> Result<Self> {
        if self.slopes.iter().any(|&s| !(s > 0.0)) || self.ys.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("curve is not strictly increasing".into()));
        }
        let mut inv =
            Self::from_parts(self.ys.clone(), self.xs.clone(), self.slopes.iter().map(|s| 1.0 / s).collect())?;
        inv.scores = self.scores.clone();
        Ok(inv)
    }

    /// `x -> sum_j coef_j * curve_j(x - shift_j)` on `[lo, hi]`, with the
    /// union of all breakpoints that fall strictly inside.
    pub fn combine(terms: &[(f64, &PiecewiseLinearCurve, f64)], lo: f64, hi: f64) -> Result<Self> {
        if terms.is_empty() || !(hi > lo) {
            return Err(Error::InvalidInput("combine needs terms and a non-empty domain".into()));
        }
        let mut pts: Vec<f64> = terms
            .iter()
            .flat_map(|(_, c, shift)| c.xs.iter().map(move |x| x + shift))
            .filter(|&x| x > lo + MERGE_TOLERANCE && x < hi - MERGE_TOLERANCE)
            .collect();
        pts.sort_by(f64::total_cmp);
        let mut xs = Vec::with_capacity(pts.len() + 2);
        xs.push(lo);
        for p in pts {
            if p - xs.last().unwrap() > MERGE_TOLERANCE {
                xs.push(p);
            }
        }
        xs.push(hi);

        let mut ys = Vec::with_capacity(xs.len());
        for &x in &xs {
            let mut y = 0.0;
            for (coef, c, shift) in terms {
                y += coef * c.evaluate_snapped(x - shift, MERGE_TOLERANCE)?;
            }
            ys.push(y);
        }
        let mut slopes = Vec::with_capacity(xs.len() - 1);
        for w in xs.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut s = 0.0;
            for (coef, c, shift) in terms {
                s += coef * c.right_slope(mid - shift)?;
            }
            slopes.push(s);
        }
        Self::from_parts(xs, ys, slopes)
    }

    /// Restriction to `[lo, hi]` (which must lie inside the domain).
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let mut r = Self::combine(&[(1.0, self, 0.0)], lo, hi)?;
        if let Some(scores) = &self.scores {
            let mut out = Vec::with_capacity(r.slopes.len());
            for w in r.xs.windows(2) {
                out.push(scores[self.segment_at(0.5 * (w[0] + w[1]))]);
            }
            r.scores = Some(out);
        }
        Ok(r)
    }

    /// `s -> self(-s)`.
    pub fn reflect(&self) -> Self {
        Self {
            xs: self.xs.iter().rev().map(|x| -x).collect(),
            ys: self.ys.iter().rev().copied().collect(),
            slopes: self.slopes.iter().rev().map(|s| -s).collect(),
            scores: self.scores.as_ref().map(|s| s.iter().rev().copied().collect()),
        }
    }

    /// `x -> factor * self(x)`.
    pub fn scale(&self, factor: f64) -> Self {
        Self {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|y| y * factor).collect(),
            slopes: self.slopes.iter().map(|s| s * factor).collect(),
            scores: self.scores.clone(),
        }
    }

    /// Sup-convolution `x -> max_{a + b = x} self(a) + other(b)` of two
    /// concave curves: segments of both merged in order of decreasing slope.
    pub fn sup_convolve(&self, other: &Self) -> Result<Self> {
        let mut xs = vec![self.x_min() + other.x_min()];
        let mut ys = vec![self.ys[0] + other.ys[0]];
        let mut slopes = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.slopes.len() || j < other.slopes.len() {
            let take_self = j >= other.slopes.len() || (i < self.slopes.len() && self.slopes[i] >= other.slopes[j]);
            let s = if take_self {
                i += 1;
                self.slopes[i - 1]
            } else {
                j += 1;
                other.slopes[j - 1]
            };
            // corner (i, j) sits at the sum of the two inputs' corners; summing
            // directly avoids drift from accumulating segment lengths
            let x = self.xs[i] + other.xs[j];
            let y = self.ys[i] + other.ys[j];
            // consecutive equal slopes fuse into one segment
            if slopes.last() == Some(&s) {
                *xs.last_mut().unwrap() = x;
                *ys.last_mut().unwrap() = y;
            } else {
                xs.push(x);
                ys.push(y);
                slopes.push(s);
            }
        }
        Self::from_parts(xs, ys, slopes)
    }
}
