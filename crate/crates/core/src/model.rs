//! Score grids, group distributions, selection policies, and the threshold
//! machinery that maps between policies and selection rates.
//!
//! Scores are 1-based (`1..=C`) everywhere in the public API.

use crate::error::{Error, Result};

/// Tolerance for "sums to one" after construction.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Inputs whose mass is within this of one are renormalized; beyond it they are rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

/// A 1-based score index.
pub type Score = usize;

fn check_rate(beta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { what: "selection rate", value: beta })
    }
}

/// Ordered, finite score grid with optional display labels (default `1..=C`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    labels: Vec<f64>,
}

impl ScoreGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidInput("score grid must be non-empty".into()));
        }
        Ok(Self { labels: (1..=size).map(|x| x as f64).collect() })
    }

    /// Grid whose scores carry the given strictly increasing labels.
    pub fn with_labels(labels: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("score grid must be non-empty".into()));
        }
        if labels.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidInput("score labels must be finite".into()));
        }
        if labels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("score labels must be strictly increasing".into()));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, score: Score) -> f64 {
        self.labels[score - 1]
    }
}

/// Probability mass function over a score grid, with cached upper tails.
///
/// `tail(c)` is the mass at scores `>= c`; `tail(C + 1) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDistribution {
    pmf: Vec<f64>,
    tails: Vec<f64>,
}

impl ScoreDistribution {
    /// Validates and (if needed) renormalizes a pmf.
    ///
    /// Masses summing to within [`RENORMALIZE_TOLERANCE`] of one are rescaled;
    /// anything further off is an error.
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidDistribution("empty pmf".into()));
        }
        if let Some(i) = pmf.iter().position(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "mass at score {} is {} (must be finite and non-negative)",
                i + 1,
                pmf[i]
            )));
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("masses sum to {sum}, not 1")));
        }
        let pmf = if sum != 1.0 {
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                log::warn!("renormalizing pmf that sums to {sum}");
            }
            pmf.into_iter().map(|p| p / sum).collect()
        } else {
            pmf
        };
        let tails = Self::build_tails(&pmf);
        Ok(Self { pmf, tails })
    }

    fn build_tails(pmf: &[f64]) -> Vec<f64> {
        let c = pmf.len();
        let mut tails = vec![0.0; c + 1];
        for i in (0..c).rev() {
            tails[i] = (tails[i + 1] + pmf[i]).min(1.0);
        }
        // Everything at or below the lowest supported score is exactly one so
        // that rate curves end at 1 without rounding drift.
        let lowest = pmf.iter().position(|&p| p > 0.0).unwrap_or(0);
        for t in &mut tails[..=lowest] {
            *t = 1.0;
        }
        tails
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn mass(&self, score: Score) -> f64 {
        self.pmf[score - 1]
    }

    /// Mass at scores `>= score`, for `score` in `1..=C+1`.
    pub fn tail(&self, score: Score) -> f64 {
        self.tails[score - 1]
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
    }

    /// Positive-mass scores from the top of the grid down.
    pub fn support_desc(&self) -> impl Iterator<Item = Score> + '_ {
        (1..=self.len()).rev().filter(move |&c| self.pmf[c - 1] > 0.0)
    }

    /// Right-continuous upper quantile: the largest `c` with `tail(c) > beta`.
    /// Extended by `quantile(1) = 1`.
    pub fn quantile(&self, beta: f64) -> Result<Score> {
        check_rate(beta)?;
        if beta >= 1.0 {
            return Ok(1);
        }
        Ok(self.tails[..self.len()].partition_point(|&t| t > beta))
    }

    /// Left-continuous variant: the largest `c` with `tail(c) >= beta`.
    /// `quantile_plus(0) = C`.
    pub fn quantile_plus(&self, beta: f64) -> Result<Score> {
        check_rate(beta)?;
        Ok(self.tails[..self.len()].partition_point(|&t| t >= beta).max(1))
    }

    /// Canonical threshold policy with selection rate `beta`.
    ///
    /// Canonical means `gamma = 1` whenever the cutoff score carries no mass,
    /// and a cutoff `c > 1` with `gamma = 1` has mass at `c - 1`. The empty
    /// policy is `(C, 0)` when the top score has mass.
    pub fn inverse_selection_rate(&self, beta: f64) -> Result<ThresholdPolicy> {
        let size = self.len();
        let c = self.quantile(beta)?;
        if beta >= 1.0 {
            return Ok(ThresholdPolicy { size, cutoff: 1, gamma: 1.0 });
        }
        let upper = self.tails[c - 1];
        let lower = self.tails[c];
        let gamma = ((beta - lower) / (upper - lower)).clamp(0.0, 1.0);
        if gamma == 0.0 && c < size {
            Ok(ThresholdPolicy { size, cutoff: c + 1, gamma: 1.0 })
        } else {
            Ok(ThresholdPolicy { size, cutoff: c, gamma })
        }
    }

    /// `sum_x pmf(x) * tau(x)`.
    pub fn selection_rate(&self, policy: &Policy) -> Result<f64> {
        selection_rate(self, policy)
    }
}

/// Per-score success probability, assumed non-decreasing in score.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessCurve(Vec<f64>);

impl SuccessCurve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("success curve must be non-empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("success probability {v} outside [0, 1]")));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            log::warn!("success curve is not non-decreasing in score");
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, score: Score) -> f64 {
        self.0[score - 1]
    }

    /// Affine in the score index (constant second differences of zero).
    pub fn is_affine(&self, tol: f64) -> bool {
        self.0.windows(3).all(|w| (w[2] - 2.0 * w[1] + w[0]).abs() <= tol)
    }
}

/// Population share of a group, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Proportion(f64);

impl Proportion {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::OutOfDomain { what: "group proportion", value })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

/// One demographic group: its score distribution, success curve and share.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub name: String,
    pub dist: ScoreDistribution,
    pub rho: SuccessCurve,
    pub proportion: Proportion,
}

impl GroupSpec {
    pub fn new(
        name: impl Into<String>,
        dist: ScoreDistribution,
        rho: SuccessCurve,
        proportion: Proportion,
    ) -> Result<Self> {
        if dist.len() != rho.len() {
            return Err(Error::GridMismatch { expected: dist.len(), got: rho.len() });
        }
        Ok(Self { name: name.into(), dist, rho, proportion })
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Expected success probability `<rho, pi>`.
    pub fn mean_success(&self) -> f64 {
        self.dist.pmf().iter().zip(self.rho.values()).map(|(p, r)| p * r).sum()
    }
}

/// Randomized selection policy: probability of selecting each score.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy(Vec<f64>);

impl Policy {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("policy value {v} outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn zeros(size: usize) -> Self {
        Self(vec![0.0; size])
    }

    pub fn ones(size: usize) -> Self {
        Self(vec![1.0; size])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, score: Score) -> f64 {
        self.0[score - 1]
    }

    /// Whether the policy has threshold shape on the support of `dist`:
    /// zeros, then at most one fractional value, then ones (ascending score).
    pub fn is_threshold_on(&self, dist: &ScoreDistribution, tol: f64) -> bool {
        let mut stage = 0; // 0: zeros, 1: seen fractional, 2: ones
        for c in 1..=dist.len() {
            if dist.mass(c) == 0.0 {
                continue;
            }
            let v = self.0[c - 1];
            let kind = if v <= tol {
                0
            } else if v >= 1.0 - tol {
                2
            } else {
                1
            };
            if kind < stage || (kind == 1 && stage == 1) {
                return false;
            }
            stage = kind;
        }
        true
    }
}

/// `tau_{c,gamma}`: select all scores above `c`, score `c` with probability `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy {
    size: usize,
    cutoff: Score,
    gamma: f64,
}

impl ThresholdPolicy {
    pub fn new(size: usize, cutoff: Score, gamma: f64) -> Result<Self> {
        if cutoff == 0 || cutoff > size {
            return Err(Error::InvalidInput(format!("cutoff {cutoff} outside 1..={size}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidInput(format!("gamma {gamma} outside [0, 1]")));
        }
        Ok(Self { size, cutoff, gamma })
    }

    pub fn cutoff(&self) -> Score {
        self.cutoff
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn value_at(&self, score: Score) -> f64 {
        use std::cmp::Ordering::*;
        match score.cmp(&self.cutoff) {
            Greater => 1.0,
            Equal => self.gamma,
            Less => 0.0,
        }
    }

    pub fn to_policy(&self) -> Policy {
        Policy((1..=self.size).map(|x| self.value_at(x)).collect())
    }
}

/// `r(tau) = sum_x pmf(x) tau(x)`.
pub fn selection_rate(dist: &ScoreDistribution, policy: &Policy) -> Result<f64> {
    if dist.len() != policy.len() {
        return Err(Error::GridMismatch { expected: dist.len(), got: policy.len() });
    }
    Ok(dist.pmf().iter().zip(policy.values()).map(|(p, t)| p * t).sum())
}

/// Policies agree on every score carrying positive mass.
pub fn policies_equivalent(dist: &ScoreDistribution, a: &Policy, b: &Policy) -> Result<bool> {
    policies_equivalent_within(dist, a, b, 0.0)
}

/// As [`policies_equivalent`], treating values within `tol` as equal.
pub fn policies_equivalent_within(dist: &ScoreDistribution, a: &Policy, b: &Policy, tol: f64) -> Result<bool> {
    for p in [a, b] {
        if p.len() != dist.len() {
            return Err(Error::GridMismatch { expected: dist.len(), got: p.len() });
        }
    }
    Ok(dist.pmf().iter().zip(a.values().iter().zip(b.values())).all(|(m, (x, y))| *m == 0.0 || (x - y).abs() <= tol))
}

/// Pointwise institution assumption: positive expected utility implies
/// positive expected score change.
pub fn check_institution_assumption(utility: &[f64], delta: &[f64]) -> Result<bool> {
    if utility.len() != delta.len() {
        return Err(Error::GridMismatch { expected: utility.len(), got: delta.len() });
    }
    Ok(utility.iter().zip(delta).all(|(u, d)| *u <= 0.0 || *d > 0.0))
}

/// Ratio form of the institution assumption for affine utility and score
/// change: `loss/gain < penalty/increase`.
pub fn affine_ratio_test(utility_gain: f64, utility_loss: f64, score_gain: f64, score_penalty: f64) -> Result<bool> {
    if utility_gain <= 0.0 || score_gain <= 0.0 {
        return Err(Error::InvalidInput("ratio test needs positive utility gain and positive score gain".into()));
    }
    Ok(utility_loss / utility_gain < score_penalty / score_gain)
}

/// Strength of a stochastic-dominance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    Strict,
    Weak,
}

/// Whether `upper` dominates `lower`: `sum_{x>a} lower(x)` is below
/// `sum_{x>a} upper(x)` for every `a >= 1`.
///
/// In strict mode, cut points where both tails are exactly zero are skipped.
pub fn cdf_dominates(lower: &ScoreDistribution, upper: &ScoreDistribution, mode: Dominance) -> Result<bool> {
    if lower.len() != upper.len() {
        return Err(Error::GridMismatch { expected: lower.len(), got: upper.len() });
    }
    const WEAK_TOL: f64 = 1e-12;
    Ok((2..=lower.len()).all(|c| {
        let (l, u) = (lower.tail(c), upper.tail(c));
        match mode {
            Dominance::Weak => l <= u + WEAK_TOL,
            Dominance::Strict => l < u || (l == 0.0 && u == 0.0),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1() -> ScoreDistribution {
        ScoreDistribution::new(vec![0.5, 0.3, 0.2]).unwrap()
    }

    #[test]
    fn selection_rate_of_partial_policy() {
        let tau = Policy::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert!((selection_rate(&s1(), &tau).unwrap() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn quantiles_on_small_grid() {
        let d = s1();
        assert_eq!(d.quantile(0.2).unwrap(), 2);
        assert_eq!(d.quantile_plus(0.2).unwrap(), 3);
        assert_eq!(d.quantile(0.0).unwrap(), 3);
        assert_eq!(d.quantile(1.0).unwrap(), 1);
        assert_eq!(d.quantile_plus(0.0).unwrap(), 3);
        let u = ScoreDistribution::new(vec![0.25; 4]).unwrap();
        assert_eq!(u.quantile(0.5).unwrap(), 2);
        assert_eq!(u.quantile_plus(0.5).unwrap(), 3);
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        assert!(matches!(s1().quantile(1.5), Err(Error::OutOfDomain { .. })));
        assert!(s1().quantile_plus(-0.1).is_err());
        assert!(s1().quantile(f64::NAN).is_err());
    }

    #[test]
    fn inverse_selection_rate_examples() {
        let d = s1();
        let p = d.inverse_selection_rate(0.35).unwrap();
        assert_eq!(p.cutoff(), 2);
        assert!((p.gamma() - 0.5).abs() < 1e-15);
        let p = d.inverse_selection_rate(1.0).unwrap();
        assert_eq!((p.cutoff(), p.gamma()), (1, 1.0));
        let p = d.inverse_selection_rate(0.2).unwrap();
        assert_eq!((p.cutoff(), p.gamma()), (3, 1.0));
        let p = d.inverse_selection_rate(0.0).unwrap();
        assert_eq!((p.cutoff(), p.gamma()), (3, 0.0));
    }

    #[test]
    fn inverse_selection_rate_skips_empty_scores() {
        let d = ScoreDistribution::new(vec![0.4, 0.0, 0.6, 0.0]).unwrap();
        // top score empty: the empty policy is (4, 1) and selects nothing
        let p = d.inverse_selection_rate(0.0).unwrap();
        assert_eq!((p.cutoff(), p.gamma()), (4, 1.0));
        let p = d.inverse_selection_rate(0.6).unwrap();
        assert_eq!((p.cutoff(), p.gamma()), (2, 1.0));
        assert!((d.selection_rate(&p.to_policy()).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn renormalizes_small_drift_and_rejects_large() {
        let d = ScoreDistribution::new(vec![0.5, 0.5 + 5e-7]).unwrap();
        assert!((d.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(ScoreDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ScoreDistribution::new(vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn tails_end_at_one() {
        let d = ScoreDistribution::new(vec![0.0, 0.1, 0.2, 0.7]).unwrap();
        assert_eq!(d.tail(1), 1.0);
        assert_eq!(d.tail(2), 1.0);
        assert_eq!(d.tail(5), 0.0);
    }

    #[test]
    fn equivalence_ignores_empty_scores() {
        let d = ScoreDistribution::new(vec![0.5, 0.0, 0.5]).unwrap();
        let a = Policy::new(vec![0.0, 1.0, 1.0]).unwrap();
        let b = Policy::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(policies_equivalent(&d, &a, &b).unwrap());
        let c = Policy::new(vec![0.1, 0.0, 1.0]).unwrap();
        assert!(!policies_equivalent(&d, &a, &c).unwrap());
    }

    #[test]
    fn institution_assumption_ratio_examples() {
        assert!(affine_ratio_test(1.0, -4.0, 75.0, -150.0).unwrap());
        assert!(!affine_ratio_test(1.0, -1.0, 1.0, -2.0).unwrap());
        assert!(check_institution_assumption(&[-1.0, 0.5], &[-2.0, 0.1]).unwrap());
        assert!(!check_institution_assumption(&[-1.0, 0.5], &[-2.0, 0.0]).unwrap());
    }

    #[test]
    fn dominance_examples() {
        let a = s1();
        let b = ScoreDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(cdf_dominates(&a, &b, Dominance::Strict).unwrap());
        assert!(!cdf_dominates(&b, &a, Dominance::Weak).unwrap());
        assert!(!cdf_dominates(&a, &a, Dominance::Strict).unwrap());
        assert!(cdf_dominates(&a, &a, Dominance::Weak).unwrap());
    }

    #[test]
    fn threshold_shape_detection() {
        let d = ScoreDistribution::new(vec![0.25; 4]).unwrap();
        assert!(Policy::new(vec![0.0, 0.3, 1.0, 1.0]).unwrap().is_threshold_on(&d, 0.0));
        assert!(!Policy::new(vec![0.0, 0.3, 0.5, 1.0]).unwrap().is_threshold_on(&d, 0.0));
        assert!(!Policy::new(vec![1.0, 0.0, 1.0, 1.0]).unwrap().is_threshold_on(&d, 0.0));
    }
}
