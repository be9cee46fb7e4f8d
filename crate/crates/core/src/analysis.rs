//! Interpreting selection rates through a group's outcome curve: special
//! rates, harm/improvement regimes, population-share thresholds under which
//! the fairness criteria over- or under-select, measurement error, sweeps.

use crate::curve::{PiecewiseLinearCurve, SLOPE_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{cdf_dominates, Dominance, GroupSpec, Policy, ScoreDistribution, SuccessCurve};
use crate::objectives::{outcome_curve, tpr, transfer_g, utility_curve, ConstraintWeights, Group, Instance, UtilityFn};
use crate::solvers::{
    solve, solve_demparity, solve_eqopt, solve_maxutil, superlevel_interval, Criterion, SoftPenalty, SolverResult,
};

/// Tolerance for sign decisions on outcome values.
pub const REGIME_TOLERANCE: f64 = 1e-10;
/// Two rates closer than this are treated as the same special rate.
const RATE_MATCH_TOLERANCE: f64 = 1e-12;

/// Selection rates of interest on one group's outcome curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialBetas {
    pub beta_maxutil: f64,
    /// Leftmost outcome maximizer.
    pub beta_star: f64,
    /// Every outcome maximizer.
    pub beta_star_interval: (f64, f64),
    pub max_outcome: f64,
    /// Rightmost rate with non-negative outcome.
    pub beta_zero: f64,
    /// Rate above the outcome peak with the same outcome as MaxUtil.
    pub beta_bar: f64,
    /// The outcome never turns negative; `beta_zero` is the domain end.
    pub no_interior_harm_threshold: bool,
    /// The outcome at the domain end still beats MaxUtil; `beta_bar` is the domain end.
    pub complement_beyond_domain: bool,
}

pub fn special_betas(curve: &PiecewiseLinearCurve, beta_maxutil: f64) -> Result<SpecialBetas> {
    curve.check_concave(SLOPE_TOLERANCE)?;
    let m = curve.argmax(SLOPE_TOLERANCE);
    let end = curve.x_max();
    let end_value = curve.evaluate(end)?;

    if m.value < 0.0 {
        return Err(Error::Hypothesis("outcome curve is negative everywhere; no harm threshold".into()));
    }
    let (_, beta_zero) = superlevel_interval(curve, 0.0, m.lo)?;
    let no_interior_harm_threshold = end_value > 0.0;

    let mu_value = curve.evaluate(beta_maxutil)?;
    let (beta_bar, complement_beyond_domain) = if mu_value >= m.value {
        (beta_maxutil, false)
    } else if beta_maxutil > m.hi {
        // already on the decreasing side
        (beta_maxutil, false)
    } else {
        let (_, hi) = superlevel_interval(curve, mu_value, m.lo)?;
        (hi, end_value > mu_value)
    };

    Ok(SpecialBetas {
        beta_maxutil,
        beta_star: m.lo,
        beta_star_interval: (m.lo, m.hi),
        max_outcome: m.value,
        beta_zero: if no_interior_harm_threshold { end } else { beta_zero },
        beta_bar,
        no_interior_harm_threshold,
        complement_beyond_domain,
    })
}

/// Special rates of group `g` under its own MaxUtil rate.
pub fn group_special_betas(instance: &Instance, g: Group) -> Result<SpecialBetas> {
    let mu = solve_maxutil(instance)?;
    special_betas(&outcome_curve(instance, g)?, mu.rate(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbsoluteRegime {
    ActiveHarm,
    Stagnation,
    Improvement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelativeRegime {
    RelativeHarm,
    RelativeImprovement,
    RelativeNeutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomeRegime {
    pub absolute: AbsoluteRegime,
    pub relative: RelativeRegime,
}

impl AbsoluteRegime {
    pub fn name(self) -> &'static str {
        match self {
            AbsoluteRegime::ActiveHarm => "active_harm",
            AbsoluteRegime::Stagnation => "stagnation",
            AbsoluteRegime::Improvement => "improvement",
        }
    }
}

impl RelativeRegime {
    pub fn name(self) -> &'static str {
        match self {
            RelativeRegime::RelativeHarm => "relative_harm",
            RelativeRegime::RelativeImprovement => "relative_improvement",
            RelativeRegime::RelativeNeutral => "relative_neutral",
        }
    }
}

/// Regime of an outcome value against the MaxUtil outcome.
pub fn classify_outcome(outcome: f64, maxutil_outcome: f64) -> OutcomeRegime {
    let absolute = if outcome < -REGIME_TOLERANCE {
        AbsoluteRegime::ActiveHarm
    } else if outcome > REGIME_TOLERANCE {
        AbsoluteRegime::Improvement
    } else {
        AbsoluteRegime::Stagnation
    };
    let relative = if outcome < maxutil_outcome - REGIME_TOLERANCE {
        RelativeRegime::RelativeHarm
    } else if outcome > maxutil_outcome + REGIME_TOLERANCE {
        RelativeRegime::RelativeImprovement
    } else {
        RelativeRegime::RelativeNeutral
    };
    OutcomeRegime { absolute, relative }
}

pub fn classify_regime(beta: f64, betas: &SpecialBetas, curve: &PiecewiseLinearCurve) -> Result<OutcomeRegime> {
    Ok(classify_outcome(curve.evaluate(beta)?, curve.evaluate(betas.beta_maxutil)?))
}

/// Which population-share result an interval instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corollary {
    /// Demographic parity selects A strictly between two rates.
    DemParityBetween,
    /// Equal opportunity selects A strictly between two rates.
    EqOptBetween,
    /// Demographic parity selects A above a rate.
    DemParityOverEager,
    /// Equal opportunity selects A above a rate.
    EqOptOverEager,
    /// Equal opportunity below a rate while demographic parity is above it.
    EqOptAvoidsHarm,
}

/// What the bracketed solver rate implies for group A's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Implication {
    ActiveHarm,
    RelativeHarm,
    RelativeImprovement,
    /// Equal opportunity improves while demographic parity harms.
    EqOptImprovesDemParityHarms,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedCheck {
    pub name: &'static str,
    pub holds: bool,
}

/// Closed range of group-A shares `g_A` on which a corollary's conclusion
/// holds (a sufficient condition; the endpoints themselves may be ties).
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionInterval {
    pub corollary: Corollary,
    pub lower: f64,
    pub upper: f64,
    pub beta: f64,
    pub beta_prime: Option<f64>,
    pub implication: Option<Implication>,
    pub checks: Vec<NamedCheck>,
}

impl ProportionInterval {
    pub fn contains(&self, g_a: f64) -> bool {
        g_a >= self.lower && g_a <= self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Shares `g` in `[0, 1]` for which `g a + (1 - g) b` is strictly positive,
/// as a closed range `(lo, hi)` (the root itself is a tie); `None` if empty.
fn positive_share_range(a: f64, b: f64) -> Option<(f64, f64)> {
    if a == b {
        return (b > 0.0).then_some((0.0, 1.0));
    }
    let root = b / (b - a);
    if a > b {
        (root < 1.0).then(|| (root.max(0.0), 1.0))
    } else {
        (root > 0.0).then(|| (0.0, root.min(1.0)))
    }
}

fn negative_share_range(a: f64, b: f64) -> Option<(f64, f64)> {
    positive_share_range(-a, -b)
}

fn intersect(x: Option<(f64, f64)>, y: Option<(f64, f64)>) -> Option<(f64, f64)> {
    let ((a, b), (c, d)) = (x?, y?);
    let (lo, hi) = (a.max(c), b.min(d));
    (lo < hi).then_some((lo, hi))
}

fn hypothesis(msg: String) -> Error {
    Error::Hypothesis(msg)
}

/// `u_j / w_j` at the score entering (right side, `plus = false`) or leaving
/// (left side, `plus = true`) the selection at rate `beta`.
fn marginal(instance: &Instance, g: Group, weight: Option<&[f64]>, beta: f64, plus: bool) -> Result<f64> {
    let dist = instance.dist(g);
    let x = if plus { dist.quantile_plus(beta)? } else { dist.quantile(beta)? };
    let u = instance.utility_values(g)[x - 1];
    Ok(match weight {
        Some(w) => u / w[x - 1],
        None => u,
    })
}

fn near(x: f64, y: f64) -> bool {
    (x - y).abs() <= RATE_MATCH_TOLERANCE
}

/// Shares for which demographic parity selects group A at a rate above
/// `beta`: `[0, g0]`, `g0 = 1 / (1 - u(Q_A(beta)) / u(Q_B(beta)))`.
/// Requires `beta_A^MU < beta < beta_B^MU`.
pub fn cor_dp_overeager_threshold(instance: &Instance, beta: f64) -> Result<ProportionInterval> {
    let mu = solve_maxutil(instance)?;
    let (ma, mb) = (mu.rate(Group::A), mu.rate(Group::B));
    if !(ma < beta && beta < mb) {
        return Err(hypothesis(format!("need beta_A^MU < beta < beta_B^MU, got {ma} < {beta} < {mb}")));
    }
    let a = marginal(instance, Group::A, None, beta, false)?;
    let b = marginal(instance, Group::B, None, beta, false)?;
    let (lower, upper) =
        positive_share_range(a, b).ok_or_else(|| hypothesis(format!("no share makes the rate exceed {beta}")))?;
    let betas = group_special_betas(instance, Group::A)?;
    Ok(ProportionInterval {
        corollary: Corollary::DemParityOverEager,
        lower,
        upper,
        beta,
        beta_prime: None,
        implication: over_eager_implication(beta, &betas),
        checks: vec![NamedCheck { name: "outcome_negative_at_b_maxutil_rate", holds: dp_harm_premise(instance)? }],
    })
}

fn over_eager_implication(beta: f64, betas: &SpecialBetas) -> Option<Implication> {
    if !betas.no_interior_harm_threshold && near(beta, betas.beta_zero) {
        Some(Implication::ActiveHarm)
    } else if !betas.complement_beyond_domain && near(beta, betas.beta_bar) && betas.beta_bar > betas.beta_maxutil {
        Some(Implication::RelativeHarm)
    } else {
        None
    }
}

/// Diagnostic: selecting group A at group B's MaxUtil rate harms A.
pub fn dp_harm_premise(instance: &Instance) -> Result<bool> {
    let mu = solve_maxutil(instance)?;
    Ok(outcome_curve(instance, Group::A)?.evaluate(mu.rate(Group::B))? < -REGIME_TOLERANCE)
}

/// Shares for which equal opportunity selects group A above `beta`.
/// Requires `beta > beta_A^MU` and `beta_B^MU > G(beta)`.
pub fn cor_eqopt_overeager_threshold(instance: &Instance, beta: f64) -> Result<ProportionInterval> {
    let w = ConstraintWeights::equal_opportunity(instance)?;
    let mu = solve_maxutil(instance)?;
    let (ma, mb) = (mu.rate(Group::A), mu.rate(Group::B));
    let gb = transfer_g(instance, &w, beta)?;
    if !(beta > ma && mb > gb) {
        return Err(hypothesis(format!(
            "need beta > beta_A^MU and beta_B^MU > G(beta); got beta={beta}, beta_A^MU={ma}, beta_B^MU={mb}, G(beta)={gb}"
        )));
    }
    let a = marginal(instance, Group::A, Some(&w.a), beta, false)?;
    let b = marginal(instance, Group::B, Some(&w.b), gb, false)?;
    let (lower, upper) =
        positive_share_range(a, b).ok_or_else(|| hypothesis(format!("no share makes the rate exceed {beta}")))?;
    let betas = group_special_betas(instance, Group::A)?;
    Ok(ProportionInterval {
        corollary: Corollary::EqOptOverEager,
        lower,
        upper,
        beta,
        beta_prime: None,
        implication: over_eager_implication(beta, &betas),
        checks: Vec::new(),
    })
}

/// Shares for which demographic parity, resp. equal opportunity, selects
/// group A strictly between `beta` and `beta_prime`.
pub fn cor_relative_improvement_intervals(
    instance: &Instance,
    beta: f64,
    beta_prime: f64,
) -> Result<(ProportionInterval, ProportionInterval)> {
    let mu = solve_maxutil(instance)?;
    let (ma, mb) = (mu.rate(Group::A), mu.rate(Group::B));
    let betas = group_special_betas(instance, Group::A)?;
    let bar = betas.beta_bar;
    let mut problems = Vec::new();
    if !(ma < bar) {
        problems.push(format!("beta_A^MU < beta_bar fails ({ma} vs {bar})"));
    }
    if !(mb > ma) {
        problems.push(format!("beta_B^MU > beta_A^MU fails ({mb} vs {ma})"));
    }
    if !(ma < beta && beta < beta_prime) {
        problems.push(format!("need beta_A^MU < beta < beta_prime, got {ma}, {beta}, {beta_prime}"));
    }
    if !problems.is_empty() {
        return Err(hypothesis(problems.join("; ")));
    }
    let implication = (beta_prime <= bar).then_some(Implication::RelativeImprovement);

    // demographic parity
    if !(beta < mb.min(bar)) {
        return Err(hypothesis(format!(
            "demographic parity part needs beta < min(beta_B^MU, beta_bar) = {}",
            mb.min(bar)
        )));
    }
    let above = positive_share_range(
        marginal(instance, Group::A, None, beta, false)?,
        marginal(instance, Group::B, None, beta, false)?,
    );
    let below = negative_share_range(
        marginal(instance, Group::A, None, beta_prime, true)?,
        marginal(instance, Group::B, None, beta_prime, true)?,
    );
    let (lo, hi) =
        intersect(above, below).ok_or_else(|| hypothesis("demographic parity share range is empty".into()))?;
    let dp = ProportionInterval {
        corollary: Corollary::DemParityBetween,
        lower: lo,
        upper: hi,
        beta,
        beta_prime: Some(beta_prime),
        implication,
        checks: Vec::new(),
    };

    // equal opportunity
    let w = ConstraintWeights::equal_opportunity(instance)?;
    let g_beta = transfer_g(instance, &w, beta)?;
    if !(mb > g_beta) {
        return Err(hypothesis(format!("equal opportunity part needs beta_B^MU > G(beta) ({mb} vs {g_beta})")));
    }
    let g_prime = transfer_g(instance, &w, beta_prime)?;
    let above = positive_share_range(
        marginal(instance, Group::A, Some(&w.a), beta, false)?,
        marginal(instance, Group::B, Some(&w.b), g_beta, false)?,
    );
    let below = negative_share_range(
        marginal(instance, Group::A, Some(&w.a), beta_prime, true)?,
        marginal(instance, Group::B, Some(&w.b), g_prime, true)?,
    );
    let (lo, hi) =
        intersect(above, below).ok_or_else(|| hypothesis("equal opportunity share range is empty".into()))?;
    let eo = ProportionInterval {
        corollary: Corollary::EqOptBetween,
        lower: lo,
        upper: hi,
        beta,
        beta_prime: Some(beta_prime),
        implication,
        checks: Vec::new(),
    };
    Ok((dp, eo))
}

/// `Some(k)` when `b` is `a` moved up by exactly `k > 0` scores.
pub fn translation_offset(a: &ScoreDistribution, b: &ScoreDistribution) -> Option<usize> {
    let (pa, pb) = (a.pmf(), b.pmf());
    if pa.len() != pb.len() {
        return None;
    }
    let first = |p: &[f64]| p.iter().position(|&v| v > 0.0);
    let (fa, fb) = (first(pa)?, first(pb)?);
    if fb <= fa {
        return None;
    }
    let k = fb - fa;
    let shifted = (0..pb.len()).all(|i| pb[i] == if i >= k { pa[i - k] } else { 0.0 });
    let nothing_lost = pa[pa.len() - k..].iter().all(|&v| v == 0.0);
    (shifted && nothing_lost).then_some(k)
}

/// Mean score in grid-index units (scores 1..=C).
fn index_mean(dist: &ScoreDistribution) -> f64 {
    dist.pmf().iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
}

/// Shares for which equal opportunity selects group A below `beta` while
/// demographic parity selects above it. Requires group B to be group A
/// moved up the grid, a shared affine success curve, and `beta` above the
/// mass of A strictly above its mean.
pub fn cor_avoid_harm_interval(instance: &Instance, beta: f64) -> Result<ProportionInterval> {
    let (da, db) = (instance.dist(Group::A), instance.dist(Group::B));
    if translation_offset(da, db).is_none() {
        return Err(hypothesis("group B is not group A translated up the grid".into()));
    }
    let (ra, rb) = (&instance.group(Group::A).rho, &instance.group(Group::B).rho);
    if ra.values().iter().zip(rb.values()).any(|(x, y)| (x - y).abs() > 1e-12) || !ra.is_affine(1e-12) {
        return Err(hypothesis("success curve must be shared and affine in the score".into()));
    }
    let mean_a = index_mean(da);
    let above_mean = da.tail(mean_a.floor() as usize + 1);
    if !(beta > above_mean) {
        return Err(hypothesis(format!("need beta > mass above A's mean = {above_mean}, got {beta}")));
    }
    let w = ConstraintWeights::equal_opportunity(instance)?;
    let g_beta = transfer_g(instance, &w, beta)?;
    let dp_above = positive_share_range(
        marginal(instance, Group::A, None, beta, false)?,
        marginal(instance, Group::B, None, beta, false)?,
    );
    let eo_below = negative_share_range(
        marginal(instance, Group::A, Some(&w.a), beta, true)?,
        marginal(instance, Group::B, Some(&w.b), g_beta, true)?,
    );
    let (lower, upper) =
        intersect(dp_above, eo_below).ok_or_else(|| hypothesis(format!("share range is empty at beta = {beta}")))?;

    let q_ratio = db.quantile(beta)? as f64 / da.quantile(beta)? as f64;
    let checks = vec![
        NamedCheck { name: "transfer_exceeds_rate", holds: g_beta > beta },
        NamedCheck { name: "mean_ratio_below_quantile_ratio", holds: index_mean(db) / mean_a < q_ratio },
    ];
    let betas = group_special_betas(instance, Group::A)?;
    let implication = (!betas.no_interior_harm_threshold && near(beta, betas.beta_zero))
        .then_some(Implication::EqOptImprovesDemParityHarms);
    Ok(ProportionInterval {
        corollary: Corollary::EqOptAvoidsHarm,
        lower,
        upper,
        beta,
        beta_prime: None,
        implication,
        checks,
    })
}

/// Outcome of the equal-opportunity under-selection test.
#[derive(Debug, Clone, PartialEq)]
pub struct UnderloanReport {
    /// `beta_A^MU < beta_B^MU` and `TPR_A(MU) > TPR_B(MU)`.
    pub holds: bool,
    pub tpr_maxutil: [f64; 2],
    pub beta_maxutil: [f64; 2],
    pub beta_eqopt_a: f64,
    pub beta_demparity_a: f64,
    /// `beta_A^EqOpt <= beta_A^MU <= beta_A^DP`.
    pub weak_chain: bool,
    /// `beta_A^EqOpt < beta_A^MU < beta_A^DP`.
    pub strict_chain: bool,
}

pub fn eqopt_underloan_predicate(instance: &Instance) -> Result<UnderloanReport> {
    let mu = solve_maxutil(instance)?;
    let tprs = [
        mu.group(Group::A).tpr.ok_or_else(|| Error::InvalidInput("group A has no expected successes".into()))?,
        mu.group(Group::B).tpr.ok_or_else(|| Error::InvalidInput("group B has no expected successes".into()))?,
    ];
    let rates = [mu.rate(Group::A), mu.rate(Group::B)];
    let eo = solve_eqopt(instance)?.rate(Group::A);
    let dp = solve_demparity(instance)?.rate(Group::A);
    let m = rates[0];
    Ok(UnderloanReport {
        holds: rates[0] < rates[1] && tprs[0] > tprs[1],
        tpr_maxutil: tprs,
        beta_maxutil: rates,
        beta_eqopt_a: eo,
        beta_demparity_a: dp,
        weak_chain: eo <= m && m <= dp,
        strict_chain: eo < m && m < dp,
    })
}

/// Systematic under-estimation: the score `x` is observed as `x + e(x)`,
/// `e(x) <= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementError {
    shifts: Vec<i64>,
}

impl MeasurementError {
    /// Per-score offsets; every shifted score must stay on the grid.
    pub fn new(shifts: Vec<i64>) -> Result<Self> {
        for (i, &e) in shifts.iter().enumerate() {
            if e > 0 {
                return Err(Error::InvalidInput(format!("score {} has positive offset {e}", i + 1)));
            }
            if (i as i64) + e < 0 {
                return Err(Error::InvalidInput(format!("score {} shifted by {e} leaves the grid", i + 1)));
            }
        }
        Ok(Self { shifts })
    }

    /// The same offset everywhere, stopping at the lowest score.
    pub fn uniform(size: usize, shift: i64) -> Result<Self> {
        if shift > 0 {
            return Err(Error::InvalidInput(format!("offset must be <= 0, got {shift}")));
        }
        Self::new((0..size as i64).map(|i| shift.max(-i)).collect())
    }

    pub fn identity(size: usize) -> Self {
        Self { shifts: vec![0; size] }
    }

    pub fn shifts(&self) -> &[i64] {
        &self.shifts
    }

    pub fn apply(&self, dist: &ScoreDistribution) -> Result<ScoreDistribution> {
        if dist.len() != self.shifts.len() {
            return Err(Error::GridMismatch { expected: dist.len(), got: self.shifts.len() });
        }
        let mut out = vec![0.0; dist.len()];
        for (i, (&p, &e)) in dist.pmf().iter().zip(&self.shifts).enumerate() {
            out[(i as i64 + e) as usize] += p;
        }
        ScoreDistribution::new(out)
    }
}

/// The group as the institution sees it under the error.
pub fn apply_measurement_error(group: &GroupSpec, err: &MeasurementError) -> Result<GroupSpec> {
    GroupSpec::new(group.name.clone(), err.apply(&group.dist)?, group.rho.clone(), group.proportion)
}

/// Every threshold policy has at least the true positive rate under `truth`
/// that it has under `estimate` (same success curve).
pub fn tpr_dominates(truth: &ScoreDistribution, estimate: &ScoreDistribution, rho: &SuccessCurve) -> Result<bool> {
    let c = truth.len();
    for cut in 1..=c {
        let tau = Policy::new((1..=c).map(|x| if x >= cut { 1.0 } else { 0.0 }).collect())?;
        if tpr(truth, rho, &tau)? < tpr(estimate, rho, &tau)? - 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Change {
    Strict,
    Equal,
    /// The estimated rate is higher: the claim fails.
    Increase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateComparison {
    pub true_rate: f64,
    pub estimated_rate: f64,
}

impl RateComparison {
    pub fn change(&self) -> Change {
        if self.estimated_rate < self.true_rate - RATE_MATCH_TOLERANCE {
            Change::Strict
        } else if self.estimated_rate > self.true_rate + RATE_MATCH_TOLERANCE {
            Change::Increase
        } else {
            Change::Equal
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnderselectionReport {
    /// The estimate is (weakly) below the truth in every upper tail.
    pub estimate_dominated: bool,
    pub maxutil: RateComparison,
    pub demparity: RateComparison,
    pub eqopt: RateComparison,
    /// Threshold-wise true-positive-rate dominance (see [`tpr_dominates`]).
    pub tpr_dominates: bool,
    /// The sufficient condition of [`eqopt_underselection_certified`].
    pub eqopt_certified: bool,
}

impl UnderselectionReport {
    /// MaxUtil and demographic parity never select more of group A under
    /// the estimate, and neither does equal opportunity when certified.
    pub fn holds(&self) -> bool {
        let no_increase = |c: &RateComparison| c.change() != Change::Increase;
        no_increase(&self.maxutil)
            && no_increase(&self.demparity)
            && (!self.eqopt_certified || no_increase(&self.eqopt))
    }

    /// Equal opportunity selects more of A under the estimate although the
    /// estimate's true positive rates are dominated threshold by threshold.
    pub fn eqopt_counterexample(&self) -> bool {
        self.tpr_dominates && self.eqopt.change() == Change::Increase
    }
}

/// Sufficient condition for equal opportunity to select no more of group A
/// under `estimate` than under `truth` (B fixed): in TPR space the
/// estimate's marginal utility `u / w` is nowhere above the truth's, and
/// the estimate reaches every TPR at no higher selection rate.
pub fn eqopt_underselection_certified(instance: &Instance, estimated: &Instance) -> Result<bool> {
    let w = ConstraintWeights::equal_opportunity(instance)?;
    let w_hat = ConstraintWeights::equal_opportunity(estimated)?;
    let [v, _] = crate::solvers::constrained_utility_curves(instance, &w)?;
    let [v_hat, _] = crate::solvers::constrained_utility_curves(estimated, &w_hat)?;
    let mut ts: Vec<f64> = v.breakpoints().iter().chain(v_hat.breakpoints()).copied().collect();
    ts.sort_by(f64::total_cmp);
    let t_end = v.x_max().min(v_hat.x_max());
    for &t in ts.iter().filter(|&&t| t < t_end) {
        if v_hat.right_slope(t)? > v.right_slope(t)? + 1e-12 {
            return Ok(false);
        }
    }
    let t_of = crate::objectives::TransferMap::new(instance.dist(Group::A), &w.a)?;
    let t_hat = crate::objectives::TransferMap::new(estimated.dist(Group::A), &w_hat.a)?;
    let mut betas: Vec<f64> = t_of.curve().breakpoints().iter().chain(t_hat.curve().breakpoints()).copied().collect();
    betas.sort_by(f64::total_cmp);
    for &b in &betas {
        if t_hat.forward(b)? < t_of.forward(b)? - 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Canonical group-A rates with the true vs. the under-estimated group A
/// (group B unchanged).
pub fn verify_underselection(instance: &Instance, err: &MeasurementError) -> Result<UnderselectionReport> {
    let truth = instance.group(Group::A);
    let est_spec = apply_measurement_error(truth, err)?;
    let estimated = instance.with_group(Group::A, est_spec.clone())?;
    let cmp = |t: &SolverResult, e: &SolverResult| RateComparison {
        true_rate: t.rate(Group::A),
        estimated_rate: e.rate(Group::A),
    };
    Ok(UnderselectionReport {
        estimate_dominated: cdf_dominates(&est_spec.dist, &truth.dist, Dominance::Weak)?,
        maxutil: cmp(&solve_maxutil(instance)?, &solve_maxutil(&estimated)?),
        demparity: cmp(&solve_demparity(instance)?, &solve_demparity(&estimated)?),
        eqopt: cmp(&solve_eqopt(instance)?, &solve_eqopt(&estimated)?),
        tpr_dominates: tpr_dominates(&truth.dist, &est_spec.dist, &truth.rho)?,
        eqopt_certified: eqopt_underselection_certified(instance, &estimated)?,
    })
}

/// Swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    /// Group A's share `g_A`.
    ProportionA,
    /// Soft-penalty weight.
    Lambda,
    /// `loss / gain` of an affine utility.
    LossRatio,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::ProportionA => "g_a",
            SweepParameter::Lambda => "lambda",
            SweepParameter::LossRatio => "loss_ratio",
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g_a" | "ga" | "proportion" => Ok(SweepParameter::ProportionA),
            "lambda" => Ok(SweepParameter::Lambda),
            "loss_ratio" | "ratio" => Ok(SweepParameter::LossRatio),
            _ => Err(Error::InvalidInput(format!("unknown sweep parameter '{s}'"))),
        }
    }
}

/// Solver inputs shared by every sweep point.
#[derive(Debug, Clone, Default)]
pub struct SweepSettings {
    pub criteria: Vec<Criterion>,
    pub weights: Option<ConstraintWeights>,
    pub penalty: Option<SoftPenalty>,
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub result: SolverResult,
    pub regimes: [OutcomeRegime; 2],
}

/// One row per grid value per criterion, in grid order then criterion order.
pub fn sweep(
    instance: &Instance,
    parameter: SweepParameter,
    grid: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    if settings.criteria.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one criterion".into()));
    }
    let mut rows = Vec::with_capacity(grid.len() * settings.criteria.len());
    for &value in grid {
        let mut penalty = settings.penalty.clone();
        let inst = match parameter {
            SweepParameter::ProportionA => instance.with_proportion_a(value)?,
            SweepParameter::Lambda => {
                let base = penalty.clone().unwrap_or(SoftPenalty::absolute(0.0)?);
                penalty = Some(base.with_lambda(value)?);
                instance.clone()
            }
            SweepParameter::LossRatio => {
                let gain = match instance.utility() {
                    UtilityFn::Affine { gain, .. } => *gain,
                    UtilityFn::Table(_) => {
                        return Err(Error::InvalidInput("loss-ratio sweep needs an affine utility".into()))
                    }
                };
                instance.with_utility(UtilityFn::Affine { gain, loss: value * gain })?
            }
        };
        let weights = match &settings.weights {
            Some(w) => Some(w.clone()),
            None if settings.criteria.contains(&Criterion::Soft) => {
                Some(ConstraintWeights::demographic_parity(inst.size()))
            }
            None => None,
        };
        let mu = solve_maxutil(&inst)?;
        for &criterion in &settings.criteria {
            let result = solve(&inst, criterion, weights.as_ref(), penalty.as_ref(), settings.budget)?;
            let regimes = [Group::A, Group::B].map(|g| classify_outcome(result.group(g).outcome, mu.group(g).outcome));
            rows.push(SweepRow { value, result, regimes });
        }
    }
    Ok(rows)
}

/// Outcome and utility curves of a group, for plotting.
pub fn group_curves(instance: &Instance, g: Group) -> Result<(PiecewiseLinearCurve, PiecewiseLinearCurve)> {
    Ok((outcome_curve(instance, g)?, utility_curve(instance, g)?))
}
