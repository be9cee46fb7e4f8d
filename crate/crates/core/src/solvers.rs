//! Exact optimizers for each decision rule.
//!
//! Every objective here is concave and piecewise linear in one scalar (a
//! selection rate, a constraint value, or a constraint gap), so optima are
//! found by scanning segment slopes for the sign change.

use std::fmt;
use std::str::FromStr;

use crate::curve::{MaxInterval, PiecewiseLinearCurve, SLOPE_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::ThresholdPolicy;
use crate::objectives::{
    group_outcome, group_utility, outcome_curve, tpr, utility_curve, ConstraintWeights, Group, Instance, TransferMap,
    SNAP_TOLERANCE,
};

/// Decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    MaxUtil,
    DemParity,
    EqOpt,
    Linear,
    Soft,
    OutcomeBased,
}

impl Criterion {
    pub const ALL: [Criterion; 6] = [
        Criterion::MaxUtil,
        Criterion::DemParity,
        Criterion::EqOpt,
        Criterion::Linear,
        Criterion::Soft,
        Criterion::OutcomeBased,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::MaxUtil => "maxutil",
            Criterion::DemParity => "demparity",
            Criterion::EqOpt => "eqopt",
            Criterion::Linear => "linear",
            Criterion::Soft => "soft",
            Criterion::OutcomeBased => "outcome",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        Ok(match key.as_str() {
            "maxutil" | "mu" => Criterion::MaxUtil,
            "demparity" | "dp" => Criterion::DemParity,
            "eqopt" | "equalopportunity" => Criterion::EqOpt,
            "linear" | "linearconstraint" => Criterion::Linear,
            "soft" => Criterion::Soft,
            "outcome" | "outcomebased" => Criterion::OutcomeBased,
            _ => return Err(Error::InvalidInput(format!("unknown criterion '{s}'"))),
        })
    }
}

/// Closed interval of selection rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RateInterval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Solution for one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSolution {
    /// All optimal selection rates.
    pub rates: RateInterval,
    /// Canonical (leftmost) optimal rate.
    pub rate: f64,
    pub policy: ThresholdPolicy,
    pub utility: f64,
    pub outcome: f64,
    /// `None` when the group has no expected successes.
    pub tpr: Option<f64>,
    /// Outcome strictly below the MaxUtil outcome (relative harm).
    pub relative_harm: bool,
}

/// Extra output of the soft-constrained solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftDetails {
    pub lambda: f64,
    /// Constraint values `(t_A, t_B)` of the canonical solution.
    pub t: (f64, f64),
    /// Canonical gap `t_A - t_B` (the optimal gap closest to zero).
    pub gap: f64,
    /// All optimal gaps.
    pub gap_interval: (f64, f64),
    /// Utility minus penalty.
    pub penalized_objective: f64,
    /// For the absolute-value penalty: the smallest lambda at which the
    /// hard-constrained solution is optimal.
    pub lambda_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub criterion: Criterion,
    pub groups: [GroupSolution; 2],
    /// Share-weighted utility (penalty not included).
    pub total_utility: f64,
    /// Optimal constraint-value interval for linear constraints.
    pub constraint_interval: Option<(f64, f64)>,
    pub soft: Option<SoftDetails>,
}

impl SolverResult {
    pub fn group(&self, g: Group) -> &GroupSolution {
        &self.groups[g.index()]
    }

    pub fn rate(&self, g: Group) -> f64 {
        self.groups[g.index()].rate
    }
}

fn require_monotone_utility(instance: &Instance) -> Result<()> {
    for g in Group::BOTH {
        let u = instance.utility_values(g);
        if let Some(i) = u.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Precondition(format!(
                "utility for group {} decreases between scores {} and {}",
                g.label(),
                i + 1,
                i + 2
            )));
        }
    }
    Ok(())
}

fn clamp_rate(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn maxutil_outcomes(instance: &Instance) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for g in Group::BOTH {
        let m = utility_curve(instance, g)?.argmax(SLOPE_TOLERANCE);
        out[g.index()] = outcome_curve(instance, g)?.evaluate(m.lo)?;
    }
    Ok(out)
}

fn group_solution(
    instance: &Instance,
    g: Group,
    rates: RateInterval,
    rate: f64,
    mu_outcome: f64,
) -> Result<GroupSolution> {
    let spec = instance.group(g);
    let rate = clamp_rate(rate);
    let policy = spec.dist.inverse_selection_rate(rate)?;
    let tau = policy.to_policy();
    let utility = group_utility(&spec.dist, &tau, instance.utility_values(g))?;
    let outcome = group_outcome(&spec.dist, &tau, instance.outcome_values(g))?;
    let tpr = tpr(&spec.dist, &spec.rho, &tau).ok();
    Ok(GroupSolution {
        rates: RateInterval { lo: clamp_rate(rates.lo), hi: clamp_rate(rates.hi) },
        rate,
        policy,
        utility,
        outcome,
        tpr,
        relative_harm: outcome < mu_outcome - 1e-10,
    })
}

fn assemble(
    instance: &Instance,
    criterion: Criterion,
    intervals: [RateInterval; 2],
    rates: [f64; 2],
) -> Result<SolverResult> {
    let mu = maxutil_outcomes(instance)?;
    let a = group_solution(instance, Group::A, intervals[0], rates[0], mu[0])?;
    let b = group_solution(instance, Group::B, intervals[1], rates[1], mu[1])?;
    let total_utility = instance.proportion(Group::A) * a.utility + instance.proportion(Group::B) * b.utility;
    Ok(SolverResult { criterion, groups: [a, b], total_utility, constraint_interval: None, soft: None })
}

/// Unconstrained utility maximization, each group on its own.
pub fn solve_maxutil(instance: &Instance) -> Result<SolverResult> {
    require_monotone_utility(instance)?;
    let mut intervals = [RateInterval::point(0.0); 2];
    for g in Group::BOTH {
        let m = utility_curve(instance, g)?.argmax(SLOPE_TOLERANCE);
        intervals[g.index()] = RateInterval { lo: m.lo, hi: m.hi };
    }
    assemble(instance, Criterion::MaxUtil, intervals, [intervals[0].lo, intervals[1].lo])
}

/// `beta -> g_A U_A(beta) + g_B U_B(beta)`: total utility when both groups
/// are selected at the same rate.
pub fn demparity_objective(instance: &Instance) -> Result<PiecewiseLinearCurve> {
    let ua = utility_curve(instance, Group::A)?;
    let ub = utility_curve(instance, Group::B)?;
    PiecewiseLinearCurve::combine(
        &[(instance.proportion(Group::A), &ua, 0.0), (instance.proportion(Group::B), &ub, 0.0)],
        0.0,
        1.0,
    )
}

/// Equal selection rates across groups.
pub fn solve_demparity(instance: &Instance) -> Result<SolverResult> {
    require_monotone_utility(instance)?;
    let m = demparity_objective(instance)?.argmax(SLOPE_TOLERANCE);
    let iv = RateInterval { lo: m.lo, hi: m.hi };
    let mut r = assemble(instance, Criterion::DemParity, [iv, iv], [m.lo, m.lo])?;
    r.constraint_interval = Some((m.lo, m.hi));
    Ok(r)
}

/// Utility of each group as a function of its constraint value `t`.
pub fn constrained_utility_curves(
    instance: &Instance,
    weights: &ConstraintWeights,
) -> Result<[PiecewiseLinearCurve; 2]> {
    let curve = |g: Group| {
        PiecewiseLinearCurve::transferred_rate_curve(
            instance.dist(g),
            weights.for_group(g),
            instance.utility_values(g),
            0.0,
        )
    };
    Ok([curve(Group::A)?, curve(Group::B)?])
}

/// `t -> g_A U_A(t) + g_B U_B(t)` on `[0, t_max]`.
pub fn linear_constraint_objective(instance: &Instance, weights: &ConstraintWeights) -> Result<PiecewiseLinearCurve> {
    let [va, vb] = constrained_utility_curves(instance, weights)?;
    let t_max = va.x_max().min(vb.x_max());
    PiecewiseLinearCurve::combine(
        &[(instance.proportion(Group::A), &va, 0.0), (instance.proportion(Group::B), &vb, 0.0)],
        0.0,
        t_max,
    )
}

fn transfer_maps(instance: &Instance, weights: &ConstraintWeights) -> Result<[TransferMap; 2]> {
    Ok([TransferMap::new(instance.dist(Group::A), &weights.a)?, TransferMap::new(instance.dist(Group::B), &weights.b)?])
}

fn solve_linear_as(instance: &Instance, weights: &ConstraintWeights, criterion: Criterion) -> Result<SolverResult> {
    require_monotone_utility(instance)?;
    weights.validate(instance)?;
    let m: MaxInterval = linear_constraint_objective(instance, weights)?.argmax(SLOPE_TOLERANCE);
    let [ta, tb] = transfer_maps(instance, weights)?;
    let ia = RateInterval { lo: ta.inverse(m.lo)?, hi: ta.inverse(m.hi)? };
    let ib = RateInterval { lo: tb.inverse(m.lo)?, hi: tb.inverse(m.hi)? };
    let mut r = assemble(instance, criterion, [ia, ib], [ia.lo, ib.lo])?;
    r.constraint_interval = Some((m.lo, m.hi));
    Ok(r)
}

/// Equal weighted selection: `<pmf_A . w_A, tau_A> = <pmf_B . w_B, tau_B>`.
pub fn solve_linear_constraint(instance: &Instance, weights: &ConstraintWeights) -> Result<SolverResult> {
    solve_linear_as(instance, weights, Criterion::Linear)
}

/// Equal true positive rates.
pub fn solve_eqopt(instance: &Instance) -> Result<SolverResult> {
    let w = ConstraintWeights::equal_opportunity(instance)?;
    solve_linear_as(instance, &w, Criterion::EqOpt)
}

/// Convex symmetric penalty on the constraint gap.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyKind {
    Absolute,
    Quadratic,
    /// Piecewise-linear `phi(|t|)` through `(t, phi)` knots starting at
    /// `(0, 0)`, extended linearly past the last knot.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftPenalty {
    kind: PenaltyKind,
    lambda: f64,
}

impl SoftPenalty {
    pub fn new(kind: PenaltyKind, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("penalty weight must be finite and >= 0 (got {lambda})")));
        }
        if let PenaltyKind::Table(knots) = &kind {
            validate_table(knots)?;
        }
        Ok(Self { kind, lambda })
    }

    pub fn absolute(lambda: f64) -> Result<Self> {
        Self::new(PenaltyKind::Absolute, lambda)
    }

    pub fn kind(&self) -> &PenaltyKind {
        &self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.kind.clone(), lambda)
    }

    /// `phi(t)`, without the weight.
    pub fn phi(&self, t: f64) -> f64 {
        match &self.kind {
            PenaltyKind::Absolute => t.abs(),
            PenaltyKind::Quadratic => t * t,
            PenaltyKind::Table(knots) => table_value(knots, t.abs()),
        }
    }

    /// One-sided derivatives `(phi'_-(t), phi'_+(t))`.
    pub fn phi_slopes(&self, t: f64) -> (f64, f64) {
        match &self.kind {
            PenaltyKind::Absolute => {
                if t > 0.0 {
                    (1.0, 1.0)
                } else if t < 0.0 {
                    (-1.0, -1.0)
                } else {
                    (-1.0, 1.0)
                }
            }
            PenaltyKind::Quadratic => (2.0 * t, 2.0 * t),
            PenaltyKind::Table(knots) => {
                let (l, r) = table_slopes(knots, t.abs());
                if t > 0.0 {
                    (l, r)
                } else if t < 0.0 {
                    (-r, -l)
                } else {
                    (-r, r)
                }
            }
        }
    }

    /// `phi` as a curve on `[lo, hi]`, for the piecewise-linear kinds.
    fn as_curve(&self, lo: f64, hi: f64) -> Option<PiecewiseLinearCurve> {
        let mut xs = vec![lo];
        match &self.kind {
            PenaltyKind::Quadratic => return None,
            PenaltyKind::Absolute => xs.push(0.0),
            PenaltyKind::Table(knots) => {
                for (t, _) in knots.iter().rev() {
                    xs.push(-t);
                }
                for (t, _) in knots.iter().skip(1) {
                    xs.push(*t);
                }
            }
        }
        xs.push(hi);
        xs.retain(|&x| x >= lo && x <= hi);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 2 {
            return None;
        }
        let ys = xs.iter().map(|&x| self.phi(x)).collect();
        PiecewiseLinearCurve::from_points(xs, ys).ok()
    }
}

fn validate_table(knots: &[(f64, f64)]) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidInput(format!("penalty table is not a valid convex penalty: {m}")));
    if knots.len() < 2 || knots[0] != (0.0, 0.0) {
        return bad("needs at least two knots starting at (0, 0)");
    }
    if knots.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
        return bad("non-finite knot");
    }
    if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return bad("knot positions must be strictly increasing");
    }
    let slopes: Vec<f64> = knots.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    if !(slopes[0] > 0.0) {
        return bad("phi(t) must be positive for t > 0");
    }
    if slopes.windows(2).any(|s| s[1] < s[0] - 1e-12) {
        return bad("slopes must be non-decreasing");
    }
    Ok(())
}

fn table_value(knots: &[(f64, f64)], t: f64) -> f64 {
    let k = knots.partition_point(|(x, _)| *x <= t).clamp(1, knots.len() - 1);
    let (x0, y0) = knots[k - 1];
    let (x1, y1) = knots[k];
    y0 + (y1 - y0) / (x1 - x0) * (t - x0)
}

fn table_slopes(knots: &[(f64, f64)], t: f64) -> (f64, f64) {
    let slope = |k: usize| (knots[k].1 - knots[k - 1].1) / (knots[k].0 - knots[k - 1].0);
    let right = knots.partition_point(|(x, _)| *x <= t).clamp(1, knots.len() - 1);
    let left = knots.partition_point(|(x, _)| *x < t).clamp(1, knots.len() - 1);
    (slope(left), slope(right))
}

/// Maximizer of `h(x) - lambda x^2` for concave piecewise-linear `h`.
fn argmax_minus_quadratic(h: &PiecewiseLinearCurve, lambda: f64) -> f64 {
    let xs = h.breakpoints();
    for (k, &s) in h.slopes().iter().enumerate() {
        let (a, b) = (xs[k], xs[k + 1]);
        if s - 2.0 * lambda * a <= 0.0 {
            return a;
        }
        if s - 2.0 * lambda * b < 0.0 {
            return (s / (2.0 * lambda)).clamp(a, b);
        }
    }
    h.x_max()
}

/// Soft-constrained utility maximization:
/// `max g_A U_A(t_A) + g_B U_B(t_B) - lambda phi(t_A - t_B)` over constraint
/// values `t_j in [0, <pmf_j, w_j>]`.
///
/// The best utility for each gap `d = t_A - t_B` is the sup-convolution of
/// the two (concave) group curves, so the problem reduces to a concave
/// one-dimensional maximization in `d`, solved exactly. Among optimal gaps
/// the one closest to zero is canonical; within it, the leftmost `t_A`.
pub fn solve_soft(instance: &Instance, weights: &ConstraintWeights, penalty: &SoftPenalty) -> Result<SolverResult> {
    require_monotone_utility(instance)?;
    weights.validate(instance)?;
    let (ga, gb) = (instance.proportion(Group::A), instance.proportion(Group::B));
    let [va, vb] = constrained_utility_curves(instance, weights)?;
    let (ma, mb) = (va.x_max(), vb.x_max());

    let best_by_gap = va.scale(ga).sup_convolve(&vb.scale(gb).reflect())?;
    let lambda = penalty.lambda();
    let (d_lo, d_hi) = if lambda == 0.0 {
        let m = best_by_gap.argmax(SLOPE_TOLERANCE);
        (m.lo, m.hi)
    } else if let Some(phi) = penalty.as_curve(best_by_gap.x_min(), best_by_gap.x_max()) {
        let f = PiecewiseLinearCurve::combine(
            &[(1.0, &best_by_gap, 0.0), (-lambda, &phi, 0.0)],
            best_by_gap.x_min(),
            best_by_gap.x_max(),
        )?;
        let m = f.argmax(SLOPE_TOLERANCE);
        (m.lo, m.hi)
    } else {
        let d = argmax_minus_quadratic(&best_by_gap, lambda);
        (d, d)
    };
    // sup-convolution breakpoints are sums of segment lengths; snap a gap
    // interval that touches zero up to rounding onto exactly zero
    let gap = if d_lo <= SNAP_TOLERANCE && d_hi >= -SNAP_TOLERANCE { 0.0 } else { 0.0_f64.clamp(d_lo, d_hi) };

    let lo = gap.max(0.0);
    let hi = ma.min(mb + gap);
    let (t_lo, t_hi) = if hi - lo > crate::curve::MERGE_TOLERANCE {
        let inner = PiecewiseLinearCurve::combine(&[(ga, &va, 0.0), (gb, &vb, gap)], lo, hi)?;
        let m = inner.argmax(SLOPE_TOLERANCE);
        (m.lo, m.hi)
    } else {
        (lo, lo)
    };
    let t_a = t_lo;
    let t_b = (t_a - gap).clamp(0.0, mb);

    let [ta, tb] = transfer_maps(instance, weights)?;
    let ia = RateInterval { lo: ta.inverse(t_lo)?, hi: ta.inverse(t_hi)? };
    let ib =
        RateInterval { lo: tb.inverse((t_lo - gap).clamp(0.0, mb))?, hi: tb.inverse((t_hi - gap).clamp(0.0, mb))? };
    let mut r = assemble(instance, Criterion::Soft, [ia, ib], [ia.lo, ib.lo])?;

    let lambda_star = match penalty.kind() {
        PenaltyKind::Absolute => {
            let right = best_by_gap.right_slope(0.0)?;
            let left = best_by_gap.left_slope(0.0)?;
            Some(right.max(-left).max(0.0))
        }
        _ => None,
    };
    let utility = ga * va.evaluate(t_a)? + gb * vb.evaluate(t_b)?;
    r.soft = Some(SoftDetails {
        lambda,
        t: (t_a, t_b),
        gap,
        gap_interval: (d_lo, d_hi),
        penalized_objective: utility - lambda * penalty.phi(t_a - t_b),
        lambda_star,
    });
    Ok(r)
}

/// First-order check for a soft solution: at `(t_A, t_B)` the
/// superdifferential of the objective in each coordinate contains zero
/// (within `tol`). Domain boundaries contribute an unbounded side.
pub fn soft_first_order_holds(
    instance: &Instance,
    weights: &ConstraintWeights,
    penalty: &SoftPenalty,
    t: (f64, f64),
    tol: f64,
) -> Result<bool> {
    let [va, vb] = constrained_utility_curves(instance, weights)?;
    let (ga, gb) = (instance.proportion(Group::A), instance.proportion(Group::B));
    let lambda = penalty.lambda();
    let (pl, pr) = penalty.phi_slopes(t.0 - t.1);
    let sides = |v: &PiecewiseLinearCurve, x: f64, g: f64| -> Result<(f64, f64)> {
        let right = if x >= v.x_max() - 1e-15 { f64::NEG_INFINITY } else { g * v.right_slope(x)? };
        let left = if x <= v.x_min() + 1e-15 { f64::INFINITY } else { g * v.left_slope(x)? };
        Ok((right, left))
    };
    let (ra, la) = sides(&va, t.0, ga)?;
    let (rb, lb) = sides(&vb, t.1, gb)?;
    // group A: [ra - lambda phi'_+, la - lambda phi'_-] must contain 0
    let a_ok = ra - lambda * pr <= tol && la - lambda * pl >= -tol;
    // group B: [rb + lambda phi'_-, lb + lambda phi'_+]
    let b_ok = rb + lambda * pl <= tol && lb + lambda * pr >= -tol;
    Ok(a_ok && b_ok)
}

/// Superlevel set `{x : curve(x) >= level}` of a concave curve, as the
/// interval around `anchor` (where `curve(anchor) >= level`).
pub fn superlevel_interval(curve: &PiecewiseLinearCurve, level: f64, anchor: f64) -> Result<(f64, f64)> {
    let xs = curve.breakpoints();
    let ys = curve.values();
    let slopes = curve.slopes();
    let n = slopes.len();
    let first = xs.partition_point(|&x| x <= anchor).saturating_sub(1).min(n - 1);

    let mut hi = curve.x_max();
    for k in first..n {
        if ys[k + 1] < level {
            let x0 = xs[k].max(anchor);
            let y0 = curve.evaluate(x0)?;
            hi = (x0 + (level - y0) / slopes[k]).clamp(x0, xs[k + 1]);
            break;
        }
    }
    let mut lo = curve.x_min();
    for k in (0..=first).rev() {
        if ys[k] < level {
            let x1 = xs[k + 1].min(anchor);
            let y1 = curve.evaluate(x1)?;
            lo = (x1 - (y1 - level) / slopes[k]).clamp(xs[k], x1);
            break;
        }
    }
    Ok((lo, hi))
}

/// Rate maximizing a group's mean score change, subject to losing at most
/// `budget` utility relative to MaxUtil. Applied to each group separately.
pub fn solve_outcome_based(instance: &Instance, budget: f64) -> Result<SolverResult> {
    if !(budget >= 0.0) {
        return Err(Error::InvalidInput(format!("utility budget must be >= 0 (got {budget})")));
    }
    require_monotone_utility(instance)?;
    let mut intervals = [RateInterval::point(0.0); 2];
    let mut rates = [0.0; 2];
    for g in Group::BOTH {
        if !instance.assumption_holds(g) {
            log::warn!(
                "institution assumption fails for group {}; outcome-based rate may sit below MaxUtil",
                g.label()
            );
        }
        let uc = utility_curve(instance, g)?;
        let mu = uc.argmax(SLOPE_TOLERANCE);
        let (feasible_lo, feasible_hi) = superlevel_interval(&uc, mu.value - budget, mu.lo)?;
        let oc = outcome_curve(instance, g)?;
        let best = oc.argmax(SLOPE_TOLERANCE);
        let rate = best.lo.clamp(feasible_lo, feasible_hi);
        // every outcome-optimal rate inside the feasible window is optimal
        let lo = best.lo.max(feasible_lo).min(rate);
        let hi = best.hi.min(feasible_hi).max(rate);
        intervals[g.index()] = RateInterval { lo, hi };
        rates[g.index()] = rate;
    }
    assemble(instance, Criterion::OutcomeBased, intervals, rates)
}

/// Largest rate above the MaxUtil rate losing at most `budget` utility.
pub fn utility_budget_limit(instance: &Instance, g: Group, budget: f64) -> Result<f64> {
    let uc = utility_curve(instance, g)?;
    let mu = uc.argmax(SLOPE_TOLERANCE);
    Ok(superlevel_interval(&uc, mu.value - budget, mu.lo)?.1)
}

/// Dispatch by criterion. `weights` is required for `Linear` and `Soft`
/// (defaults to demographic-parity weights for `Soft` when absent).
pub fn solve(
    instance: &Instance,
    criterion: Criterion,
    weights: Option<&ConstraintWeights>,
    penalty: Option<&SoftPenalty>,
    budget: Option<f64>,
) -> Result<SolverResult> {
    match criterion {
        Criterion::MaxUtil => solve_maxutil(instance),
        Criterion::DemParity => solve_demparity(instance),
        Criterion::EqOpt => solve_eqopt(instance),
        Criterion::Linear => {
            let w = weights.ok_or_else(|| Error::InvalidInput("linear criterion needs constraint weights".into()))?;
            solve_linear_constraint(instance, w)
        }
        Criterion::Soft => {
            let p = penalty.ok_or_else(|| Error::InvalidInput("soft criterion needs a penalty".into()))?;
            let dp;
            let w = match weights {
                Some(w) => w,
                None => {
                    dp = ConstraintWeights::demographic_parity(instance.size());
                    &dp
                }
            };
            solve_soft(instance, w, p)
        }
        Criterion::OutcomeBased => {
            let b = budget.ok_or_else(|| Error::InvalidInput("outcome criterion needs a utility budget".into()))?;
            solve_outcome_based(instance, b)
        }
    }
}
