//! Utility and score-change models, the two-group instance, policy-level
//! objectives, and the rate curves / transfer maps built from them.

use crate::curve::PiecewiseLinearCurve;
use crate::error::{Error, Result};
use crate::model::{GroupSpec, Policy, ScoreDistribution, ScoreGrid, SuccessCurve};

/// Tolerance used when snapping inverse-transfer lookups onto breakpoints.
pub const SNAP_TOLERANCE: f64 = 1e-12;

/// Expected institution utility per score.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilityFn {
    /// Explicit value per score, shared by both groups.
    Table(Vec<f64>),
    /// `gain * rho(x) + loss * (1 - rho(x))`, using each group's own `rho`.
    Affine { gain: f64, loss: f64 },
}

impl UtilityFn {
    pub fn values_for(&self, rho: &SuccessCurve) -> Result<Vec<f64>> {
        match self {
            UtilityFn::Table(v) => {
                if v.len() != rho.len() {
                    return Err(Error::GridMismatch { expected: rho.len(), got: v.len() });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput("utility values must be finite".into()));
                }
                Ok(v.clone())
            }
            UtilityFn::Affine { gain, loss } => {
                if !(gain > loss) || !gain.is_finite() || !loss.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "affine utility needs finite gain > loss (got {gain}, {loss})"
                    )));
                }
                Ok(rho.values().iter().map(|r| gain * r + loss * (1.0 - r)).collect())
            }
        }
    }

    /// `(gain, loss)` when affine.
    pub fn affine_parts(&self) -> Option<(f64, f64)> {
        match self {
            UtilityFn::Affine { gain, loss } => Some((*gain, *loss)),
            UtilityFn::Table(_) => None,
        }
    }
}

/// Expected score change of a selected individual.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeRule {
    Table(Vec<f64>),
    /// `rho(x) * gain + (1 - rho(x)) * penalty`. With `clamp`, the realized
    /// movement is limited so the score stays on the grid (in label units).
    Affine {
        gain: f64,
        penalty: f64,
        clamp: bool,
    },
}

/// Score-change model: selected outcome plus an optional outcome for
/// individuals who are not selected (zero when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeFn {
    pub selected: OutcomeRule,
    pub unselected: Option<Vec<f64>>,
}

/// Score change per score for one group, materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeValues {
    pub selected: Vec<f64>,
    pub unselected: Option<Vec<f64>>,
}

impl OutcomeValues {
    /// Change attributable to selection, `selected - unselected`.
    pub fn net(&self) -> Vec<f64> {
        match &self.unselected {
            None => self.selected.clone(),
            Some(n) => self.selected.iter().zip(n).map(|(p, q)| p - q).collect(),
        }
    }

    /// Mean change when nobody is selected.
    pub fn baseline(&self, dist: &ScoreDistribution) -> f64 {
        match &self.unselected {
            None => 0.0,
            Some(n) => dist.pmf().iter().zip(n).map(|(p, d)| p * d).sum(),
        }
    }
}

impl OutcomeFn {
    pub fn new(selected: OutcomeRule) -> Self {
        Self { selected, unselected: None }
    }

    pub fn affine(gain: f64, penalty: f64) -> Self {
        Self::new(OutcomeRule::Affine { gain, penalty, clamp: false })
    }

    pub fn values_for(&self, rho: &SuccessCurve, grid: &ScoreGrid) -> Result<OutcomeValues> {
        let size = rho.len();
        if grid.len() != size {
            return Err(Error::GridMismatch { expected: grid.len(), got: size });
        }
        let selected = match &self.selected {
            OutcomeRule::Table(v) => {
                if v.len() != size {
                    return Err(Error::GridMismatch { expected: size, got: v.len() });
                }
                v.clone()
            }
            OutcomeRule::Affine { gain, penalty, clamp } => {
                if !(gain > penalty) || !gain.is_finite() || !penalty.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "affine score change needs finite gain > penalty (got {gain}, {penalty})"
                    )));
                }
                let labels = grid.labels();
                let (lo, hi) = (labels[0], labels[size - 1]);
                rho.values()
                    .iter()
                    .zip(labels)
                    .map(|(r, x)| {
                        let (up, down) =
                            if *clamp { (gain.min(hi - x), penalty.max(lo - x)) } else { (*gain, *penalty) };
                        r * up + (1.0 - r) * down
                    })
                    .collect()
            }
        };
        if selected.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("score change values must be finite".into()));
        }
        if let Some(n) = &self.unselected {
            if n.len() != size {
                return Err(Error::GridMismatch { expected: size, got: n.len() });
            }
        }
        Ok(OutcomeValues { selected, unselected: self.unselected.clone() })
    }
}

/// Which of the two groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::A, Group::B];

    pub fn index(self) -> usize {
        match self {
            Group::A => 0,
            Group::B => 1,
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Group::A => "A",
            Group::B => "B",
        }
    }
}

/// Two groups on a shared grid with a utility and a score-change model.
/// Per-group utility and score-change vectors are materialized on build.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    grid: ScoreGrid,
    groups: [GroupSpec; 2],
    utility: UtilityFn,
    outcome: OutcomeFn,
    u: [Vec<f64>; 2],
    delta: [OutcomeValues; 2],
}

impl Instance {
    pub fn new(grid: ScoreGrid, a: GroupSpec, b: GroupSpec, utility: UtilityFn, outcome: OutcomeFn) -> Result<Self> {
        for g in [&a, &b] {
            if g.len() != grid.len() {
                return Err(Error::GridMismatch { expected: grid.len(), got: g.len() });
            }
        }
        let total = a.proportion.get() + b.proportion.get();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("group proportions sum to {total}, not 1")));
        }
        let u = [utility.values_for(&a.rho)?, utility.values_for(&b.rho)?];
        let delta = [outcome.values_for(&a.rho, &grid)?, outcome.values_for(&b.rho, &grid)?];
        Ok(Self { grid, groups: [a, b], utility, outcome, u, delta })
    }

    pub fn grid(&self) -> &ScoreGrid {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    pub fn group(&self, g: Group) -> &GroupSpec {
        &self.groups[g.index()]
    }

    pub fn dist(&self, g: Group) -> &ScoreDistribution {
        &self.groups[g.index()].dist
    }

    pub fn proportion(&self, g: Group) -> f64 {
        self.groups[g.index()].proportion.get()
    }

    pub fn utility(&self) -> &UtilityFn {
        &self.utility
    }

    pub fn outcome(&self) -> &OutcomeFn {
        &self.outcome
    }

    /// Utility per score as seen for group `g`.
    pub fn utility_values(&self, g: Group) -> &[f64] {
        &self.u[g.index()]
    }

    pub fn outcome_values(&self, g: Group) -> &OutcomeValues {
        &self.delta[g.index()]
    }

    /// Copy with group A's share set to `g_a` (B gets the complement).
    pub fn with_proportion_a(&self, g_a: f64) -> Result<Self> {
        let pa = crate::model::Proportion::new(g_a)?;
        let mut out = self.clone();
        out.groups[0].proportion = pa;
        out.groups[1].proportion = pa.complement();
        Ok(out)
    }

    pub fn with_utility(&self, utility: UtilityFn) -> Result<Self> {
        let [a, b] = self.groups.clone();
        Self::new(self.grid.clone(), a, b, utility, self.outcome.clone())
    }

    pub fn with_outcome(&self, outcome: OutcomeFn) -> Result<Self> {
        let [a, b] = self.groups.clone();
        Self::new(self.grid.clone(), a, b, self.utility.clone(), outcome)
    }

    /// Copy with one group replaced (same grid and models).
    pub fn with_group(&self, g: Group, spec: GroupSpec) -> Result<Self> {
        let mut groups = self.groups.clone();
        groups[g.index()] = spec;
        let [a, b] = groups;
        Self::new(self.grid.clone(), a, b, self.utility.clone(), self.outcome.clone())
    }

    /// Pointwise institution assumption for group `g`.
    pub fn assumption_holds(&self, g: Group) -> bool {
        let net = self.delta[g.index()].net();
        crate::model::check_institution_assumption(&self.u[g.index()], &net).unwrap_or(false)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::GridMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// `U(tau) = sum_x pmf(x) tau(x) u(x)`.
pub fn group_utility(dist: &ScoreDistribution, policy: &Policy, utility: &[f64]) -> Result<f64> {
    check_len(dist.len(), policy.len())?;
    check_len(dist.len(), utility.len())?;
    Ok(dist.pmf().iter().zip(policy.values()).zip(utility).map(|((p, t), u)| p * t * u).sum())
}

/// Share-weighted utility over both groups.
pub fn total_utility(instance: &Instance, policy_a: &Policy, policy_b: &Policy) -> Result<f64> {
    let ua = group_utility(instance.dist(Group::A), policy_a, instance.utility_values(Group::A))?;
    let ub = group_utility(instance.dist(Group::B), policy_b, instance.utility_values(Group::B))?;
    Ok(instance.proportion(Group::A) * ua + instance.proportion(Group::B) * ub)
}

/// Expected mean score change of a group under a policy.
pub fn group_outcome(dist: &ScoreDistribution, policy: &Policy, delta: &OutcomeValues) -> Result<f64> {
    check_len(dist.len(), policy.len())?;
    check_len(dist.len(), delta.selected.len())?;
    let zeros;
    let unselected = match &delta.unselected {
        Some(n) => n.as_slice(),
        None => {
            zeros = vec![0.0; dist.len()];
            &zeros
        }
    };
    Ok((0..dist.len())
        .map(|i| {
            let t = policy.values()[i];
            dist.pmf()[i] * (t * delta.selected[i] + (1.0 - t) * unselected[i])
        })
        .sum())
}

/// True positive rate `sum pmf rho tau / sum pmf rho`.
pub fn tpr(dist: &ScoreDistribution, rho: &SuccessCurve, policy: &Policy) -> Result<f64> {
    check_len(dist.len(), policy.len())?;
    check_len(dist.len(), rho.len())?;
    let total: f64 = dist.pmf().iter().zip(rho.values()).map(|(p, r)| p * r).sum();
    if !(total > 0.0) {
        return Err(Error::Precondition("group has zero expected successes; TPR undefined".into()));
    }
    let hit: f64 = dist.pmf().iter().zip(rho.values()).zip(policy.values()).map(|((p, r), t)| p * r * t).sum();
    Ok(hit / total)
}

/// `beta -> Delta mu(r^{-1}(beta))` for group `g`.
pub fn outcome_curve(instance: &Instance, g: Group) -> Result<PiecewiseLinearCurve> {
    let delta = instance.outcome_values(g);
    let dist = instance.dist(g);
    PiecewiseLinearCurve::rate_curve(dist, &delta.net(), delta.baseline(dist))
}

/// `beta -> U(r^{-1}(beta))` for group `g`.
pub fn utility_curve(instance: &Instance, g: Group) -> Result<PiecewiseLinearCurve> {
    PiecewiseLinearCurve::rate_curve(instance.dist(g), instance.utility_values(g), 0.0)
}

/// Per-group weights of a linear constraint `<pmf_A . w_A, tau_A> = <pmf_B . w_B, tau_B>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintWeights {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ConstraintWeights {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        Self { a, b }
    }

    /// All-ones weights: equal selection rates.
    pub fn demographic_parity(size: usize) -> Self {
        Self { a: vec![1.0; size], b: vec![1.0; size] }
    }

    /// `rho_j / <rho_j, pmf_j>`: equal true positive rates.
    pub fn equal_opportunity(instance: &Instance) -> Result<Self> {
        let w = |g: Group| -> Result<Vec<f64>> {
            let spec = instance.group(g);
            if let Some(i) = spec.rho.values().iter().position(|r| !(*r > 0.0)) {
                return Err(Error::Precondition(format!(
                    "equal opportunity needs rho > 0 everywhere; group {} has rho({}) = {}",
                    g.label(),
                    i + 1,
                    spec.rho.values()[i]
                )));
            }
            let mean = spec.mean_success();
            Ok(spec.rho.values().iter().map(|r| r / mean).collect())
        };
        Ok(Self { a: w(Group::A)?, b: w(Group::B)? })
    }

    pub fn for_group(&self, g: Group) -> &[f64] {
        match g {
            Group::A => &self.a,
            Group::B => &self.b,
        }
    }

    /// Checks `w > 0` and `u / w` non-decreasing for both groups.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        for g in Group::BOTH {
            let w = self.for_group(g);
            check_len(instance.size(), w.len())?;
            if let Some(i) = w.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::Precondition(format!(
                    "constraint weight for group {} at score {} is {}, must be positive",
                    g.label(),
                    i + 1,
                    w[i]
                )));
            }
            let u = instance.utility_values(g);
            let ratio: Vec<f64> = u.iter().zip(w).map(|(u, w)| u / w).collect();
            if let Some(i) = ratio.windows(2).position(|p| p[1] < p[0] - 1e-12 * p[0].abs().max(1.0)) {
                return Err(Error::Precondition(format!(
                    "utility/weight ratio for group {} decreases at score {}",
                    g.label(),
                    i + 2
                )));
            }
        }
        Ok(())
    }

    /// `<pmf_j, w_j>`, the largest attainable constraint value for group `g`.
    pub fn capacity(&self, instance: &Instance, g: Group) -> f64 {
        instance.dist(g).pmf().iter().zip(self.for_group(g)).map(|(p, w)| p * w).sum()
    }
}

/// `T(beta) = <r^{-1}(beta), pmf . w>` and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMap {
    forward: PiecewiseLinearCurve,
    inverse: PiecewiseLinearCurve,
}

impl TransferMap {
    pub fn new(dist: &ScoreDistribution, weight: &[f64]) -> Result<Self> {
        if let Some(i) = weight.iter().position(|w| !(*w > 0.0)) {
            return Err(Error::Precondition(format!("transfer weight at score {} must be positive", i + 1)));
        }
        let forward = PiecewiseLinearCurve::rate_curve(dist, weight, 0.0)?;
        let inverse = forward.inverse()?;
        Ok(Self { forward, inverse })
    }

    pub fn forward(&self, beta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::OutOfDomain { what: "selection rate", value: beta });
        }
        self.forward.evaluate_snapped(beta, SNAP_TOLERANCE)
    }

    /// Inverse, snapping onto distribution tails when within tolerance.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        if t < -SNAP_TOLERANCE || t > self.capacity() + SNAP_TOLERANCE || t.is_nan() {
            return Err(Error::OutOfDomain { what: "transfer value", value: t });
        }
        self.inverse.evaluate_snapped(t, SNAP_TOLERANCE)
    }

    pub fn capacity(&self) -> f64 {
        self.forward.values().last().copied().unwrap_or(0.0)
    }

    pub fn curve(&self) -> &PiecewiseLinearCurve {
        &self.forward
    }

    pub fn inverse_curve(&self) -> &PiecewiseLinearCurve {
        &self.inverse
    }
}

/// `T(beta)` for one distribution and weight.
pub fn transfer_t(dist: &ScoreDistribution, weight: &[f64], beta: f64) -> Result<f64> {
    TransferMap::new(dist, weight)?.forward(beta)
}

/// `T^{-1}(t)` for one distribution and weight.
pub fn transfer_t_inverse(dist: &ScoreDistribution, weight: &[f64], t: f64) -> Result<f64> {
    TransferMap::new(dist, weight)?.inverse(t)
}

/// Rate of group B matching group A's constraint value at rate `beta_a`.
pub fn transfer_g(instance: &Instance, weights: &ConstraintWeights, beta_a: f64) -> Result<f64> {
    let ta = TransferMap::new(instance.dist(Group::A), &weights.a)?;
    let tb = TransferMap::new(instance.dist(Group::B), &weights.b)?;
    tb.inverse(ta.forward(beta_a)?)
}
