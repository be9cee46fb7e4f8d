//! Brute-force checks that share no code path with the solvers: exhaustive
//! enumeration of discretized policy pairs, threshold dominance, curve
//! concavity, and seeded random instances for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::PiecewiseLinearCurve;
use crate::error::{Error, Result};
use crate::model::{
    policies_equivalent_within, GroupSpec, Policy, Proportion, ScoreDistribution, ScoreGrid, SuccessCurve,
};
use crate::objectives::{
    group_outcome, group_utility, ConstraintWeights, Group, Instance, OutcomeFn, OutcomeRule, OutcomeValues, UtilityFn,
};
use crate::solvers::{Criterion, SolverResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Policy entries range over `{0, 1/k, ..., 1}`.
    pub k: usize,
    /// Constrained pairs must match within this.
    pub constraint_tolerance: f64,
    /// Largest grid enumerated.
    pub max_size: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { k: 10, constraint_tolerance: 1e-3, max_size: 4 }
    }
}

impl OracleConfig {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    fn validate(&self, size: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidInput("oracle needs k >= 1".into()));
        }
        if size > self.max_size {
            return Err(Error::InvalidInput(format!(
                "instance too large for the oracle: {size} scores, limit {}",
                self.max_size
            )));
        }
        let count = (self.k as f64 + 1.0).powi(size as i32);
        if count > 2e7 {
            return Err(Error::InvalidInput(format!("oracle would enumerate {count:.0} policies per group")));
        }
        Ok(())
    }
}

/// Best discretized policy pair found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub objective: f64,
    pub policies: [Policy; 2],
    /// Best objective among pairs of threshold policies only.
    pub threshold_objective: f64,
}

impl OracleResult {
    /// Some optimal discretized pair is a pair of threshold policies.
    pub fn threshold_optimum_exists(&self, tol: f64) -> bool {
        self.threshold_objective >= self.objective - tol
    }
}

/// All policies on the `{0, 1/k, ..., 1}^size` lattice; entry `i` of the
/// policy with code `n` is digit `i` of `n` in base `k + 1`.
#[cfg(test)]
fn lattice(size: usize, k: usize) -> impl Iterator<Item = Vec<f64>> {
    let count = (k + 1).pow(size as u32);
    (0..count).map(move |code| decode_values(code, size, k))
}

fn decode_values(mut code: usize, size: usize, k: usize) -> Vec<f64> {
    let mut tau = vec![0.0; size];
    for t in tau.iter_mut() {
        *t = (code % (k + 1)) as f64 / k as f64;
        code /= k + 1;
    }
    tau
}

/// Constraint value, utility, threshold flag, lattice code.
struct Candidate {
    value: f64,
    utility: f64,
    threshold: bool,
    code: usize,
}

/// Threshold shape on the support: scanning upward, zeros, at most one
/// fractional level, then ones.
fn levels_are_threshold(levels: &[usize], pmf: &[f64], k: usize) -> bool {
    let mut stage = 0;
    for (l, p) in levels.iter().zip(pmf) {
        if *p == 0.0 {
            continue;
        }
        let kind = if *l == 0 {
            0
        } else if *l == k {
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

fn candidates(dist: &ScoreDistribution, u: &[f64], w: &[f64], k: usize) -> Vec<Candidate> {
    let size = dist.len();
    let p = dist.pmf();
    let count = (k + 1).pow(size as u32);
    let mut levels = vec![0usize; size];
    let mut out = Vec::with_capacity(count);
    for code in 0..count {
        let mut value = 0.0;
        let mut utility = 0.0;
        for i in 0..size {
            let t = levels[i] as f64 / k as f64;
            value += p[i] * w[i] * t;
            utility += p[i] * u[i] * t;
        }
        out.push(Candidate { value, utility, threshold: levels_are_threshold(&levels, p, k), code });
        // odometer increment, digit 0 fastest
        for l in levels.iter_mut() {
            *l += 1;
            if *l <= k {
                break;
            }
            *l = 0;
        }
    }
    out
}

fn decode(code: usize, size: usize, k: usize) -> Policy {
    Policy::new(decode_values(code, size, k)).expect("lattice values are in [0,1]")
}

/// Max-segment tree over utilities, holding `(utility, index)`.
struct MaxTree {
    n: usize,
    nodes: Vec<(f64, usize)>,
}

impl MaxTree {
    fn new(values: &[f64]) -> Self {
        let n = values.len().next_power_of_two();
        let mut nodes = vec![(f64::NEG_INFINITY, usize::MAX); 2 * n];
        for (i, &v) in values.iter().enumerate() {
            nodes[n + i] = (v, i);
        }
        for i in (1..n).rev() {
            nodes[i] = if nodes[2 * i].0 >= nodes[2 * i + 1].0 { nodes[2 * i] } else { nodes[2 * i + 1] };
        }
        Self { n, nodes }
    }

    /// Max over `[lo, hi)`.
    fn query(&self, lo: usize, hi: usize) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        let (mut l, mut r) = (lo + self.n, hi + self.n);
        while l < r {
            if l & 1 == 1 {
                if self.nodes[l].0 > best.0 {
                    best = self.nodes[l];
                }
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                if self.nodes[r].0 > best.0 {
                    best = self.nodes[r];
                }
            }
            l /= 2;
            r /= 2;
        }
        best
    }
}

/// Best `g_A U_A + g_B U_B` over lattice pairs whose constraint values
/// (under `weights`, or no constraint) agree within the tolerance. Returns
/// the overall best and the best among threshold pairs.
type Best = Option<(f64, usize, usize)>;

fn best_pairs(instance: &Instance, weights: Option<&ConstraintWeights>, cfg: &OracleConfig) -> (Best, Best) {
    let ones = vec![1.0; instance.size()];
    let weight = |g: Group| weights.map_or(ones.as_slice(), |w| w.for_group(g));
    let build = |g: Group| candidates(instance.dist(g), instance.utility_values(g), weight(g), cfg.k);
    let (ca, cb) = (build(Group::A), build(Group::B));
    let thr = |cs: &[Candidate]| -> Vec<usize> { (0..cs.len()).filter(|&i| cs[i].threshold).collect() };
    let all = |cs: &[Candidate]| -> Vec<usize> { (0..cs.len()).collect() };
    let run = |ia: &[usize], ib: &[usize]| best_in(instance, weights.is_some(), cfg, &ca, ia, &cb, ib);
    (run(&all(&ca), &all(&cb)), run(&thr(&ca), &thr(&cb)))
}

fn best_in(
    instance: &Instance,
    constrained: bool,
    cfg: &OracleConfig,
    ca: &[Candidate],
    ia: &[usize],
    cb: &[Candidate],
    ib: &[usize],
) -> Best {
    let (ga, gb) = (instance.proportion(Group::A), instance.proportion(Group::B));
    if !constrained {
        let best = |cs: &[Candidate], idx: &[usize]| {
            idx.iter().fold((f64::NEG_INFINITY, 0), |acc, &i| {
                if cs[i].utility > acc.0 {
                    (cs[i].utility, cs[i].code)
                } else {
                    acc
                }
            })
        };
        let (ua, a) = best(ca, ia);
        let (ub, b) = best(cb, ib);
        return Some((ga * ua + gb * ub, a, b));
    }
    let mut sorted: Vec<usize> = ib.to_vec();
    sorted.sort_by(|&x, &y| cb[x].value.total_cmp(&cb[y].value));
    let keys: Vec<f64> = sorted.iter().map(|&i| cb[i].value).collect();
    let tree = MaxTree::new(&sorted.iter().map(|&i| cb[i].utility).collect::<Vec<_>>());
    let mut best: Best = None;
    for &i in ia {
        let a = &ca[i];
        let lo = keys.partition_point(|&v| v < a.value - cfg.constraint_tolerance);
        let hi = keys.partition_point(|&v| v <= a.value + cfg.constraint_tolerance);
        if lo >= hi {
            continue;
        }
        let (ub, j) = tree.query(lo, hi);
        let total = ga * a.utility + gb * ub;
        if best.is_none_or(|b| total > b.0) {
            best = Some((total, a.code, cb[sorted[j]].code));
        }
    }
    best
}

/// Exhaustive discretized optimum for MaxUtil, demographic parity, equal
/// opportunity or a linear constraint (`weights` required for the latter).
pub fn oracle_constrained_opt(
    instance: &Instance,
    criterion: Criterion,
    weights: Option<&ConstraintWeights>,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    cfg.validate(instance.size())?;
    let owned;
    let w = match criterion {
        Criterion::MaxUtil => None,
        Criterion::DemParity => {
            owned = ConstraintWeights::demographic_parity(instance.size());
            Some(&owned)
        }
        Criterion::EqOpt => {
            owned = ConstraintWeights::equal_opportunity(instance)?;
            Some(&owned)
        }
        Criterion::Linear => Some(weights.ok_or_else(|| Error::InvalidInput("linear oracle needs weights".into()))?),
        Criterion::Soft | Criterion::OutcomeBased => {
            return Err(Error::InvalidInput(format!("oracle does not cover the {criterion} criterion")))
        }
    };
    let (best, best_threshold) = best_pairs(instance, w, cfg);
    let (objective, ia, ib) =
        best.ok_or_else(|| Error::InvalidInput("no lattice pair satisfies the constraint".into()))?;
    let threshold_objective = best_threshold.map_or(f64::NEG_INFINITY, |b| b.0);
    let size = instance.size();
    Ok(OracleResult { objective, policies: [decode(ia, size, cfg.k), decode(ib, size, cfg.k)], threshold_objective })
}

/// Solver result checked against the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    /// Analytic minus oracle objective.
    pub gap: f64,
    /// Constraint violation of the analytic policies.
    pub residual: f64,
    pub holds: bool,
}

/// Analytic utility is at least the oracle's minus `tolerance`, and the
/// analytic policies satisfy the constraint to 1e-12.
pub fn verify_solver_against_oracle(
    instance: &Instance,
    result: &SolverResult,
    weights: Option<&ConstraintWeights>,
    oracle: &OracleResult,
    tolerance: f64,
) -> Result<OracleComparison> {
    let owned;
    let w = match result.criterion {
        Criterion::DemParity => {
            owned = ConstraintWeights::demographic_parity(instance.size());
            Some(&owned)
        }
        Criterion::EqOpt => {
            owned = ConstraintWeights::equal_opportunity(instance)?;
            Some(&owned)
        }
        Criterion::Linear => weights,
        _ => None,
    };
    let residual = match w {
        Some(w) => {
            let value = |g: Group| -> f64 {
                let tau = result.group(g).policy.to_policy();
                let p = instance.dist(g).pmf();
                (0..p.len()).map(|i| p[i] * w.for_group(g)[i] * tau.values()[i]).sum()
            };
            (value(Group::A) - value(Group::B)).abs()
        }
        None => 0.0,
    };
    let gap = result.total_utility - oracle.objective;
    Ok(OracleComparison { gap, residual, holds: gap >= -tolerance && residual <= 1e-12 })
}

/// Threshold dominance of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceCheck {
    pub threshold: Policy,
    pub utility_gain: f64,
    pub outcome_gain: f64,
    pub equivalent: bool,
    pub holds: bool,
}

/// Replaces `tau` by the threshold policy with the same selection rate and
/// checks it is no worse in utility or outcome, and strictly better in
/// both unless the two policies are equivalent.
pub fn verify_threshold_dominance(
    dist: &ScoreDistribution,
    tau: &Policy,
    utility: &[f64],
    delta: &OutcomeValues,
) -> Result<DominanceCheck> {
    let beta = dist.selection_rate(tau)?;
    let threshold = dist.inverse_selection_rate(beta.clamp(0.0, 1.0))?.to_policy();
    let utility_gain = group_utility(dist, &threshold, utility)? - group_utility(dist, tau, utility)?;
    let outcome_gain = group_outcome(dist, &threshold, delta)? - group_outcome(dist, tau, delta)?;
    let equivalent = policies_equivalent_within(dist, &threshold, tau, 1e-12)?;
    let weak = utility_gain >= -1e-12 && outcome_gain >= -1e-12;
    let holds = weak && (equivalent || (utility_gain > 0.0 && outcome_gain > 0.0));
    Ok(DominanceCheck { threshold, utility_gain, outcome_gain, equivalent, holds })
}

/// Segment slopes are non-increasing within 1e-12.
pub fn verify_curve_concavity(curve: &PiecewiseLinearCurve) -> bool {
    curve.is_concave(1e-12)
}

/// Knobs for [`InstanceSampler`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub min_size: usize,
    pub max_size: usize,
    /// Chance each score gets zero mass (at least one score keeps mass).
    pub zero_mass_chance: f64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self { min_size: 2, max_size: 10, zero_mass_chance: 0.15 }
    }
}

/// Deterministic generator of random two-group instances: affine utility
/// (so `u` and `u / rho` are non-decreasing), affine score change, strictly
/// increasing success curves in `(0, 1]`.
pub struct InstanceSampler {
    rng: ChaCha8Rng,
    opts: SamplerOptions,
}

impl InstanceSampler {
    pub fn new(seed: u64) -> Self {
        Self::with_options(seed, SamplerOptions::default())
    }

    pub fn with_options(seed: u64, opts: SamplerOptions) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), opts }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn size(&mut self) -> usize {
        self.rng.random_range(self.opts.min_size..=self.opts.max_size)
    }

    pub fn distribution(&mut self, size: usize) -> ScoreDistribution {
        loop {
            let pmf: Vec<f64> = (0..size)
                .map(|_| {
                    if self.rng.random::<f64>() < self.opts.zero_mass_chance {
                        0.0
                    } else {
                        -(1.0 - self.rng.random::<f64>()).ln()
                    }
                })
                .collect();
            let total: f64 = pmf.iter().sum();
            if total > 0.0 {
                return ScoreDistribution::new(pmf.iter().map(|p| p / total).collect()).expect("normalized");
            }
        }
    }

    pub fn success_curve(&mut self, size: usize) -> SuccessCurve {
        let mut v: Vec<f64> = (0..size).map(|_| 0.02 + 0.98 * self.rng.random::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        SuccessCurve::new(v).expect("values in (0, 1]")
    }

    pub fn policy(&mut self, size: usize) -> Policy {
        Policy::new((0..size).map(|_| self.rng.random::<f64>()).collect()).expect("values in [0, 1)")
    }

    pub fn instance_of_size(&mut self, size: usize) -> Instance {
        let g_a = 0.05 + 0.9 * self.rng.random::<f64>();
        let group = |s: &mut Self, name: &str, share: f64| {
            let dist = s.distribution(size);
            let rho = s.success_curve(size);
            GroupSpec::new(name, dist, rho, Proportion::new(share).expect("share in (0,1)")).expect("valid group")
        };
        let a = group(self, "A", g_a);
        let b = group(self, "B", 1.0 - g_a);
        let gain = 0.5 + 1.5 * self.rng.random::<f64>();
        let loss = -(0.5 + 4.5 * self.rng.random::<f64>());
        let c_gain = 0.5 + 2.0 * self.rng.random::<f64>();
        let c_penalty = -(0.5 + 3.0 * self.rng.random::<f64>());
        Instance::new(
            ScoreGrid::new(size).expect("size >= 1"),
            a,
            b,
            UtilityFn::Affine { gain, loss },
            OutcomeFn::new(OutcomeRule::Affine { gain: c_gain, penalty: c_penalty, clamp: false }),
        )
        .expect("shares sum to one")
    }

    pub fn instance(&mut self) -> Instance {
        let size = self.size();
        self.instance_of_size(size)
    }

    /// Random positive weights `c (rho + s)` per group; with affine utility
    /// `u / w` is non-decreasing.
    pub fn linear_weights(&mut self, instance: &Instance) -> ConstraintWeights {
        let mut w = |g: Group| -> Vec<f64> {
            let scale = 0.5 + 1.5 * self.rng.random::<f64>();
            let shift = self.rng.random::<f64>();
            instance.group(g).rho.values().iter().map(|r| scale * (r + shift)).collect()
        };
        let a = w(Group::A);
        let b = w(Group::B);
        ConstraintWeights::new(a, b)
    }

    /// Random per-score non-positive offsets that stay on the grid.
    pub fn measurement_error(&mut self, size: usize) -> crate::analysis::MeasurementError {
        let shifts = (0..size as i64).map(|i| -self.rng.random_range(0..=i.min(2))).collect();
        crate::analysis::MeasurementError::new(shifts).expect("offsets stay on the grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::objectives::{outcome_curve, utility_curve};
    use crate::solvers::{solve_demparity, solve_eqopt, solve_linear_constraint, solve_maxutil};

    #[test]
    fn lattice_enumerates_every_policy() {
        let all: Vec<Vec<f64>> = lattice(2, 2).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[5], vec![1.0, 0.5]);
    }

    #[test]
    fn max_tree_queries() {
        let t = MaxTree::new(&[3.0, 1.0, 4.0, 1.0, 5.0]);
        assert_eq!(t.query(0, 2), (3.0, 0));
        assert_eq!(t.query(1, 4), (4.0, 2));
        assert_eq!(t.query(0, 5), (5.0, 4));
    }

    #[test]
    fn maxutil_oracle_matches_solver_exactly() {
        let s = fixtures::s1();
        let o = oracle_constrained_opt(&s, Criterion::MaxUtil, None, &OracleConfig::with_k(1)).unwrap();
        let r = solve_maxutil(&s).unwrap();
        assert!((o.objective - r.total_utility).abs() < 1e-15);
        assert!(o.threshold_optimum_exists(1e-12));
    }

    #[test]
    fn small_instance_against_oracle() {
        let s = fixtures::s1();
        let cfg = OracleConfig::with_k(20);
        let dp = oracle_constrained_opt(&s, Criterion::DemParity, None, &cfg).unwrap();
        let r = solve_demparity(&s).unwrap();
        let cmp = verify_solver_against_oracle(&s, &r, None, &dp, 0.5 / 20.0).unwrap();
        assert!(cmp.holds, "{cmp:?}");
        let eo = oracle_constrained_opt(&s, Criterion::EqOpt, None, &cfg).unwrap();
        let r = solve_eqopt(&s).unwrap();
        assert!(verify_solver_against_oracle(&s, &r, None, &eo, 0.5 / 20.0).unwrap().holds);
    }

    #[test]
    fn random_linear_against_oracle() {
        let mut sampler = InstanceSampler::new(7);
        let inst = sampler.instance_of_size(3);
        let w = sampler.linear_weights(&inst);
        let o = oracle_constrained_opt(&inst, Criterion::Linear, Some(&w), &OracleConfig::with_k(10)).unwrap();
        let r = solve_linear_constraint(&inst, &w).unwrap();
        assert!(verify_solver_against_oracle(&inst, &r, Some(&w), &o, 0.1).unwrap().holds);
    }

    #[test]
    fn single_score_grid() {
        let g = |name: &str, share: f64| {
            GroupSpec::new(
                name,
                ScoreDistribution::new(vec![1.0]).unwrap(),
                SuccessCurve::new(vec![0.5]).unwrap(),
                Proportion::new(share).unwrap(),
            )
            .unwrap()
        };
        let inst = Instance::new(
            ScoreGrid::new(1).unwrap(),
            g("A", 0.5),
            g("B", 0.5),
            UtilityFn::Table(vec![0.25]),
            OutcomeFn::new(OutcomeRule::Table(vec![1.0])),
        )
        .unwrap();
        let o = oracle_constrained_opt(&inst, Criterion::DemParity, None, &OracleConfig::with_k(4)).unwrap();
        assert_eq!(o.objective, 0.25);
    }

    #[test]
    fn oracle_rejects_big_instances() {
        let inst = InstanceSampler::new(1).instance_of_size(6);
        assert!(oracle_constrained_opt(&inst, Criterion::MaxUtil, None, &OracleConfig::default()).is_err());
    }

    #[test]
    fn dominance_checks() {
        let s = fixtures::s1();
        let d = s.dist(Group::A);
        let (u, delta) = (s.utility_values(Group::A), s.outcome_values(Group::A));
        let thr = d.inverse_selection_rate(0.35).unwrap().to_policy();
        let c = verify_threshold_dominance(d, &thr, u, delta).unwrap();
        assert!(c.equivalent && c.holds);
        // selecting low scores first
        let rev = Policy::new(vec![0.7, 0.0, 0.0]).unwrap();
        let c = verify_threshold_dominance(d, &rev, u, delta).unwrap();
        assert!(!c.equivalent && c.holds && c.utility_gain > 0.0 && c.outcome_gain > 0.0);
    }

    #[test]
    fn concavity_checks() {
        let s = fixtures::s1();
        assert!(verify_curve_concavity(&outcome_curve(&s, Group::A).unwrap()));
        assert!(verify_curve_concavity(&utility_curve(&s, Group::B).unwrap()));
        let bad = PiecewiseLinearCurve::rate_curve(s.dist(Group::A), &[3.0, 2.0, 1.0], 0.0).unwrap();
        assert!(!verify_curve_concavity(&bad));
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = InstanceSampler::new(42).instance();
        let b = InstanceSampler::new(42).instance();
        assert_eq!(a.dist(Group::A), b.dist(Group::A));
        assert_eq!(a.proportion(Group::A), b.proportion(Group::A));
    }
}
