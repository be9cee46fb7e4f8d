//! `solve`, `curve`, `sweep`, `verify` and `ingest-check`.

use std::fmt::Write as _;
use std::path::Path;

use super::config::ProblemConfig;
use super::ingest::{emit_distribution_csv, ingest_distribution_csv};
use super::{fmt_float, fmt_opt, CliError};
use crate::analysis::{
    classify_outcome, eqopt_underloan_predicate, group_curves, group_special_betas, sweep, verify_underselection,
    SpecialBetas, SweepSettings,
};
use crate::model::check_institution_assumption;
use crate::objectives::{Group, Instance};
use crate::oracle::{
    oracle_constrained_opt, verify_curve_concavity, verify_solver_against_oracle, verify_threshold_dominance,
    InstanceSampler, OracleConfig,
};
use crate::solvers::{solve, solve_maxutil, Criterion, SolverResult};

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub criteria: Option<Vec<Criterion>>,
    pub seed: Option<u64>,
    /// Oracle slack for `verify`.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

/// Machine output files (the first is the primary one) and a report.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub files: Vec<(String, String)>,
    pub report: String,
    /// Some verification property failed.
    pub failed: bool,
}

impl CommandOutput {
    /// What goes to stdout.
    pub fn stdout(&self, format: Format) -> &str {
        match format {
            Format::Text => &self.report,
            Format::Csv => self.files.first().map_or("", |f| f.1.as_str()),
        }
    }
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        Ok(Self { w })
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<(), CliError> {
        self.w.write_record(fields.into_iter().collect::<Vec<_>>())?;
        Ok(())
    }

    fn finish(self) -> Result<String, CliError> {
        let bytes = self.w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

fn criteria_for(cfg: &ProblemConfig, opts: &RunOptions) -> Result<Vec<Criterion>, CliError> {
    match &opts.criteria {
        Some(c) if !c.is_empty() => Ok(c.clone()),
        _ => cfg.criteria(),
    }
}

fn solve_one(cfg: &ProblemConfig, inst: &Instance, criterion: Criterion) -> Result<SolverResult, CliError> {
    let weights = match criterion {
        Criterion::Linear => cfg.linear_weights(inst)?,
        Criterion::Soft => cfg.soft_weights(inst)?,
        _ => None,
    };
    let penalty = cfg.soft_penalty()?;
    Ok(solve(inst, criterion, weights.as_ref(), penalty.as_ref(), cfg.budget)?)
}

fn names(inst: &Instance) -> [&str; 2] {
    [inst.group(Group::A).name.as_str(), inst.group(Group::B).name.as_str()]
}

pub fn run_solve(cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let inst = cfg.instance()?;
    let criteria = criteria_for(cfg, opts)?;
    let mu = solve_maxutil(&inst)?;
    let results = criteria.iter().map(|&c| solve_one(cfg, &inst, c)).collect::<Result<Vec<_>, _>>()?;
    let group_names = names(&inst);

    let mut report = String::new();
    let _ = writeln!(report, "scores: {}  share of {}: {}", inst.size(), group_names[0], inst.proportion(Group::A));
    let _ = writeln!(
        report,
        "{:<10} {:<6} {:>10} {:>7} {:>8} {:>10} {:>10} {:<12} vs maxutil",
        "criterion", "group", "rate", "cutoff", "gamma", "utility", "outcome", "regime"
    );
    let mut t = Table::new(&[
        "criterion",
        "group",
        "rate",
        "rate_lo",
        "rate_hi",
        "cutoff",
        "gamma",
        "utility",
        "outcome",
        "tpr",
        "absolute_regime",
        "relative_regime",
        "total_utility",
        "soft_gap",
        "lambda_star",
    ])?;
    for r in &results {
        for g in Group::BOTH {
            let s = r.group(g);
            let regime = classify_outcome(s.outcome, mu.group(g).outcome);
            t.row([
                r.criterion.name().to_string(),
                group_names[g.index()].to_string(),
                fmt_float(s.rate),
                fmt_float(s.rates.lo),
                fmt_float(s.rates.hi),
                s.policy.cutoff().to_string(),
                fmt_float(s.policy.gamma()),
                fmt_float(s.utility),
                fmt_float(s.outcome),
                fmt_opt(s.tpr),
                regime.absolute.name().to_string(),
                regime.relative.name().to_string(),
                fmt_float(r.total_utility),
                fmt_opt(r.soft.map(|d| d.gap)),
                fmt_opt(r.soft.and_then(|d| d.lambda_star)),
            ])?;
            let _ = writeln!(
                report,
                "{:<10} {:<6} {:>10.6} {:>7} {:>8.4} {:>10.6} {:>10.6} {:<12} {}",
                r.criterion.name(),
                group_names[g.index()],
                s.rate,
                s.policy.cutoff(),
                s.policy.gamma(),
                s.utility,
                s.outcome,
                regime.absolute.name(),
                regime.relative.name()
            );
        }
    }

    let mut checks = Table::new(&["check", "value"])?;
    let mut check_lines = Vec::new();
    let mut push_check = |name: String, value: String| -> Result<(), CliError> {
        check_lines.push(format!("{name}: {value}"));
        checks.row([name, value])
    };

    let mut betas = Table::new(&[
        "group",
        "beta_maxutil",
        "beta_star",
        "beta_star_hi",
        "max_outcome",
        "beta_zero",
        "beta_bar",
        "no_interior_harm_threshold",
        "complement_beyond_domain",
    ])?;
    let _ = writeln!(report, "special rates:");
    for g in Group::BOTH {
        match group_special_betas(&inst, g) {
            Ok(b) => {
                write_betas(&mut betas, group_names[g.index()], &b)?;
                let _ = writeln!(
                    report,
                    "  {}: maxutil {:.6}  outcome peak {:.6} (max {:.6})  harm threshold {:.6}{}  complement {:.6}{}",
                    group_names[g.index()],
                    b.beta_maxutil,
                    b.beta_star,
                    b.max_outcome,
                    b.beta_zero,
                    if b.no_interior_harm_threshold { " (domain end)" } else { "" },
                    b.beta_bar,
                    if b.complement_beyond_domain { " (domain end)" } else { "" },
                );
            }
            Err(e) => {
                let _ = writeln!(report, "  {}: unavailable ({e})", group_names[g.index()]);
                push_check(format!("special_rates_{}", group_names[g.index()]), format!("unavailable: {e}"))?;
            }
        }
    }

    for g in Group::BOTH {
        let holds = check_institution_assumption(inst.utility_values(g), &inst.outcome_values(g).net())?;
        push_check(format!("assumption_{}", group_names[g.index()]), holds.to_string())?;
    }
    match eqopt_underloan_predicate(&inst) {
        Ok(u) => {
            push_check("eqopt_underloan".into(), u.holds.to_string())?;
            push_check("eqopt_underloan_strict_chain".into(), u.strict_chain.to_string())?;
            push_check(format!("tpr_maxutil_{}", group_names[0]), fmt_float(u.tpr_maxutil[0]))?;
            push_check(format!("tpr_maxutil_{}", group_names[1]), fmt_float(u.tpr_maxutil[1]))?;
        }
        Err(e) => push_check("eqopt_underloan".into(), format!("unavailable: {e}"))?,
    }
    let _ = writeln!(report, "checks:");
    for l in &check_lines {
        let _ = writeln!(report, "  {l}");
    }

    Ok(CommandOutput {
        files: vec![
            ("solve.csv".into(), t.finish()?),
            ("special_rates.csv".into(), betas.finish()?),
            ("checks.csv".into(), checks.finish()?),
        ],
        report,
        failed: false,
    })
}

fn write_betas(t: &mut Table, name: &str, b: &SpecialBetas) -> Result<(), CliError> {
    t.row([
        name.to_string(),
        fmt_float(b.beta_maxutil),
        fmt_float(b.beta_star),
        fmt_float(b.beta_star_interval.1),
        fmt_float(b.max_outcome),
        fmt_float(b.beta_zero),
        fmt_float(b.beta_bar),
        b.no_interior_harm_threshold.to_string(),
        b.complement_beyond_domain.to_string(),
    ])
}

pub fn run_curve(cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let inst = cfg.instance()?;
    let criteria = criteria_for(cfg, opts)?;
    let group_names = names(&inst);
    let mut curves = Table::new(&["series", "group", "x", "y"])?;
    let mut report = String::new();
    for g in Group::BOTH {
        let (outcome, utility) = group_curves(&inst, g)?;
        for (series, c) in [("outcome", &outcome), ("utility", &utility)] {
            for (x, y) in c.breakpoints().iter().zip(c.values()) {
                curves.row([series.to_string(), group_names[g.index()].to_string(), fmt_float(*x), fmt_float(*y)])?;
            }
            let _ =
                writeln!(report, "{series} curve of {}: {} breakpoints", group_names[g.index()], c.breakpoints().len());
        }
    }
    let mut markers = Table::new(&["criterion", "group", "rate", "outcome", "utility"])?;
    for &c in &criteria {
        let r = solve_one(cfg, &inst, c)?;
        for g in Group::BOTH {
            let s = r.group(g);
            markers.row([
                c.name().to_string(),
                group_names[g.index()].to_string(),
                fmt_float(s.rate),
                fmt_float(s.outcome),
                fmt_float(s.utility),
            ])?;
            let _ = writeln!(report, "{} marker for {}: rate {:.6}", c.name(), group_names[g.index()], s.rate);
        }
    }
    Ok(CommandOutput {
        files: vec![("curves.csv".into(), curves.finish()?), ("markers.csv".into(), markers.finish()?)],
        report,
        failed: false,
    })
}

pub fn run_sweep(cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let inst = cfg.instance()?;
    let criteria = criteria_for(cfg, opts)?;
    let (param, grid) = cfg.sweep_grid()?;
    // one weight vector serves both linear and soft rows
    let weights =
        if criteria.contains(&Criterion::Linear) { cfg.linear_weights(&inst)? } else { cfg.soft_weights(&inst)? };
    let settings = SweepSettings { criteria, weights, penalty: cfg.soft_penalty()?, budget: cfg.budget };
    let rows = sweep(&inst, param, &grid, &settings)?;
    let mut t = Table::new(&[
        "parameter",
        "value",
        "criterion",
        "rate_a",
        "rate_b",
        "outcome_a",
        "outcome_b",
        "total_utility",
        "soft_gap",
        "absolute_regime_a",
        "relative_regime_a",
        "absolute_regime_b",
        "relative_regime_b",
    ])?;
    let mut report = String::new();
    let _ = writeln!(
        report,
        "{:>12} {:<10} {:>10} {:>10} {:>10} {:>10}",
        param.name(),
        "criterion",
        "rate_a",
        "rate_b",
        "outcome_a",
        "outcome_b"
    );
    for r in &rows {
        let res = &r.result;
        t.row([
            param.name().to_string(),
            fmt_float(r.value),
            res.criterion.name().to_string(),
            fmt_float(res.rate(Group::A)),
            fmt_float(res.rate(Group::B)),
            fmt_float(res.group(Group::A).outcome),
            fmt_float(res.group(Group::B).outcome),
            fmt_float(res.total_utility),
            fmt_opt(res.soft.map(|s| s.gap)),
            r.regimes[0].absolute.name().to_string(),
            r.regimes[0].relative.name().to_string(),
            r.regimes[1].absolute.name().to_string(),
            r.regimes[1].relative.name().to_string(),
        ])?;
        let _ = writeln!(
            report,
            "{:>12.6} {:<10} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            r.value,
            res.criterion.name(),
            res.rate(Group::A),
            res.rate(Group::B),
            res.group(Group::A).outcome,
            res.group(Group::B).outcome
        );
    }
    Ok(CommandOutput { files: vec![("sweep.csv".into(), t.finish()?)], report, failed: false })
}

/// Pass/fail tally for one property.
struct Property {
    name: &'static str,
    passed: usize,
    total: usize,
    skipped: Option<String>,
}

impl Property {
    fn new(name: &'static str) -> Self {
        Self { name, passed: 0, total: 0, skipped: None }
    }

    fn record(&mut self, ok: bool) {
        self.total += 1;
        self.passed += usize::from(ok);
    }

    fn status(&self) -> &'static str {
        if self.skipped.is_some() {
            "skipped"
        } else if self.passed == self.total {
            "pass"
        } else {
            "fail"
        }
    }
}

const DEFAULT_VERIFY_POLICIES: usize = 200;
const DEFAULT_VERIFY_ERRORS: usize = 50;
const DEFAULT_VERIFY_K: usize = 20;

pub fn run_verify(cfg: &ProblemConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    let inst = cfg.instance()?;
    let v = cfg.verify.clone();
    let seed = opts.seed.or(v.as_ref().and_then(|v| v.seed)).unwrap_or(0);
    let n_policies = v.as_ref().and_then(|v| v.policies).unwrap_or(DEFAULT_VERIFY_POLICIES);
    let n_errors = v.as_ref().and_then(|v| v.errors).unwrap_or(DEFAULT_VERIFY_ERRORS);
    let k = v.as_ref().and_then(|v| v.k).unwrap_or(DEFAULT_VERIFY_K);
    let mut oracle_cfg = OracleConfig::with_k(k);
    if let Some(m) = v.as_ref().and_then(|v| v.max_size) {
        oracle_cfg.max_size = m;
    }
    let max_u = Group::BOTH.iter().flat_map(|&g| inst.utility_values(g).iter().map(|u| u.abs())).fold(0.0, f64::max);
    let tolerance = opts.tolerance.or(v.as_ref().and_then(|v| v.tolerance)).unwrap_or(max_u / k as f64);
    let mut sampler = InstanceSampler::new(seed);
    let size = inst.size();
    let monotone = |xs: &[f64]| xs.windows(2).all(|w| w[1] >= w[0]);

    // threshold dominance on random policies
    let mut dominance = Property::new("threshold_dominance");
    let mut concavity = Property::new("curve_concavity");
    for g in Group::BOTH {
        let (u, delta) = (inst.utility_values(g), inst.outcome_values(g));
        if !monotone(u) || !monotone(&delta.net()) {
            dominance.skipped = Some("utility or score change not non-decreasing".into());
            concavity.skipped = dominance.skipped.clone();
            continue;
        }
        for _ in 0..n_policies {
            let tau = sampler.policy(size);
            dominance.record(verify_threshold_dominance(inst.dist(g), &tau, u, delta)?.holds);
        }
        let (oc, uc) = group_curves(&inst, g)?;
        concavity.record(verify_curve_concavity(&oc));
        concavity.record(verify_curve_concavity(&uc));
    }

    // solvers against brute force
    let mut oracle_prop = Property::new("solver_vs_oracle");
    let mut notes = Vec::new();
    let linear = cfg.linear_weights(&inst)?;
    let mut oracle_criteria = vec![Criterion::MaxUtil, Criterion::DemParity, Criterion::EqOpt];
    if linear.is_some() {
        oracle_criteria.push(Criterion::Linear);
    }
    for c in oracle_criteria {
        let w = if c == Criterion::Linear { linear.as_ref() } else { None };
        let analytic = match solve(&inst, c, w, None, None) {
            Ok(r) => r,
            Err(e) if e.is_precondition() => {
                notes.push(format!("{c} skipped: {e}"));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let oracle = oracle_constrained_opt(&inst, c, w, &oracle_cfg)?;
        let cmp = verify_solver_against_oracle(&inst, &analytic, w, &oracle, tolerance)?;
        if !cmp.holds {
            notes.push(format!("{c}: analytic - oracle = {:e}, residual {:e}", cmp.gap, cmp.residual));
        }
        oracle_prop.record(cmp.holds);
    }

    // MaxUtil never causes active harm under the institution assumption
    let mut no_harm = Property::new("maxutil_no_active_harm");
    let assumption = Group::BOTH.iter().all(|&g| inst.assumption_holds(g));
    if assumption {
        let mu = solve_maxutil(&inst)?;
        for g in Group::BOTH {
            let b = group_special_betas(&inst, g)?;
            let out = mu.group(g).outcome;
            no_harm.record(out >= -1e-10 && out <= b.max_outcome + 1e-10);
        }
    } else {
        no_harm.skipped = Some("assumption fails".into());
    }

    // under-estimating group A's scores never raises its rate
    let mut under = Property::new("underselection");
    let mut uncertified = 0;
    for _ in 0..n_errors {
        let e = sampler.measurement_error(size);
        match verify_underselection(&inst, &e) {
            Ok(r) => {
                under.record(r.holds());
                uncertified += usize::from(r.eqopt_counterexample());
            }
            Err(e) if e.is_precondition() => {
                under.skipped = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    if uncertified > 0 {
        notes.push(format!(
            "underselection: {uncertified} equal-opportunity increases where threshold-wise TPR dominance held but the t-space certificate did not"
        ));
    }

    let props = [dominance, concavity, oracle_prop, no_harm, under];
    let mut t = Table::new(&["property", "passed", "total", "status"])?;
    let mut report = String::new();
    let mut failed = false;
    for p in &props {
        t.row([p.name.to_string(), p.passed.to_string(), p.total.to_string(), p.status().to_string()])?;
        match &p.skipped {
            Some(why) => {
                let _ = writeln!(report, "SKIP {} (skipped: {why})", p.name);
            }
            None => {
                let _ = writeln!(report, "{} {} {}/{}", p.status().to_uppercase(), p.name, p.passed, p.total);
            }
        }
        failed |= p.status() == "fail";
    }
    for n in &notes {
        let _ = writeln!(report, "note: {n}");
    }
    let _ = writeln!(report, "seed {seed}, oracle k = {k}, oracle tolerance {tolerance:e}");
    Ok(CommandOutput { files: vec![("verify.csv".into(), t.finish()?)], report, failed })
}

pub fn run_ingest_check(path: &Path) -> Result<CommandOutput, CliError> {
    let ing = ingest_distribution_csv(path)?;
    let mut report = String::new();
    let _ = writeln!(
        report,
        "{} scores from {} to {}",
        ing.scores.len(),
        ing.scores.first().copied().unwrap_or(f64::NAN),
        ing.scores.last().copied().unwrap_or(f64::NAN)
    );
    for g in &ing.groups {
        let mean: f64 = g.dist.pmf().iter().zip(&ing.scores).map(|(p, s)| p * s).sum();
        let _ = writeln!(
            report,
            "group {}: raw pmf sum {}, mean score {:.4}, mean repay_prob {:.4}",
            g.name,
            g.raw_sum,
            mean,
            g.dist.pmf().iter().zip(g.rho.values()).map(|(p, r)| p * r).sum::<f64>()
        );
    }
    for w in &ing.warnings {
        let _ = writeln!(report, "warning: {w}");
    }
    let mut buf = Vec::new();
    let gs: Vec<_> = ing.groups.iter().map(|g| (g.name.as_str(), &g.dist, &g.rho)).collect();
    emit_distribution_csv(&mut buf, &ing.scores, &gs)?;
    let body = String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(CommandOutput { files: vec![("ingested.csv".into(), body)], report, failed: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1_config() -> ProblemConfig {
        ProblemConfig::parse(
            r#"
share_a = 0.5
criteria = ["maxutil", "demparity", "eqopt"]
[grid]
size = 3
[group_a]
pmf = [0.5, 0.3, 0.2]
repay_prob = [0.25, 0.5, 0.75]
[group_b]
pmf = [0.2, 0.3, 0.5]
repay_prob = [0.25, 0.5, 0.75]
[utility]
kind = "affine"
gain = 1.0
loss = -1.0
[outcome]
kind = "affine"
gain = 2.0
penalty = -1.0
[sweep]
parameter = "g_a"
start = 0.1
stop = 0.9
steps = 5
[verify]
policies = 50
errors = 10
k = 10
"#,
        )
        .unwrap()
    }

    fn cell<'a>(csv: &'a str, row: usize, col: &str) -> &'a str {
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let i = header.iter().position(|h| *h == col).unwrap();
        lines.nth(row).unwrap().split(',').nth(i).unwrap()
    }

    #[test]
    fn solve_reports_demparity_rate() {
        let out = run_solve(&s1_config(), &RunOptions::default()).unwrap();
        let solve = &out.files[0].1;
        // rows: maxutil A, maxutil B, demparity A, ...
        assert_eq!(cell(solve, 2, "criterion"), "demparity");
        assert_eq!(cell(solve, 2, "rate").parse::<f64>().unwrap(), 0.5);
        assert!(out.report.contains("assumption_A"));
    }

    #[test]
    fn markers_match_solve() {
        let cfg = s1_config();
        let s = run_solve(&cfg, &RunOptions::default()).unwrap();
        let c = run_curve(&cfg, &RunOptions::default()).unwrap();
        for row in 0..6 {
            assert_eq!(cell(&s.files[0].1, row, "rate"), cell(&c.files[1].1, row, "rate"));
        }
        // 4 breakpoints per series per group
        assert_eq!(c.files[0].1.lines().count(), 1 + 4 * 4);
    }

    #[test]
    fn criterion_override() {
        let opts = RunOptions { criteria: Some(vec![Criterion::EqOpt]), ..Default::default() };
        let out = run_solve(&s1_config(), &opts).unwrap();
        assert_eq!(out.files[0].1.lines().count(), 3);
    }

    #[test]
    fn sweep_rows() {
        let out = run_sweep(&s1_config(), &RunOptions::default()).unwrap();
        assert_eq!(out.files[0].1.lines().count(), 1 + 5 * 3);
    }

    #[test]
    fn verify_passes_then_fails_under_negative_slack() {
        let cfg = s1_config();
        let ok = run_verify(&cfg, &RunOptions::default()).unwrap();
        assert!(!ok.failed, "{}", ok.report);
        let bad = run_verify(&cfg, &RunOptions { tolerance: Some(-1.0), ..Default::default() }).unwrap();
        assert!(bad.failed);
        assert!(bad.report.contains("FAIL solver_vs_oracle"));
    }

    #[test]
    fn verify_skips_harm_check_without_assumption() {
        let mut cfg = s1_config();
        cfg.outcome = super::super::config::OutcomeSpec::Table { values: vec![-3.0, -2.0, -1.0], unselected: None };
        let out = run_verify(&cfg, &RunOptions::default()).unwrap();
        assert!(out.report.contains("skipped: assumption fails"), "{}", out.report);
    }

    #[test]
    fn verify_rejects_large_instance() {
        let mut cfg = s1_config();
        cfg.grid = None;
        cfg.group_a.pmf = Some(vec![0.2; 5]);
        cfg.group_a.repay_prob = Some(vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        cfg.group_b = cfg.group_a.clone();
        let err = run_verify(&cfg, &RunOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), super::super::EXIT_CONFIG);
    }
}
