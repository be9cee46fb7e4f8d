//! TOML problem configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::ingest::{ingest_distribution_csv, IngestedGroup};
use super::CliError;
use crate::analysis::SweepParameter;
use crate::model::{GroupSpec, Proportion, ScoreDistribution, ScoreGrid, SuccessCurve};
use crate::objectives::{ConstraintWeights, Instance, OutcomeFn, OutcomeRule, UtilityFn};
use crate::solvers::{Criterion, PenaltyKind, SoftPenalty};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Optional when the groups come from a CSV file.
    pub grid: Option<GridSpec>,
    /// Group A's population share.
    pub share_a: f64,
    pub data: Option<DataSpec>,
    pub group_a: GroupConfig,
    pub group_b: GroupConfig,
    pub utility: UtilitySpec,
    pub outcome: OutcomeSpec,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<String>,
    pub linear: Option<LinearSpec>,
    pub soft: Option<SoftSpec>,
    /// Utility budget of the outcome-based criterion.
    pub budget: Option<f64>,
    pub sweep: Option<SweepSpec>,
    pub verify: Option<VerifySpec>,
    pub output: Option<OutputSpec>,
    /// Directory relative paths resolve against; set by [`ProblemConfig::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_criteria() -> Vec<String> {
    vec!["maxutil".into(), "demparity".into(), "eqopt".into()]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub size: Option<usize>,
    /// Display labels; internals use indices 1..=C.
    pub labels: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    /// `score,group,pmf,repay_prob` file.
    pub csv: PathBuf,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    /// Display name; also the `group` key looked up in the CSV.
    pub name: Option<String>,
    pub pmf: Option<Vec<f64>>,
    pub repay_prob: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilitySpec {
    Affine { gain: f64, loss: f64 },
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutcomeSpec {
    Affine {
        gain: f64,
        penalty: f64,
        #[serde(default)]
        clamp: bool,
        unselected: Option<Vec<f64>>,
    },
    Table {
        values: Vec<f64>,
        unselected: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub weights_a: Vec<f64>,
    pub weights_b: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftSpec {
    /// `absolute`, `quadratic` or `table`.
    #[serde(default = "default_penalty_kind")]
    pub kind: String,
    #[serde(default)]
    pub lambda: f64,
    /// `[t, phi]` knots for the `table` kind.
    pub knots: Option<Vec<[f64; 2]>>,
    /// `demographic_parity` (default) or `equal_opportunity`; `linear` uses
    /// the `[linear]` weights.
    pub constraint: Option<String>,
}

fn default_penalty_kind() -> String {
    "absolute".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// `g_a`, `lambda` or `loss_ratio`.
    pub parameter: String,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub seed: Option<u64>,
    /// Random policies checked for threshold dominance.
    pub policies: Option<usize>,
    /// Random measurement errors checked for under-selection.
    pub errors: Option<usize>,
    /// Oracle lattice resolution.
    pub k: Option<usize>,
    /// Largest grid the oracle enumerates.
    pub max_size: Option<usize>,
    /// Slack allowed below the oracle objective; defaults to `max|u| / k`.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn criteria(&self) -> Result<Vec<Criterion>, CliError> {
        parse_criteria(&self.criteria)
    }

    /// Builds and validates the instance, reading the CSV when configured.
    pub fn instance(&self) -> Result<Instance, CliError> {
        let ingested = match &self.data {
            Some(d) => Some(ingest_distribution_csv(&self.resolve(&d.csv))?),
            None => None,
        };
        let build =
            |cfg: &GroupConfig, default_name: &str, share: f64| -> Result<(GroupSpec, Option<Vec<f64>>), CliError> {
                let name = cfg.name.clone().unwrap_or_else(|| default_name.to_string());
                let share = Proportion::new(share)?;
                match (&cfg.pmf, &cfg.repay_prob, &ingested) {
                    (Some(p), Some(r), _) => Ok((
                        GroupSpec::new(name, ScoreDistribution::new(p.clone())?, SuccessCurve::new(r.clone())?, share)?,
                        None,
                    )),
                    (None, None, Some(ing)) => {
                        let g: &IngestedGroup = ing
                            .groups
                            .iter()
                            .find(|g| g.name == name)
                            .ok_or_else(|| config_err(format!("group '{name}' not found in the CSV")))?;
                        Ok((GroupSpec::new(name, g.dist.clone(), g.rho.clone(), share)?, Some(ing.scores.clone())))
                    }
                    _ => Err(config_err(format!(
                        "group '{name}' needs both pmf and repay_prob, or neither with a [data] csv"
                    ))),
                }
            };
        let (a, labels_a) = build(&self.group_a, "A", self.share_a)?;
        let (b, _) = build(&self.group_b, "B", 1.0 - self.share_a)?;
        let grid = match &self.grid {
            Some(GridSpec { labels: Some(l), .. }) => ScoreGrid::with_labels(l.clone())?,
            Some(GridSpec { size: Some(n), .. }) => ScoreGrid::new(*n)?,
            Some(_) => return Err(config_err("[grid] needs size or labels")),
            None => match labels_a {
                Some(l) => ScoreGrid::with_labels(l)?,
                None => ScoreGrid::new(a.len())?,
            },
        };
        let utility = match &self.utility {
            UtilitySpec::Affine { gain, loss } => UtilityFn::Affine { gain: *gain, loss: *loss },
            UtilitySpec::Table { values } => UtilityFn::Table(values.clone()),
        };
        let outcome = match &self.outcome {
            OutcomeSpec::Affine { gain, penalty, clamp, unselected } => OutcomeFn {
                selected: OutcomeRule::Affine { gain: *gain, penalty: *penalty, clamp: *clamp },
                unselected: unselected.clone(),
            },
            OutcomeSpec::Table { values, unselected } => {
                OutcomeFn { selected: OutcomeRule::Table(values.clone()), unselected: unselected.clone() }
            }
        };
        Ok(Instance::new(grid, a, b, utility, outcome)?)
    }

    pub fn linear_weights(&self, instance: &Instance) -> Result<Option<ConstraintWeights>, CliError> {
        match &self.linear {
            None => Ok(None),
            Some(l) => {
                let w = ConstraintWeights::new(l.weights_a.clone(), l.weights_b.clone());
                w.validate(instance)?;
                Ok(Some(w))
            }
        }
    }

    pub fn soft_penalty(&self) -> Result<Option<SoftPenalty>, CliError> {
        let Some(s) = &self.soft else { return Ok(None) };
        let kind = match s.kind.as_str() {
            "absolute" => PenaltyKind::Absolute,
            "quadratic" => PenaltyKind::Quadratic,
            "table" => PenaltyKind::Table(
                s.knots
                    .as_ref()
                    .ok_or_else(|| config_err("table penalty needs knots"))?
                    .iter()
                    .map(|k| (k[0], k[1]))
                    .collect(),
            ),
            other => return Err(config_err(format!("unknown penalty kind '{other}'"))),
        };
        Ok(Some(SoftPenalty::new(kind, s.lambda)?))
    }

    /// Constraint the soft penalty applies to; `None` means the solver default.
    pub fn soft_weights(&self, instance: &Instance) -> Result<Option<ConstraintWeights>, CliError> {
        let constraint = self.soft.as_ref().and_then(|s| s.constraint.as_deref());
        match constraint {
            None | Some("demographic_parity") => Ok(None),
            Some("equal_opportunity") => Ok(Some(ConstraintWeights::equal_opportunity(instance)?)),
            Some("linear") => self
                .linear_weights(instance)?
                .map(Some)
                .ok_or_else(|| config_err("soft constraint 'linear' needs a [linear] section")),
            Some(other) => Err(config_err(format!("unknown soft constraint '{other}'"))),
        }
    }

    pub fn sweep_grid(&self) -> Result<(SweepParameter, Vec<f64>), CliError> {
        let s = self.sweep.as_ref().ok_or_else(|| config_err("sweep needs a [sweep] section"))?;
        let param: SweepParameter = s.parameter.parse()?;
        let values = match (&s.values, s.start, s.stop, s.steps) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => linspace(a, b, n),
            _ => return Err(config_err("[sweep] needs either values or start/stop/steps")),
        };
        Ok((param, values))
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output.as_ref().and_then(|o| o.dir.as_ref()).map(|d| self.resolve(d))
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive, endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

pub fn parse_criteria<S: AsRef<str>>(names: &[S]) -> Result<Vec<Criterion>, CliError> {
    let out: Vec<Criterion> = names
        .iter()
        .flat_map(|s| s.as_ref().split(',').map(str::to_string).collect::<Vec<_>>())
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Criterion>().map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(config_err("no criteria requested"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::Group;

    const S1: &str = r#"
share_a = 0.5
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
"#;

    #[test]
    fn inline_config_matches_fixture() {
        let inst = ProblemConfig::parse(S1).unwrap().instance().unwrap();
        let s1 = crate::fixtures::s1();
        for g in Group::BOTH {
            assert_eq!(inst.dist(g), s1.dist(g));
            assert_eq!(inst.utility_values(g), s1.utility_values(g));
            assert_eq!(inst.outcome_values(g), s1.outcome_values(g));
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = S1.replace("share_a", "shares_a");
        assert!(matches!(ProblemConfig::parse(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn half_specified_group_rejected() {
        let bad = S1.replacen("repay_prob = [0.25, 0.5, 0.75]\n", "", 1);
        assert!(ProblemConfig::parse(&bad).unwrap().instance().is_err());
    }

    #[test]
    fn criteria_lists() {
        let c = parse_criteria(&["maxutil,dp", "eqopt"]).unwrap();
        assert_eq!(c, vec![Criterion::MaxUtil, Criterion::DemParity, Criterion::EqOpt]);
        assert!(parse_criteria(&["nope"]).is_err());
        assert!(parse_criteria::<&str>(&[]).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.1, 0.9, 5);
        assert_eq!(v.len(), 5);
        assert_eq!((v[0], v[4]), (0.1, 0.9));
    }
}
