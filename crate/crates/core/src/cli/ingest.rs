//! `score,group,pmf,repay_prob` CSV ingest and emit.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use super::{fmt_float, CliError};
use crate::model::{ScoreDistribution, SuccessCurve, RENORMALIZE_TOLERANCE, SUM_TOLERANCE};

#[derive(Debug, Deserialize)]
struct Row {
    score: f64,
    group: String,
    pmf: f64,
    repay_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedGroup {
    pub name: String,
    pub dist: ScoreDistribution,
    pub rho: SuccessCurve,
    /// Raw pmf sum before renormalization.
    pub raw_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    /// Ascending score labels shared by every group.
    pub scores: Vec<f64>,
    /// In order of first appearance.
    pub groups: Vec<IngestedGroup>,
    pub warnings: Vec<String>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn ingest_distribution_csv(path: &Path) -> Result<Ingested, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ingest_reader(file).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn ingest_reader<R: std::io::Read>(reader: R) -> Result<Ingested, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["score", "group", "pmf", "repay_prob"] {
        return Err(bad(format!(
            "header must be score,group,pmf,repay_prob (got {})",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut order: Vec<String> = Vec::new();
    // group -> score bits -> (score, pmf, repay_prob)
    let mut rows: BTreeMap<String, BTreeMap<u64, (f64, f64, f64)>> = BTreeMap::new();
    for (line, rec) in rdr.deserialize::<Row>().enumerate() {
        let r = rec.map_err(|e| bad(format!("row {}: {e}", line + 2)))?;
        if !r.score.is_finite() || !r.pmf.is_finite() || !r.repay_prob.is_finite() {
            return Err(bad(format!("row {}: non-finite value", line + 2)));
        }
        if !(0.0..=1.0).contains(&r.repay_prob) {
            return Err(bad(format!("row {}: repay_prob {} outside [0, 1]", line + 2, r.repay_prob)));
        }
        if !order.contains(&r.group) {
            order.push(r.group.clone());
        }
        // +0.0 normalizes -0.0 so both map to one key
        let key = ordered_bits(r.score + 0.0);
        if rows.entry(r.group.clone()).or_default().insert(key, (r.score, r.pmf, r.repay_prob)).is_some() {
            return Err(bad(format!("duplicate row for score {} in group '{}'", r.score, r.group)));
        }
    }
    if order.is_empty() {
        return Err(bad("no data rows"));
    }

    let scores: Vec<f64> = rows[&order[0]].values().map(|v| v.0).collect();
    for g in &order[1..] {
        let other: Vec<f64> = rows[g].values().map(|v| v.0).collect();
        if other != scores {
            return Err(bad(format!("inconsistent grids: group '{g}' scores differ from group '{}'", order[0])));
        }
    }
    check_contiguous(&scores)?;

    let mut warnings = Vec::new();
    let mut groups = Vec::new();
    for name in &order {
        let vals: Vec<(f64, f64, f64)> = rows[name].values().copied().collect();
        let pmf: Vec<f64> = vals.iter().map(|v| v.1).collect();
        let raw_sum: f64 = pmf.iter().sum();
        if (raw_sum - 1.0).abs() > RENORMALIZE_TOLERANCE + 1e-12 {
            return Err(bad(format!("group '{name}': pmf sums to {raw_sum}, more than 1e-6 from 1")));
        }
        if (raw_sum - 1.0).abs() > SUM_TOLERANCE {
            let msg = format!("group '{name}': pmf sums to {raw_sum}; renormalized");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let pmf: Vec<f64> = pmf.iter().map(|p| p / raw_sum).collect();
        groups.push(IngestedGroup {
            name: name.clone(),
            dist: ScoreDistribution::new(pmf)?,
            rho: SuccessCurve::new(vals.iter().map(|v| v.2).collect())?,
            raw_sum,
        });
    }
    Ok(Ingested { scores, groups, warnings })
}

/// Bit pattern whose unsigned order matches numeric order for finite floats.
fn ordered_bits(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Scores must be evenly spaced; the smallest gap is the step, so a file
/// listing only scores 1 and 3 reads as a two-point grid with step 2.
fn check_contiguous(scores: &[f64]) -> Result<(), CliError> {
    if scores.len() < 2 {
        return Ok(());
    }
    let step = scores.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    for w in scores.windows(2) {
        let ratio = (w[1] - w[0]) / step;
        if (ratio - 1.0).abs() > 1e-9 {
            return Err(bad(format!("missing score between {} and {}", w[0], w[1])));
        }
    }
    Ok(())
}

/// Writes the groups back in the ingest format.
pub fn emit_distribution_csv<W: Write>(
    out: W,
    scores: &[f64],
    groups: &[(&str, &ScoreDistribution, &SuccessCurve)],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["score", "group", "pmf", "repay_prob"])?;
    for (name, dist, rho) in groups {
        for (i, s) in scores.iter().enumerate() {
            w.write_record([fmt_score(*s), name.to_string(), fmt_float(dist.pmf()[i]), fmt_float(rho.values()[i])])?;
        }
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

/// Integral labels print without an exponent.
fn fmt_score(s: f64) -> String {
    if s.fract() == 0.0 && s.abs() < 1e15 {
        format!("{}", s as i64)
    } else {
        fmt_float(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S1: &str = "score,group,pmf,repay_prob\n1,A,0.5,0.25\n2,A,0.3,0.5\n3,A,0.2,0.75\n1,B,0.2,0.25\n2,B,0.3,0.5\n3,B,0.5,0.75\n";

    #[test]
    fn echoes_small_instance() {
        let ing = ingest_reader(S1.as_bytes()).unwrap();
        let s1 = crate::fixtures::s1();
        assert_eq!(ing.scores, vec![1.0, 2.0, 3.0]);
        assert_eq!(ing.groups[0].name, "A");
        assert_eq!(&ing.groups[0].dist, s1.dist(crate::Group::A));
        assert_eq!(&ing.groups[1].dist, s1.dist(crate::Group::B));
        assert_eq!(ing.groups[1].rho.values(), &[0.25, 0.5, 0.75]);
        assert!(ing.warnings.is_empty());
    }

    #[test]
    fn rows_in_any_order() {
        let shuffled = "score,group,pmf,repay_prob\n3,B,0.5,0.75\n1,A,0.5,0.25\n2,B,0.3,0.5\n3,A,0.2,0.75\n1,B,0.2,0.25\n2,A,0.3,0.5\n";
        let a = ingest_reader(shuffled.as_bytes()).unwrap();
        let b = ingest_reader(S1.as_bytes()).unwrap();
        assert_eq!(a.groups[1], b.groups[0]);
        assert_eq!(a.groups[0], b.groups[1]);
    }

    #[test]
    fn near_one_sum_renormalized_with_warning() {
        let text = "score,group,pmf,repay_prob\n1,A,0.5,0.25\n2,A,0.499999,0.5\n";
        let ing = ingest_reader(text.as_bytes()).unwrap();
        assert_eq!(ing.warnings.len(), 1);
        assert!((ing.groups[0].dist.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation_errors() {
        let cases = [
            ("score,group,pmf,repay_prob\n1,A,0.5,0.25\n2,A,0.25,0.5\n4,A,0.25,0.5\n", "missing score"),
            ("score,group,pmf,repay_prob\n1,A,0.5,0.25\n2,A,0.4,0.5\n", "sums to"),
            ("score,group,pmf,repay_prob\n1,A,0.5,0.25\n2,A,0.5,1.5\n", "outside [0, 1]"),
            ("score,group,pmf,repay_prob\n1,A,0.5,0.25\n2,A,0.5,0.5\n1,B,1,0.5\n", "inconsistent grids"),
            ("score,grp,pmf,repay_prob\n1,A,1,0.5\n", "header"),
            ("score,group,pmf,repay_prob\n1,A,1,0.5\n1,A,1,0.5\n", "duplicate"),
        ];
        for (text, needle) in cases {
            let err = ingest_reader(text.as_bytes()).unwrap_err().to_string();
            assert!(err.contains(needle), "{err} lacks {needle}");
        }
    }

    #[test]
    fn emit_round_trip() {
        let ing = ingest_reader(S1.as_bytes()).unwrap();
        let mut buf = Vec::new();
        let gs: Vec<_> = ing.groups.iter().map(|g| (g.name.as_str(), &g.dist, &g.rho)).collect();
        emit_distribution_csv(&mut buf, &ing.scores, &gs).unwrap();
        let again = ingest_reader(buf.as_slice()).unwrap();
        assert_eq!(again, ing);
    }
}
