//! Ground-state probability, normalized distribution, Shannon entropy and
//! the monotonicity statistic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.999;
pub const DEFAULT_MONOTONE_SLACK: f64 = 1e-6;
/// Probabilities below this are treated as exactly zero.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

/// Shannon entropy in bits of the distribution obtained by normalizing `p`.
pub fn entropy(p: &[f64]) -> Result<f64> {
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < -PROBABILITY_FLOOR) {
        return Err(Error::InvalidArgument(format!("probability {v} is not a nonnegative number")));
    }
    let clamped: Vec<f64> = p.iter().map(|&v| if v < PROBABILITY_FLOOR { 0.0 } else { v }).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    let s: f64 = clamped
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let q = v / total;
            -q * q.log2()
        })
        .sum();
    // a single nonzero entry gives −1·log2(1) = −0
    Ok(s.max(0.0))
}

pub fn validity(p_gs: f64, threshold: f64) -> bool {
    p_gs >= threshold
}

/// `true` iff every consecutive step drops by at most `slack`. An empty or
/// single-entry series is trivially non-decreasing.
pub fn monotone_nondecreasing(entropies: &[f64], slack: f64) -> bool {
    entropies.windows(2).all(|w| w[1] >= w[0] - slack)
}

pub fn monotonic_increase_rate(flags: &[bool]) -> Result<f64> {
    if flags.is_empty() {
        return Err(Error::InvalidArgument("increase rate of zero instances".into()));
    }
    Ok(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    Lambda,
    MuPlus,
}

impl ControlKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlKind::Lambda => "lambda",
            ControlKind::MuPlus => "mu_plus",
        }
    }
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControlKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(ControlKind::Lambda),
            "mu_plus" => Ok(ControlKind::MuPlus),
            other => Err(Error::InvalidArgument(format!("unknown control kind {other:?}"))),
        }
    }
}

/// Outcome of one evolution at one control value and anneal time.
///
/// A run that failed numerically keeps its place with `failure` set, no
/// probabilities, and `valid = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessRecord {
    pub control_kind: ControlKind,
    pub control: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub p_gs: Option<f64>,
    pub p_per_state: Vec<f64>,
    pub entropy: Option<f64>,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl FairnessRecord {
    pub fn from_probabilities(kind: ControlKind, control: f64, t: f64, p_per_state: Vec<f64>, threshold: f64) -> Self {
        let p_gs: f64 = p_per_state.iter().sum();
        Self {
            control_kind: kind,
            control,
            t,
            p_gs: Some(p_gs),
            entropy: entropy(&p_per_state).ok(),
            valid: validity(p_gs, threshold),
            p_per_state,
            failure: None,
        }
    }

    pub fn failed(kind: ControlKind, control: f64, t: f64, error: &Error) -> Self {
        Self {
            control_kind: kind,
            control,
            t,
            p_gs: None,
            p_per_state: Vec::new(),
            entropy: None,
            valid: false,
            failure: Some(error.to_string()),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const RECORD_COLUMNS: [&str; 6] = ["control_kind", "control", "T", "p_gs", "entropy", "valid"];

/// Header for records with up to `d` ground states.
pub fn csv_header(d: usize) -> Vec<String> {
    RECORD_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain((1..=d).map(|i| format!("p_{i}")))
        .collect()
}

/// CSV fields of one record, padded with empty cells to `d` probabilities.
pub fn csv_fields(r: &FairnessRecord, d: usize) -> Vec<String> {
    let mut row = vec![
        r.control_kind.to_string(),
        r.control.to_string(),
        r.t.to_string(),
        opt(r.p_gs),
        opt(r.entropy),
        r.valid.to_string(),
    ];
    row.extend(r.p_per_state.iter().map(|p| p.to_string()));
    row.resize(RECORD_COLUMNS.len() + d, String::new());
    row
}

pub fn records_to_csv(records: &[FairnessRecord]) -> String {
    let d = records.iter().map(|r| r.p_per_state.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header(d)).expect("in-memory write");
    for r in records {
        w.write_record(csv_fields(r, d)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn parse_field<T: FromStr>(row: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = row.get(idx).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value {raw:?} in column {}", idx + 1),
    })
}

fn parse_opt(row: &csv::StringRecord, idx: usize, line: usize) -> Result<Option<f64>> {
    match row.get(idx) {
        None | Some("") => Ok(None),
        Some(_) => parse_field(row, idx, line).map(Some),
    }
}

/// Parse records written by [`records_to_csv`]. Leading columns before
/// `control_kind` (such as instance keys) are skipped.
pub fn records_from_csv(text: &str) -> Result<Vec<FairnessRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Malformed(e.to_string()))?.clone();
    let base = header
        .iter()
        .position(|h| h == "control_kind")
        .ok_or_else(|| Error::Malformed("missing control_kind column".into()))?;
    for (k, name) in RECORD_COLUMNS.iter().enumerate() {
        if header.get(base + k) != Some(*name) {
            return Err(Error::Malformed(format!("expected column {name:?}")));
        }
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let kind: ControlKind = row
            .get(base)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| Error::Parse { line, msg: e.to_string() })?;
        let p_per_state = (base + RECORD_COLUMNS.len()..row.len())
            .filter(|&k| !row[k].is_empty())
            .map(|k| parse_field(&row, k, line))
            .collect::<Result<Vec<f64>>>()?;
        out.push(FairnessRecord {
            control_kind: kind,
            control: parse_field(&row, base + 1, line)?,
            t: parse_field(&row, base + 2, line)?,
            p_gs: parse_opt(&row, base + 3, line)?,
            entropy: parse_opt(&row, base + 4, line)?,
            valid: parse_field(&row, base + 5, line)?,
            p_per_state,
            failure: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.25; 4]).unwrap(), 2.0);
        assert_eq!(entropy(&[0.1; 4]).unwrap(), 2.0);
        let s = entropy(&[0.4, 0.4, 0.1, 0.1]).unwrap();
        assert!((s - 1.7219).abs() < 1e-4, "{s}");
        let s = entropy(&[0.153, 0.183, 0.182, 0.153]).unwrap();
        assert!((s - 1.994).abs() < 1e-3, "{s}");
        assert_eq!(entropy(&[0.0, 0.7, 0.0]).unwrap(), 0.0);
        assert!(matches!(entropy(&[0.0, 0.0]), Err(Error::ZeroProbability)));
        assert!(matches!(entropy(&[1e-16, 0.0]), Err(Error::ZeroProbability)));
        assert!(entropy(&[-0.1, 0.5]).is_err());
        assert!(entropy(&[f64::NAN]).is_err());
    }

    #[test]
    fn validity_examples() {
        assert!(validity(1.0, DEFAULT_VALIDITY_THRESHOLD));
        assert!(!validity(0.5, DEFAULT_VALIDITY_THRESHOLD));
        assert!(validity(0.9995, DEFAULT_VALIDITY_THRESHOLD));
    }

    #[test]
    fn monotone_examples() {
        assert!(monotone_nondecreasing(&[1.5; 5], DEFAULT_MONOTONE_SLACK));
        assert!(monotone_nondecreasing(&[1.0, 1.2, 1.9, 2.0], DEFAULT_MONOTONE_SLACK));
        assert!(!monotone_nondecreasing(&[1.0, 1.5, 1.4, 2.0], DEFAULT_MONOTONE_SLACK));
        assert!(monotone_nondecreasing(&[1.0, 1.0 - 5e-7], DEFAULT_MONOTONE_SLACK));
        assert!(!monotone_nondecreasing(&[1.0, 1.0 - 5e-7], 0.0));
    }

    #[test]
    fn rate_examples() {
        assert_eq!(monotonic_increase_rate(&[true; 7]).unwrap(), 1.0);
        assert_eq!(monotonic_increase_rate(&[false; 3]).unwrap(), 0.0);
        let flags: Vec<bool> = (0..100).map(|i| i < 91).collect();
        assert_eq!(monotonic_increase_rate(&flags).unwrap(), 0.91);
        assert!(monotonic_increase_rate(&[]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![
            FairnessRecord::from_probabilities(ControlKind::Lambda, 0.1, 1e5, vec![0.25, 0.25, 0.25, 0.2499], 0.999),
            FairnessRecord::from_probabilities(ControlKind::Lambda, 0.2, 1e5, vec![0.0, 0.0], 0.999),
            FairnessRecord::failed(ControlKind::Lambda, 0.3, 1e5, &Error::NormDrift { t: 1.0, drift: 1.0 }),
        ];
        let text = records_to_csv(&recs);
        assert!(text.starts_with("control_kind,control,T,p_gs,entropy,valid,p_1,p_2,p_3,p_4\n"));
        let back = records_from_csv(&text).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[0], recs[0]);
        assert_eq!(back[1], recs[1]);
        assert_eq!(back[2].p_gs, None);
        assert!(!back[2].valid);
        assert_eq!(records_to_csv(&[]), "control_kind,control,T,p_gs,entropy,valid\n");
    }
}
