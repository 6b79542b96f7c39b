//! Externally produced samples: parsing, gauge removal and empirical
//! fairness against the exact optimum.
//!
//! CSV layout, one sample row per line:
//!
//! ```text
//! # comments and blank lines are ignored
//! config,count          (optional header)
//! gauge,+-+--+          (starts a new batch drawn under this gauge)
//! ++----,3
//! 001111,1              (bitstrings: 0 is spin up, 1 is spin down)
//! gauge,none            (a later batch without gauge)
//! ```
//!
//! Rows before the first `gauge` line form an ungauged batch.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{self, DEFAULT_VALIDITY_THRESHOLD};
use crate::model::{apply_gauge_config, GaugeVector, GbpInstance};
use crate::oracle;
use crate::spin::SpinConfiguration;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBatch {
    #[serde(default)]
    pub gauge: Option<GaugeVector>,
    pub entries: Vec<(SpinConfiguration, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    pub n: usize,
    pub batches: Vec<SampleBatch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
    Json,
}

impl SampleFormat {
    /// Guess from the file extension; CSV unless it ends in `.json`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => SampleFormat::Json,
            _ => SampleFormat::Csv,
        }
    }
}

impl SampleSet {
    pub fn validate(&self) -> Result<()> {
        let mut total = 0u64;
        for b in &self.batches {
            if let Some(g) = &b.gauge {
                if g.len() != self.n {
                    return Err(Error::DimensionMismatch {
                        expected: self.n,
                        got: g.len(),
                    });
                }
            }
            for (c, count) in &b.entries {
                if c.len() != self.n {
                    return Err(Error::DimensionMismatch {
                        expected: self.n,
                        got: c.len(),
                    });
                }
                if *count == 0 {
                    return Err(Error::Malformed(format!("zero count for {c}")));
                }
                total += count;
            }
        }
        if total == 0 {
            return Err(Error::Malformed("sample set is empty".into()));
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.batches.iter().flat_map(|b| b.entries.iter()).map(|e| e.1).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = &(SpinConfiguration, u64)> {
        self.batches.iter().flat_map(|b| b.entries.iter())
    }

    pub fn is_gauged(&self) -> bool {
        self.batches.iter().any(|b| b.gauge.is_some())
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn gauge_from_text(text: &str) -> std::result::Result<GaugeVector, String> {
    let c: SpinConfiguration = text.parse().map_err(|e: Error| e.to_string())?;
    GaugeVector::new(c.spins()).map_err(|e| e.to_string())
}

pub fn parse_csv(text: &str) -> Result<SampleSet> {
    let mut n: Option<usize> = None;
    let mut batches = vec![SampleBatch {
        gauge: None,
        entries: Vec::new(),
    }];
    let mut check_width = |w: usize, line: usize| -> Result<()> {
        match n {
            None => {
                n = Some(w);
                Ok(())
            }
            Some(m) if m == w => Ok(()),
            Some(m) => Err(parse_err(line, format!("width {w} differs from {m}"))),
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (a, b) = l
            .split_once(',')
            .ok_or_else(|| parse_err(line, "expected two comma-separated fields"))?;
        let (a, b) = (a.trim(), b.trim());
        if b.contains(',') {
            return Err(parse_err(line, "expected two comma-separated fields"));
        }
        if a.eq_ignore_ascii_case("config") && b.eq_ignore_ascii_case("count") {
            continue;
        }
        if a.eq_ignore_ascii_case("gauge") {
            let gauge = if b.eq_ignore_ascii_case("none") {
                None
            } else {
                let g = gauge_from_text(b).map_err(|m| parse_err(line, m))?;
                check_width(g.len(), line)?;
                Some(g)
            };
            let first_is_empty = batches.len() == 1 && batches[0].entries.is_empty() && batches[0].gauge.is_none();
            if first_is_empty {
                batches[0].gauge = gauge;
            } else {
                batches.push(SampleBatch {
                    gauge,
                    entries: Vec::new(),
                });
            }
            continue;
        }
        let config: SpinConfiguration = a.parse().map_err(|e: Error| parse_err(line, e.to_string()))?;
        check_width(config.len(), line)?;
        let count: u64 = b
            .parse()
            .map_err(|_| parse_err(line, format!("count {b:?} is not a nonnegative integer")))?;
        if count == 0 {
            return Err(parse_err(line, "count must be positive"));
        }
        batches.last_mut().expect("at least one batch").entries.push((config, count));
    }
    let set = SampleSet {
        n: n.ok_or_else(|| Error::Malformed("no samples".into()))?,
        batches,
    };
    set.validate()?;
    Ok(set)
}

pub fn parse_json(text: &str) -> Result<SampleSet> {
    let set: SampleSet = serde_json::from_str(text)?;
    set.validate()?;
    Ok(set)
}

pub fn parse_samples(path: &Path, format: SampleFormat) -> Result<SampleSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        SampleFormat::Csv => parse_csv(&text),
        SampleFormat::Json => parse_json(&text),
    }
}

fn gauge_text(g: &GaugeVector) -> String {
    g.entries().iter().map(|&v| if v > 0 { '+' } else { '-' }).collect()
}

pub fn emit_csv(set: &SampleSet) -> String {
    let mut s = String::from("config,count\n");
    for (k, b) in set.batches.iter().enumerate() {
        match &b.gauge {
            Some(g) => s.push_str(&format!("gauge,{}\n", gauge_text(g))),
            None if k > 0 => s.push_str("gauge,none\n"),
            None => {}
        }
        for (c, count) in &b.entries {
            s.push_str(&format!("{c},{count}\n"));
        }
    }
    s
}

pub fn emit_json(set: &SampleSet) -> String {
    serde_json::to_string_pretty(set).expect("sample set serializes") + "\n"
}

/// Map every sample back through its batch gauge (an involution) and clear
/// the gauges. Counts are unchanged.
pub fn degauge(set: &SampleSet) -> Result<SampleSet> {
    let batches = set
        .batches
        .iter()
        .map(|b| {
            let entries = match &b.gauge {
                None => b.entries.clone(),
                Some(g) => b
                    .entries
                    .iter()
                    .map(|(c, k)| Ok((apply_gauge_config(c, g)?, *k)))
                    .collect::<Result<_>>()?,
            };
            Ok(SampleBatch { gauge: None, entries })
        })
        .collect::<Result<_>>()?;
    Ok(SampleSet { n: set.n, batches })
}

/// Gauge every sample of `set` with `g` (the forward transform used to
/// build synthetic gauged data).
pub fn apply_gauge_samples(set: &SampleSet, g: &GaugeVector) -> Result<SampleSet> {
    let batches = set
        .batches
        .iter()
        .map(|b| {
            if b.gauge.is_some() {
                return Err(Error::InvalidArgument("batch is already gauged".into()));
            }
            let entries = b
                .entries
                .iter()
                .map(|(c, k)| Ok((apply_gauge_config(c, g)?, *k)))
                .collect::<Result<_>>()?;
            Ok(SampleBatch {
                gauge: Some(g.clone()),
                entries,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SampleSet { n: set.n, batches })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassCounts {
    pub optimal: u64,
    pub suboptimal: u64,
    pub infeasible: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStateFrequency {
    pub config: SpinConfiguration,
    pub count: u64,
    pub p: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalFairness {
    pub fingerprint: String,
    pub total: u64,
    pub counts: ClassCounts,
    pub ground_states: Vec<GroundStateFrequency>,
    pub p_gs: f64,
    pub p_gs_se: f64,
    pub entropy: Option<f64>,
    pub valid: bool,
}

fn binomial_se(p: f64, total: u64) -> f64 {
    (p * (1.0 - p) / total as f64).sqrt()
}

/// Classify samples as optimal (per ground state), feasible suboptimal or
/// infeasible, by exact integer cut comparison. Gauged batches are
/// degauged first.
pub fn empirical_fairness(set: &SampleSet, inst: &GbpInstance) -> Result<EmpiricalFairness> {
    empirical_fairness_with(set, inst, DEFAULT_VALIDITY_THRESHOLD)
}

pub fn empirical_fairness_with(set: &SampleSet, inst: &GbpInstance, threshold: f64) -> Result<EmpiricalFairness> {
    if set.n != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            got: set.n,
        });
    }
    set.validate()?;
    let set = if set.is_gauged() { degauge(set)? } else { set.clone() };
    let report = oracle::analyze(inst)?;
    let e_opt = report.e_opt as u64;
    let mut per = vec![0u64; report.optimal_configs.len()];
    let mut counts = ClassCounts {
        optimal: 0,
        suboptimal: 0,
        infeasible: 0,
    };
    for (c, k) in set.entries() {
        if !c.is_balanced() {
            counts.infeasible += k;
        } else if inst.cut_weight(c) == e_opt {
            let idx = report
                .optimal_configs
                .binary_search_by_key(&c.bits(), |o| o.bits())
                .expect("balanced configuration at the optimum is listed by the oracle");
            per[idx] += k;
            counts.optimal += k;
        } else {
            counts.suboptimal += k;
        }
    }
    let total = set.total();
    let ground_states: Vec<GroundStateFrequency> = report
        .optimal_configs
        .iter()
        .zip(&per)
        .map(|(c, &count)| {
            let p = count as f64 / total as f64;
            GroundStateFrequency {
                config: *c,
                count,
                p,
                se: binomial_se(p, total),
            }
        })
        .collect();
    let p_gs = counts.optimal as f64 / total as f64;
    let counts_f: Vec<f64> = per.iter().map(|&c| c as f64).collect();
    Ok(EmpiricalFairness {
        fingerprint: inst.fingerprint(),
        total,
        counts,
        ground_states,
        p_gs,
        p_gs_se: binomial_se(p_gs, total),
        entropy: fairness::entropy(&counts_f).ok(),
        valid: fairness::validity(p_gs, threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rows() {
        let s = parse_csv("++----,3\n--++++,1\n").unwrap();
        assert_eq!(s.n, 6);
        assert_eq!(s.batches.len(), 1);
        assert_eq!(s.batches[0].entries.len(), 2);
        assert_eq!(s.total(), 4);
    }

    #[test]
    fn bitstrings_and_comments() {
        let s = parse_csv("# hw run\nconfig,count\n\n0011,2\n+--+,5\n").unwrap();
        assert_eq!(s.entries().next().unwrap().0, "++--".parse().unwrap());
        assert_eq!(s.total(), 7);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(parse_csv(""), Err(Error::Malformed(_))));
        assert!(matches!(parse_csv("# only\n"), Err(Error::Malformed(_))));
        assert!(matches!(parse_csv("++--,1\n+-+,1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_csv("++--,0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_csv("++--,1\n++x-,1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_csv("++--\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_csv("gauge,+-+\n++--,1\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn batches_round_trip() {
        let text = "config,count\n++--,1\ngauge,+-+-\n-+-+,2\n+++-,4\ngauge,none\n--++,3\n";
        let s = parse_csv(text).unwrap();
        assert_eq!(s.batches.len(), 3);
        assert_eq!(emit_csv(&s), text);
        assert_eq!(parse_json(&emit_json(&s)).unwrap(), s);
    }

    #[test]
    fn degauge_examples() {
        let plain = parse_csv("++--,1\n+-+-,2\n").unwrap();
        let id = apply_gauge_samples(&plain, &GaugeVector::identity(4)).unwrap();
        assert_eq!(degauge(&id).unwrap(), plain);
        let flipped = parse_csv("gauge,----\n++--,1\n+-+-,2\n").unwrap();
        let d = degauge(&flipped).unwrap();
        let configs: Vec<String> = d.entries().map(|(c, _)| c.to_string()).collect();
        assert_eq!(configs, vec!["--++", "-+-+"]);
        let g = GaugeVector::new(vec![1, -1, -1, 1]).unwrap();
        assert_eq!(degauge(&apply_gauge_samples(&plain, &g).unwrap()).unwrap(), plain);
    }

    #[test]
    fn paper_style_hardware_counts() {
        // 4-cycle with unit weights: optima ++-- type cuts, D = 4
        let inst = GbpInstance::new(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap();
        let report = oracle::analyze(&inst).unwrap();
        let counts = [153u64, 183, 182, 153];
        let mut text = String::new();
        for (c, k) in report.optimal_configs.iter().zip(counts) {
            text.push_str(&format!("{c},{k}\n"));
        }
        // the alternating cut +-+- severs all four edges: balanced but suboptimal
        text.push_str("+-+-,300\n");
        text.push_str("++++,29\n");
        let set = parse_csv(&text).unwrap();
        let f = empirical_fairness(&set, &inst).unwrap();
        assert_eq!(f.total, 1000);
        assert_eq!(f.counts.optimal + f.counts.suboptimal + f.counts.infeasible, 1000);
        assert_eq!(f.counts.suboptimal, 300);
        assert_eq!(f.counts.infeasible, 29);
        assert!((f.p_gs - 0.671).abs() < 1e-12);
        assert!((f.entropy.unwrap() - 1.994).abs() < 1e-3);
        assert!(!f.valid);
    }
}
