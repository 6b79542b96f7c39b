//! Output tree `{root}/{experiment}/`: `manifest.json`, `records.csv`,
//! `scaling.md` (scaling runs only) and `plots/*.svg`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::svg::{self, Chart, Series};
use super::ScalingResult;
use crate::error::{Error, Result};
use crate::fairness::{self, ControlKind, FairnessRecord};

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable value") + "\n"
}

/// Group points by a key into labelled series, in key order.
fn grouped<K: Ord, F: Fn(&K) -> String>(points: Vec<(K, (f64, f64))>, label: F) -> Vec<Series> {
    let mut by: BTreeMap<K, Vec<(f64, f64)>> = BTreeMap::new();
    for (k, p) in points {
        by.entry(k).or_default().push(p);
    }
    by.into_iter()
        .map(|(k, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label: label(&k), points }
        })
        .collect()
}

/// Total order key for finite floats.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn chart(title: &str, x: &str, y: &str, log_x: bool, y_range: Option<(f64, f64)>, series: Vec<Series>) -> Chart {
    Chart {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        log_x,
        y_range,
        series,
    }
}

/// Charts for one sweep: entropy (valid points only) and `P_GS` against λ
/// per anneal time, or `P_GS` and entropy against `T` per `μ+`.
pub fn sweep_charts(records: &[FairnessRecord]) -> Vec<(String, Chart)> {
    let kind = match records.first() {
        Some(r) => r.control_kind,
        None => return Vec::new(),
    };
    match kind {
        ControlKind::Lambda => {
            let s = records
                .iter()
                .filter(|r| r.valid)
                .filter_map(|r| r.entropy.map(|s| (Key(r.t), (r.control, s))))
                .collect();
            let p = records
                .iter()
                .filter_map(|r| r.p_gs.map(|p| (Key(r.t), (r.control, p))))
                .collect();
            vec![
                (
                    "entropy_vs_lambda.svg".into(),
                    chart("Entropy (valid runs)", "λ", "S [bits]", false, None, grouped(s, |k| format!("T={}", k.0))),
                ),
                (
                    "p_gs_vs_lambda.svg".into(),
                    chart("Ground-state probability", "λ", "P_GS", false, Some((0.0, 1.0)), grouped(p, |k| format!("T={}", k.0))),
                ),
            ]
        }
        ControlKind::MuPlus => {
            let p = records
                .iter()
                .filter_map(|r| r.p_gs.map(|p| (Key(r.control), (r.t, p))))
                .collect();
            let s = records
                .iter()
                .filter_map(|r| r.entropy.map(|s| (Key(r.control), (r.t, s))))
                .collect();
            vec![
                (
                    "p_gs_vs_T.svg".into(),
                    chart("Ground-state probability", "T", "P_GS", true, Some((0.0, 1.0)), grouped(p, |k| format!("μ+={}", k.0))),
                ),
                (
                    "entropy_vs_T.svg".into(),
                    chart("Entropy", "T", "S [bits]", true, None, grouped(s, |k| format!("μ+={}", k.0))),
                ),
            ]
        }
    }
}

/// One chart per size with one entropy curve (valid points) per instance.
pub fn scaling_charts(result: &ScalingResult) -> Vec<(String, Chart)> {
    result
        .rows
        .iter()
        .map(|row| {
            let pts = result
                .curves
                .iter()
                .filter(|c| c.n == row.n)
                .flat_map(|c| {
                    c.records
                        .iter()
                        .filter(|r| r.valid)
                        .filter_map(move |r| r.entropy.map(|s| (c.index, (r.control, s))))
                })
                .collect();
            (
                format!("entropy_vs_lambda_n{}.svg", row.n),
                chart(
                    &format!("Entropy vs λ, N = {}", row.n),
                    "λ",
                    "S [bits]",
                    false,
                    None,
                    grouped(pts, |k| format!("k={k}")),
                ),
            )
        })
        .collect()
}

pub fn scaling_markdown(result: &ScalingResult) -> String {
    let mut s = String::from("| N | instances | evaluated | indeterminate | monotonic increase rate |\n");
    s.push_str("|---|---|---|---|---|\n");
    for r in &result.rows {
        let rate = r.rate.map(|v| format!("{v:.2}")).unwrap_or_else(|| "n/a".into());
        let _ = writeln!(s, "| {} | {} | {} | {} | {} |", r.n, r.instances, r.evaluated, r.indeterminate, rate);
    }
    s
}

/// Scaling records: the record schema prefixed by `n,instance`.
pub fn scaling_records_csv(result: &ScalingResult) -> String {
    let d = result
        .curves
        .iter()
        .flat_map(|c| c.records.iter().map(|r| r.p_per_state.len()))
        .max()
        .unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string(), "instance".to_string()];
    header.extend(fairness::csv_header(d));
    w.write_record(&header).expect("in-memory write");
    for c in &result.curves {
        for r in &c.records {
            let mut row = vec![c.n.to_string(), c.index.to_string()];
            row.extend(fairness::csv_fields(r, d));
            w.write_record(&row).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn write_charts(dir: &Path, charts: &[(String, Chart)]) -> Result<()> {
    for (name, c) in charts {
        write_file(&dir.join("plots").join(name), &svg::render(c))?;
    }
    Ok(())
}

pub fn experiment_dir(root: &Path, experiment: &str) -> PathBuf {
    root.join(experiment)
}

pub fn write_sweep<M: Serialize>(dir: &Path, manifest: &M, records: &[FairnessRecord]) -> Result<()> {
    write_file(&dir.join("manifest.json"), &to_pretty_json(manifest))?;
    write_file(&dir.join("records.csv"), &fairness::records_to_csv(records))?;
    write_charts(dir, &sweep_charts(records))
}

pub fn write_scaling<M: Serialize>(dir: &Path, manifest: &M, result: &ScalingResult) -> Result<()> {
    write_file(&dir.join("manifest.json"), &to_pretty_json(manifest))?;
    write_file(&dir.join("records.csv"), &scaling_records_csv(result))?;
    write_file(&dir.join("scaling.md"), &scaling_markdown(result))?;
    write_charts(dir, &scaling_charts(result))
}

/// Charts for an existing records file, sweep or scaling layout.
pub fn charts_from_csv(text: &str) -> Result<Vec<(String, Chart)>> {
    let records = fairness::records_from_csv(text)?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Malformed(e.to_string()))?.clone();
    if header.get(0) != Some("n") || header.get(1) != Some("instance") {
        return Ok(sweep_charts(&records));
    }
    let mut keys = Vec::with_capacity(records.len());
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() })?;
        let parse = |k: usize| -> Result<u64> {
            row[k].parse().map_err(|_| Error::Parse {
                line: i + 2,
                msg: format!("bad key {:?}", &row[k]),
            })
        };
        keys.push((parse(0)? as usize, parse(1)?));
    }
    let mut sizes: Vec<usize> = keys.iter().map(|k| k.0).collect();
    sizes.dedup();
    sizes.sort_unstable();
    sizes.dedup();
    Ok(sizes
        .into_iter()
        .map(|n| {
            let pts = keys
                .iter()
                .zip(&records)
                .filter(|((kn, _), r)| *kn == n && r.valid)
                .filter_map(|((_, idx), r)| r.entropy.map(|s| (*idx, (r.control, s))))
                .collect();
            (
                format!("entropy_vs_lambda_n{n}.svg"),
                chart(
                    &format!("Entropy vs λ, N = {n}"),
                    "λ",
                    "S [bits]",
                    false,
                    None,
                    grouped(pts, |k| format!("k={k}")),
                ),
            )
        })
        .collect())
}

pub fn write_charts_from_csv(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let charts = charts_from_csv(&text)?;
    let mut written = Vec::new();
    for (name, c) in &charts {
        let path = out_dir.join(name);
        write_file(&path, &svg::render(c))?;
        written.push(path);
    }
    Ok(written)
}
