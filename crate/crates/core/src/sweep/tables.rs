use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Molecule, RunRecord, SweepResult};
use crate::error::{Error, Result};

/// Per-point aggregate across samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub molecule: Molecule,
    pub case: u8,
    pub r: f64,
    pub state: usize,
    pub label: String,
    pub samples: usize,
    pub e_fci: f64,
    pub energy_mean: f64,
    pub energy_min: f64,
    pub energy_max: f64,
    pub accuracy_mean: f64,
    pub accuracy_min: f64,
    pub accuracy_max: f64,
    pub updates_mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub sample: usize,
    pub run: usize,
    pub update: usize,
    pub objective: f64,
    pub energies: Vec<Option<f64>>,
}

/// Contents of one `convergence_<case>_<r>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTable {
    pub case: u8,
    pub r: f64,
    pub rows: Vec<ConvergenceRow>,
}

pub fn convergence_file_name(case: u8, r: f64) -> String {
    format!("convergence_{case}_{r:.3}.csv")
}

pub fn aggregate(records: &[RunRecord]) -> Vec<AccuracyRow> {
    let mut groups: BTreeMap<(u8, u64, usize), Vec<&RunRecord>> = BTreeMap::new();
    for rec in records {
        groups
            .entry((rec.case, ordered(rec.r), rec.state))
            .or_default()
            .push(rec);
    }
    groups
        .into_values()
        .map(|g| {
            let n = g.len() as f64;
            let first = g[0];
            let stat = |f: fn(&RunRecord) -> f64| {
                let v: Vec<f64> = g.iter().map(|r| f(r)).collect();
                (
                    v.iter().sum::<f64>() / n,
                    v.iter().copied().fold(f64::INFINITY, f64::min),
                    v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            let (em, emin, emax) = stat(|r| r.energy);
            let (am, amin, amax) = stat(|r| r.accuracy);
            let (um, _, _) = stat(|r| r.updates_to_convergence as f64);
            AccuracyRow {
                molecule: first.molecule,
                case: first.case,
                r: first.r,
                state: first.state,
                label: first.label.clone(),
                samples: g.len(),
                e_fci: first.e_fci,
                energy_mean: em,
                energy_min: emin,
                energy_max: emax,
                accuracy_mean: am,
                accuracy_min: amin,
                accuracy_max: amax,
                updates_mean: um,
            }
        })
        .collect()
}

// order-preserving key for non-negative floats
fn ordered(x: f64) -> u64 {
    x.to_bits()
}

fn write_serialized<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `energies.csv`, `accuracy.csv`, `timing.csv`, one convergence file
/// per `(case, r)` and, when cells failed, `failures.csv`.
pub fn emit_tables(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.records.is_empty() {
        return Err(Error::InsufficientData("no records to write".into()));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("energies.csv");
    write_serialized(&path, &result.records)?;
    written.push(path);

    let path = dir.join("accuracy.csv");
    write_serialized(&path, &aggregate(&result.records))?;
    written.push(path);

    let path = dir.join("timing.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["case", "r", "state", "sample", "wall_seconds"])?;
    for r in &result.records {
        w.write_record([
            r.case.to_string(),
            r.r.to_string(),
            r.state.to_string(),
            r.sample.to_string(),
            format!("{:.6}", r.wall_seconds),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let n_states = result.records.iter().map(|r| r.state + 1).max().unwrap_or(0);
    let mut by_point: BTreeMap<(u8, u64), Vec<&super::RunTrace>> = BTreeMap::new();
    for t in &result.traces {
        by_point.entry((t.case, ordered(t.r))).or_default().push(t);
    }
    for ((case, _), traces) in by_point {
        let path = dir.join(convergence_file_name(case, traces[0].r));
        let mut w = csv::Writer::from_path(&path)?;
        let mut header = vec!["sample".to_string(), "run".into(), "update".into(), "objective".into()];
        header.extend((0..n_states).map(|i| format!("energy_state_{i}")));
        w.write_record(&header)?;
        for t in traces {
            for (row, energies) in t.trace.rows.iter().zip(&t.energies) {
                let mut cells = vec![
                    t.sample.to_string(),
                    t.run.to_string(),
                    row.update.to_string(),
                    row.objective.to_string(),
                ];
                let mut per_state = vec![String::new(); n_states];
                for (&s, e) in t.states.iter().zip(energies) {
                    per_state[s] = e.to_string();
                }
                cells.extend(per_state);
                w.write_record(&cells)?;
            }
        }
        w.flush()?;
        written.push(path);
    }

    if !result.failures.is_empty() {
        let path = dir.join("failures.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["r", "sample", "message"])?;
        for f in &result.failures {
            w.write_record([f.r.to_string(), f.sample.to_string(), f.message.clone()])?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_path(dir.join("energies.csv"))?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Reads every `convergence_<case>_<r>.csv` under `dir`, sorted by name.
pub fn load_traces(dir: &Path) -> Result<Vec<TraceTable>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("convergence_") && n.ends_with(".csv"))
        })
        .collect();
    paths.sort();
    paths.iter().map(|p| load_trace(p)).collect()
}

fn load_trace(path: &Path) -> Result<TraceTable> {
    let bad = || Error::InvalidConfig(format!("unexpected trace file name {}", path.display()));
    let stem = path.file_stem().and_then(|s| s.to_str()).ok_or_else(bad)?;
    let mut parts = stem.trim_start_matches("convergence_").splitn(2, '_');
    let case: u8 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let r: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;

    let mut rdr = csv::Reader::from_path(path)?;
    let parse_err = |line: usize, what: &str| Error::InvalidConfig(format!("{}:{line}: bad {what}", path.display()));
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize, what: &str| rec.get(k).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| parse_err(line, what));
        let int = |k: usize, what: &str| rec.get(k).and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| parse_err(line, what));
        rows.push(ConvergenceRow {
            sample: int(0, "sample")?,
            run: int(1, "run")?,
            update: int(2, "update")?,
            objective: num(3, "objective")?,
            energies: (4..rec.len()).map(|k| rec[k].parse::<f64>().ok()).collect(),
        });
    }
    Ok(TraceTable { case, r, rows })
}
