//! `snake sweep`: a scenario run over a grid of one or two config keys.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::config::Scenario;
use crate::error::CliError;
use crate::run::{output_dir, run_scenario, RunSummary};
use crate::snapshot::num;

pub const SUMMARY_FILE: &str = "sweep_summary.csv";

/// `key=start:stop:n`, with `key` a dotted path such as `control.amplitude`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("axis {s:?} is not of the form key=start:stop:n"));
        let (key, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if key.is_empty() || parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if n == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        Ok(Self { key: key.trim().to_string(), start, stop, n })
    }
}

impl Axis {
    /// `n` evenly spaced values from `start` to `stop`; just `start` when `n = 1`.
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|k| if k + 1 == self.n { self.stop } else { self.start + step * k as f64 }).collect()
    }
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub index: usize,
    pub values: Vec<f64>,
    pub scenario: Scenario,
    pub directory: PathBuf,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub points: Vec<(SweepPoint, Result<RunSummary, CliError>)>,
    pub summary_path: PathBuf,
}

fn set_key(table: &mut toml::Table, key: &str, value: f64) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in path {
        cur = cur
            .get_mut(*p)
            .and_then(|v| v.as_table_mut())
            .ok_or_else(|| CliError::Config(format!("sweep key `{key}`: no section `{p}`")))?;
    }
    let new = match cur.get(*last) {
        Some(toml::Value::Integer(_)) => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(CliError::Config(format!("sweep key `{key}` takes whole numbers, got {value}")));
            }
            toml::Value::Integer(value as i64)
        }
        Some(toml::Value::Float(_)) | None => toml::Value::Float(value),
        Some(_) => return Err(CliError::Config(format!("sweep key `{key}` is not numeric"))),
    };
    cur.insert(last.to_string(), new);
    Ok(())
}

/// Expands the axes into scenarios, one output directory per point under the
/// base scenario's directory.
pub fn expand(base: &Scenario, axes: &[Axis]) -> Result<Vec<SweepPoint>, CliError> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(CliError::Config("a sweep takes one or two axes".into()));
    }
    let table: toml::Table = toml::from_str(&base.to_toml()).map_err(|e| CliError::Config(e.to_string()))?;
    let combos: Vec<Vec<f64>> = match axes {
        [a] => a.values().into_iter().map(|v| vec![v]).collect(),
        [a, b] => a.values().into_iter().flat_map(|x| b.values().into_iter().map(move |y| vec![x, y])).collect(),
        _ => unreachable!(),
    };
    let root = output_dir(base);
    combos
        .into_iter()
        .enumerate()
        .map(|(index, values)| {
            let mut t = table.clone();
            for (axis, v) in axes.iter().zip(&values) {
                set_key(&mut t, &axis.key, *v)?;
            }
            let mut scenario = Scenario::deserialize(t).map_err(|e| CliError::Config(e.to_string()))?;
            let name = format!("point_{index:03}");
            scenario.output.directory = base.output.directory.join(&name);
            scenario.validate()?;
            Ok(SweepPoint { index, values, scenario, directory: root.join(name) })
        })
        .collect()
}

pub fn summary_table(axes: &[Axis], points: &[(SweepPoint, Result<RunSummary, CliError>)]) -> String {
    let mut s = String::from("point");
    for a in axes {
        let _ = write!(s, ",{}", a.key);
    }
    s.push_str(",final_energy,max_abs_xi,mean_forward_displacement,status\n");
    for (p, r) in points {
        let _ = write!(s, "{}", p.index);
        for v in &p.values {
            let _ = write!(s, ",{}", num(*v));
        }
        match r {
            Ok(r) => {
                let _ = writeln!(
                    s,
                    ",{},{},{},ok",
                    num(r.final_energy),
                    num(r.max_abs_xi),
                    num(r.mean_forward_displacement)
                );
            }
            Err(e) => {
                let _ = writeln!(s, ",,,,failed (exit {})", e.exit_code());
            }
        }
    }
    s
}

/// Runs every point (in parallel) and writes the summary once all are done.
pub fn sweep(base: &Scenario, axes: &[Axis]) -> Result<SweepOutcome, CliError> {
    let points = expand(base, axes)?;
    // Fail on configuration errors before running anything.
    for p in &points {
        p.scenario.build()?;
    }
    let results: Vec<_> = points
        .into_par_iter()
        .map(|p| {
            let r = run_scenario(&p.scenario, &p.directory);
            (p, r)
        })
        .collect();
    let root = output_dir(base);
    std::fs::create_dir_all(&root)?;
    let summary_path = root.join(SUMMARY_FILE);
    std::fs::write(&summary_path, summary_table(axes, &results))?;
    Ok(SweepOutcome { points: results, summary_path })
}
