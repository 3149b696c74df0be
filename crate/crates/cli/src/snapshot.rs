//! Snapshot and diagnostics files.
//!
//! Snapshots are CSV with one header line and one row per (time, node). Floats
//! are written in shortest round-trip form, so reading a file back gives the
//! exact values that were written.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use snake_core::dynamics::{apply_configuration, ActionConvention, SimState};
use snake_core::se3::Rotation;
use snake_core::{Pose, RodProperties, Vec3};

use crate::error::CliError;

pub const SNAPSHOT_HEADER: &str = "t,node,z,qw,qx,qy,qz,ux,uy,uz,px,py,pz,\
W_w1,W_w2,W_w3,W_v1,W_v2,W_v3,xi_w1,xi_w2,xi_w3,xi_v1,xi_v2,xi_v3";

pub const DIAGNOSTICS_HEADER: &str = "step,t,kinetic,elastic,total,control_power,\
P_w1,P_w2,P_w3,P_v1,P_v2,P_v3";

const SNAPSHOT_COLUMNS: usize = 25;

/// Allowed deviation of a stored quaternion from unit norm.
pub const QUATERNION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    pub z: f64,
    /// Rotation as `[w, x, y, z]`.
    pub q: [f64; 4],
    pub u: [f64; 3],
    /// Centreline point.
    pub p: [f64; 3],
    pub w: [f64; 6],
    pub xi: [f64; 6],
}

impl NodeRecord {
    pub fn pose(&self) -> snake_core::Result<Pose<f64>> {
        Ok(Pose::new(Rotation::from_quaternion(self.q)?, Vec3::from_array(self.u)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRecord {
    pub t: f64,
    pub nodes: Vec<NodeRecord>,
}

impl SnapshotRecord {
    pub fn from_state(
        state: &SimState<f64>,
        props: &RodProperties<f64>,
        convention: ActionConvention,
    ) -> snake_core::Result<Self> {
        let p = apply_configuration(&state.g, props, convention)?;
        let grid = props.grid();
        let nodes = (0..grid.n_nodes())
            .map(|i| {
                let g = &state.g[i];
                NodeRecord {
                    z: grid.z(i),
                    q: g.rotation.to_quaternion(),
                    u: g.translation.to_array(),
                    p: p[i].to_array(),
                    w: state.w[i].to_array(),
                    xi: state.xi[i].to_array(),
                }
            })
            .collect();
        Ok(Self { t: state.t, nodes })
    }

    /// Rows for this record, without the header.
    pub fn to_csv_rows(&self) -> String {
        let mut s = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = write!(s, "{},{i},{}", num(self.t), num(n.z));
            for v in n.q.iter().chain(&n.u).chain(&n.p).chain(&n.w).chain(&n.xi) {
                let _ = write!(s, ",{}", num(*v));
            }
            s.push('\n');
        }
        s
    }
}

/// Shortest representation that parses back to the same `f64`. Negative
/// zero is written as `0e0`.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0e0".to_string();
    }
    format!("{v:e}")
}

pub fn write_line(out: &mut impl Write, line: &str) -> Result<(), CliError> {
    out.write_all(line.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

/// All records of a snapshot file, in file order.
pub fn read_snapshots(path: &Path) -> Result<Vec<SnapshotRecord>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_snapshots(BufReader::new(file), &path.display().to_string())
}

pub fn parse_snapshots(reader: impl BufRead, name: &str) -> Result<Vec<SnapshotRecord>, CliError> {
    let bad = |line: usize, msg: String| CliError::Format(format!("{name}:{line}: {msg}"));
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h == SNAPSHOT_HEADER => {}
        Some(Ok(h)) => return Err(bad(1, format!("unexpected header {h:?}"))),
        Some(Err(e)) => return Err(e.into()),
        None => return Err(bad(1, "empty file".into())),
    }
    let mut out: Vec<SnapshotRecord> = Vec::new();
    for (k, line) in lines.enumerate() {
        let ln = k + 2;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != SNAPSHOT_COLUMNS {
            return Err(bad(ln, format!("expected {SNAPSHOT_COLUMNS} columns, got {}", fields.len())));
        }
        let node: usize = fields[1].parse().map_err(|_| bad(ln, format!("bad node index {:?}", fields[1])))?;
        let mut v = [0.0f64; SNAPSHOT_COLUMNS];
        for (j, f) in fields.iter().enumerate() {
            if j != 1 {
                v[j] = f.parse().map_err(|_| bad(ln, format!("bad number {f:?}")))?;
            }
        }
        let q = [v[3], v[4], v[5], v[6]];
        let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (qn - 1.0).abs() > QUATERNION_TOLERANCE {
            return Err(bad(ln, format!("quaternion norm {qn} is not 1")));
        }
        let rec = NodeRecord {
            z: v[2],
            q,
            u: [v[7], v[8], v[9]],
            p: [v[10], v[11], v[12]],
            w: std::array::from_fn(|j| v[13 + j]),
            xi: std::array::from_fn(|j| v[19 + j]),
        };
        let t = v[0];
        match out.last_mut() {
            Some(last) if last.t == t && node == last.nodes.len() => last.nodes.push(rec),
            _ if node == 0 => out.push(SnapshotRecord { t, nodes: vec![rec] }),
            _ => return Err(bad(ln, format!("node {node} out of order"))),
        }
    }
    Ok(out)
}

/// One row of the energy and momentum series.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub t: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub control_power: f64,
    pub momentum: [f64; 6],
}

impl DiagnosticsRow {
    pub fn total(&self) -> f64 {
        self.kinetic + self.elastic
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "{},{},{},{},{},{}",
            self.step,
            num(self.t),
            num(self.kinetic),
            num(self.elastic),
            num(self.total()),
            num(self.control_power)
        );
        for v in &self.momentum {
            let _ = write!(s, ",{}", num(*v));
        }
        s
    }
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRow>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let name = path.display().to_string();
    let bad = |line: usize, msg: String| CliError::Format(format!("{name}:{line}: {msg}"));
    let mut lines = text.lines();
    if lines.next() != Some(DIAGNOSTICS_HEADER) {
        return Err(bad(1, "unexpected header".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(k, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 12 {
                return Err(bad(k + 2, format!("expected 12 columns, got {}", f.len())));
            }
            let x = |j: usize| f[j].parse::<f64>().map_err(|_| bad(k + 2, format!("bad number {:?}", f[j])));
            Ok(DiagnosticsRow {
                step: f[0].parse().map_err(|_| bad(k + 2, format!("bad step {:?}", f[0])))?,
                t: x(1)?,
                kinetic: x(2)?,
                elastic: x(3)?,
                control_power: x(5)?,
                momentum: [x(6)?, x(7)?, x(8)?, x(9)?, x(10)?, x(11)?],
            })
        })
        .collect()
}
