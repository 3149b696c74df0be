//! `snake export`: plain column files from a run directory, for any plotting
//! tool. Nothing is plotted here.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::run::{DIAGNOSTICS_FILE, SNAPSHOT_FILE};
use crate::snapshot::{num, read_diagnostics, read_snapshots};

pub const EXPORT_DIR: &str = "export";
pub const ENERGY_FILE: &str = "energy.dat";

#[derive(Clone, Debug, PartialEq)]
pub struct ExportSummary {
    pub directory: PathBuf,
    pub energy_rows: usize,
    pub centerline_files: Vec<PathBuf>,
}

/// Indices of `count` snapshots spread evenly over `n`, first and last included.
pub fn pick(n: usize, count: usize) -> Vec<usize> {
    if n == 0 || count == 0 {
        return Vec::new();
    }
    if count >= n {
        return (0..n).collect();
    }
    if count == 1 {
        return vec![n - 1];
    }
    let mut v: Vec<usize> = (0..count).map(|k| (k * (n - 1) + (count - 1) / 2) / (count - 1)).collect();
    v.dedup();
    v
}

/// Writes `export/energy.dat` (one row per output time) and
/// `export/centerline_KKKK.dat` for `count` snapshots, `KKKK` being the
/// snapshot index.
pub fn export(run_dir: &Path, count: usize) -> Result<ExportSummary, CliError> {
    let diag = read_diagnostics(&run_dir.join(DIAGNOSTICS_FILE))?;
    let snaps = read_snapshots(&run_dir.join(SNAPSHOT_FILE))?;
    let out = run_dir.join(EXPORT_DIR);
    std::fs::create_dir_all(&out)?;

    let mut energy = String::from("# t kinetic elastic total control_power\n");
    for r in &diag {
        let _ = writeln!(
            energy,
            "{} {} {} {} {}",
            num(r.t),
            num(r.kinetic),
            num(r.elastic),
            num(r.total()),
            num(r.control_power)
        );
    }
    std::fs::write(out.join(ENERGY_FILE), energy)?;

    let mut files = Vec::new();
    for k in pick(snaps.len(), count) {
        let rec = &snaps[k];
        let mut s = format!("# z px py pz (t = {})\n", num(rec.t));
        for n in &rec.nodes {
            let _ = writeln!(s, "{} {} {} {}", num(n.z), num(n.p[0]), num(n.p[1]), num(n.p[2]));
        }
        let path = out.join(format!("centerline_{k:04}.dat"));
        std::fs::write(&path, s)?;
        files.push(path);
    }
    Ok(ExportSummary { directory: out, energy_rows: diag.len(), centerline_files: files })
}
