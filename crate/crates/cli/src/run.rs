//! `snake run`: one simulation into one output directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use snake_core::dynamics::{spatial_momentum, total_energy, RodSystem, SimState};
use snake_core::elasticity::elastic_energy;
use snake_core::rod::kinetic_energy;

use crate::config::{Model, Scenario};
use crate::error::CliError;
use crate::snapshot::{write_line, DiagnosticsRow, SnapshotRecord, DIAGNOSTICS_HEADER, SNAPSHOT_HEADER};

/// Overrides the directory that relative output paths are resolved against.
pub const OUTPUT_ROOT_ENV: &str = "SNAKE_OUTPUT_ROOT";

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const SNAPSHOT_FILE: &str = "snapshots.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";

/// Run metadata written next to the outputs, with the full normalized
/// scenario. `snake run` accepts a manifest in place of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub manifest: ManifestInfo,
    pub scenario: Scenario,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInfo {
    pub program: String,
    pub version: String,
    pub action_convention: String,
    pub mass_coefficient: String,
    pub stress_divergence: String,
    pub scheme: String,
    pub dt: f64,
    pub n_steps: usize,
}

/// Loads a scenario file or the scenario stored in a run manifest.
pub fn load_input(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if table.contains_key("manifest") {
        let m: Manifest = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(m.scenario)
    } else {
        Scenario::load(path)
    }
}

/// Where a scenario's outputs go: absolute paths as given, relative ones under
/// `$SNAKE_OUTPUT_ROOT` or the working directory.
pub fn output_dir(scenario: &Scenario) -> PathBuf {
    let dir = &scenario.output.directory;
    if dir.is_absolute() {
        return dir.clone();
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(dir),
        _ => dir.clone(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub dt: f64,
    pub n_steps: usize,
    pub outputs: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Largest `|ξ|` at any node and output time.
    pub max_abs_xi: f64,
    /// Time average over the outputs of the displacement of the centreline
    /// midpoint along `e₃`.
    pub mean_forward_displacement: f64,
}

fn midpoint(rec: &SnapshotRecord) -> [f64; 3] {
    let n = rec.nodes.len();
    let (a, b) = (&rec.nodes[(n - 1) / 2].p, &rec.nodes[n / 2].p);
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
}

fn diagnostics(step: usize, s: &SimState<f64>, model: &Model, sys: &RodSystem<'_, f64>) -> Result<DiagnosticsRow, CliError> {
    Ok(DiagnosticsRow {
        step,
        t: s.t,
        kinetic: kinetic_energy(&model.props, &s.w),
        elastic: elastic_energy(&model.props, &model.law, &s.xi),
        control_power: sys.control_power(s)?,
        momentum: spatial_momentum(s, &model.props).to_array(),
    })
}

/// Runs `scenario` into `dir`. Outputs already written are kept when the
/// solver fails part way.
pub fn run_scenario(scenario: &Scenario, dir: &Path) -> Result<RunSummary, CliError> {
    let model = scenario.build()?;
    let (dt, n_steps) = model.solver.resolve(&model.props, &model.law)?;
    let sys = RodSystem::new(&model.props, &model.law, model.control.as_ref())?
        .with_divergence(model.solver.stress_divergence);

    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let manifest = Manifest {
        manifest: ManifestInfo {
            program: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            action_convention: model.convention.name().to_string(),
            mass_coefficient: scenario.conventions.mass_coefficient.clone(),
            stress_divergence: format!("{:?}", model.solver.stress_divergence).to_lowercase(),
            scheme: format!("{:?}", model.solver.scheme).to_lowercase(),
            dt,
            n_steps,
        },
        scenario: scenario.clone(),
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_FILE), text)?;

    let mut snaps = BufWriter::new(File::create(dir.join(SNAPSHOT_FILE))?);
    let mut diag = BufWriter::new(File::create(dir.join(DIAGNOSTICS_FILE))?);
    write_line(&mut snaps, SNAPSHOT_HEADER)?;
    write_line(&mut diag, DIAGNOSTICS_HEADER)?;

    let initial_energy = total_energy(&model.initial, &model.props, &model.law);
    let mut start_mid = None;
    let (mut outputs, mut disp_sum, mut max_xi) = (0usize, 0.0f64, 0.0f64);
    let mut write_err: Option<CliError> = None;
    let result = sys.integrate(model.initial.clone(), dt, n_steps, model.solver.scheme, model.solver.output_stride, |k, s| {
        let rec = SnapshotRecord::from_state(s, &model.props, model.convention)?;
        let row = match diagnostics(k, s, &model, &sys) {
            Ok(r) => r,
            Err(e) => {
                write_err = Some(e);
                return Err(snake_core::Error::InvalidArgument("diagnostics failed".into()));
            }
        };
        let io = write_line(&mut diag, &row.to_csv()).and_then(|_| {
            use std::io::Write;
            snaps.write_all(rec.to_csv_rows().as_bytes()).map_err(CliError::from)
        });
        if let Err(e) = io {
            write_err = Some(e);
            return Err(snake_core::Error::InvalidArgument("write failed".into()));
        }
        let mid = midpoint(&rec);
        let m0 = *start_mid.get_or_insert(mid);
        disp_sum += mid[2] - m0[2];
        outputs += 1;
        max_xi = s.xi.iter().fold(max_xi, |a, x| a.max(x.norm()));
        Ok(())
    });
    use std::io::Write;
    snaps.flush()?;
    diag.flush()?;
    if let Some(e) = write_err {
        return Err(e);
    }
    let end = result?;
    Ok(RunSummary {
        directory: dir.to_path_buf(),
        dt,
        n_steps,
        outputs,
        initial_energy,
        final_energy: total_energy(&end, &model.props, &model.law),
        max_abs_xi: max_xi,
        mean_forward_displacement: disp_sum / outputs as f64,
    })
}
