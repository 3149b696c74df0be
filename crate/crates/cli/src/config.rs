//! Scenario files.
//!
//! A scenario is a TOML document with the sections `rod`, `stiffness`,
//! `initial`, `solver`, `control`, `output` and `conventions`. Unknown keys are
//! rejected and every value is a plain SI number. [`Scenario::build`] turns a
//! parsed scenario into the solver's objects and runs all model checks before
//! anything is simulated.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use snake_core::actuation::{ControlLaw, CpgLaw, CpgParams, StrainComponent, ZeroControl};
use snake_core::dynamics::{screw_field, ActionConvention, Scheme, SimState, SolverConfig, StressDivergence, TimeStep};
use snake_core::elasticity::{SectionStiffness, StiffnessLaw};
use snake_core::{Mat3, MassCoefficient, PoseField, ReferenceCurve, RodProperties, Twist, TwistField, Vec3};
use snake_core::Grid;

use crate::error::CliError;
use crate::snapshot;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub rod: RodSection,
    pub stiffness: StiffnessSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub control: ControlSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub conventions: ConventionsSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RodSection {
    /// m.
    pub length: f64,
    pub n_nodes: usize,
    pub mass: MassModel,
    #[serde(default)]
    pub reference_curve: CurveChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MassModel {
    /// Same line density (kg/m) and diagonal section inertia (kg·m) everywhere.
    Uniform { density: f64, inertia: [f64; 3] },
    /// Solid disc of `radius` (m) and volume density `rho` (kg/m³).
    Cylinder { radius: f64, rho: f64 },
    /// Explicit per-node values. Each inertia entry is row-major 3×3.
    PerNode { density: Vec<f64>, inertia: Vec<[f64; 9]> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveChoice {
    #[default]
    Straight,
    Collocated,
    Points { points: Vec<[f64; 3]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StiffnessSection {
    /// `[EI₁, EI₂, GJ]` in N·m² and `[GA₁, GA₂, EA]` in N.
    Diagonal { bending_torsion: [f64; 3], shear_stretch: [f64; 3] },
    /// Row-major 6×6 matrices mapping the strain `(κ, γ)` to the stress
    /// twist, whose angular slots hold the force and linear slots the moment.
    /// One shared `matrix` or one per node in `per_node`.
    Full {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_node: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub shape: ShapeChoice,
    #[serde(default)]
    pub velocity: VelocityChoice,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeChoice {
    #[default]
    Straight,
    /// Constant strain `(ω, v)`.
    Screw { strain: [f64; 6] },
    /// Poses from a snapshot file, at `time` or the last record.
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        time: Option<f64>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityChoice {
    #[default]
    Zero,
    Uniform { twist: [f64; 6] },
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        time: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Fixed step in seconds; the CFL step is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl_number: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub scheme: SchemeChoice,
    #[serde(default)]
    pub stress_divergence: DivergenceChoice,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_t_end() -> f64 {
    1.0
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            dt: None,
            cfl_number: default_cfl(),
            t_end: default_t_end(),
            scheme: SchemeChoice::default(),
            stress_divergence: DivergenceChoice::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    #[default]
    Rk4,
    Midpoint,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceChoice {
    #[default]
    Conservative,
    Literal,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlSection {
    #[default]
    None,
    Cpg {
        amplitude: f64,
        #[serde(default = "two_pi")]
        frequency: f64,
        #[serde(default = "two_pi")]
        wavenumber: f64,
        #[serde(default = "default_component")]
        component: String,
        #[serde(default)]
        phase: f64,
    },
}

fn two_pi() -> f64 {
    std::f64::consts::TAU
}

fn default_component() -> String {
    StrainComponent::Bend1.name().to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_directory() -> PathBuf {
    PathBuf::from("run")
}

fn default_stride() -> usize {
    1
}

fn default_formats() -> Vec<String> {
    vec!["csv".to_string()]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: default_directory(), stride: default_stride(), formats: default_formats() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConventionsSection {
    #[serde(default = "default_action")]
    pub action_convention: String,
    #[serde(default = "default_mass_coefficient")]
    pub mass_coefficient: String,
}

fn default_action() -> String {
    ActionConvention::default().name().to_string()
}

fn default_mass_coefficient() -> String {
    "area".to_string()
}

impl Default for ConventionsSection {
    fn default() -> Self {
        Self { action_convention: default_action(), mass_coefficient: default_mass_coefficient() }
    }
}

/// Everything a run needs, built and checked.
#[derive(Debug)]
pub struct Model {
    pub props: RodProperties<f64>,
    pub law: StiffnessLaw<f64>,
    pub control: Box<dyn ControlLaw<f64>>,
    pub initial: SimState<f64>,
    pub solver: SolverConfig<f64>,
    pub convention: ActionConvention,
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {msg}"))
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a scenario. Relative file paths inside it are resolved against
    /// the scenario's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut s = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        s.resolve_paths(base);
        Ok(s)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let ShapeChoice::File { path, .. } = &mut self.initial.shape {
            fix(path);
        }
        if let VelocityChoice::File { path, .. } = &mut self.initial.velocity {
            fix(path);
        }
    }

    /// Normalized TOML: every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario is always serializable")
    }

    pub fn mass_coefficient(&self) -> Result<MassCoefficient, CliError> {
        match self.conventions.mass_coefficient.as_str() {
            "area" => Ok(MassCoefficient::Area),
            "paper" => Ok(MassCoefficient::Paper),
            other => Err(invalid("conventions.mass_coefficient", format!("expected \"area\" or \"paper\", got {other:?}"))),
        }
    }

    pub fn action_convention(&self) -> Result<ActionConvention, CliError> {
        let s = &self.conventions.action_convention;
        ActionConvention::from_name(s).ok_or_else(|| {
            invalid("conventions.action_convention", format!("expected \"paper-inverse\" or \"direct\", got {s:?}"))
        })
    }

    /// Checks everything that does not need the solver objects.
    pub fn validate(&self) -> Result<(), CliError> {
        self.mass_coefficient()?;
        self.action_convention()?;
        if self.output.stride == 0 {
            return Err(invalid("output.stride", "must be at least 1"));
        }
        if let Some(f) = self.output.formats.iter().find(|f| f.as_str() != "csv") {
            return Err(invalid("output.formats", format!("unsupported format {f:?}; only \"csv\" is available")));
        }
        if let ControlSection::Cpg { component, .. } = &self.control {
            if StrainComponent::from_name(component).is_none() {
                let names: Vec<_> = StrainComponent::ALL.iter().map(|c| c.name()).collect();
                return Err(invalid("control.component", format!("{component:?} is not one of {}", names.join(", "))));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Model, CliError> {
        self.validate()?;
        let r = &self.rod;
        let grid = Grid::new(r.n_nodes, r.length).map_err(|e| invalid("rod", e))?;
        let curve = match &r.reference_curve {
            CurveChoice::Straight => ReferenceCurve::Straight,
            CurveChoice::Collocated => ReferenceCurve::Collocated,
            CurveChoice::Points { points } => ReferenceCurve::Points(points.iter().map(|p| Vec3::from_array(*p)).collect()),
        };
        let props = match &r.mass {
            MassModel::Uniform { density, inertia } => {
                RodProperties::uniform(grid, *density, Mat3::from_diagonal(Vec3::from_array(*inertia)), &curve)
            }
            MassModel::Cylinder { radius, rho } => {
                let rho = *rho;
                RodProperties::cylinder(grid, *radius, |_| rho, self.mass_coefficient()?, &curve)
            }
            MassModel::PerNode { density, inertia } => {
                let inertia = inertia.iter().map(mat3_row_major).collect();
                curve
                    .sample(&grid)
                    .and_then(|p0| RodProperties::new(grid, density.clone(), inertia, p0))
            }
        }
        .map_err(|e| invalid("rod.mass", e))?;

        let law = match &self.stiffness {
            StiffnessSection::Diagonal { bending_torsion: b, shear_stretch: s } => {
                StiffnessLaw::from_section(&props, SectionStiffness::new(b[0], b[1], b[2], s[0], s[1], s[2]))
            }
            StiffnessSection::Full { matrix, per_node } => {
                let mats = match (matrix, per_node) {
                    (Some(m), None) => vec![mat6_row_major(m, "stiffness.matrix")?; grid.n_nodes()],
                    (None, Some(ms)) => {
                        ms.iter().map(|m| mat6_row_major(m, "stiffness.per_node")).collect::<Result<_, _>>()?
                    }
                    _ => return Err(invalid("stiffness", "give exactly one of `matrix` or `per_node`")),
                };
                StiffnessLaw::from_matrices(&props, mats)
            }
        }
        .map_err(|e| invalid("stiffness", e))?;

        let control: Box<dyn ControlLaw<f64>> = match &self.control {
            ControlSection::None => Box::new(ZeroControl),
            ControlSection::Cpg { amplitude, frequency, wavenumber, component, phase } => {
                let params = CpgParams {
                    amplitude: *amplitude,
                    frequency: *frequency,
                    wavenumber: *wavenumber,
                    component: StrainComponent::from_name(component).expect("validated"),
                    phase: *phase,
                };
                Box::new(CpgLaw::new(params, &props).map_err(|e| invalid("control", e))?)
            }
        };

        let initial = self.initial_state(&grid)?;

        let s = &self.solver;
        let solver = SolverConfig {
            dt: s.dt.map_or(TimeStep::Auto, TimeStep::Fixed),
            cfl_number: s.cfl_number,
            t_end: s.t_end,
            output_stride: self.output.stride,
            scheme: match s.scheme {
                SchemeChoice::Rk4 => Scheme::Rk4,
                SchemeChoice::Midpoint => Scheme::Midpoint,
            },
            stress_divergence: match s.stress_divergence {
                DivergenceChoice::Conservative => StressDivergence::Conservative,
                DivergenceChoice::Literal => StressDivergence::Literal,
            },
        };
        solver.validate().map_err(|e| invalid("solver", e))?;
        Ok(Model { props, law, control, initial, solver, convention: self.action_convention()? })
    }

    fn initial_state(&self, grid: &Grid<f64>) -> Result<SimState<f64>, CliError> {
        let n = grid.n_nodes();
        let poses = match &self.initial.shape {
            ShapeChoice::Straight => PoseField::identity(n),
            ShapeChoice::Screw { strain } => screw_field(grid, &Default::default(), &Twist::from_array(*strain)),
            ShapeChoice::File { path, time } => {
                let rec = read_record(path, *time, n, "initial.shape")?;
                PoseField::new(rec.nodes.iter().map(|r| r.pose()).collect::<Result<_, _>>().map_err(|e| {
                    invalid("initial.shape", e)
                })?)
            }
        };
        let w = match &self.initial.velocity {
            VelocityChoice::Zero => TwistField::zeros(n),
            VelocityChoice::Uniform { twist } => TwistField::uniform(n, Twist::from_array(*twist)),
            VelocityChoice::File { path, time } => {
                let rec = read_record(path, *time, n, "initial.velocity")?;
                TwistField::new(rec.nodes.iter().map(|r| Twist::from_array(r.w)).collect())
            }
        };
        SimState::from_configuration(grid, &poses, w).map_err(|e| invalid("initial", e))
    }
}

fn read_record(path: &Path, time: Option<f64>, n: usize, key: &str) -> Result<snapshot::SnapshotRecord, CliError> {
    let records = snapshot::read_snapshots(path).map_err(|e| invalid(key, e))?;
    let rec = match time {
        None => records.into_iter().last(),
        Some(t) => records.into_iter().find(|r| r.t == t),
    }
    .ok_or_else(|| invalid(key, format!("{} has no matching snapshot", path.display())))?;
    if rec.nodes.len() != n {
        return Err(invalid(key, format!("snapshot has {} nodes, the rod has {n}", rec.nodes.len())));
    }
    Ok(rec)
}

fn mat3_row_major(m: &[f64; 9]) -> Mat3<f64> {
    Mat3::from_rows([[m[0], m[1], m[2]], [m[3], m[4], m[5]], [m[6], m[7], m[8]]])
}

fn mat6_row_major(m: &[f64], key: &str) -> Result<[[f64; 6]; 6], CliError> {
    if m.len() != 36 {
        return Err(invalid(key, format!("expected 36 entries, got {}", m.len())));
    }
    Ok(std::array::from_fn(|r| std::array::from_fn(|c| m[6 * r + c])))
}
