//! Pass/fail suites over the oracles and studies, with residual tables.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::studies::{self, BenchmarkRod};
use super::{connection_identity_check, RigidBody};
use crate::dynamics::StressDivergence;
use crate::error::Result;
use crate::linalg::{Mat3, Vec3};
use crate::rod::{Grid, RodProperties};
use crate::se3::{adjoint, exp_se3, klein, Twist};

pub type BracketFn = fn(&Twist<f64>, &Twist<f64>) -> Twist<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Algebra,
    Connection,
    Rigid,
    Energy,
    Differential,
    Compatibility,
    Boundary,
    Actuation,
    Stationarity,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Algebra,
        Suite::Connection,
        Suite::Rigid,
        Suite::Energy,
        Suite::Differential,
        Suite::Compatibility,
        Suite::Boundary,
        Suite::Actuation,
        Suite::Stationarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Connection => "connection",
            Suite::Rigid => "rigid",
            Suite::Energy => "energy",
            Suite::Differential => "differential",
            Suite::Compatibility => "compatibility",
            Suite::Boundary => "boundary",
            Suite::Actuation => "actuation",
            Suite::Stationarity => "stationarity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// How a measured value is compared with its bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    AtLeast,
    Holds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, comparison: Comparison::AtMost, passed: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, comparison: Comparison::AtLeast, passed: value >= bound }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self { name: name.into(), value: v, bound: 1.0, comparison: Comparison::Holds, passed: ok }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}] {}", self.suite.name(), if self.passed() { "PASS" } else { "FAIL" })?;
        writeln!(f, "  {:<44} {:>13} {:>4} {:>11}  status", "check", "value", "", "bound")?;
        for c in &self.checks {
            let (op, value, bound) = match c.comparison {
                Comparison::AtMost => ("<=", format!("{:.3e}", c.value), format!("{:.3e}", c.bound)),
                Comparison::AtLeast => (">=", format!("{:.3e}", c.value), format!("{:.3e}", c.bound)),
                Comparison::Holds => ("", if c.passed { "yes".into() } else { "no".into() }, String::new()),
            };
            writeln!(f, "  {:<44} {:>13} {:>4} {:>11}  {}", c.name, value, op, bound, if c.passed { "ok" } else { "FAIL" })?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn rand_twist(rng: &mut ChaCha8Rng, s: f64) -> Twist<f64> {
    Twist::from_array(std::array::from_fn(|_| rng.gen_range(-s..s)))
}

fn random_node(rng: &mut ChaCha8Rng) -> Result<RodProperties<f64>> {
    let b = Mat3::from_rows(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))));
    let inertia = b.mul_mat(&b.transpose()).add(&Mat3::identity().scale(0.1));
    let mass = rng.gen_range(0.5..2.0);
    let p0 = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    RodProperties::new(Grid::new(3, 1.0)?, vec![mass; 3], vec![inertia; 3], vec![p0; 3])
}

/// Largest relative residuals of the four algebraic identities over `cases`
/// random draws each: Ad-invariance of 𝔨, ad-skew-symmetry, Jacobi, inertia duality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraResiduals {
    pub ad_invariance: f64,
    pub ad_skew: f64,
    pub jacobi: f64,
    pub duality: f64,
}

pub fn algebra_residuals(cases: usize, seed: u64, bracket: BracketFn) -> Result<AlgebraResiduals> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = AlgebraResiduals { ad_invariance: 0.0, ad_skew: 0.0, jacobi: 0.0, duality: 0.0 };
    for _ in 0..cases {
        let g = exp_se3(&rand_twist(&mut rng, 2.0));
        let (u, v, w) = (rand_twist(&mut rng, 1.0), rand_twist(&mut rng, 1.0), rand_twist(&mut rng, 1.0));
        let (gv, gw) = (adjoint(&g, &v), adjoint(&g, &w));
        let scale = (gv.norm() * gw.norm()).max(v.norm() * w.norm());
        r.ad_invariance = r.ad_invariance.max((klein(&gv, &gw) - klein(&v, &w)).abs() / scale);

        let uvw = u.norm() * v.norm() * w.norm();
        let skew = klein(&bracket(&u, &v), &w) + klein(&v, &bracket(&u, &w));
        r.ad_skew = r.ad_skew.max(skew.abs() / uvw);
        let jac = bracket(&u, &bracket(&v, &w)) + bracket(&v, &bracket(&w, &u)) + bracket(&w, &bracket(&u, &v));
        r.jacobi = r.jacobi.max(jac.norm() / uvw);

        let props = random_node(&mut rng)?;
        let av = props.inertia_a(1, &v);
        let lhs = klein(&av, &w);
        let rhs = props.inner_z(1, &v, &w);
        r.duality = r.duality.max((lhs - rhs).abs() / (av.norm() * w.norm()).max(f64::MIN_POSITIVE));
    }
    Ok(r)
}

pub const ALGEBRA_CASES: usize = 1000;
pub const ALGEBRA_TOLERANCE: f64 = 1e-12;

/// The algebra suite for a given bracket. Passing a deliberately wrong bracket
/// must make it fail.
pub fn algebra_suite(bracket: BracketFn) -> Result<SuiteReport> {
    let r = algebra_residuals(ALGEBRA_CASES, 1, bracket)?;
    Ok(SuiteReport {
        suite: Suite::Algebra,
        checks: vec![
            Check::at_most("klein Ad-invariance", r.ad_invariance, ALGEBRA_TOLERANCE),
            Check::at_most("ad-skew-symmetry w.r.t. klein", r.ad_skew, ALGEBRA_TOLERANCE),
            Check::at_most("Jacobi identity", r.jacobi, ALGEBRA_TOLERANCE),
            Check::at_most("inertia duality klein(AV,W) = <V,W>", r.duality, ALGEBRA_TOLERANCE),
        ],
        notes: vec![format!("{ALGEBRA_CASES} random cases per identity")],
    })
}

pub fn connection_suite(bracket: BracketFn) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut halved, mut unhalved, mut t_h, mut t_u) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let props = random_node(&mut rng)?;
        let body = RigidBody::from_rod_node(&props, 1);
        let (v, w, u) = (rand_twist(&mut rng, 1.0), rand_twist(&mut rng, 1.0), rand_twist(&mut rng, 1.0));
        let r = connection_identity_check(&v, &w, &u, &body, bracket);
        halved = halved.max(r.halved);
        unhalved = unhalved.max(r.unhalved);
        t_h = t_h.max(r.torsion_halved / (v.norm() * w.norm()));
        t_u = t_u.max(r.torsion_unhalved / (v.norm() * w.norm()));
    }
    let which = if halved <= 1e-10 && unhalved > 1e-10 {
        "the formula with all three terms halved satisfies the Koszul formula; the unhalved variant does not"
    } else if unhalved <= 1e-10 && halved > 1e-10 {
        "the unhalved variant satisfies the Koszul formula; the halved one does not"
    } else {
        "neither variant is singled out"
    };
    Ok(SuiteReport {
        suite: Suite::Connection,
        checks: vec![
            Check::at_most("Koszul residual, halved formula", halved, 1e-10),
            Check::at_most("torsion-free, halved formula", t_h, 1e-12),
            Check::at_most("torsion-free, unhalved formula", t_u, 1e-12),
        ],
        notes: vec![format!("Koszul residual of the unhalved formula: {unhalved:.3e}"), which.to_string()],
    })
}

pub fn rigid_suite() -> Result<SuiteReport> {
    let w0 = Twist::new(Vec3::new(0.8, -0.5, 1.2), Vec3::new(0.1, 0.2, -0.1));
    let r = studies::rigid_study(&BenchmarkRod::default(), 9, w0, 1.0)?;
    Ok(SuiteReport {
        suite: Suite::Rigid,
        checks: vec![
            Check::at_most("nodewise |W - W_oracle| / |W0|", r.velocity_error, 1e-9),
            Check::at_most("max |xi|", r.max_strain, 1e-10),
            Check::at_most("spatial momentum drift (relative)", r.momentum_drift, 1e-8),
            Check::at_most("oracle spatial momentum drift", r.oracle_momentum_drift, 1e-8),
        ],
        notes: vec![format!("{} steps of {:.3e} s", r.n_steps, r.dt)],
    })
}

pub fn energy_suite() -> Result<SuiteReport> {
    let e = studies::energy_study(&BenchmarkRod::default(), 33, 10_000, 0.5)?;
    Ok(SuiteReport {
        suite: Suite::Energy,
        checks: vec![
            Check::at_most("relative energy drift, 1e4 RK4 steps", e.drift, 1e-6),
            Check::at_least("drift reduction when dt is halved", e.reduction, 8.0),
        ],
        notes: vec![
            format!("dt = {:.3e} s, E0 = {:.4e} J, drift at dt/2 = {:.3e}", e.dt, e.initial_energy, e.drift_half),
            format!("spatial momentum drift relative to ∫|AW| (not asserted): {:.3e}", e.momentum_drift),
        ],
    })
}

pub fn differential_suite() -> Result<SuiteReport> {
    let d = studies::differential_study(&BenchmarkRod::default(), 100, 3)?;
    let min_order = d.refinement_orders.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SuiteReport {
        suite: Suite::Differential,
        checks: vec![
            Check::at_most("dU vs central differences (relative)", d.fd_relative_error, 1e-4),
            Check::at_most("collocated Lemma vs Corollary form", d.matched_forms, 1e-10),
            Check::at_least("geometric vs Corollary form, order", min_order, 1.8),
        ],
        notes: vec![format!("refinement errors {}", sci(&d.refinement_errors))],
    })
}

pub fn compatibility_suite() -> Result<SuiteReport> {
    let c = studies::compatibility_study(&BenchmarkRod::soft(), &[33, 65, 129], 0.5, 4)?;
    let min = |o: &[f64]| o.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SuiteReport {
        suite: Suite::Compatibility,
        checks: vec![
            Check::at_most("strain(reconstruct(xi)) round trip", c.round_trip, 1e-12),
            Check::at_least("evolved xi vs strain of advanced poses, order", min(&c.step_orders), 1.8),
            Check::at_least("xi vs strain(reconstruct) at t_end, order", min(&c.nodal_orders), 1.8),
        ],
        notes: vec![format!("one-step errors {}; t_end errors {}", sci(&c.step_errors), sci(&c.nodal_errors))],
    })
}

pub fn boundary_suite() -> Result<SuiteReport> {
    let b = studies::boundary_study(&BenchmarkRod::default(), 33, 2000)?;
    Ok(SuiteReport {
        suite: Suite::Boundary,
        checks: vec![
            Check::at_most("end-node strain at every output", b.max_end_strain, 0.0),
            Check::holds("injected end strain is detected", b.injection_detected),
        ],
        notes: vec![format!("{} outputs checked", b.outputs)],
    })
}

pub fn actuation_suite() -> Result<SuiteReport> {
    let a = studies::actuation_study(&BenchmarkRod::soft(), 17, 1.0, studies::benchmark_cpg())?;
    let min_order = a.orders.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SuiteReport {
        suite: Suite::Actuation,
        checks: vec![
            Check::holds("zero control is bit-identical to the passive rod", a.zero_control_identical),
            Check::at_least("power balance mismatch, order in dt", min_order, 3.5),
        ],
        notes: vec![
            format!("energy change {:.4e} J, mismatch {}", a.energy_change, sci(&a.mismatch)),
            format!("mismatch on the refined grid at dt/2: {:.3e}", a.mismatch_refined_grid),
        ],
    })
}

pub fn stationarity_suite() -> Result<SuiteReport> {
    let s = studies::stationarity_study(&BenchmarkRod::soft(), 17, 200, 20, 5, StressDivergence::Conservative)?;
    let worst = s
        .coarse_values
        .iter()
        .zip(&s.refined_values)
        .fold(0.0f64, |a, (c, f)| a.max(c.abs() / f.abs()));
    Ok(SuiteReport {
        suite: Suite::Stationarity,
        checks: vec![
            Check::at_most("coarse / refined variation (rms)", s.ratio, 10.0),
            Check::at_most("coarse / refined, worst perturbation", worst, 10.0),
            Check::at_least("corrupted / refined variation (rms)", s.corrupted / s.refined, 10.0),
            Check::at_least("coarse / refined shows convergence", s.ratio, 3.5),
        ],
        notes: vec![format!("rms variation: coarse {:.3e}, refined {:.3e}, corrupted {:.3e}", s.coarse, s.refined, s.corrupted)],
    })
}

/// Runs one suite with the library's own bracket.
pub fn run_suite(suite: Suite) -> Result<SuiteReport> {
    let b: BracketFn = crate::se3::bracket;
    match suite {
        Suite::Algebra => algebra_suite(b),
        Suite::Connection => connection_suite(b),
        Suite::Rigid => rigid_suite(),
        Suite::Energy => energy_suite(),
        Suite::Differential => differential_suite(),
        Suite::Compatibility => compatibility_suite(),
        Suite::Boundary => boundary_suite(),
        Suite::Actuation => actuation_suite(),
        Suite::Stationarity => stationarity_suite(),
    }
}
