//! Reproducible numerical experiments. Each returns raw measurements; the
//! pass/fail bounds live with the callers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{action_variation, euler_arnold_rigid, RigidBody, SmoothPerturbation, Trajectory};
use crate::actuation::{ControlLaw, CpgLaw, CpgParams, StrainComponent, ZeroControl};
use crate::dynamics::{
    cfl_dt, check_invariants, screw_field, spatial_momentum, total_energy, RodSystem, Scheme, SimState,
    StressDivergence,
};
use crate::elasticity::{
    du_corollary, du_geometric, du_lemma, elastic_energy_of_poses, integrate_midpoint_strains, midpoint_strains, strain,
    SectionStiffness, StiffnessLaw,
};
use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::rod::{Grid, PoseField, ReferenceCurve, RodProperties, TwistField};
use crate::se3::{compose, exp_se3, Pose, Twist};

/// Parameters of the benchmark rod: a 1 m snake-like body, compliant in
/// bending and torsion, stiff in shear and stretch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkRod {
    pub length: f64,
    /// kg/m.
    pub mass: f64,
    /// Rotational inertia per length about the section axes, kg·m.
    pub inertia: [f64; 3],
    pub section: SectionStiffness<f64>,
}

impl Default for BenchmarkRod {
    fn default() -> Self {
        Self {
            length: 1.0,
            mass: 1.0,
            inertia: [2e-3, 2e-3, 1e-3],
            section: SectionStiffness::new(1.0, 1.0, 0.4, 1e5, 1e5, 1.3e5),
        }
    }
}

impl BenchmarkRod {
    /// Same body with a softer section in shear and stretch.
    pub fn soft() -> Self {
        Self { section: SectionStiffness::new(1.0, 1.0, 0.4, 40.0, 40.0, 60.0), inertia: [2e-2, 2e-2, 1e-2], ..Self::default() }
    }

    pub fn build(&self, n_nodes: usize, curve: ReferenceCurve<f64>) -> Result<(RodProperties<f64>, StiffnessLaw<f64>)> {
        let grid = Grid::new(n_nodes, self.length)?;
        let i = self.inertia;
        let props = RodProperties::uniform(grid, self.mass, Mat3::from_diagonal(Vec3::new(i[0], i[1], i[2])), &curve)?;
        let law = StiffnessLaw::from_section(&props, self.section)?;
        Ok((props, law))
    }
}

/// Constant strain of the bent benchmark configuration: bending 1 rad/m about
/// `e₁` with 0.5 rad/m of twist.
pub fn bent_screw() -> Twist<f64> {
    Twist::new(Vec3::new(1.0, 0.0, 0.5), Vec3::zeros())
}

/// Smooth state: `ξ = Ξ sin²(π z/L)`, `W = V₀ + V₁ cos(π z/L)`.
pub fn smooth_state(grid: &Grid<f64>, xi: Twist<f64>, v0: Twist<f64>, v1: Twist<f64>) -> Result<SimState<f64>> {
    let n = grid.n_nodes();
    let l = grid.length();
    let pi = std::f64::consts::PI;
    let xi = TwistField::from_fn(n, |i| {
        if i == 0 || i == n - 1 {
            Twist::zero()
        } else {
            let s = (pi * grid.z(i) / l).sin();
            xi * (s * s)
        }
    });
    let w = TwistField::from_fn(n, |i| v0 + v1 * (pi * grid.z(i) / l).cos());
    SimState::from_strain(grid, Pose::identity(), xi, w)
}

fn default_smooth_state(grid: &Grid<f64>) -> Result<SimState<f64>> {
    smooth_state(
        grid,
        Twist::new(Vec3::new(0.8, -0.3, 0.4), Vec3::new(0.02, -0.01, 0.03)),
        Twist::new(Vec3::new(0.1, 0.2, 0.0), Vec3::new(0.0, 0.05, 0.0)),
        Twist::new(Vec3::new(0.3, 0.0, -0.2), Vec3::new(0.02, 0.0, 0.01)),
    )
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Energy drift of free vibration from the bent screw configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyStudy {
    pub n_nodes: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub initial_energy: f64,
    /// `max_t |E(t) − E(0)| / E(0)` at `dt`.
    pub drift: f64,
    /// Same over the same time span at `dt/2`.
    pub drift_half: f64,
    pub reduction: f64,
    /// `max_t |P(t) − P(0)|` divided by `∫|A W| dz` at the end, at `dt`.
    pub momentum_drift: f64,
}

pub fn energy_study(rod: &BenchmarkRod, n_nodes: usize, n_steps: usize, cfl: f64) -> Result<EnergyStudy> {
    let (props, law) = rod.build(n_nodes, ReferenceCurve::Collocated)?;
    let grid = *props.grid();
    let g0 = screw_field(&grid, &Pose::identity(), &bent_screw());
    let s0 = SimState::from_configuration(&grid, &g0, TwistField::zeros(n_nodes))?;
    let sys = RodSystem::new(&props, &law, &ZeroControl)?;
    let dt = cfl_dt(&props, &law, cfl)?;
    let e0 = total_energy(&s0, &props, &law);
    let p0 = spatial_momentum(&s0, &props);
    let run = |h: f64, steps: usize, track_momentum: bool| -> Result<(f64, f64)> {
        let mut drift = 0.0f64;
        let mut mom = 0.0f64;
        let mut scale = 0.0f64;
        sys.integrate(s0.clone(), h, steps, Scheme::Rk4, 1, |_, s| {
            drift = drift.max(((total_energy(s, &props, &law) - e0) / e0).abs());
            if track_momentum {
                mom = mom.max((spatial_momentum(s, &props) - p0).norm());
                scale = scale.max(props.grid().integrate(|i| props.inertia_a(i, &s.w[i]).norm()));
            }
            Ok(())
        })?;
        Ok((drift, if scale > 0.0 { mom / scale } else { 0.0 }))
    };
    let (drift, momentum_drift) = run(dt, n_steps, true)?;
    let (drift_half, _) = run(dt / 2.0, 2 * n_steps, false)?;
    Ok(EnergyStudy {
        n_nodes,
        n_steps,
        dt,
        initial_energy: e0,
        drift,
        drift_half,
        reduction: drift / drift_half,
        momentum_drift,
    })
}

/// Solver against the stand-alone rigid-body integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidStudy {
    pub n_steps: usize,
    pub dt: f64,
    /// Largest nodewise `|W_solver − W_oracle|`, relative to `|W₀|`.
    pub velocity_error: f64,
    pub max_strain: f64,
    /// `max_t |P(t) − P(0)| / |P(0)|` for the solver.
    pub momentum_drift: f64,
    /// Same for the oracle.
    pub oracle_momentum_drift: f64,
}

pub fn rigid_study(rod: &BenchmarkRod, n_nodes: usize, w0: Twist<f64>, t_end: f64) -> Result<RigidStudy> {
    let (props, law) = rod.build(n_nodes, ReferenceCurve::Collocated)?;
    let grid = *props.grid();
    let sys = RodSystem::new(&props, &law, &ZeroControl)?;
    let dt_max = cfl_dt(&props, &law, 0.5)?;
    let n_steps = (t_end / dt_max).ceil() as usize;
    let dt = t_end / n_steps as f64;
    let s0 = SimState::from_strain(&grid, Pose::identity(), TwistField::zeros(n_nodes), TwistField::uniform(n_nodes, w0))?;
    let oracle = euler_arnold_rigid(w0, Pose::identity(), &RigidBody::from_rod_node(&props, 0), t_end, dt)?;
    let p0 = spatial_momentum(&s0, &props);
    let mut velocity_error = 0.0f64;
    let mut max_strain = 0.0f64;
    let mut momentum_drift = 0.0f64;
    sys.integrate(s0, dt, n_steps, Scheme::Rk4, 1, |k, s| {
        let w = oracle.velocity[k];
        for v in &s.w {
            velocity_error = velocity_error.max((*v - w).norm());
        }
        max_strain = max_strain.max(s.xi.max_abs());
        momentum_drift = momentum_drift.max((spatial_momentum(s, &props) - p0).norm());
        Ok(())
    })?;
    let q0 = oracle.spatial_momentum[0];
    let oracle_drift = oracle.spatial_momentum.iter().fold(0.0f64, |a, q| a.max((*q - q0).norm()));
    Ok(RigidStudy {
        n_steps,
        dt,
        velocity_error: velocity_error / w0.norm(),
        max_strain,
        momentum_drift: momentum_drift / p0.norm(),
        oracle_momentum_drift: oracle_drift / q0.norm(),
    })
}

/// Action variations along random admissible perturbations.
#[derive(Clone, Debug, PartialEq)]
pub struct StationarityStudy {
    pub coarse: f64,
    pub refined: f64,
    /// Same perturbations on a distorted coarse trajectory.
    pub corrupted: f64,
    pub ratio: f64,
    pub coarse_values: Vec<f64>,
    pub refined_values: Vec<f64>,
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Coarse `(n_nodes, n_steps)` run against the run with `Δz/2`, `Δt/2`.
pub fn stationarity_study(
    rod: &BenchmarkRod,
    n_nodes: usize,
    n_steps: usize,
    n_perturbations: usize,
    seed: u64,
    divergence: StressDivergence,
) -> Result<StationarityStudy> {
    let (props_c, law_c) = rod.build(n_nodes, ReferenceCurve::Collocated)?;
    let (props_f, law_f) = rod.build(2 * n_nodes - 1, ReferenceCurve::Collocated)?;
    let dt = cfl_dt(&props_c, &law_c, 0.5)?;
    let record = |props: &RodProperties<f64>, law: &StiffnessLaw<f64>, h: f64, steps: usize| -> Result<Trajectory<f64>> {
        let sys = RodSystem::new(props, law, &ZeroControl)?.with_divergence(divergence);
        Trajectory::record(&sys, default_smooth_state(props.grid())?, h, steps, Scheme::Rk4)
    };
    let coarse = record(&props_c, &law_c, dt, n_steps)?;
    let fine = record(&props_f, &law_f, dt / 2.0, 2 * n_steps)?;
    let t_end = coarse.t_end();
    let length = props_c.grid().length();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perts: Vec<_> = (0..n_perturbations).map(|_| SmoothPerturbation::random(&mut rng, t_end, length)).collect();
    let distortion = SmoothPerturbation::random(&mut rng, t_end, length);

    let poses_c = coarse.poses();
    let poses_f = fine.poses();
    let grid_c = *props_c.grid();
    let poses_bad: Vec<PoseField<f64>> = poses_c
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let t = dt * k as f64;
            PoseField::from_fn(g.len(), |i| compose(&g[i], &exp_se3(&(distortion.eval(t, grid_c.z(i)) * 0.05))))
        })
        .collect();

    let eps = 1e-5;
    let mut cv = Vec::new();
    let mut fv = Vec::new();
    let mut bv = Vec::new();
    for p in &perts {
        let zc = p.sample(poses_c.len(), dt, &props_c);
        let zf = p.sample(poses_f.len(), dt / 2.0, &props_f);
        cv.push(action_variation(&poses_c, dt, &zc, eps, &props_c, &law_c)?);
        fv.push(action_variation(&poses_f, dt / 2.0, &zf, eps, &props_f, &law_f)?);
        bv.push(action_variation(&poses_bad, dt, &zc, eps, &props_c, &law_c)?);
    }
    let (c, f) = (rms(&cv), rms(&fv));
    Ok(StationarityStudy { coarse: c, refined: f, corrupted: rms(&bv), ratio: c / f, coarse_values: cv, refined_values: fv })
}

/// Checks of the differential of the elastic energy.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialStudy {
    /// Largest `|fd − dU| / |dU|` over the random pairs.
    pub fd_relative_error: f64,
    /// Largest relative difference between the collocated Lemma and Corollary forms.
    pub matched_forms: f64,
    /// `|dU_geometric − dU_corollary| / |dU|` on successively refined grids.
    pub refinement_errors: Vec<f64>,
    pub refinement_orders: Vec<f64>,
}

pub fn differential_study(rod: &BenchmarkRod, n_pairs: usize, seed: u64) -> Result<DifferentialStudy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rand_twist = |s: f64| Twist::from_array(std::array::from_fn(|_| rand::Rng::gen_range(&mut rng, -s..s)));

    let (props, law) = rod.build(17, ReferenceCurve::Straight)?;
    let grid = *props.grid();
    let n = grid.n_nodes();
    let eps = 1e-6;
    let mut fd_err = 0.0f64;
    let mut matched = 0.0f64;
    for _ in 0..n_pairs {
        let base = rand_twist(0.5);
        let wobble: Vec<Twist<f64>> = (0..n).map(|_| rand_twist(0.02)).collect();
        let g = PoseField::from_fn(n, |i| exp_se3(&(base * grid.z(i) + wobble[i])));
        let z = TwistField::from_fn(n, |_| rand_twist(1.0));
        let shifted = |s: f64| PoseField::from_fn(n, |i| compose(&g[i], &exp_se3(&(z[i] * s))));
        let fd = (elastic_energy_of_poses(&props, &law, &shifted(eps))? - elastic_energy_of_poses(&props, &law, &shifted(-eps))?)
            / (2.0 * eps);
        let an = du_geometric(&props, &law, &g, &z)?;
        fd_err = fd_err.max((fd - an).abs() / an.abs());

        let mut xi = TwistField::from_fn(n, |_| rand_twist(1.0));
        xi[0] = Twist::zero();
        xi[n - 1] = Twist::zero();
        let a = du_lemma(&props, &law, &xi, &z);
        let b = du_corollary(&props, &law, &xi, &z);
        matched = matched.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
    }

    // Smooth strain and perturbation sampled on refined grids.
    let strain_profile = Twist::new(Vec3::new(0.7, -0.4, 0.3), Vec3::new(0.05, 0.02, -0.04));
    let pert = [rand_twist(1.0), rand_twist(1.0), rand_twist(1.0)];
    let mut errors = Vec::new();
    for n in [17usize, 33, 65, 129] {
        let (props, law) = rod.build(n, ReferenceCurve::Straight)?;
        let grid = *props.grid();
        let l = grid.length();
        let profile = |z: f64| {
            let s = (std::f64::consts::PI * z / l).sin();
            strain_profile * (s * s * (1.0 + 0.5 * z / l))
        };
        let zf = TwistField::from_fn(n, |i| {
            let s = 2.0 * grid.z(i) / l - 1.0;
            pert[0] + pert[1] * s + pert[2] * (s * s)
        });
        // Poses from the exact midpoint strains of the profile, sampled at cell centres.
        let mid: Vec<Twist<f64>> = (0..n - 1).map(|i| profile(grid.z(i) + grid.dz() / 2.0)).collect();
        let g = integrate_midpoint_strains(&Pose::identity(), &mid, &grid);
        let xi = TwistField::from_fn(n, |i| if i == 0 || i == n - 1 { Twist::zero() } else { profile(grid.z(i)) });
        let geo = du_geometric(&props, &law, &g, &zf)?;
        let col = du_corollary(&props, &law, &xi, &zf);
        errors.push((geo - col).abs() / col.abs());
    }
    let orders = errors.windows(2).map(|w| order(w[0], w[1])).collect();
    Ok(DifferentialStudy { fd_relative_error: fd_err, matched_forms: matched, refinement_errors: errors, refinement_orders: orders })
}

/// Agreement between the evolved strain and the poses.
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityStudy {
    /// `max |strain(reconstruct(ξ)) − ξ|` on midpoint strains.
    pub round_trip: f64,
    /// One step from the smooth initial state: midpoint strains of the poses
    /// advanced node by node vs `(ξ_i + ξ_{i+1})/2` of the evolved strain.
    pub step_errors: Vec<f64>,
    pub step_orders: Vec<f64>,
    /// At `t_end`: interior nodal strain of the reconstructed poses vs `ξ`.
    pub nodal_errors: Vec<f64>,
    pub nodal_orders: Vec<f64>,
}

/// Refinement study on grids of `levels[k]` nodes with `Δt ∝ Δz`.
///
/// The one-step comparison starts from a state with `∂_z W = 0` at the free
/// ends, as the continuous problem requires. Later in a run the discrete end
/// gradient is not zero, which is why poses are reconstructed from `ξ` rather
/// than advanced node by node.
pub fn compatibility_study(rod: &BenchmarkRod, levels: &[usize], t_end: f64, seed: u64) -> Result<CompatibilityStudy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mid: Vec<Twist<f64>> = (0..64)
        .map(|_| Twist::from_array(std::array::from_fn(|_| rand::Rng::gen_range(&mut rng, -2.0..2.0))))
        .collect();
    let grid = Grid::new(65, 1.0)?;
    let g = integrate_midpoint_strains(&Pose::identity(), &mid, &grid);
    let back = midpoint_strains(&g, &grid)?;
    let round_trip = mid.iter().zip(&back).fold(0.0f64, |a, (x, y)| a.max((*x - *y).max_abs()));

    let coarsest = levels.first().copied().ok_or_else(|| Error::InvalidArgument("no refinement levels".into()))?;
    let (pc, lc) = rod.build(coarsest, ReferenceCurve::Straight)?;
    let dt0 = cfl_dt(&pc, &lc, 0.5)?;
    let (mut step_errors, mut nodal_errors) = (Vec::new(), Vec::new());
    for (k, &n) in levels.iter().enumerate() {
        let (props, law) = rod.build(n, ReferenceCurve::Straight)?;
        let grid = *props.grid();
        let dt = dt0 / f64::powi(2.0, k as i32);
        let sys = RodSystem::new(&props, &law, &ZeroControl)?;
        let start = default_smooth_state(&grid)?;

        let (next, tracked) = sys.step_with_tracked_poses(&start, dt)?;
        let mid = midpoint_strains(&tracked, &grid)?;
        step_errors.push((0..n - 1).fold(0.0f64, |a, i| a.max((mid[i] - (next.xi[i] + next.xi[i + 1]) * 0.5).norm())));

        let steps = (t_end / dt).round() as usize;
        let end = sys.integrate(start, dt, steps, Scheme::Rk4, usize::MAX, |_, _| Ok(()))?;
        let nodal = strain(&end.g, &grid)?;
        nodal_errors.push((1..n - 1).fold(0.0f64, |a, i| a.max((nodal[i] - end.xi[i]).norm())));
    }
    let orders = |e: &[f64]| e.windows(2).map(|w| order(w[0], w[1])).collect();
    Ok(CompatibilityStudy {
        round_trip,
        step_orders: orders(&step_errors),
        nodal_orders: orders(&nodal_errors),
        step_errors,
        nodal_errors,
    })
}

/// End-strain bookkeeping over a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryStudy {
    pub outputs: usize,
    /// Largest `|ξ|` at the end nodes over all outputs.
    pub max_end_strain: f64,
    /// Whether the checker flagged a state with an injected end strain.
    pub injection_detected: bool,
}

pub fn boundary_study(rod: &BenchmarkRod, n_nodes: usize, n_steps: usize) -> Result<BoundaryStudy> {
    let (props, law) = rod.build(n_nodes, ReferenceCurve::Straight)?;
    let grid = *props.grid();
    let sys = RodSystem::new(&props, &law, &ZeroControl)?;
    let dt = cfl_dt(&props, &law, 0.5)?;
    let g0 = screw_field(&grid, &Pose::identity(), &bent_screw());
    let s0 = SimState::from_configuration(&grid, &g0, TwistField::zeros(n_nodes))?;
    let mut outputs = 0;
    let mut max_end = 0.0f64;
    let end = sys.integrate(s0, dt, n_steps, Scheme::Rk4, 10, |_, s| {
        check_invariants(s, &grid)?;
        outputs += 1;
        max_end = max_end.max(s.xi[0].max_abs()).max(s.xi[n_nodes - 1].max_abs());
        Ok(())
    })?;
    let mut bad = end;
    bad.xi[n_nodes - 1] = Twist::from_angular(Vec3::new(1e-3, 0.0, 0.0));
    let injection_detected = matches!(check_invariants(&bad, &grid), Err(Error::BoundaryStrain { .. }));
    Ok(BoundaryStudy { outputs, max_end_strain: max_end, injection_detected })
}

/// A zero law that does not declare itself zero, so the solver evaluates it.
#[derive(Debug)]
struct OpaqueZero;

impl ControlLaw<f64> for OpaqueZero {
    fn name(&self) -> &str {
        "opaque-zero"
    }
    fn local(&self, _t: f64, _i: usize, _xi: &Twist<f64>, _xi_dot: &Twist<f64>) -> Twist<f64> {
        Twist::zero()
    }
}

fn bits(s: &SimState<f64>) -> Vec<u64> {
    let mut out = vec![s.t.to_bits()];
    for (w, x) in s.w.iter().zip(&s.xi) {
        out.extend(w.to_array().iter().chain(x.to_array().iter()).map(|v| v.to_bits()));
    }
    for g in &s.g {
        out.extend(g.rotation.matrix().m.iter().flatten().map(|v| v.to_bits()));
        out.extend(g.translation.to_array().iter().map(|v| v.to_bits()));
    }
    out
}

/// Zero-control identity and power balance under a travelling wave.
#[derive(Clone, Debug, PartialEq)]
pub struct ActuationStudy {
    pub zero_control_identical: bool,
    pub energy_change: f64,
    /// `|ΔE − ∫P dt|` at `dt`, `dt/2`, `dt/4`.
    pub mismatch: Vec<f64>,
    pub orders: Vec<f64>,
    /// Same mismatch at `dt` on a grid with twice the nodes.
    pub mismatch_refined_grid: f64,
}

pub fn actuation_study(rod: &BenchmarkRod, n_nodes: usize, t_end: f64, cpg: CpgParams<f64>) -> Result<ActuationStudy> {
    let (props, law) = rod.build(n_nodes, ReferenceCurve::Straight)?;
    let grid = *props.grid();
    let s0 = default_smooth_state(&grid)?;
    let dt_max = cfl_dt(&props, &law, 0.5)?;

    // Zero control, three ways.
    let steps = 200;
    let passive = RodSystem::new(&props, &law, &ZeroControl)?;
    let silent = CpgLaw::new(CpgParams { amplitude: 0.0, ..cpg }, &props)?;
    let a = passive.integrate(s0.clone(), dt_max, steps, Scheme::Rk4, usize::MAX, |_, _| Ok(()))?;
    let b = RodSystem::new(&props, &law, &silent)?.integrate(s0.clone(), dt_max, steps, Scheme::Rk4, usize::MAX, |_, _| Ok(()))?;
    let c = RodSystem::new(&props, &law, &OpaqueZero)?.integrate(s0.clone(), dt_max, steps, Scheme::Rk4, usize::MAX, |_, _| Ok(()))?;
    let zero_control_identical = bits(&a) == bits(&b) && bits(&a) == bits(&c);

    let balance = |props: &RodProperties<f64>, law: &StiffnessLaw<f64>, s0: SimState<f64>, dt: f64| -> Result<(f64, f64)> {
        let control = CpgLaw::new(cpg, props)?;
        let sys = RodSystem::new(props, law, &control)?;
        let mut n = (t_end / dt).ceil() as usize;
        n += n % 2;
        let h = t_end / n as f64;
        let e0 = total_energy(&s0, props, law);
        let mut power = Vec::with_capacity(n + 1);
        let end = sys.integrate(s0, h, n, Scheme::Rk4, 1, |_, s| {
            power.push(sys.control_power(s)?);
            Ok(())
        })?;
        let simpson = power
            .iter()
            .enumerate()
            .map(|(k, p)| p * if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 })
            .sum::<f64>()
            * h
            / 3.0;
        let de = total_energy(&end, props, law) - e0;
        Ok((de, (de - simpson).abs()))
    };
    let mut mismatch = Vec::new();
    let mut energy_change = 0.0;
    for k in 0..3 {
        let (de, m) = balance(&props, &law, s0.clone(), dt_max / f64::powi(2.0, k))?;
        if k == 0 {
            energy_change = de;
        }
        mismatch.push(m);
    }
    let orders = mismatch.windows(2).map(|w| order(w[0], w[1])).collect();
    let (pf, lf) = rod.build(2 * n_nodes - 1, ReferenceCurve::Straight)?;
    let (_, mismatch_refined_grid) = balance(&pf, &lf, default_smooth_state(pf.grid())?, dt_max / 2.0)?;
    Ok(ActuationStudy { zero_control_identical, energy_change, mismatch, orders, mismatch_refined_grid })
}

/// Default travelling wave for the benchmark rod.
pub fn benchmark_cpg() -> CpgParams<f64> {
    CpgParams {
        amplitude: 0.05,
        frequency: 2.0 * std::f64::consts::PI,
        wavenumber: 2.0 * std::f64::consts::PI,
        component: StrainComponent::Bend1,
        phase: 0.0,
    }
}
