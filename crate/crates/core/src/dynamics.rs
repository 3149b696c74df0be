//! Semi-discrete equations of motion in `(W, ξ)`, time stepping, pose tracking
//! and conservation diagnostics.
//!
//! Spatial operator: collocated nodes, central differences inside and
//! one-sided differences at the ends ([`diff_z`]). The internal wrench vanishes
//! at both ends (free-free), so the one-sided stencil equals a central stencil
//! with odd ghost values. Together with trapezoidal weights the scheme satisfies
//! summation by parts and the semi-discrete energy is an exact invariant.

use crate::actuation::ControlLaw;
use crate::elasticity::{
    diff_z, elastic_energy, integrate_midpoint_strains, strain, StiffnessLaw, StrainField,
};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::rod::{kinetic_energy, Grid, PoseField, RodProperties, TwistField};
use crate::scalar::Real;
use crate::se3::{adjoint, bracket, compose, dexp_inv, exp_se3, inverse, klein, Pose, Twist};

/// Instantaneous state of the rod.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState<T> {
    /// Time, s.
    pub t: T,
    /// Pose of every cross-section, reconstructed from `base_pose` and `ξ`.
    pub g: PoseField<T>,
    /// Body velocity `θ_L(∂_t g)`, rad/s and m/s.
    pub w: TwistField<T>,
    /// Strain `θ_L(∂_z g)`; exactly zero at both end nodes.
    pub xi: StrainField<T>,
    /// Pose of the `z = 0` section, advanced with `W₀`; anchors [`reconstruct_poses`].
    pub base_pose: Pose<T>,
}

impl<T: Real> SimState<T> {
    /// Rod at rest in its reference configuration.
    pub fn rest(grid: &Grid<T>) -> Self {
        let n = grid.n_nodes();
        Self {
            t: T::zero(),
            g: PoseField::identity(n),
            w: TwistField::zeros(n),
            xi: TwistField::zeros(n),
            base_pose: Pose::identity(),
        }
    }

    /// State from a strain profile; poses are integrated from `base`.
    pub fn from_strain(grid: &Grid<T>, base: Pose<T>, xi: StrainField<T>, w: TwistField<T>) -> Result<Self> {
        xi.check_len(grid)?;
        w.check_len(grid)?;
        let mut s = Self { t: T::zero(), g: PoseField::identity(grid.n_nodes()), w, xi, base_pose: base };
        s.g = reconstruct_poses(&s, grid);
        check_invariants(&s, grid)?;
        Ok(s)
    }

    /// State from a sampled configuration. The end strains are set to zero to
    /// satisfy the free-end condition and the poses are re-integrated from
    /// `g0[0]`, so `g` and `ξ` stay compatible.
    pub fn from_configuration(grid: &Grid<T>, g0: &PoseField<T>, w: TwistField<T>) -> Result<Self> {
        let mut xi = strain(g0, grid)?;
        let n = xi.len();
        xi[0] = Twist::zero();
        xi[n - 1] = Twist::zero();
        Self::from_strain(grid, g0[0], xi, w)
    }

    /// Applies a constant pose `h` on the left of every section.
    pub fn left_translated(&self, h: &Pose<T>) -> Self {
        let mut s = self.clone();
        s.g = PoseField::from_fn(self.g.len(), |i| compose(h, &self.g[i]));
        s.base_pose = compose(h, &self.base_pose);
        s
    }
}

/// `g_i = base·exp(z_i Ξ)`: the configuration of constant strain `Ξ`.
pub fn screw_field<T: Real>(grid: &Grid<T>, base: &Pose<T>, xi: &Twist<T>) -> PoseField<T> {
    PoseField::from_fn(grid.n_nodes(), |i| compose(base, &exp_se3(&(*xi * grid.z(i)))))
}

/// How the divergence of the internal wrench enters `∂_t W`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StressDivergence {
    /// `A⁻¹(∂_z Σ + [ξ, Σ])` with `Σ = A Λ`. Conserves the total energy and the
    /// spatial momentum for any `z`-dependence of `A`.
    #[default]
    Conservative,
    /// `∂_z Λ + A⁻¹[ξ, A Λ]`. Equal to the conservative form when `A` is uniform.
    Literal,
}

/// Time integrator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Classical Runge–Kutta on `(W, ξ)` with Munthe-Kaas stages for the poses.
    #[default]
    Rk4,
    /// Implicit midpoint, solved by fixed-point iteration. Preserves the
    /// quadratic energy to the iteration tolerance.
    Midpoint,
}

/// Time step: fixed or derived from the CFL condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep<T> {
    Fixed(T),
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub dt: TimeStep<T>,
    pub cfl_number: T,
    pub t_end: T,
    pub output_stride: usize,
    pub scheme: Scheme,
    pub stress_divergence: StressDivergence,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            dt: TimeStep::Auto,
            cfl_number: T::half(),
            t_end: T::one(),
            output_stride: 1,
            scheme: Scheme::Rk4,
            stress_divergence: StressDivergence::Conservative,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.cfl_number > T::zero() && self.cfl_number <= T::one()) {
            return bad("cfl_number must lie in (0, 1]");
        }
        if !(self.t_end.is_finite() && self.t_end >= T::zero()) {
            return bad("t_end must be finite and non-negative");
        }
        if self.output_stride == 0 {
            return bad("output_stride must be at least 1");
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > T::zero()) {
                return bad("dt must be positive");
            }
        }
        Ok(())
    }

    /// Step size and step count. The step is shrunk so that a whole number of
    /// steps lands on `t_end`.
    pub fn resolve(&self, props: &RodProperties<T>, law: &StiffnessLaw<T>) -> Result<(T, usize)> {
        self.validate()?;
        let dt = match self.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Auto => cfl_dt(props, law, self.cfl_number)?,
        };
        if self.t_end == T::zero() {
            return Ok((dt, 0));
        }
        let ratio = (self.t_end / dt).to_f64_lossy();
        let n = (ratio - 1e-9).ceil().max(1.0) as usize;
        Ok((self.t_end / T::lit(n as f64), n))
    }
}

/// `cfl·Δz / c_max` with `c_max² = max_i ρ(A_i⁻¹ K_i)`.
pub fn cfl_dt<T: Real>(props: &RodProperties<T>, law: &StiffnessLaw<T>, cfl_number: T) -> Result<T> {
    if !(cfl_number > T::zero() && cfl_number <= T::one()) {
        return Err(Error::InvalidConfig("cfl_number must lie in (0, 1]".into()));
    }
    let mut c2 = T::zero();
    for i in 0..props.n_nodes() {
        c2 = c2.max(law.max_wave_speed_squared(props, i)?);
    }
    Ok(cfl_number * props.grid().dz() / c2.sqrt())
}

/// Rod model: properties, stiffness, control and the choice of divergence form.
#[derive(Clone, Copy, Debug)]
pub struct RodSystem<'a, T: Real> {
    pub props: &'a RodProperties<T>,
    pub law: &'a StiffnessLaw<T>,
    pub control: &'a dyn ControlLaw<T>,
    pub divergence: StressDivergence,
}

impl<'a, T: Real> RodSystem<'a, T> {
    pub fn new(props: &'a RodProperties<T>, law: &'a StiffnessLaw<T>, control: &'a dyn ControlLaw<T>) -> Result<Self> {
        if law.n_nodes() != props.n_nodes() {
            return Err(Error::LengthMismatch { expected: props.n_nodes(), got: law.n_nodes() });
        }
        Ok(Self { props, law, control, divergence: StressDivergence::Conservative })
    }

    pub fn with_divergence(mut self, divergence: StressDivergence) -> Self {
        self.divergence = divergence;
        self
    }

    pub fn grid(&self) -> &Grid<T> {
        self.props.grid()
    }

    /// Control values, zero at the end nodes where the total wrench is held at zero.
    fn control_field(&self, t: T, xi: &TwistField<T>, xi_dot: &TwistField<T>) -> Result<Option<TwistField<T>>> {
        if self.control.is_zero() {
            return Ok(None);
        }
        let mut u = self.control.field(t, xi, xi_dot);
        u.check_len(self.grid())?;
        let n = u.len();
        for i in 1..n - 1 {
            if !u[i].is_finite() {
                return Err(Error::NonFiniteControl {
                    law: self.control.name().to_string(),
                    node: i,
                    t: t.to_f64_lossy(),
                });
            }
        }
        u[0] = Twist::zero();
        u[n - 1] = Twist::zero();
        Ok(Some(u))
    }

    /// `(∂_t W, ∂_t ξ)` at time `t`.
    pub fn derivatives(&self, t: T, w: &TwistField<T>, xi: &StrainField<T>) -> Result<(TwistField<T>, TwistField<T>)> {
        let xi_dot = rhs_xi(self.grid(), w, xi);
        let u = self.control_field(t, xi, &xi_dot)?;
        let w_dot = self.rhs_w_with(w, xi, u.as_ref());
        Ok((w_dot, xi_dot))
    }

    fn rhs_w_with(&self, w: &TwistField<T>, xi: &StrainField<T>, u: Option<&TwistField<T>>) -> TwistField<T> {
        let props = self.props;
        let n = w.len();
        match self.divergence {
            StressDivergence::Conservative => {
                // Σ = K ξ + A u, the total internal wrench in momentum form.
                let sigma = TwistField::from_fn(n, |i| {
                    let s = self.law.stress(i, &xi[i]);
                    match u {
                        Some(u) if !u[i].is_zero() => s + props.inertia_a(i, &u[i]),
                        _ => s,
                    }
                });
                let d_sigma = diff_z(self.grid(), sigma.as_slice());
                TwistField::from_fn(n, |i| {
                    let m = props.inertia_a(i, &w[i]);
                    props.inertia_a_inv(i, &(bracket(&m, &w[i]) + d_sigma[i] + bracket(&xi[i], &sigma[i])))
                })
            }
            StressDivergence::Literal => {
                let lambda = TwistField::from_fn(n, |i| {
                    let h = self.law.apply_h(props, i, &xi[i]);
                    match u {
                        Some(u) if !u[i].is_zero() => h + u[i],
                        _ => h,
                    }
                });
                let d_lambda = diff_z(self.grid(), lambda.as_slice());
                TwistField::from_fn(n, |i| {
                    let m = props.inertia_a(i, &w[i]);
                    let al = props.inertia_a(i, &lambda[i]);
                    props.inertia_a_inv(i, &bracket(&m, &w[i]))
                        + d_lambda[i]
                        + props.inertia_a_inv(i, &bracket(&xi[i], &al))
                })
            }
        }
    }

    /// Rate at which the control does work on the rod, `−∫ 𝔨(A u, ∂_t ξ) dz`.
    /// Equals `dE_T/dt` for the semi-discrete system.
    pub fn control_power(&self, state: &SimState<T>) -> Result<T> {
        let xi_dot = rhs_xi(self.grid(), &state.w, &state.xi);
        match self.control_field(state.t, &state.xi, &xi_dot)? {
            None => Ok(T::zero()),
            Some(u) => Ok(-self
                .grid()
                .integrate(|i| klein(&self.props.inertia_a(i, &u[i]), &xi_dot[i]))),
        }
    }

    /// Advances `state` by `dt` with the chosen scheme.
    pub fn step(&self, state: &SimState<T>, dt: T, scheme: Scheme) -> Result<SimState<T>> {
        let next = match scheme {
            Scheme::Rk4 => self.step_rk4(state, dt)?,
            Scheme::Midpoint => self.step_midpoint(state, dt)?,
        };
        ensure_finite(&next)?;
        Ok(next)
    }

    fn step_rk4(&self, s: &SimState<T>, dt: T) -> Result<SimState<T>> {
        Ok(self.rk4_stages(s, dt)?.0)
    }

    /// One RK4 step that also advances every node pose independently with its
    /// own stage velocities. The tracked field is an independent check on the
    /// strain evolution; the returned state's poses are reconstructed from `ξ`.
    pub fn step_with_tracked_poses(&self, s: &SimState<T>, dt: T) -> Result<(SimState<T>, PoseField<T>)> {
        let (next, stages) = self.rk4_stages(s, dt)?;
        ensure_finite(&next)?;
        let tracked = PoseField::from_fn(s.w.len(), |i| {
            rkmk4(&s.g[i], dt, [&s.w[i], &stages[0][i], &stages[1][i], &stages[2][i]])
        });
        Ok((next, tracked))
    }

    fn rk4_stages(&self, s: &SimState<T>, dt: T) -> Result<(SimState<T>, [TwistField<T>; 3])> {
        let half = dt * T::half();
        let t = s.t;
        let (kw1, kx1) = self.derivatives(t, &s.w, &s.xi)?;
        let w2 = s.w.axpy(half, &kw1);
        let x2 = s.xi.axpy(half, &kx1);
        let (kw2, kx2) = self.derivatives(t + half, &w2, &x2)?;
        let w3 = s.w.axpy(half, &kw2);
        let x3 = s.xi.axpy(half, &kx2);
        let (kw3, kx3) = self.derivatives(t + half, &w3, &x3)?;
        let w4 = s.w.axpy(dt, &kw3);
        let x4 = s.xi.axpy(dt, &kx3);
        let (kw4, kx4) = self.derivatives(t + dt, &w4, &x4)?;

        let sixth = dt / T::lit(6.0);
        let two = T::two();
        let n = s.w.len();
        let w = TwistField::from_fn(n, |i| s.w[i] + (kw1[i] + kw2[i] * two + kw3[i] * two + kw4[i]) * sixth);
        let mut xi = TwistField::from_fn(n, |i| s.xi[i] + (kx1[i] + kx2[i] * two + kx3[i] * two + kx4[i]) * sixth);
        xi[0] = Twist::zero();
        xi[n - 1] = Twist::zero();

        let base_pose = rkmk4(&s.base_pose, dt, [&s.w[0], &w2[0], &w3[0], &w4[0]]);
        let mut next = SimState { t: t + dt, g: PoseField::identity(n), w, xi, base_pose };
        next.g = reconstruct_poses(&next, self.grid());
        Ok((next, [w2, w3, w4]))
    }

    fn step_midpoint(&self, s: &SimState<T>, dt: T) -> Result<SimState<T>> {
        const MAX_ITER: usize = 200;
        let half = dt * T::half();
        let tm = s.t + half;
        let n = s.w.len();
        let (mut w_mid, mut x_mid) = (s.w.clone(), s.xi.clone());
        let scale = s.w.max_abs().max(s.xi.max_abs()).max(T::one());
        let tol = T::epsilon() * T::lit(8.0) * scale;
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let (kw, kx) = self.derivatives(tm, &w_mid, &x_mid)?;
            let w_new = s.w.axpy(half, &kw);
            let x_new = s.xi.axpy(half, &kx);
            let change = (0..n).fold(T::zero(), |a, i| {
                a.max((w_new[i] - w_mid[i]).max_abs()).max((x_new[i] - x_mid[i]).max_abs())
            });
            w_mid = w_new;
            x_mid = x_new;
            if !change.is_finite() {
                break;
            }
            if change <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonFiniteState {
                t: tm.to_f64_lossy(),
                what: "implicit midpoint iteration did not converge; reduce dt".into(),
            });
        }
        let two = T::two();
        let w = TwistField::from_fn(n, |i| w_mid[i] * two - s.w[i]);
        let mut xi = TwistField::from_fn(n, |i| x_mid[i] * two - s.xi[i]);
        xi[0] = Twist::zero();
        xi[n - 1] = Twist::zero();
        let base_pose = compose(&s.base_pose, &exp_se3(&(w_mid[0] * dt)));
        let mut next = SimState { t: s.t + dt, g: PoseField::identity(n), w, xi, base_pose };
        next.g = reconstruct_poses(&next, self.grid());
        Ok(next)
    }

    /// Runs `n_steps` steps of size `dt`, calling `observe` on the initial state
    /// and after every `stride`-th step (and the last one).
    pub fn integrate(
        &self,
        state: SimState<T>,
        dt: T,
        n_steps: usize,
        scheme: Scheme,
        stride: usize,
        mut observe: impl FnMut(usize, &SimState<T>) -> Result<()>,
    ) -> Result<SimState<T>> {
        let stride = stride.max(1);
        let mut s = state;
        observe(0, &s)?;
        for k in 1..=n_steps {
            s = self.step(&s, dt, scheme)?;
            if k % stride == 0 || k == n_steps {
                observe(k, &s)?;
            }
        }
        Ok(s)
    }
}

/// Fourth-order Munthe-Kaas update `g exp(Θ)` with `Θ' = dexp⁻¹_{−Θ}(W)`,
/// given the velocity at the four RK stages.
fn rkmk4<T: Real>(g: &Pose<T>, dt: T, w: [&Twist<T>; 4]) -> Pose<T> {
    let half = dt * T::half();
    let two = T::two();
    let k1 = *w[0];
    let k2 = dexp_inv(&(-(k1 * half)), w[1]);
    let k3 = dexp_inv(&(-(k2 * half)), w[2]);
    let k4 = dexp_inv(&(-(k3 * dt)), w[3]);
    let theta = (k1 + k2 * two + k3 * two + k4) * (dt / T::lit(6.0));
    compose(g, &exp_se3(&theta))
}

fn ensure_finite<T: Real>(s: &SimState<T>) -> Result<()> {
    let what = if !s.w.is_finite() {
        Some("velocity")
    } else if !s.xi.is_finite() {
        Some("strain")
    } else if !s.g.is_finite() {
        Some("pose")
    } else {
        None
    };
    match what {
        None => Ok(()),
        Some(w) => Err(Error::NonFiniteState {
            t: s.t.to_f64_lossy(),
            what: format!("{w} field is not finite (CFL violation or stiffness blow-up)"),
        }),
    }
}

/// `∂_t ξ = ∂_z W + [ξ, W]` at interior nodes; zero at the ends.
pub fn rhs_xi<T: Real>(grid: &Grid<T>, w: &TwistField<T>, xi: &StrainField<T>) -> TwistField<T> {
    let n = w.len();
    let inv = T::half() / grid.dz();
    TwistField::from_fn(n, |i| {
        if i == 0 || i == n - 1 {
            Twist::zero()
        } else {
            (w[i + 1] - w[i - 1]) * inv + bracket(&xi[i], &w[i])
        }
    })
}

/// `∂_t W` for the state, with the conservative divergence form.
pub fn rhs_w<T: Real>(
    state: &SimState<T>,
    props: &RodProperties<T>,
    law: &StiffnessLaw<T>,
    control: &dyn ControlLaw<T>,
) -> Result<TwistField<T>> {
    Ok(RodSystem::new(props, law, control)?.derivatives(state.t, &state.w, &state.xi)?.0)
}

/// One step of the default scheme.
pub fn step<T: Real>(
    state: &SimState<T>,
    dt: T,
    props: &RodProperties<T>,
    law: &StiffnessLaw<T>,
    control: &dyn ControlLaw<T>,
) -> Result<SimState<T>> {
    RodSystem::new(props, law, control)?.step(state, dt, Scheme::Rk4)
}

/// `E_T = ½≪W, W≫ + ½≪ℋ ξ, ξ≫`.
pub fn total_energy<T: Real>(state: &SimState<T>, props: &RodProperties<T>, law: &StiffnessLaw<T>) -> T {
    kinetic_energy(props, &state.w) + elastic_energy(props, law, &state.xi)
}

/// `∫ Ad_{g(z)}(A W) dz`.
pub fn spatial_momentum<T: Real>(state: &SimState<T>, props: &RodProperties<T>) -> Twist<T> {
    props
        .grid()
        .integrate_twist(|i| adjoint(&state.g[i], &props.inertia_a(i, &state.w[i])))
}

/// `g_0 = base_pose`, `g_{i+1} = g_i exp(Δz (ξ_i + ξ_{i+1})/2)`.
pub fn reconstruct_poses<T: Real>(state: &SimState<T>, grid: &Grid<T>) -> PoseField<T> {
    let mid: Vec<Twist<T>> = state
        .xi
        .as_slice()
        .windows(2)
        .map(|p| (p[0] + p[1]) * T::half())
        .collect();
    integrate_midpoint_strains(&state.base_pose, &mid, grid)
}

/// Which way a pose field acts on the reference centreline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ActionConvention {
    /// `p = g⁻¹(p0)`.
    #[default]
    PaperInverse,
    /// `p = g(p0)`.
    Direct,
}

impl ActionConvention {
    pub fn name(self) -> &'static str {
        match self {
            ActionConvention::PaperInverse => "paper-inverse",
            ActionConvention::Direct => "direct",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "paper-inverse" => Some(ActionConvention::PaperInverse),
            "direct" => Some(ActionConvention::Direct),
            _ => None,
        }
    }
}

/// Physical centreline points of a configuration.
pub fn apply_configuration<T: Real>(
    g: &PoseField<T>,
    props: &RodProperties<T>,
    convention: ActionConvention,
) -> Result<Vec<Vec3<T>>> {
    g.check_len(props.grid())?;
    Ok((0..g.len())
        .map(|i| match convention {
            ActionConvention::PaperInverse => inverse(&g[i]).act(props.p0(i)),
            ActionConvention::Direct => g[i].act(props.p0(i)),
        })
        .collect())
}

/// Checks field lengths, finiteness and the free-end strain condition.
pub fn check_invariants<T: Real>(state: &SimState<T>, grid: &Grid<T>) -> Result<()> {
    state.g.check_len(grid)?;
    state.w.check_len(grid)?;
    state.xi.check_len(grid)?;
    ensure_finite(state)?;
    let n = state.xi.len();
    for node in [0, n - 1] {
        if !state.xi[node].is_zero() {
            return Err(Error::BoundaryStrain { node, magnitude: state.xi[node].norm().to_f64_lossy() });
        }
    }
    Ok(())
}

/// Largest difference between `g` and the poses rebuilt from `ξ`; zero for
/// every state the solver produces.
pub fn reconstruction_residual<T: Real>(state: &SimState<T>, grid: &Grid<T>) -> T {
    state.g.distance(&reconstruct_poses(state, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuation::{ConstantControl, ZeroControl};
    use crate::elasticity::SectionStiffness;
    use crate::linalg::Mat3;
    use crate::rod::ReferenceCurve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rod(n: usize, curve: ReferenceCurve<f64>) -> (RodProperties<f64>, StiffnessLaw<f64>) {
        let grid = Grid::new(n, 1.0).unwrap();
        let props =
            RodProperties::uniform(grid, 2.0, Mat3::from_diagonal(Vec3::new(0.02, 0.03, 0.05)), &curve).unwrap();
        let law = StiffnessLaw::from_section(&props, SectionStiffness::new(1.0, 1.5, 0.8, 40.0, 50.0, 80.0)).unwrap();
        (props, law)
    }

    fn rand_twist(rng: &mut ChaCha8Rng, s: f64) -> Twist<f64> {
        Twist::from_array(std::array::from_fn(|_| rng.gen_range(-s..s)))
    }

    fn smooth_state(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> SimState<f64> {
        let a = rand_twist(rng, 0.5);
        let b = rand_twist(rng, 0.5);
        let l = grid.length();
        let n = grid.n_nodes();
        let xi = TwistField::from_fn(n, |i| {
            if i == 0 || i == n - 1 {
                return Twist::zero();
            }
            let s = (std::f64::consts::PI * grid.z(i) / l).sin();
            a * (s * s)
        });
        let w = TwistField::from_fn(grid.n_nodes(), |i| b * (grid.z(i) / l - 0.3));
        SimState::from_strain(grid, Pose::identity(), xi, w).unwrap()
    }

    #[test]
    fn rest_is_stationary() {
        let (p, law) = rod(9, ReferenceCurve::Straight);
        let sys = RodSystem::new(&p, &law, &ZeroControl).unwrap();
        let s0 = SimState::rest(p.grid());
        let s1 = sys.step(&s0, 1e-3, Scheme::Rk4).unwrap();
        assert_eq!(s1.w, s0.w);
        assert_eq!(s1.xi, s0.xi);
        assert_eq!(s1.g, s0.g);
        assert_eq!(total_energy(&s1, &p, &law), 0.0);
        assert_eq!(spatial_momentum(&s1, &p), Twist::zero());
    }

    #[test]
    fn uniform_translation_is_stationary() {
        let (p, law) = rod(9, ReferenceCurve::Straight);
        let w = TwistField::uniform(9, Twist::from_linear(Vec3::new(0.3, -0.1, 0.7)));
        let s = SimState::from_strain(p.grid(), Pose::identity(), TwistField::zeros(9), w).unwrap();
        let dw = rhs_w(&s, &p, &law, &ZeroControl).unwrap();
        assert!(dw.max_abs() < 1e-15);
    }

    #[test]
    fn ramp_velocity_gives_constant_strain_rate() {
        let grid = Grid::new(11, 2.0).unwrap();
        let c = Twist::new(Vec3::new(0.1, -0.2, 0.3), Vec3::new(1.0, 0.5, -0.4));
        let w = TwistField::from_fn(11, |i| c * grid.z(i));
        let d = rhs_xi(&grid, &w, &TwistField::zeros(11));
        for i in 1..10 {
            assert!((d[i] - c).max_abs() < 1e-13);
        }
        assert_eq!(d[0], Twist::zero());
        assert_eq!(d[10], Twist::zero());
        let uniform = rhs_xi(&grid, &TwistField::uniform(11, c), &TwistField::zeros(11));
        assert!(uniform.max_abs() < 1e-15);
    }

    #[test]
    fn semi_discrete_energy_rate_vanishes() {
        for curve in [ReferenceCurve::Straight, ReferenceCurve::Collocated] {
            let (p, law) = rod(17, curve);
            let sys = RodSystem::new(&p, &law, &ZeroControl).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(40);
            for _ in 0..10 {
                let mut xi = TwistField::from_fn(17, |_| rand_twist(&mut rng, 1.0));
                xi[0] = Twist::zero();
                xi[16] = Twist::zero();
                let w = TwistField::from_fn(17, |_| rand_twist(&mut rng, 1.0));
                let (dw, dx) = sys.derivatives(0.0, &w, &xi).unwrap();
                let rate = p.grid().integrate(|i| {
                    klein(&p.inertia_a(i, &w[i]), &dw[i]) + klein(&law.stress(i, &xi[i]), &dx[i])
                });
                let scale = total_energy(&SimState { t: 0.0, g: PoseField::identity(17), w: w.clone(), xi: xi.clone(), base_pose: Pose::identity() }, &p, &law);
                assert!(rate.abs() < 1e-12 * scale, "rate {rate}");
            }
        }
    }

    #[test]
    fn divergence_forms_agree_for_uniform_inertia() {
        let (p, law) = rod(13, ReferenceCurve::Collocated);
        let c = ConstantControl(Twist::new(Vec3::new(0.2, 0.0, 0.1), Vec3::new(0.0, 0.3, 0.0)));
        let a = RodSystem::new(&p, &law, &c).unwrap();
        let b = a.with_divergence(StressDivergence::Literal);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut xi = TwistField::from_fn(13, |_| rand_twist(&mut rng, 1.0));
        xi[0] = Twist::zero();
        xi[12] = Twist::zero();
        let w = TwistField::from_fn(13, |_| rand_twist(&mut rng, 1.0));
        let (da, _) = a.derivatives(0.0, &w, &xi).unwrap();
        let (db, _) = b.derivatives(0.0, &w, &xi).unwrap();
        for i in 0..13 {
            assert!((da[i] - db[i]).max_abs() < 1e-10);
        }
    }

    #[test]
    fn constant_control_changes_only_the_bracket_term_inside() {
        let (p, law) = rod(13, ReferenceCurve::Collocated);
        let u0 = Twist::new(Vec3::new(0.2, 0.0, 0.1), Vec3::new(0.0, 0.3, 0.0));
        let c = ConstantControl(u0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut xi = TwistField::from_fn(13, |_| rand_twist(&mut rng, 1.0));
        xi[0] = Twist::zero();
        xi[12] = Twist::zero();
        let w = TwistField::from_fn(13, |_| rand_twist(&mut rng, 1.0));
        let (passive, _) = RodSystem::new(&p, &law, &ZeroControl).unwrap().derivatives(0.0, &w, &xi).unwrap();
        let (active, _) = RodSystem::new(&p, &law, &c).unwrap().derivatives(0.0, &w, &xi).unwrap();
        for i in 2..11 {
            let expected = p.inertia_a_inv(i, &bracket(&xi[i], &p.inertia_a(i, &u0)));
            assert!((active[i] - passive[i] - expected).max_abs() < 1e-12);
        }
    }

    #[test]
    fn rigid_spin_stays_rigid() {
        let (p, law) = rod(9, ReferenceCurve::Collocated);
        let sys = RodSystem::new(&p, &law, &ZeroControl).unwrap();
        let w0 = Twist::from_angular(Vec3::new(0.0, 0.0, 2.0));
        let mut s = SimState::from_strain(p.grid(), Pose::identity(), TwistField::zeros(9), TwistField::uniform(9, w0)).unwrap();
        for _ in 0..100 {
            s = sys.step(&s, 1e-2, Scheme::Rk4).unwrap();
        }
        assert!(s.xi.max_abs() < 1e-13);
        for v in &s.w {
            assert!((*v - w0).max_abs() < 1e-13);
        }
        let expected = exp_se3(&(w0 * s.t));
        assert!(s.g[4].distance(&expected) < 1e-12);
    }

    #[test]
    fn step_is_deterministic_and_left_invariant() {
        let (p, law) = rod(17, ReferenceCurve::Straight);
        let sys = RodSystem::new(&p, &law, &ZeroControl).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let s0 = smooth_state(p.grid(), &mut rng);
        let h = exp_se3(&rand_twist(&mut rng, 1.0));
        let mut a = s0.clone();
        let mut b = s0.clone();
        let mut c = s0.left_translated(&h);
        for _ in 0..20 {
            a = sys.step(&a, 1e-3, Scheme::Rk4).unwrap();
            b = sys.step(&b, 1e-3, Scheme::Rk4).unwrap();
            c = sys.step(&c, 1e-3, Scheme::Rk4).unwrap();
        }
        assert_eq!(a, b);
        assert_eq!(a.w, c.w);
        assert_eq!(a.xi, c.xi);
        for i in 0..17 {
            assert!(compose(&h, &a.g[i]).distance(&c.g[i]) < 1e-12);
        }
    }

    #[test]
    fn midpoint_conserves_energy() {
        let (p, law) = rod(17, ReferenceCurve::Straight);
        let sys = RodSystem::new(&p, &law, &ZeroControl).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let mut s = smooth_state(p.grid(), &mut rng);
        let dt = cfl_dt(&p, &law, 0.5).unwrap();
        let e0 = total_energy(&s, &p, &law);
        for _ in 0..200 {
            s = sys.step(&s, dt, Scheme::Midpoint).unwrap();
        }
        let e1 = total_energy(&s, &p, &law);
        assert!(((e1 - e0) / e0).abs() < 1e-12, "{e0} {e1}");
    }

    #[test]
    fn cfl_scales_with_stiffness() {
        let (p, law) = rod(9, ReferenceCurve::Straight);
        let dt1 = cfl_dt(&p, &law, 0.5).unwrap();
        let dt4 = cfl_dt(&p, &law.scaled(4.0), 0.5).unwrap();
        assert!((dt1 / dt4 - 2.0).abs() < 1e-10);
        assert!(cfl_dt(&p, &law, 0.0).is_err());
        assert!(cfl_dt(&p, &law, 1.5).is_err());
        // Collocated uniform rod: c² = max(C/I, S/m) = max(50, 40, 16, 20, 25, 40).
        let (pc, lc) = rod(9, ReferenceCurve::Collocated);
        let dt = cfl_dt(&pc, &lc, 0.5).unwrap();
        assert!((dt - 0.5 * 0.125 / 50f64.sqrt()).abs() < 1e-12);
        // Transport to p0 does not change the wave speeds.
        assert!((dt - dt1).abs() < 1e-10);
    }

    #[test]
    fn reconstruct_examples() {
        let grid = Grid::new(9, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let base = exp_se3(&rand_twist(&mut rng, 1.0));
        let s = SimState::from_strain(&grid, base, TwistField::zeros(9), TwistField::zeros(9)).unwrap();
        for g in &reconstruct_poses(&s, &grid) {
            assert_eq!(*g, base);
        }
        // Constant midpoint strain: ends pinned, so use the midpoints directly.
        let c = rand_twist(&mut rng, 1.0);
        let screw = screw_field(&grid, &base, &c);
        let direct = integrate_midpoint_strains(&base, &vec![c; 8], &grid);
        assert!(screw.distance(&direct) < 1e-12);
    }

    #[test]
    fn from_configuration_pins_ends() {
        let grid = Grid::new(9, 1.0).unwrap();
        let c = Twist::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros());
        let s = SimState::from_configuration(&grid, &screw_field(&grid, &Pose::identity(), &c), TwistField::zeros(9)).unwrap();
        assert_eq!(s.xi[0], Twist::zero());
        assert_eq!(s.xi[8], Twist::zero());
        assert!((s.xi[4] - c).max_abs() < 1e-12);
        assert!(reconstruction_residual(&s, &grid) < 1e-15);
    }

    #[test]
    fn invariant_checker_detects_boundary_strain() {
        let grid = Grid::new(9, 1.0).unwrap();
        let mut s = SimState::rest(&grid);
        assert!(check_invariants(&s, &grid).is_ok());
        s.xi[8] = Twist::from_angular(Vec3::new(0.0, 1e-9, 0.0));
        assert!(matches!(check_invariants(&s, &grid), Err(Error::BoundaryStrain { node: 8, .. })));
        let xi = s.xi.clone();
        assert!(SimState::from_strain(&grid, Pose::identity(), xi, TwistField::zeros(9)).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let (p, law) = rod(9, ReferenceCurve::Straight);
        let sys = RodSystem::new(&p, &law, &ZeroControl).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let mut s = smooth_state(p.grid(), &mut rng);
        let dt = 50.0 * cfl_dt(&p, &law, 1.0).unwrap();
        let mut failed = false;
        for _ in 0..2000 {
            match sys.step(&s, dt, Scheme::Rk4) {
                Ok(n) => s = n,
                Err(e) => {
                    assert!(matches!(e, Error::NonFiniteState { .. }));
                    failed = true;
                    break;
                }
            }
        }
        assert!(failed);
    }

    #[test]
    fn apply_configuration_examples() {
        let (p, _) = rod(5, ReferenceCurve::Straight);
        let id = PoseField::identity(5);
        let pts = apply_configuration(&id, &p, ActionConvention::PaperInverse).unwrap();
        for i in 0..5 {
            assert_eq!(pts[i], p.p0(i));
        }
        let u = Vec3::new(0.5, -1.0, 2.0);
        let shifted = PoseField::uniform(5, Pose::from_translation(u));
        let inv = apply_configuration(&shifted, &p, ActionConvention::PaperInverse).unwrap();
        let dir = apply_configuration(&shifted, &p, ActionConvention::Direct).unwrap();
        for i in 0..5 {
            assert!((inv[i] - (p.p0(i) - u)).max_abs() < 1e-15);
            assert!((dir[i] - (p.p0(i) + u)).max_abs() < 1e-15);
        }
    }

    #[test]
    fn solver_config_resolution() {
        let (p, law) = rod(9, ReferenceCurve::Straight);
        let cfg = SolverConfig { dt: TimeStep::Fixed(0.3), t_end: 1.0, ..SolverConfig::default() };
        let (dt, n) = cfg.resolve(&p, &law).unwrap();
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
        let bad = SolverConfig::<f64> { cfl_number: 0.0, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
        let (dt_auto, _) = SolverConfig::default().resolve(&p, &law).unwrap();
        assert!(dt_auto <= cfl_dt(&p, &law, 0.5).unwrap());
    }
}
