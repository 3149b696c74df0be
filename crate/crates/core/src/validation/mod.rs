//! Independent oracles for the solver.
//!
//! Nothing here calls the right-hand side of the equations of motion. The
//! oracles are built from the group primitives, the inertia and stiffness
//! definitions, and brute force: a pose-based discrete action, a stand-alone
//! rigid-body integrator and a Koszul-formula check of the connection.

pub mod studies;
pub mod suites;

use rand::Rng;

use crate::dynamics::{RodSystem, Scheme, SimState};
use crate::elasticity::StiffnessLaw;
use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::rod::{kinetic_energy, PoseField, RodProperties, TwistField};
use crate::scalar::Real;
use crate::se3::{adjoint, compose, exp_se3, hat, inverse, klein, log_se3, Pose, Twist};

/// Uniformly sampled solver output.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub dt: T,
    pub states: Vec<SimState<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Runs the solver and keeps every state.
    pub fn record(sys: &RodSystem<'_, T>, state: SimState<T>, dt: T, n_steps: usize, scheme: Scheme) -> Result<Self> {
        let mut states = Vec::with_capacity(n_steps + 1);
        sys.integrate(state, dt, n_steps, scheme, 1, |_, s| {
            states.push(s.clone());
            Ok(())
        })?;
        Ok(Self { dt, states })
    }

    pub fn n_steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn t_end(&self) -> T {
        self.dt * T::lit(self.n_steps() as f64)
    }

    pub fn poses(&self) -> Vec<PoseField<T>> {
        self.states.iter().map(|s| s.g.clone()).collect()
    }
}

/// Trapezoidal time quadrature of `½≪W,W≫ − U(ξ)` over the stored states.
pub fn discrete_action<T: Real>(traj: &Trajectory<T>, props: &RodProperties<T>, law: &StiffnessLaw<T>) -> T {
    let n = traj.states.len();
    if n < 2 {
        return T::zero();
    }
    let mut s = T::zero();
    for (k, st) in traj.states.iter().enumerate() {
        let l = kinetic_energy(props, &st.w) - crate::elasticity::elastic_energy(props, law, &st.xi);
        let w = if k == 0 || k == n - 1 { T::half() } else { T::one() };
        s = s + l * w;
    }
    s * traj.dt
}

/// Potential of a sampled configuration with the end nodes excluded: node
/// strains are averages of the neighbouring `log(g_i⁻¹ g_{i+1}) / Δz`.
pub fn interior_potential<T: Real>(g: &PoseField<T>, props: &RodProperties<T>, law: &StiffnessLaw<T>) -> Result<T> {
    let grid = props.grid();
    g.check_len(grid)?;
    let n = grid.n_nodes();
    let inv = T::one() / grid.dz();
    let mut mid = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let x = log_se3(&compose(&inverse(&g[i]), &g[i + 1])).map_err(|_| Error::MeshTooCoarse { node: i })?;
        mid.push(x * inv);
    }
    let mut u = T::zero();
    for i in 1..n - 1 {
        let xi = (mid[i - 1] + mid[i]) * T::half();
        u = u + klein(&law.stress(i, &xi), &xi) * grid.weight(i);
    }
    Ok(u * T::half())
}

/// Discrete action of a pose history:
/// `Δt Σ_k ½≪W_{k+½}, W_{k+½}≫ − Δt Σ_k' U(g_k)` with `W_{k+½} = log(g_k⁻¹ g_{k+1})/Δt`
/// and trapezoidal weights on the potential.
pub fn pose_action<T: Real>(poses: &[PoseField<T>], dt: T, props: &RodProperties<T>, law: &StiffnessLaw<T>) -> Result<T> {
    let nt = poses.len();
    if nt < 2 {
        return Err(Error::InvalidArgument("an action needs at least two time samples".into()));
    }
    let grid = props.grid();
    let inv_dt = T::one() / dt;
    let mut kinetic = T::zero();
    for k in 0..nt - 1 {
        let (a, b) = (&poses[k], &poses[k + 1]);
        for i in 0..grid.n_nodes() {
            let w = log_se3(&compose(&inverse(&a[i]), &b[i]))
                .map_err(|_| Error::InvalidArgument(format!("time step too large at sample {k}, node {i}")))?
                * inv_dt;
            kinetic = kinetic + props.inner_z(i, &w, &w) * grid.weight(i);
        }
    }
    let mut potential = T::zero();
    for (k, g) in poses.iter().enumerate() {
        let w = if k == 0 || k == nt - 1 { T::half() } else { T::one() };
        potential = potential + interior_potential(g, props, law)? * w;
    }
    Ok((kinetic * T::half() - potential) * dt)
}

pub const EPSILON_RANGE: (f64, f64) = (1e-8, 1e-3);

/// Central difference of [`pose_action`] along `g ↦ g·exp(±ε Z)`.
///
/// `z[k]` is the perturbation at sample `k`; it must vanish at the first and
/// last samples. Nothing is required at the rod ends.
pub fn action_variation<T: Real>(
    poses: &[PoseField<T>],
    dt: T,
    z: &[TwistField<T>],
    epsilon: T,
    props: &RodProperties<T>,
    law: &StiffnessLaw<T>,
) -> Result<T> {
    let e = epsilon.to_f64_lossy();
    if !(EPSILON_RANGE.0..=EPSILON_RANGE.1).contains(&e) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {e:e} outside [{:e}, {:e}]",
            EPSILON_RANGE.0, EPSILON_RANGE.1
        )));
    }
    if z.len() != poses.len() {
        return Err(Error::LengthMismatch { expected: poses.len(), got: z.len() });
    }
    let scale = z.iter().fold(T::zero(), |a, f| a.max(f.max_abs()));
    let tol = T::lit(1e-12) * (T::one() + scale);
    if z[0].max_abs() > tol || z[z.len() - 1].max_abs() > tol {
        return Err(Error::InvalidArgument("perturbation must vanish at the initial and final times".into()));
    }
    let shifted = |s: T| -> Vec<PoseField<T>> {
        poses
            .iter()
            .zip(z)
            .map(|(g, zk)| PoseField::from_fn(g.len(), |i| compose(&g[i], &exp_se3(&(zk[i] * s)))))
            .collect()
    };
    let plus = pose_action(&shifted(epsilon), dt, props, law)?;
    let minus = pose_action(&shifted(-epsilon), dt, props, law)?;
    Ok((plus - minus) / (epsilon * T::two()))
}

/// `Z(t, z) = sin²(π t/T)·(c₀ + c₁ s + c₂ s²)` with `s = 2z/L − 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothPerturbation<T> {
    pub coeffs: [Twist<T>; 3],
    pub t_end: T,
    pub length: T,
}

impl<T: Real> SmoothPerturbation<T> {
    pub fn random(rng: &mut impl Rng, t_end: T, length: T) -> Self {
        let mut twist = || Twist::from_array(std::array::from_fn(|_| T::lit(rng.gen_range(-1.0..1.0))));
        Self { coeffs: [twist(), twist(), twist()], t_end, length }
    }

    pub fn eval(&self, t: T, z: T) -> Twist<T> {
        let b = (T::PI() * t / self.t_end).sin();
        let s = T::two() * z / self.length - T::one();
        let [c0, c1, c2] = self.coeffs;
        (c0 + c1 * s + c2 * (s * s)) * (b * b)
    }

    /// Samples on the trajectory's time levels and the rod's grid. The end
    /// samples are set exactly to zero.
    pub fn sample(&self, n_times: usize, dt: T, props: &RodProperties<T>) -> Vec<TwistField<T>> {
        let grid = props.grid();
        (0..n_times)
            .map(|k| {
                if k == 0 || k + 1 == n_times {
                    TwistField::zeros(grid.n_nodes())
                } else {
                    let t = dt * T::lit(k as f64);
                    TwistField::from_fn(grid.n_nodes(), |i| self.eval(t, grid.z(i)))
                }
            })
            .collect()
    }
}

/// Single rigid body: mass, rotational inertia about the centre, and centre of
/// mass in body coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBody<T> {
    pub mass: T,
    pub inertia: Mat3<T>,
    pub center: Vec3<T>,
}

impl<T: Real> RigidBody<T> {
    /// The cross-section at node `i` of a rod.
    pub fn from_rod_node(props: &RodProperties<T>, i: usize) -> Self {
        Self { mass: props.mass(i), inertia: *props.inertia(i), center: props.p0(i) }
    }

    /// Kinetic energy `½ m |v + ω×c|² + ½ ω·Iω`.
    pub fn kinetic_energy(&self, v: &Twist<T>) -> T {
        let vc = v.linear + v.angular.cross(self.center);
        (vc.dot(vc) * self.mass + v.angular.dot(self.inertia.mul_vec(v.angular))) * T::half()
    }

    /// Gram matrix of the kinetic inner product in `(ω, v)` coordinates, by
    /// polarisation of [`RigidBody::kinetic_energy`].
    pub fn gram(&self) -> [[T; 6]; 6] {
        let e = |a: usize| {
            let mut x = [T::zero(); 6];
            x[a] = T::one();
            Twist::from_array(x)
        };
        let mut g = [[T::zero(); 6]; 6];
        for a in 0..6 {
            for b in 0..6 {
                let sum = self.kinetic_energy(&(e(a) + e(b)));
                g[a][b] = sum - self.kinetic_energy(&e(a)) - self.kinetic_energy(&e(b));
            }
        }
        g
    }

    /// `A V = J G V`, the unique twist with `𝔨(A V, W) = ⟨V, W⟩`.
    pub fn momentum(&self, v: &Twist<T>) -> Twist<T> {
        let g = self.gram();
        let x = v.to_array();
        let gv: [T; 6] = std::array::from_fn(|a| (0..6).fold(T::zero(), |s, b| s + g[a][b] * x[b]));
        Twist::from_array([gv[3], gv[4], gv[5], gv[0], gv[1], gv[2]])
    }

    /// Inverse of [`RigidBody::momentum`] by Gaussian elimination.
    pub fn velocity(&self, m: &Twist<T>) -> Twist<T> {
        let mut a = self.gram();
        let mv = m.to_array();
        let mut b = [mv[3], mv[4], mv[5], mv[0], mv[1], mv[2]];
        for col in 0..6 {
            let piv = (col..6)
                .max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
                .unwrap_or(col);
            a.swap(col, piv);
            b.swap(col, piv);
            for r in 0..6 {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..6 {
                        a[r][c] = a[r][c] - f * a[col][c];
                    }
                    b[r] = b[r] - f * b[col];
                }
            }
        }
        Twist::from_array(std::array::from_fn(|i| b[i] / a[i][i]))
    }
}

/// Output of [`euler_arnold_rigid`], one entry per step.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidTrajectory<T> {
    pub times: Vec<T>,
    pub velocity: Vec<Twist<T>>,
    pub poses: Vec<Pose<T>>,
    /// `Ad_g(A W)`.
    pub spatial_momentum: Vec<Twist<T>>,
}

/// Free rigid body on SE(3): `Ṁ = [M, W]`, `M = A W`, `Ṙ = R hat(ω)`, `u̇ = R v`,
/// integrated with classical RK4 on `(M, R, u)` in the ambient coordinates.
pub fn euler_arnold_rigid<T: Real>(
    w0: Twist<T>,
    g0: Pose<T>,
    body: &RigidBody<T>,
    t_end: T,
    dt: T,
) -> Result<RigidTrajectory<T>> {
    if !(dt > T::zero()) || !(t_end >= T::zero()) {
        return Err(Error::InvalidArgument("need dt > 0 and t_end ≥ 0".into()));
    }
    let n = (t_end / dt).round().to_f64_lossy() as usize;
    type State<T> = (Twist<T>, Mat3<T>, Vec3<T>);
    let f = |s: &State<T>| -> State<T> {
        let w = body.velocity(&s.0);
        let m = s.0;
        let dm = Twist::new(m.angular.cross(w.angular), m.angular.cross(w.linear) - w.angular.cross(m.linear));
        (dm, s.1.mul_mat(&hat(w.angular)), s.1.mul_vec(w.linear))
    };
    let axpy = |s: &State<T>, h: T, d: &State<T>| -> State<T> {
        (s.0 + d.0 * h, s.1.add(&d.1.scale(h)), s.2 + d.2 * h)
    };
    let mut s: State<T> = (body.momentum(&w0), *g0.rotation.matrix(), g0.translation);
    let mut out = RigidTrajectory { times: vec![], velocity: vec![], poses: vec![], spatial_momentum: vec![] };
    let mut push = |s: &State<T>, k: usize| {
        let g = Pose::new(crate::se3::Rotation::from_matrix_unchecked(s.1), s.2);
        out.times.push(dt * T::lit(k as f64));
        out.velocity.push(body.velocity(&s.0));
        out.poses.push(g);
        out.spatial_momentum.push(adjoint(&g, &s.0));
    };
    push(&s, 0);
    let half = dt * T::half();
    let sixth = dt / T::lit(6.0);
    for k in 1..=n {
        let k1 = f(&s);
        let k2 = f(&axpy(&s, half, &k1));
        let k3 = f(&axpy(&s, half, &k2));
        let k4 = f(&axpy(&s, dt, &k3));
        let two = T::two();
        s = (
            s.0 + (k1.0 + k2.0 * two + k3.0 * two + k4.0) * sixth,
            s.1.add(&k1.1.add(&k2.1.scale(two)).add(&k3.1.scale(two)).add(&k4.1).scale(sixth)),
            s.2 + (k1.2 + k2.2 * two + k3.2 * two + k4.2) * sixth,
        );
        push(&s, k);
    }
    Ok(out)
}

/// Residuals of the two candidate formulas for the left-invariant
/// Levi-Civita connection of the kinetic metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionReport<T> {
    /// `½([V,W] − A⁻¹[AW,V] − A⁻¹[AV,W])` against the Koszul formula.
    pub halved: T,
    /// `½[V,W] − A⁻¹[AW,V] − A⁻¹[AV,W]` against the Koszul formula.
    pub unhalved: T,
    /// `|∇_V W − ∇_W V − [V,W]|` for the halved and unhalved formulas.
    pub torsion_halved: T,
    pub torsion_unhalved: T,
}

/// Evaluates `⟨∇_V W, U⟩` for both candidates against
/// `½(⟨[V,W],U⟩ − ⟨[W,U],V⟩ + ⟨[U,V],W⟩)`, with the metric taken from the body's
/// kinetic energy. Residuals are relative to `|V||W||U|·‖G‖`.
pub fn connection_identity_check<T: Real>(
    v: &Twist<T>,
    w: &Twist<T>,
    u: &Twist<T>,
    body: &RigidBody<T>,
    bracket: impl Fn(&Twist<T>, &Twist<T>) -> Twist<T>,
) -> ConnectionReport<T> {
    let g = body.gram();
    let inner = |a: &Twist<T>, b: &Twist<T>| {
        let (x, y) = (a.to_array(), b.to_array());
        (0..6).fold(T::zero(), |s, i| (0..6).fold(s, |s, j| s + x[i] * g[i][j] * y[j]))
    };
    let star = |a: &Twist<T>, b: &Twist<T>| body.velocity(&bracket(&body.momentum(a), b));
    let halved = |a: &Twist<T>, b: &Twist<T>| (bracket(a, b) - star(b, a) - star(a, b)) * T::half();
    let unhalved = |a: &Twist<T>, b: &Twist<T>| bracket(a, b) * T::half() - star(b, a) - star(a, b);
    let koszul = (inner(&bracket(v, w), u) - inner(&bracket(w, u), v) + inner(&bracket(u, v), w)) * T::half();
    let gnorm = g.iter().flat_map(|r| r.iter()).fold(T::zero(), |a, x| a.max(x.abs()));
    let scale = (v.norm() * w.norm() * u.norm() * gnorm).max(T::min_positive_value());
    let vw = bracket(v, w);
    ConnectionReport {
        halved: (inner(&halved(v, w), u) - koszul).abs() / scale,
        unhalved: (inner(&unhalved(v, w), u) - koszul).abs() / scale,
        torsion_halved: (halved(v, w) - halved(w, v) - vw).norm(),
        torsion_unhalved: (unhalved(v, w) - unhalved(w, v) - vw).norm(),
    }
}
