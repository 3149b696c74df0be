//! Pointwise SE(3) / se(3) operations.
//!
//! A [`Pose`] is a displacement `x ↦ R x + u`; a [`Twist`] is the algebra element
//! identified with the 4×4 matrix `(hat(ω) v; 0 0)`. The bracket is the matrix
//! commutator and [`klein`] is the Ad-invariant pairing `v·ω_W + w·ω_V`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;

/// Below this rotation angle the exp/log coefficient functions switch to Taylor series.
pub const SMALL_ANGLE: f64 = 1e-5;

/// `log_se3` refuses rotations closer than this to a half turn.
pub const LOG_ANGLE_MARGIN: f64 = 1e-6;

/// Skew matrix with `hat(ω) x = ω × x`.
#[inline]
pub fn hat<T: Real>(w: Vec3<T>) -> Mat3<T> {
    let o = T::zero();
    Mat3::from_rows([[o, -w.z, w.y], [w.z, o, -w.x], [-w.y, w.x, o]])
}

/// Inverse of [`hat`]; rejects matrices whose symmetric part exceeds the tolerance.
pub fn vee<T: Real>(a: &Mat3<T>) -> Result<Vec3<T>> {
    let asym = a.add(&a.transpose()).max_abs();
    if asym > T::lit(T::GEOM_TOL) * (T::one() + a.max_abs()) || !asym.is_finite() {
        return Err(Error::NotSkew(asym.to_f64_lossy()));
    }
    Ok(vee_unchecked(a))
}

/// Extracts the axial vector of the skew part without checking.
#[inline]
pub fn vee_unchecked<T: Real>(a: &Mat3<T>) -> Vec3<T> {
    let h = T::half();
    Vec3::new(
        (a.m[2][1] - a.m[1][2]) * h,
        (a.m[0][2] - a.m[2][0]) * h,
        (a.m[1][0] - a.m[0][1]) * h,
    )
}

/// Element of SO(3) stored as a matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation<T> {
    m: Mat3<T>,
}

impl<T: Real> Rotation<T> {
    pub fn identity() -> Self {
        Self { m: Mat3::identity() }
    }

    /// Validates `RᵀR = I` and `det R = 1` within [`Real::GEOM_TOL`].
    pub fn from_matrix(m: Mat3<T>) -> Result<Self> {
        let tol = T::lit(T::GEOM_TOL);
        let ortho = m.transpose().mul_mat(&m).sub(&Mat3::identity()).max_abs();
        if !(ortho <= tol) {
            return Err(Error::InvalidRotation(format!(
                "|RᵀR - I| = {:e}",
                ortho.to_f64_lossy()
            )));
        }
        let det = m.determinant();
        if !((det - T::one()).abs() <= tol) {
            return Err(Error::InvalidRotation(format!("det R = {}", det.to_f64_lossy())));
        }
        Ok(Self { m })
    }

    /// Wraps a matrix the caller knows to be a rotation.
    pub fn from_matrix_unchecked(m: Mat3<T>) -> Self {
        Self { m }
    }

    /// Rotation by `angle` about `axis` (normalised internally).
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let n = axis.norm();
        if n == T::zero() {
            return Self::identity();
        }
        exp_so3(axis * (angle / n))
    }

    pub fn about_z(angle: T) -> Self {
        Self::from_axis_angle(Vec3::unit_z(), angle)
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3<T> {
        &self.m
    }

    #[inline]
    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    #[inline]
    pub fn rotate(&self, v: Vec3<T>) -> Vec3<T> {
        self.m.mul_vec(v)
    }

    #[inline]
    pub fn compose(&self, o: &Self) -> Self {
        Self { m: self.m.mul_mat(&o.m) }
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> T {
        let s = (vee_unchecked(&self.m) * T::two()).norm() * T::half();
        let c = (self.m.trace() - T::one()) * T::half();
        s.atan2(c)
    }

    /// Largest deviation from orthonormality and unit determinant.
    pub fn defect(&self) -> T {
        let ortho = self.m.transpose().mul_mat(&self.m).sub(&Mat3::identity()).max_abs();
        ortho.max((self.m.determinant() - T::one()).abs())
    }

    /// Unit quaternion `[w, x, y, z]` with `w ≥ 0`.
    pub fn to_quaternion(&self) -> [T; 4] {
        let m = &self.m.m;
        let one = T::one();
        let quarter = T::lit(0.25);
        let tr = m[0][0] + m[1][1] + m[2][2];
        let q = if tr > T::zero() {
            let s = (tr + one).sqrt() * T::two();
            [quarter * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s]
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (one + m[0][0] - m[1][1] - m[2][2]).sqrt() * T::two();
            [(m[2][1] - m[1][2]) / s, quarter * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s]
        } else if m[1][1] > m[2][2] {
            let s = (one + m[1][1] - m[0][0] - m[2][2]).sqrt() * T::two();
            [(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, quarter * s, (m[1][2] + m[2][1]) / s]
        } else {
            let s = (one + m[2][2] - m[0][0] - m[1][1]).sqrt() * T::two();
            [(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, quarter * s]
        };
        let n = q.iter().fold(T::zero(), |a, v| a + *v * *v).sqrt();
        let sign = if q[0] < T::zero() { -one } else { one };
        [q[0] * sign / n, q[1] * sign / n, q[2] * sign / n, q[3] * sign / n]
    }

    /// Rotation from a quaternion `[w, x, y, z]`; the input is normalised.
    pub fn from_quaternion(q: [T; 4]) -> Result<Self> {
        let n = q.iter().fold(T::zero(), |a, v| a + *v * *v).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidRotation("zero or non-finite quaternion".into()));
        }
        let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        let one = T::one();
        let two = T::two();
        Ok(Self::from_matrix_unchecked(Mat3::from_rows([
            [one - two * (y * y + z * z), two * (x * y - w * z), two * (x * z + w * y)],
            [two * (x * y + w * z), one - two * (x * x + z * z), two * (y * z - w * x)],
            [two * (x * z - w * y), two * (y * z + w * x), one - two * (x * x + y * y)],
        ])))
    }
}

/// Element of SE(3): `x ↦ R x + u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose<T> {
    pub rotation: Rotation<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> Default for Pose<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> Pose<T> {
    pub fn new(rotation: Rotation<T>, translation: Vec3<T>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Rotation::identity(), Vec3::zeros())
    }

    pub fn from_translation(u: Vec3<T>) -> Self {
        Self::new(Rotation::identity(), u)
    }

    pub fn from_rotation(r: Rotation<T>) -> Self {
        Self::new(r, Vec3::zeros())
    }

    #[inline]
    pub fn compose(&self, o: &Self) -> Self {
        compose(self, o)
    }

    #[inline]
    pub fn inverse(&self) -> Self {
        inverse(self)
    }

    #[inline]
    pub fn act(&self, x: Vec3<T>) -> Vec3<T> {
        act(self, x)
    }

    #[inline]
    pub fn adjoint(&self, v: &Twist<T>) -> Twist<T> {
        adjoint(self, v)
    }

    /// Largest entrywise difference of the homogeneous matrices.
    pub fn distance(&self, o: &Self) -> T {
        self.rotation
            .matrix()
            .sub(o.rotation.matrix())
            .max_abs()
            .max((self.translation - o.translation).max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.matrix().is_finite() && self.translation.is_finite()
    }
}

/// Element of se(3) as `(angular, linear)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Twist<T> {
    pub angular: Vec3<T>,
    pub linear: Vec3<T>,
}

impl<T: Real> Twist<T> {
    #[inline]
    pub const fn new(angular: Vec3<T>, linear: Vec3<T>) -> Self {
        Self { angular, linear }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(Vec3::zeros(), Vec3::zeros())
    }

    pub fn from_angular(w: Vec3<T>) -> Self {
        Self::new(w, Vec3::zeros())
    }

    pub fn from_linear(v: Vec3<T>) -> Self {
        Self::new(Vec3::zeros(), v)
    }

    /// Coordinates `(ω₁, ω₂, ω₃, v₁, v₂, v₃)`.
    #[inline]
    pub fn to_array(&self) -> [T; 6] {
        let (w, v) = (self.angular, self.linear);
        [w.x, w.y, w.z, v.x, v.y, v.z]
    }

    #[inline]
    pub fn from_array(a: [T; 6]) -> Self {
        Self::new(Vec3::new(a[0], a[1], a[2]), Vec3::new(a[3], a[4], a[5]))
    }

    /// Velocity of the point `p` under this twist: `ω × p + v`.
    #[inline]
    pub fn at_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.angular.cross(p) + self.linear
    }

    #[inline]
    pub fn bracket(&self, o: &Self) -> Self {
        bracket(self, o)
    }

    #[inline]
    pub fn klein(&self, o: &Self) -> T {
        klein(self, o)
    }

    /// Euclidean norm of the six coordinates.
    pub fn norm(&self) -> T {
        (self.angular.norm_squared() + self.linear.norm_squared()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.angular.max_abs().max(self.linear.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.angular.is_finite() && self.linear.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.to_array().iter().all(|v| *v == T::zero())
    }

    pub fn cast<U: Real>(&self) -> Twist<U> {
        Twist::new(self.angular.cast(), self.linear.cast())
    }
}

impl<T: Real> Add for Twist<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.angular + o.angular, self.linear + o.linear)
    }
}

impl<T: Real> AddAssign for Twist<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Twist<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.angular - o.angular, self.linear - o.linear)
    }
}

impl<T: Real> SubAssign for Twist<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Neg for Twist<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.angular, -self.linear)
    }
}

impl<T: Real> Mul<T> for Twist<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.angular * s, self.linear * s)
    }
}

/// `(R₁R₂, u₁ + R₁u₂)`.
#[inline]
pub fn compose<T: Real>(g1: &Pose<T>, g2: &Pose<T>) -> Pose<T> {
    Pose::new(
        g1.rotation.compose(&g2.rotation),
        g1.translation + g1.rotation.rotate(g2.translation),
    )
}

/// `(Rᵀ, −Rᵀu)`.
#[inline]
pub fn inverse<T: Real>(g: &Pose<T>) -> Pose<T> {
    let rt = g.rotation.transpose();
    Pose::new(rt, -rt.rotate(g.translation))
}

#[inline]
pub fn act<T: Real>(g: &Pose<T>, x: Vec3<T>) -> Vec3<T> {
    g.rotation.rotate(x) + g.translation
}

/// `Ad_g V = (Rω, −hat(Rω) u + R v)`.
#[inline]
pub fn adjoint<T: Real>(g: &Pose<T>, v: &Twist<T>) -> Twist<T> {
    let rw = g.rotation.rotate(v.angular);
    Twist::new(rw, g.rotation.rotate(v.linear) - rw.cross(g.translation))
}

/// `[V, W] = (ω_V × ω_W, ω_V × w − ω_W × v)`.
#[inline]
pub fn bracket<T: Real>(a: &Twist<T>, b: &Twist<T>) -> Twist<T> {
    Twist::new(
        a.angular.cross(b.angular),
        a.angular.cross(b.linear) - b.angular.cross(a.linear),
    )
}

/// `𝔨(V, W) = v·ω_W + w·ω_V`.
#[inline]
pub fn klein<T: Real>(a: &Twist<T>, b: &Twist<T>) -> T {
    a.linear.dot(b.angular) + b.linear.dot(a.angular)
}

/// Left Maurer–Cartan form of the tangent `(Ṙ, u̇)` at `g`: `(vee(RᵀṘ), Rᵀu̇)`.
pub fn maurer_cartan<T: Real>(g: &Pose<T>, r_dot: &Mat3<T>, u_dot: Vec3<T>) -> Result<Twist<T>> {
    let rt = g.rotation.transpose();
    let body = rt.matrix().mul_mat(r_dot);
    let asym = body.add(&body.transpose()).max_abs();
    if asym > T::lit(T::GEOM_TOL) * (T::one() + body.max_abs()) || !asym.is_finite() {
        return Err(Error::NotTangent(asym.to_f64_lossy()));
    }
    Ok(Twist::new(vee_unchecked(&body), rt.rotate(u_dot)))
}

/// Coefficients `sinθ/θ`, `(1−cosθ)/θ²`, `(θ−sinθ)/θ³` with Taylor branches.
fn exp_coefficients<T: Real>(theta: T) -> (T, T, T) {
    let t2 = theta * theta;
    if theta < T::lit(SMALL_ANGLE) {
        (
            T::one() - t2 / T::lit(6.0),
            T::half() - t2 / T::lit(24.0),
            T::one() / T::lit(6.0) - t2 / T::lit(120.0),
        )
    } else {
        let (s, c) = theta.sin_cos();
        (s / theta, (T::one() - c) / t2, (theta - s) / (t2 * theta))
    }
}

/// Rodrigues' formula.
pub fn exp_so3<T: Real>(w: Vec3<T>) -> Rotation<T> {
    let (a, b, _) = exp_coefficients(w.norm());
    let k = hat(w);
    Rotation::from_matrix_unchecked(Mat3::identity().add(&k.scale(a)).add(&k.mul_mat(&k).scale(b)))
}

/// Group exponential: Rodrigues rotation and the closed-form left Jacobian for
/// the translation.
pub fn exp_se3<T: Real>(v: &Twist<T>) -> Pose<T> {
    let (a, b, c) = exp_coefficients(v.angular.norm());
    let k = hat(v.angular);
    let k2 = k.mul_mat(&k);
    let r = Mat3::identity().add(&k.scale(a)).add(&k2.scale(b));
    let jl = Mat3::identity().add(&k.scale(b)).add(&k2.scale(c));
    Pose::new(Rotation::from_matrix_unchecked(r), jl.mul_vec(v.linear))
}

/// Group logarithm for rotation angles below `π − 1e-6`.
pub fn log_se3<T: Real>(g: &Pose<T>) -> Result<Twist<T>> {
    let r = g.rotation.matrix();
    let axial = vee_unchecked(r); // sinθ · axis
    let s = axial.norm();
    let c = (r.trace() - T::one()) * T::half();
    let theta = s.atan2(c);
    if theta >= T::PI() - T::lit(LOG_ANGLE_MARGIN) || !theta.is_finite() {
        return Err(Error::LogSingular { angle: theta.to_f64_lossy() });
    }
    let t2 = theta * theta;
    let (omega, d) = if theta < T::lit(SMALL_ANGLE) {
        // sinθ/θ ≈ 1 − θ²/6 ; (1 − θ sinθ / (2(1 − cosθ)))/θ² ≈ 1/12 + θ²/720
        (
            axial / (T::one() - t2 / T::lit(6.0)),
            T::one() / T::lit(12.0) + t2 / T::lit(720.0),
        )
    } else {
        let (sn, cs) = theta.sin_cos();
        (
            axial * (theta / s),
            (T::one() - theta * sn / (T::two() * (T::one() - cs))) / t2,
        )
    };
    let k = hat(omega);
    let jl_inv = Mat3::identity()
        .sub(&k.scale(T::half()))
        .add(&k.mul_mat(&k).scale(d));
    Ok(Twist::new(omega, jl_inv.mul_vec(g.translation)))
}

/// `B_k / k!` for k = 0..=14 (odd entries beyond k = 1 vanish).
const BERNOULLI_OVER_FACTORIAL: [f64; 15] = [
    1.0,
    -0.5,
    1.0 / 12.0,
    0.0,
    -1.0 / 720.0,
    0.0,
    1.0 / 30240.0,
    0.0,
    -1.0 / 1209600.0,
    0.0,
    1.0 / 47900160.0,
    0.0,
    -691.0 / 1307674368000.0,
    0.0,
    1.0 / 74724249600.0,
];

/// Inverse of the left-trivialised differential of `exp`:
/// `dexp⁻¹_X(Y) = Σ_k B_k/k! ad_X^k Y`.
///
/// If `exp(X + εδ) = exp(εY)·exp(X) + O(ε²)` then `δ = dexp⁻¹_X(Y)`. Truncated
/// after `ad_X¹⁴`; intended for `|ω_X|` well below `2π`.
pub fn dexp_inv<T: Real>(x: &Twist<T>, y: &Twist<T>) -> Twist<T> {
    let mut term = *y;
    let mut acc = *y;
    for coef in BERNOULLI_OVER_FACTORIAL.iter().skip(1) {
        term = bracket(x, &term);
        if *coef != 0.0 {
            acc += term * T::lit(*coef);
        }
    }
    acc
}
