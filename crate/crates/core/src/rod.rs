//! Rod material data, the pointwise kinetic inner product, the inertia
//! operator `A` and the integrated metric / Klein pairings on sampled fields.
//!
//! Every `z`-integral uses the trapezoidal rule on the uniform grid.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Mat6, Vec3};
use crate::scalar::Real;
use crate::se3::{klein, Pose, Twist};

/// Uniform grid `z_i = i·Δz` on `[0, L]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    n_nodes: usize,
    length: T,
}

impl<T: Real> Grid<T> {
    pub fn new(n_nodes: usize, length: T) -> Result<Self> {
        if n_nodes < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n_nodes}")));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {}",
                length.to_f64_lossy()
            )));
        }
        Ok(Self { n_nodes, length })
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    #[inline]
    pub fn length(&self) -> T {
        self.length
    }

    #[inline]
    pub fn dz(&self) -> T {
        self.length / T::lit((self.n_nodes - 1) as f64)
    }

    #[inline]
    pub fn z(&self, i: usize) -> T {
        T::lit(i as f64) * self.dz()
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_nodes).map(|i| self.z(i)).collect()
    }

    /// Trapezoidal weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> T {
        if i == 0 || i + 1 == self.n_nodes {
            self.dz() * T::half()
        } else {
            self.dz()
        }
    }

    /// Trapezoidal rule for nodal values produced by `f`, summed in node order.
    pub fn integrate(&self, mut f: impl FnMut(usize) -> T) -> T {
        (0..self.n_nodes).fold(T::zero(), |acc, i| acc + self.weight(i) * f(i))
    }

    /// Same quadrature for twist-valued integrands.
    pub fn integrate_twist(&self, mut f: impl FnMut(usize) -> Twist<T>) -> Twist<T> {
        (0..self.n_nodes).fold(Twist::zero(), |acc, i| acc + f(i) * self.weight(i))
    }
}

macro_rules! sampled_field {
    ($(#[$doc:meta])* $name:ident, $elem:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name<T>(Vec<$elem<T>>);

        impl<T: Real> $name<T> {
            pub fn new(values: Vec<$elem<T>>) -> Self {
                Self(values)
            }

            pub fn from_fn(n: usize, f: impl FnMut(usize) -> $elem<T>) -> Self {
                Self((0..n).map(f).collect())
            }

            /// Fails unless the field has one entry per grid node.
            pub fn check_len(&self, grid: &Grid<T>) -> Result<()> {
                if self.0.len() == grid.n_nodes() {
                    Ok(())
                } else {
                    Err(Error::LengthMismatch { expected: grid.n_nodes(), got: self.0.len() })
                }
            }

            #[inline]
            pub fn len(&self) -> usize {
                self.0.len()
            }

            #[inline]
            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            #[inline]
            pub fn as_slice(&self) -> &[$elem<T>] {
                &self.0
            }

            #[inline]
            pub fn as_mut_slice(&mut self) -> &mut [$elem<T>] {
                &mut self.0
            }

            pub fn iter(&self) -> std::slice::Iter<'_, $elem<T>> {
                self.0.iter()
            }

            pub fn into_vec(self) -> Vec<$elem<T>> {
                self.0
            }
        }

        impl<T> Index<usize> for $name<T> {
            type Output = $elem<T>;
            #[inline]
            fn index(&self, i: usize) -> &$elem<T> {
                &self.0[i]
            }
        }

        impl<T> IndexMut<usize> for $name<T> {
            #[inline]
            fn index_mut(&mut self, i: usize) -> &mut $elem<T> {
                &mut self.0[i]
            }
        }

        impl<'a, T> IntoIterator for &'a $name<T> {
            type Item = &'a $elem<T>;
            type IntoIter = std::slice::Iter<'a, $elem<T>>;
            fn into_iter(self) -> Self::IntoIter {
                self.0.iter()
            }
        }
    };
}

sampled_field!(
    /// One twist per grid node: a sampled element of the field algebra.
    TwistField,
    Twist
);

sampled_field!(
    /// One pose per grid node: a sampled configuration `z ↦ g(z)`.
    PoseField,
    Pose
);

impl<T: Real> TwistField<T> {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Twist::zero(); n])
    }

    pub fn uniform(n: usize, v: Twist<T>) -> Self {
        Self(vec![v; n])
    }

    pub fn max_norm(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, v| acc.max(v.norm()))
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, v| acc.max(v.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(Twist::is_finite)
    }

    /// `self + other·s`, node by node.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a + *b * s).collect())
    }
}

impl<T: Real> PoseField<T> {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pose::identity(); n])
    }

    pub fn uniform(n: usize, g: Pose<T>) -> Self {
        Self(vec![g; n])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(Pose::is_finite)
    }

    /// Largest nodewise [`Pose::distance`].
    pub fn distance(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |acc, (a, b)| acc.max(a.distance(b)))
    }
}

/// Reference centreline `p0(z)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceCurve<T> {
    /// `p0(z) = (0, 0, z)`: a straight rod along `e₃`.
    Straight,
    /// `p0(z) = 0` at every node; the inertia operator is then the same at every node.
    Collocated,
    /// Explicit per-node points.
    Points(Vec<Vec3<T>>),
}

impl<T: Real> ReferenceCurve<T> {
    pub fn sample(&self, grid: &Grid<T>) -> Result<Vec<Vec3<T>>> {
        match self {
            Self::Straight => Ok((0..grid.n_nodes())
                .map(|i| Vec3::new(T::zero(), T::zero(), grid.z(i)))
                .collect()),
            Self::Collocated => Ok(vec![Vec3::zeros(); grid.n_nodes()]),
            Self::Points(p) if p.len() == grid.n_nodes() => Ok(p.clone()),
            Self::Points(p) => Err(Error::LengthMismatch { expected: grid.n_nodes(), got: p.len() }),
        }
    }
}

/// Cross-sectional mass per length for a disc of radius `R`.
///
/// The kinetic-energy derivation this model follows writes `m = 2πR²ρ₀`,
/// while the area of the disc gives `πR²ρ₀`; both are available.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MassCoefficient {
    /// `m = 2πR²ρ₀`.
    Paper,
    /// `m = πR²ρ₀`.
    #[default]
    Area,
}

/// Per-node mass line density, section inertia and reference curve.
#[derive(Clone, Debug, PartialEq)]
pub struct RodProperties<T> {
    grid: Grid<T>,
    mass: Vec<T>,
    inertia: Vec<Mat3<T>>,
    inertia_inv: Vec<Mat3<T>>,
    p0: Vec<Vec3<T>>,
}

impl<T: Real> RodProperties<T> {
    /// Validates `m > 0` and that every `I` is symmetric positive definite.
    pub fn new(grid: Grid<T>, mass: Vec<T>, inertia: Vec<Mat3<T>>, p0: Vec<Vec3<T>>) -> Result<Self> {
        let n = grid.n_nodes();
        for len in [mass.len(), inertia.len(), p0.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, got: len });
            }
        }
        let mut inertia_inv = Vec::with_capacity(n);
        for i in 0..n {
            let invalid = |reason: String| Error::InvalidProperties { node: i, reason };
            if !(mass[i] > T::zero()) || !mass[i].is_finite() {
                return Err(invalid(format!("mass density {} is not positive", mass[i].to_f64_lossy())));
            }
            if !p0[i].is_finite() {
                return Err(invalid("reference point is not finite".into()));
            }
            let ii = &inertia[i];
            let asym = ii.sub(&ii.transpose()).max_abs();
            if !ii.is_finite() || asym > T::lit(1e-12) * (T::one() + ii.max_abs()) {
                return Err(invalid(format!("inertia is not symmetric (asymmetry {:e})", asym.to_f64_lossy())));
            }
            let min_eig = ii.symmetric_eigenvalues()[0];
            if !(min_eig > T::zero()) {
                return Err(invalid(format!(
                    "inertia is not positive definite (smallest eigenvalue {:e})",
                    min_eig.to_f64_lossy()
                )));
            }
            inertia_inv.push(ii.try_inverse().ok_or_else(|| invalid("inertia is singular".into()))?);
        }
        Ok(Self { grid, mass, inertia, inertia_inv, p0 })
    }

    /// Same mass and inertia at every node.
    pub fn uniform(grid: Grid<T>, mass: T, inertia: Mat3<T>, curve: &ReferenceCurve<T>) -> Result<Self> {
        let n = grid.n_nodes();
        Self::new(grid, vec![mass; n], vec![inertia; n], curve.sample(&grid)?)
    }

    /// Solid circular section of radius `radius` with density profile `rho0(z)`.
    ///
    /// `I = diag(πR⁴ρ₀/4, πR⁴ρ₀/4, πR⁴ρ₀/2)`; the mass coefficient is selectable.
    pub fn cylinder(
        grid: Grid<T>,
        radius: T,
        rho0: impl Fn(T) -> T,
        coefficient: MassCoefficient,
        curve: &ReferenceCurve<T>,
    ) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        let pi = T::PI();
        let area_factor = match coefficient {
            MassCoefficient::Paper => T::two() * pi,
            MassCoefficient::Area => pi,
        };
        let r2 = radius * radius;
        let mut mass = Vec::with_capacity(grid.n_nodes());
        let mut inertia = Vec::with_capacity(grid.n_nodes());
        for i in 0..grid.n_nodes() {
            let rho = rho0(grid.z(i));
            mass.push(area_factor * r2 * rho);
            let bend = pi * r2 * r2 * rho / T::lit(4.0);
            inertia.push(Mat3::from_diagonal(Vec3::new(bend, bend, bend * T::two())));
        }
        Self::new(grid, mass, inertia, curve.sample(&grid)?)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    #[inline]
    pub fn mass(&self, i: usize) -> T {
        self.mass[i]
    }

    #[inline]
    pub fn inertia(&self, i: usize) -> &Mat3<T> {
        &self.inertia[i]
    }

    #[inline]
    pub fn p0(&self, i: usize) -> Vec3<T> {
        self.p0[i]
    }

    pub fn reference_points(&self) -> &[Vec3<T>] {
        &self.p0
    }

    pub fn total_mass(&self) -> T {
        self.grid.integrate(|i| self.mass[i])
    }

    /// `⟨V, W⟩_z = m V(p0)·W(p0) + ω_V·I ω_W` at node `i`.
    #[inline]
    pub fn inner_z(&self, i: usize, v: &Twist<T>, w: &Twist<T>) -> T {
        let p = self.p0[i];
        self.mass[i] * v.at_point(p).dot(w.at_point(p))
            + v.angular.dot(self.inertia[i].mul_vec(w.angular))
    }

    /// Inertia operator at node `i`, defined by `A(V)(p0) = I ω_V` and
    /// `ω_{A(V)} = m V(p0)`, so that `𝔨(A V, W) = ⟨V, W⟩_z`.
    #[inline]
    pub fn inertia_a(&self, i: usize, v: &Twist<T>) -> Twist<T> {
        let p = self.p0[i];
        let momentum = v.at_point(p) * self.mass[i];
        let angular_momentum = self.inertia[i].mul_vec(v.angular);
        Twist::new(momentum, angular_momentum - momentum.cross(p))
    }

    /// Closed-form inverse of [`Self::inertia_a`].
    #[inline]
    pub fn inertia_a_inv(&self, i: usize, m: &Twist<T>) -> Twist<T> {
        let p = self.p0[i];
        let velocity_at_p0 = m.angular / self.mass[i];
        let omega = self.inertia_inv[i].mul_vec(m.linear + m.angular.cross(p));
        Twist::new(omega, velocity_at_p0 - omega.cross(p))
    }

    /// Matrix of `A` at node `i` in `(ω, v)` coordinates.
    pub fn inertia_matrix(&self, i: usize) -> Mat6<T> {
        operator_matrix(|v| self.inertia_a(i, v))
    }
}

/// Builds the 6×6 matrix of a linear map on twists from its action on the basis.
pub fn operator_matrix<T: Real>(f: impl Fn(&Twist<T>) -> Twist<T>) -> Mat6<T> {
    let mut m = [[T::zero(); 6]; 6];
    for j in 0..6 {
        let mut e = [T::zero(); 6];
        e[j] = T::one();
        let col = f(&Twist::from_array(e)).to_array();
        for i in 0..6 {
            m[i][j] = col[i];
        }
    }
    m
}

/// Gram matrix of the pairing `(V, W) ↦ 𝔨(M V, W)`, i.e. `J·M` with `J` the Klein form.
pub fn klein_gram<T: Real>(m: &Mat6<T>) -> Mat6<T> {
    let mut g = [[T::zero(); 6]; 6];
    for i in 0..6 {
        // 𝔨 swaps the angular and linear blocks.
        let src = if i < 3 { i + 3 } else { i - 3 };
        g[i] = m[src];
    }
    g
}

/// Metric at the identity: trapezoidal quadrature of `⟨V, W⟩_z`.
pub fn metric_e<T: Real>(props: &RodProperties<T>, v: &TwistField<T>, w: &TwistField<T>) -> T {
    props.grid().integrate(|i| props.inner_z(i, &v[i], &w[i]))
}

/// `½ ≪W, W≫_e`.
pub fn kinetic_energy<T: Real>(props: &RodProperties<T>, w: &TwistField<T>) -> T {
    metric_e(props, w, w) * T::half()
}

/// Integrated Klein pairing; indefinite.
pub fn klein_field<T: Real>(grid: &Grid<T>, v: &TwistField<T>, w: &TwistField<T>) -> T {
    grid.integrate(|i| klein(&v[i], &w[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::{adjoint, exp_se3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rod(curve: ReferenceCurve<f64>) -> RodProperties<f64> {
        let grid = Grid::new(9, 2.0).unwrap();
        RodProperties::uniform(grid, 2.0, Mat3::from_diagonal(Vec3::new(3.0, 3.0, 1.0)), &curve).unwrap()
    }

    fn rand_twist(rng: &mut ChaCha8Rng) -> Twist<f64> {
        Twist::from_array(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
    }

    fn random_rod(rng: &mut ChaCha8Rng) -> RodProperties<f64> {
        let grid = Grid::new(7, 1.3).unwrap();
        let n = grid.n_nodes();
        let mass = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
        let inertia = (0..n)
            .map(|_| {
                let b = Mat3::from_rows(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))));
                b.mul_mat(&b.transpose()).add(&Mat3::identity().scale(0.1))
            })
            .collect();
        let p0 = (0..n)
            .map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        RodProperties::new(grid, mass, inertia, p0).unwrap()
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(Grid::new(2, 1.0).is_err());
        assert!(Grid::new(5, 0.0).is_err());
        let g = Grid::new(5, 2.0).unwrap();
        assert_eq!(g.dz(), 0.5);
        assert_eq!(g.z(4), 2.0);
        assert_eq!(g.integrate(|_| 1.0), 2.0);
    }

    #[test]
    fn inner_z_examples() {
        let props = rod(ReferenceCurve::Straight);
        let e1 = Twist::from_linear(Vec3::unit_x());
        assert_eq!(props.inner_z(3, &e1, &e1), 2.0);
        let spin = Twist::from_angular(Vec3::unit_z());
        assert_eq!(props.inner_z(3, &spin, &e1), 0.0);
        assert_eq!(props.inner_z(3, &spin, &Twist::zero()), 0.0);
    }

    #[test]
    fn inertia_a_examples() {
        let props = rod(ReferenceCurve::Collocated);
        let v = Twist::from_linear(Vec3::unit_x());
        assert_eq!(props.inertia_a(0, &v), Twist::from_angular(Vec3::new(2.0, 0.0, 0.0)));

        let props = rod(ReferenceCurve::Straight);
        let i = 4;
        let z = props.grid().z(i);
        let a = props.inertia_a(i, &v);
        assert_eq!(a, Twist::new(Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 2.0 * z, 0.0)));
        assert_eq!(klein(&a, &v), 2.0);
        assert_eq!(props.inner_z(i, &v, &v), 2.0);
        assert_eq!(props.inertia_a(i, &Twist::zero()), Twist::zero());
    }

    #[test]
    fn inertia_a_inv_examples() {
        let props = rod(ReferenceCurve::Collocated);
        let m = Twist::from_angular(Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(props.inertia_a_inv(0, &m), Twist::from_linear(Vec3::unit_x()));
        assert_eq!(props.inertia_a_inv(0, &Twist::zero()), Twist::zero());
    }

    #[test]
    fn duality_and_inverse_on_random_rods() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let props = random_rod(&mut rng);
            for _ in 0..20 {
                let i = rng.gen_range(0..props.n_nodes());
                let v = rand_twist(&mut rng);
                let w = rand_twist(&mut rng);
                let lhs = klein(&props.inertia_a(i, &v), &w);
                let rhs = props.inner_z(i, &v, &w);
                assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
                let sym = klein(&props.inertia_a(i, &w), &v);
                assert!((lhs - sym).abs() <= 1e-12 * (1.0 + lhs.abs()));
                let back = props.inertia_a(i, &props.inertia_a_inv(i, &v));
                assert!((back - v).norm() <= 1e-10 * v.norm());
            }
        }
    }

    #[test]
    fn inertia_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let props = random_rod(&mut rng);
        let v = rand_twist(&mut rng);
        let w = rand_twist(&mut rng);
        let (a, b) = (0.7, -1.9);
        let lhs = props.inertia_a(2, &(v * a + w * b));
        let rhs = props.inertia_a(2, &v) * a + props.inertia_a(2, &w) * b;
        assert!((lhs - rhs).max_abs() < 1e-13);
    }

    #[test]
    fn metric_and_kinetic_energy() {
        let props = rod(ReferenceCurve::Straight);
        let n = props.n_nodes();
        let l = props.grid().length();
        let v = Twist::from_linear(Vec3::new(1.0, -2.0, 0.5));
        let field = TwistField::uniform(n, v);
        let expected = l * props.inner_z(0, &v, &v);
        assert!((metric_e(&props, &field, &field) - expected).abs() < 1e-12);
        assert_eq!(metric_e(&props, &TwistField::zeros(n), &field), 0.0);
        assert_eq!(kinetic_energy(&props, &TwistField::zeros(n)), 0.0);
        let ke = kinetic_energy(&props, &field);
        assert!((ke - 0.5 * l * 2.0 * v.linear.norm_squared()).abs() < 1e-12);

        // Spin about the rod axis: only the polar moment contributes.
        let spin = TwistField::uniform(n, Twist::from_angular(Vec3::unit_z()));
        assert!((kinetic_energy(&props, &spin) - 0.5 * l * 1.0).abs() < 1e-12);
    }

    #[test]
    fn metric_is_positive_on_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let props = random_rod(&mut rng);
        for _ in 0..100 {
            let f = TwistField::from_fn(props.n_nodes(), |_| rand_twist(&mut rng));
            assert!(metric_e(&props, &f, &f) > 0.0);
        }
    }

    #[test]
    fn klein_field_examples() {
        let grid = Grid::<f64>::new(5, 2.0).unwrap();
        let v = Twist::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0));
        let w = Twist::new(Vec3::new(0.0, 1.0, 0.0), Vec3::new(3.0, 0.0, 0.0));
        let fv = TwistField::uniform(5, v);
        let fw = TwistField::uniform(5, w);
        assert!((klein_field(&grid, &fv, &fw) - 2.0 * klein(&v, &w)).abs() < 1e-14);
        let rot = TwistField::uniform(5, Twist::from_angular(Vec3::unit_x()));
        assert_eq!(klein_field(&grid, &rot, &rot), 0.0);
    }

    #[test]
    fn klein_field_is_ad_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let grid = Grid::new(6, 1.0).unwrap();
        let v = TwistField::from_fn(6, |_| rand_twist(&mut rng));
        let w = TwistField::from_fn(6, |_| rand_twist(&mut rng));
        let g: Vec<Pose<f64>> = (0..6).map(|_| exp_se3(&rand_twist(&mut rng))).collect();
        let av = TwistField::from_fn(6, |i| adjoint(&g[i], &v[i]));
        let aw = TwistField::from_fn(6, |i| adjoint(&g[i], &w[i]));
        let a = klein_field(&grid, &v, &w);
        assert!((klein_field(&grid, &av, &aw) - a).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn cylinder_helper() {
        let grid = Grid::new(11, 1.0).unwrap();
        let r = 0.02;
        let props =
            RodProperties::cylinder(grid, r, |_| 1000.0, MassCoefficient::Area, &ReferenceCurve::Straight).unwrap();
        let m = std::f64::consts::PI * r * r * 1000.0;
        assert!((props.mass(0) - m).abs() < 1e-15);
        assert_eq!(props.mass(0), props.mass(10));
        assert!((props.total_mass() - m).abs() < 1e-14);
        let paper =
            RodProperties::cylinder(grid, r, |_| 1000.0, MassCoefficient::Paper, &ReferenceCurve::Straight).unwrap();
        assert!((paper.mass(3) - 2.0 * m).abs() < 1e-14);

        // Linear density profile: trapezoid is exact.
        let graded =
            RodProperties::cylinder(grid, r, |z| 1000.0 * (1.0 + z), MassCoefficient::Area, &ReferenceCurve::Straight)
                .unwrap();
        assert!((graded.total_mass() - m * 1.5).abs() < 1e-13);
        let eig = graded.inertia(5).symmetric_eigenvalues();
        assert!(eig[0] > 0.0);
    }

    #[test]
    fn rejects_invalid_properties() {
        let grid = Grid::new(3, 1.0).unwrap();
        let good = Mat3::from_diagonal(Vec3::new(1.0, 1.0, 1.0));
        let p0 = vec![Vec3::zeros(); 3];
        assert!(RodProperties::new(grid, vec![1.0, 0.0, 1.0], vec![good; 3], p0.clone()).is_err());
        let bad = Mat3::from_diagonal(Vec3::new(1.0, -1.0, 1.0));
        assert!(RodProperties::new(grid, vec![1.0; 3], vec![good, bad, good], p0.clone()).is_err());
        let asym = Mat3::from_rows([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(RodProperties::new(grid, vec![1.0; 3], vec![good, asym, good], p0).is_err());
    }

    #[test]
    fn klein_gram_of_inertia_is_symmetric_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let props = random_rod(&mut rng);
        let g = klein_gram(&props.inertia_matrix(3));
        for i in 0..6 {
            for j in 0..6 {
                assert!((g[i][j] - g[j][i]).abs() < 1e-12);
            }
        }
        assert!(crate::linalg::cholesky(&g).is_some());
    }
}
