//! Stiffness operator, strain field, elastic energy and its differential.
//!
//! The stiffness of node `i` is stored as `K_i = A_i ∘ ℋ_i`, the linear map from
//! a strain twist to the internal wrench in momentum (Klein-dual) form. The
//! operator `ℋ_i = A_i⁻¹ K_i` is symmetric and positive definite for the kinetic
//! metric exactly when `(ξ, η) ↦ 𝔨(K ξ, η)` is.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, generalized_sym_eigenvalues, mat6_mul_vec, Mat6, Vec3};
use crate::rod::{klein_gram, operator_matrix, Grid, PoseField, RodProperties, TwistField};
use crate::scalar::Real;
use crate::se3::{bracket, compose, dexp_inv, inverse, klein, log_se3, Pose, Twist};

/// Strain `ξ = θ_L(∂_z g)` sampled at nodes.
pub type StrainField<T> = TwistField<T>;

/// Diagonal section stiffness `(EI₁, EI₂, GJ, GA₁, GA₂, EA)` in SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionStiffness<T> {
    /// Bending about `e₁`, `e₂` and torsion, N·m².
    pub bending_torsion: Vec3<T>,
    /// Shear along `e₁`, `e₂` and stretch, N.
    pub shear_stretch: Vec3<T>,
}

impl<T: Real> SectionStiffness<T> {
    pub fn new(ei1: T, ei2: T, gj: T, ga1: T, ga2: T, ea: T) -> Self {
        Self {
            bending_torsion: Vec3::new(ei1, ei2, gj),
            shear_stretch: Vec3::new(ga1, ga2, ea),
        }
    }

    /// Stiffness of a solid circular section of radius `r`.
    pub fn circular(radius: T, young: T, shear_modulus: T) -> Self {
        let pi = T::PI();
        let area = pi * radius * radius;
        let second_moment = area * radius * radius / T::lit(4.0);
        let ei = young * second_moment;
        let gj = shear_modulus * second_moment * T::two();
        let ga = shear_modulus * area;
        Self::new(ei, ei, gj, ga, ga, young * area)
    }

    /// `K` for a section whose centroid sits at `p0`: the strain is measured at the
    /// centroid, `γ_c = ξ(p0)`, and the resulting wrench is carried back to the origin
    /// the same way [`RodProperties::inertia_a`] carries momentum.
    pub fn matrix_at(&self, p0: Vec3<T>) -> Mat6<T> {
        operator_matrix(|xi: &Twist<T>| {
            let s = self.shear_stretch;
            let g = xi.at_point(p0);
            let force = Vec3::new(s.x * g.x, s.y * g.y, s.z * g.z);
            let c = self.bending_torsion;
            let w = xi.angular;
            let moment = Vec3::new(c.x * w.x, c.y * w.y, c.z * w.z);
            Twist::new(force, moment - force.cross(p0))
        })
    }
}

/// Per-node stiffness `K_i = A_i ∘ ℋ_i`, validated against the rod's inertia.
#[derive(Clone, Debug, PartialEq)]
pub struct StiffnessLaw<T> {
    k: Vec<Mat6<T>>,
}

impl<T: Real> StiffnessLaw<T> {
    /// Accepts full 6×6 matrices after checking symmetry and positivity of
    /// `𝔨(K ξ, η)` at every node.
    pub fn from_matrices(props: &RodProperties<T>, k: Vec<Mat6<T>>) -> Result<Self> {
        if k.len() != props.n_nodes() {
            return Err(Error::LengthMismatch { expected: props.n_nodes(), got: k.len() });
        }
        for (i, ki) in k.iter().enumerate() {
            let invalid = |reason: String| Error::InvalidStiffness { node: i, reason };
            let g = klein_gram(ki);
            let scale = g.iter().flat_map(|r| r.iter()).fold(T::zero(), |a, v| a.max(v.abs()));
            if !scale.is_finite() {
                return Err(invalid("non-finite entries".into()));
            }
            if scale == T::zero() {
                return Err(invalid("zero stiffness".into()));
            }
            let mut asym = T::zero();
            for a in 0..6 {
                for b in 0..6 {
                    asym = asym.max((g[a][b] - g[b][a]).abs());
                }
            }
            if asym > T::lit(1e-12) * scale {
                return Err(invalid(format!(
                    "not symmetric under the Klein pairing (asymmetry {:e})",
                    asym.to_f64_lossy()
                )));
            }
            if cholesky(&g).is_none() {
                return Err(invalid("not positive definite under the Klein pairing".into()));
            }
        }
        Ok(Self { k })
    }

    /// The same diagonal section stiffness at every node, placed at each node's
    /// reference point.
    pub fn from_section(props: &RodProperties<T>, section: SectionStiffness<T>) -> Result<Self> {
        let k = (0..props.n_nodes()).map(|i| section.matrix_at(props.p0(i))).collect();
        Self::from_matrices(props, k)
    }

    /// `ℋ = id`, i.e. `K = A`.
    pub fn identity(props: &RodProperties<T>) -> Result<Self> {
        let k = (0..props.n_nodes()).map(|i| props.inertia_matrix(i)).collect();
        Self::from_matrices(props, k)
    }

    /// Multiplies every stiffness by `s > 0`.
    pub fn scaled(&self, s: T) -> Self {
        let k = self
            .k
            .iter()
            .map(|m| {
                let mut out = *m;
                for row in out.iter_mut() {
                    for v in row.iter_mut() {
                        *v = *v * s;
                    }
                }
                out
            })
            .collect();
        Self { k }
    }

    #[inline]
    pub fn matrix(&self, i: usize) -> &Mat6<T> {
        &self.k[i]
    }

    pub fn n_nodes(&self) -> usize {
        self.k.len()
    }

    /// Internal wrench in momentum form, `K_i ξ = A_i ℋ_i ξ`.
    #[inline]
    pub fn stress(&self, i: usize, xi: &Twist<T>) -> Twist<T> {
        Twist::from_array(mat6_mul_vec(&self.k[i], &xi.to_array()))
    }

    /// `ℋ_i ξ = A_i⁻¹ K_i ξ`.
    #[inline]
    pub fn apply_h(&self, props: &RodProperties<T>, i: usize, xi: &Twist<T>) -> Twist<T> {
        props.inertia_a_inv(i, &self.stress(i, xi))
    }

    /// Largest eigenvalue of `A_i⁻¹ K_i`, a squared wave speed (m²/s²).
    pub fn max_wave_speed_squared(&self, props: &RodProperties<T>, i: usize) -> Result<T> {
        let ga = klein_gram(&props.inertia_matrix(i));
        let gk = klein_gram(&self.k[i]);
        let eig = generalized_sym_eigenvalues(&ga, &gk).ok_or_else(|| Error::InvalidProperties {
            node: i,
            reason: "inertia operator is not positive definite".into(),
        })?;
        Ok(eig.iter().fold(T::zero(), |a, v| a.max(*v)))
    }
}

/// Geometric differences `log(g_i⁻¹ g_{i+1}) / Δz` at the cell midpoints.
pub fn midpoint_strains<T: Real>(g: &PoseField<T>, grid: &Grid<T>) -> Result<Vec<Twist<T>>> {
    g.check_len(grid)?;
    let inv_dz = T::one() / grid.dz();
    (0..grid.n_nodes() - 1)
        .map(|i| {
            let rel = compose(&inverse(&g[i]), &g[i + 1]);
            log_se3(&rel)
                .map(|x| x * inv_dz)
                .map_err(|_| Error::MeshTooCoarse { node: i })
        })
        .collect()
}

/// Node values from midpoint values: interior nodes average their two cells,
/// end nodes take their single cell.
pub fn nodes_from_midpoints<T: Real>(mid: &[Twist<T>]) -> TwistField<T> {
    let n = mid.len() + 1;
    TwistField::from_fn(n, |i| {
        if i == 0 {
            mid[0]
        } else if i == n - 1 {
            mid[n - 2]
        } else {
            (mid[i - 1] + mid[i]) * T::half()
        }
    })
}

/// Strain of a sampled configuration, at the nodes.
pub fn strain<T: Real>(g: &PoseField<T>, grid: &Grid<T>) -> Result<StrainField<T>> {
    Ok(nodes_from_midpoints(&midpoint_strains(g, grid)?))
}

/// Poses `g_0 = base`, `g_{i+1} = g_i exp(Δz ξ_{i+½})` from midpoint strains.
pub fn integrate_midpoint_strains<T: Real>(base: &Pose<T>, mid: &[Twist<T>], grid: &Grid<T>) -> PoseField<T> {
    let dz = grid.dz();
    let mut out = Vec::with_capacity(mid.len() + 1);
    let mut g = *base;
    out.push(g);
    for m in mid {
        g = compose(&g, &crate::se3::exp_se3(&(*m * dz)));
        out.push(g);
    }
    PoseField::new(out)
}

/// `U = ½ ≪ℋ ξ, ξ≫_e`, evaluated as `½ ∫ 𝔨(K ξ, ξ) dz`.
pub fn elastic_energy<T: Real>(props: &RodProperties<T>, law: &StiffnessLaw<T>, xi: &StrainField<T>) -> T {
    props.grid().integrate(|i| klein(&law.stress(i, &xi[i]), &xi[i])) * T::half()
}

/// Elastic energy written literally as `½ metric_e(ℋ ξ, ξ)`.
pub fn elastic_energy_via_metric<T: Real>(
    props: &RodProperties<T>,
    law: &StiffnessLaw<T>,
    xi: &StrainField<T>,
) -> T {
    let hxi = TwistField::from_fn(xi.len(), |i| law.apply_h(props, i, &xi[i]));
    crate::rod::metric_e(props, &hxi, xi) * T::half()
}

/// `U(g)` for a configuration: strain by geometric differences, then [`elastic_energy`].
pub fn elastic_energy_of_poses<T: Real>(
    props: &RodProperties<T>,
    law: &StiffnessLaw<T>,
    g: &PoseField<T>,
) -> Result<T> {
    Ok(elastic_energy(props, law, &strain(g, props.grid())?))
}

/// Summation-by-parts first derivative on the grid: central differences inside,
/// one-sided differences at the two ends.
pub fn diff_z<T: Real>(grid: &Grid<T>, f: &[Twist<T>]) -> TwistField<T> {
    let n = f.len();
    let inv_dz = T::one() / grid.dz();
    let half_inv = inv_dz * T::half();
    TwistField::from_fn(n, |i| {
        if i == 0 {
            (f[1] - f[0]) * inv_dz
        } else if i == n - 1 {
            (f[n - 1] - f[n - 2]) * inv_dz
        } else {
            (f[i + 1] - f[i - 1]) * half_inv
        }
    })
}

/// Exact differential of `g ↦ U(g)` in the left-trivialised direction `Z`.
///
/// Each midpoint strain `X/Δz` with `X = log(g_i⁻¹ g_{i+1})` varies by
/// `(dexp⁻¹_{−X} Z_{i+1} − dexp⁻¹_X Z_i) / Δz`, the discrete counterpart of
/// `∂_z Z + [ξ, Z]`; the result is paired with `ℋ ξ` in the metric.
pub fn du_geometric<T: Real>(
    props: &RodProperties<T>,
    law: &StiffnessLaw<T>,
    g: &PoseField<T>,
    z: &TwistField<T>,
) -> Result<T> {
    let grid = props.grid();
    z.check_len(grid)?;
    let mid = midpoint_strains(g, grid)?;
    let dz = grid.dz();
    let dmid: Vec<Twist<T>> = mid
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let x = *m * dz;
            (dexp_inv(&(-x), &z[i + 1]) - dexp_inv(&x, &z[i])) * (T::one() / dz)
        })
        .collect();
    let xi = nodes_from_midpoints(&mid);
    let dxi = nodes_from_midpoints(&dmid);
    Ok(grid.integrate(|i| klein(&law.stress(i, &xi[i]), &dxi[i])))
}

/// Collocated form `≪∂_z Z + [ξ, Z], ℋ ξ≫_e` with [`diff_z`].
pub fn du_lemma<T: Real>(
    props: &RodProperties<T>,
    law: &StiffnessLaw<T>,
    xi: &StrainField<T>,
    z: &TwistField<T>,
) -> T {
    let grid = props.grid();
    let dz = diff_z(grid, z.as_slice());
    grid.integrate(|i| klein(&law.stress(i, &xi[i]), &(dz[i] + bracket(&xi[i], &z[i]))))
}

/// Integrated-by-parts form
/// `𝔨(Kξ, Z)|₀ᴸ − ∫ 𝔨(∂_z(Kξ) + [ξ, Kξ], Z) dz`.
///
/// With [`diff_z`] and trapezoidal weights the discrete integration by parts is
/// exact, so this equals [`du_lemma`] to rounding.
pub fn du_corollary<T: Real>(
    props: &RodProperties<T>,
    law: &StiffnessLaw<T>,
    xi: &StrainField<T>,
    z: &TwistField<T>,
) -> T {
    let grid = props.grid();
    let n = grid.n_nodes();
    let sigma = TwistField::from_fn(n, |i| law.stress(i, &xi[i]));
    let dsigma = diff_z(grid, sigma.as_slice());
    let boundary = klein(&sigma[n - 1], &z[n - 1]) - klein(&sigma[0], &z[0]);
    boundary - grid.integrate(|i| klein(&(dsigma[i] + bracket(&xi[i], &sigma[i])), &z[i]))
}
