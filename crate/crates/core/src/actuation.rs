//! Active constitutive law: the passive response `ℋ(ξ)` is replaced by
//! `ℋ(ξ) + u(ξ, ∂_t ξ)` wherever it appears in the equations of motion.
//!
//! A [`ControlLaw`] returns `u` in the same coordinates as `ℋ(ξ)`. The solver
//! differentiates the total `ℋ(ξ) + u` in `z`; laws never supply derivatives.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::rod::{RodProperties, TwistField};
use crate::elasticity::StiffnessLaw;
use crate::scalar::Real;
use crate::se3::Twist;

/// Pluggable actuation term.
///
/// The local contract is [`ControlLaw::local`]. Non-local feedback overrides
/// [`ControlLaw::field`], which sees the whole `(ξ, ∂_t ξ)` profile.
pub trait ControlLaw<T: Real>: Debug + Send + Sync {
    /// Name used in diagnostics.
    fn name(&self) -> &str;

    /// `u` at node `i` and time `t`.
    fn local(&self, t: T, i: usize, xi: &Twist<T>, xi_dot: &Twist<T>) -> Twist<T>;

    /// Whether the law is identically zero. The solver then skips it entirely,
    /// so passive runs are reproduced bit for bit.
    fn is_zero(&self) -> bool {
        false
    }

    /// `u` on the whole rod. Defaults to [`ControlLaw::local`] node by node.
    fn field(&self, t: T, xi: &TwistField<T>, xi_dot: &TwistField<T>) -> TwistField<T> {
        TwistField::from_fn(xi.len(), |i| self.local(t, i, &xi[i], &xi_dot[i]))
    }
}

/// The passive rod.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ZeroControl;

impl<T: Real> ControlLaw<T> for ZeroControl {
    fn name(&self) -> &str {
        "zero"
    }

    fn local(&self, _t: T, _i: usize, _xi: &Twist<T>, _xi_dot: &Twist<T>) -> Twist<T> {
        Twist::zero()
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Twist coordinate driven by a law, in `(ω₁, ω₂, ω₃, v₁, v₂, v₃)` order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrainComponent {
    Bend1,
    Bend2,
    Twist,
    Shear1,
    Shear2,
    Stretch,
}

impl StrainComponent {
    pub const ALL: [StrainComponent; 6] = [
        StrainComponent::Bend1,
        StrainComponent::Bend2,
        StrainComponent::Twist,
        StrainComponent::Shear1,
        StrainComponent::Shear2,
        StrainComponent::Stretch,
    ];

    /// Index into [`Twist::to_array`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Index of the Klein-dual coordinate, i.e. where the conjugate moment or
    /// force sits in a momentum-form wrench.
    pub fn dual_index(self) -> usize {
        (self.index() + 3) % 6
    }

    pub fn name(self) -> &'static str {
        match self {
            StrainComponent::Bend1 => "bend1",
            StrainComponent::Bend2 => "bend2",
            StrainComponent::Twist => "twist",
            StrainComponent::Shear1 => "shear1",
            StrainComponent::Shear2 => "shear2",
            StrainComponent::Stretch => "stretch",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Travelling-wave pattern generator parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpgParams<T> {
    /// Peak active moment (N·m) or force (N), depending on `component`.
    pub amplitude: T,
    /// Temporal frequency, rad/s.
    pub frequency: T,
    /// Spatial wavenumber, rad/m.
    pub wavenumber: T,
    pub component: StrainComponent,
    /// Phase offset, rad.
    pub phase: T,
}

impl<T: Real> CpgParams<T> {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.amplitude, self.frequency, self.wavenumber, self.phase]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("CPG parameters must be finite".into()));
        }
        if self.amplitude < T::zero() {
            return Err(Error::InvalidArgument("CPG amplitude must be non-negative".into()));
        }
        Ok(())
    }
}

impl<T: Real> Default for CpgParams<T> {
    fn default() -> Self {
        Self {
            amplitude: T::zero(),
            frequency: T::two() * T::PI(),
            wavenumber: T::two() * T::PI(),
            component: StrainComponent::Bend1,
            phase: T::zero(),
        }
    }
}

/// Feed-forward travelling wave `a·sin(ω t − k z + φ)`.
///
/// The wave is an active moment (or force) conjugate to the selected strain
/// coordinate. [`CpgLaw::active_wrench`] gives it in momentum form and
/// [`ControlLaw::local`] converts it to `ℋ` coordinates with `A⁻¹`.
#[derive(Clone, Debug)]
pub struct CpgLaw<T> {
    params: CpgParams<T>,
    props: RodProperties<T>,
}

impl<T: Real> CpgLaw<T> {
    pub fn new(params: CpgParams<T>, props: &RodProperties<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, props: props.clone() })
    }

    pub fn params(&self) -> &CpgParams<T> {
        &self.params
    }

    /// Wave value at node `i`.
    pub fn waveform(&self, t: T, i: usize) -> T {
        let p = &self.params;
        let z = self.props.grid().z(i);
        p.amplitude * (p.frequency * t - p.wavenumber * z + p.phase).sin()
    }

    /// Active wrench in momentum form: the wave in the slot dual to the selected
    /// strain coordinate.
    pub fn active_wrench(&self, t: T, i: usize) -> Twist<T> {
        let mut a = [T::zero(); 6];
        a[self.params.component.dual_index()] = self.waveform(t, i);
        Twist::from_array(a)
    }
}

impl<T: Real> ControlLaw<T> for CpgLaw<T> {
    fn name(&self) -> &str {
        "cpg"
    }

    fn local(&self, t: T, i: usize, _xi: &Twist<T>, _xi_dot: &Twist<T>) -> Twist<T> {
        self.props.inertia_a_inv(i, &self.active_wrench(t, i))
    }

    fn is_zero(&self) -> bool {
        self.params.amplitude == T::zero()
    }
}

/// Constant `u₀` at every node; used to probe the solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantControl<T>(pub Twist<T>);

impl<T: Real> ControlLaw<T> for ConstantControl<T> {
    fn name(&self) -> &str {
        "constant"
    }

    fn local(&self, _t: T, _i: usize, _xi: &Twist<T>, _xi_dot: &Twist<T>) -> Twist<T> {
        self.0
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// `ℋ_i(ξ_i) + u(t, i, ξ_i, ξ̇_i)`, failing on a non-finite control value.
pub fn total_wrench<T: Real>(
    t: T,
    i: usize,
    xi: &Twist<T>,
    xi_dot: &Twist<T>,
    props: &RodProperties<T>,
    law: &StiffnessLaw<T>,
    control: &dyn ControlLaw<T>,
) -> Result<Twist<T>> {
    let passive = law.apply_h(props, i, xi);
    if control.is_zero() {
        return Ok(passive);
    }
    let u = control.local(t, i, xi, xi_dot);
    if !u.is_finite() {
        return Err(Error::NonFiniteControl {
            law: control.name().to_string(),
            node: i,
            t: t.to_f64_lossy(),
        });
    }
    Ok(passive + u)
}
