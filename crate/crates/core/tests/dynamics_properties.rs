use proptest::prelude::*;
use snake_core::actuation::{ConstantControl, ZeroControl};
use snake_core::dynamics::{
    check_invariants, reconstruction_residual, spatial_momentum, total_energy, RodSystem, Scheme, SimState,
};
use snake_core::elasticity::{SectionStiffness, StiffnessLaw};
use snake_core::se3::exp_se3;
use snake_core::{Grid, Mat3, ReferenceCurve, RodProperties, Twist, TwistField, Vec3};

const N: usize = 11;

fn twist(r: f64) -> impl Strategy<Value = Twist<f64>> {
    ([-r..r, -r..r, -r..r], [-r..r, -r..r, -r..r])
        .prop_map(|(w, v)| Twist::new(Vec3::from_array(w), Vec3::from_array(v)))
}

fn rod() -> (RodProperties<f64>, StiffnessLaw<f64>) {
    rod_on(&ReferenceCurve::Straight)
}

fn rod_on(curve: &ReferenceCurve<f64>) -> (RodProperties<f64>, StiffnessLaw<f64>) {
    let grid = Grid::new(N, 1.0).unwrap();
    let inertia = Mat3::from_diagonal(Vec3::new(2e-2, 2e-2, 1e-2));
    let props = RodProperties::uniform(grid, 1.0, inertia, curve).unwrap();
    let law = StiffnessLaw::from_section(&props, SectionStiffness::new(1.0, 1.0, 0.4, 40.0, 40.0, 60.0)).unwrap();
    (props, law)
}

/// Smooth strain with zero ends and a random velocity profile.
fn state(grid: &Grid<f64>, amp: Twist<f64>, w: Twist<f64>, base: Twist<f64>) -> SimState<f64> {
    let xi = TwistField::from_fn(N, |i| {
        let s = (std::f64::consts::PI * grid.z(i)).sin();
        if i == 0 || i == N - 1 { Twist::zero() } else { amp * s }
    });
    let vel = TwistField::from_fn(N, |i| w * (1.0 + grid.z(i)));
    SimState::from_strain(grid, exp_se3(&base), xi, vel).unwrap()
}

fn run(sys: &RodSystem<f64>, s: &SimState<f64>, dt: f64, steps: usize, scheme: Scheme) -> Vec<SimState<f64>> {
    let mut out = vec![s.clone()];
    for _ in 0..steps {
        let next = sys.step(out.last().unwrap(), dt, scheme).unwrap();
        out.push(next);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_are_left_invariant(amp in twist(0.5), w in twist(0.5), base in twist(1.0), h in twist(2.0)) {
        let (props, law) = rod();
        let sys = RodSystem::new(&props, &law, &ZeroControl).unwrap();
        let s = state(props.grid(), amp, w, base);
        let h = exp_se3(&h);
        for scheme in [Scheme::Rk4, Scheme::Midpoint] {
            let a = run(&sys, &s, 2e-3, 20, scheme);
            let b = run(&sys, &s.left_translated(&h), 2e-3, 20, scheme);
            let (a, b) = (a.last().unwrap(), b.last().unwrap());
            prop_assert_eq!(&a.w, &b.w);
            prop_assert_eq!(&a.xi, &b.xi);
            prop_assert!(a.left_translated(&h).g.distance(&b.g) <= 1e-12);
        }
    }

    #[test]
    fn end_strains_stay_zero_and_poses_match_strain(amp in twist(0.5), w in twist(0.5), base in twist(1.0)) {
        let (props, law) = rod();
        let control = ConstantControl(Twist::new(Vec3::new(0.1, 0.0, 0.0), Vec3::zeros()));
        let sys = RodSystem::new(&props, &law, &control).unwrap();
        let s = state(props.grid(), amp, w, base);
        for st in run(&sys, &s, 2e-3, 25, Scheme::Rk4) {
            prop_assert!(check_invariants(&st, props.grid()).is_ok());
            prop_assert_eq!(st.xi[0], Twist::zero());
            prop_assert_eq!(st.xi[N - 1], Twist::zero());
            prop_assert!(reconstruction_residual(&st, props.grid()) == 0.0);
        }
    }

    #[test]
    fn zero_control_is_a_no_op(amp in twist(0.5), w in twist(0.5)) {
        let (props, law) = rod();
        let passive = RodSystem::new(&props, &law, &ZeroControl).unwrap();
        let zero = ConstantControl(Twist::zero());
        let active = RodSystem::new(&props, &law, &zero).unwrap();
        let s = state(props.grid(), amp, w, Twist::zero());
        for scheme in [Scheme::Rk4, Scheme::Midpoint] {
            prop_assert_eq!(run(&passive, &s, 2e-3, 10, scheme), run(&active, &s, 2e-3, 10, scheme));
        }
    }
}

#[test]
fn midpoint_conserves_energy_of_passive_rod() {
    let (props, law) = rod();
    let sys = RodSystem::new(&props, &law, &ZeroControl).unwrap();
    let amp = Twist::new(Vec3::new(0.4, -0.2, 0.1), Vec3::new(0.0, 0.05, 0.02));
    let w = Twist::new(Vec3::new(0.1, 0.3, 0.0), Vec3::new(0.2, 0.0, 0.1));
    let s = state(props.grid(), amp, w, Twist::zero());
    let e0 = total_energy(&s, &props, &law);
    let end = run(&sys, &s, 2e-3, 200, Scheme::Midpoint).pop().unwrap();
    assert!((total_energy(&end, &props, &law) - e0).abs() <= 1e-9 * e0);
}

#[test]
fn rigid_motion_keeps_spatial_momentum() {
    // with every section sharing one inertia operator a uniform W is an exact solution
    let (props, law) = rod_on(&ReferenceCurve::Collocated);
    let sys = RodSystem::new(&props, &law, &ZeroControl).unwrap();
    let w = TwistField::uniform(N, Twist::new(Vec3::new(0.3, -0.7, 1.1), Vec3::new(0.2, 0.1, -0.4)));
    let s = SimState::from_strain(props.grid(), exp_se3(&Twist::zero()), TwistField::zeros(N), w).unwrap();
    let p0 = spatial_momentum(&s, &props);
    let end = run(&sys, &s, 1e-3, 500, Scheme::Rk4).pop().unwrap();
    assert!((spatial_momentum(&end, &props) - p0).norm() <= 1e-8 * p0.norm());
    assert!(end.xi.max_abs() <= 1e-10);
}
