use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use snake_cli::config::{ControlSection, MassModel, Scenario, ShapeChoice, VelocityChoice};
use snake_cli::run::{load_input, run_scenario, DIAGNOSTICS_FILE, MANIFEST_FILE, SNAPSHOT_FILE};
use snake_cli::snapshot::{parse_snapshots, read_diagnostics, read_snapshots};
use snake_cli::sweep::{self, Axis};
use snake_cli::{export, CliError};

const BASE: &str = r#"
[rod]
length = 1.0
n_nodes = 9
mass = { model = "uniform", density = 1.0, inertia = [2e-2, 2e-2, 1e-2] }

[stiffness]
kind = "diagonal"
bending_torsion = [1.0, 1.0, 0.4]
shear_stretch = [40.0, 40.0, 60.0]

[solver]
t_end = 0.2

[output]
directory = "out"
stride = 5
"#;

fn scenario(extra: &str) -> Scenario {
    Scenario::from_toml(&format!("{BASE}\n{extra}")).unwrap()
}

fn with_dir(mut s: Scenario, dir: &Path) -> Scenario {
    s.output.directory = dir.to_path_buf();
    s
}

fn snake(args: &[&str], root: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_snake"))
        .args(args)
        .env("SNAKE_OUTPUT_ROOT", root)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn normalized_config_round_trips() {
    let s = scenario("[control]\nkind = \"cpg\"\namplitude = 0.1\n");
    let text = s.to_toml();
    let again = Scenario::from_toml(&text).unwrap();
    assert_eq!(again, s);
    assert_eq!(again.to_toml(), text);
    // Defaults are written out.
    assert!(text.contains("cfl_number = 0.5"));
    assert!(text.contains("action_convention = \"paper-inverse\""));
}

proptest! {
    #[test]
    fn config_round_trip_for_random_values(
        n in 3usize..40,
        len in 0.1f64..10.0,
        amp in 0.0f64..1.0,
        stride in 1usize..50,
        strain in prop::array::uniform6(-2.0f64..2.0),
    ) {
        let mut s = scenario("");
        s.rod.n_nodes = n;
        s.rod.length = len;
        s.output.stride = stride;
        s.control = ControlSection::Cpg {
            amplitude: amp, frequency: 3.0, wavenumber: 1.0, component: "twist".into(), phase: 0.25,
        };
        s.initial.shape = ShapeChoice::Screw { strain };
        s.initial.velocity = VelocityChoice::Uniform { twist: strain };
        let again = Scenario::from_toml(&s.to_toml()).unwrap();
        prop_assert_eq!(again, s);
    }
}

#[test]
fn unknown_keys_are_rejected() {
    for extra in ["[solver]\ncfl = 0.3\n", "[bogus]\nx = 1\n", "[control]\nkind = \"cpg\"\namplitude = 1.0\ngain = 2.0\n"] {
        let text = format!("{BASE}\n{extra}").replace("[solver]\nt_end = 0.2\n", "");
        let err = Scenario::from_toml(&text).unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{extra}");
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn missing_stiffness_key_is_named() {
    let text = BASE.replace("shear_stretch = [40.0, 40.0, 60.0]\n", "");
    let err = Scenario::from_toml(&text).unwrap_err().to_string();
    assert!(err.contains("shear_stretch"), "{err}");
}

#[test]
fn unit_suffixed_values_are_rejected() {
    let err = Scenario::from_toml(&BASE.replace("length = 1.0", "length = \"1 m\"")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn model_checks_run_on_load() {
    let neg = scenario("").to_toml().replace("density = 1.0", "density = -1.0");
    let err = Scenario::from_toml(&neg).unwrap().build().unwrap_err().to_string();
    assert!(err.contains("rod.mass"), "{err}");

    let mut s = scenario("");
    s.rod.mass = MassModel::Uniform { density: 1.0, inertia: [1.0, -1.0, 1.0] };
    assert!(s.build().is_err());

    let bad_k = BASE.replace("bending_torsion = [1.0, 1.0, 0.4]", "bending_torsion = [1.0, 0.0, 0.4]");
    let err = Scenario::from_toml(&bad_k).unwrap().build().unwrap_err().to_string();
    assert!(err.contains("stiffness"), "{err}");

    let bad_conv = scenario("[conventions]\naction_convention = \"sideways\"\n");
    assert!(bad_conv.build().unwrap_err().to_string().contains("action_convention"));
    let bad_comp = scenario("[control]\nkind = \"cpg\"\namplitude = 1.0\ncomponent = \"wiggle\"\n");
    assert!(bad_comp.build().is_err());
}

#[test]
fn full_stiffness_matches_diagonal_for_collocated_rod() {
    let diag = scenario("").to_toml().replace("[rod.reference_curve]\nkind = \"straight\"", "[rod.reference_curve]\nkind = \"collocated\"");
    let d = Scenario::from_toml(&diag).unwrap();
    // At p0 = 0 the force rows read the shear/stretch strain and the moment
    // rows read the curvature.
    let mut m = vec![0.0; 36];
    for (k, v) in [40.0, 40.0, 60.0].iter().enumerate() {
        m[6 * k + 3 + k] = *v;
    }
    for (k, v) in [1.0, 1.0, 0.4].iter().enumerate() {
        m[6 * (3 + k) + k] = *v;
    }
    let list = m.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ");
    let full_text = diag.replace(
        "kind = \"diagonal\"\nbending_torsion = [1.0, 1.0, 0.4]\nshear_stretch = [40.0, 40.0, 60.0]",
        &format!("kind = \"full\"\nmatrix = [{list}]"),
    );
    let f = Scenario::from_toml(&full_text).unwrap();
    let (md, mf) = (d.build().unwrap(), f.build().unwrap());
    for i in 0..9 {
        assert_eq!(md.law.matrix(i), mf.law.matrix(i));
    }
}

#[test]
fn rest_scenario_produces_constant_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let s = with_dir(scenario(""), tmp.path());
    let r = run_scenario(&s, tmp.path()).unwrap();
    assert_eq!(r.final_energy, 0.0);
    let snaps = read_snapshots(&tmp.path().join(SNAPSHOT_FILE)).unwrap();
    assert!(snaps.len() > 2);
    for rec in &snaps[1..] {
        assert_eq!(rec.nodes, snaps[0].nodes);
    }
    assert!(tmp.path().join(MANIFEST_FILE).exists());
}

#[test]
fn snapshots_round_trip_through_the_reader() {
    let tmp = tempfile::tempdir().unwrap();
    let s = with_dir(scenario("[initial]\nshape = { kind = \"screw\", strain = [1.0, 0.3, 0.5, 0.0, 0.1, 0.0] }\n"), tmp.path());
    run_scenario(&s, tmp.path()).unwrap();
    let path = tmp.path().join(SNAPSHOT_FILE);
    let text = std::fs::read_to_string(&path).unwrap();
    let snaps = parse_snapshots(text.as_bytes(), "snapshots").unwrap();
    let mut again = String::from(snake_cli::snapshot::SNAPSHOT_HEADER);
    again.push('\n');
    for r in &snaps {
        again.push_str(&r.to_csv_rows());
    }
    assert_eq!(again, text);
    for r in &snaps {
        for n in &r.nodes {
            let q = n.q.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((q - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn snapshot_reader_rejects_bad_quaternions() {
    let mut row = vec!["0e0", "0", "0e0", "2e0"];
    row.extend(std::iter::repeat_n("0e0", 21));
    let text = format!("{}\n{}\n", snake_cli::snapshot::SNAPSHOT_HEADER, row.join(","));
    assert!(parse_snapshots(text.as_bytes(), "x").is_err());
}

#[test]
fn export_writes_documented_columns() {
    let tmp = tempfile::tempdir().unwrap();
    // 40 steps with stride 5: 9 energy rows.
    let text = scenario("").to_toml().replace("t_end = 0.2", "t_end = 0.02\ndt = 5e-4");
    let s = with_dir(Scenario::from_toml(&text).unwrap(), tmp.path());
    let r = run_scenario(&s, tmp.path()).unwrap();
    assert_eq!(r.n_steps, 40);
    let e = export::export(tmp.path(), 3).unwrap();
    assert_eq!(e.energy_rows, r.n_steps / 5 + 1);
    let energy = std::fs::read_to_string(e.directory.join(export::ENERGY_FILE)).unwrap();
    let mut lines = energy.lines();
    assert!(lines.next().unwrap().starts_with("# t kinetic elastic total"));
    assert_eq!(lines.count(), 9);
    assert_eq!(e.centerline_files.len(), 3);
    let c = std::fs::read_to_string(&e.centerline_files[0]).unwrap();
    assert!(c.starts_with("# z px py pz"));
    assert_eq!(c.lines().count(), 10);
    assert_eq!(read_diagnostics(&tmp.path().join(DIAGNOSTICS_FILE)).unwrap().len(), 9);
}

#[test]
fn amplitude_sweep_shows_no_motion_without_actuation() {
    let tmp = tempfile::tempdir().unwrap();
    let s = with_dir(scenario("[control]\nkind = \"cpg\"\namplitude = 0.0\n"), tmp.path());
    let axes = vec!["control.amplitude=0:0.1:2".parse::<Axis>().unwrap()];
    let out = sweep::sweep(&s, &axes).unwrap();
    assert_eq!(out.points.len(), 2);
    let first = out.points[0].1.as_ref().unwrap();
    assert_eq!(first.mean_forward_displacement, 0.0);
    assert_eq!(first.final_energy, 0.0);
    let second = out.points[1].1.as_ref().unwrap();
    assert!(second.final_energy > 0.0);
    let summary = std::fs::read_to_string(&out.summary_path).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.starts_with("point,control.amplitude,final_energy"));
}

#[test]
fn one_point_sweep_matches_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let s = with_dir(scenario("[control]\nkind = \"cpg\"\namplitude = 0.05\n"), &tmp.path().join("sweep"));
    let axes = vec!["control.amplitude=0.05:1:1".parse::<Axis>().unwrap()];
    let out = sweep::sweep(&s, &axes).unwrap();
    let point_dir = &out.points[0].0.directory;
    let single = tmp.path().join("single");
    run_scenario(&with_dir(s.clone(), &single), &single).unwrap();
    let a = std::fs::read(point_dir.join(SNAPSHOT_FILE)).unwrap();
    let b = std::fs::read(single.join(SNAPSHOT_FILE)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn two_axis_sweep_and_bad_axes() {
    let s = scenario("[control]\nkind = \"cpg\"\namplitude = 0.0\n");
    let axes = vec![
        "control.amplitude=0:0.1:3".parse::<Axis>().unwrap(),
        "rod.n_nodes=5:9:2".parse::<Axis>().unwrap(),
    ];
    let pts = sweep::expand(&s, &axes).unwrap();
    assert_eq!(pts.len(), 6);
    assert_eq!(pts[5].scenario.rod.n_nodes, 9);
    assert!("nokey".parse::<Axis>().is_err());
    assert!("a=1:2".parse::<Axis>().is_err());
    let bad = vec!["rod.n_nodes=5.5:6:1".parse::<Axis>().unwrap()];
    assert!(sweep::expand(&s, &bad).is_err());
    let missing = vec!["nothing.here=0:1:2".parse::<Axis>().unwrap()];
    assert!(sweep::expand(&s, &missing).is_err());
}

#[test]
fn file_initial_conditions_restart_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let s = with_dir(scenario("[initial]\nshape = { kind = \"screw\", strain = [0.5, 0.0, 0.2, 0.0, 0.0, 0.0] }\n"), &first);
    run_scenario(&s, &first).unwrap();
    let snap = first.join(SNAPSHOT_FILE).display().to_string();
    let extra = format!(
        "[initial]\nshape = {{ kind = \"file\", path = {snap:?} }}\nvelocity = {{ kind = \"file\", path = {snap:?} }}\n"
    );
    let s2 = scenario(&extra);
    let m = s2.build().unwrap();
    let last = read_snapshots(&first.join(SNAPSHOT_FILE)).unwrap().pop().unwrap();
    for (i, n) in last.nodes.iter().enumerate() {
        assert_eq!(m.initial.w[i].to_array(), n.w);
    }
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let ok = write(root, "ok.toml", BASE);
    let (code, stdout, _) = snake(&["run", ok.to_str().unwrap()], root);
    assert_eq!(code, 0);
    assert!(stdout.contains("outputs"));
    assert!(root.join("out").join(SNAPSHOT_FILE).exists());

    // The manifest alone reproduces the run.
    let manifest = root.join("out").join(MANIFEST_FILE);
    let before = std::fs::read(root.join("out").join(SNAPSHOT_FILE)).unwrap();
    assert_eq!(load_input(&manifest).unwrap().rod.n_nodes, 9);
    assert_eq!(snake(&["run", manifest.to_str().unwrap()], root).0, 0);
    assert_eq!(std::fs::read(root.join("out").join(SNAPSHOT_FILE)).unwrap(), before);

    let bad = write(root, "bad.toml", &BASE.replace("[stiffness]", "[stiffnes]"));
    let (code, _, stderr) = snake(&["run", bad.to_str().unwrap()], root);
    assert_eq!(code, 2, "{stderr}");

    let blow = write(root, "blow.toml", &BASE.replace("t_end = 0.2", "t_end = 0.5\ndt = 0.05").replace(
        "[solver]",
        "[initial]\nshape = { kind = \"screw\", strain = [2.0, 0.0, 1.0, 0.0, 0.0, 0.0] }\n\n[solver]",
    ));
    let (code, _, stderr) = snake(&["run", blow.to_str().unwrap()], root);
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.contains("non-finite"), "{stderr}");

    assert_eq!(snake(&["verify", "algebra"], root).0, 0);
    let (code, stdout, _) = snake(&["verify", "algebra", "--inject-bracket-error"], root);
    assert_eq!(code, 4);
    assert!(stdout.contains("FAIL"));
    assert_eq!(snake(&["verify", "nonsense"], root).0, 2);
    assert_eq!(snake(&["export", root.join("out").to_str().unwrap()], root).0, 0);
    assert_eq!(snake(&["export", root.join("nowhere").to_str().unwrap()], root).0, 1);
}
