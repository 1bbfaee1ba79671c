use saa::cli::{cmd_align, cmd_eval, evaluate, run, Field};
use saa::io::{read_imu, read_results, read_truth, write_results, RunConfig};
use std::path::Path;

const STATIC_CFG: &str = r#"
scenario = "static"
latitude_deg = 45.0
yaw_deg = 30.0
pitch_deg = 2.0
roll_deg = -1.0
duration = 20.0
seed = 5
"#;

fn saa(args: &[&str]) -> i32 {
    run(std::iter::once("saa").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, cfg: &str) -> std::path::PathBuf {
    let cfg_path = dir.join("run.toml");
    std::fs::write(&cfg_path, cfg).unwrap();
    let out = dir.join("sim");
    assert_eq!(saa(&["simulate", "--config", s(&cfg_path), "--out", s(&out)]), 0);
    out
}

#[test]
fn simulate_writes_expected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), STATIC_CFG);
    let imu = read_imu(std::fs::File::open(out.join("imu.csv")).unwrap()).unwrap();
    let truth = read_truth(std::fs::File::open(out.join("truth.csv")).unwrap()).unwrap();
    assert_eq!(imu.len(), 2000);
    assert_eq!(truth.len(), 2001);
    let g = RunConfig::default().gravity;
    for sample in &imu {
        assert!((sample.accel.norm() - g).abs() < 1e-9);
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let cfg = format!("{STATIC_CFG}\naccel_noise_ug_sqrt_hz = 50.0\ngyro_arw_deg_sqrt_h = 0.01\n");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (oa, ob) = (simulate(a.path(), &cfg), simulate(b.path(), &cfg));
    for f in ["imu.csv", "truth.csv"] {
        assert_eq!(std::fs::read(oa.join(f)).unwrap(), std::fs::read(ob.join(f)).unwrap());
    }
}

#[test]
fn align_with_truth_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), STATIC_CFG);
    let cfg = RunConfig::parse(STATIC_CFG).unwrap();
    let out = dir.path().join("align");
    let summary = cmd_align(&sim.join("imu.csv"), Some(&sim.join("truth.csv")), Some(&cfg), &out).unwrap();
    assert_eq!(summary.snapshots, 2);
    assert!(*summary.rotation_error_deg.value().unwrap() < 0.01);
    assert_eq!(summary.convergence_time_s, Field::Value(10.0));
    assert!(out.join("summary.json").exists());
    assert_eq!(read_results(std::fs::File::open(out.join("results.csv")).unwrap()).unwrap().len(), 2);

    let no_truth = cmd_align(&sim.join("imu.csv"), None, None, &dir.path().join("nt")).unwrap();
    assert_eq!(no_truth.rotation_error_deg, Field::Unavailable("unavailable".into()));
    let json = std::fs::read_to_string(dir.path().join("nt/summary.json")).unwrap();
    assert!(json.contains("\"unavailable\""));
}

#[test]
fn eval_measures_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), STATIC_CFG);
    let out = dir.path().join("align");
    assert_eq!(saa(&["align", s(&sim.join("imu.csv")), "--out", s(&out)]), 0);
    let truth = read_truth(std::fs::File::open(sim.join("truth.csv")).unwrap()).unwrap();

    // results built straight from truth evaluate to zero error
    let exact: Vec<_> = read_results(std::fs::File::open(out.join("results.csv")).unwrap())
        .unwrap()
        .into_iter()
        .map(|mut r| {
            let rec = truth.iter().find(|t| (t.t - r.t).abs() < 1e-9).unwrap();
            r.attitude = saa::Euler::from_dcm(&rec.dcm());
            r
        })
        .collect();
    let report = evaluate(&exact, &truth).unwrap();
    for e in &report.epochs {
        assert!(e.rotation_error_deg < 1e-9);
    }

    let shifted: Vec<_> = exact
        .iter()
        .map(|r| {
            let mut r = *r;
            r.attitude.yaw += 1f64.to_radians();
            r
        })
        .collect();
    let path = dir.path().join("shifted.csv");
    write_results(std::fs::File::create(&path).unwrap(), &shifted).unwrap();
    let report = cmd_eval(&path, &sim.join("truth.csv")).unwrap();
    for e in &report.epochs {
        assert!((e.attitude_error_deg[0].abs() - 1.0).abs() < 1e-6);
        assert!((e.rotation_error_deg - 1.0).abs() < 1e-6);
    }
    assert_eq!(saa(&["eval", s(&path), "--truth", s(&sim.join("truth.csv"))]), 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(saa(&["--help"]), 0);
    assert_eq!(saa(&["align"]), 1);
    assert_eq!(saa(&["frobnicate"]), 1);

    let bad_cfg = d.join("bad.toml");
    std::fs::write(&bad_cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(saa(&["simulate", "--config", s(&bad_cfg), "--out", s(&d.join("x"))]), 1);
    assert_eq!(saa(&["simulate", "--config", s(&d.join("missing.toml")), "--out", s(&d.join("x"))]), 1);

    let bad_csv = d.join("bad.csv");
    std::fs::write(&bad_csv, "t,gx\n0,1\n").unwrap();
    assert_eq!(saa(&["align", s(&bad_csv), "--out", s(&d.join("y"))]), 2);

    let short = simulate(d, &STATIC_CFG.replace("duration = 20.0", "duration = 3.0"));
    assert_eq!(saa(&["align", s(&short.join("imu.csv")), "--out", s(&d.join("z"))]), 3);
}

#[test]
fn batch_mode_runs_each_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg_path = d.join("run.toml");
    std::fs::write(&cfg_path, format!("{STATIC_CFG}\naccel_noise_ug_sqrt_hz = 50.0\n")).unwrap();
    let sim = d.join("sim");
    let out = d.join("out");
    assert_eq!(saa(&["simulate", "--config", s(&cfg_path), "--out", s(&sim), "--seeds", "2"]), 0);
    let a = std::fs::read(sim.join("seed_000/imu.csv")).unwrap();
    let b = std::fs::read(sim.join("seed_001/imu.csv")).unwrap();
    assert_ne!(a, b);
    assert_eq!(
        saa(&["align", s(&sim), "--config", s(&cfg_path), "--out", s(&out), "--truth", s(&sim), "--seeds", "2"]),
        0
    );
    for seed in ["seed_000", "seed_001"] {
        assert!(out.join(seed).join("results.csv").exists());
    }
    assert_eq!(saa(&["eval", s(&out), "--truth", s(&sim), "--seeds", "2"]), 0);
}
