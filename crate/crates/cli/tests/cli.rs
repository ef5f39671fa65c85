use std::path::Path;
use std::process::{Command, Output};

use freqseg::dataset::{read_container, write_container, MotionMode};
use freqseg::field_math::RealField;

fn freqseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqseg"))
        .args(args)
        .env("FREQSEG_THREADS", "2")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = freqseg(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    freqseg(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn echoed(config: &Path, key: &str) -> String {
    std::fs::read_to_string(config)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("{key} missing from {}", config.display()))
}

#[test]
fn generate_writes_requested_shape_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("set.fsq");
    ok(&["generate", "--count", "3", "--frames", "20", "--size", "128", "--seed", "5", "--out", p(&out)]);
    let set = read_container(&out).unwrap();
    assert_eq!(set.len(), 3);
    for s in &set.sequences {
        assert_eq!(s.frames.len(), 20);
        assert!(s.frames.iter().all(|f| f.dims() == (128, 128)));
    }
    let cfg = dir.path().join("set.fsq.config");
    assert_eq!(echoed(&cfg, "seed"), "5");
    assert_eq!(echoed(&cfg, "frames"), "20");
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.fsq"), dir.path().join("b.fsq"));
    for out in [&a, &b] {
        ok(&["generate", "--count", "4", "--size", "64", "--frames", "12", "--out", p(out)]);
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn bounce_mode_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.fsq");
    ok(&["generate", "--motion", "bounce", "--count", "2", "--size", "64", "--frames", "12", "--out", p(&out)]);
    let set = read_container(&out).unwrap();
    assert!(set.sequences.iter().all(|s| s.meta.motion_mode == MotionMode::Bounce));
}

#[test]
fn flags_beat_config_file_beats_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("conf.txt");
    std::fs::write(&conf, "# small set\ncount = 3\nsize = 64\nframes = 12\nmax_speed = 2\n").unwrap();
    let out = dir.path().join("s.fsq");
    ok(&["--config", p(&conf), "generate", "--count", "2", "--out", p(&out)]);
    assert_eq!(read_container(&out).unwrap().len(), 2);
    let echo = dir.path().join("s.fsq.config");
    assert_eq!(echoed(&echo, "count"), "2");
    assert_eq!(echoed(&echo, "max_speed"), "2");
    assert_eq!(echoed(&echo, "predict_frames"), "10");

    ok(&["--config", p(&conf), "--set", "max_speed=1.5", "generate", "--out", p(&out)]);
    assert_eq!(read_container(&out).unwrap().len(), 3);
    assert_eq!(echoed(&echo, "max_speed"), "1.5");
}

#[test]
fn usage_and_io_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let missing = dir.path().join("missing.fsq");
    assert_eq!(code(&["run", "--input", p(&missing), "--out", p(&out)]), 2);
    assert_eq!(code(&["generate", "--bogus", "--out", p(&out)]), 1);
    assert_eq!(code(&["generate"]), 1);
    assert_eq!(code(&["--set", "nonsense=1", "generate", "--out", p(&out)]), 1);
    let conf = dir.path().join("bad.txt");
    std::fs::write(&conf, "colour = red\n").unwrap();
    let res = freqseg(&["--config", p(&conf), "generate", "--out", p(&out)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("bad.txt:1"));
    assert_eq!(code(&["--config", p(&missing), "generate", "--out", p(&out)]), 2);
    assert_eq!(code(&["--help"]), 0);

    let junk = dir.path().join("junk.fsq");
    std::fs::write(&junk, b"not a container").unwrap();
    assert_eq!(code(&["eval", "--input", p(&junk), "--out", p(&out)]), 2);
}

#[test]
fn nan_frames_trip_the_invariant_check() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("g.fsq");
    ok(&["generate", "--count", "1", "--size", "64", "--out", p(&good)]);
    let mut set = read_container(&good).unwrap();
    set.sequences[0].frames[5] = RealField::filled(64, 64, f64::NAN);
    let bad = dir.path().join("nan.fsq");
    write_container(&set, &bad).unwrap();
    let out = dir.path().join("e");
    assert_eq!(code(&["eval", "--input", p(&bad), "--check-invariants", "--out", p(&out)]), 3);
}

#[test]
fn static_sequence_is_predicted_closely() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("still.fsq");
    ok(&["generate", "--count", "1", "--size", "64", "--max-speed", "0", "--out", p(&set)]);
    let out = dir.path().join("run");
    let stdout = ok(&["run", "--input", p(&set), "--out", p(&out)]);
    let predicted: Vec<f64> = stdout
        .lines()
        .filter(|l| l.contains("predict"))
        .map(|l| l.rsplit(' ').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(predicted.len(), 10);
    assert!(predicted.iter().all(|&m| m < 1e-3), "{predicted:?}");
    for f in ["config.txt", "losses.txt", "montage.png", "rollout.gif", "step_002.png", "step_019.png"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
}

#[test]
fn zero_horizon_renders_seed_steps_only() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("s.fsq");
    ok(&["generate", "--count", "1", "--size", "64", "--out", p(&set)]);
    let out = dir.path().join("run");
    let stdout = ok(&["run", "--input", p(&set), "--horizon", "0", "--no-phase-filter", "--out", p(&out)]);
    assert_eq!(stdout.lines().filter(|l| l.contains("seed")).count(), 8);
    assert!(!stdout.contains("predict"));
    assert!(out.join("step_009.png").is_file());
    assert!(!out.join("step_010.png").exists());
    assert_eq!(echoed(&out.join("config.txt"), "enable_phase_filter"), "false");
    assert_eq!(echoed(&out.join("config.txt"), "predict_frames"), "0");
    let montage = image::open(out.join("montage.png")).unwrap();
    assert_eq!(montage.height(), 8 * 64 + 7 * 2);
}

#[test]
fn eval_modes() {
    let dir = tempfile::tempdir().unwrap();
    let data = ["--count", "3", "--size", "64"];

    let out = dir.path().join("oracle");
    let table = ok(&[&["eval", "--oracle", "--out", p(&out)][..], &data].concat());
    assert!(table.contains("Oracle"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let agg = &report["models"][0]["report"]["aggregate"];
    assert_eq!(agg["l1"]["mean"], 0.0);
    assert_eq!(agg["mse"]["mean"], 0.0);
    assert_eq!(agg["ssim"]["mean"], 1.0);
    assert_eq!(report["sequences"], 3);

    let out = dir.path().join("ablate");
    let table = ok(&[&["eval", "--ablate-phase-filter", "--out", p(&out)][..], &data].concat());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let names: Vec<&str> = report["models"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["Engine (phase filter)", "Engine (no phase filter)"]);
    assert!(table.contains("# of params"));
    assert_eq!(std::fs::read_to_string(out.join("report.txt")).unwrap(), table);
}
