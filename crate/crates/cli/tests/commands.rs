use std::path::Path;
use std::process::{Command, Output};

use tptrack::model_file::read_model;

fn tptrack(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tptrack"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_fails(out: &Output, code: i32, class: &str) {
    assert_eq!(out.status.code(), Some(code), "{}", stderr(out));
    let err = stderr(out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("error[{class}]: ")), "{err}");
}

fn synth(dir: &Path, extra: &str) {
    std::fs::write(dir.join("cfg.toml"), format!("[synth]\nframe_count = 60\n{extra}")).unwrap();
    let out = tptrack(dir, &["synth", "--config", "cfg.toml", "--out", "scene.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn train_log_records_selected_count() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synth(dir, "[gmm]\nN = \"10..12\"\nrestarts = 1\n");
    let out = tptrack(dir, &["train", "--config", "cfg.toml", "--tracks", "scene.csv", "--out", "model.json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let log = std::fs::read_to_string(dir.join("model.log")).unwrap();
    let n: usize = log
        .lines()
        .find_map(|l| l.strip_prefix("selected_N "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((10..=12).contains(&n));
    assert_eq!(log.lines().filter(|l| l.starts_with("bic N=")).count(), 3);
    assert!(log.contains("iter 0 loglik "));
    assert!(log.contains("train_mean_position_error_px "));
    let model = read_model(dir.join("model.json")).unwrap();
    assert_eq!(model.component_count, n);
    assert_eq!(model.time_normalization.frame_count, 60);

    let out = tptrack(
        dir,
        &["predict", "--tracks", "scene.csv", "--model", "model.json", "--times", "-0.2,0.5,1.3", "--out", "pred.csv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let pred = std::fs::read_to_string(dir.join("pred.csv")).unwrap();
    let flags: Vec<&str> = pred.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(pred.lines().next().unwrap(), "time,x,y,angle_deg,cov_xx,cov_xy,cov_yy,extrapolated");
    assert_eq!(flags, ["1", "0", "1"]);

    let out = tptrack(dir, &["eval", "--tracks", "scene.csv", "--model", "model.json", "--split", "200/28", "--out", "r.csv"]);
    assert_fails(&out, 2, "LengthMismatch");
    let out = tptrack(dir, &["eval", "--tracks", "scene.csv", "--model", "model.json", "--split", "50/10", "--out", "r.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.join("r.summary.json").exists());
}

#[test]
fn input_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("bad.csv"), "frame,track_id\n1,a\n").unwrap();
    assert_fails(&tptrack(dir, &["train", "--tracks", "bad.csv", "--out", "m.json"]), 2, "FormatError");
    assert_fails(
        &tptrack(dir, &["eval", "--tracks", "bad.csv", "--model", "missing.json", "--split", "1/1", "--out", "r.csv"]),
        2,
        "NotFound",
    );
    assert_fails(&tptrack(dir, &["train", "--config", "nope.toml"]), 2, "NotFound");
    std::fs::write(dir.join("cfg.toml"), "[gmm]\nbogus = 1\n").unwrap();
    assert_fails(&tptrack(dir, &["train", "--config", "cfg.toml"]), 2, "ConfigError");
    assert_fails(&tptrack(dir, &["train", "--split", "x/y"]), 2, "UsageError");
    assert_fails(&tptrack(dir, &["dance"]), 2, "UsageError");
}

#[test]
fn numerical_failures_exit_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut csv = String::from("frame,track_id,role,cluster_label,x,y,visible\n");
    for f in 1..=3 {
        csv.push_str(&format!("{f},c,tool_center,,10,10,1\n{f},t,tool_tip,,10,10,1\n"));
        csv.push_str(&format!("{f},a,tissue,L,0,0,1\n{f},b,tissue,L,4,1,1\n"));
    }
    std::fs::write(dir.join("flat.csv"), csv).unwrap();
    let out = tptrack(dir, &["train", "--tracks", "flat.csv", "--out", "m.json"]);
    assert_fails(&out, 3, "DegenerateConfiguration");
}
