use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn quizsim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quizsim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QUIZSIM_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn table_check_passes_with_default_chain() {
    let dir = tempfile::tempdir().unwrap();
    let o = quizsim(&["table", "--check"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("entries: 625"));
    assert!(stdout.contains("min / median / max"));
    let csv = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 626);
    assert!(dir.path().join("fig2.meta.json").exists());
}

#[test]
fn validation_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&quizsim(&["table", "--n", "1"], dir.path())), 1);
    assert_eq!(
        code(&quizsim(
            &["table", "--bmin", "1", "--bmax", "0"],
            dir.path()
        )),
        1
    );
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"sites": 4}"#).unwrap();
    assert_eq!(
        code(&quizsim(
            &["table", "--config", cfg.to_str().unwrap()],
            dir.path()
        )),
        1
    );
}

#[test]
fn io_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(
        code(&quizsim(
            &["table", "--config", missing.to_str().unwrap()],
            dir.path()
        )),
        2
    );
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    assert_eq!(
        code(&quizsim(&["table", "--n", "2", "--d", "2"], &blocker)),
        2
    );
}

#[test]
fn failed_check_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // the default chain misses the reference angle error at this noise level
    let args = ["noise", "--eps", "0.05", "--trials", "5"];
    assert_eq!(code(&quizsim(&args, dir.path())), 0);
    let checked: Vec<&str> = args.iter().copied().chain(["--check"]).collect();
    let o = quizsim(&checked, dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] chi error at eps = 0.05"));
}

#[test]
fn config_file_and_flags_combine_per_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n": 3, "d": 2, "bmin": -1.0}"#).unwrap();
    let o = quizsim(
        &["table", "--config", cfg.to_str().unwrap(), "--d", "3"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    // n from the file, d from the flag
    let csv = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 27);
    let meta = fs::read_to_string(dir.path().join("fig2.meta.json")).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(meta["n"], 3);
    assert_eq!(meta["d"], 3);
    assert_eq!(meta["bmin"], -1.0);
    assert_eq!(meta["bmax"], 0.5);
}

#[test]
fn single_level_grid_gives_one_row_with_zero_angle() {
    let dir = tempfile::tempdir().unwrap();
    let o = quizsim(&["table", "--d", "1"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let fields: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(fields[0], "0");
    assert_eq!(fields[2].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn noise_metadata_records_distribution_and_trials() {
    let dir = tempfile::tempdir().unwrap();
    let o = quizsim(
        &["noise", "--n", "2", "--d", "3", "--trials", "4"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let meta = fs::read_to_string(dir.path().join("noise.meta.json")).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(meta["trials"], 4);
    assert_eq!(meta["noise_distribution"], "uniform(-epsilon, epsilon)");
    assert!(meta.get("threads").is_none());
}

#[test]
fn outputs_are_identical_across_thread_counts() {
    let runs: [&[&str]; 4] = [
        &["table"],
        &["sweep"],
        &["noise", "--trials", "20"],
        &["measure", "--n", "3", "--trials", "200"],
    ];
    for args in runs {
        let one = tempfile::tempdir().unwrap();
        let many = tempfile::tempdir().unwrap();
        let a: Vec<&str> = args.iter().copied().chain(["--threads", "1"]).collect();
        let b: Vec<&str> = args.iter().copied().chain(["--threads", "4"]).collect();
        assert_eq!(code(&quizsim(&a, one.path())), 0);
        assert_eq!(code(&quizsim(&b, many.path())), 0);
        for entry in fs::read_dir(one.path()).unwrap() {
            let name = entry.unwrap().file_name();
            let x = fs::read(one.path().join(&name)).unwrap();
            let y = fs::read(many.path().join(&name)).unwrap();
            assert!(x == y, "{args:?}: {name:?} differs between 1 and 4 threads");
        }
    }
}

#[test]
fn threads_env_var_is_accepted_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: &str, extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_quizsim"))
            .args(["table", "--n", "2", "--d", "2"])
            .args(extra)
            .arg("--out")
            .arg(dir.path())
            .env("QUIZSIM_THREADS", env)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("2", &[])), 0);
    assert_eq!(code(&run("lots", &[])), 1);
    assert_eq!(code(&run("lots", &["--threads", "1"])), 0);
}
