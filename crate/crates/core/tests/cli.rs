use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use falsur::experiment::ROW_HEADER;

fn falsur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_falsur"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// `rows.csv` without the wall time column.
fn rows_without_time(dir: &Path) -> String {
    fs::read_to_string(dir.join("rows.csv"))
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n")
        .collect()
}

fn campaign(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "campaign",
        "--model",
        "heat2r",
        "--reps",
        "4",
        "--max",
        "40",
        "--seed",
        "10",
        "--strategy",
        "random",
    ];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    falsur(&args)
}

#[test]
fn help_and_listing_exit_zero() {
    assert_eq!(code(&falsur(&["--help"])), 0);
    let o = falsur(&["benchmarks"]);
    assert_eq!(code(&o), 0);
    for id in falsur::model::benchmarks::IDS {
        assert!(stdout(&o).contains(id));
    }
}

#[test]
fn usage_and_config_errors_exit_one() {
    assert_eq!(code(&falsur(&["frobnicate"])), 1);
    assert_eq!(code(&falsur(&["falsify"])), 1);
    assert_eq!(code(&falsur(&["falsify", "--model", "nope"])), 1);
    assert_eq!(
        code(&falsur(&[
            "falsify",
            "--model",
            "heat2r",
            "--strategy",
            "random",
            "--max",
            "0"
        ])),
        1
    );
    assert_eq!(
        code(&falsur(&[
            "aristeo",
            "--model",
            "heat2r",
            "--strategy",
            "random",
            "--structure",
            "oe"
        ])),
        1
    );
    let o = falsur(&[
        "falsify",
        "--model",
        "heat2r",
        "--strategy",
        "random",
        "--stl",
        "G[0,100] (t1 > 0)",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("horizon"), "{}", stderr(&o));
    let o = falsur(&[
        "falsify",
        "--model",
        "heat2r",
        "--strategy",
        "random",
        "--stl",
        "G[0,5] (speed > 0)",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("speed"));
    let o = falsur(&["campaign", "--model", "heat2r", "--reps", "2"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("strategy"), "{}", stderr(&o));
}

#[test]
fn report_on_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = falsur(&["report", "--out", dir.path().to_str().unwrap()]);
    assert_ne!(code(&o), 0);
    assert!(stderr(&o).contains("no runs"), "{}", stderr(&o));
}

#[test]
fn campaign_writes_one_row_per_repetition() {
    let dir = tempfile::tempdir().unwrap();
    let o = campaign(dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], ROW_HEADER);
    assert_eq!(lines.len(), 5);
    for (i, l) in lines[1..].iter().enumerate() {
        assert!(l.starts_with(&format!("{},baseline,", 10 + i)), "{l}");
    }
    assert!(dir.path().join("config.toml").is_file());
    assert!(dir.path().join("summary.json").is_file());
    for seed in 10..14 {
        assert!(dir
            .path()
            .join(format!("runs/seed-{seed}/history.csv"))
            .is_file());
    }
}

#[test]
fn campaigns_are_reproducible() {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    let surrogate = ["--mode", "surrogate", "--max-ref", "4"];
    assert_eq!(code(&campaign(a.path(), &surrogate)), 0);
    assert_eq!(code(&campaign(b.path(), &surrogate)), 0);
    let mut parallel = surrogate.to_vec();
    parallel.push("--parallel");
    assert_eq!(code(&campaign(c.path(), &parallel)), 0);
    assert_eq!(rows_without_time(a.path()), rows_without_time(b.path()));
    assert_eq!(rows_without_time(a.path()), rows_without_time(c.path()));
}

#[test]
fn replay_reproduces_a_row_and_flags_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&campaign(dir.path(), &["--mode", "surrogate"])), 0);
    let o = falsur(&["replay", "--out", d, "--seed", "12"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("replayed: 12,surrogate,"));

    let rows = fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    let tampered: String = rows
        .lines()
        .map(|l| {
            let mut f: Vec<String> = l.split(',').map(String::from).collect();
            if f[0] == "12" {
                f[4] = "99".into();
            }
            f.join(",") + "\n"
        })
        .collect();
    fs::write(dir.path().join("rows.csv"), tampered).unwrap();
    assert_eq!(code(&falsur(&["replay", "--out", d, "--seed", "12"])), 2);
}

#[test]
fn report_lists_failing_inputs_and_histories() {
    let dir = tempfile::tempdir().unwrap();
    let o = campaign(dir.path(), &["--stl", "G[0,24] (t1 > 0)"]);
    assert_eq!(code(&o), 0);
    let o = falsur(&["report", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("effectiveness:                  1.000"),
        "{out}"
    );
    assert!(out.contains("runs/seed-10/failing_input.csv"), "{out}");
    let hist = fs::read_to_string(dir.path().join("histories.csv")).unwrap();
    assert!(hist.starts_with("seed,iteration,objective\n10,1,"));
}

#[test]
fn crash_leaves_completed_rows_readable() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&campaign(dir.path(), &[])), 0);
    let path = dir.path().join("rows.csv");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("14,baseline,viol");
    fs::write(&path, text).unwrap();
    let o = falsur(&["report", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("runs:                           4"));
}

#[test]
fn single_runs_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = falsur(&[
        "aristeo",
        "--model",
        "satlite",
        "--seed",
        "2",
        "--max-ref",
        "10",
        "--strategy",
        "random",
        "--out",
        d,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("iter  1:"));
    assert!(dir.path().join("aristeo_log.csv").is_file());
    assert!(dir.path().join("report.json").is_file());
    let o = falsur(&[
        "falsify",
        "--model",
        "heat2r",
        "--stl",
        "G[0,24] (t1 > 0)",
        "--strategy",
        "annealing",
        "--out",
        d,
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("violation found after 1 executions"));
    assert!(dir.path().join("failing_input.csv").is_file());
}

#[test]
fn sweep_marks_the_front() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        "variants = [{ structure = \"arx\", orders = [1, 1, 1] }, { structure = \"ss\", orders = [2] }]\n\n\
         [base]\nmodel = \"heat2r\"\nmode = \"surrogate\"\nstrategy = \"random\"\nreps = 2\nmax_ref = 3\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = falsur(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("arx,\"1,1,1\","));
    assert!(lines.iter().any(|l| l.ends_with(",true")));
    assert!(out.join("ss-2/rows.csv").is_file());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        if path.to_string_lossy().contains("sweep") {
            let c: falsur::experiment::SweepConfig = toml::from_str(&text).unwrap();
            c.base.resolve().unwrap();
        } else {
            falsur::experiment::ExperimentConfig::from_toml(&text)
                .unwrap()
                .resolve()
                .unwrap();
        }
    }
}
