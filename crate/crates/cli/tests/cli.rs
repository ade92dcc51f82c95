use std::path::Path;
use std::process::{Command, Output};

fn potc(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_potc"));
    cmd.args(args).env_remove("POTC_OUT_DIR");
    if let Some(dir) = out_env {
        cmd.env("POTC_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = potc(
        &["simulate", "--game", "II", "--forecaster", "potc-cal", "--nature", "greedy", "--m", "5",
          "--max-t", "10000", "--seeds", "0..2", "--out", out],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("eps_ce slope"));
    let csv = std::fs::read_to_string(dir.path().join("II_potc-cal_greedy_m5.csv")).unwrap();
    assert!(csv.starts_with("game,forecaster,nature,m,seed,T,ce,eps_ce\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 13);
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("II_potc-cal_greedy_m5.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["config"]["m"], 5);
    assert!(json["checkpoints"].as_array().unwrap().len() == 13);
    assert!(json["eps_ce_rate"]["kind"].is_string());

    let o = potc(&["rate", dir.path().join("II_potc-cal_greedy_m5.csv").to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("II potc-cal vs greedy m=5: eps_ce slope"));
}

#[test]
fn env_var_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = potc(
        &["simulate", "--game", "I", "--forecaster", "pi-f99", "--nature", "bernoulli:0.3",
          "--m", "4", "--max-t", "2000", "--seeds", "1,2", "--t0", "100", "--kk-scale", "0.1"],
        Some(dir.path()),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("I_pi-f99_bernoulli-0.3_m4.csv").exists());
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cases: [(&[&str], &str); 4] = [
        (&["simulate", "--game", "II", "--forecaster", "potc-call", "--nature", "greedy", "--m", "5", "--out", out], "valid options"),
        (&["simulate", "--game", "I", "--forecaster", "potc-cal", "--nature", "greedy", "--m", "5", "--out", out], "game II"),
        (&["simulate", "--game", "II", "--forecaster", "potc-cal", "--nature", "greedy", "--m", "1", "--out", out], "m = 1"),
        (&["simulate", "--game", "III", "--forecaster", "potc-cal", "--nature", "greedy", "--m", "5", "--out", out], "II-bounded"),
    ];
    for (args, needle) in cases {
        let o = potc(args, None);
        assert!(!o.status.success());
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
    }
    let o = potc(&["rate", dir.path().join("missing.csv").to_str().unwrap()], None);
    assert!(!o.status.success());
    let o = potc(&["approach", "--m", "5"], None);
    assert!(!o.status.success());
}

#[test]
fn approach_reports_values() {
    let o = potc(&["approach", "--m", "3", "--q", "-2,2,1", "--witness", "--minimal"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["direction"]["val"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["direction"]["x_star"], serde_json::json!([1, 2]));
    assert_eq!(v["witness"]["holds"], true);
    assert_eq!(v["witness"]["x_star"], serde_json::json!([2, 3]));
    assert_eq!(v["minimal"]["certified"], true);

    let o = potc(&["approach", "--m", "4", "--response", "0.6"], None);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["response"]["l1_norm"].as_f64().unwrap() <= 0.125);
}

#[test]
fn sweep_runs_every_matchup() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    std::fs::write(
        &cfg,
        "# two natures, two grids\ngame = II-bounded\nforecaster = potc-cal\nnature = uniform-v, probe:0.01\nm = 2, 5\nmax_t = 3000\nseeds = 0..3\n",
    )
    .unwrap();
    let out = dir.path().join("res");
    let o = potc(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let csvs = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 4);

    std::fs::write(&cfg, "game = II\nforecaster = potc-cal\nnature = greedy\nm = 5\nmax_t = 100\ncolour = red\n").unwrap();
    let o = potc(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("colour"));
}
