use std::path::Path;
use std::process::{Command, Output};

fn crnoma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crnoma"))
        .args(args)
        .env_remove("CRNOMA_THREADS")
        .output()
        .expect("spawn crnoma")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let line = err.lines().last().expect("stderr line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not JSON: {line}: {e}"))
}

#[test]
fn analytic_sweep_to_stdout() {
    let o = crnoma(&["sweep", "--axis", "transmit_snr_db", "--values", "20", "--users", "1", "-q"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "axis,user,mode,op,ci,flags");
    assert!(lines[1].starts_with("20,1,analytic,0.259"));
}

#[test]
fn montecarlo_sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let gp = dir.path().join("out.gp");
    let o = crnoma(&[
        "sweep", "--axis", "transmit_snr_db", "--values", "10,30", "--mode", "both",
        "--trials", "5000", "--seed", "3", "--out", csv.to_str().unwrap(),
        "--plot", gp.to_str().unwrap(), "--joint-sic",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    // 2 values x 2 users x {analytic, montecarlo, montecarlo-joint}
    assert_eq!(text.lines().count(), 1 + 12);
    assert!(text.contains(",montecarlo-joint,"));
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(script.contains("set output 'out.png'"));
    assert!(script.contains("set logscale y"));
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_crnoma"))
            .args(["sweep", "--axis", "phi", "--values", "0,0.1", "--mode", "montecarlo"])
            .args(["--trials", "20000", "--seed", "11", "-q"])
            .env("CRNOMA_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        o.stdout
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(one, run("8"));
}

#[test]
fn figure_preset_sweep() {
    let o = crnoma(&["sweep", "--figure", "fig4", "--values", "30", "-q"]);
    assert!(o.status.success());
    let out = stdout(&o);
    // ten U1 curves, one value
    assert_eq!(out.lines().count(), 11);
    assert!(out.contains("series=noma/theta=0.1"));
}

#[test]
fn config_round_trip_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("baseline.toml");
    let o = crnoma(&["preset", "baseline", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let o = crnoma(&["validate", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "ok");

    let from_file = crnoma(&["sweep", "--config", path.to_str().unwrap(), "--axis", "p_t_db", "--values", "10", "-q"]);
    let from_preset = crnoma(&["sweep", "--preset", "baseline", "--axis", "p_t_db", "--values", "10", "-q"]);
    assert_eq!(from_file.stdout, from_preset.stdout);
}

#[test]
fn invalid_config_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(write_preset(dir.path())).unwrap();
    std::fs::write(&path, text.replace("alpha = [0.8, 0.2]", "alpha = [0.7, 0.2]")).unwrap();
    let o = crnoma(&["validate", path.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = error_json(&o);
    assert_eq!(err["error"], "invalid_config");
    assert!(err["message"].as_str().unwrap().contains("alpha"));
}

fn write_preset(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("base.toml");
    let o = crnoma(&["preset", "baseline", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    path
}

#[test]
fn errors_are_machine_readable() {
    let o = crnoma(&["sweep", "--axis", "transmit_snr_db", "--values", ""]);
    assert_eq!(error_json(&o)["error"], "invalid_sweep");

    let o = crnoma(&["sweep", "--axis", "transmit_snr_db", "--values", "10", "--mode", "montecarlo", "--trials", "10"]);
    assert_eq!(error_json(&o)["error"], "invalid_sweep");

    let o = crnoma(&["sweep", "--axis", "gain", "--values", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "usage");

    let o = crnoma(&["preset", "nope"]);
    assert_eq!(error_json(&o)["error"], "unknown_preset");

    let o = crnoma(&["validate", "/nonexistent/x.toml"]);
    assert_eq!(error_json(&o)["error"], "io");

    let o = crnoma(&["sweep", "--axis", "transmit_snr_db", "--values", "10", "--users", "3"]);
    assert_eq!(error_json(&o)["error"], "user_out_of_range");
}

#[test]
fn realizations_dump() {
    let o = crnoma(&["realizations", "--count", "5", "--seed", "2", "--snr-db", "20"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "trial,x,y,z,v,q1,w1,q2,w2,p_s,p_r");
    assert_eq!(lines.len(), 6);
    let again = crnoma(&["realizations", "--count", "5", "--seed", "2", "--snr-db", "20"]);
    assert_eq!(o.stdout, again.stdout);
}
