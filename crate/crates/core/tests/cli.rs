use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn fkcftp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fkcftp"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.in.json");
    fs::write(&path, text).unwrap();
    path
}

const COUPLING: &str = r#"{"model":"fk","graph":{"kind":"torus","d":1,"L":64},"p":0.5,"q":2,
    "mode":"coupling-time","n_samples":1000,"seed":5,"stats":{"bootstrap_reps":100}}"#;

#[test]
fn run_writes_schema_and_report_matches() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), COUPLING);
    let out = tmp.path().join("run");
    let csv = tmp.path().join("ratios.csv");
    let status = fkcftp()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .arg("--csv")
        .arg(&csv)
        .args(["--threads", "1"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let text = fs::read_to_string(out.join("samples.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1000);
    for (i, line) in lines.iter().enumerate() {
        let v: Value = serde_json::from_str(line).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        for k in ["T", "W", "seed", "stream", "graph", "p", "q"] {
            assert!(keys.contains(&k), "missing {k} in {line}");
        }
        assert_eq!(v["stream"], i as u64);
        assert!(v["W"].as_u64().unwrap() <= v["T"].as_u64().unwrap());
        assert_eq!(v["graph"]["L"], 64);
    }
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mode"], "coupling-time");
    assert_eq!(summary["w_le_t_everywhere"], true);
    assert_eq!(summary["n_completed"], 1000);

    let csv_text = fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("L,sites,mean_ratio,mean_ratio_se,std_ratio,std_ratio_se\n64,64,"));

    let report = fkcftp().arg("report").arg(&out).output().unwrap();
    assert!(report.status.success(), "{}", String::from_utf8_lossy(&report.stderr));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), COUPLING);
    let mut files = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "3")] {
        let out = tmp.path().join(name);
        let st = fkcftp().arg("run").arg("--config").arg(&config).arg("--out").arg(&out).args(["--threads", threads]).output().unwrap();
        assert!(st.status.success());
        files.push((fs::read(out.join("samples.jsonl")).unwrap(), fs::read(out.join("summary.json")).unwrap()));
    }
    assert!(files[0] == files[1]);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &COUPLING.replace("1000", "20"));
    let out = tmp.path().join("s");
    assert!(fkcftp().arg("run").arg("--config").arg(&config).arg("--out").arg(&out).args(["--seed", "99"]).output().unwrap().status.success());
    let first: Value = serde_json::from_str(fs::read_to_string(out.join("samples.jsonl")).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["seed"], 99);
}

#[test]
fn invalid_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &COUPLING.replace(r#""q":2"#, r#""q":0.5"#));
    let st = fkcftp().arg("run").arg("--config").arg(&config).arg("--out").arg(tmp.path().join("x")).output().unwrap().status;
    assert_eq!(st.code(), Some(2));
    let st = fkcftp().arg("run").arg("--config").arg(tmp.path().join("missing.json")).output().unwrap().status;
    assert_eq!(st.code(), Some(2));
}

#[test]
fn step_cap_exhaustion_exits_3_and_keeps_records() {
    let tmp = tempfile::tempdir().unwrap();
    let text = COUPLING.replace(r#""seed":5"#, r#""seed":5,"step_cap":200,"max_failure_rate":0.1"#);
    let config = write_config(tmp.path(), &text);
    let out = tmp.path().join("capped");
    let st = fkcftp().arg("run").arg("--config").arg(&config).arg("--out").arg(&out).output().unwrap();
    assert_eq!(st.status.code(), Some(3));
    let text = fs::read_to_string(out.join("samples.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 1000);
    let nulls = text.lines().filter(|l| l.contains(r#""T":null"#)).count();
    assert!(nulls > 100);
    assert!(out.join("summary.json").exists());
}

#[test]
fn ising_records_carry_model() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{"model":"ising","graph":{"kind":"torus","d":1,"L":16},"beta":0.3,"mode":"coupling-time","n_samples":50,"seed":1,"stats":{"bootstrap_reps":20}}"#,
    );
    let out = tmp.path().join("i");
    assert!(fkcftp().arg("run").arg("--config").arg(&config).arg("--out").arg(&out).output().unwrap().status.success());
    let first: Value = serde_json::from_str(fs::read_to_string(out.join("samples.jsonl")).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["model"], "ising");
    assert_eq!(first["beta"], 0.3);
    assert!(first["T"].as_u64().unwrap() >= first["W"].as_u64().unwrap());
}

#[test]
fn oracle_on_four_cycle_passes() {
    let st = fkcftp().args(["oracle", "--cycle", "4", "--p", "0.5", "--q", "2"]).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let v: Value = serde_json::from_slice(&st.stdout).unwrap();
    assert_eq!(v["mode"], "exact-oracle");
    assert_eq!(v["all_passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 12);
}

#[test]
fn coupon_and_fit_gev_subcommands() {
    let st = fkcftp().args(["coupon", "--m", "50", "--samples", "500", "--seed", "3"]).output().unwrap();
    assert!(st.status.success());
    let v: Value = serde_json::from_slice(&st.stdout).unwrap();
    assert!((v["exact_mean"].as_f64().unwrap() - 224.96).abs() < 0.01);

    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("xs.txt");
    let xs: Vec<String> = (1..=400).map(|i| format!("{}", -(-((i as f64 - 0.5) / 400.0).ln()).ln())).collect();
    fs::write(&input, xs.join("\n")).unwrap();
    let out = tmp.path().join("gev.json");
    let st = fkcftp().arg("fit-gev").arg(&input).args(["--raw", "--reps", "10"]).arg("--out").arg(&out).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert!(v["xi"].as_f64().unwrap().abs() < 0.1);
    assert!(v["eta"].as_f64().unwrap().abs() < 0.1);
}

#[test]
fn autocorr_subcommand_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        r#"{"model":"fk","graphs":[{"kind":"torus","d":1,"L":20},{"kind":"torus","d":1,"L":30}],"p":0.5,"q":1,
            "coupling_samples":200,"series_runs":4,"bootstrap_reps":20,"k_grid":[0,0.5,1]}"#,
    );
    let csv = tmp.path().join("collapse.csv");
    let st = fkcftp().arg("autocorr").arg("--config").arg(&config).arg("--csv").arg(&csv).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "L,sites,k,lag,ln_rho,se");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("20,20,0,0,0,"));
}
