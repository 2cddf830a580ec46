use std::path::Path;
use std::process::{Command, Output};

fn pegasus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pegasus")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gridworld_output_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.json", r#"{"command":"gridworld","seed":3,"params":{"trials":2,"m_values":[1,5]}}"#);
    let out = stdout(&pegasus(&["--config", &cfg]));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# pegasus "));
    assert_eq!(lines[1], "# seed=3");
    assert!(lines[2].starts_with("# config={"));
    assert!(lines.iter().any(|l| l.starts_with("# opt=-9.40911")));
    let header = lines.iter().position(|l| *l == "variant,m,mean_value,stderr,trials").unwrap();
    let rows = &lines[header + 1..];
    assert_eq!(rows.len(), 4);
    for r in rows {
        let v: f64 = r.split(',').nth(2).unwrap().parse().unwrap();
        assert!(v.is_finite() && v < 0.0);
    }
}

#[test]
fn output_header_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"command":"counterexample","seed":8,"params":{"m_values":[5,50]}}"#);
    let first = dir.path().join("first.csv");
    stdout(&pegasus(&["--config", &cfg, "--out", first.to_str().unwrap()]));
    let second = dir.path().join("second.csv");
    stdout(&pegasus(&["--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]));
    let first = std::fs::read_to_string(&first).unwrap();
    let second = std::fs::read_to_string(&second).unwrap();
    let body = |s: &str| s.lines().skip(3).map(String::from).collect::<Vec<_>>();
    assert_eq!(body(&first), body(&second));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.json",
        r#"{"command":"bicycle-eval","seed":1,"params":{"rides":2,"weights":[0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]}}"#,
    );
    let out = stdout(&pegasus(&["--config", &cfg, "--seed", "99"]));
    assert!(out.contains("# seed=99\n"));
    assert!(out.contains(r#""seed":99"#));
    assert!(!out.contains(r#""seed":1,"#));
}

#[test]
fn counterexample_gap_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"command":"counterexample","seed":1,"params":{"m_values":[100]}}"#);
    let out = stdout(&pegasus(&["--config", &cfg]));
    let row = out.lines().find(|l| l.starts_with("100,")).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[2].parse::<f64>().unwrap(), 1.0);
    assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(cols[4].parse::<f64>().unwrap(), 1.0);
    assert_eq!(cols[5], "1/2");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"command":"gridworld","seed":1,"params":{"gama":0.9}}"#, "gama"),
        (r#"{"command":"bounds","seed":1,"colour":1}"#, "colour"),
        (r#"{"command":"bounds","seed":1,"params":{"delta":1.5}}"#, "delta"),
        (r#"{"command":"teleport","seed":1}"#, "teleport"),
        ("{not json", "JSON"),
    ];
    for (i, (text, key)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("{i}.json"), text);
        let o = pegasus(&["--config", &cfg]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "{text}: {err}");
        assert!(o.stdout.is_empty());
    }
    assert_eq!(pegasus(&[]).status.code(), Some(2));
    assert_eq!(pegasus(&["--config", "/no/such/config.json"]).status.code(), Some(2));
    let cfg = write(dir.path(), "ok.json", r#"{"command":"bounds","seed":1}"#);
    assert_eq!(pegasus(&["--config", &cfg, "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ok.json", r#"{"command":"bounds","seed":1}"#);
    let o = pegasus(&["--config", &cfg, "--out", "/no/such/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot write"));

    let cfg = write(
        dir.path(),
        "e.json",
        r#"{"command":"bicycle-eval","seed":1,"params":{"weights_path":"/no/such/w.csv"}}"#,
    );
    let o = pegasus(&["--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read weights"));

    let bad = write(dir.path(), "w.csv", "kind,index,value\nweight,0,1.0\n");
    let cfg = write(
        dir.path(),
        "e2.json",
        &format!(r#"{{"command":"bicycle-eval","seed":1,"params":{{"weights_path":"{bad}"}}}}"#),
    );
    assert_eq!(pegasus(&["--config", &cfg]).status.code(), Some(1));
}

#[test]
fn trained_weights_feed_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.csv");
    let cfg = write(
        dir.path(),
        "t.json",
        &format!(
            r#"{{"command":"bicycle-train","seed":2,"params":{{"training":{{"iters":20}}}},"output_path":"{}"}}"#,
            w.display()
        ),
    );
    stdout(&pegasus(&["--config", &cfg]));
    let text = std::fs::read_to_string(&w).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("weight,")).count(), 30);
    assert_eq!(text.lines().filter(|l| l.starts_with("trace,")).count(), 21);
    let weights = pegasus_cli::read_weights(&text).unwrap();
    assert!(weights.to_vec().iter().all(|x| x.is_finite()));
}
