use std::path::Path;
use std::process::{Command, Output};

fn teleport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teleport"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn summary_value(text: &str, key: &str) -> f64 {
    let prefix = format!("# {key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in summary"))
        .parse()
        .unwrap()
}

#[test]
fn default_fidelity_map() {
    let o = teleport(&["fidelity-map"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x1_sigma,x2_sigma,f_alpha_lb,f_alphaprime_lb,degenerate_flag"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 201 * 201);
    let corner = rows.iter().find(|r| r.starts_with("10,10,")).unwrap();
    let f: f64 = corner.split(',').nth(2).unwrap().parse().unwrap();
    assert!(f >= 0.99, "{corner}");
}

#[test]
fn zero_time_map_is_all_degenerate() {
    let o = teleport(&["fidelity-map", "--eps-tau", "0", "--points", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 121);
    assert!(rows.iter().all(|r| r.ends_with(",,,1")));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    for (a, b, args) in [
        ("m1", "m2", vec!["fidelity-map", "--eps-tau", "3"]),
        (
            "s1",
            "s2",
            vec!["sample", "--shots", "5000", "--seed", "42"],
        ),
    ] {
        for name in [a, b] {
            let mut full = args.clone();
            let p = path(name);
            full.extend(["--out", p.as_str()]);
            assert_eq!(teleport(&full).status.code(), Some(0));
        }
        let read = |n: &str| std::fs::read(Path::new(&path(n))).unwrap();
        assert_eq!(read(a), read(b), "{args:?}");
    }
}

#[test]
fn table_at_equator() {
    let o = teleport(&["table", "--theta", "1.5707963267948966"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("kind,fock,atom2,verdict,asymptotic,exact,delta\n"));
    assert!(text.contains("\ntotal,,,unsuccessful,0.5,"));
    assert!(text.contains("\ntotal,,,successful,0.5,"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn sampled_success_frequency() {
    let o = teleport(&["sample", "--shots", "100000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let f = summary_value(&text, "success_frequency");
    assert!((f - 0.5).abs() < 0.005, "{f}");
    assert_eq!(summary_value(&text, "shots"), 1e5);
    assert!(summary_value(&text, "mean_corrected_fidelity") >= 0.99);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let ok = teleport(&[
        "verify",
        "--tau-list",
        "1,10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stderr(&ok).contains("all tolerances met"));
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.contains("time.1.eps_tau=10"));

    let small = teleport(&["verify", "--n-points", "256", "--half-width", "5"]);
    assert_eq!(small.status.code(), Some(1));
    assert!(
        stderr(&small).contains("grid too small"),
        "{}",
        stderr(&small)
    );

    let zero = teleport(&["verify", "--tau-list", "0"]);
    assert_eq!(zero.status.code(), Some(0), "{}", stderr(&zero));
}

#[test]
fn bad_input_and_unwritable_output() {
    let o = teleport(&["table", "--theta", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
    assert_eq!(teleport(&["no-such-command"]).status.code(), Some(1));

    let o = teleport(&["table", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"theta": 0.0, "shots": 300, "seed": 9}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    // θ = 0 from the file empties the (0, g) row, θ = π from a flag fills it.
    let from_file = stdout(&teleport(&["table", "--config", cfg]));
    assert!(
        from_file.contains("\nrow,0,g,unsuccessful,0,"),
        "{from_file}"
    );
    let flagged = stdout(&teleport(&[
        "table",
        "--config",
        cfg,
        "--theta",
        "3.141592653589793",
    ]));
    assert!(flagged.contains("\nrow,0,g,unsuccessful,0.5,"), "{flagged}");

    let s = stdout(&teleport(&["sample", "--config", cfg]));
    assert_eq!(summary_value(&s, "shots"), 300.0);
    assert!(s.lines().nth(1).unwrap().starts_with("9,0,"));
    let s = stdout(&teleport(&["sample", "--config", cfg, "--shots", "7"]));
    assert_eq!(summary_value(&s, "shots"), 7.0);

    let missing = teleport(&["table", "--config", "/nonexistent/run.json"]);
    assert_eq!(missing.status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), r#"{"thetta": 1}"#).unwrap();
    let bad = teleport(&[
        "table",
        "--config",
        dir.path().join("bad.json").to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(1));
}
