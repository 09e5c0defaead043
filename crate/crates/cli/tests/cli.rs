use std::process::{Command, Output};

fn perconet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perconet"))
        .args(args)
        .env_remove("PERCONET_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        perconet(&["theta", "--lattice", "square", "--frobnicate"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        perconet(&["theta", "--lattice", "hexagon", "--p", "0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        perconet(&["theta", "--lattice", "square", "--p", "0.5", "--phi", "0.2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        perconet(&["theta", "--lattice", "square", "--phi", "0.7"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        perconet(&["theta", "--lattice", "square"]).status.code(),
        Some(2)
    );
    assert_eq!(perconet(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_1() {
    // 4 is not a multiple of the dice pattern period.
    let o = perconet(&["transform", "--lattice", "dice", "--size", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = perconet(&["theta", "--network", "/nonexistent/net.json", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn series_prints_canonical_form() {
    let o = perconet(&[
        "series",
        "--lattice",
        "dice",
        "--strategy",
        "qep",
        "--order",
        "10",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1 - e^6 - 9*e^10");
    let o = perconet(&["series", "--lattice", "square", "--order", "7"]);
    assert_eq!(stdout(&o).trim(), "1 - e^4 - 4*e^6 + 4*e^7");
}

#[test]
fn theta_is_reproducible() {
    let args = [
        "theta",
        "--lattice",
        "square",
        "--size",
        "16",
        "--p",
        "0.5:0.7:0.1",
        "--samples",
        "300",
        "--seed",
        "5",
    ];
    let (a, b) = (perconet(&args), perconet(&args));
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(lines.next().unwrap(), "p,theta_mean,theta_stderr,n_samples");
    assert_eq!(lines.count(), 3);

    let threaded = perconet(&[&args[..], &["--threads", "2"]].concat());
    assert_eq!(
        stdout(&threaded).lines().skip(2).collect::<Vec<_>>(),
        text.lines().skip(2).collect::<Vec<_>>()
    );
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_perconet"));
        c.args([
            "theta",
            "--lattice",
            "square",
            "--size",
            "8",
            "--p",
            "0.55",
            "--samples",
            "50",
        ])
        .args(extra);
        match env {
            Some(v) => c.env("PERCONET_SEED", v),
            None => c.env_remove("PERCONET_SEED"),
        };
        stdout(&c.output().unwrap())
    };
    let from_env = run(Some("42"), &[]);
    assert!(from_env.contains("\"seed\":42"));
    assert_eq!(from_env, run(None, &["--seed", "42"]));
    assert!(run(Some("42"), &["--seed", "9"]).contains("\"seed\":9"));
}

#[test]
fn config_file_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "lattice = \"kagome\"\nsize = 8\nstrategy = \"qep\"\nphi = [0.3, 0.4]\nsamples = 40\nseed = 8\n").unwrap();
    let out = dir.path().join("res/kagome");
    let o = perconet(&[
        "theta",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--samples",
        "30",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert!(csv.contains("\n0.59999999999999998,") && csv.contains("\n0.80000000000000004,"));
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(side["config"]["samples"], 30);
    assert_eq!(side["config"]["seed"], 8);
    assert_eq!(side["config"]["lattice"], "kagome");
    assert_eq!(side["config"]["strategy"], "qep");
    assert_eq!(side["result"]["samples"], 30);
}

#[test]
fn network_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sq");
    let o = perconet(&[
        "transform",
        "--lattice",
        "square",
        "--size",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let path = dir.path().join("sq.network.json");
    let doc = std::fs::read_to_string(&path).unwrap();

    // Re-exporting an imported network gives the same document.
    let o = perconet(&["lattice", "--network", path.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim_end(), doc.trim_end());

    // The imported and generated networks give identical estimates.
    let est = |target: &[&str]| {
        let args = [
            &["theta", "--p", "0.5,0.7", "--samples", "100", "--seed", "2"][..],
            target,
        ]
        .concat();
        stdout(&perconet(&args))
            .lines()
            .skip(2)
            .map(String::from)
            .collect::<Vec<_>>()
    };
    assert_eq!(
        est(&["--network", path.to_str().unwrap()]),
        est(&["--lattice", "square", "--size", "6", "--strategy", "qep"])
    );
}

#[test]
fn quantum_verify_passes() {
    let o = perconet(&["quantum-verify", "--n-max", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().skip(2).all(|l| l.ends_with(",true")));
    assert_eq!(
        perconet(&["quantum-verify", "--n-max", "9"]).status.code(),
        Some(2)
    );
}
