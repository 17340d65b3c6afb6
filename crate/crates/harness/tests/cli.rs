use std::path::Path;
use std::process::{Command, Output};

fn edge3c(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_edge3c"));
    cmd.args(args).env_remove("EDGE3C_SEED");
    if let Some(s) = env_seed {
        cmd.env("EDGE3C_SEED", s);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const MC: &str = "sweep.values = 0.1, 0.3\nrun.evaluators = monte_carlo\nmc.trials = 3000\n";

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.cfg", MC);
    assert_eq!(edge3c(&["sweep", "--config", &ok], None).status.code(), Some(0));

    let bad_key = write(dir.path(), "key.cfg", "system.alpha = 4\nsystem.colour = red\n");
    let out = edge3c(&["sweep", "--config", &bad_key], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("system.colour"), "{err}");

    let bad_range = write(
        dir.path(),
        "range.cfg",
        "system.cache_size = 5000\nsweep.axis = latency_D\nsweep.values = 0.05\n",
    );
    assert_eq!(edge3c(&["sweep", "--config", &bad_range], None).status.code(), Some(1));
    assert_eq!(edge3c(&["sweep", "--frobnicate"], None).status.code(), Some(1));

    let missing = dir.path().join("nope.cfg");
    assert_eq!(
        edge3c(&["sweep", "--config", missing.to_str().unwrap()], None)
            .status
            .code(),
        Some(2)
    );
    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        edge3c(&["sweep", "--config", &ok, "--out", unwritable.to_str().unwrap()], None)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn seed_precedence_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let plain = write(dir.path(), "plain.cfg", MC);
    let seeded = write(dir.path(), "seeded.cfg", &format!("{MC}mc.seed = 11\n"));
    let run = |cfg: &str, flag: Option<&str>, env: Option<&str>| {
        let mut args = vec!["simulate", "--config", cfg];
        if let Some(f) = flag {
            args.extend(["--seed", f]);
        }
        let out = edge3c(&args, env);
        assert!(out.status.success());
        out.stdout
    };
    let flag11 = run(&plain, Some("11"), None);
    assert_eq!(run(&seeded, None, None), flag11);
    assert_eq!(run(&plain, None, Some("11")), flag11);
    assert_eq!(run(&seeded, None, Some("3")), flag11);
    assert_eq!(run(&seeded, Some("3"), None), run(&plain, None, Some("3")));
    assert_eq!(run(&plain, None, None), run(&plain, Some("0"), None));
    assert_ne!(run(&plain, Some("3"), None), flag11);
}

#[test]
fn subcommands_produce_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "sweep.values = 0.05, 0.1\nmc.trials = 500\n");

    let out = edge3c(&["analyze", "--config", &cfg], None);
    let text = String::from_utf8(out.stdout).unwrap();
    let evaluators: std::collections::BTreeSet<&str> =
        text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(
        evaluators.into_iter().collect::<Vec<_>>(),
        ["asymptotic", "closed_form", "monte_carlo"]
    );
    assert_eq!(text.lines().count(), 10);

    let out = edge3c(&["optimize", "--config", &cfg], None);
    let text = String::from_utf8(out.stdout).unwrap();
    let total: f64 = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .sum();
    assert_eq!(text.lines().count(), 1001);
    assert!((total - 100.0).abs() < 1e-6, "{total}");

    let out = edge3c(&["compare", "--config", &cfg], None);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "sweep_value,optimal,most_popular,uniform");
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1] <= v[2] && v[1] <= v[3], "{line}");
    }

    let path = dir.path().join("out.csv");
    let out = edge3c(
        &[
            "sweep",
            "--config",
            &cfg,
            "--out",
            path.to_str().unwrap(),
            "--threads",
            "2",
        ],
        None,
    );
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 7);
}
