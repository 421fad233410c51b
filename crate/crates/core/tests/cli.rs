use std::path::Path;
use std::process::{Command, Output};

fn hawkes_agg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hawkes-agg")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by signal")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const BENCH: &str = r#"{
  "truth": {"nu": 0.5, "kernel": {"type": "exponential", "alpha": 0.5, "beta": 1.5}},
  "horizon": 80,
  "deltas": [0.5, 1.0],
  "replicates": 3,
  "methods": ["inar", "binned", "mcem", "continuous-oracle"],
  "seed": 4,
  "mcem": {"m": 5, "max_em_iters": 4},
  "mle": {"starts": 2}
}"#;

#[test]
fn bench_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bench.json", BENCH);
    let out = dir.path().join("out");
    let o = hawkes_agg(&["bench", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "records.csv",
        "records.json",
        "summary.csv",
        "summary.json",
        "boxplot_nu.svg",
        "boxplot_alpha.svg",
        "boxplot_beta.svg",
        "bias_vs_delta.svg",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let records = std::fs::read_to_string(out.join("records.csv")).unwrap();
    // 3 replicates x (2 widths x 3 binned methods + 1 oracle fit)
    assert_eq!(records.lines().count(), 1 + 3 * 7);

    // summarize regenerates the same tables from either record format.
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    for src in ["records.csv", "records.json"] {
        let again = dir.path().join(format!("again_{src}"));
        let o = hawkes_agg(
            &["summarize", "--records", out.join(src).to_str().unwrap(), "--out", again.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(std::fs::read_to_string(again.join("summary.csv")).unwrap(), summary);
        assert!(again.join("bias_vs_delta.svg").is_file());
    }
}

#[test]
fn seed_flag_controls_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.json", r#"{"params": {"nu": 1.0, "kernel": {"type": "exponential", "alpha": 0.5, "beta": 1.0}}, "horizon": 50, "bin_width": 2}"#);
    let run = |seed: &str, out: &str| {
        let o = hawkes_agg(&["simulate", "--config", &cfg, "--seed", seed, "--out", out], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(dir.path().join(out).join("events.csv")).unwrap()
    };
    let a = run("1", "a");
    assert_eq!(a, run("1", "b"));
    assert_ne!(a, run("2", "c"));
    let counts = std::fs::read_to_string(dir.path().join("a/counts.csv")).unwrap();
    assert_eq!(counts.lines().filter(|l| !l.starts_with('#')).count(), 1 + 25);
}

#[test]
fn fit_reads_raw_counts() {
    let dir = tempfile::tempdir().unwrap();
    let counts: String = std::iter::once("count".to_string())
        .chain([0, 1, 3, 0, 0, 2, 1, 1, 0, 4, 2, 0, 1, 0, 0, 1, 2, 0, 1, 1].iter().map(|c| c.to_string()))
        .collect::<Vec<_>>()
        .join("\n");
    let counts = write(dir.path(), "counts.csv", &counts);
    let cfg = write(dir.path(), "fit.json", r#"{"methods": ["binned", "mcem"], "mcem": {"m": 5, "max_em_iters": 3}}"#);
    let o = hawkes_agg(&["fit", "--config", &cfg, "--counts", &counts, "--out", "fit_out"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("fit_out/records.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("nu="));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "bad.json", &BENCH.replace("\"seed\": 4", "\"seeed\": 4"));
    let o = hawkes_agg(&["bench", "--config", &unknown], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seeed"));

    let o = hawkes_agg(&["bench", "--config", "does_not_exist.json"], dir.path());
    assert_eq!(code(&o), 2);

    let no_deltas = write(dir.path(), "nodelta.json", &BENCH.replace("[0.5, 1.0]", "[]"));
    assert_eq!(code(&hawkes_agg(&["bench", "--config", &no_deltas], dir.path())), 2);

    let not_counts = write(dir.path(), "x.csv", "a,b\n1,2\n");
    assert_eq!(code(&hawkes_agg(&["fit", "--counts", &not_counts], dir.path())), 2);
}

#[test]
fn mostly_failed_fits_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // nu this small leaves every bin empty: INAR is singular, the likelihood methods refuse.
    let cfg = write(
        dir.path(),
        "zero.json",
        r#"{"truth": {"nu": 1e-9, "kernel": {"type": "exponential", "alpha": 0.5, "beta": 1.0}},
            "horizon": 40, "deltas": [1.0], "replicates": 2}"#,
    );
    let out = dir.path().join("zero");
    let o = hawkes_agg(&["bench", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("SingularDesign=2"));
    assert!(summary.contains("AllZeroCounts=2"));

    // The same run passes with a threshold that tolerates it.
    let lenient = write(dir.path(), "lenient.json", &std::fs::read_to_string(&cfg).unwrap().replace("\"replicates\": 2", "\"replicates\": 2, \"failure_threshold\": 1.0"));
    assert_eq!(code(&hawkes_agg(&["bench", "--config", &lenient, "--out", out.to_str().unwrap()], dir.path())), 0);
}
