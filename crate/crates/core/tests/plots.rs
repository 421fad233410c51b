use std::path::PathBuf;

use hawkes_agg::bench::{render_bias_vs_delta, render_boxplot, summarize, Method, RunRecord, Status, Summary};

fn fixture() -> Summary {
    let truth = [0.5, 0.9, 2.0];
    let mut records = Vec::new();
    let spread = [(Method::Inar, 0.6), (Method::Binned, 0.3), (Method::Mcem, 0.1)];
    for (m, scale) in spread {
        for delta in [0.5, 1.0, 2.0] {
            for rep in 0..6usize {
                let wobble = (rep as f64 - 2.5) / 2.5;
                let est: Vec<f64> = truth.iter().map(|t: &f64| t * (1.0 + scale * delta * (0.3 + wobble))).collect();
                let status = if m == Method::Inar && rep == 5 && delta == 2.0 { Status::Singular } else { Status::Ok };
                let failed = status.is_failure();
                records.push(RunRecord {
                    method: m,
                    delta: Some(delta),
                    replicate: rep,
                    status,
                    bias: if failed { vec![] } else { est.iter().zip(&truth).map(|(e, t)| e - t).collect() },
                    estimates: if failed { vec![] } else { est },
                    wall_time_s: 0.0,
                    error: failed.then(|| "SingularDesign".into()),
                    message: None,
                });
            }
        }
    }
    for rep in 0..6usize {
        let est: Vec<f64> = truth.iter().map(|t| t * (1.0 + 0.02 * rep as f64)).collect();
        records.push(RunRecord {
            method: Method::ContinuousOracle,
            delta: None,
            replicate: rep,
            status: Status::Ok,
            bias: est.iter().zip(&truth).map(|(e, t)| e - t).collect(),
            estimates: est,
            wall_time_s: 0.0,
            error: None,
            message: None,
        });
    }
    // One far outlier, so the boxplot has a point beyond its whiskers.
    records[3].estimates[0] = 9.0;
    records[3].bias[0] = 8.5;
    summarize(&records, &["nu".into(), "alpha".into(), "beta".into()]).unwrap()
}

fn check(name: &str, rendered: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, rendered).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == rendered, "{name} differs from {}; rerun with UPDATE_GOLDEN=1 to refresh", path.display());
}

#[test]
fn boxplot_matches_golden() {
    check("boxplot_nu.svg", &render_boxplot(&fixture(), "nu", false).unwrap());
}

#[test]
fn bias_plot_matches_golden() {
    let s = fixture();
    check("bias_vs_delta.svg", &render_bias_vs_delta(&s, false).unwrap());
    check("bias_vs_delta_log.svg", &render_bias_vs_delta(&s, true).unwrap());
}
