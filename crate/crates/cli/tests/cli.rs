use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use wk_cli::*;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> RunConfig {
    RunConfig::load(&configs().join(name)).unwrap()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("wk-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn wk(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wk")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn config_error(text: &str) -> bool {
    matches!(RunConfig::from_json(text), Err(PipelineError::Config(_)))
}

const MINIMAL: &str = r#"{"schema": 1, "potential": "x1^2", "dimension": 1,
    "domain": {"lower": [-1.0], "upper": [1.0]}, "grid": [129], "h": [0.3, 0.2], "k": 3}"#;

#[test]
fn minimal_config_takes_defaults() {
    let c = RunConfig::from_json(MINIMAL).unwrap();
    assert!(c.quasimode && c.corollary && !c.dump_vectors);
    assert_eq!(c.solver.tol, 1e-10);
    assert_eq!(c.cluster_scale, 1.0);
    assert_eq!(c.seed, 0);
}

#[test]
fn config_violations_are_config_errors() {
    let edit = |from: &str, to: &str| MINIMAL.replace(from, to);
    assert!(config_error(&edit(r#""schema": 1"#, r#""schema": 2"#)));
    assert!(config_error(&edit(r#""h": [0.3, 0.2]"#, r#""h": [0.2, 0.3]"#)));
    assert!(config_error(&edit(r#""h": [0.3, 0.2]"#, r#""h": [0.3, 0.3]"#)));
    assert!(config_error(&edit(r#""h": [0.3, 0.2]"#, r#""h": [0.3, -0.2]"#)));
    assert!(config_error(&edit(r#""h": [0.3, 0.2]"#, r#""h": []"#)));
    assert!(config_error(&edit(r#""grid": [129]"#, r#""grid": [32]"#)));
    assert!(config_error(&edit(r#""grid": [129]"#, r#""grid": [129, 129]"#)));
    assert!(config_error(&edit(r#""dimension": 1"#, r#""dimension": 3"#)));
    assert!(config_error(&edit(r#""k": 3"#, r#""k": 0"#)));
    assert!(config_error(&edit(r#""k": 3"#, r#""k": 3, "colour": "red""#)));
    assert!(config_error("{ not json"));
}

#[test]
fn stage_lists() {
    assert_eq!(parse_stages("topology,predict,solve,validate").unwrap(), ALL_STAGES.to_vec());
    assert!(parse_stages("topology,plot").is_err());
    assert_eq!(resolve_stages(&[Stage::Validate]), ALL_STAGES.to_vec());
    assert_eq!(resolve_stages(&[Stage::Solve]), vec![Stage::Topology, Stage::Solve]);
    assert_eq!(resolve_stages(&[Stage::Predict, Stage::Topology]), vec![Stage::Topology, Stage::Predict]);
}

#[test]
fn synthetic_branch_is_recovered_exactly() {
    let pts: Vec<(f64, f64)> = [0.1f64, 0.15, 0.2, 0.25, 0.3].iter().map(|&h| (h, 3.0 * h * (-2.0 / h).exp())).collect();
    let f = fit_rates(&pts, 0.0).unwrap();
    assert!((f.energy - 1.0).abs() < 1e-10, "{f:?}");
    assert!((f.gamma - 1.0).abs() < 1e-10, "{f:?}");
    assert!((f.prefactor - 3.0).abs() < 1e-10, "{f:?}");
    assert!(f.rms_log_misfit < 1e-10);
}

#[test]
fn fit_refusals() {
    let model = |h: f64| 2.0 * h.sqrt() * (-1.0 / h).exp();
    let three: Vec<_> = [0.3f64, 0.2, 0.1].iter().map(|&h| (h, model(h))).collect();
    assert_eq!(fit_rates(&three, 0.0), Err(FitError::TooFew { points: 3 }));
    let mut pts: Vec<_> = [0.3f64, 0.25, 0.2, 0.15].iter().map(|&h| (h, model(h))).collect();
    assert!(matches!(fit_rates(&pts, 1e-2), Err(FitError::BelowFloor { .. })));
    pts[3].1 = 0.0;
    assert!(matches!(fit_rates(&pts, 0.0), Err(FitError::BelowFloor { .. })));
    let same = vec![(0.2, 1e-3); 4];
    assert!(matches!(fit_rates(&same, 0.0), Err(FitError::RankDeficient { .. })));
}

proptest! {
    #[test]
    fn fit_recovers_any_model(e in 0.2f64..4.0, gamma in 0.0f64..1.5, a in 0.1f64..50.0) {
        let pts: Vec<(f64, f64)> = (0..6)
            .map(|i| 0.1 + 0.04 * i as f64)
            .map(|h| (h, a * h.powf(gamma) * (-2.0 * e / h).exp()))
            .collect();
        let f = fit_rates(&pts, 0.0).unwrap();
        prop_assert!((f.energy - e).abs() < 1e-8 * e.max(1.0));
        prop_assert!((f.gamma - gamma).abs() < 1e-7);
        prop_assert!((f.prefactor / a - 1.0).abs() < 1e-6);
    }
}

#[test]
fn double_well_report() {
    let mut cfg = load("double_well.json");
    cfg.quasimode = false;
    let r = run_pipeline(&cfg, &ALL_STAGES).unwrap();
    assert_eq!(r.status, Status::Ok);
    assert_eq!(r.topology.as_ref().unwrap().m0, 2);
    assert_eq!(r.predictions.as_ref().unwrap().predictions.len(), 2);
    assert_eq!(r.ratios.len(), cfg.h.len() * cfg.k);
    assert!(r.ratios.iter().all(|x| x.grid == cfg.grid));
    assert!(r.ratios.iter().all(|x| x.lambda_predicted.is_some() == (x.j <= 2)));
    // branches pair with the predictions by fitted (E, γ): ascending λ ↔ descending E
    assert_eq!(r.branch_matching, vec![0, 1]);
    let fit = |b: usize| r.rates.iter().find(|x| x.branch == b).unwrap().fit.unwrap();
    let (b1, b2) = (fit(1), fit(2));
    assert!((0.97..=1.03).contains(&b2.energy), "{b2:?}");
    assert!((0.8..=1.2).contains(&b2.gamma), "{b2:?}");
    assert!((3.45..=3.70).contains(&b1.energy), "{b1:?}");
    assert!(r.verdict("cluster_count").unwrap().pass);
}

#[test]
fn single_well_report() {
    let r = run_pipeline(&load("parabola.json"), &ALL_STAGES).unwrap();
    assert_eq!(r.status, Status::Ok);
    let p = r.predictions.as_ref().unwrap();
    assert_eq!(p.predictions.len(), 1);
    assert_eq!(r.rates.len(), 1);
    assert_eq!(r.quasimodes.len(), 4);
    assert!(r.verdict("quasimode_min_max").unwrap().pass);
    assert!(r.verdict("interaction_zeros").unwrap().pass);
}

#[test]
fn hypothesis_violation_short_circuits() {
    let r = run_pipeline(&load("rotated_saddle.json"), &ALL_STAGES).unwrap();
    assert_eq!(r.status, Status::HypothesisViolation);
    assert_eq!(r.exit_code(), 2);
    assert!(!r.hypotheses.as_ref().unwrap().violations.is_empty());
    assert!(r.predictions.is_none() && r.spectra.is_empty() && r.verdicts.is_empty());
    assert_eq!(r.failure.as_ref().unwrap().stage, Stage::Topology);
}

#[test]
fn degenerate_potential_is_rejected() {
    let r = run_pipeline(&load("quartic.json"), &ALL_STAGES).unwrap();
    assert_eq!(r.exit_code(), 2);
    assert!(r.failure.unwrap().message.contains("degenerate critical point"));
}

#[test]
fn k_is_checked_against_the_topology() {
    let mut cfg = load("double_well.json");
    cfg.k = 3;
    assert!(matches!(run_pipeline(&cfg, &ALL_STAGES), Err(PipelineError::Config(_))));
    // topology alone does not need k
    assert_eq!(run_pipeline(&cfg, &[Stage::Topology]).unwrap().status, Status::Ok);
}

#[test]
fn reports_are_reproducible() {
    let cfg = load("parabola.json");
    let a = serde_json::to_string(&run_pipeline(&cfg, &ALL_STAGES).unwrap()).unwrap();
    let b = serde_json::to_string(&run_pipeline(&cfg, &ALL_STAGES).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn binary_writes_the_three_outputs() {
    let out = scratch("run");
    let cfg = configs().join("parabola.json");
    let (code, _, err) = wk(&["run", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(code, 0, "{err}");
    let spectrum = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let rates = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    assert_eq!(spectrum.lines().next().unwrap(), "h,j,lambda_numeric,lambda_predicted,ratio,residual");
    assert_eq!(rates.lines().next().unwrap(), "branch,E_pred,E_fit,gamma_pred,gamma_fit,prefactor_fit,rms_log_misfit");
    assert_eq!(spectrum.lines().count(), 1 + 4 * 3);
    assert_eq!(rates.lines().count(), 2);
    // rows beyond the cluster have no prediction
    assert!(spectrum.lines().nth(2).unwrap().starts_with("0.3,2,") && spectrum.lines().nth(2).unwrap().contains(",,,"));
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.schema, 1);
    assert_eq!(report.status, Status::Ok);
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn binary_stage_subset() {
    let out = scratch("stages");
    let cfg = configs().join("parabola.json");
    let (code, _, _) = wk(&["run", "--config", path(&cfg), "--out", path(&out), "--stages", "topology,predict"]);
    assert_eq!(code, 0);
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.stages, vec![Stage::Topology, Stage::Predict]);
    assert!(report.predictions.is_some() && report.spectra.is_empty());
    assert_eq!(std::fs::read_to_string(out.join("spectrum.csv")).unwrap().lines().count(), 1);
    let (code, _, err) = wk(&["run", "--config", path(&cfg), "--out", path(&out), "--stages", "topology,plot"]);
    assert_eq!(code, 4, "{err}");
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn binary_exit_codes() {
    let out = scratch("codes");
    let (code, _, _) = wk(&["run", "--config", path(&configs().join("rotated_saddle.json")), "--out", path(&out)]);
    assert_eq!(code, 2);
    assert!(out.join("report.json").exists());
    let (code, stdout, _) = wk(&["check", "--config", path(&configs().join("rotated_saddle.json"))]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(!v["hypotheses"]["violations"].as_array().unwrap().is_empty());
    let (code, _, _) = wk(&["check", "--config", path(&configs().join("double_well.json"))]);
    assert_eq!(code, 0);
    let bad = out.join("bad.json");
    std::fs::write(&bad, r#"{"schema": 7}"#).unwrap();
    assert_eq!(wk(&["run", "--config", path(&bad)]).0, 4);
    assert_eq!(wk(&["check", "--config", path(&out.join("missing.json"))]).0, 4);
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn vector_dumps() {
    let mut cfg = load("parabola.json");
    cfg.h = vec![0.25];
    cfg.dump_vectors = true;
    let (report, artifacts) = run_with_artifacts(&cfg, &ALL_STAGES).unwrap();
    let out = scratch("dump");
    let written = write_outputs(&out, &report, &artifacts).unwrap();
    assert_eq!(written.len(), 5);
    let ev = wk_spectrum::dump::read_eigenvectors(&out.join("eigenvectors_h0.25.bin")).unwrap();
    assert_eq!(ev.len(), cfg.k);
    assert_eq!(ev[0].len(), cfg.grid[0] - 2);
    let qm = wk_quasimode::read_quasimodes(&out.join("quasimodes_h0.25.bin")).unwrap();
    assert_eq!(qm.len(), 1);
    assert_eq!(&std::fs::read(out.join("quasimodes_h0.25.bin")).unwrap()[..4], b"WKQM");
    std::fs::remove_dir_all(&out).unwrap();
}
