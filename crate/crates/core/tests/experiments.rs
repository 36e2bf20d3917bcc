use flowmech::experiments::{
    sweep_probability, sweep_users, verify, write_csv, ExperimentConfig, Outcome, Scheme, SweepKind,
};
use flowmech::Execution;

fn small() -> ExperimentConfig {
    ExperimentConfig { n_range: [2, 6], ..Default::default() }
}

fn csv_of(cfg: &ExperimentConfig) -> String {
    let mut buf = Vec::new();
    write_csv(&sweep_users(cfg).unwrap(), SweepKind::Users, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn sweep_output_is_identical_across_execution_modes() {
    let seq = csv_of(&ExperimentConfig { execution: Execution::Sequential, ..small() });
    let par = csv_of(&ExperimentConfig { execution: Execution::Parallel, ..small() });
    assert_eq!(seq, par);
    assert_eq!(seq, csv_of(&small()));
    assert!(seq.starts_with("n,scheme,V0,thr_low,thr_high,delay_low,delay_high,stable,ic\n"));
    assert_eq!(seq.lines().count(), 1 + 5 * Scheme::ALL.len());
}

#[test]
fn probability_sweep_endpoints_collapse_to_known_values() {
    let cfg = ExperimentConfig {
        n_fixed: 3,
        p_step: 0.25,
        schemes: vec![Scheme::Compliant, Scheme::Apriori],
        ..Default::default()
    };
    let rows = sweep_probability(&cfg).unwrap();
    assert_eq!(rows.len(), 5 * 2);
    for pair in rows.chunks(2) {
        assert!(pair[0].v0 >= pair[1].v0 - 1e-12);
    }
    for p in [0.0, 1.0] {
        let at: Vec<_> = rows.iter().filter(|r| r.p_low == Some(p)).collect();
        assert!((at[0].v0 - at[1].v0).abs() < 1e-9, "endpoint {p}");
    }
}

#[test]
fn config_rejects_unknown_and_invalid_fields() {
    assert!(ExperimentConfig::from_json("{\"mu\": 5, \"bogus\": 1}").is_err());
    assert!(ExperimentConfig::from_json("{\"grid_points\": 10}").is_err());
    assert!(ExperimentConfig::from_json("{\"types\": [0.1, 1], \"probs\": [0.2, 0.2]}").is_err());
    let cfg = ExperimentConfig::from_json("{\"n_range\": [3, 4], \"schemes\": [\"bne\", \"ne\"]}").unwrap();
    assert_eq!(cfg.users(), vec![3, 4]);
    assert_eq!(cfg.schemes(), vec![Scheme::Ne, Scheme::Bne]);
}

#[test]
fn verify_suite_has_no_failures_on_defaults() {
    let checks = verify(&ExperimentConfig::default()).unwrap();
    assert!(checks.len() >= 10);
    for c in &checks {
        assert_ne!(c.outcome, Outcome::Fail, "{}: {}", c.name, c.detail);
    }
}
