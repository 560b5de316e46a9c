use bdris::sweep::run_sweep;
use bdris::{Scenario, Scheme, SweepParam, SweepSpec};

fn spec(param: SweepParam, values: Vec<f64>, schemes: Vec<Scheme>) -> SweepSpec {
    SweepSpec { param, values, seeds: 4, schemes, width: 60.0 }
}

#[test]
fn more_power_never_lowers_the_mean_rate() {
    let base = Scenario::desk(2, 2, 8, 4, 2).unwrap();
    let r = run_sweep(&base, &spec(SweepParam::P, vec![15.0, 20.0, 25.0], vec![Scheme::NORIS_COOP])).unwrap();
    let means: Vec<f64> = r.means.iter().map(|m| m.mean).collect();
    assert_eq!(means.len(), 3);
    assert!(means.windows(2).all(|w| w[1] >= w[0]), "{means:?}");
}

#[test]
fn rows_cover_every_job_in_order() {
    let base = Scenario::desk(2, 2, 4, 2, 1).unwrap();
    let schemes = vec![Scheme::BD_COOP, Scheme::DIAG_ZP];
    let r = run_sweep(&base, &spec(SweepParam::M, vec![2.0, 4.0], schemes.clone())).unwrap();
    assert_eq!(r.rows.len(), 2 * 2 * 4);
    assert_eq!(r.means.len(), 4);
    for m in &r.means {
        let runs: Vec<f64> = r
            .rows
            .iter()
            .filter(|x| x.scheme == m.scheme && x.value == m.value)
            .map(|x| x.sum_rate)
            .collect();
        assert_eq!(runs.len(), 4);
        assert!((runs.iter().sum::<f64>() / 4.0 - m.mean).abs() < 1e-12);
    }
    // parallel execution must not change any job
    let again = run_sweep(&base, &spec(SweepParam::M, vec![2.0, 4.0], schemes)).unwrap();
    assert_eq!(again, r);
}

#[test]
fn empty_values_are_rejected() {
    let base = Scenario::desk(2, 2, 4, 2, 1).unwrap();
    assert!(run_sweep(&base, &spec(SweepParam::P, vec![], vec![Scheme::BD_COOP])).is_err());
}
