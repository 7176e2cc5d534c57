use pointer_amp::protocol::{self, regression_cases, OracleOptions};
use pointer_amp::{analytic, CoherentParams, Error, SqueezeParams, SystemParams};

#[test]
fn regression_cases_span_the_grid() {
    let cases = regression_cases();
    assert!(cases.iter().filter(|c| !c.displaced).count() >= 20);
    for r in [0.0, 1.0, 2.0] {
        assert!(cases.iter().any(|c| c.sq.r() == r));
    }
    assert!(cases.iter().any(|c| c.displaced && c.coh.amp() == 400.0));
}

#[test]
fn low_squeezing_cases_match_closed_form() {
    for c in regression_cases().iter().filter(|c| c.sq.r() < 2.0) {
        let a = c.analytic().unwrap();
        let o = c.oracle().unwrap();
        assert!((a.q_over_sigma - o.value.q_over_sigma).abs() < 1e-5, "{}", c.id);
        assert!((a.survival_prob - o.value.survival_prob).abs() < 1e-8, "{}", c.id);
    }
}

#[test]
fn gate_reports_truncation_exhaustion() {
    let sq = SqueezeParams::new(2.0, 0.0).unwrap();
    let opts = OracleOptions { max_dim: 300, ..OracleOptions::default() };
    let r = protocol::oracle(1.0, &sq, &CoherentParams::vacuum(), &SystemParams::new(0.01).unwrap(), &opts);
    assert!(matches!(r, Err(Error::ConvergenceFailed(_))));
}

#[test]
fn vanishing_postselection_is_flagged_by_both_paths() {
    let sq = SqueezeParams::new(0.5, 0.0).unwrap();
    let sys = SystemParams::new(0.01).unwrap();
    let coh = CoherentParams::vacuum();
    assert!(matches!(analytic::mean_q_vacuum(0.0, &sq, &sys), Err(Error::VanishingPostselection { .. })));
    let r = protocol::oracle(0.0, &sq, &coh, &sys, &OracleOptions::default());
    assert!(matches!(r, Err(Error::VanishingPostselection { t, .. }) if t == 0.0));
}
