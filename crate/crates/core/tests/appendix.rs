use pointer_amp::appendix::{mean_shift_p, mean_shift_q, WeakMeasParams};
use pointer_amp::protocol::{self, OracleOptions};
use pointer_amp::{analytic, CoherentParams, SqueezeParams, SystemParams};
use std::f64::consts::PI;

fn params(eta: f64, eps: f64) -> WeakMeasParams {
    WeakMeasParams::new(eta, eps, 1.0).unwrap()
}

#[test]
fn shift_peaks_at_equal_offsets() {
    let eta = 0.01;
    let grid: Vec<f64> = (-100..=100).map(|i| i as f64 * 1e-3 * 0.1).collect();
    let vals: Vec<f64> = grid.iter().map(|&e| mean_shift_q(&params(eta, e)).unwrap().closed_form).collect();
    let (imax, vmax) = vals.iter().enumerate().fold((0, f64::MIN), |m, (i, &v)| if v > m.1 { (i, v) } else { m });
    assert!((grid[imax] - eta).abs() < 1e-12);
    assert_eq!(vmax, 1.0);
    assert!(vals.iter().all(|v| v.abs() <= 1.0 + 1e-15));
    // derivative changes sign across ε = η
    let d = |e: f64| mean_shift_q(&params(eta, e + 1e-6)).unwrap().closed_form - mean_shift_q(&params(eta, e - 1e-6)).unwrap().closed_form;
    assert!(d(eta - 1e-3) > 0.0 && d(eta + 1e-3) < 0.0);
}

#[test]
fn exact_state_agrees_with_leading_order() {
    for (eta, eps) in [(0.01, 0.01), (0.005, 0.01), (0.01, -0.004), (0.002, 0.0)] {
        let q = mean_shift_q(&params(eta, eps)).unwrap();
        assert!((q.closed_form - q.exact).abs() < 5e-4, "{eta} {eps}: {q:?}");
        let p = mean_shift_p(&params(eta, eps)).unwrap();
        assert_eq!(p.closed_form, 0.0);
        assert!(p.exact.abs() < 1e-3);
    }
}

#[test]
fn orthogonal_postselection_contrast() {
    // ground-state pointer: no shift at ε = 0 for any η
    for eta in [0.001, 0.01, 0.05, 0.1] {
        let q = mean_shift_q(&params(eta, 0.0)).unwrap();
        assert_eq!(q.closed_form, 0.0);
        assert!(q.exact.abs() < 1e-13);
    }
    // squeezed pointer with exactly orthogonal postselection: shifts of order e^r
    let sq = SqueezeParams::new(1.0, PI).unwrap();
    let sys = SystemParams::new(0.01).unwrap();
    let (t, _) = analytic::vacuum_expansion_extrema(2.0 * PI, &sq, &sys);
    let o = protocol::oracle(t, &sq, &CoherentParams::vacuum(), &sys, &OracleOptions::default()).unwrap();
    assert!((o.value.q_over_sigma - 1f64.exp()).abs() < 0.02 * 1f64.exp());
}
