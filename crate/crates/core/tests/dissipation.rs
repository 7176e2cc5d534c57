use num_complex::Complex64 as C64;
use pointer_amp::dissipation::{self, DensityMatrix, DissipativeOptions};
use pointer_amp::fock::{self, FockSpace};
use pointer_amp::protocol;
use pointer_amp::{analytic, CoherentParams, SqueezeParams, SystemParams};
use std::f64::consts::PI;

/// Error of RK4 at `steps` against a run with eight times as many steps.
fn rk4_errors() -> (f64, f64) {
    let s = FockSpace::new(60).unwrap();
    let sys = SystemParams::new(0.05).unwrap();
    let h = fock::hamiltonian_n(s, 1, &sys);
    let rho = DensityMatrix::from_pure(&s.coherent(C64::new(3.0, 0.0)));
    let (gamma, t) = (0.05, 1.0);
    let run = |steps| dissipation::lindblad_evolve_steps(&rho, &h, gamma, t, steps).unwrap();
    let reference = run(8000);
    let err = |m: &DensityMatrix| (m.entries() - reference.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (err(&run(1000)), err(&run(2000)))
}

#[test]
fn rk4_is_fourth_order() {
    let (coarse, fine) = rk4_errors();
    let ratio = coarse / fine;
    assert!(coarse > 1e-11, "error {coarse} too close to roundoff for an order check");
    assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
}

#[test]
fn undamped_joint_state_matches_pipeline() {
    let sq = SqueezeParams::new(1.0, 0.3).unwrap();
    let coh = CoherentParams::new(0.5, 1.0).unwrap();
    let sys = SystemParams::new(0.02).unwrap();
    let space = FockSpace::new(150).unwrap();
    let t = 2.5;
    let pure = protocol::pipeline_at(t, &sq, &coh, &sys, space).unwrap();
    let opts = DissipativeOptions { dim: Some(150), ..DissipativeOptions::default() };
    let damped = dissipation::dissipative_pipeline(t, &sq, &coh, &sys, &opts).unwrap();
    assert!((pure.q_over_sigma - damped.q_over_sigma).abs() < 1e-6);
    assert!((pure.survival_prob - damped.survival_prob).abs() < 1e-10);
}

#[test]
fn damping_degrades_the_peak_monotonically() {
    let sq = SqueezeParams::new(0.5, PI).unwrap();
    let coh = CoherentParams::vacuum();
    let sys = SystemParams::new(0.005).unwrap();
    let (t, _) = analytic::vacuum_expansion_extrema(2.0 * PI, &sq, &sys);
    let opts = DissipativeOptions { dim: Some(60), ..DissipativeOptions::default() };
    let peaks: Vec<f64> = [0.0, 1e-3, 0.1]
        .iter()
        .map(|&g| dissipation::dissipative_pipeline(t, &sq, &coh, &sys.with_gamma(g).unwrap(), &opts).unwrap().q_over_sigma)
        .collect();
    assert!(peaks[0] > peaks[1] && peaks[1] > peaks[2], "{peaks:?}");
    assert!(peaks[2] < 0.9 * peaks[0]);
}

#[test]
fn default_truncation_follows_the_tail_gate() {
    let sq = SqueezeParams::new(1.0, 0.0).unwrap();
    let coh = CoherentParams::new(0.5, 0.0).unwrap();
    let dim = dissipation::dissipative_truncation(&sq, &coh, &DissipativeOptions::default()).unwrap();
    let start = protocol::default_truncation(&sq, &coh);
    assert!(dim >= start && (dim / start).is_power_of_two());
    let pointer = |n| protocol::prepare_pointer(&sq, &coh, FockSpace::new(n).unwrap());
    assert!(pointer(dim).is_ok());
    if dim > start {
        assert!(pointer(dim / 2).is_err());
    }
    let strict = DissipativeOptions { max_dim: 100, ..DissipativeOptions::default() };
    assert!(dissipation::dissipative_truncation(&SqueezeParams::new(2.0, 0.0).unwrap(), &coh, &strict).is_err());
}
