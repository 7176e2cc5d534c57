use num_complex::Complex64 as C64;
use ndarray::Array1;
use pointer_amp::fock::{self, FockMatrix, FockSpace, FockVector};
use pointer_amp::protocol;
use pointer_amp::{CoherentParams, SqueezeParams, SystemParams};
use proptest::prelude::*;

const N: usize = 48;
/// Rows and columns trusted after exponentiating a truncated generator.
const TRUSTED: usize = 16;

fn space() -> FockSpace {
    FockSpace::new(N).unwrap()
}

/// Levels compared after squeezing a low-lying state in [`BIG`] levels.
const BIG: usize = 300;
const TRUSTED_STATE: usize = 60;

/// Random normalized state supported on `|0⟩…|4⟩`.
fn low_state() -> impl Strategy<Value = FockVector> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5).prop_filter_map("nonzero", |c| {
        let s = FockSpace::new(BIG).unwrap();
        let mut amps = Array1::zeros(BIG);
        for (n, (re, im)) in c.into_iter().enumerate() {
            amps[n] = C64::new(re, im);
        }
        FockVector::new(s, amps).ok()?.normalized().ok()
    })
}

fn amp() -> impl Strategy<Value = C64> {
    (0.0..1.2f64, 0.0..std::f64::consts::TAU).prop_map(|(r, p)| C64::from_polar(r, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn displacement_is_unitary_in_interior(a in amp()) {
        let d = fock::displacement_op(space(), a).unwrap();
        prop_assert!(d.interior_unitarity_defect() < 1e-10);
    }

    #[test]
    fn squeeze_preserves_norm_of_low_states(r in 0.0..0.8f64, th in 0.0..6.0f64, v in low_state()) {
        let out = fock::squeeze(&v, C64::from_polar(r, th)).unwrap();
        prop_assert!((out.norm_sqr() - v.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn displacements_compose_with_phase(a in amp(), b in amp()) {
        let s = space();
        let lhs = fock::displacement_op(s, a).unwrap().matmul(&fock::displacement_op(s, b).unwrap());
        let phase = ((a * b.conj() - a.conj() * b) * 0.5).exp();
        let rhs = fock::displacement_op(s, a + b).unwrap().scaled(phase);
        prop_assert!(lhs.max_abs_diff_within(&rhs, TRUSTED) < 1e-9);
    }

    #[test]
    fn bogoliubov_transform(r in 0.0..0.8f64, th in 0.0..6.0f64, v in low_state()) {
        // c S|v⟩ = S (c cosh r − c† e^{iθ} sinh r)|v⟩
        let s = v.space();
        let eps = C64::from_polar(r, th);
        let c = fock::annihilation(s);
        let lhs = c.apply(&fock::squeeze(&v, eps).unwrap());
        let mixed = c.apply(&v).combine(C64::new(r.cosh(), 0.0), &fock::creation(s).apply(&v), -C64::from_polar(r.sinh(), th));
        let rhs = fock::squeeze(&mixed, eps).unwrap();
        let diff = (0..TRUSTED_STATE).map(|n| (lhs.amps()[n] - rhs.amps()[n]).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-10, "diff {}", diff);
    }

    #[test]
    fn displaced_vacuum_is_coherent(a in amp()) {
        let s = space();
        let v = fock::displace(&s.vacuum(), a).unwrap();
        prop_assert!(v.fidelity(&s.coherent(a)) > 1.0 - 1e-12);
    }

    #[test]
    fn ports_conserve_probability(
        r in 0.0..1.0f64, th in 0.0..6.0f64, a in 0.0..1.5f64, b in 0.0..6.0f64,
        k in 0.001..0.05f64, t in 0.0..7.0f64,
    ) {
        let sq = SqueezeParams::new(r, th).unwrap();
        let coh = CoherentParams::new(a, b).unwrap();
        let p = protocol::prepare_pointer(&sq, &coh, FockSpace::new(200).unwrap()).unwrap();
        let j = protocol::evolve_joint(&p, t, &SystemParams::new(k).unwrap()).unwrap();
        let dark = protocol::postselect_dark(&j).survival_prob;
        prop_assert!((dark + j.bright_probability() - 1.0).abs() < 1e-9);
        prop_assert!((j.norm_sqr() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn canonical_commutator_in_interior() {
    let s = space();
    let c = fock::annihilation(s);
    let comm = c.commutator(&fock::creation(s));
    assert!(comm.max_abs_diff_within(&FockMatrix::identity(s), N - 1) < 1e-12);
    // the truncation shows up only in the last level
    assert!((comm.entries()[[N - 1, N - 1]].re + (N as f64 - 1.0)).abs() < 1e-12);
}

#[test]
fn position_momentum_commutator() {
    // [q, p] = i in units σ·ħ/σ with q = c + c†, p = (c − c†)/(2i)
    let s = space();
    let comm = fock::position(s).commutator(&fock::momentum(s));
    let target = FockMatrix::identity(s).scaled(C64::new(0.0, 1.0));
    assert!(comm.max_abs_diff_within(&target, N - 1) < 1e-13);
}
