//! Interferometer and dark-port postselection on the truncated Fock oracle.
//!
//! The photon lives in the single-photon sector spanned by the two arm
//! states `|1⟩_A|0⟩_B` and `|0⟩_A|1⟩_B`; the mirror is evolved with
//! `H₁ = c†c − k(c + c†)` when the photon is in the optomechanical arm and
//! with `H₀ = c†c` otherwise. Both beam splitters are symmetric, so the
//! input amplitudes are `(1/√2, 1/√2)` and the dark port projects on
//! `(|A⟩ − |B⟩)/√2`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

pub use crate::analytic::frame_shift;
use crate::analytic::{frame_at, PROB_FLOOR};
use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, FockVector, TAIL_TOLERANCE};
use crate::params::{CoherentParams, SqueezeParams, SystemParams};

/// Photon path amplitudes plus the mirror state conditioned on each path.
#[derive(Debug, Clone)]
pub struct JointState {
    /// Amplitudes of `|1⟩_A|0⟩_B` and `|0⟩_A|1⟩_B`.
    pub photon: [C64; 2],
    pub branch_a: FockVector,
    pub branch_b: FockVector,
}

impl JointState {
    /// `Σ |photon_i|² ‖branch_i‖²`.
    pub fn norm_sqr(&self) -> f64 {
        self.photon[0].norm_sqr() * self.branch_a.norm_sqr()
            + self.photon[1].norm_sqr() * self.branch_b.norm_sqr()
    }

    fn port(&self, sign: f64) -> FockVector {
        // ⟨port| = (⟨A| ± ⟨B|)/√2
        let a = self.photon[0] * FRAC_1_SQRT_2;
        let b = self.photon[1] * (sign * FRAC_1_SQRT_2);
        self.branch_a.combine(a, &self.branch_b, b)
    }

    /// Probability that the photon leaves through the bright port.
    pub fn bright_probability(&self) -> f64 {
        self.port(1.0).norm_sqr()
    }
}

/// Unnormalized mirror state after a dark-port click.
#[derive(Debug, Clone)]
pub struct PostselectedState {
    pub mirror: FockVector,
    pub survival_prob: f64,
}

/// `S(ε)D(α)|0⟩`, built from the closed-form squeezed vacuum and the
/// action of the truncated displacement generator.
pub fn prepare_pointer(sq: &SqueezeParams, coh: &CoherentParams, space: FockSpace) -> Result<FockVector> {
    prepare_pointer_within(sq, coh, space, TAIL_TOLERANCE)
}

/// [`prepare_pointer`] with an explicit bound on the tail mass.
pub fn prepare_pointer_within(
    sq: &SqueezeParams,
    coh: &CoherentParams,
    space: FockSpace,
    tail_tolerance: f64,
) -> Result<FockVector> {
    // S D(α) S† = D(α cosh r − α* e^{iθ} sinh r)
    let vac = space.squeezed_vacuum(sq.eps());
    let pointer = fock::displace(&vac, frame_shift(0.0, sq, coh))?;
    pointer.check_converged(tail_tolerance)?;
    Ok(pointer)
}

/// Mirror branches after interaction time `t`.
pub fn evolve_joint(pointer: &FockVector, t: f64, sys: &SystemParams) -> Result<JointState> {
    let space = pointer.space();
    let h1 = fock::hamiltonian_n(space, 1, sys);
    let h0 = fock::hamiltonian_n(space, 0, sys);
    Ok(JointState {
        photon: [C64::new(FRAC_1_SQRT_2, 0.0); 2],
        branch_a: fock::evolve(pointer, &h1, t)?,
        branch_b: fock::evolve(pointer, &h0, t)?,
    })
}

/// Project on the dark port: `½(branch_A − branch_B)` for the symmetric input.
pub fn postselect_dark(joint: &JointState) -> PostselectedState {
    let mirror = joint.port(-1.0);
    let survival_prob = mirror.norm_sqr();
    PostselectedState { mirror, survival_prob }
}

/// `D†(γ)` applied to the postselected state, with `γ` the free pointer
/// centre, moving the conditional state to the phase-space origin.
pub fn displaced_frame(
    state: &PostselectedState,
    t: f64,
    sq: &SqueezeParams,
    coh: &CoherentParams,
) -> Result<FockVector> {
    if !(state.survival_prob > 0.0) {
        return Err(Error::ZeroNorm(state.survival_prob));
    }
    fock::displace(&state.mirror, -frame_shift(t, sq, coh))
}

/// Postselected mean position minus the freely evolved reference, in
/// units of `sigma`.
pub fn mean_q_postselected(
    state: &PostselectedState,
    reference: &FockVector,
    sigma: f64,
) -> Result<f64> {
    if !(state.survival_prob >= PROB_FLOOR) {
        return Err(Error::VanishingPostselection { t: f64::NAN, survival_prob: state.survival_prob });
    }
    Ok(fock::expect_q(&state.mirror, sigma)? - fock::expect_q(reference, sigma)?)
}

/// Starting truncation: `max(60, ⌈12(|α|+1)²⌉, ⌈10e^{2r}⌉)`.
pub fn default_truncation(sq: &SqueezeParams, coh: &CoherentParams) -> usize {
    let a = coh.amp();
    let by_alpha = (12.0 * (a + 1.0).powi(2)).ceil() as usize;
    let by_squeeze = (10.0 * (2.0 * sq.r()).exp()).ceil() as usize;
    60.max(by_alpha).max(by_squeeze)
}

/// Oracle value at one truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub q_over_sigma: f64,
    pub survival_prob: f64,
    pub dim: usize,
}

/// Full pipeline at a fixed truncation: prepare, evolve both arms,
/// postselect, subtract the free reference.
pub fn pipeline_at(
    t: f64,
    sq: &SqueezeParams,
    coh: &CoherentParams,
    sys: &SystemParams,
    space: FockSpace,
) -> Result<OracleValue> {
    let pointer = prepare_pointer(sq, coh, space)?;
    let joint = evolve_joint(&pointer, t, sys)?;
    let post = postselect_dark(&joint);
    let q = mean_q_postselected(&post, &joint.branch_b, 1.0).map_err(|e| annotate(e, t))?;
    Ok(OracleValue { q_over_sigma: q, survival_prob: post.survival_prob, dim: space.dim() })
}

/// Displaced-frame pipeline for pointers whose coherent amplitude is too
/// large to represent. The α = 0 squeezed pointer is evolved in both arms;
/// the coherent part only contributes the relative phase `τ = 2 Im(ξγ*)`
/// obtained from reordering `D(ξ)` and the frame shift `D(γ)`, and shifts both
/// arms by the same `γ`, which the reference subtraction removes.
pub fn displaced_frame_pipeline_at(
    t: f64,
    sq: &SqueezeParams,
    coh: &CoherentParams,
    sys: &SystemParams,
    space: FockSpace,
) -> Result<OracleValue> {
    let pointer = prepare_pointer(sq, &CoherentParams::vacuum(), space)?;
    let joint = evolve_joint(&pointer, t, sys)?;
    let tau = frame_at(t, sq, coh, sys).tau_from_frame_shift(sq, coh);
    let a = joint.branch_a.scaled(C64::from_polar(1.0, tau));
    let mirror = a.combine(C64::new(0.5, 0.0), &joint.branch_b, C64::new(-0.5, 0.0));
    let post = PostselectedState { survival_prob: mirror.norm_sqr(), mirror };
    let q = mean_q_postselected(&post, &joint.branch_b, 1.0).map_err(|e| annotate(e, t))?;
    Ok(OracleValue { q_over_sigma: q, survival_prob: post.survival_prob, dim: space.dim() })
}

fn annotate(e: Error, t: f64) -> Error {
    match e {
        Error::VanishingPostselection { survival_prob, .. } => {
            Error::VanishingPostselection { t, survival_prob }
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Largest truncation tried before giving up.
    pub max_dim: usize,
    /// Allowed change in any reported value when the truncation doubles.
    pub gate_tol: f64,
    /// Evaluate in the displaced frame (required for large |α|).
    pub displaced_frame: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { max_dim: 8192, gate_tol: 1e-8, displaced_frame: false }
    }
}

/// Converged oracle value together with the change seen on the last doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergedOracle {
    pub value: OracleValue,
    pub gate_delta: f64,
}

/// Run the pipeline at the default truncation and keep doubling until a
/// doubling changes `⟨q⟩` and the survival probability by less than
/// `gate_tol`.
pub fn oracle(
    t: f64,
    sq: &SqueezeParams,
    coh: &CoherentParams,
    sys: &SystemParams,
    opts: &OracleOptions,
) -> Result<ConvergedOracle> {
    let frame_coh = if opts.displaced_frame { CoherentParams::vacuum() } else { *coh };
    let mut dim = default_truncation(sq, &frame_coh);
    let run = |dim: usize| -> Result<OracleValue> {
        let space = FockSpace::new(dim)?;
        if opts.displaced_frame {
            displaced_frame_pipeline_at(t, sq, coh, sys, space)
        } else {
            pipeline_at(t, sq, coh, sys, space)
        }
    };

    let mut prev: Option<OracleValue> = None;
    while dim <= opts.max_dim {
        match run(dim) {
            Ok(v) => {
                if let Some(p) = prev {
                    let delta = (v.q_over_sigma - p.q_over_sigma)
                        .abs()
                        .max((v.survival_prob - p.survival_prob).abs());
                    if delta < opts.gate_tol {
                        return Ok(ConvergedOracle { value: v, gate_delta: delta });
                    }
                }
                prev = Some(v);
            }
            Err(Error::TruncationTooSmall(_)) => prev = None,
            Err(e) => return Err(e),
        }
        dim *= 2;
    }
    Err(Error::ConvergenceFailed(format!(
        "no truncation up to {} met the doubling gate {:e} at t = {t}",
        opts.max_dim, opts.gate_tol
    )))
}

/// Fidelity of the postselected state with `span{S(η)|0⟩, S(η)|1⟩}`.
pub fn two_level_fidelity(state: &PostselectedState, eta: C64) -> Result<f64> {
    let space = state.mirror.space();
    // S|1⟩ = (c† cosh r + c e^{−iθ} sinh r) S|0⟩
    let (r, theta) = eta.to_polar();
    let s0 = space.squeezed_vacuum(eta);
    let up = fock::creation(space).apply(&s0);
    let down = fock::annihilation(space).apply(&s0);
    let s1 = up.combine(C64::new(r.cosh(), 0.0), &down, C64::from_polar(r.sinh(), -theta));
    let n2 = state.survival_prob;
    if n2 < fock::NORM_FLOOR {
        return Err(Error::ZeroNorm(n2));
    }
    Ok((s0.inner(&state.mirror).norm_sqr() + s1.inner(&state.mirror).norm_sqr()) / n2)
}

/// One regression point for comparing the closed form with the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCase {
    pub id: &'static str,
    pub t: f64,
    pub sq: SqueezeParams,
    pub coh: CoherentParams,
    pub sys: SystemParams,
    /// Run in the displaced frame.
    pub displaced: bool,
}

impl OracleCase {
    pub fn analytic(&self) -> Result<crate::analytic::Postselected> {
        crate::analytic::postselected(&frame_at(self.t, &self.sq, &self.coh, &self.sys))
    }

    pub fn oracle(&self) -> Result<ConvergedOracle> {
        let opts = OracleOptions { displaced_frame: self.displaced, ..OracleOptions::default() };
        oracle(self.t, &self.sq, &self.coh, &self.sys, &opts)
    }
}

/// Regression set spanning `r ∈ {0,1,2}`, `θ ∈ {0, π/2, π}`,
/// `|α| ∈ {0, ½, 2}`, `β ∈ {0, π/2, 2π}`, `k ∈ {0.005, 0.02}` and
/// `t ∈ {0.05, 1, π, 2π, 6.2}`, plus `|α| = 400` in the displaced frame.
pub fn regression_cases() -> Vec<OracleCase> {
    use std::f64::consts::{FRAC_PI_2 as H, PI as P, TAU as T};
    // id, r, θ, |α|, β, k, t, displaced
    type Row = (&'static str, f64, f64, f64, f64, f64, f64, bool);
    #[rustfmt::skip]
    let rows: [Row; 27] = [
        ("c01", 0.0, 0.0, 0.0, 0.0, 0.005, 0.05, false),
        ("c02", 0.0, 0.0, 0.5, H, 0.02, 1.0, false),
        ("c03", 0.0, H, 2.0, T, 0.005, P, false),
        ("c04", 0.0, P, 0.5, 0.0, 0.02, T, false),
        ("c05", 0.0, H, 0.0, 0.0, 0.005, 6.2, false),
        ("c06", 1.0, 0.0, 0.5, 0.0, 0.005, 0.05, false),
        ("c07", 1.0, H, 2.0, H, 0.02, 1.0, false),
        ("c08", 1.0, P, 0.0, 0.0, 0.005, P, false),
        ("c09", 1.0, 0.0, 2.0, T, 0.02, T, false),
        ("c10", 1.0, P, 0.5, H, 0.005, 6.2, false),
        ("c11", 1.0, H, 0.5, T, 0.02, 0.05, false),
        ("c12", 2.0, P, 0.0, 0.0, 0.005, 0.05, false),
        ("c13", 2.0, P, 0.5, T, 0.005, 0.05, false),
        ("c14", 2.0, 0.0, 0.5, H, 0.02, 1.0, false),
        ("c15", 2.0, H, 2.0, 0.0, 0.005, P, false),
        ("c16", 2.0, P, 0.0, 0.0, 0.005, T, false),
        ("c17", 2.0, P, 0.5, T, 0.005, 6.2, false),
        ("c18", 2.0, 0.0, 2.0, H, 0.02, T, false),
        ("c19", 2.0, H, 0.0, 0.0, 0.02, 6.2, false),
        ("c20", 0.0, P, 2.0, H, 0.02, 0.05, false),
        ("c21", 1.0, 0.0, 0.0, 0.0, 0.02, 6.2, false),
        ("c22", 2.0, P, 2.0, T, 0.02, 1.0, false),
        ("c23", 1.0, H, 2.0, 0.0, 0.005, P, false),
        ("c24", 0.0, 0.0, 0.5, T, 0.005, 1.0, false),
        ("big1", 0.0, 0.0, 400.0, T, 0.02, P, true),
        ("big2", 1.0, P, 400.0, H, 0.005, 1.0, true),
        ("big3", 2.0, P, 400.0, 0.0, 0.005, 0.05, true),
    ];
    rows.iter()
        .map(|&(id, r, theta, amp, beta, k, t, displaced)| OracleCase {
            id,
            t,
            sq: SqueezeParams::new(r, theta).expect("valid squeezing"),
            coh: CoherentParams::new(amp, beta).expect("valid amplitude"),
            sys: SystemParams::new(k).expect("valid coupling"),
            displaced,
        })
        .collect()
}
