//! Closed-form evaluation of the postselected mirror displacement.
//!
//! A single photon in the optomechanical arm leaves the mirror in
//! `e^{iφ}D(ξ)S(η)|α e^{−it}⟩` while the free arm leaves `S(η)|α e^{−it}⟩`.
//! Postselecting the dark port keeps half their difference; the mean position
//! of that conditional state, minus the free reference, is
//!
//! ```text
//! ⟨q⟩/σ = [ξ+ξ* − e^{−|υ|²/2}(e^{iΦ}υμ* + e^{−iΦ}υ*μ)] / [2 − e^{−|υ|²/2}(e^{iΦ}+e^{−iΦ})]
//! ```
//!
//! with `Φ = φ` for a squeezed-vacuum pointer and `Φ = φ + τ` for a squeezed
//! coherent pointer. Near the sharp peaks both numerator and denominator are
//! tiny differences of O(1) terms, so the default evaluation uses the
//! rearrangement `Re(υμ*) = Re ξ` and `1 − e^{−x}cos Φ = −expm1(−x) + 2e^{−x}sin²(Φ/2)`,
//! which has no cancellation. The literal form is kept for cross-checks.
//!
//! All returned lengths are in units of σ.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

pub use crate::params::{CoherentParams, SqueezeParams, SystemParams};
use crate::error::{Error, Result};

/// Survival probabilities below this are reported as
/// [`Error::VanishingPostselection`] instead of a 0/0 value.
pub const PROB_FLOOR: f64 = 1e-14;

/// Every time-dependent intermediate at one instant `t = ω_m t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticFrame {
    pub t: f64,
    /// Kerr phase `k²(t − sin t)`.
    pub phi: f64,
    /// Single-photon displacement `k(1 − e^{−it})`.
    pub xi: C64,
    /// Rotated squeezing `r e^{i(θ − 2t)}`.
    pub eta: C64,
    /// `cosh r − e^{i(θ−2t)} sinh r`.
    pub mu: C64,
    /// `ξ cosh r + ξ* e^{i(θ−2t)} sinh r`, the displacement seen in the
    /// squeezed frame.
    pub upsilon: C64,
    /// Relative phase from reordering the displacements of the coherent
    /// part, `−i[α*υe^{it} − αυ*e^{−it}]`.
    pub tau: f64,
    /// Small-time helper `e^r t cos β + e^{−r} t² sin β / 2`.
    pub zeta: f64,
    /// Freely rotated coherent label `α e^{−it}`.
    pub varphi: C64,
}

impl AnalyticFrame {
    /// Total relative phase between the two interfering mirror states.
    pub fn total_phase(&self) -> f64 {
        self.phi + self.tau
    }

    /// Centre of the freely evolved pointer, `e^{−it}(α cosh r − α* e^{iθ} sinh r)`.
    /// Applying `D†` of this shifts the postselected state to the origin.
    pub fn frame_shift(&self, sq: &SqueezeParams, coh: &CoherentParams) -> C64 {
        frame_shift(self.t, sq, coh)
    }

    /// The same relative phase obtained from commuting `D(ξ)` past the frame
    /// shift `γ`: `D†(γ)D(ξ)D(γ) = e^{ξγ* − ξ*γ}D(ξ)`, so `τ = 2 Im(ξγ*)`.
    pub fn tau_from_frame_shift(&self, sq: &SqueezeParams, coh: &CoherentParams) -> f64 {
        let gamma = self.frame_shift(sq, coh);
        2.0 * (self.xi * gamma.conj()).im
    }
}

/// Centre of the freely evolved pointer, `e^{−it}(α cosh r − α* e^{iθ} sinh r)`.
pub fn frame_shift(t: f64, sq: &SqueezeParams, coh: &CoherentParams) -> C64 {
    let alpha = coh.alpha();
    let (c, s) = (sq.r().cosh(), sq.r().sinh());
    C64::from_polar(1.0, -t) * (alpha * c - alpha.conj() * C64::from_polar(s, sq.theta()))
}

pub fn frame_at(t: f64, sq: &SqueezeParams, coh: &CoherentParams, sys: &SystemParams) -> AnalyticFrame {
    let k = sys.k();
    let r = sq.r();
    let (ch, sh) = (r.cosh(), r.sinh());
    let rot = C64::from_polar(1.0, sq.theta() - 2.0 * t);

    let phi = k * k * (t - t.sin());
    let xi = k * (C64::new(1.0, 0.0) - C64::from_polar(1.0, -t));
    let eta = rot * r;
    let mu = C64::new(ch, 0.0) - rot * sh;
    let upsilon = xi * ch + xi.conj() * rot * sh;

    let alpha = coh.alpha();
    // −i(w − w*) with w = α*υe^{it} is 2 Im w, real by construction
    let tau = 2.0 * (alpha.conj() * upsilon * C64::from_polar(1.0, t)).im;
    let zeta = if coh.amp() == 0.0 {
        0.0
    } else {
        r.exp() * t * coh.beta().cos() + (-r).exp() * t * t * coh.beta().sin() / 2.0
    };
    let varphi = alpha * C64::from_polar(1.0, -t);

    AnalyticFrame { t, phi, xi, eta, mu, upsilon, tau, zeta, varphi }
}

/// Mean displacement together with the dark-port survival probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Postselected {
    pub q_over_sigma: f64,
    pub survival_prob: f64,
}

/// `(numerator, denominator)` of the postselected mean, cancellation-free.
fn stable_parts(f: &AnalyticFrame) -> (f64, f64) {
    let x = f.upsilon.norm_sqr() / 2.0;
    let decay = (-x).exp();
    let half = (f.total_phase() / 2.0).sin();
    let one_minus = -(-x).exp_m1() + 2.0 * decay * half * half;
    let num = 2.0 * f.xi.re * one_minus
        + 2.0 * decay * f.total_phase().sin() * (f.upsilon * f.mu.conj()).im;
    (num, 2.0 * one_minus)
}

/// Survival probability `¼[2 − e^{−|υ|²/2}(e^{iΦ} + e^{−iΦ})]`.
pub fn survival_probability(f: &AnalyticFrame) -> f64 {
    stable_parts(f).1 / 4.0
}

/// The small-k approximation `¼(|υ|² + τ²)` of the survival probability.
pub fn survival_probability_approx(f: &AnalyticFrame) -> f64 {
    (f.upsilon.norm_sqr() + f.tau * f.tau) / 4.0
}

/// Postselected mean for a frame, failing below [`PROB_FLOOR`].
pub fn postselected(f: &AnalyticFrame) -> Result<Postselected> {
    let (num, den) = stable_parts(f);
    let survival_prob = den / 4.0;
    if !(survival_prob >= PROB_FLOOR) {
        return Err(Error::VanishingPostselection { t: f.t, survival_prob });
    }
    Ok(Postselected { q_over_sigma: num / den, survival_prob })
}

/// Direct transcription of the printed ratio, with no rearrangement.
/// Loses digits when the survival probability is small.
pub fn postselected_literal(f: &AnalyticFrame) -> Result<Postselected> {
    let decay = (-f.upsilon.norm_sqr() / 2.0).exp();
    let e = C64::from_polar(1.0, f.total_phase());
    let cross = e * f.upsilon * f.mu.conj() + e.conj() * f.upsilon.conj() * f.mu;
    let num = f.xi.re * 2.0 - decay * cross.re;
    let den = 2.0 - decay * (e + e.conj()).re;
    let survival_prob = den / 4.0;
    if !(survival_prob >= PROB_FLOOR) {
        return Err(Error::VanishingPostselection { t: f.t, survival_prob });
    }
    Ok(Postselected { q_over_sigma: num / den, survival_prob })
}

/// Postselected mean position for a squeezed-vacuum pointer.
pub fn mean_q_vacuum(t: f64, sq: &SqueezeParams, sys: &SystemParams) -> Result<f64> {
    mean_q_coherent(t, sq, &CoherentParams::vacuum(), sys)
}

/// Postselected mean position for a squeezed coherent pointer `S(ε)|α⟩`.
pub fn mean_q_coherent(
    t: f64,
    sq: &SqueezeParams,
    coh: &CoherentParams,
    sys: &SystemParams,
) -> Result<f64> {
    postselected(&frame_at(t, sq, coh, sys)).map(|p| p.q_over_sigma)
}

fn require_theta_pi(sq: &SqueezeParams) -> Result<()> {
    if (sq.theta() - PI).abs() > 1e-9 {
        return Err(Error::DomainViolation(format!(
            "expansion assumes theta = pi, got {}",
            sq.theta()
        )));
    }
    Ok(())
}

/// Small-offset expansion of the squeezed-vacuum mean around the nearest
/// mechanical period `T = 2πn`, `n ≥ 1`:
/// `2k³T e^{2r}(t−T) / [k⁴T² + k²(t−T)²e^{2r}]`.
pub fn mean_q_vacuum_expansion(t: f64, sq: &SqueezeParams, sys: &SystemParams) -> Result<f64> {
    require_theta_pi(sq)?;
    let n = (t / TAU).round();
    if n < 1.0 {
        return Err(Error::DomainViolation(format!("t = {t} is not near a period 2*pi*n with n >= 1")));
    }
    let period = n * TAU;
    let dt = t - period;
    let k = sys.k();
    if dt.abs() > 0.3 {
        return Err(Error::DomainViolation(format!("|t - T| = {} > 0.3", dt.abs())));
    }
    if k * k * period > 0.1 {
        return Err(Error::DomainViolation(format!("k^2 T = {} > 0.1", k * k * period)));
    }
    let e2r = (2.0 * sq.r()).exp();
    Ok(2.0 * k.powi(3) * period * e2r * dt / (k.powi(4) * period * period + k * k * dt * dt * e2r))
}

/// Small-time expansion of the squeezed-coherent mean near `t = 0`:
/// `4k²|α|ζ e^{2r} t / [4k²|α|²ζ² + k²t²e^{2r}]`.
pub fn mean_q_coherent_expansion(
    t: f64,
    sq: &SqueezeParams,
    coh: &CoherentParams,
    sys: &SystemParams,
) -> Result<f64> {
    require_theta_pi(sq)?;
    if !(0.0..=0.3).contains(&t) {
        return Err(Error::DomainViolation(format!("expansion needs 0 <= t <= 0.3, got {t}")));
    }
    let k = sys.k();
    let a = coh.amp();
    let r = sq.r();
    let zeta = r.exp() * t * coh.beta().cos() + (-r).exp() * t * t * coh.beta().sin() / 2.0;
    let e2r = (2.0 * r).exp();
    let den = 4.0 * k * k * a * a * zeta * zeta + k * k * t * t * e2r;
    // norm² of the expanded conditional state is den/4
    if !(den / 4.0 >= PROB_FLOOR) {
        return Err(Error::VanishingPostselection { t, survival_prob: den / 4.0 });
    }
    Ok(4.0 * k * k * a * zeta * e2r * t / den)
}

/// Offsets `t − T` where the period expansion reaches `+e^r` and `−e^r`:
/// `k²T = ±k(t−T)e^r`.
pub fn vacuum_expansion_extrema(period: f64, sq: &SqueezeParams, sys: &SystemParams) -> (f64, f64) {
    let off = sys.k() * period * (-sq.r()).exp();
    (period + off, period - off)
}

/// Times `t > 0` where `2k|α|ζ = ±k e^r t`, i.e. where the small-time
/// expansion reaches `±e^r`. Returns `(maxima, minima)`; for `sin β = 0` the
/// condition either holds for every t (reported as an empty list plus
/// [`CoherentPlateau`]) or never.
pub fn coherent_expansion_extrema(sq: &SqueezeParams, coh: &CoherentParams) -> CoherentExtrema {
    let r = sq.r();
    let a = coh.amp();
    let (sb, cb) = coh.beta().sin_cos();
    if a == 0.0 {
        return CoherentExtrema::default();
    }
    // e^r cos β + e^{−r} t sin β / 2 = ±e^r / (2|α|)
    let solve = |sign: f64| -> Option<f64> {
        let target = sign * r.exp() / (2.0 * a);
        if sb.abs() < 1e-12 {
            return None;
        }
        let t = (target - r.exp() * cb) * 2.0 * r.exp() / sb;
        (t > 0.0).then_some(t)
    };
    let plateau = if sb.abs() < 1e-12 {
        let lhs = r.exp() * cb;
        if (lhs - r.exp() / (2.0 * a)).abs() <= 1e-12 * r.exp() {
            Some(CoherentPlateau::Maximum)
        } else if (lhs + r.exp() / (2.0 * a)).abs() <= 1e-12 * r.exp() {
            Some(CoherentPlateau::Minimum)
        } else {
            None
        }
    } else {
        None
    };
    CoherentExtrema { max_time: solve(1.0), min_time: solve(-1.0), plateau }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherentPlateau {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoherentExtrema {
    pub max_time: Option<f64>,
    pub min_time: Option<f64>,
    /// The extremal condition holds at every small t (e.g. `|α| = ½, β = 0`).
    pub plateau: Option<CoherentPlateau>,
}

/// Largest single-photon displacement of the mirror without postselection,
/// `4kσ` (returned in units of σ).
pub fn single_photon_displacement_bound(sys: &SystemParams) -> f64 {
    4.0 * sys.k()
}

/// Displacement `2k(1 − cos t)` caused by one photon without postselection.
pub fn single_photon_displacement(t: f64, sys: &SystemParams) -> f64 {
    2.0 * sys.k() * (1.0 - t.cos())
}

/// Ratio of a postselected displacement to the single-photon bound.
pub fn amplification_factor(peak_over_sigma: f64, sys: &SystemParams) -> f64 {
    peak_over_sigma / single_photon_displacement_bound(sys)
}
