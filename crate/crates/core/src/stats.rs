//! Detection statistics: when the photon leaves the cavity, how often the
//! dark port fires, the arrival-weighted mean displacement, and the
//! dark-count arithmetic that bounds the usable coupling.
//!
//! Arrival weights use the small-k survival `¼(|υ|² + τ²)` multiplied by the
//! cavity emission density `κe^{−κt}`. Integrals run over `[0, 40/κ]`; the
//! remainder is bounded by `e^{−κT}·sup(|υ|² + τ²)/4`.

use std::f64::consts::{PI, TAU};

use crate::analytic::{self, frame_at};
use crate::error::{Error, Result};
use crate::params::{CoherentParams, SqueezeParams, SystemParams};
use crate::quadrature::{integrate, integrate_panels, QuadOptions};
use crate::sweep::{self, TimeGrid};

/// Integration horizon in units of `1/κ`.
pub const HORIZON_DECAYS: f64 = 40.0;
/// Largest acceptable share of the arrival mass at flagged time points.
pub const EXCLUDED_MASS_LIMIT: f64 = 1e-12;

/// Emission and postselection model at fixed parameters, with its total
/// success probability computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalModel {
    pub sq: SqueezeParams,
    pub coh: CoherentParams,
    pub sys: SystemParams,
    total: f64,
}

impl ArrivalModel {
    pub fn new(sq: SqueezeParams, coh: CoherentParams, sys: SystemParams) -> Result<Self> {
        let mut m = Self { sq, coh, sys, total: 1.0 };
        let p = integrate(|t| Ok([m.weight(t)]), 0.0, m.horizon(), &QuadOptions::default())?;
        if !(p.value[0] > 0.0) {
            return Err(Error::VanishingPostselection { t: f64::NAN, survival_prob: p.value[0] });
        }
        m.total = p.value[0];
        Ok(m)
    }

    pub fn kappa(&self) -> f64 {
        self.sys.kappa_over_omega()
    }

    /// `T_max = 40/κ`.
    pub fn horizon(&self) -> f64 {
        HORIZON_DECAYS / self.kappa()
    }

    /// Success probability `P` over `[0, T_max]`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Unnormalized rate `¼κe^{−κt}(|υ|² + τ²)`.
    pub fn weight(&self, t: f64) -> f64 {
        let f = frame_at(t, &self.sq, &self.coh, &self.sys);
        self.kappa() * (-self.kappa() * t).exp() * analytic::survival_probability_approx(&f)
    }

    /// `sup(|υ|² + τ²) ≤ 4k²e^{2r}(1 + 4|α|²)`, from `|υ| ≤ 2ke^r` and `|τ| ≤ 2|α||υ|`.
    pub fn weight_sup(&self) -> f64 {
        let k = self.sys.k();
        let a = self.coh.amp();
        4.0 * k * k * (2.0 * self.sq.r()).exp() * (1.0 + 4.0 * a * a)
    }

    /// Bound on the success probability beyond `T_max`.
    pub fn tail_bound(&self) -> f64 {
        (-self.kappa() * self.horizon()).exp() * self.weight_sup() / 4.0
    }
}

/// Normalized arrival density per unit `ω_m t`.
pub fn arrival_density(t: f64, model: &ArrivalModel) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("arrival time must be >= 0, got {t}")));
    }
    Ok(model.weight(t) / model.total)
}

/// Whether the parameters are the single case with a known closed form:
/// `|α| = ½`, `β ≡ 0 (mod 2π)`, `r = 2`, `θ = π`.
pub fn is_closed_form_case(sq: &SqueezeParams, coh: &CoherentParams) -> bool {
    let near = |a: f64, b: f64| (a - b).abs() < 1e-12;
    let beta = coh.beta().rem_euclid(TAU);
    near(coh.amp(), 0.5) && (near(beta, 0.0) || near(beta, TAU)) && near(sq.r(), 2.0) && near(sq.theta(), PI)
}

/// Closed forms of the success probability for the special case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    /// `k²κ(3 + 2e⁸ + 2e⁸κ²) / (2e⁴(κ⁵ + 5κ³ + 4κ))` with `ω_m = 1`.
    pub value: f64,
    /// The same with `e⁸κ²` in place of `2e⁸κ²` in the numerator.
    pub as_printed: f64,
}

pub fn closed_form_success(k: f64, kappa: f64) -> ClosedForm {
    let e4 = 4f64.exp();
    let e8 = e4 * e4;
    let den = 2.0 * e4 * (kappa.powi(5) + 5.0 * kappa.powi(3) + 4.0 * kappa);
    let with = |c: f64| k * k * kappa * (3.0 + 2.0 * e8 + c * e8 * kappa * kappa) / den;
    ClosedForm { value: with(2.0), as_printed: with(1.0) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProbability {
    /// Authoritative value, by quadrature.
    pub quadrature: f64,
    /// Quadrature error estimate plus the truncation tail bound.
    pub error_bound: f64,
    closed: Option<ClosedForm>,
}

impl SuccessProbability {
    pub fn closed_form(&self) -> Result<ClosedForm> {
        self.closed.ok_or(Error::ClosedFormInapplicable)
    }
}

pub fn success_probability(model: &ArrivalModel, opts: &QuadOptions) -> Result<SuccessProbability> {
    let q = integrate(|t| Ok([model.weight(t)]), 0.0, model.horizon(), opts)?;
    let closed = is_closed_form_case(&model.sq, &model.coh)
        .then(|| closed_form_success(model.sys.k(), model.kappa()));
    Ok(SuccessProbability { quadrature: q.value[0], error_bound: q.error[0] + model.tail_bound(), closed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageDisplacement {
    /// Arrival-weighted mean `⟨q⟩` in units of σ.
    pub q_over_sigma: f64,
    pub quad_error: f64,
    /// Success probability over the same horizon.
    pub success_prob: f64,
    /// Share of the arrival mass at points where postselection vanishes.
    pub excluded_mass: f64,
    /// Bound on the arrival mass beyond the horizon, relative to `P`.
    pub tail_mass: f64,
    /// Breakpoints used to split the integral.
    pub breakpoints: Vec<f64>,
}

impl AverageDisplacement {
    /// True when the excluded mass is too large for the value to be trusted.
    pub fn accuracy_warning(&self) -> bool {
        self.excluded_mass >= EXCLUDED_MASS_LIMIT
    }
}

/// Times of the local extrema of `⟨q(t)⟩` over the horizon, located by a
/// refined sweep of the closed form.
pub fn peak_breakpoints(model: &ArrivalModel, points: usize) -> Result<Vec<f64>> {
    let grid = TimeGrid::new(0.0, model.horizon(), points, true)?;
    let pts = sweep::sweep(&grid, |t| match analytic::mean_q_coherent(t, &model.sq, &model.coh, &model.sys) {
        Ok(q) => Ok((Some(q), ())),
        Err(Error::VanishingPostselection { .. }) => Ok((None, ())),
        Err(e) => Err(e),
    })?;
    let mut peaks = Vec::new();
    for w in pts.windows(3) {
        if let (Some(a), Some(b), Some(c)) = (w[0].value, w[1].value, w[2].value) {
            if (b > a && b >= c) || (b < a && b <= c) {
                peaks.push(w[1].t);
            }
        }
    }
    Ok(peaks)
}

/// Arrival-weighted mean displacement. With `refine`, the integral is split
/// at the peaks found by [`peak_breakpoints`].
pub fn average_displacement(model: &ArrivalModel, refine: bool, opts: &QuadOptions) -> Result<AverageDisplacement> {
    let horizon = model.horizon();
    let mut edges = vec![0.0, horizon];
    if refine {
        edges.extend(peak_breakpoints(model, sweep::DEFAULT_POINTS)?);
    }
    let integrand = |t: f64| -> Result<[f64; 3]> {
        let w = model.weight(t);
        match analytic::mean_q_coherent(t, &model.sq, &model.coh, &model.sys) {
            Ok(q) => Ok([w * q, w, 0.0]),
            Err(Error::VanishingPostselection { .. }) => Ok([0.0, w, w]),
            Err(e) => Err(e),
        }
    };
    let q = integrate_panels(integrand, &edges, opts)?;
    let p = q.value[1];
    if !(p > 0.0) {
        return Err(Error::VanishingPostselection { t: f64::NAN, survival_prob: p });
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    Ok(AverageDisplacement {
        q_over_sigma: q.value[0] / p,
        quad_error: q.error[0] / p,
        success_prob: p,
        excluded_mass: q.value[2] / p,
        tail_mass: model.tail_bound() / p,
        breakpoints: edges,
    })
}

/// Inputs of the dark-count feasibility estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityInput {
    /// Detector dark-count rate, Hz.
    pub dark_count_rate: f64,
    /// Mechanical frequency `ω_m/2π`, Hz.
    pub mech_freq: f64,
    pub kappa_over_omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    /// `P/k²` for the special-case pointer at this `κ`.
    pub success_coefficient: f64,
    /// Cavity decay rate, rad/s.
    pub kappa_rad_s: f64,
    /// Detector window `≈ 1/κ`, s.
    pub window_s: f64,
    /// Smallest `k` with dark-count rate `≤ (P/k²)k²κ`.
    pub k_min: f64,
}

impl FeasibilityReport {
    /// Finesse after moving a cavity of finesse `finesse` at decay rate
    /// `kappa_ref` (rad/s) to this report's `κ`, at fixed length.
    pub fn scaled_finesse(&self, finesse: f64, kappa_ref: f64) -> f64 {
        finesse * kappa_ref / self.kappa_rad_s
    }
}

pub fn feasibility(input: &FeasibilityInput) -> Result<FeasibilityReport> {
    let ok = |x: f64| x.is_finite() && x > 0.0;
    if !(input.dark_count_rate.is_finite() && input.dark_count_rate >= 0.0) {
        return Err(Error::InvalidParameter(format!("dark count rate must be >= 0, got {}", input.dark_count_rate)));
    }
    if !ok(input.mech_freq) || !ok(input.kappa_over_omega) {
        return Err(Error::InvalidParameter("mechanical frequency and kappa must be > 0".into()));
    }
    let success_coefficient = closed_form_success(1.0, input.kappa_over_omega).value;
    let kappa_rad_s = input.kappa_over_omega * TAU * input.mech_freq;
    Ok(FeasibilityReport {
        success_coefficient,
        kappa_rad_s,
        window_s: 1.0 / kappa_rad_s,
        k_min: (input.dark_count_rate / (success_coefficient * kappa_rad_s)).sqrt(),
    })
}
