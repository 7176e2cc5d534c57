//! Parameter records shared by the closed-form and oracle paths.
//!
//! Times are the dimensionless `ω_m t` throughout and lengths are reported in
//! units of the zero-point fluctuation σ.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Squeezing `ε = r e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    r: f64,
    theta: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParameter(format!("squeezing r must be >= 0, got {r}")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("squeezing angle must be finite, got {theta}")));
        }
        Ok(Self { r, theta: theta.rem_euclid(TAU) })
    }

    pub fn vacuum() -> Self {
        Self { r: 0.0, theta: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Angle reduced to `[0, 2π)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eps(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }
}

/// Coherent amplitude `α = |α| e^{iβ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    amp: f64,
    beta: f64,
}

impl CoherentParams {
    pub fn new(amp: f64, beta: f64) -> Result<Self> {
        if !(amp.is_finite() && amp >= 0.0) {
            return Err(Error::InvalidParameter(format!("coherent amplitude must be >= 0, got {amp}")));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("coherent phase must be finite, got {beta}")));
        }
        Ok(Self { amp, beta })
    }

    pub fn vacuum() -> Self {
        Self { amp: 0.0, beta: 0.0 }
    }

    pub fn amp(&self) -> f64 {
        self.amp
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> C64 {
        C64::from_polar(self.amp, self.beta)
    }
}

/// Physical constants from which `k` and `σ` can be derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceProvenance {
    /// Mirror mass, kg.
    pub mass: f64,
    /// Cavity length, m.
    pub cavity_length: f64,
    /// Optical angular frequency ω₀, rad/s.
    pub optical_freq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    k: f64,
    omega_m: Option<f64>,
    sigma: f64,
    kappa_over_omega: f64,
    gamma: f64,
    provenance: Option<DeviceProvenance>,
}

impl SystemParams {
    /// Weak-coupling bound on `k = g/ω_m`.
    pub const K_MAX: f64 = 0.25;

    /// `k` with σ = 1, κ = 10 ω_m and no damping.
    pub fn new(k: f64) -> Result<Self> {
        Self::builder(k).build()
    }

    pub fn builder(k: f64) -> SystemParamsBuilder {
        SystemParamsBuilder {
            k,
            omega_m: None,
            sigma: 1.0,
            kappa_over_omega: 10.0,
            gamma: 0.0,
            provenance: None,
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn omega_m(&self) -> Option<f64> {
        self.omega_m
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kappa_over_omega(&self) -> f64 {
        self.kappa_over_omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn provenance(&self) -> Option<&DeviceProvenance> {
        self.provenance.as_ref()
    }

    /// Same record with a different coupling.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        SystemParamsBuilder { k, ..self.to_builder() }.build()
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        SystemParamsBuilder { gamma, ..self.to_builder() }.build()
    }

    pub fn with_kappa(&self, kappa_over_omega: f64) -> Result<Self> {
        SystemParamsBuilder { kappa_over_omega, ..self.to_builder() }.build()
    }

    fn to_builder(self) -> SystemParamsBuilder {
        SystemParamsBuilder {
            k: self.k,
            omega_m: self.omega_m,
            sigma: self.sigma,
            kappa_over_omega: self.kappa_over_omega,
            gamma: self.gamma,
            provenance: self.provenance,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SystemParamsBuilder {
    k: f64,
    omega_m: Option<f64>,
    sigma: f64,
    kappa_over_omega: f64,
    gamma: f64,
    provenance: Option<DeviceProvenance>,
}

impl SystemParamsBuilder {
    pub fn omega_m(mut self, omega_m: f64) -> Self {
        self.omega_m = Some(omega_m);
        self
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn kappa_over_omega(mut self, kappa: f64) -> Self {
        self.kappa_over_omega = kappa;
        self
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Derive `σ = (ħ/2mω_m)^{1/2}` and `k = g/ω_m` with `g = (ω₀/L)σ`.
    /// Requires `omega_m` to be set; overrides `k` and `sigma`.
    pub fn from_device(mut self, device: DeviceProvenance) -> Self {
        const HBAR: f64 = 1.054_571_817e-34;
        if let Some(om) = self.omega_m {
            let sigma = (HBAR / (2.0 * device.mass * om)).sqrt();
            let g = device.optical_freq / device.cavity_length * sigma;
            self.sigma = sigma;
            self.k = g / om;
        }
        self.provenance = Some(device);
        self
    }

    pub fn build(self) -> Result<SystemParams> {
        if !(self.k > 0.0 && self.k <= SystemParams::K_MAX) {
            return Err(Error::InvalidParameter(format!(
                "coupling k must satisfy 0 < k <= 0.25, got {}",
                self.k
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.kappa_over_omega.is_finite() && self.kappa_over_omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa/omega_m must be > 0, got {}",
                self.kappa_over_omega
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if let Some(om) = self.omega_m {
            if !(om.is_finite() && om > 0.0) {
                return Err(Error::InvalidParameter(format!("omega_m must be > 0, got {om}")));
            }
        }
        Ok(SystemParams {
            k: self.k,
            omega_m: self.omega_m,
            sigma: self.sigma,
            kappa_over_omega: self.kappa_over_omega,
            gamma: self.gamma,
            provenance: self.provenance,
        })
    }
}
