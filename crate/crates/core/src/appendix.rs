//! Standard weak measurement with a ground-state pointer, for contrast.
//!
//! A qubit in `|+⟩` couples to the pointer through `exp[−ησ_z(c − c†)]`,
//! which is `D(ησ_z)` for real `η`. Postselecting on `ε|+⟩ + |−⟩` leaves
//! `½[(1+ε)D(η) − (1−ε)D(−η)]|0⟩ ≈ ε|0⟩ + η|1⟩`, whose shift is
//! `2εη/(ε² + η²)` in position and zero in momentum. Each quantity is
//! available both in that leading-order form and from the exact state.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, FockVector};

/// Bound on `|η|` and `|ε|`.
pub const WEAK_BOUND: f64 = 0.1;
/// Truncation for the exact pointer; the coherent tails at `|η| ≤ 0.1`
/// are far below double precision well before this.
pub const EXACT_DIM: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakMeasParams {
    eta: f64,
    eps_post: f64,
    sigma: f64,
}

impl WeakMeasParams {
    pub fn new(eta: f64, eps_post: f64, sigma: f64) -> Result<Self> {
        if !(eta.is_finite() && eta.abs() <= WEAK_BOUND) {
            return Err(Error::InvalidParameter(format!("|eta| must be <= {WEAK_BOUND}, got {eta}")));
        }
        if !(eps_post.is_finite() && eps_post.abs() <= WEAK_BOUND) {
            return Err(Error::InvalidParameter(format!("|eps| must be <= {WEAK_BOUND}, got {eps_post}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self { eta, eps_post, sigma })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eps_post(&self) -> f64 {
        self.eps_post
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Postselected pointer, unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakPointer {
    pub exact: FockVector,
    pub leading: FockVector,
}

pub fn pointer_state(p: &WeakMeasParams) -> WeakPointer {
    let space = FockSpace::new(EXACT_DIM).expect("fixed dimension is valid");
    let plus = space.coherent(C64::new(p.eta, 0.0));
    let minus = space.coherent(C64::new(-p.eta, 0.0));
    let exact = plus.combine(C64::new(0.5 * (1.0 + p.eps_post), 0.0), &minus, C64::new(-0.5 * (1.0 - p.eps_post), 0.0));
    let leading = space.vacuum().combine(C64::new(p.eps_post, 0.0), &space.basis(1), C64::new(p.eta, 0.0));
    WeakPointer { exact, leading }
}

/// A shift given both ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shift {
    pub closed_form: f64,
    pub exact: f64,
}

/// Position shift `2εη/(ε² + η²)·σ` and its exact-state counterpart
/// `⟨ψ|q|ψ⟩/⟨ψ|ψ⟩ − ⟨0|q|0⟩`.
pub fn mean_shift_q(p: &WeakMeasParams) -> Result<Shift> {
    let (e, n) = (p.eps_post, p.eta);
    let den = e * e + n * n;
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let ptr = pointer_state(p);
    let vac = ptr.exact.space().vacuum();
    let exact = fock::expect_q(&ptr.exact, p.sigma)? - fock::expect_q(&vac, p.sigma)?;
    Ok(Shift { closed_form: 2.0 * e * n / den * p.sigma, exact })
}

/// Momentum shift in units of `ħ/σ`: zero in closed form, and the exact
/// `⟨ψ|p|ψ⟩/⟨ψ|ψ⟩ − ⟨0|p|0⟩` with `p = (c − c†)ħ/(2iσ)`.
pub fn mean_shift_p(p: &WeakMeasParams) -> Result<Shift> {
    if p.eps_post == 0.0 && p.eta == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let ptr = pointer_state(p);
    let vac = ptr.exact.space().vacuum();
    let exact = (fock::expect_p(&ptr.exact)? - fock::expect_p(&vac)?) / p.sigma;
    Ok(Shift { closed_form: 0.0, exact })
}
