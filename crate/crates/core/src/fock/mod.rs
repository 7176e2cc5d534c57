//! Truncated Fock-space linear algebra for the brute-force oracle path.
//!
//! Everything here works on the N-level basis `|0⟩ … |N−1⟩` of the mirror
//! oscillator with `ħ = ω_m = 1`. Operators are dense `N×N` complex matrices
//! that remember their bandwidth, so applying a ladder-operator polynomial or
//! its exponential to a state costs O(N) per product instead of O(N²).

pub mod expm;

use std::fmt;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Mass allowed in the top tenth of the basis before a state counts as
/// unconverged.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Below this, `⟨ψ|ψ⟩` is treated as zero.
pub const NORM_FLOOR: f64 = 1e-30;

/// Residual imaginary part tolerated in a Hermitian expectation value.
const IMAG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("Fock dimension must be >= 2, got {dim}")));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of leading basis states considered free of truncation
    /// artifacts: `N − ⌈N/5⌉`.
    pub fn interior(&self) -> usize {
        self.dim - self.dim.div_ceil(5)
    }

    /// First index of the tail window `n ≥ N − ⌈N/10⌉`.
    pub fn tail_start(&self) -> usize {
        self.dim - self.dim.div_ceil(10)
    }

    pub fn basis(&self, n: usize) -> FockVector {
        assert!(n < self.dim, "basis index {n} outside dimension {}", self.dim);
        let mut amps = Array1::zeros(self.dim);
        amps[n] = ONE;
        FockVector { space: *self, amps }
    }

    pub fn vacuum(&self) -> FockVector {
        self.basis(0)
    }

    /// Closed-form coherent state `e^{−|α|²/2} Σ αⁿ/√n! |n⟩`, truncated.
    pub fn coherent(&self, alpha: C64) -> FockVector {
        let mut amps = Array1::zeros(self.dim);
        let mut a = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        amps[0] = a;
        for n in 1..self.dim {
            a *= alpha / (n as f64).sqrt();
            amps[n] = a;
        }
        FockVector { space: *self, amps }
    }

    /// Closed-form `S(ε)|0⟩`: only even levels, with
    /// `c_{2n+2}/c_{2n} = −e^{iθ} tanh r · √((2n+1)/(2n+2))`.
    pub fn squeezed_vacuum(&self, eps: C64) -> FockVector {
        let (r, theta) = eps.to_polar();
        let ratio = -C64::from_polar(r.tanh(), theta);
        let mut amps = Array1::zeros(self.dim);
        let mut a = C64::new(r.cosh().powf(-0.5), 0.0);
        amps[0] = a;
        let mut n = 0;
        while n + 2 < self.dim {
            let m = n as f64;
            a *= ratio * ((m + 1.0) / (m + 2.0)).sqrt();
            amps[n + 2] = a;
            n += 2;
        }
        FockVector { space: *self, amps }
    }
}

impl fmt::Display for FockSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fock({})", self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    space: FockSpace,
    amps: Array1<C64>,
}

impl FockVector {
    pub fn new(space: FockSpace, amps: Array1<C64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::DimensionMismatch(space.dim(), amps.len()));
        }
        Ok(Self { space, amps })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amps(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn into_amps(self) -> Array1<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 < NORM_FLOOR {
            return Err(Error::ZeroNorm(n2));
        }
        Ok(self.scaled(C64::new(1.0 / n2.sqrt(), 0.0)))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        debug_assert_eq!(self.space, other.space);
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, f: C64) -> Self {
        Self { space: self.space, amps: self.amps.mapv(|z| z * f) }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &FockVector, b: C64) -> Self {
        debug_assert_eq!(self.space, other.space);
        let mut amps = self.amps.mapv(|z| z * a);
        amps.scaled_add(b, &other.amps);
        Self { space: self.space, amps }
    }

    /// Fraction of `‖ψ‖²` held in the top tenth of the basis.
    pub fn tail_mass(&self) -> f64 {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return 0.0;
        }
        let tail: f64 = self.amps.iter().skip(self.space.tail_start()).map(|z| z.norm_sqr()).sum();
        tail / n2
    }

    pub fn check_converged(&self, tol: f64) -> Result<()> {
        let tail = self.tail_mass();
        if tail < tol {
            Ok(())
        } else {
            Err(Error::TruncationTooSmall(format!(
                "tail mass {tail:e} in {} exceeds {tol:e}",
                self.space
            )))
        }
    }

    /// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    /// The same state embedded in a larger (or truncated into a smaller) space.
    pub fn resized(&self, space: FockSpace) -> Self {
        let mut amps = Array1::zeros(space.dim());
        let n = space.dim().min(self.space.dim());
        amps.slice_mut(ndarray::s![..n]).assign(&self.amps.slice(ndarray::s![..n]));
        Self { space, amps }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    space: FockSpace,
    entries: Array2<C64>,
    band: usize,
    unitary: bool,
}

impl FockMatrix {
    pub fn new(space: FockSpace, entries: Array2<C64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != space.dim() || c != space.dim() {
            return Err(Error::DimensionMismatch(space.dim(), r.max(c)));
        }
        Ok(Self::from_parts(space, entries, false))
    }

    fn from_parts(space: FockSpace, entries: Array2<C64>, unitary: bool) -> Self {
        let band = bandwidth(&entries);
        Self { space, entries, band, unitary }
    }

    pub fn identity(space: FockSpace) -> Self {
        Self::from_parts(space, Array2::from_diag_elem(space.dim(), ONE), true)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    /// Largest `|i − j|` with a nonzero entry.
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn adjoint(&self) -> Self {
        let entries = self.entries.t().mapv(|z| z.conj());
        Self { space: self.space, entries, band: self.band, unitary: self.unitary }
    }

    pub fn matmul(&self, other: &FockMatrix) -> Self {
        debug_assert_eq!(self.space, other.space);
        Self::from_parts(
            self.space,
            self.entries.dot(&other.entries),
            self.unitary && other.unitary,
        )
    }

    pub fn scaled(&self, f: C64) -> Self {
        Self::from_parts(self.space, self.entries.mapv(|z| z * f), false)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &FockMatrix, b: C64) -> Self {
        let mut e = self.entries.mapv(|z| z * a);
        e.scaled_add(b, &other.entries);
        Self::from_parts(self.space, e, false)
    }

    pub fn commutator(&self, other: &FockMatrix) -> Self {
        self.matmul(other).combine(ONE, &other.matmul(self), -ONE)
    }

    /// `M·v` exploiting the bandwidth.
    pub fn apply(&self, v: &FockVector) -> FockVector {
        let mut out = Array1::zeros(self.space.dim());
        self.apply_into(&v.amps, &mut out);
        FockVector { space: self.space, amps: out }
    }

    pub(crate) fn apply_into(&self, v: &Array1<C64>, out: &mut Array1<C64>) {
        let n = self.space.dim();
        let b = self.band;
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let hi = (i + b + 1).min(n);
            let mut s = ZERO;
            for j in lo..hi {
                s += self.entries[[i, j]] * v[j];
            }
            out[i] = s;
        }
    }

    /// Upper bound on the induced 1-norm.
    pub fn one_norm(&self) -> f64 {
        expm::one_norm(&self.entries)
    }

    /// `exp(self)` as a dense matrix.
    pub fn exp(&self) -> Self {
        Self::from_parts(self.space, expm::expm(&self.entries), false)
    }

    /// `exp(scale·self)·v` without forming the exponential.
    pub fn exp_apply(&self, scale: C64, v: &FockVector) -> FockVector {
        let amps = expm::expm_apply(|x, out| self.apply_into(x, out), self.one_norm(), scale, &v.amps);
        FockVector { space: self.space, amps }
    }

    /// `max |M_ij − N_ij|` over rows and columns below `limit`.
    pub fn max_abs_diff_within(&self, other: &FockMatrix, limit: usize) -> f64 {
        let mut m = 0.0f64;
        for i in 0..limit {
            for j in 0..limit {
                m = m.max((self.entries[[i, j]] - other.entries[[i, j]]).norm());
            }
        }
        m
    }

    /// `‖(M†M − I)‖_max` on the interior block.
    pub fn interior_unitarity_defect(&self) -> f64 {
        let prod = self.adjoint().matmul(self);
        prod.max_abs_diff_within(&FockMatrix::identity(self.space), self.space.interior())
    }

    /// `⟨a|M|b⟩`.
    pub fn matrix_element(&self, a: &FockVector, b: &FockVector) -> C64 {
        a.inner(&self.apply(b))
    }
}

fn bandwidth(m: &Array2<C64>) -> usize {
    let mut band = 0;
    for ((i, j), z) in m.indexed_iter() {
        if *z != ZERO {
            band = band.max(i.abs_diff(j));
        }
    }
    band
}

/// Ladder operator `c` with `c|n⟩ = √n |n−1⟩`.
pub fn annihilation(space: FockSpace) -> FockMatrix {
    let n = space.dim();
    let mut e = Array2::zeros((n, n));
    for k in 1..n {
        e[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    FockMatrix::from_parts(space, e, false)
}

pub fn creation(space: FockSpace) -> FockMatrix {
    annihilation(space).adjoint()
}

/// `c†c`.
pub fn number(space: FockSpace) -> FockMatrix {
    let n = space.dim();
    let e = Array2::from_diag(&Array1::from_shape_fn(n, |k| C64::new(k as f64, 0.0)));
    FockMatrix::from_parts(space, e, false)
}

/// `c + c†`, the position quadrature in units of σ.
pub fn position(space: FockSpace) -> FockMatrix {
    let c = annihilation(space);
    c.combine(ONE, &c.adjoint(), ONE)
}

/// `(c − c†)/(2i)`, the momentum quadrature in units of ħ/σ (from
/// `c = q/2σ + iσp/ħ`).
pub fn momentum(space: FockSpace) -> FockMatrix {
    let c = annihilation(space);
    c.combine(ONE, &c.adjoint(), -ONE).scaled(C64::new(0.0, -0.5))
}

/// Anti-Hermitian generator `amp·c† − amp*·c` of `D(amp)`.
pub fn displacement_generator(space: FockSpace, amp: C64) -> FockMatrix {
    let c = annihilation(space);
    c.adjoint().combine(amp, &c, -amp.conj())
}

/// Anti-Hermitian generator `−½ε c†² + ½ε* c²` of `S(ε)`.
pub fn squeeze_generator(space: FockSpace, eps: C64) -> FockMatrix {
    let c = annihilation(space);
    let c2 = c.matmul(&c);
    c2.adjoint().combine(-eps * 0.5, &c2, eps.conj() * 0.5)
}

fn displacement_guard(space: FockSpace, amp: C64) -> Result<()> {
    let a = amp.norm();
    let need = a * a + 6.0 * a + 6.0;
    if need > space.dim() as f64 {
        return Err(Error::TruncationTooSmall(format!(
            "D({amp}) needs N >= {need:.1}, have {space}"
        )));
    }
    Ok(())
}

fn squeeze_guard(space: FockSpace, eps: C64) -> Result<()> {
    let s = eps.norm().sinh();
    let need = 10.0 * s * s + 10.0;
    if need > space.dim() as f64 {
        return Err(Error::TruncationTooSmall(format!(
            "S({eps}) needs N >= {need:.1}, have {space}"
        )));
    }
    Ok(())
}

/// `D(amp) = exp(amp·c† − amp*·c)` by dense matrix exponential.
pub fn displacement_op(space: FockSpace, amp: C64) -> Result<FockMatrix> {
    displacement_guard(space, amp)?;
    let mut m = displacement_generator(space, amp).exp();
    m.unitary = true;
    Ok(m)
}

/// `S(ε) = exp(−½ε c†² + ½ε* c²)` by dense matrix exponential.
pub fn squeeze_op(space: FockSpace, eps: C64) -> Result<FockMatrix> {
    squeeze_guard(space, eps)?;
    let mut m = squeeze_generator(space, eps).exp();
    m.unitary = true;
    Ok(m)
}

/// `D(amp)|v⟩` via the action of the exponential on the vector.
pub fn displace(v: &FockVector, amp: C64) -> Result<FockVector> {
    displacement_guard(v.space(), amp)?;
    if amp == ZERO {
        return Ok(v.clone());
    }
    Ok(displacement_generator(v.space(), amp).exp_apply(ONE, v))
}

/// `S(ε)|v⟩` via the action of the exponential on the vector.
pub fn squeeze(v: &FockVector, eps: C64) -> Result<FockVector> {
    squeeze_guard(v.space(), eps)?;
    if eps == ZERO {
        return Ok(v.clone());
    }
    Ok(squeeze_generator(v.space(), eps).exp_apply(ONE, v))
}

/// Mirror Hamiltonian in the `n`-photon branch, `c†c − k·n·(c + c†)`.
pub fn hamiltonian_n(space: FockSpace, photon_n: u32, sys: &SystemParams) -> FockMatrix {
    let coupling = sys.k() * photon_n as f64;
    number(space).combine(ONE, &position(space), C64::new(-coupling, 0.0))
}

/// `exp(−iHt)|state⟩`, failing if the result leaks into the truncation tail.
pub fn evolve(state: &FockVector, h: &FockMatrix, t: f64) -> Result<FockVector> {
    if state.space() != h.space() {
        return Err(Error::DimensionMismatch(state.space().dim(), h.space().dim()));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let out = if h.band() == 0 {
        // diagonal generators are exponentiated exactly
        let amps = Array1::from_shape_fn(state.space().dim(), |n| {
            (-I * h.entries()[[n, n]] * t).exp() * state.amps[n]
        });
        FockVector { space: state.space(), amps }
    } else {
        h.exp_apply(-I * t, state)
    };
    out.check_converged(TAIL_TOLERANCE)?;
    Ok(out)
}

fn hermitian_expectation(state: &FockVector, op: &FockMatrix) -> Result<f64> {
    let n2 = state.norm_sqr();
    if n2 < NORM_FLOOR {
        return Err(Error::ZeroNorm(n2));
    }
    let z = op.matrix_element(state, state) / n2;
    debug_assert!(
        z.im.abs() <= IMAG_TOLERANCE * (1.0 + z.re.abs()),
        "non-real expectation {z}"
    );
    Ok(z.re)
}

/// `σ·⟨ψ|(c + c†)|ψ⟩/⟨ψ|ψ⟩`.
pub fn expect_q(state: &FockVector, sigma: f64) -> Result<f64> {
    Ok(sigma * hermitian_expectation(state, &position(state.space()))?)
}

/// `⟨ψ|(c − c†)/(2i)|ψ⟩/⟨ψ|ψ⟩` in units of ħ/σ.
pub fn expect_p(state: &FockVector) -> Result<f64> {
    hermitian_expectation(state, &momentum(state.space()))
}

/// Variance of `c + c†` (units of σ²).
pub fn variance_q(state: &FockVector) -> Result<f64> {
    let x = position(state.space());
    let mean = hermitian_expectation(state, &x)?;
    let x2 = x.matmul(&x);
    Ok(hermitian_expectation(state, &x2)? - mean * mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn dimension_must_be_at_least_two() {
        assert!(FockSpace::new(1).is_err());
        assert!(FockSpace::new(2).is_ok());
    }

    #[test]
    fn annihilation_small_cases() {
        let c = annihilation(space(2));
        assert_eq!(c.entries()[[0, 1]], ONE);
        assert_eq!(c.entries()[[0, 0]], ZERO);
        assert_eq!(c.entries()[[1, 0]], ZERO);
        assert_eq!(c.entries()[[1, 1]], ZERO);

        let c4 = annihilation(space(4));
        assert!((c4.entries()[[2, 3]].re - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(c4.band(), 1);
    }

    #[test]
    fn canonical_commutation_on_interior() {
        let s = space(60);
        let c = annihilation(s);
        let comm = c.commutator(&c.adjoint());
        let dev = comm.max_abs_diff_within(&FockMatrix::identity(s), 48);
        assert!(dev < 1e-12, "deviation {dev}");
    }

    #[test]
    fn displacement_of_zero_is_identity() {
        let s = space(20);
        let d = displacement_op(s, ZERO).unwrap();
        assert!(d.max_abs_diff_within(&FockMatrix::identity(s), 20) < 1e-15);
    }

    #[test]
    fn displacement_vacuum_overlap() {
        let d = displacement_op(space(40), ONE).unwrap();
        assert!((d.entries()[[0, 0]].re - (-0.5f64).exp()).abs() < 1e-9);
        assert!(d.entries()[[0, 0]].im.abs() < 1e-9);
    }

    #[test]
    fn displacement_guard_trips() {
        // |a|^2 + 6|a| + 6 = 16 + 24 + 6 = 46 > 40
        assert!(matches!(
            displacement_op(space(40), C64::new(4.0, 0.0)),
            Err(Error::TruncationTooSmall(_))
        ));
        assert!(squeeze_op(space(40), C64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn displacement_commutation_phase() {
        let s = space(40);
        let a = C64::new(0.3, 0.0);
        let b = C64::new(0.0, 0.2);
        let da = displacement_op(s, a).unwrap();
        let db = displacement_op(s, b).unwrap();
        let phase = (a * b.conj() - a.conj() * b).exp();
        let lhs = da.matmul(&db);
        let rhs = db.matmul(&da).scaled(phase);
        let dev = lhs.max_abs_diff_within(&rhs, s.interior());
        assert!(dev < 1e-8, "dev {dev}");
    }

    #[test]
    fn squeeze_of_zero_is_identity() {
        let s = space(20);
        let m = squeeze_op(s, ZERO).unwrap();
        assert!(m.max_abs_diff_within(&FockMatrix::identity(s), 20) < 1e-15);
    }

    #[test]
    fn squeezed_vacuum_quadrature_variance() {
        // (c + c†)/2 has variance e^{-2r}/4 for θ = 0.
        let s = space(80);
        let m = squeeze_op(s, C64::new(1.0, 0.0)).unwrap();
        let v = m.apply(&s.vacuum());
        let var = variance_q(&v).unwrap() / 4.0;
        assert!((var - (-2.0f64).exp() / 4.0).abs() < 1e-6, "var {var}");
    }

    #[test]
    fn antisqueezed_quadrature_variance() {
        let s = space(900);
        let v = s.squeezed_vacuum(C64::from_polar(2.0, PI));
        assert!(v.tail_mass() < TAIL_TOLERANCE);
        let var = variance_q(&v).unwrap() / 4.0;
        assert!((var - 4f64.exp() / 4.0).abs() < 1e-8, "var {var}");
    }

    #[test]
    fn closed_squeezed_vacuum_matches_generator() {
        // generator action in a padded space, read back in the interior
        let eps = C64::from_polar(1.2, 0.7);
        let big = space(400);
        let num = squeeze(&big.vacuum(), eps).unwrap();
        let closed = big.squeezed_vacuum(eps);
        let diff = (0..200).map(|n| (num.amps()[n] - closed.amps()[n]).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "diff {diff}");
        assert!((closed.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_branches() {
        let s = space(8);
        let sys = SystemParams::new(0.005).unwrap();
        let h0 = hamiltonian_n(s, 0, &sys);
        for n in 0..8 {
            assert_eq!(h0.entries()[[n, n]], C64::new(n as f64, 0.0));
        }
        assert_eq!(h0.band(), 0);
        let h1 = hamiltonian_n(s, 1, &sys);
        assert_eq!(h1.band(), 1);
        assert!((h1.entries()[[0, 1]].re + 0.005).abs() < 1e-15);
    }

    #[test]
    fn evolve_trivial_cases() {
        let s = space(10);
        let h = number(s);
        let v = s.basis(1);
        assert_eq!(evolve(&v, &h, 0.0).unwrap(), v);
        let out = evolve(&v, &h, PI).unwrap();
        assert!((out.amps()[1] + ONE).norm() < 1e-14);
    }

    #[test]
    fn evolve_detects_leak_into_tail() {
        // a strongly driven oscillator in a tiny space
        let s = space(6);
        let sys = SystemParams::new(0.25).unwrap();
        let h = hamiltonian_n(s, 4, &sys);
        assert!(matches!(evolve(&s.vacuum(), &h, PI), Err(Error::TruncationTooSmall(_))));
    }

    #[test]
    fn expect_q_basics() {
        let s = space(40);
        assert!(expect_q(&s.vacuum(), 1.0).unwrap().abs() < 1e-15);
        let coh = s.coherent(ONE);
        assert!((expect_q(&coh, 1.0).unwrap() - 2.0).abs() < 1e-8);
        let sup = s.basis(0).combine(ONE, &s.basis(1), ONE);
        assert!((expect_q(&sup, 2.5).unwrap() - 2.5).abs() < 1e-14);
        let zero = s.vacuum().scaled(ZERO);
        assert!(matches!(expect_q(&zero, 1.0), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn expm_action_matches_dense_displacement() {
        let s = space(50);
        let amp = C64::new(0.7, -0.4);
        let dense = displacement_op(s, amp).unwrap().apply(&s.vacuum());
        let action = displace(&s.vacuum(), amp).unwrap();
        let closed = s.coherent(amp);
        for n in 0..30 {
            assert!((dense.amps()[n] - action.amps()[n]).norm() < 1e-12);
            assert!((closed.amps()[n] - action.amps()[n]).norm() < 1e-12);
        }
    }
}
