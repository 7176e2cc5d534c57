//! Damped mirror dynamics under the zero-temperature Lindbladian
//! `dρ/dt = −i[H,ρ] + (γ/2)(2cρc† − c†cρ − ρc†c)`, integrated by fixed-step
//! classical RK4 on the dense density matrix.
//!
//! The joint photon-path/mirror state is carried as the mirror blocks
//! `ρ_AA`, `ρ_AB`, `ρ_BB` (with `ρ_BA = ρ_AB†`), each obeying
//! `dρ_XY/dt = −i(H_X ρ − ρ H_Y) + D[ρ]`. The blocks are integrated in the
//! interaction picture of `c†c`: the dissipator is unchanged by that
//! rotation, branch B becomes purely dissipative and branch A keeps only
//! `−k(c e^{−it} + c† e^{it})`, so the step size is set by the coupling and
//! the damping instead of by the truncation.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::analytic::{Postselected, PROB_FLOOR};
use crate::error::{Error, Result};
use crate::fock::{FockMatrix, FockSpace, FockVector, TAIL_TOLERANCE};
use crate::params::{CoherentParams, SqueezeParams, SystemParams};
use crate::protocol;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest accepted change of a conserved trace over one step.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-10;
/// Diagonal shift under which the Cholesky positivity test must succeed.
pub const POSITIVITY_SLACK: f64 = 1e-6;
/// Declared-trace and Hermiticity tolerances for [`DensityMatrix::new`].
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-8;
/// Steps between positivity checks of the joint state.
const POSITIVITY_EVERY: usize = 1000;

/// Step bound `min(10⁻³, 0.05/(1 + Nγ))`.
pub fn dt_max(dim: usize, gamma: f64) -> f64 {
    (1e-3f64).min(0.05 / (1.0 + dim as f64 * gamma))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    entries: Array2<C64>,
}

impl DensityMatrix {
    /// Validates shape and Hermiticity.
    pub fn new(space: FockSpace, entries: Array2<C64>) -> Result<Self> {
        let n = space.dim();
        if entries.dim() != (n, n) {
            return Err(Error::DimensionMismatch(n, entries.nrows()));
        }
        let rho = Self { space, entries };
        let defect = rho.hermiticity_defect();
        if defect > HERMITICITY_TOLERANCE {
            return Err(Error::InvalidParameter(format!("density matrix not Hermitian (defect {defect:e})")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|`, unnormalized.
    pub fn from_pure(v: &FockVector) -> Self {
        let a = v.amps();
        let n = a.len();
        let entries = Array2::from_shape_fn((n, n), |(i, j)| a[i] * a[j].conj());
        Self { space: v.space(), entries }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diag().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.space.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[[i, j]] - self.entries[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// `Tr(ρ A)`.
    pub fn expect(&self, op: &FockMatrix) -> Result<C64> {
        if op.space() != self.space {
            return Err(Error::DimensionMismatch(self.space.dim(), op.space().dim()));
        }
        let e = op.entries();
        let mut acc = ZERO;
        for ((i, j), r) in self.entries.indexed_iter() {
            acc += r * e[[j, i]];
        }
        Ok(acc)
    }

    /// `σ·Tr(ρ(c + c†))/Tr ρ`.
    pub fn expect_q(&self, sigma: f64) -> Result<f64> {
        let tr = self.trace();
        if tr < PROB_FLOOR {
            return Err(Error::ZeroNorm(tr));
        }
        Ok(sigma * 2.0 * lowering_trace(&self.entries).re / tr)
    }

    /// Whether `ρ + slack·I` admits a Cholesky factorization, i.e. the
    /// smallest eigenvalue exceeds `−slack`.
    pub fn is_positive(&self, slack: f64) -> bool {
        cholesky_succeeds(&self.entries, slack)
    }
}

/// `Tr(ρc) = Σ √n ρ[n][n−1]`.
fn lowering_trace(rho: &Array2<C64>) -> C64 {
    let n = rho.nrows();
    (1..n).map(|k| rho[[k, k - 1]] * (k as f64).sqrt()).sum()
}

fn cholesky_succeeds(m: &Array2<C64>, shift: f64) -> bool {
    let n = m.nrows();
    let mut l = Array2::<C64>::zeros((n, n));
    for j in 0..n {
        let mut d = m[[j, j]].re + shift;
        for p in 0..j {
            d -= l[[j, p]].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[[j, j]] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[[i, j]];
            for p in 0..j {
                s -= l[[i, p]] * l[[j, p]].conj();
            }
            l[[i, j]] = s / d;
        }
    }
    true
}

fn damping_into(rho: &Array2<C64>, gamma: f64, out: &mut Array2<C64>) {
    if gamma == 0.0 {
        return;
    }
    let n = rho.nrows();
    let half = 0.5 * gamma;
    for i in 0..n {
        for j in 0..n {
            let mut d = -((i + j) as f64) * rho[[i, j]];
            if i + 1 < n && j + 1 < n {
                d += 2.0 * (((i + 1) * (j + 1)) as f64).sqrt() * rho[[i + 1, j + 1]];
            }
            out[[i, j]] += half * d;
        }
    }
}

/// Right-hand side of the master equation for a static Hamiltonian.
pub fn lindblad_rhs(rho: &DensityMatrix, h: &FockMatrix, gamma: f64) -> Array2<C64> {
    let hm = h.entries();
    let comm = hm.dot(&rho.entries) - rho.entries.dot(hm);
    let mut out = comm.mapv(|z| -I * z);
    damping_into(&rho.entries, gamma, &mut out);
    out
}

fn check_step(dim: usize, gamma: f64, dt: f64) -> Result<()> {
    let bound = dt_max(dim, gamma);
    if !(dt > 0.0 && dt <= bound * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter(format!("step {dt} outside (0, {bound}]")));
    }
    Ok(())
}

/// One RK4 step of the master equation with static `h`.
pub fn lindblad_step(rho: &DensityMatrix, h: &FockMatrix, gamma: f64, dt: f64) -> Result<DensityMatrix> {
    if h.space() != rho.space {
        return Err(Error::DimensionMismatch(rho.space.dim(), h.space().dim()));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    check_step(rho.space.dim(), gamma, dt)?;
    let at = |m: Array2<C64>| DensityMatrix { space: rho.space, entries: m };
    let k1 = lindblad_rhs(rho, h, gamma);
    let k2 = lindblad_rhs(&at(&rho.entries + &(&k1 * (0.5 * dt))), h, gamma);
    let k3 = lindblad_rhs(&at(&rho.entries + &(&k2 * (0.5 * dt))), h, gamma);
    let k4 = lindblad_rhs(&at(&rho.entries + &(&k3 * dt)), h, gamma);
    let incr = (k1 + &k2 * 2.0 + &k3 * 2.0 + k4) * (dt / 6.0);
    let next = at(&rho.entries + &incr);
    let drift = (next.trace() - rho.trace()).abs();
    if drift > TRACE_DRIFT_LIMIT {
        return Err(Error::StepRejected { drift });
    }
    Ok(next)
}

/// Integrate to time `t` in `steps` equal steps.
pub fn lindblad_evolve_steps(
    rho: &DensityMatrix,
    h: &FockMatrix,
    gamma: f64,
    t: f64,
    steps: usize,
) -> Result<DensityMatrix> {
    if steps == 0 || !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("need t >= 0 and steps > 0, got t={t}, steps={steps}")));
    }
    let dt = t / steps as f64;
    let mut cur = rho.clone();
    if t == 0.0 {
        return Ok(cur);
    }
    for _ in 0..steps {
        cur = lindblad_step(&cur, h, gamma, dt)?;
    }
    Ok(cur)
}

/// Integrate to time `t` with the largest admissible uniform step.
pub fn lindblad_evolve(rho: &DensityMatrix, h: &FockMatrix, gamma: f64, t: f64) -> Result<DensityMatrix> {
    lindblad_evolve_steps(rho, h, gamma, t, steps_for(t, rho.space.dim(), gamma))
}

fn steps_for(t: f64, dim: usize, gamma: f64) -> usize {
    ((t / dt_max(dim, gamma)).ceil() as usize).max(1)
}

/// Photon-path ⊗ mirror density operator as interaction-picture blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDensity {
    space: FockSpace,
    /// Time reached, `ω_m t`.
    pub t: f64,
    pub aa: Array2<C64>,
    pub ab: Array2<C64>,
    pub bb: Array2<C64>,
}

impl JointDensity {
    /// Photon in `(|A⟩ + |B⟩)/√2`, mirror in `pointer`.
    pub fn from_pointer(pointer: &FockVector) -> Self {
        let half = DensityMatrix::from_pure(pointer).entries * 0.5;
        Self { space: pointer.space(), t: 0.0, aa: half.clone(), ab: half.clone(), bb: half }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// Unnormalized dark-port mirror state `½(ρ_AA − ρ_AB − ρ_BA + ρ_BB)`
    /// in the interaction picture.
    pub fn dark(&self) -> DensityMatrix {
        let ba = self.ab.t().mapv(|z| z.conj());
        let entries = (&self.aa - &self.ab - &ba + &self.bb) * 0.5;
        DensityMatrix { space: self.space, entries }
    }

    pub fn bright_probability(&self) -> f64 {
        let tr = |m: &Array2<C64>| m.diag().iter().sum::<C64>();
        0.5 * (tr(&self.aa) + tr(&self.ab) + tr(&self.ab).conj() + tr(&self.bb)).re
    }

    /// The full `2N × 2N` operator `[[ρ_AA, ρ_AB], [ρ_BA, ρ_BB]]`.
    pub fn assembled(&self) -> Array2<C64> {
        let n = self.space.dim();
        Array2::from_shape_fn((2 * n, 2 * n), |(i, j)| match (i < n, j < n) {
            (true, true) => self.aa[[i, j]],
            (true, false) => self.ab[[i, j - n]],
            (false, true) => self.ab[[j, i - n]].conj(),
            (false, false) => self.bb[[i - n, j - n]],
        })
    }

    pub fn is_positive(&self, slack: f64) -> bool {
        cholesky_succeeds(&self.assembled(), slack)
    }

    /// Dark-port `⟨q⟩` minus the free reference `ρ_BB`, in units of σ.
    pub fn postselected(&self) -> Result<Postselected> {
        let dark = self.dark();
        let survival_prob = dark.trace();
        if !(survival_prob >= PROB_FLOOR) {
            return Err(Error::VanishingPostselection { t: self.t, survival_prob });
        }
        let q_over_sigma = self.lab_q(&dark.entries, 1.0)? - self.lab_q(&self.bb, 1.0)?;
        Ok(Postselected { q_over_sigma, survival_prob })
    }

    /// Lab-frame `σ⟨q⟩` of a block: `2σ Re(e^{−it} Tr(ρc))/Tr ρ`.
    fn lab_q(&self, block: &Array2<C64>, sigma: f64) -> Result<f64> {
        let tr: f64 = block.diag().iter().map(|z| z.re).sum();
        if tr < PROB_FLOOR {
            return Err(Error::ZeroNorm(tr));
        }
        Ok(2.0 * sigma * (C64::from_polar(1.0, -self.t) * lowering_trace(block)).re / tr)
    }
}

/// `Ṽ_X ρ − ρ Ṽ_Y` plus damping for one block, where `Ṽ = u c + u* c†`.
struct BlockRhs {
    sqrt: Vec<f64>,
    gamma: f64,
}

impl BlockRhs {
    fn new(dim: usize, gamma: f64) -> Self {
        Self { sqrt: (0..=dim).map(|k| (k as f64).sqrt()).collect(), gamma }
    }

    fn eval(&self, rho: &[C64], u: C64, w: C64, n: usize, out: &mut [C64]) {
        let s = &self.sqrt;
        let (uc, wc) = (u.conj(), w.conj());
        let half = 0.5 * self.gamma;
        for i in 0..n {
            let row = &rho[i * n..(i + 1) * n];
            let up = (i + 1 < n).then(|| &rho[(i + 1) * n..(i + 2) * n]);
            let down = (i > 0).then(|| &rho[(i - 1) * n..i * n]);
            let o = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                // (Ṽ_X ρ)_ij
                let mut left = ZERO;
                if let Some(up) = up {
                    left += u * s[i + 1] * up[j];
                }
                if let Some(down) = down {
                    left += uc * s[i] * down[j];
                }
                // (ρ Ṽ_Y)_ij
                let mut right = ZERO;
                if j > 0 {
                    right += w * s[j] * row[j - 1];
                }
                if j + 1 < n {
                    right += wc * s[j + 1] * row[j + 1];
                }
                let mut d = -I * (left - right);
                if half != 0.0 {
                    let mut damp = -((i + j) as f64) * row[j];
                    if let Some(up) = up {
                        if j + 1 < n {
                            damp += 2.0 * s[i + 1] * s[j + 1] * up[j + 1];
                        }
                    }
                    d += half * damp;
                }
                o[j] = d;
            }
        }
    }
}

/// RK4 scratch space for one block.
struct Rk4 {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        Self { k: std::array::from_fn(|_| vec![ZERO; len]), tmp: vec![ZERO; len] }
    }

    /// Advance `rho` by `dt` from `t`; the couplings are `cx(t)` and `cy(t)`.
    fn step<F>(&mut self, rhs: &BlockRhs, rho: &mut [C64], n: usize, t: f64, dt: f64, coupling: F)
    where
        F: Fn(f64) -> (C64, C64),
    {
        let nodes = [0.0, 0.5 * dt, 0.5 * dt, dt];
        for stage in 0..4 {
            let (u, w) = coupling(t + nodes[stage]);
            if stage == 0 {
                rhs.eval(rho, u, w, n, &mut self.k[0]);
            } else {
                let h = nodes[stage];
                let (done, rest) = self.k.split_at_mut(stage);
                for ((x, r), p) in self.tmp.iter_mut().zip(rho.iter()).zip(done[stage - 1].iter()) {
                    *x = r + p * h;
                }
                rhs.eval(&self.tmp, u, w, n, &mut rest[0]);
            }
        }
        let c = dt / 6.0;
        let [k0, k1, k2, k3] = &self.k;
        for (idx, x) in rho.iter_mut().enumerate() {
            *x += (k0[idx] + 2.0 * k1[idx] + 2.0 * k2[idx] + k3[idx]) * c;
        }
    }
}

fn real_trace(m: &[C64], n: usize) -> f64 {
    (0..n).map(|i| m[i * n + i].re).sum()
}

/// Integrate the joint blocks from `state.t` to `t_end` with steps at most
/// [`dt_max`], checking trace drift every step and positivity every
/// [`POSITIVITY_EVERY`] steps and at the end.
pub fn integrate_joint(state: &JointDensity, t_end: f64, sys: &SystemParams) -> Result<JointDensity> {
    let span = t_end - state.t;
    if !(span >= 0.0) {
        return Err(Error::InvalidParameter(format!("cannot integrate backwards to {t_end}")));
    }
    let n = state.space.dim();
    let gamma = sys.gamma();
    if span == 0.0 {
        return Ok(state.clone());
    }
    let steps = steps_for(span, n, gamma);
    let dt = span / steps as f64;
    let rhs = BlockRhs::new(n, gamma);
    let k = sys.k();
    let coupling_a = move |s: f64| -k * C64::from_polar(1.0, -s);

    let take = |m: &Array2<C64>| m.iter().copied().collect::<Vec<_>>();
    let mut blocks = [take(&state.aa), take(&state.ab), take(&state.bb)];
    let mut scratch = Rk4::new(n * n);
    let mut traces = [real_trace(&blocks[0], n), real_trace(&blocks[2], n)];
    let mut out = state.clone();

    for step in 0..steps {
        let t = state.t + step as f64 * dt;
        scratch.step(&rhs, &mut blocks[0], n, t, dt, |s| (coupling_a(s), coupling_a(s)));
        scratch.step(&rhs, &mut blocks[1], n, t, dt, |s| (coupling_a(s), ZERO));
        scratch.step(&rhs, &mut blocks[2], n, t, dt, |_| (ZERO, ZERO));

        for (slot, block) in [(0, 0), (1, 2)] {
            let tr = real_trace(&blocks[block], n);
            let drift = (tr - traces[slot]).abs();
            if drift > TRACE_DRIFT_LIMIT {
                return Err(Error::StepRejected { drift });
            }
            traces[slot] = tr;
        }

        let last = step + 1 == steps;
        if last || (step + 1) % POSITIVITY_EVERY == 0 {
            let rebuild = |v: &Vec<C64>| Array2::from_shape_vec((n, n), v.clone()).expect("square block");
            out.aa = rebuild(&blocks[0]);
            out.ab = rebuild(&blocks[1]);
            out.bb = rebuild(&blocks[2]);
            out.t = if last { t_end } else { t + dt };
            if !out.is_positive(POSITIVITY_SLACK) {
                return Err(Error::PositivityLost { t: out.t });
            }
        }
    }
    Ok(out)
}

/// Damped counterpart of the postselected pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipativeValue {
    pub q_over_sigma: f64,
    pub survival_prob: f64,
    pub dim: usize,
    pub steps: usize,
}

/// Evolve the joint state for time `t` with the mirror damping `sys.gamma()`,
/// postselect on the dark port and return `⟨q⟩` minus the (damped) free
/// reference, in units of σ.
pub fn evolve_joint_dissipative(pointer: &FockVector, t: f64, sys: &SystemParams) -> Result<DissipativeValue> {
    let start = JointDensity::from_pointer(pointer);
    let end = integrate_joint(&start, t, sys)?;
    let post = end.postselected()?;
    Ok(DissipativeValue {
        q_over_sigma: post.q_over_sigma,
        survival_prob: post.survival_prob,
        dim: pointer.space().dim(),
        steps: if t > 0.0 { steps_for(t, pointer.space().dim(), sys.gamma()) } else { 0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipativeOptions {
    /// Fixed truncation; `None` doubles from the oracle's starting size
    /// until the initial pointer's tail is below `tail_tolerance`.
    pub dim: Option<usize>,
    pub tail_tolerance: f64,
    pub max_dim: usize,
}

impl Default for DissipativeOptions {
    fn default() -> Self {
        Self { dim: None, tail_tolerance: TAIL_TOLERANCE, max_dim: 2048 }
    }
}

/// Truncation for a damped run: the doubling gate applied to the
/// initial pointer.
pub fn dissipative_truncation(sq: &SqueezeParams, coh: &CoherentParams, opts: &DissipativeOptions) -> Result<usize> {
    if let Some(d) = opts.dim {
        return Ok(d);
    }
    let mut dim = protocol::default_truncation(sq, coh);
    while dim <= opts.max_dim {
        match protocol::prepare_pointer_within(sq, coh, FockSpace::new(dim)?, opts.tail_tolerance) {
            Ok(_) => return Ok(dim),
            Err(Error::TruncationTooSmall(_)) => dim *= 2,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ConvergenceFailed(format!(
        "initial pointer needs more than {} levels for tail {:e}",
        opts.max_dim, opts.tail_tolerance
    )))
}

/// Prepare the pointer and run [`evolve_joint_dissipative`].
pub fn dissipative_pipeline(
    t: f64,
    sq: &SqueezeParams,
    coh: &CoherentParams,
    sys: &SystemParams,
    opts: &DissipativeOptions,
) -> Result<DissipativeValue> {
    let dim = dissipative_truncation(sq, coh, opts)?;
    let pointer = protocol::prepare_pointer_within(sq, coh, FockSpace::new(dim)?, opts.tail_tolerance)?;
    evolve_joint_dissipative(&pointer, t, sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn step_bound() {
        assert_eq!(dt_max(100, 0.0), 1e-3);
        assert!((dt_max(250, 1.0) - 0.05 / 251.0).abs() < 1e-15);
        let s = space(10);
        let rho = DensityMatrix::from_pure(&s.vacuum());
        let h = fock::number(s);
        assert!(matches!(lindblad_step(&rho, &h, 0.0, 2e-3), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn construction_checks_hermiticity() {
        let s = space(3);
        let mut m = Array2::zeros((3, 3));
        m[[0, 1]] = C64::new(0.0, 1.0);
        assert!(DensityMatrix::new(s, m.clone()).is_err());
        m[[1, 0]] = C64::new(0.0, -1.0);
        assert!(DensityMatrix::new(s, m).is_ok());
    }

    #[test]
    fn positivity_test() {
        let s = space(4);
        let rho = DensityMatrix::from_pure(&s.coherent(C64::new(0.5, 0.2)));
        assert!(rho.is_positive(POSITIVITY_SLACK));
        let mut bad = rho.entries().clone();
        bad[[3, 3]] = C64::new(-1e-3, 0.0);
        assert!(!DensityMatrix { space: s, entries: bad }.is_positive(POSITIVITY_SLACK));
    }

    #[test]
    fn closed_system_matches_unitary() {
        let s = space(40);
        let sys = SystemParams::new(0.05).unwrap();
        let h = fock::hamiltonian_n(s, 1, &sys);
        let psi = s.coherent(C64::new(1.0, 0.5));
        let rho = lindblad_evolve(&DensityMatrix::from_pure(&psi), &h, 0.0, 0.5).unwrap();
        let exact = DensityMatrix::from_pure(&fock::evolve(&psi, &h, 0.5).unwrap());
        let diff = (rho.entries() - exact.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "diff {diff}");
        assert!(rho.hermiticity_defect() < 1e-12);
        let q = rho.expect_q(1.0).unwrap();
        assert!((q - fock::expect_q(&fock::evolve(&psi, &h, 0.5).unwrap(), 1.0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn single_phonon_decays_exponentially() {
        let s = space(6);
        let h = fock::number(s);
        let gamma = 0.3;
        let rho = lindblad_evolve(&DensityMatrix::from_pure(&s.basis(1)), &h, gamma, 2.0).unwrap();
        let n = rho.expect(&fock::number(s)).unwrap().re;
        assert!((n - (-gamma * 2.0f64).exp()).abs() < 1e-12, "n {n}");
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn joint_blocks_without_damping_match_pure_branches() {
        let s = space(60);
        let sys = SystemParams::new(0.02).unwrap();
        let p = s.squeezed_vacuum(C64::from_polar(0.5, 0.4));
        let p = fock::displace(&p, C64::new(0.3, -0.2)).unwrap();
        let t = 0.7;
        let end = integrate_joint(&JointDensity::from_pointer(&p), t, &sys).unwrap();
        let j = protocol::evolve_joint(&p, t, &sys).unwrap();
        let post = protocol::postselect_dark(&j);
        assert!((end.dark().trace() - post.survival_prob).abs() < 1e-12);
        let v = evolve_joint_dissipative(&p, t, &sys).unwrap();
        let q = protocol::mean_q_postselected(&post, &j.branch_b, 1.0).unwrap();
        assert!((v.q_over_sigma - q).abs() < 1e-9, "{} vs {q}", v.q_over_sigma);
        assert!((end.bright_probability() + end.dark().trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn damping_leaves_zero_time_untouched() {
        let s = space(20);
        let sys = SystemParams::new(0.01).unwrap().with_gamma(0.1).unwrap();
        let p = s.coherent(C64::new(0.5, 0.0));
        let start = JointDensity::from_pointer(&p);
        assert_eq!(integrate_joint(&start, 0.0, &sys).unwrap(), start);
        assert!(matches!(
            evolve_joint_dissipative(&p, 0.0, &sys),
            Err(Error::VanishingPostselection { .. })
        ));
    }
}
