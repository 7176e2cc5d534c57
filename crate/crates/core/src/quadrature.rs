//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! The interval is split at caller-supplied breakpoints into panels, the
//! panels are integrated concurrently, and every sum goes through
//! [`NeumaierSum`] in a fixed order so the result does not depend on
//! thread scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
/// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Compensated (Kahan–Babuška–Neumaier) summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Subinterval budget per panel.
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-10, max_intervals: 20_000 }
    }
}

/// Integral of each component with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<const M: usize> {
    pub value: [f64; M],
    pub error: [f64; M],
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece<const M: usize> {
    a: f64,
    b: f64,
    value: [f64; M],
    error: [f64; M],
}

fn kronrod<const M: usize, F>(f: &F, a: f64, b: f64) -> Result<Piece<M>>
where
    F: Fn(f64) -> Result<[f64; M]>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut k = [0.0; M];
    let mut g = [0.0; M];
    for m in 0..M {
        k[m] = WGK[7] * fc[m];
        g[m] = WG[3] * fc[m];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        for m in 0..M {
            let s = f1[m] + f2[m];
            k[m] += WGK[j] * s;
            if j % 2 == 1 {
                g[m] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; M];
    let mut error = [0.0; M];
    for m in 0..M {
        value[m] = k[m] * half;
        error[m] = ((k[m] - g[m]) * half).abs();
    }
    Ok(Piece { a, b, value, error })
}

fn totals<const M: usize>(pieces: &[Piece<M>]) -> ([f64; M], [f64; M]) {
    let mut v = [0.0; M];
    let mut e = [0.0; M];
    for m in 0..M {
        v[m] = pieces.iter().map(|p| p.value[m]).collect::<NeumaierSum>().value();
        e[m] = pieces.iter().map(|p| p.error[m]).collect::<NeumaierSum>().value();
    }
    (v, e)
}

fn adapt<const M: usize, F>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> Result<Quadrature<M>>
where
    F: Fn(f64) -> Result<[f64; M]>,
{
    let mut pieces = vec![kronrod(f, a, b)?];
    let mut evaluations = 15;
    loop {
        let (value, error) = totals(&pieces);
        let scale: [f64; M] = std::array::from_fn(|m| opts.abs_tol.max(opts.rel_tol * value[m].abs()));
        if (0..M).all(|m| error[m] <= scale[m]) {
            return Ok(Quadrature { value, error, intervals: pieces.len(), evaluations });
        }
        if pieces.len() >= opts.max_intervals {
            return Err(Error::ConvergenceFailed(format!(
                "quadrature on [{a}, {b}] kept error {error:?} after {} subintervals",
                pieces.len()
            )));
        }
        let badness = |p: &Piece<M>| (0..M).map(|m| p.error[m] / scale[m]).fold(0.0, f64::max);
        let worst = (0..pieces.len())
            .max_by(|&i, &j| badness(&pieces[i]).total_cmp(&badness(&pieces[j])))
            .expect("at least one piece");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::ConvergenceFailed(format!("quadrature interval collapsed near {mid}")));
        }
        pieces.push(kronrod(f, p.a, mid)?);
        pieces.push(kronrod(f, mid, p.b)?);
        evaluations += 30;
    }
}

/// Integrate over `[a, b]`.
pub fn integrate<const M: usize, F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Quadrature<M>>
where
    F: Fn(f64) -> Result<[f64; M]> + Sync,
{
    integrate_panels(f, &[a, b], opts)
}

/// Integrate over `[edges[0], edges.last()]`, one adaptive panel per pair
/// of consecutive edges. Edges are sorted and deduplicated first.
pub fn integrate_panels<const M: usize, F>(f: F, edges: &[f64], opts: &QuadOptions) -> Result<Quadrature<M>>
where
    F: Fn(f64) -> Result<[f64; M]> + Sync,
{
    let mut e: Vec<f64> = edges.to_vec();
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite quadrature edge".into()));
    }
    e.sort_by(f64::total_cmp);
    e.dedup();
    if e.len() < 2 {
        return Ok(Quadrature { value: [0.0; M], error: [0.0; M], intervals: 0, evaluations: 0 });
    }
    let panels: Vec<Quadrature<M>> = e
        .par_windows(2)
        .map(|w| adapt(&f, w[0], w[1], opts))
        .collect::<Result<_>>()?;
    let mut value = [0.0; M];
    let mut error = [0.0; M];
    for m in 0..M {
        value[m] = panels.iter().map(|p| p.value[m]).collect::<NeumaierSum>().value();
        error[m] = panels.iter().map(|p| p.error[m]).collect::<NeumaierSum>().value();
    }
    Ok(Quadrature {
        value,
        error,
        intervals: panels.iter().map(|p| p.intervals).sum(),
        evaluations: panels.iter().map(|p| p.evaluations).sum(),
    })
}
