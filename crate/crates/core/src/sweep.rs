//! Time sweeps with refinement around extrema.
//!
//! The amplification peaks are roughly `kTe^{−r}` wide, far narrower than a
//! uniform grid over several mechanical periods, so every interior local
//! extremum of the uniform grid is zoomed in on until the bracket is below
//! [`REFINE_RESOLUTION`].

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_POINTS: usize = 4001;
pub const REFINE_RESOLUTION: f64 = 1e-6;

/// Sub-samples per zoom level.
const ZOOM_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub refine: bool,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, points: usize, refine: bool) -> Result<Self> {
        if !(2..=10_000_000).contains(&points) {
            return Err(Error::InvalidParameter(format!("grid points must be in [2, 1e7], got {points}")));
        }
        if !(t_min.is_finite() && t_max.is_finite() && t_min <= t_max) {
            return Err(Error::InvalidParameter(format!("bad time interval [{t_min}, {t_max}]")));
        }
        Ok(Self { t_min, t_max, points, refine })
    }

    pub fn uniform(&self) -> Vec<f64> {
        let n = self.points;
        let span = self.t_max - self.t_min;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.t_max
                } else {
                    self.t_min + span * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// One evaluated time point. `value` is `None` where the evaluation was
/// flagged (vanishing postselection).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint<T> {
    pub t: f64,
    pub value: Option<f64>,
    pub extra: T,
}

/// Evaluate `f` on the grid (in parallel) and, if requested, refine around
/// each interior local maximum and minimum. The result is sorted by `t`.
///
/// `f` returns the scalar being swept plus an arbitrary payload; a flagged
/// point returns `(None, payload)`. Hard errors abort the sweep.
pub fn sweep<T, F>(grid: &TimeGrid, f: F) -> Result<Vec<SweepPoint<T>>>
where
    T: Send + Sync + Copy,
    F: Fn(f64) -> Result<(Option<f64>, T)> + Sync,
{
    let eval = |t: f64| f(t).map(|(value, extra)| SweepPoint { t, value, extra });
    let base: Vec<SweepPoint<T>> = grid.uniform().into_par_iter().map(eval).collect::<Result<_>>()?;

    let mut out = base.clone();
    if grid.refine && base.len() >= 3 {
        let spots: Vec<(usize, bool)> = local_extrema(&base);
        let extra: Vec<Vec<SweepPoint<T>>> = spots
            .into_par_iter()
            .map(|(i, is_max)| zoom(&eval, base[i - 1].t, base[i + 1].t, is_max))
            .collect::<Result<_>>()?;
        out.extend(extra.into_iter().flatten());
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    out.dedup_by(|a, b| a.t == b.t);
    Ok(out)
}

fn local_extrema<T>(pts: &[SweepPoint<T>]) -> Vec<(usize, bool)> {
    let mut found = Vec::new();
    for i in 1..pts.len() - 1 {
        let (Some(a), Some(b), Some(c)) = (pts[i - 1].value, pts[i].value, pts[i + 1].value) else {
            continue;
        };
        if b >= a && b >= c && (b > a || b > c) {
            found.push((i, true));
        } else if b <= a && b <= c && (b < a || b < c) {
            found.push((i, false));
        }
    }
    found
}

fn zoom<T, E>(eval: &E, mut lo: f64, mut hi: f64, is_max: bool) -> Result<Vec<SweepPoint<T>>>
where
    T: Copy,
    E: Fn(f64) -> Result<SweepPoint<T>>,
{
    let mut seen = Vec::new();
    let better = |a: f64, b: f64| if is_max { a > b } else { a < b };
    while hi - lo > 2.0 * REFINE_RESOLUTION {
        let step = (hi - lo) / ZOOM_SAMPLES as f64;
        let mut best: Option<(usize, f64)> = None;
        for j in 1..ZOOM_SAMPLES {
            let p = eval(lo + step * j as f64)?;
            if let Some(v) = p.value {
                if best.is_none_or(|(_, bv)| better(v, bv)) {
                    best = Some((j, v));
                }
            }
            seen.push(p);
        }
        let Some((j, _)) = best else { break };
        let centre = lo + step * j as f64;
        lo = centre - step;
        hi = centre + step;
    }
    Ok(seen)
}

/// Largest and smallest values of a sweep, with their times.
pub fn extremes<T>(pts: &[SweepPoint<T>]) -> Option<((f64, f64), (f64, f64))> {
    let mut max: Option<(f64, f64)> = None;
    let mut min: Option<(f64, f64)> = None;
    for p in pts {
        if let Some(v) = p.value {
            if max.is_none_or(|(_, m)| v > m) {
                max = Some((p.t, v));
            }
            if min.is_none_or(|(_, m)| v < m) {
                min = Some((p.t, v));
            }
        }
    }
    Some((max?, min?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 1, false).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 10_000_001, false).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 10, false).is_err());
        let g = TimeGrid::new(0.0, 1.0, 5, false).unwrap();
        assert_eq!(g.uniform(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn refinement_finds_narrow_peak() {
        // Lorentzian of width 1e-4 centred off-grid
        let centre = 0.123_456_7;
        let w = 1e-4;
        let f = |t: f64| Ok((Some(1.0 / (1.0 + ((t - centre) / w).powi(2))), ()));
        let coarse = TimeGrid::new(0.0, 1.0, 101, false).unwrap();
        let pts = sweep(&coarse, f).unwrap();
        let ((_, peak), _) = extremes(&pts).unwrap();
        assert!(peak < 0.5);

        let fine = TimeGrid::new(0.0, 1.0, 4001, true).unwrap();
        let pts = sweep(&fine, f).unwrap();
        let ((tp, peak), _) = extremes(&pts).unwrap();
        assert!((tp - centre).abs() < 2e-6, "{tp}");
        assert!(peak > 0.999);
        assert!(pts.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn flagged_points_are_kept_but_skipped() {
        let f = |t: f64| Ok((if t < 0.5 { None } else { Some(t) }, ()));
        let g = TimeGrid::new(0.0, 1.0, 11, true).unwrap();
        let pts = sweep(&g, f).unwrap();
        assert_eq!(pts.len(), 11);
        assert!(pts[0].value.is_none());
        let ((tmax, _), (tmin, _)) = extremes(&pts).unwrap();
        assert_eq!(tmax, 1.0);
        assert_eq!(tmin, 0.5);
    }
}
