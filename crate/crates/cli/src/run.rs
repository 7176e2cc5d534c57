//! Scenario execution. Every scenario returns a finished [`Table`] plus
//! summary lines; nothing touches the filesystem here.

use std::sync::Mutex;

use pointer_amp::analytic::{self, frame_at};
use pointer_amp::appendix::{self, WeakMeasParams};
use pointer_amp::dissipation::{self, DissipativeOptions, JointDensity};
use pointer_amp::fock::{FockSpace, TAIL_TOLERANCE};
use pointer_amp::protocol::{self, OracleOptions};
use pointer_amp::quadrature::QuadOptions;
use pointer_amp::stats::{self, ArrivalModel, FeasibilityInput};
use pointer_amp::sweep::{self, SweepPoint, TimeGrid};
use pointer_amp::{CoherentParams, Error, SqueezeParams, SystemParams};
use rayon::prelude::*;

use crate::config::{RunConfig, Scenario};
use crate::error::CliError;
use crate::output::{format_float, Cell, Table};

/// Coherent amplitudes above this run the oracle in the displaced frame.
const DISPLACED_FRAME_ABOVE: f64 = 20.0;
/// Tolerances for `oracle-check`.
pub const ORACLE_Q_TOL: f64 = 1e-5;
pub const ORACLE_Q_TOL_DISPLACED: f64 = 1e-4;
pub const ORACLE_SURVIVAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Vec<String>,
    /// Set when the scenario's own pass/fail gate did not pass. The table is
    /// still written.
    pub gate_failure: Option<String>,
}

impl Outcome {
    fn new(table: Table, summary: Vec<String>) -> Self {
        Self { table, summary, gate_failure: None }
    }
}

/// Errors raised inside parallel evaluations, reported for the earliest `t`.
#[derive(Default)]
struct Failures(Mutex<Vec<(f64, Error)>>);

impl Failures {
    fn record(&self, t: f64, e: Error) {
        self.0.lock().expect("failure list poisoned").push((t, e));
    }

    fn check(self) -> Result<(), CliError> {
        let mut v = self.0.into_inner().expect("failure list poisoned");
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        match v.into_iter().next() {
            Some((t, e)) => Err(CliError::core_at(t, e)),
            None => Ok(()),
        }
    }
}

fn squeeze(cfg: &RunConfig) -> Result<SqueezeParams, CliError> {
    Ok(SqueezeParams::new(cfg.r, cfg.theta)?)
}

fn coherent(cfg: &RunConfig) -> Result<CoherentParams, CliError> {
    Ok(CoherentParams::new(cfg.alpha, cfg.beta)?)
}

fn system(cfg: &RunConfig) -> Result<SystemParams, CliError> {
    Ok(SystemParams::builder(cfg.k)
        .sigma(cfg.sigma)
        .kappa_over_omega(cfg.kappa[0])
        .gamma(cfg.gamma)
        .build()?)
}

fn time_grid(cfg: &RunConfig, refine: bool) -> Result<TimeGrid, CliError> {
    Ok(TimeGrid::new(cfg.grid.t_min, cfg.grid.t_max, cfg.grid.points, refine)?)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.scenario {
        Scenario::SweepVacuum => postselected_sweep(cfg, CoherentParams::vacuum()),
        Scenario::SweepCoherent => postselected_sweep(cfg, coherent(cfg)?),
        Scenario::ExpansionCheck => expansion_check(cfg),
        Scenario::ArrivalDensity => arrival_density(cfg),
        Scenario::SuccessProb => success_prob(cfg),
        Scenario::AverageDisplacement => average_displacement(cfg),
        Scenario::Feasibility => feasibility(cfg),
        Scenario::OracleCheck => oracle_check(),
        Scenario::LindbladCheck => lindblad_check(cfg),
        Scenario::Appendix => appendix_table(cfg),
    }
}

fn extremes_summary<T>(pts: &[SweepPoint<T>]) -> Vec<String> {
    match sweep::extremes(pts) {
        Some(((t_hi, hi), (t_lo, lo))) => vec![
            format!("max_q_over_sigma={} at omega_m_t={}", format_float(hi), format_float(t_hi)),
            format!("min_q_over_sigma={} at omega_m_t={}", format_float(lo), format_float(t_lo)),
        ],
        None => vec!["no finite values".into()],
    }
}

fn postselected_sweep(cfg: &RunConfig, coh: CoherentParams) -> Result<Outcome, CliError> {
    let (sq, sys) = (squeeze(cfg)?, system(cfg)?);
    let failures = Failures::default();
    let pts = sweep::sweep(&time_grid(cfg, cfg.grid.refine)?, |t| {
        match analytic::postselected(&frame_at(t, &sq, &coh, &sys)) {
            Ok(p) => Ok((Some(p.q_over_sigma), p.survival_prob)),
            Err(Error::VanishingPostselection { survival_prob, .. }) => Ok((None, survival_prob)),
            Err(e) => {
                failures.record(t, e);
                Ok((None, f64::NAN))
            }
        }
    })?;
    failures.check()?;

    let oracle: Option<Vec<Option<f64>>> = if cfg.oracle {
        let opts = OracleOptions { displaced_frame: coh.amp() > DISPLACED_FRAME_ABOVE, ..OracleOptions::default() };
        let failures = Failures::default();
        let vals = pts
            .par_iter()
            .map(|p| match protocol::oracle(p.t, &sq, &coh, &sys, &opts) {
                Ok(o) => Some(o.value.q_over_sigma),
                Err(Error::VanishingPostselection { .. }) => None,
                Err(e) => {
                    failures.record(p.t, e);
                    None
                }
            })
            .collect();
        failures.check()?;
        Some(vals)
    } else {
        None
    };

    let mut cols = vec!["omega_m_t", "q_over_sigma_analytic"];
    if oracle.is_some() {
        cols.push("q_over_sigma_oracle");
    }
    cols.extend(["survival_prob", "flag"]);
    let mut table = Table::new(&cols);
    for (i, p) in pts.iter().enumerate() {
        let mut row = vec![Cell::Num(p.t), Cell::opt(p.value)];
        let mut flagged = p.value.is_none();
        if let Some(o) = &oracle {
            row.push(Cell::opt(o[i]));
            flagged |= o[i].is_none();
        }
        row.push(Cell::Num(p.extra));
        row.push(Cell::text(if flagged { "VP" } else { "" }));
        table.push(row);
    }

    let mut summary = extremes_summary(&pts);
    if let Some(((_, hi), (_, lo))) = sweep::extremes(&pts) {
        let peak = hi.abs().max(lo.abs());
        summary.push(format!("amplification={}", format_float(analytic::amplification_factor(peak, &sys))));
    }
    if let Some(o) = &oracle {
        let worst = pts
            .iter()
            .zip(o)
            .filter_map(|(p, o)| Some((p.value? - (*o)?).abs()))
            .fold(0.0, f64::max);
        summary.push(format!("max_abs_diff_oracle={}", format_float(worst)));
    }
    Ok(Outcome::new(table, summary))
}

fn expansion_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (sq, coh, sys) = (squeeze(cfg)?, coherent(cfg)?, system(cfg)?);
    let vacuum = coh.amp() == 0.0;
    let failures = Failures::default();
    // payload: expansion value, or a flag code
    let pts = sweep::sweep(&time_grid(cfg, false)?, |t| {
        let exact = match analytic::mean_q_coherent(t, &sq, &coh, &sys) {
            Ok(q) => Some(q),
            Err(Error::VanishingPostselection { .. }) => None,
            Err(e) => {
                failures.record(t, e);
                None
            }
        };
        let approx = if vacuum {
            analytic::mean_q_vacuum_expansion(t, &sq, &sys)
        } else {
            analytic::mean_q_coherent_expansion(t, &sq, &coh, &sys)
        };
        let extra = match approx {
            Ok(a) => (a, ""),
            Err(Error::DomainViolation(_)) => (f64::NAN, "DOM"),
            Err(Error::VanishingPostselection { .. }) => (f64::NAN, "VP"),
            Err(e) => {
                failures.record(t, e);
                (f64::NAN, "")
            }
        };
        Ok((exact, extra))
    })?;
    failures.check()?;

    let mut table =
        Table::new(&["omega_m_t", "q_over_sigma_exact", "q_over_sigma_expansion", "rel_diff", "flag"]);
    let mut worst: f64 = 0.0;
    for p in &pts {
        let (approx, mut flag) = p.extra;
        let approx = (!approx.is_nan()).then_some(approx);
        if p.value.is_none() {
            flag = "VP";
        }
        let rel = match (p.value, approx) {
            (Some(e), Some(a)) if flag.is_empty() && e != 0.0 => Some(((a - e) / e).abs()),
            _ => None,
        };
        if let Some(r) = rel {
            worst = worst.max(r);
        }
        table.push(vec![Cell::Num(p.t), Cell::opt(p.value), Cell::opt(approx), Cell::opt(rel), Cell::text(flag)]);
    }

    let mut summary = vec![format!("max_rel_diff={}", format_float(worst))];
    let bound = sq.r().exp();
    if vacuum {
        let period = (0.5 * (cfg.grid.t_min + cfg.grid.t_max) / std::f64::consts::TAU).round().max(1.0)
            * std::f64::consts::TAU;
        let (t_hi, t_lo) = analytic::vacuum_expansion_extrema(period, &sq, &sys);
        for (name, t) in [("max", t_hi), ("min", t_lo)] {
            let v = analytic::mean_q_vacuum_expansion(t, &sq, &sys)?;
            summary.push(format!("expansion_{name}={} at omega_m_t={} (e^r={})", format_float(v), format_float(t), format_float(bound)));
        }
    } else {
        let ex = analytic::coherent_expansion_extrema(&sq, &coh);
        for (name, t) in [("max", ex.max_time), ("min", ex.min_time)] {
            match t {
                Some(t) => {
                    let v = analytic::mean_q_coherent_expansion(t, &sq, &coh, &sys)?;
                    summary.push(format!("expansion_{name}={} at omega_m_t={} (e^r={})", format_float(v), format_float(t), format_float(bound)));
                }
                None => summary.push(format!("expansion_{name}: none for t > 0")),
            }
        }
        if let Some(p) = ex.plateau {
            summary.push(format!("expansion plateau: {p:?} at every small t"));
        }
    }
    Ok(Outcome::new(table, summary))
}

fn arrival_density(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (sq, coh, sys) = (squeeze(cfg)?, coherent(cfg)?, system(cfg)?);
    let times = time_grid(cfg, false)?.uniform();
    let mut table = Table::new(&["omega_m_t", "density", "kappa_over_omega"]);
    let mut summary = Vec::new();
    for &kappa in &cfg.kappa {
        let model = ArrivalModel::new(sq, coh, sys.with_kappa(kappa)?)?;
        let dens: Vec<f64> = times
            .par_iter()
            .map(|&t| stats::arrival_density(t, &model).map_err(|e| CliError::core_at(t, e)))
            .collect::<Result<_, _>>()?;
        let (t_mode, _) = times.iter().zip(&dens).fold((0.0, f64::MIN), |b, (&t, &d)| if d > b.1 { (t, d) } else { b });
        summary.push(format!("kappa_over_omega={} mode_omega_m_t={}", format_float(kappa), format_float(t_mode)));
        for (&t, &d) in times.iter().zip(&dens) {
            table.push(vec![Cell::Num(t), Cell::Num(d), Cell::Num(kappa)]);
        }
    }
    Ok(Outcome::new(table, summary))
}

fn success_prob(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (sq, coh, sys) = (squeeze(cfg)?, coherent(cfg)?, system(cfg)?);
    let mut table = Table::new(&[
        "kappa_over_omega",
        "quadrature",
        "error_bound",
        "closed_form",
        "closed_form_as_printed",
        "rel_diff",
    ]);
    let mut summary = Vec::new();
    for &kappa in &cfg.kappa {
        let model = ArrivalModel::new(sq, coh, sys.with_kappa(kappa)?)?;
        let p = stats::success_probability(&model, &QuadOptions::default())?;
        let closed = p.closed_form().ok();
        let rel = closed.map(|c| ((p.quadrature - c.value) / c.value).abs());
        table.push(vec![
            Cell::Num(kappa),
            Cell::Num(p.quadrature),
            Cell::Num(p.error_bound),
            Cell::opt(closed.map(|c| c.value)),
            Cell::opt(closed.map(|c| c.as_printed)),
            Cell::opt(rel),
        ]);
        summary.push(format!(
            "kappa_over_omega={} success_prob={} per_k2={}",
            format_float(kappa),
            format_float(p.quadrature),
            format_float(p.quadrature / (cfg.k * cfg.k))
        ));
    }
    Ok(Outcome::new(table, summary))
}

fn average_displacement(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (sq, coh, sys) = (squeeze(cfg)?, coherent(cfg)?, system(cfg)?);
    let mut table = Table::new(&[
        "kappa_over_omega",
        "q_over_sigma",
        "quad_error",
        "success_prob",
        "excluded_mass",
        "tail_mass",
        "flag",
    ]);
    let mut summary = Vec::new();
    for &kappa in &cfg.kappa {
        let model = ArrivalModel::new(sq, coh, sys.with_kappa(kappa)?)?;
        // the peaks are far narrower than the arrival window, so the
        // quadrature always gets breakpoints at them
        let avg = stats::average_displacement(&model, true, &QuadOptions::default())?;
        table.push(vec![
            Cell::Num(kappa),
            Cell::Num(avg.q_over_sigma),
            Cell::Num(avg.quad_error),
            Cell::Num(avg.success_prob),
            Cell::Num(avg.excluded_mass),
            Cell::Num(avg.tail_mass),
            Cell::text(if avg.accuracy_warning() { "ACCURACY" } else { "" }),
        ]);
        summary.push(format!(
            "kappa_over_omega={} average_q_over_sigma={}",
            format_float(kappa),
            format_float(avg.q_over_sigma)
        ));
    }
    Ok(Outcome::new(table, summary))
}

fn feasibility(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let input = FeasibilityInput {
        dark_count_rate: cfg.dark_count.expect("validated"),
        mech_freq: cfg.mech_freq.expect("validated"),
        kappa_over_omega: cfg.kappa[0],
    };
    let rep = stats::feasibility(&input)?;
    let mut table = Table::new(&[
        "dark_count_rate",
        "mech_freq",
        "kappa_over_omega",
        "success_coefficient",
        "kappa_rad_s",
        "window_s",
        "k_min",
    ]);
    table.push(
        [
            input.dark_count_rate,
            input.mech_freq,
            input.kappa_over_omega,
            rep.success_coefficient,
            rep.kappa_rad_s,
            rep.window_s,
            rep.k_min,
        ]
        .map(Cell::Num)
        .to_vec(),
    );
    let summary = vec![
        format!("success_coefficient={}", format_float(rep.success_coefficient)),
        format!("kappa_rad_s={}", format_float(rep.kappa_rad_s)),
        format!("window_s={}", format_float(rep.window_s)),
        format!("k_min={}", format_float(rep.k_min)),
    ];
    Ok(Outcome::new(table, summary))
}

fn oracle_check() -> Result<Outcome, CliError> {
    let cases = protocol::regression_cases();
    let rows: Vec<(Option<f64>, Option<f64>, bool)> = cases
        .par_iter()
        .map(|c| {
            let a = c.analytic().ok();
            let o = c.oracle().ok().map(|o| o.value);
            let tol = if c.displaced { ORACLE_Q_TOL_DISPLACED } else { ORACLE_Q_TOL };
            let pass = match (a, o) {
                (Some(a), Some(o)) => {
                    (a.q_over_sigma - o.q_over_sigma).abs() < tol
                        && (a.survival_prob - o.survival_prob).abs() < ORACLE_SURVIVAL_TOL
                }
                _ => false,
            };
            (a.map(|a| a.q_over_sigma), o.map(|o| o.q_over_sigma), pass)
        })
        .collect();

    let mut table = Table::new(&["case_id", "analytic", "oracle", "abs_diff", "pass"]);
    for (c, &(a, o, pass)) in cases.iter().zip(&rows) {
        let diff = a.zip(o).map(|(a, o)| (a - o).abs());
        table.push(vec![Cell::text(c.id), Cell::opt(a), Cell::opt(o), Cell::opt(diff), Cell::text(pass.to_string())]);
    }
    let passed = rows.iter().filter(|r| r.2).count();
    let n = rows.len();
    let mut out = Outcome::new(table, vec![format!("{} {passed}/{n}", if passed == n { "PASS" } else { "FAIL" })]);
    if passed != n {
        out.gate_failure = Some(format!("oracle-check: {} of {n} cases failed", n - passed));
    }
    Ok(out)
}

fn lindblad_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (sq, coh, sys) = (squeeze(cfg)?, coherent(cfg)?, system(cfg)?);
    let opts = DissipativeOptions {
        dim: cfg.dim,
        tail_tolerance: cfg.tail_tol.unwrap_or(TAIL_TOLERANCE),
        ..DissipativeOptions::default()
    };
    let dim = dissipation::dissipative_truncation(&sq, &coh, &opts)?;
    let pointer = protocol::prepare_pointer_within(&sq, &coh, FockSpace::new(dim)?, opts.tail_tolerance)?;
    if cfg.grid.t_min < 0.0 {
        return Err(CliError::Config(format!("lindblad-check needs tmin >= 0, got {}", cfg.grid.t_min)));
    }
    let times = time_grid(cfg, false)?.uniform();

    // one trajectory, advanced from grid point to grid point
    let mut state = JointDensity::from_pointer(&pointer);
    let mut table =
        Table::new(&["omega_m_t", "q_over_sigma_analytic", "q_over_sigma_damped", "survival_prob", "flag"]);
    for &t in &times {
        state = dissipation::integrate_joint(&state, t, &sys).map_err(|e| CliError::core_at(t, e))?;
        let analytic = match analytic::mean_q_coherent(t, &sq, &coh, &sys) {
            Ok(q) => Some(q),
            Err(Error::VanishingPostselection { .. }) => None,
            Err(e) => return Err(CliError::core_at(t, e)),
        };
        let (damped, surv) = match state.postselected() {
            Ok(p) => (Some(p.q_over_sigma), Some(p.survival_prob)),
            Err(Error::VanishingPostselection { survival_prob, .. }) => (None, Some(survival_prob)),
            Err(e) => return Err(CliError::core_at(t, e)),
        };
        let flag = if analytic.is_none() || damped.is_none() { "VP" } else { "" };
        table.push(vec![Cell::Num(t), Cell::opt(analytic), Cell::opt(damped), Cell::opt(surv), Cell::text(flag)]);
    }
    Ok(Outcome::new(table, vec![format!("dim={dim} gamma={}", format_float(cfg.gamma))]))
}

fn appendix_table(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut table =
        Table::new(&["eta", "eps", "shift_q_closed", "shift_q_exact", "shift_p_closed", "shift_p_exact", "flag"]);
    let mut worst: f64 = 0.0;
    for &eta in &cfg.eta {
        for &eps in &cfg.eps {
            let p = WeakMeasParams::new(eta, eps, cfg.sigma)?;
            match (appendix::mean_shift_q(&p), appendix::mean_shift_p(&p)) {
                (Ok(q), Ok(m)) => {
                    worst = worst.max((q.exact - q.closed_form).abs()).max((m.exact - m.closed_form).abs());
                    table.push(vec![
                        Cell::Num(eta),
                        Cell::Num(eps),
                        Cell::Num(q.closed_form),
                        Cell::Num(q.exact),
                        Cell::Num(m.closed_form),
                        Cell::Num(m.exact),
                        Cell::text(""),
                    ]);
                }
                (Err(Error::ZeroDenominator), _) | (_, Err(Error::ZeroDenominator)) => {
                    let mut row = vec![Cell::Num(eta), Cell::Num(eps)];
                    row.extend(std::iter::repeat_n(Cell::Missing, 4));
                    row.push(Cell::text("ZD"));
                    table.push(row);
                }
                (Err(e), _) | (_, Err(e)) => return Err(e.into()),
            }
        }
    }
    Ok(Outcome::new(table, vec![format!("max_abs_diff={}", format_float(worst))]))
}
