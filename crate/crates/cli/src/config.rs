//! Run configuration: a flat `key = value` file overlaid by command-line flags.
//!
//! File grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' anything
//! entry   := key '=' value [comment]
//! key     := [a-z_-]+            (dashes and underscores are interchangeable)
//! ```
//!
//! Values are trimmed. Angles (`theta`, `beta`) accept expressions such as
//! `pi/2` or `2pi`; `kappa`, `eta` and `eps` accept comma-separated lists;
//! booleans accept `true/false/yes/no/1/0`. Repeating a key is an error.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::angle::parse_angle;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    SweepVacuum,
    SweepCoherent,
    ExpansionCheck,
    ArrivalDensity,
    SuccessProb,
    AverageDisplacement,
    Feasibility,
    OracleCheck,
    LindbladCheck,
    Appendix,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::SweepVacuum,
        Scenario::SweepCoherent,
        Scenario::ExpansionCheck,
        Scenario::ArrivalDensity,
        Scenario::SuccessProb,
        Scenario::AverageDisplacement,
        Scenario::Feasibility,
        Scenario::OracleCheck,
        Scenario::LindbladCheck,
        Scenario::Appendix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SweepVacuum => "sweep-vacuum",
            Scenario::SweepCoherent => "sweep-coherent",
            Scenario::ExpansionCheck => "expansion-check",
            Scenario::ArrivalDensity => "arrival-density",
            Scenario::SuccessProb => "success-prob",
            Scenario::AverageDisplacement => "average-displacement",
            Scenario::Feasibility => "feasibility",
            Scenario::OracleCheck => "oracle-check",
            Scenario::LindbladCheck => "lindblad-check",
            Scenario::Appendix => "appendix",
        }
    }

    /// Figure whose data the scenario regenerates, if any.
    pub fn figure(self) -> Option<&'static str> {
        match self {
            Scenario::SweepVacuum => Some("Fig. 2"),
            Scenario::SweepCoherent => Some("Fig. 3"),
            Scenario::ArrivalDensity => Some("Fig. 4"),
            _ => None,
        }
    }

    fn needs_k(self) -> bool {
        !matches!(self, Scenario::Feasibility | Scenario::OracleCheck | Scenario::Appendix)
    }

    fn default_grid(self, alpha: f64) -> (f64, f64, usize) {
        match self {
            Scenario::SweepVacuum => (0.0, 26.0, 4001),
            Scenario::SweepCoherent => (0.0, 1.0, 4001),
            Scenario::ExpansionCheck if alpha > 0.0 => (0.0, 0.3, 601),
            Scenario::ExpansionCheck => (TAU - 0.3, TAU + 0.3, 601),
            Scenario::ArrivalDensity => (0.0, 2.0, 2001),
            Scenario::LindbladCheck => (0.0, 8.0, 81),
            _ => (0.0, 1.0, 2),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let norm = s.trim().replace('_', "-");
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == norm)
            .ok_or_else(|| CliError::Config(format!("unknown scenario {s:?}")))
    }
}

pub const KEYS: [&str; 21] = [
    "scenario", "k", "r", "theta", "alpha", "beta", "kappa", "gamma", "sigma", "tmin", "tmax", "points",
    "refine", "oracle", "out", "dark_count", "mech_freq", "dim", "tail_tol", "eta", "eps",
];

fn canonical_key(raw: &str) -> Result<String, CliError> {
    let key = raw.trim().to_ascii_lowercase().replace('-', "_");
    if KEYS.contains(&key.as_str()) {
        Ok(key)
    } else {
        Err(CliError::Config(format!("unknown key {raw:?}")))
    }
}

/// Raw settings keyed by canonical key name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    entries: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| CliError::Config(format!("line {}: {msg}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected key = value, got {line:?}")))?;
            let key = canonical_key(key).map_err(|e| at(e.to_string()))?;
            let value = value.trim();
            if value.is_empty() {
                return Err(at(format!("empty value for {key}")));
            }
            if entries.insert(key.clone(), value.to_string()).is_some() {
                return Err(at(format!("duplicate key {key}")));
            }
        }
        Ok(Self { entries })
    }

    /// Set or replace one entry (used for command-line overrides).
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        self.entries.insert(canonical_key(key)?, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::Config(format!("{key}: expected a finite number, got {v:?}")))
            })
            .transpose()
    }

    fn angle(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(parse_angle).transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key)
            .map(|v| v.parse::<usize>().map_err(|_| CliError::Config(format!("{key}: expected a count, got {v:?}"))))
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.get(key).map(str::to_ascii_lowercase).as_deref() {
            None | Some("false" | "no" | "0") => Ok(false),
            Some("true" | "yes" | "1") => Ok(true),
            Some(v) => Err(CliError::Config(format!("{key}: expected a boolean, got {v:?}"))),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.get(key) else { return Ok(None) };
        v.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::Config(format!("{key}: bad list entry {x:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub refine: bool,
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub k: f64,
    pub r: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: Vec<f64>,
    pub gamma: f64,
    pub sigma: f64,
    pub grid: GridSpec,
    pub oracle: bool,
    pub out: Option<PathBuf>,
    pub dark_count: Option<f64>,
    pub mech_freq: Option<f64>,
    pub dim: Option<usize>,
    pub tail_tol: Option<f64>,
    pub eta: Vec<f64>,
    pub eps: Vec<f64>,
}

impl RunConfig {
    /// Resolve settings for `scenario`; a `scenario` key, if present, must agree.
    pub fn resolve(scenario: Option<Scenario>, s: &Settings) -> Result<Self, CliError> {
        let from_file = s.get("scenario").map(Scenario::from_str).transpose()?;
        let scenario = match (scenario, from_file) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Config(format!("scenario {a} conflicts with configured {b}")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(CliError::Config("no scenario given".into())),
        };

        let k = match (s.number("k")?, scenario.needs_k()) {
            (Some(k), _) => k,
            (None, false) => 0.0,
            (None, true) => return Err(CliError::Config(format!("{scenario} requires k"))),
        };
        let alpha = match (s.number("alpha")?, scenario) {
            (Some(a), _) => a,
            (None, Scenario::SweepCoherent) => {
                return Err(CliError::Config("sweep-coherent requires alpha".into()))
            }
            (None, _) => 0.0,
        };
        let (dark_count, mech_freq) = (s.number("dark_count")?, s.number("mech_freq")?);
        if scenario == Scenario::Feasibility && (dark_count.is_none() || mech_freq.is_none()) {
            return Err(CliError::Config("feasibility requires dark_count and mech_freq".into()));
        }

        let (t0, t1, n) = scenario.default_grid(alpha);
        let grid = GridSpec {
            t_min: s.number("tmin")?.unwrap_or(t0),
            t_max: s.number("tmax")?.unwrap_or(t1),
            points: s.count("points")?.unwrap_or(n),
            refine: s.flag("refine")?,
        };
        if !(2..=10_000_000).contains(&grid.points) {
            return Err(CliError::Config(format!("points must be in [2, 1e7], got {}", grid.points)));
        }
        if grid.t_min > grid.t_max {
            return Err(CliError::Config(format!("tmin {} > tmax {}", grid.t_min, grid.t_max)));
        }

        let kappa = s.list("kappa")?.unwrap_or_else(|| vec![10.0]);
        if kappa.is_empty() || kappa.iter().any(|&x| x <= 0.0) {
            return Err(CliError::Config("kappa entries must be > 0".into()));
        }
        if scenario == Scenario::Feasibility && kappa.len() != 1 {
            return Err(CliError::Config("feasibility takes a single kappa".into()));
        }

        Ok(Self {
            scenario,
            k,
            r: s.number("r")?.unwrap_or(0.0),
            theta: s.angle("theta")?.unwrap_or(0.0),
            alpha,
            beta: s.angle("beta")?.unwrap_or(0.0),
            kappa,
            gamma: s.number("gamma")?.unwrap_or(0.0),
            sigma: s.number("sigma")?.unwrap_or(1.0),
            grid,
            oracle: s.flag("oracle")?,
            out: s.get("out").map(PathBuf::from),
            dark_count,
            mech_freq,
            dim: s.count("dim")?,
            tail_tol: s.number("tail_tol")?,
            eta: s.list("eta")?.unwrap_or_else(|| vec![0.01]),
            eps: s.list("eps")?.unwrap_or_else(|| vec![-0.01, -0.005, 0.0, 0.005, 0.01]),
        })
    }

    /// The resolved values in the file grammar, one per line, sorted by key.
    /// Feeding this back through [`Settings::parse`] reproduces the run.
    pub fn to_settings_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        kv.insert("scenario", self.scenario.to_string());
        kv.insert("k", format!("{:e}", self.k));
        kv.insert("r", format!("{:e}", self.r));
        kv.insert("theta", format!("{:e}", self.theta));
        kv.insert("alpha", format!("{:e}", self.alpha));
        kv.insert("beta", format!("{:e}", self.beta));
        kv.insert("kappa", list(&self.kappa));
        kv.insert("gamma", format!("{:e}", self.gamma));
        kv.insert("sigma", format!("{:e}", self.sigma));
        kv.insert("tmin", format!("{:e}", self.grid.t_min));
        kv.insert("tmax", format!("{:e}", self.grid.t_max));
        kv.insert("points", self.grid.points.to_string());
        kv.insert("refine", self.grid.refine.to_string());
        kv.insert("oracle", self.oracle.to_string());
        kv.insert("eta", list(&self.eta));
        kv.insert("eps", list(&self.eps));
        if let Some(x) = self.dark_count {
            kv.insert("dark_count", format!("{x:e}"));
        }
        if let Some(x) = self.mech_freq {
            kv.insert("mech_freq", format!("{x:e}"));
        }
        if let Some(x) = self.dim {
            kv.insert("dim", x.to_string());
        }
        if let Some(x) = self.tail_tol {
            kv.insert("tail_tol", format!("{x:e}"));
        }
        kv.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// The working point used throughout: `k = 0.005`, `r = 2`, `θ = π`,
/// `|α| = ½`, `β = 2π`, `κ = 10ω_m`.
pub fn reference_settings() -> Settings {
    let mut s = Settings::default();
    for (k, v) in [
        ("k", "0.005".to_string()),
        ("r", "2".to_string()),
        ("theta", format!("{PI:e}")),
        ("alpha", "0.5".to_string()),
        ("beta", format!("{TAU:e}")),
        ("kappa", "10".to_string()),
    ] {
        s.set(k, v).expect("known key");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let s = Settings::parse("# header\n\nk = 0.005  # coupling\nTHETA=pi\ndark-count = 2\n").unwrap();
        assert_eq!(s.get("k"), Some("0.005"));
        assert_eq!(s.get("theta"), Some("pi"));
        assert_eq!(s.get("dark_count"), Some("2"));
    }

    #[test]
    fn grammar_errors_name_the_line() {
        for (text, line) in [("k = 1\nbogus = 2", 2), ("k 1", 1), ("k = 1\nk = 2", 2), ("\n\nr =", 3)] {
            let e = Settings::parse(text).unwrap_err().to_string();
            assert!(e.starts_with(&format!("line {line}:")), "{e}");
        }
    }

    #[test]
    fn resolve_defaults_and_requirements() {
        let s = Settings::parse("k = 0.005\nr = 2\ntheta = pi").unwrap();
        let c = RunConfig::resolve(Some(Scenario::SweepVacuum), &s).unwrap();
        assert_eq!(c.theta, PI);
        assert_eq!((c.grid.t_min, c.grid.t_max, c.grid.points), (0.0, 26.0, 4001));
        assert!(RunConfig::resolve(Some(Scenario::SweepCoherent), &s).is_err());
        assert!(RunConfig::resolve(Some(Scenario::SweepVacuum), &Settings::default()).is_err());
        assert!(RunConfig::resolve(Some(Scenario::Feasibility), &Settings::default()).is_err());
        assert!(RunConfig::resolve(None, &s).is_err());
    }

    #[test]
    fn scenario_key_must_agree() {
        let s = Settings::parse("scenario = appendix").unwrap();
        assert_eq!(RunConfig::resolve(None, &s).unwrap().scenario, Scenario::Appendix);
        assert!(RunConfig::resolve(Some(Scenario::Feasibility), &s).is_err());
    }

    #[test]
    fn grid_bounds() {
        for bad in ["points = 1", "points = 10000001", "tmin = 2\ntmax = 1", "points = -3"] {
            let s = Settings::parse(&format!("k = 0.01\n{bad}")).unwrap();
            assert!(RunConfig::resolve(Some(Scenario::SweepVacuum), &s).is_err(), "{bad}");
        }
    }

    #[test]
    fn settings_text_round_trips() {
        let mut s = reference_settings();
        s.set("dim", "250").unwrap();
        let c = RunConfig::resolve(Some(Scenario::LindbladCheck), &s).unwrap();
        let again = RunConfig::resolve(None, &Settings::parse(&c.to_settings_text()).unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
