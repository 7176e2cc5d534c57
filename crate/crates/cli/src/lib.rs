//! Command-line front end: one subcommand per scenario, each reading an
//! optional flat config file overlaid by flags, writing a CSV table (to
//! `--out` plus a `.meta` sidecar, or to stdout) and a few summary lines.
//!
//! Failures print one `error kind=... exit=... message="..."` line on stderr
//! and exit with 2 (config), 3 (numeric) or 4 (I/O).

pub mod angle;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{RunConfig, Scenario, Settings};
pub use error::CliError;
pub use run::Outcome;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "POINTER_AMP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pointer-amp", version, about = "Postselected mirror-displacement sweeps and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Squeezed-vacuum pointer: displacement against time.
    SweepVacuum(Overrides),
    /// Squeezed coherent pointer: displacement against time.
    SweepCoherent(Overrides),
    /// Small-offset expansions against the exact displacement.
    ExpansionCheck(Overrides),
    /// Photon arrival-time density for each kappa.
    ArrivalDensity(Overrides),
    /// Postselection success probability for each kappa.
    SuccessProb(Overrides),
    /// Arrival-weighted mean displacement for each kappa.
    AverageDisplacement(Overrides),
    /// Minimum coupling for a given dark-count rate.
    Feasibility(Overrides),
    /// Closed form against the truncated Fock-space oracle.
    OracleCheck(Overrides),
    /// Damped pipeline against the closed form.
    LindbladCheck(Overrides),
    /// Ground-state pointer weak measurement.
    Appendix(Overrides),
    /// Take the scenario from the config file.
    Run(Overrides),
}

impl Command {
    fn split(self) -> (Option<Scenario>, Overrides) {
        use Command::*;
        match self {
            SweepVacuum(o) => (Some(Scenario::SweepVacuum), o),
            SweepCoherent(o) => (Some(Scenario::SweepCoherent), o),
            ExpansionCheck(o) => (Some(Scenario::ExpansionCheck), o),
            ArrivalDensity(o) => (Some(Scenario::ArrivalDensity), o),
            SuccessProb(o) => (Some(Scenario::SuccessProb), o),
            AverageDisplacement(o) => (Some(Scenario::AverageDisplacement), o),
            Feasibility(o) => (Some(Scenario::Feasibility), o),
            OracleCheck(o) => (Some(Scenario::OracleCheck), o),
            LindbladCheck(o) => (Some(Scenario::LindbladCheck), o),
            Appendix(o) => (Some(Scenario::Appendix), o),
            Run(o) => (None, o),
        }
    }
}

/// Flags overriding config-file entries. Values go through the same
/// parsing as the file, so `--theta pi/2` and `theta = pi/2` agree.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coupling g/omega_m.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Squeezing magnitude.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    /// Squeezing angle, e.g. `pi`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Coherent amplitude |alpha|.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Coherent phase, e.g. `2pi`.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Cavity decay kappa/omega_m; comma-separated list where supported.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    /// Mirror damping gamma/omega_m.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Pointer width sigma, the unit of the reported displacement.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// Start of the omega_m t grid.
    #[arg(long, allow_hyphen_values = true)]
    pub tmin: Option<String>,
    /// End of the omega_m t grid.
    #[arg(long, allow_hyphen_values = true)]
    pub tmax: Option<String>,
    /// Number of grid points.
    #[arg(long)]
    pub points: Option<String>,
    /// Zoom in on every local extremum of the sweep.
    #[arg(long)]
    pub refine: bool,
    /// Add the Fock-space oracle column to sweeps.
    #[arg(long)]
    pub oracle: bool,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
    /// Detector dark-count rate, Hz.
    #[arg(long = "dark-count")]
    pub dark_count: Option<String>,
    /// Mechanical frequency f_m, Hz.
    #[arg(long = "mech-freq")]
    pub mech_freq: Option<String>,
    /// Fixed Fock truncation for lindblad-check.
    #[arg(long)]
    pub dim: Option<String>,
    /// Allowed pointer tail weight for lindblad-check.
    #[arg(long = "tail-tol")]
    pub tail_tol: Option<String>,
    /// Appendix coupling(s) eta.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    /// Appendix postselection offset(s) epsilon.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
}

impl Overrides {
    /// Read the config file, if any, and apply the flags on top.
    pub fn settings(&self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p.display(), e))?;
                Settings::parse(&text)?
            }
            None => Settings::default(),
        };
        let pairs = [
            ("k", &self.k),
            ("r", &self.r),
            ("theta", &self.theta),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("kappa", &self.kappa),
            ("gamma", &self.gamma),
            ("sigma", &self.sigma),
            ("tmin", &self.tmin),
            ("tmax", &self.tmax),
            ("points", &self.points),
            ("out", &self.out),
            ("dark_count", &self.dark_count),
            ("mech_freq", &self.mech_freq),
            ("dim", &self.dim),
            ("tail_tol", &self.tail_tol),
            ("eta", &self.eta),
            ("eps", &self.eps),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v.clone())?;
            }
        }
        if self.refine {
            s.set("refine", "true")?;
        }
        if self.oracle {
            s.set("oracle", "true")?;
        }
        Ok(s)
    }
}

/// Parse arguments into a resolved configuration. Help and version requests
/// come back as `Ok(Err(text))`.
pub fn parse_args<I, T>(args: I) -> Result<Result<RunConfig, String>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            return match e.kind() {
                DisplayHelp | DisplayVersion => Ok(Err(e.to_string())),
                DisplayHelpOnMissingArgumentOrSubcommand => {
                    Err(CliError::Config("missing scenario subcommand; see --help".into()))
                }
                _ => Err(CliError::Config(first_line(&e.to_string()).to_string())),
            };
        }
    };
    let (scenario, overrides) = cli.command.split();
    RunConfig::resolve(scenario, &overrides.settings()?).map(Ok)
}

fn first_line(s: &str) -> &str {
    s.lines().next().unwrap_or("").trim_start_matches("error: ")
}

/// Run a resolved configuration: compute, then write the table and sidecar
/// (or print the table to `stdout`), then the summary.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let outcome = run::run(cfg)?;
    let io = |e| CliError::io("<stdout>", e);
    match &cfg.out {
        Some(path) => {
            output::emit(path, cfg, &outcome.table)?;
            for line in &outcome.summary {
                writeln!(stdout, "{line}").map_err(io)?;
            }
        }
        None => {
            outcome.table.write_to(&mut *stdout).map_err(io)?;
        }
    }
    if let Some(msg) = &outcome.gate_failure {
        return Err(CliError::Gate(msg.clone()));
    }
    Ok(outcome)
}

/// Full entry point; returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_args(args).and_then(|parsed| match parsed {
        Ok(cfg) => {
            let out = execute(&cfg, stdout)?;
            if cfg.out.is_none() {
                for line in &out.summary {
                    let _ = writeln!(stderr, "{line}");
                }
            }
            Ok(())
        }
        Err(text) => {
            let _ = write!(stdout, "{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.machine_line());
            e.exit_code()
        }
    }
}

/// Size the global worker pool from [`THREADS_ENV`], if set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
