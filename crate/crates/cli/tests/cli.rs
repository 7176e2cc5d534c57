use std::fs;

use pointer_amp_cli::{main_with, parse_args, Scenario};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with(std::iter::once("pointer-amp").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn fig2_sweep_peak_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let o = out.to_str().unwrap();
    let (code, stdout, stderr) =
        run(&["sweep-vacuum", "--k", "0.005", "--r", "2", "--theta", "pi", "--tmax", "26", "--refine", "--out", o]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("max_q_over_sigma="));

    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega_m_t,q_over_sigma_analytic,survival_prob,flag");
    let (mut best_t, mut best) = (0.0, f64::MIN);
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 4);
        if let Ok(v) = f[1].parse::<f64>() {
            if v > best {
                (best_t, best) = (f[0].parse().unwrap(), v);
            }
        } else {
            assert_eq!(f[3], "VP");
        }
    }
    assert!((best - 7.389).abs() < 0.01, "{best}");
    assert!((best_t - std::f64::consts::TAU).abs() < 0.01, "{best_t}");

    let meta = fs::read_to_string(dir.path().join("fig2.csv.meta")).unwrap();
    assert!(meta.contains("# figure: Fig. 2"));
    assert!(meta.contains("scenario = sweep-vacuum"));
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# coherent sweep\nscenario = sweep-coherent\nk = 0.005\nr = 2\ntheta = pi\nalpha = 0.5\nbeta = 2pi\ntmax = 0.5\npoints = 501\nrefine = yes\n").unwrap();
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let (code, _, err) = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        files.push((fs::read(&out).unwrap(), fs::read(dir.path().join(format!("{name}.meta"))).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "k = 0.01\nr = 1\ntheta = pi/2\n").unwrap();
    let c = parse_args(["pointer-amp", "sweep-vacuum", "--config", cfg.to_str().unwrap(), "--r", "2"])
        .unwrap()
        .unwrap();
    assert_eq!(c.scenario, Scenario::SweepVacuum);
    assert_eq!((c.k, c.r, c.theta), (0.01, 2.0, std::f64::consts::FRAC_PI_2));
    let c = parse_args(["pointer-amp", "appendix", "--theta", "-pi/2"]).unwrap().unwrap();
    assert_eq!(c.theta, -std::f64::consts::FRAC_PI_2);
}

#[test]
fn stdout_table_when_no_out() {
    let (code, stdout, stderr) = run(&["appendix", "--eta", "0.01", "--eps", "0.01,0"]);
    assert_eq!(code, 0, "{stderr}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "eta,eps,shift_q_closed,shift_q_exact,shift_p_closed,shift_p_exact,flag");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1.0000000000000000e-2,1.0000000000000000e-2,1.0000000000000000e0,"));
    assert!(stderr.contains("max_abs_diff="));
}

#[test]
fn vanishing_denominator_is_flagged() {
    let (code, stdout, _) = run(&["appendix", "--eta", "0", "--eps", "0"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().nth(1).unwrap(), "0.0000000000000000e0,0.0000000000000000e0,,,,,ZD");
}

#[test]
fn feasibility_report() {
    let (code, stdout, _) = run(&["feasibility", "--dark-count", "2", "--mech-freq", "4500", "--kappa", "10", "--out", "/dev/null"]);
    assert_eq!(code, 0);
    let k_min: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("k_min="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((k_min - 0.0036).abs() < 1e-4, "{k_min}");
}

#[test]
fn densities_per_kappa() {
    let (code, stdout, _) = run(&["arrival-density", "--k", "0.005", "--r", "2", "--theta", "pi", "--alpha", "0.5", "--beta", "2pi", "--kappa", "1,10", "--points", "11"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "omega_m_t,density,kappa_over_omega");
    assert_eq!(lines.len(), 23);
    assert!(lines[1].ends_with(",1.0000000000000000e0"));
    assert!(lines[22].ends_with(",1.0000000000000000e1"));
}

#[test]
fn exit_codes_and_error_lines() {
    let (code, _, err) = run(&["sweep-vacuum"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error kind=config exit=2 message="), "{err}");

    let (code, _, _) = run(&["sweep-vacuum", "--k", "0.005", "--theta", "pie"]);
    assert_eq!(code, 2);

    let (code, _, err) = run(&["run", "--config", "/nonexistent/x.cfg"]);
    assert_eq!(code, 4, "{err}");
    assert!(err.starts_with("error kind=io exit=4"));

    let (code, _, err) = run(&["appendix", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(code, 4, "{err}");

    // the initial pointer cannot fit in 20 levels
    let (code, _, err) = run(&["lindblad-check", "--k", "0.005", "--r", "2", "--dim", "20", "--points", "2"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("kind=numeric"));

    let (code, _, err) = run(&["sweep-vacuum", "--k", "0.005", "--points", "1"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn help_exits_cleanly() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("sweep-vacuum"));
}

#[test]
fn expansion_check_small_rel_diff() {
    let (code, _, err) = run(&["expansion-check", "--k", "0.005", "--r", "2", "--theta", "pi", "--tmin", "6.27", "--tmax", "6.30", "--points", "61"]);
    assert_eq!(code, 0, "{err}");
    let rel: f64 = err.lines().find_map(|l| l.strip_prefix("max_rel_diff=")).unwrap().parse().unwrap();
    assert!(rel < 0.02, "{rel}");
}

#[test]
fn lindblad_check_tracks_closed_form() {
    let (code, stdout, err) = run(&["lindblad-check", "--k", "0.02", "--r", "0.5", "--theta", "pi", "--alpha", "1", "--tmax", "1", "--points", "3", "--dim", "60", "--tail-tol", "1e-6"]);
    assert_eq!(code, 0, "{err}");
    for l in stdout.lines().skip(2) {
        let f: Vec<f64> = l.split(',').take(3).map(|x| x.parse().unwrap()).collect();
        assert!((f[1] - f[2]).abs() < 1e-6 * f[1].abs().max(1.0), "{l}");
    }
}
