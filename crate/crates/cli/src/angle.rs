//! Angle expressions such as `pi`, `2pi`, `-pi/2`, `0.5*pi` or plain `1.25`.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := sign? term ('/' number)?
//! term   := number | number? '*'? 'pi'
//! ```

use std::f64::consts::PI;

use crate::error::CliError;

pub fn parse_angle(src: &str) -> Result<f64, CliError> {
    let bad = |why: &str| CliError::Config(format!("bad angle {src:?}: {why}"));
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    if s.is_empty() {
        return Err(bad("empty"));
    }

    let (body, den) = match s.split_once('/') {
        Some((b, d)) => {
            let d: f64 = d.parse().map_err(|_| bad("denominator is not a number"))?;
            if d == 0.0 || !d.is_finite() {
                return Err(bad("denominator must be finite and nonzero"));
            }
            (b, d)
        }
        None => (s.as_str(), 1.0),
    };

    let value = match body.strip_suffix("pi") {
        Some(coef) => {
            let coef = match coef.strip_suffix('*') {
                Some("") => return Err(bad("missing coefficient before '*'")),
                Some(c) => c,
                None => coef,
            };
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad("coefficient is not a number"))?,
            };
            c * PI
        }
        None => body.parse::<f64>().map_err(|_| bad("expected a number or a multiple of pi"))?,
    };
    let out = value / den;
    if !out.is_finite() {
        return Err(bad("not finite"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn forms() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2pi").unwrap(), TAU);
        assert_eq!(parse_angle(" 2 * PI ").unwrap(), TAU);
        assert_eq!(parse_angle("pi/2").unwrap(), FRAC_PI_2);
        assert_eq!(parse_angle("-pi/2").unwrap(), -FRAC_PI_2);
        assert_eq!(parse_angle("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert_eq!(parse_angle("3/4").unwrap(), 0.75);
    }

    #[test]
    fn rejects() {
        for s in ["", "pie", "2pi/0", "pi/x", "*pi", "1e400", "nan", "pi//2", "2*"] {
            assert!(parse_angle(s).is_err(), "{s}");
        }
    }
}
