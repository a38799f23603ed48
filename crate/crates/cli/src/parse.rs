use std::f64::consts::PI;

use nbw_core::{Complex64, FourierVector, StepSet};

use crate::args::StepSetArgs;
use crate::CliError;

/// A number, optionally written with `pi`: `1.5`, `-pi`, `pi/2`, `2pi/3`, `0.5*pi`.
pub fn parse_scalar(s: &str) -> Result<f64, CliError> {
    let t = s.trim().to_ascii_lowercase();
    let bad = || CliError::usage(format!("cannot parse number {s:?}"));
    if !t.contains("pi") {
        return t.parse().map_err(|_| bad());
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coef = num.trim().strip_suffix("pi").ok_or_else(bad)?.trim().trim_end_matches('*');
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(c * PI / den)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(parse_scalar).collect()
}

pub fn parse_wave(s: &str, dim: usize) -> Result<Vec<f64>, CliError> {
    let v = parse_list(s)?;
    if v.len() != dim {
        return Err(CliError::usage(format!("wave {s:?} has {} components, expected {dim}", v.len())));
    }
    Ok(v)
}

/// A wave vector for `step_set`; on a torus it must lie on the dual grid.
pub fn parse_fourier(s: &str, step_set: &StepSet) -> Result<FourierVector, CliError> {
    let v = parse_wave(s, step_set.dim())?;
    if let Some(r) = step_set.modulus() {
        let unit = 2.0 * PI / f64::from(r);
        for c in &v {
            if ((c / unit).round() - c / unit).abs() > 1e-9 {
                return Err(CliError::usage(format!(
                    "on the torus of width {r} wave components must be multiples of 2pi/{r} (got {c})"
                )));
            }
        }
    }
    Ok(FourierVector::new(v)?)
}

pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let v = parse_list(s)?;
    match v.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(CliError::usage(format!("expected `re` or `re,im`, got {s:?}"))),
    }
}

pub fn build_step_set(args: &StepSetArgs) -> Result<StepSet, CliError> {
    let base = match &args.step_set {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
            StepSet::from_json(&text)?
        }
        None => {
            if args.modulus.is_some() && args.preset.trim() == "nn" {
                return Ok(StepSet::nearest_neighbor_torus(args.dim, args.modulus.unwrap_or(0))?);
            }
            StepSet::from_preset(&args.preset, args.dim)?
        }
    };
    match (args.modulus, base.modulus()) {
        (None, _) => Ok(base),
        (Some(r), Some(own)) if r == own => Ok(base),
        (Some(r), Some(own)) => Err(CliError::usage(format!(
            "--modulus {r} conflicts with the step set's own width {own}"
        ))),
        (Some(r), None) => Ok(StepSet::on_torus(base.dim(), base.points().to_vec(), r)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("0.25").unwrap(), 0.25);
        assert_eq!(parse_scalar("pi").unwrap(), PI);
        assert_eq!(parse_scalar("-pi").unwrap(), -PI);
        assert_eq!(parse_scalar("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_scalar("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_scalar("-0.5*pi").unwrap(), -0.5 * PI);
        assert!(parse_scalar("p").is_err());
        assert!(parse_scalar("xpi").is_err());
    }

    #[test]
    fn waves_on_tori() {
        let s = StepSet::nearest_neighbor_torus(2, 4).unwrap();
        assert!(parse_fourier("pi/2,pi", &s).is_ok());
        assert!(parse_fourier("0.3,0", &s).is_err());
        assert!(parse_fourier("0", &s).is_err());
    }
}
