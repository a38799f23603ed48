use std::fmt::Write as _;

use nbw_core::exact_count::count_walks_capped;
use nbw_core::greens::{self, series_coefficients};
use nbw_core::sampler_clt::{ensemble_stats, fdd_gaussian_check, CovarianceTarget};
use nbw_core::spectral::{degenerate_point_on_ray, dominant_eigenvalues, eigenvalue_bound, SpectralPair};
use nbw_core::torus::{mixing_time, LemmaBounds};
use nbw_core::{
    endpoint_char_function_exact, sample_endpoints, sample_paths, Complex64, Error, Family, FourierVector,
    StepSet, TorusSpec,
};
use serde::Serialize;

use crate::args::*;
use crate::output::{float, render};
use crate::parse::{build_step_set, parse_complex, parse_fourier, parse_list, parse_wave};
use crate::{audit, Cli, CliError, Outcome, Status};

pub fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Counts(a) => counts(cli, a),
        Command::Spectrum(a) => spectrum(cli, a),
        Command::Greens(a) => greens_cmd(cli, a),
        Command::Clt(a) => clt(cli, a),
        Command::Mixing(a) => mixing(cli, a),
        Command::Sample(a) => sample(cli, a),
        Command::Audit(a) => audit::run(cli, a),
        Command::Replay(_) => Err(CliError::usage("replay must be resolved before dispatch")),
    }
}

fn pass(body: String) -> Outcome {
    Outcome {
        status: Status::Pass,
        body,
    }
}

fn counts(cli: &Cli, a: &CountsArgs) -> Result<Outcome, CliError> {
    let s = build_step_set(&a.step_set)?;
    let field = count_walks_capped(&s, a.n, s.modulus(), a.cap)?;
    let mut result = field.to_json_value(a.directed);
    result["step_set"] = serde_json::to_value(s.to_spec()).expect("spec serialises");
    Ok(pass(render(cli, result, || field.to_csv(a.directed))))
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    k: Vec<f64>,
    source: &'static str,
    d_hat: f64,
    lambda_plus: Complex64,
    lambda_minus: Complex64,
    abs_lambda_plus: f64,
    abs_lambda_minus: f64,
    /// `(m - 1) max(1/sqrt(m-1), |D^(k)|)`.
    modulus_bound: f64,
    degenerate: bool,
    complex: bool,
}

fn spectrum_row(s: &StepSet, k: &FourierVector, source: &'static str) -> SpectrumRow {
    let pair: SpectralPair = dominant_eigenvalues(s, k);
    SpectrumRow {
        k: k.as_slice().to_vec(),
        source,
        d_hat: pair.d_hat,
        lambda_plus: pair.lambda_plus,
        lambda_minus: pair.lambda_minus,
        abs_lambda_plus: pair.lambda_plus.norm(),
        abs_lambda_minus: pair.lambda_minus.norm(),
        modulus_bound: (s.degree() - 1) as f64 * eigenvalue_bound(s, k),
        degenerate: pair.degenerate,
        complex: pair.is_complex(),
    }
}

fn spectrum(cli: &Cli, a: &SpectrumArgs) -> Result<Outcome, CliError> {
    let s = build_step_set(&a.step_set)?;
    let mut rows = Vec::new();
    for k in &a.k {
        rows.push(spectrum_row(&s, &parse_fourier(k, &s)?, "user"));
    }
    if a.dual_grid {
        let r = s
            .modulus()
            .ok_or_else(|| CliError::usage("--dual-grid needs a torus (--modulus or a torus preset)"))?;
        for k in TorusSpec::new(s.dim(), r)?.dual_grid() {
            rows.push(spectrum_row(&s, &k, "dual"));
        }
    }
    if let Some(dir) = &a.find_degenerate {
        if s.modulus().is_some() {
            return Err(CliError::usage("--find-degenerate works on Z^d step sets only"));
        }
        let dir = parse_wave(dir, s.dim())?;
        if let Some(k) = degenerate_point_on_ray(&s, &dir) {
            rows.push(spectrum_row(&s, &k, "degenerate-search"));
        }
    }
    if rows.is_empty() {
        return Err(CliError::usage("give --k, --dual-grid or --find-degenerate"));
    }
    let violation = rows
        .iter()
        .any(|r| r.abs_lambda_plus.max(r.abs_lambda_minus) > r.modulus_bound * (1.0 + 1e-12));
    let body = render(cli, &rows, || {
        let mut t = String::new();
        for i in 1..=s.dim() {
            let _ = write!(t, "k{i},");
        }
        t.push_str(
            "source,d_hat,lambda_plus_re,lambda_plus_im,lambda_minus_re,lambda_minus_im,abs_lambda_plus,abs_lambda_minus,modulus_bound,degenerate,complex\n",
        );
        for r in &rows {
            for c in &r.k {
                let _ = write!(t, "{},", float(*c));
            }
            let _ = writeln!(
                t,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.source,
                float(r.d_hat),
                float(r.lambda_plus.re),
                float(r.lambda_plus.im),
                float(r.lambda_minus.re),
                float(r.lambda_minus.im),
                float(r.abs_lambda_plus),
                float(r.abs_lambda_minus),
                float(r.modulus_bound),
                r.degenerate,
                r.complex
            );
        }
        t
    });
    Ok(Outcome {
        status: if violation { Status::Violation } else { Status::Pass },
        body,
    })
}

#[derive(Debug, Serialize)]
struct GreensRow {
    k: Vec<f64>,
    value: Complex64,
    directed: Vec<Complex64>,
    via_srw: Complex64,
    via_directed: Complex64,
    analytic_continuation: bool,
    series: Vec<Complex64>,
}

fn greens_cmd(cli: &Cli, a: &GreensArgs) -> Result<Outcome, CliError> {
    let s = build_step_set(&a.step_set)?;
    let z = parse_complex(&a.z)?;
    if a.k.is_empty() {
        return Err(CliError::usage("give at least one --k"));
    }
    let mut rows = Vec::new();
    for k in &a.k {
        let k = parse_fourier(k, &s)?;
        let e = greens::evaluate(&s, z, &k)?;
        let series = if a.terms > 0 {
            series_coefficients(&s, &k, a.terms)?
        } else {
            Vec::new()
        };
        rows.push(GreensRow {
            k: k.as_slice().to_vec(),
            value: e.value,
            directed: e.directed_values,
            via_srw: greens::greens_via_srw(&s, z, &k)?,
            via_directed: greens::greens_from_directed(&s, z, &k)?,
            analytic_continuation: e.analytic_continuation,
            series,
        });
    }
    let body = render(cli, &rows, || {
        let mut t = String::new();
        for i in 1..=s.dim() {
            let _ = write!(t, "k{i},");
        }
        t.push_str("value_re,value_im,via_srw_re,via_srw_im,via_directed_re,via_directed_im,analytic_continuation\n");
        for r in &rows {
            for c in &r.k {
                let _ = write!(t, "{},", float(*c));
            }
            let _ = writeln!(
                t,
                "{},{},{},{},{},{},{}",
                float(r.value.re),
                float(r.value.im),
                float(r.via_srw.re),
                float(r.via_srw.im),
                float(r.via_directed.re),
                float(r.via_directed.im),
                r.analytic_continuation
            );
        }
        t
    });
    Ok(pass(body))
}

#[derive(Debug, Serialize)]
struct CltRow {
    k: Vec<f64>,
    value: Complex64,
    limit: f64,
    deviation: f64,
}

fn clt(cli: &Cli, a: &CltArgs) -> Result<Outcome, CliError> {
    let s = build_step_set(&a.step_set)?;
    if s.modulus().is_some() {
        return Err(CliError::usage("the CLT diagnostics live on Z^d"));
    }
    let waves = a
        .k
        .iter()
        .map(|k| parse_wave(k, s.dim()))
        .collect::<Result<Vec<_>, _>>()?;
    if waves.is_empty() {
        return Err(CliError::usage("give at least one --k"));
    }
    if let Some(times) = &a.times {
        let t = parse_list(times)?;
        let report = fdd_gaussian_check(&s, a.n, &t, &waves)?;
        let body = render(cli, &report, || {
            format!(
                "n,value_re,value_im,limit,deviation\n{},{},{},{},{}\n",
                report.n,
                float(report.value.re),
                float(report.value.im),
                float(report.limit),
                float(report.deviation)
            )
        });
        return Ok(pass(body));
    }
    let target = CovarianceTarget::new(&s)?;
    let mut rows = Vec::new();
    for k in waves {
        let value = endpoint_char_function_exact(&s, a.n, &k)?;
        let limit = target.gaussian_char(&k);
        rows.push(CltRow {
            deviation: (value - limit).norm(),
            k,
            value,
            limit,
        });
    }
    let body = render(cli, &rows, || {
        let mut t = String::new();
        for i in 1..=s.dim() {
            let _ = write!(t, "k{i},");
        }
        t.push_str("value_re,value_im,limit,deviation\n");
        for r in &rows {
            for c in &r.k {
                let _ = write!(t, "{},", float(*c));
            }
            let _ = writeln!(
                t,
                "{},{},{},{}",
                float(r.value.re),
                float(r.value.im),
                float(r.limit),
                float(r.deviation)
            );
        }
        t
    });
    Ok(pass(body))
}

pub fn family_from_args(a: &MixingArgs) -> Result<Family, CliError> {
    let need = |v: Option<usize>, name: &str| v.ok_or_else(|| CliError::usage(format!("--{name} is required")));
    Ok(match a.family {
        FamilyName::Hamming => Family::Hamming {
            r: a.r.ok_or_else(|| CliError::usage("--r is required"))?,
            d: need(a.d, "d")?,
        },
        FamilyName::Nn => Family::Nn {
            r: a.r.ok_or_else(|| CliError::usage("--r is required"))?,
            d: need(a.d, "d")?,
        },
        FamilyName::Hypercube => Family::Hypercube { m: need(a.m, "m")? },
    })
}

#[derive(Debug, Serialize)]
struct MixingSummary {
    family: Family,
    xi: f64,
    horizon: u64,
    t_mix: Option<u64>,
    paper_bound: Option<u64>,
    bounds: Option<LemmaBounds>,
    within_bounds: Option<bool>,
    /// `(n, deviation, rhs)` of the first failure of the deviation statement.
    deviation_violation: Option<(u64, f64, f64)>,
    curve_at_t_mix: Option<f64>,
}

fn mixing(cli: &Cli, a: &MixingArgs) -> Result<Outcome, CliError> {
    let family = family_from_args(a)?;
    if let Some(r) = a.r {
        if r < 2 {
            return Err(CliError::usage("--r must be at least 2"));
        }
    }
    let report = match mixing_time(&family, a.xi, a.horizon) {
        Err(Error::HypothesesUnmet(msg)) => {
            return Err(CliError::usage(format!("{msg}; pass --horizon to scan anyway")))
        }
        other => other?,
    };
    if let Some(path) = &a.curve {
        std::fs::write(path, report.to_csv())
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let summary = MixingSummary {
        family,
        xi: a.xi,
        horizon: report.horizon,
        t_mix: report.t_mix,
        paper_bound: report.paper_bound,
        bounds: report.bounds,
        within_bounds: report.within_bounds(),
        deviation_violation: report.deviation_violation(),
        curve_at_t_mix: report.t_mix.map(|t| report.curve[t as usize]),
    };
    let status = if summary.t_mix.is_none() {
        Status::Exhausted
    } else if summary.within_bounds == Some(false) || summary.deviation_violation.is_some() {
        Status::Violation
    } else {
        Status::Pass
    };
    let body = render(cli, &summary, || report.to_csv());
    Ok(Outcome { status, body })
}

fn sample(cli: &Cli, a: &SampleArgs) -> Result<Outcome, CliError> {
    let s = build_step_set(&a.step_set)?;
    if a.count == 0 {
        return Err(CliError::usage("--count must be at least 1"));
    }
    let endpoints = if let Some(path) = &a.dump {
        let ensemble = sample_paths(&s, a.n, a.count, a.seed);
        std::fs::write(path, ensemble.raw_dump())
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
        ensemble.endpoints()
    } else {
        sample_endpoints(&s, a.n, a.count, a.seed)
    };
    let stats = ensemble_stats(&s, a.n, a.seed, &endpoints);
    let body = render(cli, &stats, || {
        let mut t = String::from("path");
        for i in 1..=s.dim() {
            let _ = write!(t, ",x{i}");
        }
        t.push('\n');
        for (i, e) in endpoints.iter().enumerate() {
            let _ = write!(t, "{i}");
            for c in e {
                let _ = write!(t, ",{c}");
            }
            t.push('\n');
        }
        t
    });
    Ok(pass(body))
}
