//! Cross-validation driver: spectral formula vs generating-function series
//! vs enumeration, the pointwise Fourier bound on tori, the mixing lemmas
//! and the deterministic CLT checks.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nbw_core::exact_count::{enumerate_endpoints, total_walks};
use nbw_core::greens::series_coefficients;
use nbw_core::sampler_clt::{fdd_gaussian_check, CovarianceTarget};
use nbw_core::spectral::{bn_ratio_from_pair, dominant_eigenvalues, eigenvalue_bound_from_d_hat, SpectralPair};
use nbw_core::torus::{mixing_time, DualSpectrum};
use nbw_core::{Complex64, Error, Family, FourierVector, StepSet, TorusSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::AuditArgs;
use crate::output::{float, render};
use crate::{Cli, CliError, Outcome, Status};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub quick: bool,
    pub perturb_lambda: f64,
    pub passed: usize,
    pub failed: usize,
    pub skipped: Vec<String>,
    pub checks: Vec<Check>,
}

struct Spectral {
    eps: f64,
}

impl Spectral {
    fn ratio(&self, pair: &SpectralPair, n: u64) -> Complex64 {
        if self.eps == 0.0 {
            return bn_ratio_from_pair(pair, n);
        }
        let mut p = *pair;
        p.lambda_plus *= 1.0 + self.eps;
        bn_ratio_from_pair(&p, n)
    }
}

fn le(group: &'static str, name: String, value: f64, threshold: f64, detail: String) -> Check {
    Check {
        group,
        name,
        pass: value <= threshold,
        value,
        threshold,
        detail,
    }
}

fn oracle_checks(spec: &Spectral, quick: bool, seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cases, waves_per): (&[(usize, usize)], usize) = if quick { (&[(2, 8)], 5) } else { (&[(2, 10), (3, 6)], 20) };
    let mut out = Vec::new();
    for &(d, n_max) in cases {
        let s = StepSet::nearest_neighbor(d)?;
        let waves: Vec<FourierVector> = (0..waves_per)
            .map(|_| FourierVector::new((0..d).map(|_| rng.random_range(-PI..PI)).collect()))
            .collect::<Result<_, _>>()?;
        let mut worst = [0.0f64; 3];
        for k in &waves {
            let pair = dominant_eigenvalues(&s, k);
            let series = series_coefficients(&s, k, n_max)?;
            for n in 0..=n_max {
                let hist = enumerate_endpoints(&s, n, 1e7)?;
                let total = total_walks(s.degree(), n as u64).to_string().parse::<f64>().unwrap_or(f64::NAN);
                let enumerated: Complex64 =
                    hist.iter().map(|(x, c)| Complex64::from_polar(*c as f64, k.dot(x))).sum::<Complex64>() / total;
                let spectral = spec.ratio(&pair, n as u64);
                let greens = series[n] / total;
                worst[0] = worst[0].max((spectral - enumerated).norm());
                worst[1] = worst[1].max((greens - enumerated).norm());
                worst[2] = worst[2].max((spectral - greens).norm());
            }
        }
        let names = ["spectral vs enumeration", "greens vs enumeration", "spectral vs greens"];
        for (name, w) in names.iter().zip(worst) {
            out.push(le(
                "oracle",
                format!("{name} (d={d}, n<={n_max})"),
                w,
                1e-9,
                format!("{waves_per} random waves, error relative to m(m-1)^(n-1)"),
            ));
        }
    }
    Ok(out)
}

fn torus_grid(quick: bool) -> Vec<(String, StepSet, TorusSpec)> {
    let (rs, ds, ms) = if quick { (3..=4u32, 1..=2usize, 2..=8usize) } else { (3..=5, 1..=3, 2..=12) };
    let mut out = Vec::new();
    for r in rs {
        for d in ds.clone() {
            if let (Ok(h), Ok(t)) = (StepSet::hamming(d, r), TorusSpec::new(d, r)) {
                out.push((format!("hamming(r={r}, d={d})"), h, t));
            }
            if let (Ok(n), Ok(t)) = (StepSet::nearest_neighbor_torus(d, r), TorusSpec::new(d, r)) {
                out.push((format!("nn(r={r}, d={d})"), n, t));
            }
        }
    }
    for m in ms {
        if let (Ok(h), Ok(t)) = (StepSet::hypercube(m), TorusSpec::new(m, 2)) {
            out.push((format!("hypercube(m={m})"), h, t));
        }
    }
    out
}

fn pointwise_checks(spec: &Spectral, quick: bool) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for (name, s, t) in torus_grid(quick) {
        let spectrum = DualSpectrum::new(&s, &t)?;
        let m = s.degree();
        let mut worst = (f64::NEG_INFINITY, 0usize, 0u64);
        for (i, pair) in spectrum.pairs().iter().enumerate() {
            let rho = eigenvalue_bound_from_d_hat(pair.d_hat, m);
            for n in 1..=50u64 {
                let e = spec.ratio(pair, n).norm() - rho.powi(n as i32 - 1);
                if e > worst.0 {
                    worst = (e, i, n);
                }
            }
        }
        out.push(le(
            "pointwise-bound",
            format!("|p_n(k)| <= rho(k)^(n-1) on {name}, n<=50"),
            worst.0,
            1e-12,
            format!("largest excess at dual point {:?}, n={}", t.point_at(worst.1), worst.2),
        ));
    }
    Ok(out)
}

fn mixing_checks(quick: bool, skipped: &mut Vec<String>) -> Result<Vec<Check>, CliError> {
    let (rs, ds, ms) = if quick { (3..=4u32, 1..=2usize, 2..=8usize) } else { (3..=5, 1..=3, 2..=12) };
    let mut families = Vec::new();
    for r in rs {
        for d in ds.clone() {
            families.push(Family::Hamming { r, d });
            families.push(Family::Nn { r, d });
        }
    }
    families.extend(ms.map(|m| Family::Hypercube { m }));
    let mut out = Vec::new();
    for f in families {
        for xi in [0.01, 0.5] {
            let report = match mixing_time(&f, xi, None) {
                Ok(r) => r,
                Err(Error::HypothesesUnmet(msg)) => {
                    if xi == 0.01 {
                        skipped.push(msg);
                    }
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let b = report.bounds.expect("hypotheses hold");
            let t = report.t_mix.map_or(f64::INFINITY, |t| t as f64);
            out.push(le(
                "mixing",
                format!("t_mix <= lemma bound, {f}, xi={xi}"),
                t,
                b.mixing_bound as f64,
                format!("horizon {}", report.horizon),
            ));
            if let Some(th) = b.theorem_bound {
                out.push(le(
                    "mixing",
                    format!("t_mix <= theorem bound (eps=0.1), {f}, xi={xi}"),
                    t,
                    th,
                    String::new(),
                ));
            }
            let (value, detail) = match report.deviation_violation() {
                Some((n, dev, rhs)) => (1.0, format!("deviation {dev:e} > {rhs:e} at n={n}")),
                None => (0.0, format!("all n in [{}, {}]", b.operative_threshold, report.horizon)),
            };
            out.push(le(
                "mixing",
                format!("deviation statement past the threshold, {f}, xi={xi}"),
                value,
                0.0,
                detail,
            ));
        }
    }
    Ok(out)
}

fn clt_checks(spec: &Spectral) -> Result<Vec<Check>, CliError> {
    let sets: [(usize, Vec<Vec<f64>>); 2] = [
        (2, vec![vec![0.5, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.3, -0.7], vec![1.5, 0.5]]),
        (
            3,
            vec![
                vec![0.5, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0],
                vec![0.3, -0.7, 0.2],
                vec![1.5, 0.5, -0.5],
            ],
        ),
    ];
    let mut out = Vec::new();
    for (d, ks) in sets {
        let s = StepSet::nearest_neighbor(d)?;
        let target = CovarianceTarget::new(&s)?;
        let mut devs = Vec::new();
        for n in [100u64, 1000, 10_000] {
            let scale = 1.0 / (n as f64).sqrt();
            let mut worst = 0.0f64;
            for k in &ks {
                let wave = FourierVector::new(k.iter().map(|c| c * scale).collect())?;
                let v = spec.ratio(&dominant_eigenvalues(&s, &wave), n);
                worst = worst.max((v - target.gaussian_char(k)).norm());
            }
            devs.push(worst);
        }
        out.push(le(
            "clt",
            format!("endpoint characteristic function at n=1e4, d={d}"),
            devs[2],
            0.01,
            format!("sup deviations at n=1e2,1e3,1e4: {devs:?}"),
        ));
        let decreasing = devs[0] > devs[1] && devs[1] > devs[2];
        out.push(Check {
            group: "clt",
            name: format!("deviation decreasing in n, d={d}"),
            pass: decreasing,
            value: f64::from(u8::from(!decreasing)),
            threshold: 0.0,
            detail: format!("{devs:?}"),
        });
        let waves: Vec<Vec<f64>> = (0..2).map(|r| (0..d).map(|i| f64::from(u8::from(i == r))).collect()).collect();
        let fdd = fdd_gaussian_check(&s, 10_000, &[0.5, 1.0], &waves)?;
        out.push(le(
            "clt",
            format!("two-time characteristic function at n=1e4, d={d}"),
            fdd.deviation,
            0.02,
            "t=(0.5,1), waves e1 then e2".into(),
        ));
    }
    Ok(out)
}

pub fn audit(a: &AuditArgs) -> Result<AuditReport, CliError> {
    let spec = Spectral { eps: a.perturb_lambda };
    let mut skipped = Vec::new();
    let mut checks = oracle_checks(&spec, a.quick, a.seed)?;
    checks.extend(pointwise_checks(&spec, a.quick)?);
    checks.extend(mixing_checks(a.quick, &mut skipped)?);
    checks.extend(clt_checks(&spec)?);
    let failed = checks.iter().filter(|c| !c.pass).count();
    Ok(AuditReport {
        quick: a.quick,
        perturb_lambda: a.perturb_lambda,
        passed: checks.len() - failed,
        failed,
        skipped,
        checks,
    })
}

pub fn run(cli: &Cli, a: &AuditArgs) -> Result<Outcome, CliError> {
    let report = audit(a)?;
    let body = render(cli, &report, || {
        let mut t = String::from("group,name,pass,value,threshold,detail\n");
        for c in &report.checks {
            let _ = writeln!(
                t,
                "{},\"{}\",{},{},{},\"{}\"",
                c.group,
                c.name,
                c.pass,
                float(c.value),
                float(c.threshold),
                c.detail.replace('"', "'")
            );
        }
        t
    });
    Ok(Outcome {
        status: if report.failed == 0 { Status::Pass } else { Status::Violation },
        body,
    })
}
