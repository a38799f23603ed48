//! Monte-Carlo sampling of non-backtracking paths and CLT diagnostics.
//!
//! Paths are drawn from `rand_chacha` 0.9's `ChaCha8Rng`, seeded with
//! `seed_from_u64(seed)` and switched to stream `i` for path `i`, so an
//! ensemble is bit-identical for a given seed regardless of thread count.
//! The first step is `random_range(0..m)`; later steps take base-`(m-1)`
//! digits of rejection-sampled 64-bit words and skip the reversal of the
//! previous step.

use std::collections::HashMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_count::{enumerate_walks, second_moment_closed};
use crate::lattice::{Direction, FourierVector, StepSet, StepSetSpec};
use crate::spectral::{bn_ratio, fdd_char_function};
use crate::torus::pairwise_sum;

/// Paths enumerated at most by the uniformity test.
pub const UNIFORMITY_PATH_CAP: f64 = 1e5;
/// Standard normal quantile at upper tail `1e-3`.
pub const Z_1E3: f64 = 3.090_232_306_167_813;
/// Minimum ensemble size for covariance estimates.
pub const MIN_COVARIANCE_SAMPLES: usize = 1000;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "NBW_THREADS";

/// Builds the global rayon pool from `NBW_THREADS` if set. Returns the
/// number of threads in use.
pub fn init_threads_from_env() -> Result<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Domain(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        // a pool built earlier in the process wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

/// Identifies the random stream a path was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedToken {
    pub seed: u64,
    pub stream: u64,
}

/// One sampled path `omega_0 = 0, ..., omega_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSample {
    pub steps: Vec<Direction>,
    pub positions: Vec<Vec<i64>>,
    pub rng_seed: SeedToken,
}

impl PathSample {
    pub fn endpoint(&self) -> &[i64] {
        self.positions.last().expect("positions include the origin")
    }
}

/// An i.i.d. ensemble of paths of one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub step_set: StepSetSpec,
    pub n: u64,
    pub seed: u64,
    pub paths: Vec<PathSample>,
}

impl Ensemble {
    pub fn endpoints(&self) -> Vec<Vec<i64>> {
        self.paths.iter().map(|p| p.endpoint().to_vec()).collect()
    }

    /// One line per path, direction indices separated by spaces.
    pub fn raw_dump(&self) -> String {
        let mut out = String::new();
        for p in &self.paths {
            let line: Vec<String> = p.steps.iter().map(|d| d.0.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

struct StepSource {
    rng: ChaCha8Rng,
    base: u64,
    digits: u32,
    modulus: u64,
    limit: u64,
    word: u64,
    left: u32,
}

impl StepSource {
    fn new(seed: u64, stream: u64, m: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let base = (m - 1) as u64;
        let (mut digits, mut modulus) = (0u32, 1u64);
        if base > 1 {
            while let Some(next) = modulus.checked_mul(base) {
                modulus = next;
                digits += 1;
            }
        }
        let limit = (u64::MAX / modulus) * modulus;
        StepSource {
            rng,
            base,
            digits,
            modulus,
            limit,
            word: 0,
            left: 0,
        }
    }

    fn first(&mut self, m: usize) -> usize {
        self.rng.random_range(0..m)
    }

    /// Uniform in `0..m-1`.
    #[inline]
    fn next(&mut self) -> usize {
        if self.base == 1 {
            return 0;
        }
        if self.left == 0 {
            loop {
                let u = self.rng.next_u64();
                if u < self.limit {
                    self.word = u % self.modulus;
                    break;
                }
            }
            self.left = self.digits;
        }
        let d = self.word % self.base;
        self.word /= self.base;
        self.left -= 1;
        d as usize
    }
}

fn walk_stream(step_set: &StepSet, n: u64, seed: u64, stream: u64, mut visit: impl FnMut(usize)) {
    if n == 0 {
        return;
    }
    let m = step_set.degree();
    let rev = step_set.reversal_map();
    let mut src = StepSource::new(seed, stream, m);
    let mut prev = src.first(m);
    visit(prev);
    for _ in 1..n {
        let j = src.next();
        let forbidden = rev[prev];
        prev = if j >= forbidden { j + 1 } else { j };
        visit(prev);
    }
}

/// `count` independent uniform `n`-step paths; path `i` uses stream `i`.
pub fn sample_paths(step_set: &StepSet, n: u64, count: usize, seed: u64) -> Ensemble {
    let paths = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut steps = Vec::with_capacity(n as usize);
            let mut pos = vec![0i64; step_set.dim()];
            let mut positions = Vec::with_capacity(n as usize + 1);
            positions.push(pos.clone());
            walk_stream(step_set, n, seed, i, |j| {
                steps.push(Direction(j));
                for (p, c) in pos.iter_mut().zip(&step_set.points()[j]) {
                    *p += c;
                }
                positions.push(pos.clone());
            });
            PathSample {
                steps,
                positions,
                rng_seed: SeedToken { seed, stream: i },
            }
        })
        .collect();
    Ensemble {
        step_set: step_set.to_spec(),
        n,
        seed,
        paths,
    }
}

/// Endpoints of the paths [`sample_paths`] would draw, without storing them.
pub fn sample_endpoints(step_set: &StepSet, n: u64, count: usize, seed: u64) -> Vec<Vec<i64>> {
    let d = step_set.dim();
    let flat: Vec<i64> = step_set.points().iter().flatten().copied().collect();
    (0..count)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let mut pos = vec![0i64; d];
            walk_stream(step_set, n, seed, i as u64, |j| {
                for (p, c) in pos.iter_mut().zip(&flat[j * d..(j + 1) * d]) {
                    *p += c;
                }
            });
            pos
        })
        .collect()
}

/// `H` and the limiting covariance `M = H m / (m - 2)` of `omega_n / sqrt(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTarget {
    pub h: Vec<Vec<f64>>,
    pub m: Vec<Vec<f64>>,
}

impl CovarianceTarget {
    pub fn new(step_set: &StepSet) -> Result<Self> {
        let deg = step_set.degree();
        if deg <= 2 {
            return Err(Error::Domain(format!(
                "limit covariance needs m > 2 (m = {deg}: the walk is ballistic)"
            )));
        }
        let num = step_set.step_covariance_numerators();
        let h: Vec<Vec<f64>> = num
            .iter()
            .map(|row| row.iter().map(|v| *v as f64 / deg as f64).collect())
            .collect();
        let factor = deg as f64 / (deg - 2) as f64;
        let m = h.iter().map(|row| row.iter().map(|v| v * factor).collect()).collect();
        Ok(CovarianceTarget { h, m })
    }

    /// `k^T M k`.
    pub fn quadratic_form(&self, k: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                s += k[i] * v * k[j];
            }
        }
        s
    }

    /// `exp(-k^T M k / 2)`.
    pub fn gaussian_char(&self, k: &[f64]) -> f64 {
        (-0.5 * self.quadratic_form(k)).exp()
    }
}

/// Sample covariance of `omega_n / sqrt(n)` with delta-method standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub count: usize,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub standard_errors: Vec<Vec<f64>>,
}

impl CovarianceEstimate {
    /// Largest `|C_ij - M_ij| / se_ij`.
    pub fn max_z_score(&self, target: &CovarianceTarget) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.covariance.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let z = (c - target.m[i][j]).abs() / self.standard_errors[i][j];
                worst = worst.max(z);
            }
        }
        worst
    }
}

pub fn empirical_covariance(endpoints: &[Vec<i64>], n: u64) -> Result<CovarianceEstimate> {
    let count = endpoints.len();
    if count < MIN_COVARIANCE_SAMPLES {
        return Err(Error::Precondition(format!(
            "covariance needs at least {MIN_COVARIANCE_SAMPLES} samples, got {count}"
        )));
    }
    if n == 0 {
        return Err(Error::Precondition("covariance of omega_0 is degenerate".into()));
    }
    let d = endpoints[0].len();
    let scale = 1.0 / (n as f64).sqrt();
    let x: Vec<Vec<f64>> = endpoints
        .iter()
        .map(|e| e.iter().map(|v| *v as f64 * scale).collect())
        .collect();
    let nf = count as f64;
    let mean: Vec<f64> = (0..d)
        .map(|i| pairwise_sum(&x.iter().map(|v| v[i]).collect::<Vec<_>>()) / nf)
        .collect();
    let mut covariance = vec![vec![0.0; d]; d];
    let mut standard_errors = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let prods: Vec<f64> = x.iter().map(|v| (v[i] - mean[i]) * (v[j] - mean[j])).collect();
            let c = pairwise_sum(&prods) / nf;
            let sq: Vec<f64> = prods.iter().map(|p| (p - c) * (p - c)).collect();
            let se = (pairwise_sum(&sq) / (nf - 1.0) / nf).sqrt();
            let c = c * nf / (nf - 1.0);
            covariance[i][j] = c;
            covariance[j][i] = c;
            standard_errors[i][j] = se;
            standard_errors[j][i] = se;
        }
    }
    Ok(CovarianceEstimate {
        count,
        mean,
        covariance,
        standard_errors,
    })
}

/// `b^_n(k / sqrt(n)) / (m (m-1)^{n-1})`, the characteristic function of
/// `omega_n / sqrt(n)`.
pub fn endpoint_char_function_exact(step_set: &StepSet, n: u64, k: &[f64]) -> Result<Complex64> {
    if k.len() != step_set.dim() {
        return Err(Error::InvalidWave(format!(
            "wave has {} components, step set dimension {}",
            k.len(),
            step_set.dim()
        )));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let s = 1.0 / (n as f64).sqrt();
    let wave = FourierVector::new(k.iter().map(|c| c * s).collect())?;
    Ok(bn_ratio(step_set, &wave, n))
}

/// Largest `|endpoint char function - Gaussian limit|` over `ks`.
pub fn clt_deviation(step_set: &StepSet, n: u64, ks: &[Vec<f64>]) -> Result<f64> {
    let target = CovarianceTarget::new(step_set)?;
    ks.iter().try_fold(0.0f64, |worst, k| {
        let v = endpoint_char_function_exact(step_set, n, k)?;
        Ok(worst.max((v - target.gaussian_char(k)).norm()))
    })
}

/// Finite-dimensional characteristic function against its Gaussian limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FddReport {
    pub n: u64,
    pub breakpoints: Vec<f64>,
    pub waves: Vec<Vec<f64>>,
    pub value: Complex64,
    pub limit: f64,
    pub deviation: f64,
}

/// Evaluates the increment characteristic function of `X_n(t) = omega_{floor(nt)} / sqrt(n)`
/// with wave `k^(r)` on `(t_{r-1}, t_r]` and compares with
/// `exp(-sum_r k^(r)T M k^(r) (t_r - t_{r-1}) / 2)`.
pub fn fdd_gaussian_check(step_set: &StepSet, n: u64, breakpoints: &[f64], waves: &[Vec<f64>]) -> Result<FddReport> {
    let target = CovarianceTarget::new(step_set)?;
    let s = 1.0 / (n as f64).sqrt();
    let scaled = waves
        .iter()
        .map(|k| {
            if k.len() != step_set.dim() {
                return Err(Error::InvalidWave(format!("wave {k:?} has the wrong dimension")));
            }
            FourierVector::new(k.iter().map(|c| c * s).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let value = fdd_char_function(step_set, n, breakpoints, &scaled)?;
    let mut prev = 0.0;
    let mut exponent = 0.0;
    for (t, k) in breakpoints.iter().zip(waves) {
        exponent += target.quadratic_form(k) * (t - prev);
        prev = *t;
    }
    let limit = (-0.5 * exponent).exp();
    Ok(FddReport {
        n,
        breakpoints: breakpoints.to_vec(),
        waves: waves.to_vec(),
        value,
        limit,
        deviation: (value - limit).norm(),
    })
}

/// Chi-square test of the path law against the uniform law on all paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub n: u64,
    pub count: usize,
    pub cells: usize,
    pub statistic: f64,
    pub critical_value: f64,
    /// Largest `|observed - expected| / sqrt(count p (1 - p))` over paths.
    pub max_abs_z: f64,
    pub pass: bool,
}

/// Upper `alpha` quantile of chi-square with `df` degrees of freedom, via
/// the Wilson-Hilferty cube approximation at `z = z_alpha`.
pub fn chi_square_critical(df: usize, z: f64) -> f64 {
    let k = df as f64;
    let c = 2.0 / (9.0 * k);
    k * (1.0 - c + z * c.sqrt()).powi(3)
}

/// Samples `count` paths and tests them against the enumeration at
/// significance `1e-3`.
pub fn path_uniformity_test(step_set: &StepSet, n: u64, count: usize, seed: u64) -> Result<UniformityReport> {
    let index: HashMap<Vec<usize>, usize> = enumerate_walks(step_set, n as usize, UNIFORMITY_PATH_CAP)?
        .enumerate()
        .map(|(i, w)| (w.steps, i))
        .collect();
    let cells = index.len();
    let mut observed = vec![0u64; cells];
    for p in sample_paths(step_set, n, count, seed).paths {
        let key: Vec<usize> = p.steps.iter().map(|d| d.0).collect();
        let i = index
            .get(&key)
            .ok_or_else(|| Error::Numerical(format!("sampled path {key:?} is not a valid walk")))?;
        observed[*i] += 1;
    }
    let p = 1.0 / cells as f64;
    let expected = count as f64 * p;
    let sd = (count as f64 * p * (1.0 - p)).sqrt();
    let mut statistic = 0.0;
    let mut max_abs_z = 0.0f64;
    for o in &observed {
        let diff = *o as f64 - expected;
        statistic += diff * diff / expected;
        if sd > 0.0 {
            max_abs_z = max_abs_z.max(diff.abs() / sd);
        }
    }
    let critical_value = if cells > 1 { chi_square_critical(cells - 1, Z_1E3) } else { 0.0 };
    Ok(UniformityReport {
        n,
        count,
        cells,
        statistic,
        critical_value,
        max_abs_z,
        pass: cells == 1 || statistic <= critical_value,
    })
}

/// Ensemble mean of `|omega_n|^2` against the exact value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub n: u64,
    pub count: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub exact: f64,
    pub z_score: f64,
}

pub fn second_moment_check(step_set: &StepSet, n: u64, count: usize, seed: u64) -> Result<MomentCheck> {
    if count < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let sq: Vec<f64> = sample_endpoints(step_set, n, count, seed)
        .iter()
        .map(|e| e.iter().map(|v| (v * v) as f64).sum())
        .collect();
    let nf = count as f64;
    let mean = pairwise_sum(&sq) / nf;
    let dev: Vec<f64> = sq.iter().map(|v| (v - mean) * (v - mean)).collect();
    let standard_error = (pairwise_sum(&dev) / (nf - 1.0) / nf).sqrt();
    let exact = second_moment_closed(step_set, n).to_f64().unwrap_or(f64::NAN);
    let z_score = if standard_error > 0.0 {
        (mean - exact).abs() / standard_error
    } else if mean == exact {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(MomentCheck {
        n,
        count,
        mean,
        standard_error,
        exact,
        z_score,
    })
}

/// Summary statistics exported for an endpoint ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub step_set: StepSetSpec,
    pub n: u64,
    pub count: usize,
    pub seed: u64,
    pub covariance: Option<CovarianceEstimate>,
    pub target: Option<CovarianceTarget>,
    pub max_z_score: Option<f64>,
    pub mean_squared_norm: f64,
    pub mean_squared_norm_se: f64,
}

pub fn ensemble_stats(step_set: &StepSet, n: u64, seed: u64, endpoints: &[Vec<i64>]) -> EnsembleStats {
    let covariance = empirical_covariance(endpoints, n).ok();
    let target = CovarianceTarget::new(step_set).ok();
    let max_z_score = match (&covariance, &target) {
        (Some(c), Some(t)) => Some(c.max_z_score(t)),
        _ => None,
    };
    let sq: Vec<f64> = endpoints
        .iter()
        .map(|e| e.iter().map(|v| (v * v) as f64).sum())
        .collect();
    let nf = sq.len() as f64;
    let mean = if sq.is_empty() { 0.0 } else { pairwise_sum(&sq) / nf };
    let se = if sq.len() > 1 {
        let dev: Vec<f64> = sq.iter().map(|v| (v - mean) * (v - mean)).collect();
        (pairwise_sum(&dev) / (nf - 1.0) / nf).sqrt()
    } else {
        0.0
    };
    EnsembleStats {
        step_set: step_set.to_spec(),
        n,
        count: endpoints.len(),
        seed,
        covariance,
        target,
        max_z_score,
        mean_squared_norm: mean,
        mean_squared_norm_se: se,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nn(d: usize) -> StepSet {
        StepSet::nearest_neighbor(d).unwrap()
    }

    fn king() -> StepSet {
        let half = [[1, 0], [0, 1], [1, 1], [1, -1]];
        let points = half.iter().flat_map(|p| [p.to_vec(), vec![-p[0], -p[1]]]).collect();
        StepSet::new(2, points).unwrap()
    }

    #[test]
    fn paths_never_backtrack() {
        let s = king();
        let e = sample_paths(&s, 50, 200, 3);
        for p in &e.paths {
            assert_eq!(p.positions.len(), 51);
            for w in p.steps.windows(2) {
                assert_ne!(w[1], s.reverse(w[0]));
            }
        }
    }

    #[test]
    fn replay_is_identical() {
        let s = nn(3);
        assert_eq!(sample_paths(&s, 30, 50, 9), sample_paths(&s, 30, 50, 9));
        assert_ne!(sample_paths(&s, 30, 50, 9), sample_paths(&s, 30, 50, 10));
        let ends = sample_endpoints(&s, 30, 50, 9);
        assert_eq!(ends, sample_paths(&s, 30, 50, 9).endpoints());
    }

    #[test]
    fn one_step_is_uniform() {
        let s = nn(2);
        let r = path_uniformity_test(&s, 1, 40_000, 1).unwrap();
        assert_eq!(r.cells, 4);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn two_step_paths_equiprobable() {
        let r = path_uniformity_test(&nn(2), 2, 120_000, 2).unwrap();
        assert_eq!(r.cells, 12);
        assert!(r.max_abs_z < 4.0, "{r:?}");
        assert!(r.pass);
    }

    #[test]
    fn digit_source_is_uniform_for_large_bases() {
        let mut src = StepSource::new(5, 0, 8);
        let mut hist = [0u32; 7];
        for _ in 0..70_000 {
            hist[src.next()] += 1;
        }
        for h in hist {
            assert!((h as f64 - 10_000.0).abs() < 500.0, "{hist:?}");
        }
    }

    #[test]
    fn chi_square_critical_values() {
        // exact 0.999 quantiles: df=3 16.266, df=11 31.264, df=35 66.619
        assert!((chi_square_critical(3, Z_1E3) - 16.266).abs() < 0.3);
        assert!((chi_square_critical(11, Z_1E3) - 31.264).abs() < 0.2);
        assert!((chi_square_critical(35, Z_1E3) - 66.619).abs() < 0.2);
    }

    #[test]
    fn covariance_targets() {
        let t = CovarianceTarget::new(&nn(2)).unwrap();
        assert_eq!(t.h, vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert_eq!(t.m, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let t = CovarianceTarget::new(&nn(3)).unwrap();
        assert!((t.m[0][0] - 0.5).abs() < 1e-15);
        let t = CovarianceTarget::new(&king()).unwrap();
        assert!((t.h[0][0] - 0.75).abs() < 1e-15);
        assert_eq!(t.h[0][1], 0.0);
        assert!((t.m[0][0] - 1.0).abs() < 1e-15);
        assert!(CovarianceTarget::new(&nn(1)).is_err());
    }

    #[test]
    fn char_function_examples() {
        let s = nn(2);
        assert_eq!(endpoint_char_function_exact(&s, 100, &[0.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
        let v = endpoint_char_function_exact(&s, 10_000, &[1.0, 0.0]).unwrap();
        assert!((v - (-0.5f64).exp()).norm() <= 0.01);
        let v = endpoint_char_function_exact(&nn(3), 10_000, &[1.0, 1.0, 0.0]).unwrap();
        assert!((v - (-0.5f64).exp()).norm() <= 0.01);
    }

    #[test]
    fn fdd_examples() {
        let s = nn(2);
        let r = fdd_gaussian_check(&s, 10_000, &[0.5, 1.0], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(r.deviation <= 0.02, "{r:?}");
        let r = fdd_gaussian_check(&s, 500, &[1.0], &[vec![0.7, -0.2]]).unwrap();
        let e = endpoint_char_function_exact(&s, 500, &[0.7, -0.2]).unwrap();
        assert!((r.value - e).norm() < 1e-12);
        let r = fdd_gaussian_check(&s, 300, &[0.3, 1.0], &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(r.deviation < 1e-12);
    }

    #[test]
    fn second_moment_matches_exact() {
        for n in [4u64, 8] {
            let c = second_moment_check(&nn(2), n, 50_000, 11).unwrap();
            assert!(c.z_score < 4.0, "{c:?}");
        }
    }

    #[test]
    fn general_step_set_covariance() {
        let s = king();
        let ends = sample_endpoints(&s, 400, 20_000, 4);
        let est = empirical_covariance(&ends, 400).unwrap();
        let t = CovarianceTarget::new(&s).unwrap();
        assert!(est.max_z_score(&t) < 4.0, "{est:?}");
        assert!(empirical_covariance(&ends[..10], 400).is_err());
    }

    #[test]
    fn dump_has_one_line_per_path() {
        let e = sample_paths(&nn(2), 3, 5, 0);
        let dump = e.raw_dump();
        assert_eq!(dump.lines().count(), 5);
        assert!(dump.lines().all(|l| l.split(' ').count() == 3));
        let stats = ensemble_stats(&nn(2), 3, 0, &e.endpoints());
        assert!(stats.covariance.is_none());
        assert!(serde_json::to_string(&stats).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn endpoint_parity(n in 1u64..40, seed in any::<u64>()) {
            for e in sample_endpoints(&nn(2), n, 20, seed) {
                let l1: i64 = e.iter().map(|v| v.abs()).sum();
                prop_assert!(l1 <= n as i64);
                prop_assert_eq!((l1 + n as i64) % 2, 0);
            }
        }
    }
}
