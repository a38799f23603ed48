//! Walks on the torus `T_{r,d}` and the hypercube: exact endpoint
//! distributions by dynamic programming and by inverse Fourier transform,
//! uniform mixing times, and the closed-form bounds they are compared with.
//!
//! Three families are covered: products of complete graphs ("Hamming"),
//! the nearest-neighbour torus (`r >= 3`) and the hypercube `{0,1}^m`.
//! All are Cayley graphs, so `p_n(x, y) = p_n(y - x)` and only the walk from
//! the origin is computed.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_count::{count_walks_capped, total_walks, DEFAULT_STATE_CAP};
use crate::lattice::{step_transform, StepSet, TorusSpec};
use crate::spectral::{bn_ratio_from_pair, eigenvalue_bound_from_d_hat, pair_from_d_hat, SpectralPair};

/// Probabilities more negative than this on the Fourier route are errors;
/// smaller excursions are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;
/// Default horizon, in multiples of the finite lemma bound.
pub const HORIZON_FACTOR: u64 = 50;
/// `epsilon` of the asymptotic mixing-time statements.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// A graph family on which mixing is studied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Hamming { r: u32, d: usize },
    Nn { r: u32, d: usize },
    Hypercube { m: usize },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Hamming { r, d } => write!(f, "hamming(r={r}, d={d})"),
            Family::Nn { r, d } => write!(f, "nn(r={r}, d={d})"),
            Family::Hypercube { m } => write!(f, "hypercube(m={m})"),
        }
    }
}

impl Family {
    pub fn step_set(&self) -> Result<StepSet> {
        match *self {
            Family::Hamming { r, d } => StepSet::hamming(d, r),
            Family::Nn { r, d } => StepSet::nearest_neighbor_torus(d, r),
            Family::Hypercube { m } => StepSet::hypercube(m),
        }
    }

    pub fn torus(&self) -> Result<TorusSpec> {
        match *self {
            Family::Hamming { r, d } | Family::Nn { r, d } => TorusSpec::new(d, r),
            Family::Hypercube { m } => TorusSpec::new(m, 2),
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            Family::Hamming { r, d } => d * (r as usize - 1),
            Family::Nn { d, .. } => 2 * d,
            Family::Hypercube { m } => m,
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Family::Hamming { r, d } | Family::Nn { r, d } => f64::from(r).powi(d as i32),
            Family::Hypercube { m } => 2f64.powi(m as i32),
        }
    }

    /// Bipartite families converge to `[1 + (-1)^{|x|_1 + n}] / V`.
    pub fn is_periodic(&self) -> bool {
        match *self {
            Family::Hamming { .. } => false,
            Family::Nn { r, .. } => r % 2 == 0,
            Family::Hypercube { .. } => true,
        }
    }

    /// Checks the hypotheses of the family's mixing lemma.
    pub fn check_hypotheses(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::HypothesesUnmet(format!("{self}: {msg}")));
        match *self {
            Family::Hamming { r, d } | Family::Nn { r, d } if r < 3 || d == 0 => {
                fail("need r >= 3 and d >= 1".into())
            }
            Family::Hypercube { m } if m < 3 => fail("need m >= 3".into()),
            _ if self.degree() <= 2 => fail(format!(
                "degree {} <= 2: the walk is a deterministic rotation and never mixes",
                self.degree()
            )),
            _ => Ok(()),
        }
    }

    /// Stationary target for `p_n(x)` with `x` in `0..r` coordinates.
    pub fn target(&self, x: &[i64], n: u64) -> f64 {
        let v = self.volume();
        if self.is_periodic() {
            let parity = (x.iter().sum::<i64>() + n as i64).rem_euclid(2);
            if parity == 0 {
                2.0 / v
            } else {
                0.0
            }
        } else {
            1.0 / v
        }
    }
}

/// An endpoint distribution on a torus, indexed by [`TorusSpec::index_of`].
#[derive(Debug, Clone, PartialEq)]
pub struct TorusDistribution {
    pub spec: TorusSpec,
    pub n: u64,
    pub probabilities: Vec<f64>,
    /// Exact values when produced by the integer recursion.
    pub exact: Option<Vec<BigRational>>,
}

impl TorusDistribution {
    pub fn probability(&self, x: &[i64]) -> f64 {
        self.probabilities[self.spec.index_of(x)]
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.probabilities)
    }

    pub fn max_abs_difference(&self, other: &TorusDistribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .fold(0.0, |a, (p, q)| a.max((p - q).abs()))
    }
}

pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn check_compatible(step_set: &StepSet, spec: &TorusSpec) -> Result<()> {
    if step_set.dim() != spec.dim {
        return Err(Error::InvalidTorus(format!(
            "step set has dimension {}, torus {}",
            step_set.dim(),
            spec.dim
        )));
    }
    match step_set.modulus() {
        Some(r) if r != spec.width => Err(Error::InvalidTorus(format!(
            "step set lives mod {r}, torus has width {}",
            spec.width
        ))),
        None if 2 * step_set.max_abs_coordinate() >= i64::from(spec.width) => {
            Err(Error::InvalidTorus(format!(
                "steps collide mod {}; nearest-neighbour walks need r >= 3 (use the hypercube for r = 2)",
                spec.width
            )))
        }
        _ => Ok(()),
    }
}

/// Exact `p_n` from the integer recursions run mod `r`.
pub fn torus_counts(step_set: &StepSet, spec: &TorusSpec, n: u64) -> Result<TorusDistribution> {
    check_compatible(step_set, spec)?;
    let field = count_walks_capped(step_set, n, Some(spec.width), DEFAULT_STATE_CAP)?;
    let total = BigInt::from(total_walks(step_set.degree(), n));
    let mut exact = vec![BigRational::from_integer(BigInt::from(0)); spec.volume()];
    for (x, c) in field.counts() {
        exact[spec.index_of(x)] = BigRational::new(BigInt::from(c.clone()), total.clone());
    }
    let probabilities = exact.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
    Ok(TorusDistribution {
        spec: *spec,
        n,
        probabilities,
        exact: Some(exact),
    })
}

/// Forward propagation of `(position, last step)` probabilities in floating
/// point. Produces `p_0, p_1, ...` in turn.
#[derive(Debug, Clone)]
pub struct FloatDp {
    spec: TorusSpec,
    m: usize,
    rev: Vec<usize>,
    /// `neighbor[x * m + j]` is the index of `x + e_j`.
    neighbor: Vec<usize>,
    /// `state[x * m + j]`: probability of being at `x` having just stepped `j`.
    state: Vec<f64>,
    n: u64,
}

impl FloatDp {
    pub fn new(step_set: &StepSet, spec: &TorusSpec) -> Result<Self> {
        check_compatible(step_set, spec)?;
        let m = step_set.degree();
        let v = spec.volume();
        let mut neighbor = vec![0; v * m];
        for x in 0..v {
            let px = spec.point_at(x);
            for (j, step) in step_set.points().iter().enumerate() {
                let y: Vec<i64> = px.iter().zip(step).map(|(a, b)| a + b).collect();
                neighbor[x * m + j] = spec.index_of(&y);
            }
        }
        Ok(FloatDp {
            spec: *spec,
            m,
            rev: step_set.reversal_map().to_vec(),
            neighbor,
            state: Vec::new(),
            n: 0,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `p_n` at the current `n`.
    pub fn distribution(&self) -> Vec<f64> {
        let v = self.spec.volume();
        if self.n == 0 {
            let mut p = vec![0.0; v];
            p[0] = 1.0;
            return p;
        }
        self.state.chunks(self.m).map(|c| c.iter().sum()).collect()
    }

    pub fn step(&mut self) {
        let m = self.m;
        let v = self.spec.volume();
        let mut next = vec![0.0; v * m];
        if self.n == 0 {
            for j in 0..m {
                next[self.neighbor[j]] += 0.0;
                next[self.neighbor[j] * m + j] += 1.0 / m as f64;
            }
        } else {
            let w = 1.0 / (m - 1) as f64;
            for x in 0..v {
                let row = &self.state[x * m..(x + 1) * m];
                let s: f64 = row.iter().sum();
                if s == 0.0 {
                    continue;
                }
                for j in 0..m {
                    let out = (s - row[self.rev[j]]) * w;
                    next[self.neighbor[x * m + j] * m + j] += out;
                }
            }
        }
        self.state = next;
        self.n += 1;
    }
}

/// `p_n` by forward propagation in floating point.
pub fn torus_distribution_dp(step_set: &StepSet, spec: &TorusSpec, n: u64) -> Result<TorusDistribution> {
    let mut dp = FloatDp::new(step_set, spec)?;
    for _ in 0..n {
        dp.step();
    }
    Ok(TorusDistribution {
        spec: *spec,
        n,
        probabilities: dp.distribution(),
        exact: None,
    })
}

/// Spectral data on the dual grid, reusable across `n`.
#[derive(Debug, Clone)]
pub struct DualSpectrum {
    spec: TorusSpec,
    pairs: Vec<SpectralPair>,
    /// `twiddle[j * r + x] = e^{2 pi i f_j x / r}` for dual frequency `f_j`.
    twiddle: Vec<Complex64>,
}

impl DualSpectrum {
    pub fn new(step_set: &StepSet, spec: &TorusSpec) -> Result<Self> {
        check_compatible(step_set, spec)?;
        let m = step_set.degree();
        let pairs = spec
            .dual_grid()
            .iter()
            .map(|k| pair_from_d_hat(step_transform(step_set, k), m))
            .collect();
        let r = spec.width as usize;
        let freqs = spec.dual_frequencies();
        let mut twiddle = Vec::with_capacity(r * r);
        for f in &freqs {
            for x in 0..r {
                let angle = 2.0 * PI * (*f as f64) * x as f64 / r as f64;
                twiddle.push(Complex64::from_polar(1.0, angle));
            }
        }
        Ok(DualSpectrum { spec: *spec, pairs, twiddle })
    }

    pub fn pairs(&self) -> &[SpectralPair] {
        &self.pairs
    }

    /// `p^_n(k)` on the dual grid.
    pub fn characteristic(&self, n: u64) -> Vec<Complex64> {
        self.pairs.iter().map(|p| bn_ratio_from_pair(p, n)).collect()
    }

    /// `p_n(x) = V^{-1} sum_k p^_n(k) e^{i k.x}`, one axis at a time.
    pub fn distribution(&self, n: u64) -> Result<TorusDistribution> {
        let mut values = self.characteristic(n);
        let r = self.spec.width as usize;
        let v = self.spec.volume();
        let mut line = vec![Complex64::new(0.0, 0.0); r];
        let mut stride = 1;
        for _ in 0..self.spec.dim {
            for base in 0..v {
                if (base / stride) % r != 0 {
                    continue;
                }
                for (x, out) in line.iter_mut().enumerate() {
                    *out = (0..r)
                        .map(|j| values[base + j * stride] * self.twiddle[j * r + x])
                        .sum();
                }
                for (x, val) in line.iter().enumerate() {
                    values[base + x * stride] = *val;
                }
            }
            stride *= r;
        }
        let vol = v as f64;
        let mut probabilities = Vec::with_capacity(v);
        let mut clamped = 0usize;
        for (i, z) in values.iter().enumerate() {
            let p = z.re / vol;
            if p < -NEGATIVE_CLAMP {
                return Err(Error::Numerical(format!(
                    "negative probability {p:e} at {:?} (n = {n})",
                    self.spec.point_at(i)
                )));
            }
            if p < 0.0 {
                clamped += 1;
                probabilities.push(0.0);
            } else {
                probabilities.push(p);
            }
        }
        if clamped > 0 {
            log::warn!("clamped {clamped} slightly negative probabilities to zero (n = {n})");
        }
        Ok(TorusDistribution {
            spec: self.spec,
            n,
            probabilities,
            exact: None,
        })
    }
}

/// `p_n` by inverse Fourier transform of the spectral characteristic function.
pub fn torus_distribution_fourier(step_set: &StepSet, spec: &TorusSpec, n: u64) -> Result<TorusDistribution> {
    DualSpectrum::new(step_set, spec)?.distribution(n)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `K_a(w) = sum_{k: a(k) = a} (-1)^{k.x}` for `|x|_1 = w`.
pub fn krawtchouk(m: usize, a: usize, w: usize) -> f64 {
    (0..=a.min(w))
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(w, j) * binomial(m - w, a - j)
        })
        .sum()
}

/// `p_n` on the hypercube as a function of the Hamming weight `|x|_1`.
pub fn hypercube_weight_profile(m: usize, n: u64) -> Result<Vec<f64>> {
    if m < 3 {
        return Err(Error::Domain(format!(
            "hypercube needs m >= 3 (m = {m} is deterministic)"
        )));
    }
    let ratios: Vec<f64> = (0..=m)
        .map(|a| bn_ratio_from_pair(&pair_from_d_hat(1.0 - 2.0 * a as f64 / m as f64, m), n).re)
        .collect();
    let scale = 2f64.powi(-(m as i32));
    Ok((0..=m)
        .map(|w| {
            let p = scale * (0..=m).map(|a| ratios[a] * krawtchouk(m, a, w)).sum::<f64>();
            if (-NEGATIVE_CLAMP..0.0).contains(&p) {
                0.0
            } else {
                p
            }
        })
        .collect())
}

/// `p_n` on `{0,1}^m` through the weight-only Walsh transform.
pub fn hypercube_distribution(m: usize, n: u64) -> Result<TorusDistribution> {
    let profile = hypercube_weight_profile(m, n)?;
    if let Some(p) = profile.iter().find(|p| **p < -NEGATIVE_CLAMP) {
        return Err(Error::Numerical(format!("negative probability {p:e}")));
    }
    let spec = TorusSpec::new(m, 2)?;
    let probabilities = (0..spec.volume())
        .map(|i| profile[(i as u64).count_ones() as usize])
        .collect();
    Ok(TorusDistribution {
        spec,
        n,
        probabilities,
        exact: None,
    })
}

/// Thresholds and bounds attached to a family's mixing lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaBounds {
    pub xi: f64,
    /// The walk-length threshold as printed in the lemma statement.
    pub stated_threshold: f64,
    /// Least `n` at which the inequality chain of the proof closes, i.e.
    /// from which `max_x |p_n(x) - target| <= rhs(n)` is claimed.
    pub operative_threshold: u64,
    /// Finite-volume bound on the mixing time implied by the deviation
    /// statement: past it the deviation is at most `xi / V`.
    pub mixing_bound: u64,
    /// `(1 + eps)` times the lemma's large-volume mixing statement.
    pub asymptotic_bound: f64,
    /// Hypercube only: `(m/2)(1 + eps) log(2m / xi)`.
    pub theorem_bound: Option<f64>,
    pub epsilon: f64,
}

fn least_n(mut ok: impl FnMut(u64) -> bool) -> Result<u64> {
    for n in 1..=10_000_000u64 {
        if ok(n) {
            return Ok(n);
        }
    }
    Err(Error::Numerical("threshold search did not terminate".into()))
}

/// `sum_{k in T*_{r,1}} e^{-(n-1)(1 - cos k)/d}`.
fn nn_axis_sum(r: u32, d: usize, n: u64) -> f64 {
    let spec = TorusSpec { dim: 1, width: r };
    spec.dual_frequencies()
        .iter()
        .map(|&j| {
            let k = 2.0 * PI * j as f64 / f64::from(r);
            (-(n as f64 - 1.0) * (1.0 - k.cos()) / d as f64).exp()
        })
        .sum()
}

/// Least `n` from which the proof's inequality chain gives deviation at most
/// `rhs(n)` with tolerance `xi`.
pub fn operative_threshold(family: &Family, xi: f64) -> Result<u64> {
    family.check_hypotheses()?;
    check_xi(xi)?;
    match *family {
        Family::Hamming { r, d } => {
            let (rf, df) = (f64::from(r), d as f64);
            least_n(|n| {
                (1.0 + (rf - 1.0) * (-rf * (n as f64 - 1.0) / (df * (rf - 1.0))).exp()).powi(d as i32) - 1.0 <= xi
            })
        }
        Family::Nn { r, d } => least_n(|n| nn_axis_sum(r, d, n).powi(d as i32) - 1.0 <= xi / 2.0),
        Family::Hypercube { m } => {
            let mf = m as f64;
            least_n(|n| (1.0 + (-2.0 * (n as f64 - 1.0) / mf).exp()).powi(m as i32) - 1.0 <= xi / 2.0)
        }
    }
}

/// The threshold as printed in the lemma statement. For the hypercube this
/// is `m (log m + log xi) / 2`, which is reported, not relied upon.
pub fn stated_threshold(family: &Family, xi: f64) -> f64 {
    match *family {
        Family::Hamming { r, d } => {
            let (rf, df) = (f64::from(r), d as f64);
            df * (rf - 1.0) / rf * ((rf - 1.0) / ((1.0 + xi).powf(1.0 / df) - 1.0)).ln()
        }
        Family::Nn { r, d } => {
            (2.0 / ((1.0 + xi / 2.0).powf(1.0 / d as f64) - 1.0)).ln() / (1.0 - (2.0 * PI / f64::from(r)).cos())
        }
        Family::Hypercube { m } => {
            let mf = m as f64;
            mf * (mf.ln() + xi.ln()) / 2.0
        }
    }
}

/// The hypercube threshold from the proof of the convergence lemma,
/// `-(m/2) log((1 + xi/2)^{1/m} - 1)`.
pub fn hypercube_proof_threshold(m: usize, xi: f64) -> f64 {
    let mf = m as f64;
    -(mf / 2.0) * ((1.0 + xi / 2.0).powf(1.0 / mf) - 1.0).ln()
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::Domain(format!("xi must be positive, got {xi}")));
    }
    Ok(())
}

/// Right-hand side asserted for `max_x |p_n(x) - target|`:
/// `(m-1)^{-(n-1)/2} + xi / V`.
pub fn lemma_rhs(family: &Family, xi: f64, n: u64) -> f64 {
    ((family.degree() - 1) as f64).powf(-(n as f64 - 1.0) / 2.0) + xi / family.volume()
}

/// The right-hand side with the exponent as printed in the statement; the
/// nearest-neighbour lemma states `(2d-1)^{-n/2}`.
pub fn lemma_rhs_printed(family: &Family, xi: f64, n: u64) -> f64 {
    match family {
        Family::Nn { .. } => ((family.degree() - 1) as f64).powf(-(n as f64) / 2.0) + xi / family.volume(),
        _ => lemma_rhs(family, xi, n),
    }
}

pub fn lemma_bounds(family: &Family, xi: f64, epsilon: f64) -> Result<LemmaBounds> {
    family.check_hypotheses()?;
    check_xi(xi)?;
    let operative = operative_threshold(family, xi)?;
    let v = family.volume();
    let c = (family.degree() - 1) as f64;
    let n1 = least_n(|n| c.powf(-(n as f64 - 1.0) / 2.0) <= xi / (2.0 * v))?;
    let mixing_bound = operative_threshold(family, xi / 2.0)?.max(n1);
    let (asymptotic_bound, theorem_bound) = match *family {
        Family::Hypercube { m } => {
            let mf = m as f64;
            (
                (1.0 + epsilon) * hypercube_proof_threshold(m, xi),
                Some(mf / 2.0 * (1.0 + epsilon) * (2.0 * mf / xi).ln()),
            )
        }
        _ => ((1.0 + epsilon) * stated_threshold(family, xi), None),
    };
    Ok(LemmaBounds {
        xi,
        stated_threshold: stated_threshold(family, xi),
        operative_threshold: operative,
        mixing_bound,
        asymptotic_bound,
        theorem_bound,
        epsilon,
    })
}

/// Lemma right-hand side at `n` together with the lemma's thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    pub n: u64,
    pub rhs: f64,
    pub rhs_printed: f64,
    /// Whether `n` is past the operative threshold.
    pub applies: bool,
    pub bounds: LemmaBounds,
}

pub fn bound_evaluators(family: &Family, xi: f64, n: u64) -> Result<BoundEvaluation> {
    let bounds = lemma_bounds(family, xi, DEFAULT_EPSILON)?;
    Ok(BoundEvaluation {
        n,
        rhs: lemma_rhs(family, xi, n),
        rhs_printed: lemma_rhs_printed(family, xi, n),
        applies: n >= bounds.operative_threshold,
        bounds,
    })
}

/// Exact mixing behaviour of one family at one tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub family: Family,
    pub xi: f64,
    pub horizon: u64,
    /// `curve[n] = V max_x |(p_n(x) + p_{n+1}(x))/2 - 1/V|`.
    pub curve: Vec<f64>,
    /// `max_x (p_n(x) + p_{n+1}(x))/2 <= (1 + xi)/V` at each `n`.
    pub mixed: Vec<bool>,
    /// `max_x |p_n(x) - target(x, n)|`.
    pub lemma_deviation: Vec<f64>,
    /// Least `n` after which the averaged condition holds up to the horizon.
    pub t_mix: Option<u64>,
    /// Finite bound asserted against `t_mix`.
    pub paper_bound: Option<u64>,
    pub bounds: Option<LemmaBounds>,
}

impl MixingReport {
    /// `t_mix <= paper_bound` (and the hypercube theorem bound). `None` when
    /// there is nothing to compare.
    pub fn within_bounds(&self) -> Option<bool> {
        let t = self.t_mix? as f64;
        let b = self.bounds?;
        let mut ok = t <= b.mixing_bound as f64;
        if let Some(th) = b.theorem_bound {
            ok &= t <= th;
        }
        Some(ok)
    }

    /// First `n >= operative threshold` at which the deviation statement
    /// fails, with the deviation and right-hand side there.
    pub fn deviation_violation(&self) -> Option<(u64, f64, f64)> {
        let b = self.bounds?;
        (b.operative_threshold..self.lemma_deviation.len() as u64).find_map(|n| {
            let dev = self.lemma_deviation[n as usize];
            let rhs = lemma_rhs(&self.family, self.xi, n);
            (dev > rhs).then_some((n, dev, rhs))
        })
    }

    /// CSV with columns `n,deviation,threshold,lemma_deviation,lemma_rhs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,deviation,threshold,lemma_deviation,lemma_rhs\n");
        for (n, c) in self.curve.iter().enumerate() {
            let rhs = lemma_rhs(&self.family, self.xi, n as u64);
            out.push_str(&format!(
                "{n},{c:?},{:?},{:?},{rhs:?}\n",
                self.xi, self.lemma_deviation[n]
            ));
        }
        out
    }
}

/// Scans the exact curve up to `horizon` (default `50` times the finite
/// lemma bound). Families outside the lemma's hypotheses need an explicit
/// horizon.
pub fn mixing_time(family: &Family, xi: f64, horizon: Option<u64>) -> Result<MixingReport> {
    check_xi(xi)?;
    let bounds = match lemma_bounds(family, xi, DEFAULT_EPSILON) {
        Ok(b) => Some(b),
        Err(Error::HypothesesUnmet(msg)) => {
            if horizon.is_none() {
                return Err(Error::HypothesesUnmet(msg));
            }
            None
        }
        Err(e) => return Err(e),
    };
    let horizon = match (horizon, bounds) {
        (Some(h), _) => h,
        (None, Some(b)) => HORIZON_FACTOR * b.mixing_bound,
        (None, None) => unreachable!(),
    };
    let step_set = family.step_set()?;
    let spec = family.torus()?;
    let mut dp = FloatDp::new(&step_set, &spec)?;
    let points: Vec<Vec<i64>> = spec.points().collect();
    let v = family.volume();
    let mut prev = dp.distribution();
    let mut curve = Vec::with_capacity(horizon as usize + 1);
    let mut mixed = Vec::with_capacity(horizon as usize + 1);
    let mut lemma_deviation = Vec::with_capacity(horizon as usize + 1);
    for n in 0..=horizon {
        dp.step();
        let next = dp.distribution();
        let mut worst_avg = 0.0f64;
        let mut worst_abs = 0.0f64;
        let mut worst_lemma = 0.0f64;
        for (i, x) in points.iter().enumerate() {
            let avg = 0.5 * (prev[i] + next[i]);
            worst_avg = worst_avg.max(avg);
            worst_abs = worst_abs.max((avg - 1.0 / v).abs());
            worst_lemma = worst_lemma.max((prev[i] - family.target(x, n)).abs());
        }
        curve.push(worst_abs * v);
        mixed.push(worst_avg <= (1.0 + xi) / v);
        lemma_deviation.push(worst_lemma);
        prev = next;
    }
    let t_mix = if *mixed.last().expect("non-empty") {
        let first_bad_from_end = mixed.iter().rposition(|ok| !ok);
        Some(first_bad_from_end.map_or(0, |i| i as u64 + 1))
    } else {
        None
    };
    Ok(MixingReport {
        family: *family,
        xi,
        horizon,
        curve,
        mixed,
        lemma_deviation,
        t_mix,
        paper_bound: bounds.map(|b| b.mixing_bound),
        bounds,
    })
}

/// Largest `|p^_n(k)| - rho(k)^{n-1}` over the dual grid and `1 <= n <= n_max`,
/// with the `(k index, n)` where it occurs.
pub fn pointwise_bound_excess(step_set: &StepSet, spec: &TorusSpec, n_max: u64) -> Result<(f64, usize, u64)> {
    let spectrum = DualSpectrum::new(step_set, spec)?;
    let m = step_set.degree();
    let mut worst = (f64::NEG_INFINITY, 0, 1);
    for (i, pair) in spectrum.pairs().iter().enumerate() {
        let rho = eigenvalue_bound_from_d_hat(pair.d_hat, m);
        for n in 1..=n_max {
            let excess = bn_ratio_from_pair(pair, n).norm() - rho.powi(n as i32 - 1);
            if excess > worst.0 {
                worst = (excess, i, n);
            }
        }
    }
    Ok(worst)
}
