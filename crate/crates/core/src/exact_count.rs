//! Exact path counts: the first-step recursions for `b_n(x)` and
//! `b_n^iota(x)`, and a brute-force enumerator that serves as the oracle
//! for everything spectral.
//!
//! `b_n^iota(x)` counts `n`-step walks ending at `x` whose first step is not
//! `iota`. With `b_0^iota(x) = 1{x = 0}` the counts obey, for `n >= 1`,
//!
//! ```text
//! b_n(x)      = sum_iota b_{n-1}^{-iota}(x - e[iota])
//! b_n(x)      = b_n^iota(x) + b_{n-1}^{-iota}(x - e[iota])
//! b_n^iota(x) = sum_{kappa != iota} b_{n-1}^{-kappa}(x - e[kappa])
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{FourierVector, StepSet};

/// Default ceiling on `(points in the reachable box) * m` for the DP.
pub const DEFAULT_STATE_CAP: f64 = 2e7;
/// Default ceiling on the number of enumerated paths.
pub const DEFAULT_PATH_CAP: f64 = 1e7;

/// Exact `b_n(x)` and `b_n^iota(x)` for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountField {
    pub n: u64,
    pub dim: usize,
    pub degree: usize,
    /// Torus width when the counts are reduced mod `r`.
    pub modulus: Option<u32>,
    counts: BTreeMap<Vec<i64>, BigUint>,
    directed: BTreeMap<Vec<i64>, Vec<BigUint>>,
}

impl CountField {
    pub fn count(&self, x: &[i64]) -> BigUint {
        self.counts.get(&self.key(x)).cloned().unwrap_or_default()
    }

    pub fn directed_count(&self, x: &[i64], dir: usize) -> BigUint {
        self.directed
            .get(&self.key(x))
            .map(|v| v[dir].clone())
            .unwrap_or_default()
    }

    fn key(&self, x: &[i64]) -> Vec<i64> {
        reduce(x, self.modulus)
    }

    /// Non-zero `(x, b_n(x))`, ordered by `x`.
    pub fn counts(&self) -> impl Iterator<Item = (&Vec<i64>, &BigUint)> {
        self.counts.iter()
    }

    /// `(x, [b_n^iota(x)]_iota)` for every `x` with a non-zero entry.
    pub fn directed_counts(&self) -> impl Iterator<Item = (&Vec<i64>, &Vec<BigUint>)> {
        self.directed.iter()
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    /// `sum_x b_n(x) e^{i k.x}`.
    pub fn fourier(&self, k: &FourierVector) -> Complex64 {
        fourier_of_counts(self, k)
    }

    /// Rows `x_1,...,x_d,direction,count`; `direction` is `all` for `b_n(x)`
    /// and the direction index for `b_n^iota(x)`.
    pub fn to_csv(&self, include_directed: bool) -> String {
        let mut out = String::new();
        for i in 1..=self.dim {
            let _ = write!(out, "x{i},");
        }
        out.push_str("direction,count\n");
        for (x, c) in &self.counts {
            for xi in x {
                let _ = write!(out, "{xi},");
            }
            let _ = writeln!(out, "all,{c}");
        }
        if include_directed {
            for (x, v) in &self.directed {
                for (dir, c) in v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for xi in x {
                        let _ = write!(out, "{xi},");
                    }
                    let _ = writeln!(out, "{dir},{c}");
                }
            }
        }
        out
    }

    pub fn to_json_value(&self, include_directed: bool) -> serde_json::Value {
        let counts: Vec<_> = self
            .counts
            .iter()
            .map(|(x, c)| CountRow {
                x: x.clone(),
                direction: None,
                count: c.to_string(),
            })
            .collect();
        let directed: Vec<_> = if include_directed {
            self.directed
                .iter()
                .flat_map(|(x, v)| {
                    v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(d, c)| CountRow {
                        x: x.clone(),
                        direction: Some(d),
                        count: c.to_string(),
                    })
                })
                .collect()
        } else {
            Vec::new()
        };
        serde_json::json!({
            "n": self.n,
            "dim": self.dim,
            "degree": self.degree,
            "modulus": self.modulus,
            "total": self.total().to_string(),
            "counts": counts,
            "directed": directed,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CountRow {
    x: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<usize>,
    count: String,
}

fn reduce(x: &[i64], modulus: Option<u32>) -> Vec<i64> {
    match modulus {
        None => x.to_vec(),
        Some(r) => x.iter().map(|c| c.rem_euclid(i64::from(r))).collect(),
    }
}

fn add(x: &[i64], y: &[i64], modulus: Option<u32>) -> Vec<i64> {
    let s: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    reduce(&s, modulus)
}

/// Layer-by-layer evaluation of the recursions.
#[derive(Debug, Clone)]
pub struct CountDp {
    step_set: StepSet,
    modulus: Option<u32>,
    current: CountField,
}

impl CountDp {
    /// DP on `Z^d`, or on the torus of width `modulus`.
    pub fn new(step_set: &StepSet, modulus: Option<u32>) -> Self {
        let m = step_set.degree();
        let origin = vec![0; step_set.dim()];
        let mut counts = BTreeMap::new();
        counts.insert(origin.clone(), BigUint::one());
        let mut directed = BTreeMap::new();
        directed.insert(origin, vec![BigUint::one(); m]);
        CountDp {
            step_set: step_set.clone(),
            modulus,
            current: CountField {
                n: 0,
                dim: step_set.dim(),
                degree: m,
                modulus,
                counts,
                directed,
            },
        }
    }

    pub fn current(&self) -> &CountField {
        &self.current
    }

    pub fn into_current(self) -> CountField {
        self.current
    }

    /// Advances from `n` to `n + 1`.
    pub fn step(&mut self) {
        let m = self.step_set.degree();
        let rev = self.step_set.reversal_map();
        // arrivals[x][kappa] = b_{n}^{-kappa}(x - e[kappa])
        let mut arrivals: BTreeMap<Vec<i64>, Vec<BigUint>> = BTreeMap::new();
        for (y, v) in &self.current.directed {
            for kappa in 0..m {
                let c = &v[rev[kappa]];
                if c.is_zero() {
                    continue;
                }
                let x = add(y, &self.step_set.points()[kappa], self.modulus);
                arrivals.entry(x).or_insert_with(|| vec![BigUint::zero(); m])[kappa] += c;
            }
        }
        let mut counts = BTreeMap::new();
        let mut directed = BTreeMap::new();
        for (x, arr) in arrivals {
            let total: BigUint = arr.iter().sum();
            // sum over kappa != iota
            let dir: Vec<BigUint> = arr.iter().map(|a| &total - a).collect();
            if !total.is_zero() {
                counts.insert(x.clone(), total);
            }
            directed.insert(x, dir);
        }
        self.current = CountField {
            n: self.current.n + 1,
            dim: self.current.dim,
            degree: m,
            modulus: self.modulus,
            counts,
            directed,
        };
    }
}

/// Number of DP states `m * |box|` needed for `n` steps.
pub fn dp_state_estimate(step_set: &StepSet, n: u64, modulus: Option<u32>) -> f64 {
    let side = match modulus {
        Some(r) => f64::from(r),
        None => 2.0 * n as f64 * step_set.max_abs_coordinate() as f64 + 1.0,
    };
    step_set.degree() as f64 * side.powi(step_set.dim() as i32)
}

/// Exact counts after `n` steps, with the default state cap.
pub fn count_walks(step_set: &StepSet, n: u64) -> Result<CountField> {
    count_walks_capped(step_set, n, None, DEFAULT_STATE_CAP)
}

pub fn count_walks_capped(
    step_set: &StepSet,
    n: u64,
    modulus: Option<u32>,
    cap: f64,
) -> Result<CountField> {
    Ok(count_layers(step_set, n, modulus, cap)?.pop().expect("at least one layer"))
}

/// Layers `0..=n`.
pub fn count_layers(
    step_set: &StepSet,
    n: u64,
    modulus: Option<u32>,
    cap: f64,
) -> Result<Vec<CountField>> {
    let states = dp_state_estimate(step_set, n, modulus);
    if states > cap {
        return Err(Error::CapExceeded {
            what: "count DP states",
            requested: states,
            cap,
        });
    }
    let mut dp = CountDp::new(step_set, modulus);
    let mut layers = vec![dp.current().clone()];
    for _ in 0..n {
        dp.step();
        layers.push(dp.current().clone());
    }
    Ok(layers)
}

/// Checks the three recursions between consecutive layers, exactly.
pub fn check_identities(step_set: &StepSet, prev: &CountField, cur: &CountField) -> Result<()> {
    if cur.n != prev.n + 1 {
        return Err(Error::Precondition("layers are not consecutive".into()));
    }
    let m = step_set.degree();
    let rev = step_set.reversal_map();
    let pts = step_set.points();
    let mut xs: Vec<Vec<i64>> = cur.directed.keys().cloned().collect();
    xs.extend(cur.counts.keys().cloned());
    for y in prev.directed.keys() {
        for p in pts {
            xs.push(add(y, p, cur.modulus));
        }
    }
    xs.sort();
    xs.dedup();
    let neg = |p: &[i64]| -> Vec<i64> { p.iter().map(|c| -c).collect() };
    for x in &xs {
        let bn = cur.count(x);
        let back = |iota: usize| prev.directed_count(&add(x, &neg(&pts[iota]), cur.modulus), rev[iota]);
        let scheme1: BigUint = (0..m).map(back).sum();
        if scheme1 != bn {
            return Err(Error::Numerical(format!("first recursion fails at {x:?}")));
        }
        for iota in 0..m {
            let directed = cur.directed_count(x, iota);
            if &directed + back(iota) != bn {
                return Err(Error::Numerical(format!(
                    "second recursion fails at {x:?}, direction {iota}"
                )));
            }
            let scheme3: BigUint = (0..m).filter(|&k| k != iota).map(back).sum();
            if scheme3 != directed {
                return Err(Error::Numerical(format!(
                    "third recursion fails at {x:?}, direction {iota}"
                )));
            }
        }
    }
    Ok(())
}

/// `m (m-1)^{n-1}` for `n >= 1`, `1` for `n = 0`.
pub fn total_walks(m: usize, n: u64) -> BigUint {
    if n == 0 {
        BigUint::one()
    } else {
        BigUint::from(m) * num_traits::pow(BigUint::from(m - 1), (n - 1) as usize)
    }
}

/// An enumerated walk: its direction indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub steps: Vec<usize>,
}

impl Walk {
    /// Positions `omega_0 = 0, ..., omega_n` on `Z^d`.
    pub fn positions(&self, step_set: &StepSet) -> Vec<Vec<i64>> {
        let mut pos = vec![0i64; step_set.dim()];
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(pos.clone());
        for &s in &self.steps {
            for (p, c) in pos.iter_mut().zip(&step_set.points()[s]) {
                *p += c;
            }
            out.push(pos.clone());
        }
        out
    }

    pub fn endpoint(&self, step_set: &StepSet) -> Vec<i64> {
        let mut pos = vec![0i64; step_set.dim()];
        for &s in &self.steps {
            for (p, c) in pos.iter_mut().zip(&step_set.points()[s]) {
                *p += c;
            }
        }
        pos
    }
}

/// Lexicographic stream of all `n`-step walks.
#[derive(Debug, Clone)]
pub struct WalkIter {
    m: usize,
    rev: Vec<usize>,
    /// choice[0] in 0..m, choice[i>0] in 0..m-1
    choices: Vec<usize>,
    done: bool,
}

impl WalkIter {
    fn steps(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.choices.len());
        for (i, &c) in self.choices.iter().enumerate() {
            if i == 0 {
                out.push(c);
            } else {
                let forbidden = self.rev[out[i - 1]];
                out.push(if c >= forbidden { c + 1 } else { c });
            }
        }
        out
    }
}

impl Iterator for WalkIter {
    type Item = Walk;

    fn next(&mut self) -> Option<Walk> {
        if self.done {
            return None;
        }
        let walk = Walk { steps: self.steps() };
        // odometer, last position fastest
        let mut i = self.choices.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            let limit = if i == 0 { self.m } else { self.m - 1 };
            self.choices[i] += 1;
            if self.choices[i] < limit {
                break;
            }
            self.choices[i] = 0;
        }
        Some(walk)
    }
}

/// Every `n`-step walk exactly once; refuses more than `cap` paths.
pub fn enumerate_walks(step_set: &StepSet, n: usize, cap: f64) -> Result<WalkIter> {
    let m = step_set.degree();
    let count = if n == 0 {
        1.0
    } else {
        m as f64 * ((m - 1) as f64).powi(n as i32 - 1)
    };
    if count > cap {
        return Err(Error::CapExceeded {
            what: "enumerated paths",
            requested: count,
            cap,
        });
    }
    Ok(WalkIter {
        m,
        rev: step_set.reversal_map().to_vec(),
        choices: vec![0; n],
        done: false,
    })
}

/// Endpoint histogram of the enumerated walks.
pub fn enumerate_endpoints(step_set: &StepSet, n: usize, cap: f64) -> Result<BTreeMap<Vec<i64>, u64>> {
    let mut hist = BTreeMap::new();
    for w in enumerate_walks(step_set, n, cap)? {
        *hist.entry(w.endpoint(step_set)).or_insert(0) += 1;
    }
    Ok(hist)
}

/// `sum_x b_n(x) e^{i k.x}`.
pub fn fourier_of_counts(field: &CountField, k: &FourierVector) -> Complex64 {
    field
        .counts
        .iter()
        .map(|(x, c)| Complex64::from_polar(c.to_f64().unwrap_or(f64::INFINITY), k.dot(x)))
        .sum()
}

/// `sum_x b_n^iota(x) e^{i k.x}` for each direction.
pub fn fourier_of_directed_counts(field: &CountField, k: &FourierVector) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); field.degree];
    for (x, v) in &field.directed {
        let phase = Complex64::from_polar(1.0, k.dot(x));
        for (o, c) in out.iter_mut().zip(v) {
            *o += phase * c.to_f64().unwrap_or(f64::INFINITY);
        }
    }
    out
}

fn norm2(x: &[i64]) -> BigInt {
    BigInt::from(x.iter().map(|c| c * c).sum::<i64>())
}

/// `E ||omega_n||^2` from a lattice count field.
pub fn second_moment_of_field(field: &CountField) -> BigRational {
    let num: BigInt = field
        .counts
        .iter()
        .map(|(x, c)| BigInt::from(c.clone()) * norm2(x))
        .sum();
    let den = BigInt::from(field.total());
    BigRational::new(num, den)
}

/// `E ||omega_n||^2` for the uniform `n`-step walk on `Z^d`, exactly.
pub fn second_moment(step_set: &StepSet, n: u64) -> Result<BigRational> {
    if step_set.modulus().is_some() {
        return Err(Error::Precondition("second moments are defined on Z^d only".into()));
    }
    Ok(second_moment_of_field(&count_walks(step_set, n)?))
}

/// `tr(H) (n + 2 sum_{j=1}^{n-1} (n - j) q^j)` with `q = 1/(m-1)`: successive
/// steps satisfy `E[X_{i+1} | X_i] = q X_i`.
pub fn second_moment_closed(step_set: &StepSet, n: u64) -> BigRational {
    let m = step_set.degree() as i64;
    let tr: i64 = step_set.points().iter().map(|p| p.iter().map(|c| c * c).sum::<i64>()).sum();
    let tr_h = BigRational::new(BigInt::from(tr), BigInt::from(m));
    let q = BigRational::new(BigInt::one(), BigInt::from(m - 1));
    let mut s = BigRational::from_integer(BigInt::from(n));
    let mut qj = BigRational::one();
    for j in 1..n {
        qj = &qj * &q;
        s += BigRational::from_integer(BigInt::from(2 * (n - j))) * &qj;
    }
    tr_h * s
}

/// The nearest-neighbour formula as printed:
/// `d n/(d-1) + (4d-1)/(2(d-1)^2) + d/(2(d-1)^2 (2d-1)^{n-2})`.
pub fn second_moment_printed(dim: usize, n: u64) -> f64 {
    let d = dim as f64;
    d / (d - 1.0) * n as f64
        + (4.0 * d - 1.0) / (2.0 * (d - 1.0).powi(2))
        + d / (2.0 * (d - 1.0).powi(2) * (2.0 * d - 1.0).powf(n as f64 - 2.0))
}

/// Largest observed `E[||D1||^2 ||D2||^2] / ((i2 - i1)(i3 - i2))` over all
/// index triples `0 <= i1 < i2 < i3 <= n`, where `D1 = omega_{i2} - omega_{i1}`
/// and `D2 = omega_{i3} - omega_{i2}`. With `t_j = i_j / n` this is the
/// constant `K` in `E[...] <= K (t2 - t1)(t3 - t2) n^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub constant: f64,
    pub n: usize,
    pub indices: (usize, usize, usize),
}

pub fn tightness_constant(step_set: &StepSet, n_max: usize, cap: f64) -> Result<TightnessReport> {
    let mut best = TightnessReport {
        constant: 0.0,
        n: 0,
        indices: (0, 0, 0),
    };
    for n in 2..=n_max {
        let walks: Vec<Vec<Vec<i64>>> = enumerate_walks(step_set, n, cap)?
            .map(|w| w.positions(step_set))
            .collect();
        let count = walks.len() as f64;
        for i1 in 0..n {
            for i2 in i1 + 1..n {
                for i3 in i2 + 1..=n {
                    let sum: i128 = walks
                        .iter()
                        .map(|p| {
                            let a: i64 = p[i2].iter().zip(&p[i1]).map(|(x, y)| (x - y).pow(2)).sum();
                            let b: i64 = p[i3].iter().zip(&p[i2]).map(|(x, y)| (x - y).pow(2)).sum();
                            i128::from(a) * i128::from(b)
                        })
                        .sum();
                    let k = sum as f64 / count / ((i2 - i1) * (i3 - i2)) as f64;
                    if k > best.constant {
                        best = TightnessReport {
                            constant: k,
                            n,
                            indices: (i1, i2, i3),
                        };
                    }
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{bn_hat, bn_vec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn nn(d: usize) -> StepSet {
        StepSet::nearest_neighbor(d).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn two_step_table() {
        let f = count_walks(&nn(2), 2).unwrap();
        for x in [[2, 0], [0, 2], [-2, 0], [0, -2]] {
            assert_eq!(f.count(&x), big(1));
        }
        for x in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            assert_eq!(f.count(&x), big(2));
        }
        assert_eq!(f.count(&[0, 0]), big(0));
        assert_eq!(f.total(), big(12));
        assert_eq!(f.support_size(), 8);
    }

    #[test]
    fn trivial_layers() {
        let f = count_walks(&nn(2), 0).unwrap();
        assert_eq!(f.count(&[0, 0]), big(1));
        assert_eq!(f.total(), big(1));
        let f = count_walks(&nn(3), 1).unwrap();
        for p in nn(3).points() {
            assert_eq!(f.count(p), big(1));
        }
        assert_eq!(f.total(), big(6));
    }

    #[test]
    fn identities_hold_exactly() {
        for (s, n) in [(nn(2), 8), (nn(3), 5), (StepSet::hamming(2, 4).unwrap(), 4)] {
            let modulus = s.modulus();
            let layers = count_layers(&s, n, modulus, DEFAULT_STATE_CAP).unwrap();
            for w in layers.windows(2) {
                check_identities(&s, &w[0], &w[1]).unwrap();
            }
            for l in &layers {
                assert_eq!(l.total(), total_walks(s.degree(), l.n));
            }
        }
    }

    #[test]
    fn parity_and_support() {
        let s = nn(2);
        for f in count_layers(&s, 7, None, DEFAULT_STATE_CAP).unwrap() {
            for (x, _) in f.counts() {
                let l1: i64 = x.iter().map(|c| c.abs()).sum();
                assert!(l1 <= f.n as i64);
                assert_eq!((l1 - f.n as i64).rem_euclid(2), 0);
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_walks(&nn(2), 3, DEFAULT_PATH_CAP).unwrap().count(), 36);
        assert_eq!(
            enumerate_walks(&StepSet::hypercube(3).unwrap(), 2, DEFAULT_PATH_CAP).unwrap().count(),
            6
        );
        assert_eq!(enumerate_walks(&nn(2), 0, DEFAULT_PATH_CAP).unwrap().count(), 1);
        assert!(enumerate_walks(&nn(3), 20, DEFAULT_PATH_CAP).is_err());
        let s = nn(2);
        for w in enumerate_walks(&s, 5, DEFAULT_PATH_CAP).unwrap() {
            for pair in w.steps.windows(2) {
                assert_ne!(pair[1], s.reverse(crate::Direction(pair[0])).0);
            }
        }
    }

    #[test]
    fn enumeration_matches_dp() {
        for (s, n_max) in [(nn(2), 8), (nn(3), 5)] {
            for n in 0..=n_max {
                let hist = enumerate_endpoints(&s, n, DEFAULT_PATH_CAP).unwrap();
                let f = count_walks(&s, n as u64).unwrap();
                assert_eq!(hist.len(), f.support_size());
                for (x, c) in hist {
                    assert_eq!(f.count(&x), big(c));
                }
            }
        }
    }

    #[test]
    fn fourier_examples() {
        let s = nn(2);
        let f = count_walks(&s, 2).unwrap();
        let z = FourierVector::zeros(2);
        assert!((fourier_of_counts(&f, &z) - Complex64::from(12.0)).norm() < 1e-12);
        let pp = FourierVector::new(vec![PI, PI]).unwrap();
        assert!((fourier_of_counts(&f, &pp) - Complex64::from(12.0)).norm() < 1e-12);
        let f3 = count_walks(&s, 3).unwrap();
        let k = FourierVector::new(vec![PI / 2.0, 0.0]).unwrap();
        let spectral = bn_hat(&s, &k, 3);
        assert!((fourier_of_counts(&f3, &k) - spectral).norm() < 1e-9 * spectral.norm().max(1.0));
    }

    #[test]
    fn directed_fourier_is_bn_vec() {
        let s = nn(2);
        let k = FourierVector::new(vec![0.7, -1.3]).unwrap();
        for n in 0..7 {
            let f = count_walks(&s, n).unwrap();
            let v = bn_vec(&s, &k, n);
            for (a, b) in fourier_of_directed_counts(&f, &k).iter().zip(v.iter()) {
                assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()));
            }
        }
    }

    #[test]
    fn second_moment_values() {
        let s = nn(2);
        let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(second_moment(&s, 1).unwrap(), r(1, 1));
        assert_eq!(second_moment(&s, 2).unwrap(), r(8, 3));
        assert_eq!(second_moment(&s, 3).unwrap(), r(41, 9));
        for n in 1..12 {
            assert_eq!(second_moment(&s, n).unwrap(), second_moment_closed(&s, n));
        }
        let s3 = nn(3);
        for n in 1..6 {
            assert_eq!(second_moment(&s3, n).unwrap(), second_moment_closed(&s3, n));
        }
        assert!((second_moment_printed(2, 2) - 8.5).abs() < 1e-12);
    }

    #[test]
    fn general_step_set_second_moment() {
        let s = StepSet::new(2, vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1], vec![1, 1], vec![-1, -1], vec![1, -1], vec![-1, 1]])
            .unwrap();
        for n in 1..5 {
            assert_eq!(second_moment(&s, n).unwrap(), second_moment_closed(&s, n));
        }
    }

    #[test]
    fn csv_and_json_export() {
        let f = count_walks(&nn(2), 1).unwrap();
        let csv = f.to_csv(false);
        assert!(csv.starts_with("x1,x2,direction,count\n"));
        assert_eq!(csv.lines().count(), 5);
        let json = f.to_json_value(true);
        assert_eq!(json["total"], "4");
        assert_eq!(json["counts"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            count_walks_capped(&nn(3), 100, None, 1e5),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn tightness_small() {
        let t = tightness_constant(&nn(2), 5, DEFAULT_PATH_CAP).unwrap();
        assert!(t.constant.is_finite() && t.constant > 0.0);
    }

    proptest! {
        #[test]
        fn torus_counts_fold_lattice_counts(r in 3u32..6, n in 0u64..6) {
            let s = nn(2);
            let lattice = count_walks(&s, n).unwrap();
            let torus = count_walks_capped(&s, n, Some(r), DEFAULT_STATE_CAP).unwrap();
            let mut folded: BTreeMap<Vec<i64>, BigUint> = BTreeMap::new();
            for (x, c) in lattice.counts() {
                *folded.entry(reduce(x, Some(r))).or_default() += c;
            }
            let torus_map: BTreeMap<Vec<i64>, BigUint> =
                torus.counts().map(|(x, c)| (x.clone(), c.clone())).collect();
            prop_assert_eq!(folded, torus_map);
        }
    }
}
