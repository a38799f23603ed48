//! The transition-matrix algebra of the walk in Fourier space.
//!
//! For a step set with degree `m` the directed Fourier counts evolve under
//! `A[k] = (C - J) D[-k]`, where `C` is the all-ones matrix, `J` the reversal
//! permutation and `D[k] = diag(e^{i k.x})`. Written out,
//! `A[k]_{iota,kappa} = e^{-i k.x_kappa} (1 - delta_{iota, rev kappa})`: the
//! phase belongs to the step being taken next (the column), each row has
//! `m - 1` non-zero entries.
//!
//! Everything of interest lives on the invariant plane spanned by `1` and
//! `w = D[k] 1`: `A 1 = m D^ 1 - w` and `A w = (m - 1) 1`. Hence
//! `A^n 1 = U_{n+1} 1 - U_n w` with `U_n = (l+^n - l-^n)/(l+ - l-)`, and
//! `b^_n(k) = 1^T D[-k] A^{n-1} 1 = m (D^ U_n - U_{n-1})`.
//!
//! Large-`n` quantities are returned relative to `(m - 1)^n` so they stay
//! `O(1)`; see [`Scaled`] and [`ScaledVector`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{step_transform, FourierVector, StepSet};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalue gaps at or below `DEGENERATE_TOL * (m - 1)` use the
/// degenerate formula. The gap is a square root of the discriminant, so
/// rounding in `D^(k)` shows up in it at the `1e-8` level.
pub const DEGENERATE_TOL: f64 = 1e-7;

/// Relative gaps below this are summed term by term instead of divided.
const NEAR_DEGENERATE_REL: f64 = 1e-3;
const MAX_SUMMATION_TERMS: u64 = 1 << 22;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `A[k]` for a fixed step set and wave vector.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    wave: FourierVector,
    /// `e^{-i k.x_kappa}`, the diagonal of `D[-k]`.
    phases: Vec<Complex64>,
    reversal: Vec<usize>,
    entries: CMatrix,
}

impl TransitionMatrix {
    pub fn order(&self) -> usize {
        self.phases.len()
    }

    pub fn wave(&self) -> &FourierVector {
        &self.wave
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Diagonal of `D[-k]`.
    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    /// `A v` in `O(m)`: `(1^T D[-k] v) 1 - J D[-k] v`.
    pub fn apply(&self, v: &CVector) -> CVector {
        let total: Complex64 = self.phases.iter().zip(v.iter()).map(|(p, x)| p * x).sum();
        CVector::from_iterator(
            v.len(),
            (0..v.len()).map(|i| {
                let j = self.reversal[i];
                total - self.phases[j] * v[j]
            }),
        )
    }

    /// `1^T D[-k] v`.
    pub fn weighted_sum(&self, v: &CVector) -> Complex64 {
        self.phases.iter().zip(v.iter()).map(|(p, x)| p * x).sum()
    }
}

pub fn build_matrix(step_set: &StepSet, k: &FourierVector) -> TransitionMatrix {
    let m = step_set.degree();
    let phases: Vec<Complex64> = step_set
        .points()
        .iter()
        .map(|x| Complex64::from_polar(1.0, -k.dot(x)))
        .collect();
    let reversal = step_set.reversal_map().to_vec();
    let entries = CMatrix::from_fn(m, m, |i, j| {
        if reversal[j] == i {
            ZERO
        } else {
            phases[j]
        }
    });
    TransitionMatrix {
        wave: k.clone(),
        phases,
        reversal,
        entries,
    }
}

/// The two `k`-dependent eigenvalues `F+-(D^(k); m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub degenerate: bool,
    /// `(m D^)^2 / 4 - (m - 1)`.
    pub discriminant: f64,
    pub d_hat: f64,
    pub degree: usize,
}

impl SpectralPair {
    pub fn gap(&self) -> f64 {
        (self.lambda_plus - self.lambda_minus).norm()
    }

    /// `alpha(k) = 1/(l+ - l-)`; `None` at degeneracy.
    pub fn alpha(&self) -> Option<Complex64> {
        (!self.degenerate).then(|| ONE / (self.lambda_plus - self.lambda_minus))
    }

    pub fn is_complex(&self) -> bool {
        self.discriminant < 0.0
    }
}

/// Roots of `l^2 - m x l + (m - 1) = 0` at `x = d_hat`.
pub fn pair_from_d_hat(d_hat: f64, m: usize) -> SpectralPair {
    assert!(m >= 2, "degree must be at least 2");
    let c = (m - 1) as f64;
    let b = m as f64 * d_hat;
    let disc = b * b - 4.0 * c;
    let (lp, lm) = if disc >= 0.0 {
        let s = disc.sqrt();
        if b >= 0.0 {
            let big = (b + s) / 2.0;
            (Complex64::from(big), Complex64::from(c / big))
        } else {
            let big = (b - s) / 2.0;
            (Complex64::from(c / big), Complex64::from(big))
        }
    } else {
        let s = (-disc).sqrt() / 2.0;
        (Complex64::new(b / 2.0, s), Complex64::new(b / 2.0, -s))
    };
    let degenerate = (lp - lm).norm() <= DEGENERATE_TOL * c;
    let (lp, lm) = if degenerate {
        let l = Complex64::from(b / 2.0);
        (l, l)
    } else {
        (lp, lm)
    };
    SpectralPair {
        lambda_plus: lp,
        lambda_minus: lm,
        degenerate,
        discriminant: disc / 4.0,
        d_hat,
        degree: m,
    }
}

pub fn dominant_eigenvalues(step_set: &StepSet, k: &FourierVector) -> SpectralPair {
    pair_from_d_hat(step_transform(step_set, k), step_set.degree())
}

/// `U_j / (m-1)^{j-1}` for `j >= 1`, and `0` for `j = 0`.
fn scaled_u(pair: &SpectralPair, j: u64) -> Complex64 {
    if j == 0 {
        return ZERO;
    }
    let c = (pair.degree - 1) as f64;
    let mp = pair.lambda_plus / c;
    let mm = pair.lambda_minus / c;
    if pair.degenerate {
        return powc(mp, j - 1) * j as f64;
    }
    let scale = pair.lambda_plus.norm().max(pair.lambda_minus.norm());
    let gap = pair.lambda_plus - pair.lambda_minus;
    if gap.norm() < NEAR_DEGENERATE_REL * scale && j <= MAX_SUMMATION_TERMS {
        // sum_{i<j} mp^i mm^{j-1-i}
        let ratio = mp / mm;
        let mut term = powc(mm, j - 1);
        let mut acc = ZERO;
        for _ in 0..j {
            acc += term;
            term *= ratio;
        }
        acc
    } else {
        (powc(mp, j) - powc(mm, j)) * c / gap
    }
}

fn powc(z: Complex64, n: u64) -> Complex64 {
    match u32::try_from(n) {
        Ok(n) => z.powu(n),
        Err(_) => z.powf(n as f64),
    }
}

/// A number stored as `mantissa * base^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub base: f64,
    pub exponent: u64,
}

impl Scaled {
    /// Plain value; overflows to infinity for large exponents.
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.base.powf(self.exponent as f64)
    }
}

/// `m (m-1)^{n-1}` for `n >= 1`, `1` for `n = 0`.
pub fn total_count(m: usize, n: u64) -> Scaled {
    let base = (m - 1) as f64;
    if n == 0 {
        Scaled {
            mantissa: ONE,
            base,
            exponent: 0,
        }
    } else {
        Scaled {
            mantissa: Complex64::from(m as f64),
            base,
            exponent: n - 1,
        }
    }
}

/// `b^_n(k) / b^_n(0)` computed from a spectral pair.
pub fn bn_ratio_from_pair(pair: &SpectralPair, n: u64) -> Complex64 {
    if n == 0 {
        return ONE;
    }
    let c = (pair.degree - 1) as f64;
    scaled_u(pair, n) * pair.d_hat - scaled_u(pair, n - 1) / c
}

/// `b^_n(k) / b^_n(0)`, the characteristic function of the endpoint.
pub fn bn_ratio(step_set: &StepSet, k: &FourierVector, n: u64) -> Complex64 {
    bn_ratio_from_pair(&dominant_eigenvalues(step_set, k), n)
}

pub fn bn_hat_scaled(step_set: &StepSet, k: &FourierVector, n: u64) -> Scaled {
    let mut s = total_count(step_set.degree(), n);
    s.mantissa *= bn_ratio(step_set, k, n);
    s
}

/// `b^_n(k) = sum_x b_n(x) e^{i k.x}`.
pub fn bn_hat(step_set: &StepSet, k: &FourierVector, n: u64) -> Complex64 {
    bn_hat_scaled(step_set, k, n).value()
}

/// A vector stored as `mantissa * base^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledVector {
    pub mantissa: CVector,
    pub base: f64,
    pub exponent: u64,
}

impl ScaledVector {
    pub fn to_vector(&self) -> CVector {
        &self.mantissa * Complex64::from(self.base.powf(self.exponent as f64))
    }
}

/// The per-direction vector `A[k]^n 1`, scaled by `(m-1)^{-n}`.
pub fn bn_vec_scaled(step_set: &StepSet, k: &FourierVector, n: u64) -> ScaledVector {
    let pair = dominant_eigenvalues(step_set, k);
    let c = (step_set.degree() - 1) as f64;
    let a = scaled_u(&pair, n + 1);
    let b = scaled_u(&pair, n) / c;
    let mantissa = CVector::from_iterator(
        step_set.degree(),
        step_set
            .points()
            .iter()
            .map(|x| a - b * Complex64::from_polar(1.0, k.dot(x))),
    );
    ScaledVector {
        mantissa,
        base: c,
        exponent: n,
    }
}

/// `A[k]^n 1`, with `b_0 = 1`.
pub fn bn_vec(step_set: &StepSet, k: &FourierVector, n: u64) -> CVector {
    bn_vec_scaled(step_set, k, n).to_vector()
}

/// `A[k]^n v` by repeated squaring of `A[k]/(m-1)`.
pub fn matrix_power_apply(
    step_set: &StepSet,
    k: &FourierVector,
    n: u64,
    vector: &CVector,
) -> ScaledVector {
    let a = build_matrix(step_set, k);
    scaled_power_apply(&a, n, vector.clone())
}

fn scaled_power_apply(a: &TransitionMatrix, n: u64, vector: CVector) -> ScaledVector {
    let c = (a.order() - 1) as f64;
    let mut p = a.entries() / Complex64::from(c);
    let mut out = vector;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            out = &p * out;
        }
        e >>= 1;
        if e > 0 {
            p = &p * &p;
        }
    }
    ScaledVector {
        mantissa: out,
        base: c,
        exponent: n,
    }
}

/// Joint characteristic function of the increments of the walk over the
/// segments `(floor(t_{r-1} n), floor(t_r n)]`, with `waves[r]` paired with
/// segment `r`. Waves are used as given.
pub fn fdd_char_function(
    step_set: &StepSet,
    n: u64,
    breakpoints: &[f64],
    waves: &[FourierVector],
) -> Result<Complex64> {
    if breakpoints.is_empty() || breakpoints.len() != waves.len() {
        return Err(Error::Precondition(format!(
            "need as many waves as breakpoints (got {} and {})",
            waves.len(),
            breakpoints.len()
        )));
    }
    let mut prev_t = 0.0;
    let mut prev_idx = 0u64;
    let mut lengths = Vec::with_capacity(breakpoints.len());
    for &t in breakpoints {
        if !(t > prev_t && t <= 1.0) {
            return Err(Error::Precondition(format!(
                "breakpoints must satisfy 0 < t_1 < ... < t_N <= 1 (got {breakpoints:?})"
            )));
        }
        let idx = (t * n as f64).floor() as u64;
        if idx <= prev_idx {
            return Err(Error::Precondition(format!(
                "segment ending at t = {t} has no steps for n = {n}"
            )));
        }
        lengths.push(idx - prev_idx);
        prev_t = t;
        prev_idx = idx;
    }
    let m = step_set.degree();
    let mut v = CVector::from_element(m, ONE);
    for r in (1..waves.len()).rev() {
        let a = build_matrix(step_set, &waves[r]);
        v = scaled_power_apply(&a, lengths[r], v).mantissa;
    }
    let a1 = build_matrix(step_set, &waves[0]);
    v = scaled_power_apply(&a1, lengths[0] - 1, v).mantissa;
    Ok(a1.weighted_sum(&v) / m as f64)
}

/// `rho(k) = max(1/sqrt(m-1), |D^(k)|)`; `|b^_n(k)|/b^_n(0) <= rho^{n-1}`.
pub fn eigenvalue_bound(step_set: &StepSet, k: &FourierVector) -> f64 {
    eigenvalue_bound_from_d_hat(step_transform(step_set, k), step_set.degree())
}

pub fn eigenvalue_bound_from_d_hat(d_hat: f64, m: usize) -> f64 {
    (1.0 / ((m - 1) as f64).sqrt()).max(d_hat.abs())
}

/// First `s > 0` along `s * direction` (within `[-pi, pi]^d`) where the two
/// dominant eigenvalues collide, if any.
pub fn degenerate_point_on_ray(step_set: &StepSet, direction: &[f64]) -> Option<FourierVector> {
    let max_comp = direction.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    if max_comp == 0.0 || direction.len() != step_set.dim() {
        return None;
    }
    let s_max = std::f64::consts::PI / max_comp;
    let m = step_set.degree() as f64;
    let at = |s: f64| FourierVector::new(direction.iter().map(|c| c * s).collect()).ok();
    let f = |s: f64| {
        let d = step_transform(step_set, &at(s).expect("within range"));
        (m * d) * (m * d) - 4.0 * (m - 1.0)
    };
    const SAMPLES: usize = 4096;
    let mut lo = 0.0;
    let mut f_lo = f(lo);
    for i in 1..=SAMPLES {
        let hi = s_max * i as f64 / SAMPLES as f64;
        let f_hi = f(hi);
        if f_lo == 0.0 {
            return at(lo);
        }
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if f(mid).signum() == f_lo.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let s = if f(a).abs() <= f(b).abs() { a } else { b };
            return at(s);
        }
        lo = hi;
        f_lo = f_hi;
    }
    None
}

/// A full set of (generalised) eigenvectors of `A[k]`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub vectors: Vec<CVector>,
    pub values: Vec<Complex64>,
    /// Index of the generalised vector `1` at degeneracy, which satisfies
    /// `A 1 = vectors[0] + lambda 1`.
    pub generalized: Option<usize>,
    pub pair: SpectralPair,
}

impl EigenBasis {
    /// `||A v - lambda v|| / ||v||` for each vector (generalised relation
    /// for the generalised vector).
    pub fn relative_residuals(&self, a: &TransitionMatrix) -> Vec<f64> {
        self.vectors
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (v, &l))| {
                let mut r = a.apply(v) - v * l;
                if self.generalized == Some(i) {
                    r -= &self.vectors[0];
                }
                r.norm() / v.norm()
            })
            .collect()
    }

    /// Smallest singular value of the matrix of unit-normalised vectors.
    pub fn min_singular_value(&self) -> f64 {
        let m = self.vectors.len();
        if m == 0 {
            return 0.0;
        }
        let cols: Vec<CVector> = self.vectors.iter().map(|v| v / Complex64::from(v.norm())).collect();
        let mat = CMatrix::from_columns(&cols);
        mat.singular_values().iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

const CLASS_TOL: f64 = 1e-12;

/// Eigenvectors of `A[k]`. Nearest-neighbour step sets with `d >= 2` use the
/// explicit constructions; everything else combines `v(+-)` with null spaces
/// of `A -+ I` from a dense SVD.
pub fn eigenbasis(step_set: &StepSet, k: &FourierVector) -> Result<EigenBasis> {
    let a = build_matrix(step_set, k);
    let pair = dominant_eigenvalues(step_set, k);
    if step_set.is_nearest_neighbor() && step_set.dim() >= 2 {
        Ok(nn_basis(step_set, k, pair))
    } else {
        dense_basis(&a, step_set, k, pair)
    }
}

fn dominant_vectors(step_set: &StepSet, k: &FourierVector, pair: &SpectralPair) -> (CVector, CVector) {
    let w = CVector::from_iterator(
        step_set.degree(),
        step_set.points().iter().map(|x| Complex64::from_polar(1.0, k.dot(x))),
    );
    let ones = CVector::from_element(step_set.degree(), ONE);
    (
        &ones * pair.lambda_plus - &w,
        &ones * pair.lambda_minus - &w,
    )
}

fn zero_tol(m: usize) -> f64 {
    1e-9 * (m as f64).sqrt()
}

fn nn_basis(step_set: &StepSet, k: &FourierVector, pair: SpectralPair) -> EigenBasis {
    let d = step_set.dim();
    let m = 2 * d;
    let e: Vec<Complex64> = k.as_slice().iter().map(|&c| Complex64::from_polar(1.0, c)).collect();
    // u(+i) has eigenvalue +1 under J D[-k], u(-i) has -1.
    let u = |i: usize, sign: f64| {
        let mut v = CVector::from_element(m, ZERO);
        v[2 * i] = e[i];
        v[2 * i + 1] = Complex64::from(sign);
        v
    };
    // 1^T D[-k] u(+-i) = 1 +- e^{i k_i}
    let sigma = |i: usize, sign: f64| ONE + e[i] * sign;

    let mut vectors = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    let mut generalized = None;

    let (vp, vm) = dominant_vectors(step_set, k, &pair);
    if pair.degenerate {
        vectors.push(vp);
        values.push(pair.lambda_plus);
        vectors.push(CVector::from_element(m, ONE));
        values.push(pair.lambda_plus);
        generalized = Some(1);
    } else {
        for (v, l) in [(vp, pair.lambda_plus), (vm, pair.lambda_minus)] {
            if v.norm() > zero_tol(m) {
                vectors.push(v);
                values.push(l);
            }
        }
    }

    // Eigenvalue -1 of A from u(+i), eigenvalue +1 from u(-i). Indices with
    // vanishing sigma give eigenvectors directly; the rest are combined
    // pairwise against the smallest such index.
    for (sign, value) in [(1.0, -1.0), (-1.0, 1.0)] {
        let (direct, mixed): (Vec<usize>, Vec<usize>) =
            (0..d).partition(|&i| sigma(i, sign).norm() <= CLASS_TOL);
        for &i in &direct {
            vectors.push(u(i, sign));
            values.push(Complex64::from(value));
        }
        if let Some((&rho, rest)) = mixed.split_first() {
            let s_rho = sigma(rho, sign);
            let u_rho = u(rho, sign);
            for &i in rest {
                vectors.push(u(i, sign) * s_rho - &u_rho * sigma(i, sign));
                values.push(Complex64::from(value));
            }
        }
    }
    EigenBasis {
        vectors,
        values,
        generalized,
        pair,
    }
}

fn null_space(mat: &CMatrix, tol: f64) -> Vec<CVector> {
    let n = mat.ncols();
    let svd = mat.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            out.push(CVector::from_iterator(n, v_t.row(i).iter().map(|z| z.conj())));
        }
    }
    out
}

struct Orthonormal(Vec<CVector>);

impl Orthonormal {
    /// Adds `v` if it is independent of what is already held.
    fn try_add(&mut self, v: &CVector) -> bool {
        let norm = v.norm();
        if norm == 0.0 {
            return false;
        }
        let mut r = v / Complex64::from(norm);
        for _ in 0..2 {
            for q in &self.0 {
                let c = q.dotc(&r);
                r -= q * c;
            }
        }
        let rn = r.norm();
        if rn <= 1e-8 {
            return false;
        }
        self.0.push(r / Complex64::from(rn));
        true
    }
}

fn dense_basis(
    a: &TransitionMatrix,
    step_set: &StepSet,
    k: &FourierVector,
    pair: SpectralPair,
) -> Result<EigenBasis> {
    let m = step_set.degree();
    let mut basis = Orthonormal(Vec::with_capacity(m));
    let mut vectors = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    let mut generalized = None;

    let (vp, vm) = dominant_vectors(step_set, k, &pair);
    if pair.degenerate {
        if vp.norm() > zero_tol(m) {
            let ones = CVector::from_element(m, ONE);
            basis.try_add(&vp);
            basis.try_add(&ones);
            vectors.push(vp);
            values.push(pair.lambda_plus);
            vectors.push(ones);
            values.push(pair.lambda_plus);
            generalized = Some(1);
        }
    } else {
        for (v, l) in [(vp, pair.lambda_plus), (vm, pair.lambda_minus)] {
            if v.norm() > zero_tol(m) && basis.try_add(&v) {
                vectors.push(v);
                values.push(l);
            }
        }
    }

    let mut candidates = vec![Complex64::from(-1.0), ONE, pair.lambda_plus, pair.lambda_minus];
    candidates.dedup_by(|x, y| (*x - *y).norm() < 1e-9);
    let tol = 1e-9 * m as f64;
    let mut seen: Vec<Complex64> = Vec::new();
    for mu in candidates {
        if seen.iter().any(|s| (s - mu).norm() < 1e-9) {
            continue;
        }
        seen.push(mu);
        let shifted = a.entries() - CMatrix::identity(m, m) * mu;
        for v in null_space(&shifted, tol) {
            if basis.try_add(&v) {
                vectors.push(v);
                values.push(mu);
            }
        }
    }
    if vectors.len() < m {
        return Err(Error::Numerical(format!(
            "found only {} of {} independent eigenvectors at k = {:?}",
            vectors.len(),
            m,
            k.as_slice()
        )));
    }
    Ok(EigenBasis {
        vectors,
        values,
        generalized,
        pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn k(v: &[f64]) -> FourierVector {
        FourierVector::new(v.to_vec()).unwrap()
    }

    fn nn(d: usize) -> StepSet {
        StepSet::nearest_neighbor(d).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn matrix_entries() {
        let s = nn(2);
        let a = build_matrix(&s, &k(&[0.0, 0.0]));
        for i in 0..4 {
            let row_sum: Complex64 = a.entries().row(i).iter().sum();
            assert_eq!(row_sum, Complex64::from(3.0));
            assert_eq!(a.entries()[(i, s.reversal_map()[i])], ZERO);
        }
        let a = build_matrix(&s, &k(&[PI, 0.0]));
        // the columns of the +-e1 steps pick up e^{-+i pi} = -1
        assert!(close(a.entries()[(2, 0)], Complex64::from(-1.0), 1e-15));
        assert!(close(a.entries()[(2, 1)], Complex64::from(-1.0), 1e-15));
        assert!(close(a.entries()[(0, 2)], ONE, 1e-15));
        let v = CVector::from_vec(vec![ONE, Complex64::new(0.0, 2.0), -ONE, Complex64::from(0.5)]);
        let dense = a.entries() * &v;
        assert!((dense - a.apply(&v)).norm() < 1e-14);
    }

    #[test]
    fn dominant_examples() {
        let p = dominant_eigenvalues(&nn(2), &k(&[0.0, 0.0]));
        assert_eq!(p.lambda_plus, Complex64::from(3.0));
        assert_eq!(p.lambda_minus, Complex64::from(1.0));
        let p = dominant_eigenvalues(&nn(2), &k(&[PI / 2.0, PI / 2.0]));
        assert!(p.is_complex());
        assert!((p.lambda_plus.norm() - 3f64.sqrt()).abs() < 1e-14);
        assert!(close(p.lambda_plus, Complex64::new(0.0, 3f64.sqrt()), 1e-14));
        let p = pair_from_d_hat(3f64.sqrt() / 2.0, 4);
        assert!(p.degenerate);
        assert!(close(p.lambda_plus, Complex64::from(3f64.sqrt()), 1e-12));
    }

    #[test]
    fn degenerate_ray_is_flagged() {
        let s = nn(2);
        let kd = degenerate_point_on_ray(&s, &[1.0, 1.0]).unwrap();
        assert!((step_transform(&s, &kd) - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((kd.as_slice()[0] - PI / 6.0).abs() < 1e-7);
        let b = eigenbasis(&s, &kd).unwrap();
        assert_eq!(b.generalized, Some(1));
        let a = build_matrix(&s, &kd);
        assert!(b.relative_residuals(&a).iter().all(|&r| r < 1e-10));
    }

    #[test]
    fn eigenbasis_examples() {
        let s = nn(2);
        let z = k(&[0.0, 0.0]);
        let b = eigenbasis(&s, &z).unwrap();
        assert_eq!(b.vectors.len(), 4);
        assert!((b.vectors[0].clone() - CVector::from_element(4, Complex64::from(2.0))).norm() < 1e-15);
        let a = build_matrix(&s, &z);
        assert!(b.relative_residuals(&a).iter().all(|&r| r < 1e-12));
        assert!(b.min_singular_value() > 1e-8);
        let e1 = CVector::from_vec(vec![ONE, -ONE, ZERO, ZERO]);
        let found = b
            .vectors
            .iter()
            .zip(&b.values)
            .any(|(v, l)| *l == ONE && (v - &e1).norm() < 1e-15);
        assert!(found, "e[1] - e[-1] should be in the +1 eigenspace at k = 0");
        let e2 = CVector::from_vec(vec![ZERO, ZERO, ONE, -ONE]);
        assert!((a.apply(&e2) - &e2).norm() < 1e-15);

        let s3 = nn(3);
        let kk = k(&[0.3, 0.0, 1.1]);
        let b = eigenbasis(&s3, &kk).unwrap();
        let a = build_matrix(&s3, &kk);
        assert_eq!(b.vectors.len(), 6);
        assert!(b.relative_residuals(&a).iter().all(|&r| r < 1e-10));
        assert!(b.min_singular_value() > 1e-8);
    }

    #[test]
    fn eigenbasis_special_points() {
        for kk in [[PI, PI, PI], [PI, 0.0, 0.4], [PI, PI, 0.0], [0.0, 0.0, 0.0], [0.0, PI, 0.0]] {
            let s = nn(3);
            let kk = k(&kk);
            let b = eigenbasis(&s, &kk).unwrap();
            let a = build_matrix(&s, &kk);
            assert_eq!(b.vectors.len(), 6, "{kk:?}");
            assert!(b.relative_residuals(&a).iter().all(|&r| r < 1e-10), "{kk:?}");
            assert!(b.min_singular_value() > 1e-8, "{kk:?}");
        }
    }

    #[test]
    fn dense_fallback() {
        let cases = [
            (StepSet::nearest_neighbor(1).unwrap(), k(&[0.0])),
            (StepSet::nearest_neighbor(1).unwrap(), k(&[0.7])),
            (StepSet::hypercube(4).unwrap(), k(&[0.0, 0.0, 0.0, 0.0])),
            (StepSet::hypercube(4).unwrap(), k(&[PI, 0.0, PI, 0.0])),
            (
                StepSet::new(2, vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1], vec![1, 1], vec![-1, -1]]).unwrap(),
                k(&[0.4, -1.2]),
            ),
        ];
        for (s, kk) in cases {
            let b = eigenbasis(&s, &kk).unwrap();
            let a = build_matrix(&s, &kk);
            assert_eq!(b.vectors.len(), s.degree());
            assert!(b.relative_residuals(&a).iter().all(|&r| r < 1e-10), "{s} {kk:?}");
        }
        // m = 10, D^ = 0.6 is exactly degenerate
        let s = StepSet::hypercube(10).unwrap();
        let mut kk = vec![0.0; 10];
        kk[0] = PI;
        kk[1] = PI;
        let kk = k(&kk);
        let b = eigenbasis(&s, &kk).unwrap();
        assert!(b.pair.degenerate);
        assert_eq!(b.generalized, Some(1));
        let a = build_matrix(&s, &kk);
        assert!(b.relative_residuals(&a).iter().all(|&r| r < 1e-10));
    }

    #[test]
    fn bn_hat_examples() {
        let s = nn(2);
        assert!(close(bn_hat(&s, &k(&[0.0, 0.0]), 5), Complex64::from(324.0), 1e-14));
        assert!(close(bn_hat(&s, &k(&[PI, PI]), 5), Complex64::from(-324.0), 1e-13));
        assert_eq!(bn_hat(&s, &k(&[0.3, 0.2]), 0), ONE);
        let kk = k(&[0.3, 0.2]);
        let dh = step_transform(&s, &kk);
        assert!(close(bn_hat(&s, &kk, 1), Complex64::from(4.0 * dh), 1e-14));
        assert!(close(bn_hat(&s, &kk, 2), Complex64::from(16.0 * dh * dh - 4.0), 1e-13));
    }

    #[test]
    fn bn_vec_examples() {
        let s = nn(2);
        let z = k(&[0.0, 0.0]);
        let v = bn_vec(&s, &z, 1);
        assert!((v - CVector::from_element(4, Complex64::from(3.0))).norm() < 1e-13);
        let a = build_matrix(&s, &z);
        for n in 0..=20 {
            let lhs = a.weighted_sum(&bn_vec(&s, &z, n));
            assert!(close(lhs, bn_hat(&s, &z, n + 1), 1e-12));
        }
        let kk = k(&[1.0, 0.5]);
        let a = build_matrix(&s, &kk);
        let mut dense = CVector::from_element(4, ONE);
        for _ in 0..4 {
            dense = a.entries() * dense;
        }
        assert!((bn_vec(&s, &kk, 4) - dense).norm() < 1e-10);
    }

    #[test]
    fn matrix_power_examples() {
        let s = nn(2);
        let v = CVector::from_vec(vec![ONE, Complex64::new(0.0, 1.0), ZERO, -ONE]);
        let r = matrix_power_apply(&s, &k(&[0.4, 0.1]), 0, &v);
        assert_eq!(r.mantissa, v);
        let ones = CVector::from_element(4, ONE);
        let r = matrix_power_apply(&s, &k(&[0.0, 0.0]), 3, &ones);
        assert_eq!(r.exponent, 3);
        assert!((&r.mantissa - &ones).norm() < 1e-14);
        assert!((r.to_vector() - ones * Complex64::from(27.0)).norm() < 1e-12);
    }

    #[test]
    fn fdd_reductions() {
        let s = nn(2);
        let kk = k(&[0.9, -0.4]);
        for n in [1u64, 2, 7, 30] {
            let f = fdd_char_function(&s, n, &[1.0], std::slice::from_ref(&kk)).unwrap();
            assert!(close(f, bn_ratio(&s, &kk, n), 1e-12));
        }
        let z = k(&[0.0, 0.0]);
        let f = fdd_char_function(&s, 10, &[0.5, 1.0], &[z.clone(), z]).unwrap();
        assert!(close(f, ONE, 1e-14));
        assert!(fdd_char_function(&s, 3, &[0.1, 1.0], &[kk.clone(), kk.clone()]).is_err());
        assert!(fdd_char_function(&s, 3, &[0.5, 0.4], &[kk.clone(), kk]).is_err());
    }

    #[test]
    fn eigenvalue_bound_examples() {
        assert_eq!(eigenvalue_bound(&nn(2), &k(&[0.0, 0.0])), 1.0);
        assert!((eigenvalue_bound(&nn(2), &k(&[PI / 2.0, PI / 2.0])) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((eigenvalue_bound_from_d_hat(1.0 - 6.0 / 10.0, 10) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn degenerate_branch_is_continuous() {
        let m = 4;
        let d0 = 3f64.sqrt() / 2.0;
        let exact = pair_from_d_hat(d0, m);
        assert!(exact.degenerate);
        for eps in [1e-6, 1e-5, -1e-6, -1e-5] {
            let near = pair_from_d_hat(d0 + eps, m);
            assert!(!near.degenerate);
            for n in [2u64, 5, 20] {
                let a = bn_ratio_from_pair(&exact, n);
                let b = bn_ratio_from_pair(&near, n);
                assert!((a - b).norm() < 50.0 * n as f64 * eps.abs(), "n={n} eps={eps}");
            }
        }
    }

    proptest! {
        #[test]
        fn root_identities(d in 1usize..5, raw in proptest::collection::vec(-PI..PI, 4)) {
            let s = nn(d);
            let kk = k(&raw[..d]);
            let p = dominant_eigenvalues(&s, &kk);
            let m = s.degree() as f64;
            let prod = p.lambda_plus * p.lambda_minus;
            let sum = p.lambda_plus + p.lambda_minus;
            prop_assert!((prod - (m - 1.0)).norm() <= 1e-12 * (m - 1.0));
            prop_assert!((sum - m * p.d_hat).norm() <= 1e-12 * m);
        }

        #[test]
        fn nn_eigen_residuals(d in 2usize..5, raw in proptest::collection::vec(-PI..PI, 4)) {
            let s = nn(d);
            let kk = k(&raw[..d]);
            let b = eigenbasis(&s, &kk).unwrap();
            let a = build_matrix(&s, &kk);
            prop_assert_eq!(b.vectors.len(), 2 * d);
            for r in b.relative_residuals(&a) {
                prop_assert!(r <= 1e-10);
            }
        }

        #[test]
        fn bn_vec_matches_power(d in 1usize..4, n in 0u64..12, raw in proptest::collection::vec(-PI..PI, 3)) {
            let s = nn(d);
            let kk = k(&raw[..d]);
            let direct = bn_vec(&s, &kk, n);
            let ones = CVector::from_element(s.degree(), ONE);
            let power = matrix_power_apply(&s, &kk, n, &ones).to_vector();
            let scale = (s.degree() as f64 - 1.0).powi(n as i32);
            prop_assert!((direct - power).norm() <= 1e-9 * scale);
        }

        #[test]
        fn ratio_symmetric_and_bounded(d in 1usize..4, n in 1u64..60, raw in proptest::collection::vec(-PI..PI, 3)) {
            let s = nn(d);
            let kk = k(&raw[..d]);
            let r = bn_ratio(&s, &kk, n);
            let r_neg = bn_ratio(&s, &kk.negated(), n);
            prop_assert!((r - r_neg).norm() <= 1e-12);
            let rho = eigenvalue_bound(&s, &kk);
            prop_assert!(r.norm() <= rho.powi(n as i32 - 1) + 1e-12);
        }
    }
}
