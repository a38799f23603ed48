//! Generating functions `B^_z(k) = sum_n b^_n(k) z^n` and their directed
//! counterparts, in closed form and as power series.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{step_transform, FourierVector, StepSet};
use crate::spectral::CVector;

/// Denominators at or below this magnitude are treated as poles.
pub const POLE_TOL: f64 = 1e-14;
pub const MAX_SERIES_TERMS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensEvaluation {
    pub z: Complex64,
    pub k: FourierVector,
    pub value: Complex64,
    pub directed_values: Vec<Complex64>,
    /// `|z| (m - 1) >= 1`: outside the disc where the series converges.
    pub analytic_continuation: bool,
}

fn denominator(m: usize, z: Complex64, d_hat: f64) -> Result<Complex64> {
    let mf = m as f64;
    let den = 1.0 + (mf - 1.0) * z * z - mf * z * d_hat;
    if den.norm() <= POLE_TOL {
        return Err(Error::Pole { denominator: den });
    }
    Ok(den)
}

/// `(1 - z^2) / (1 + (m-1) z^2 - m z D^(k))`.
pub fn greens_hat(step_set: &StepSet, z: Complex64, k: &FourierVector) -> Result<Complex64> {
    let den = denominator(step_set.degree(), z, step_transform(step_set, k))?;
    Ok((1.0 - z * z) / den)
}

/// `(1 - z e^{i k.x_iota}) / (1 + (m-1) z^2 - m z D^(k))` per direction.
pub fn greens_directed(step_set: &StepSet, z: Complex64, k: &FourierVector) -> Result<CVector> {
    let den = denominator(step_set.degree(), z, step_transform(step_set, k))?;
    Ok(CVector::from_iterator(
        step_set.degree(),
        step_set
            .points()
            .iter()
            .map(|x| (1.0 - z * Complex64::from_polar(1.0, k.dot(x))) / den),
    ))
}

pub fn evaluate(step_set: &StepSet, z: Complex64, k: &FourierVector) -> Result<GreensEvaluation> {
    let value = greens_hat(step_set, z, k)?;
    let directed = greens_directed(step_set, z, k)?;
    Ok(GreensEvaluation {
        z,
        k: k.clone(),
        value,
        directed_values: directed.iter().copied().collect(),
        analytic_continuation: z.norm() * (step_set.degree() - 1) as f64 >= 1.0,
    })
}

/// The simple random walk Green's function `C^_mu(k) = 1/(1 - mu D^(k))`.
pub fn srw_greens(step_set: &StepSet, mu: Complex64, k: &FourierVector) -> Result<Complex64> {
    let den = 1.0 - mu * step_transform(step_set, k);
    if den.norm() <= POLE_TOL {
        return Err(Error::Pole { denominator: den });
    }
    Ok(1.0 / den)
}

/// `mu_z = m z / (1 + (m-1) z^2)`.
pub fn mu_of_z(m: usize, z: Complex64) -> Complex64 {
    m as f64 * z / (1.0 + (m as f64 - 1.0) * z * z)
}

/// `B^_z(k)` through the simple random walk:
/// `(1 - z^2)/(1 + (m-1) z^2) * C^_{mu_z}(k)`.
pub fn greens_via_srw(step_set: &StepSet, z: Complex64, k: &FourierVector) -> Result<Complex64> {
    let m = step_set.degree();
    let pre_den = 1.0 + (m as f64 - 1.0) * z * z;
    if pre_den.norm() <= POLE_TOL {
        return Err(Error::Pole { denominator: pre_den });
    }
    Ok((1.0 - z * z) / pre_den * srw_greens(step_set, mu_of_z(m, z), k)?)
}

/// `1 + z 1^T D[-k] B_z(k)`, which equals `B^_z(k)`.
pub fn greens_from_directed(step_set: &StepSet, z: Complex64, k: &FourierVector) -> Result<Complex64> {
    let v = greens_directed(step_set, z, k)?;
    let s: Complex64 = step_set
        .points()
        .iter()
        .zip(v.iter())
        .map(|(x, b)| Complex64::from_polar(1.0, -k.dot(x)) * b)
        .sum();
    Ok(1.0 + z * s)
}

/// `b^_0(k), ..., b^_N(k)` from the expansion of the rational function:
/// `1, m D^, (m D^)^2 - m`, then `b^_n = m D^ b^_{n-1} - (m-1) b^_{n-2}`.
pub fn series_coefficients(step_set: &StepSet, k: &FourierVector, terms: usize) -> Result<Vec<Complex64>> {
    check_terms(terms)?;
    let m = step_set.degree() as f64;
    let d = step_transform(step_set, k);
    let mut out = Vec::with_capacity(terms + 1);
    for n in 0..=terms {
        let v = match n {
            0 => 1.0,
            1 => m * d,
            2 => (m * d).powi(2) - m,
            _ => m * d * out[n - 1] - (m - 1.0) * out[n - 2],
        };
        out.push(v);
    }
    Ok(out.into_iter().map(Complex64::from).collect())
}

/// `b^_n(k) / (m (m-1)^{n-1})` by the same recurrence, rescaled so large
/// `N` does not overflow.
pub fn series_ratios(step_set: &StepSet, k: &FourierVector, terms: usize) -> Result<Vec<f64>> {
    check_terms(terms)?;
    let m = step_set.degree() as f64;
    let c = m - 1.0;
    let d = step_transform(step_set, k);
    let mut out = Vec::with_capacity(terms + 1);
    for n in 0..=terms {
        let v = match n {
            0 => 1.0,
            1 => d,
            2 => (m * d * d - 1.0) / c,
            _ => (m * d * out[n - 1] - out[n - 2]) / c,
        };
        out.push(v);
    }
    Ok(out)
}

/// Exact coefficients for a rational `D^` (e.g. `1` at `k = 0`).
pub fn series_coefficients_rational(m: usize, d_hat: &BigRational, terms: usize) -> Result<Vec<BigRational>> {
    check_terms(terms)?;
    let mq = BigRational::from_integer(BigInt::from(m));
    let c = BigRational::from_integer(BigInt::from(m - 1));
    let md = &mq * d_hat;
    let mut out: Vec<BigRational> = Vec::with_capacity(terms + 1);
    for n in 0..=terms {
        let v = match n {
            0 => BigRational::one(),
            1 => md.clone(),
            2 => &md * &md - &mq,
            _ => &md * &out[n - 1] - &c * &out[n - 2],
        };
        out.push(v);
    }
    Ok(out)
}

fn check_terms(terms: usize) -> Result<()> {
    if terms > MAX_SERIES_TERMS {
        return Err(Error::Domain(format!(
            "at most {MAX_SERIES_TERMS} series terms (requested {terms})"
        )));
    }
    Ok(())
}

/// `|| (I + z D[k] J)(I - z D[k] J)/(1 - z^2) - I ||_max`.
pub fn inverse_identity_residual(step_set: &StepSet, z: Complex64, k: &FourierVector) -> f64 {
    let m = step_set.degree();
    let rev = step_set.reversal_map();
    let dj = DMatrix::from_fn(m, m, |i, j| {
        if rev[j] == i {
            Complex64::from_polar(1.0, k.dot(&step_set.points()[i]))
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let id = DMatrix::<Complex64>::identity(m, m);
    let lhs = &id + &dj * z;
    let rhs = (&id - &dj * z) / (1.0 - z * z);
    (lhs * rhs - id).iter().fold(0.0, |a, v| a.max(v.norm()))
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

    fn k(v: &[f64]) -> FourierVector {
        FourierVector::new(v.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn examples() {
        let s = nn(2);
        let z0 = k(&[0.0, 0.0]);
        assert_eq!(greens_hat(&s, c(0.0, 0.0), &z0).unwrap(), c(1.0, 0.0));
        let z = c(0.1, 0.0);
        let expected = (1.0 + z) / (1.0 - 3.0 * z);
        assert!((greens_hat(&s, z, &z0).unwrap() - expected).norm() < 1e-15);
        let dir = greens_directed(&s, z, &z0).unwrap();
        for v in dir.iter() {
            assert!((v - c(0.9 / 0.63, 0.0)).norm() < 1e-14);
        }
        let dir0 = greens_directed(&s, c(0.0, 0.0), &k(&[0.3, 0.1])).unwrap();
        assert!(dir0.iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn pole_is_reported() {
        let s = nn(2);
        // 1 + 3 z^2 - 4 z = 0 at z = 1/3
        let err = greens_hat(&s, c(1.0 / 3.0, 0.0), &k(&[0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }));
    }

    #[test]
    fn series_examples() {
        let s = nn(2);
        let zero: Vec<f64> = series_coefficients(&s, &k(&[0.0, 0.0]), 4).unwrap().iter().map(|v| v.re).collect();
        assert_eq!(zero, vec![1.0, 4.0, 12.0, 36.0, 108.0]);
        let pi: Vec<f64> = series_coefficients(&s, &k(&[PI, PI]), 3).unwrap().iter().map(|v| v.re).collect();
        for (a, b) in pi.iter().zip([1.0, -4.0, 12.0, -36.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let exact = series_coefficients_rational(4, &BigRational::one(), 6).unwrap();
        for (n, v) in exact.iter().enumerate() {
            let want = crate::exact_count::total_walks(4, n as u64);
            assert_eq!(v.to_integer(), BigInt::from(want));
        }
        assert!(series_coefficients(&s, &z0(), MAX_SERIES_TERMS + 1).is_err());
    }

    fn z0() -> FourierVector {
        k(&[0.0, 0.0])
    }

    #[test]
    fn series_sums_to_closed_form() {
        let s = nn(3);
        let kk = k(&[0.4, -1.0, 2.0]);
        let z = c(0.05, 0.02);
        let coeffs = series_coefficients(&s, &kk, 200).unwrap();
        let mut sum = c(0.0, 0.0);
        let mut zn = c(1.0, 0.0);
        for b in coeffs {
            sum += b * zn;
            zn *= z;
        }
        assert!((sum - greens_hat(&s, z, &kk).unwrap()).norm() < 1e-12);
        // directed series from bn_vec
        let mut dsum = CVector::from_element(6, c(0.0, 0.0));
        let mut zn = c(1.0, 0.0);
        for n in 0..200 {
            dsum += bn_vec(&s, &kk, n) * zn;
            zn *= z;
        }
        assert!((dsum - greens_directed(&s, z, &kk).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn ratios_match_spectral() {
        let s = nn(2);
        let kk = k(&[0.3, 1.9]);
        let r = series_ratios(&s, &kk, 2000).unwrap();
        for n in [1usize, 2, 3, 10, 100, 2000] {
            let spec = crate::spectral::bn_ratio(&s, &kk, n as u64);
            assert!((spec.re - r[n]).abs() < 1e-9, "n = {n}");
        }
    }

    proptest! {
        #[test]
        fn srw_and_vector_identities(d in 2usize..5, raw in proptest::collection::vec(-PI..PI, 4),
                                     zr in -1.0f64..1.0, zi in -1.0f64..1.0) {
            let s = nn(d);
            let kk = k(&raw[..d]);
            let z = c(zr, zi) * (0.99 / (s.degree() as f64 - 1.0)) / 1.5;
            let b = greens_hat(&s, z, &kk).unwrap();
            prop_assert!((greens_via_srw(&s, z, &kk).unwrap() - b).norm() <= 1e-12 * b.norm().max(1.0));
            prop_assert!((greens_from_directed(&s, z, &kk).unwrap() - b).norm() <= 1e-12 * b.norm().max(1.0));
            prop_assert!(inverse_identity_residual(&s, z, &kk) <= 1e-12);
        }

        #[test]
        fn series_agrees_with_spectral(d in 2usize..4, raw in proptest::collection::vec(-PI..PI, 3)) {
            let s = nn(d);
            let kk = k(&raw[..d]);
            let series = series_coefficients(&s, &kk, 20).unwrap();
            for (n, v) in series.iter().enumerate() {
                let spec = bn_hat(&s, &kk, n as u64);
                let scale = (s.degree() as f64 - 1.0).powi(n as i32);
                prop_assert!((spec - v).norm() <= 1e-9 * scale);
            }
        }
    }
}
