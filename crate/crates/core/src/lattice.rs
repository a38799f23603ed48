//! Step sets, directions, tori and their Fourier duals.
//!
//! A [`StepSet`] is the symmetric set of single-step displacements a walk
//! may take. Points are kept in a canonical order: every "positive"
//! representative (first non-zero coordinate positive) is immediately
//! followed by its negation, and representatives are sorted in descending
//! lexicographic order. For the nearest-neighbour set this reproduces the
//! familiar ordering `(+e1, -e1, +e2, -e2, ...)`, so direction index `2i`
//! is `+e(i+1)` and `2i + 1` is `-e(i+1)`.
//!
//! Step sets may live on a torus of width `r`. There, points are reduced to
//! the representative window `{-floor((r-1)/2), ..., ceil((r-1)/2)}` per
//! coordinate, and a point may be its own reversal (e.g. the step `2` on a
//! 4-cycle, or every step of the hypercube).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a direction inside a [`StepSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Direction(pub usize);

impl Direction {
    /// Maps a signed nearest-neighbour index `iota` (`1 <= |iota| <= d`) to
    /// its position in the canonical ordering.
    pub fn from_signed(iota: i32) -> Self {
        assert!(iota != 0, "signed direction index must be non-zero");
        let axis = iota.unsigned_abs() as usize - 1;
        Direction(2 * axis + usize::from(iota < 0))
    }

    /// Inverse of [`Direction::from_signed`]; only meaningful for
    /// nearest-neighbour step sets.
    pub fn signed(self) -> i32 {
        let axis = (self.0 / 2) as i32 + 1;
        if self.0 % 2 == 0 {
            axis
        } else {
            -axis
        }
    }

    pub fn index(self) -> usize {
        self.0
    }
}

/// The unit vector `e[iota]` of `Z^d`, with `(e[iota])_kappa = sign(iota) * delta(|iota|, kappa)`.
pub fn unit_vector(iota: i32, dim: usize) -> Vec<i64> {
    assert!(iota != 0 && iota.unsigned_abs() as usize <= dim);
    let mut v = vec![0; dim];
    v[iota.unsigned_abs() as usize - 1] = i64::from(iota.signum());
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepSetKind {
    NearestNeighbor,
    Hamming,
    Hypercube,
    Custom,
}

/// JSON form of a step set: `{"dim": d, "points": [[...], ...]}` with an
/// optional `"modulus"` for step sets living on a torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSetSpec {
    pub dim: usize,
    pub points: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u32>,
}

/// A symmetric, translation-invariant set of allowed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSet {
    dim: usize,
    points: Vec<Vec<i64>>,
    reversal: Vec<usize>,
    modulus: Option<u32>,
    kind: StepSetKind,
}

fn reduce_coord(c: i64, r: u32) -> i64 {
    let r = i64::from(r);
    let lo = -((r - 1) / 2);
    let mut v = c.rem_euclid(r);
    if v > (r - 1) - (r - 1) / 2 {
        v -= r;
    }
    debug_assert!(v >= lo);
    v
}

fn negate(p: &[i64], modulus: Option<u32>) -> Vec<i64> {
    match modulus {
        None => p.iter().map(|c| -c).collect(),
        Some(r) => p.iter().map(|&c| reduce_coord(-c, r)).collect(),
    }
}

fn is_positive(p: &[i64]) -> bool {
    p.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

impl StepSet {
    /// Validates and canonicalises a step set on `Z^d`.
    pub fn new(dim: usize, points: Vec<Vec<i64>>) -> Result<Self> {
        Self::build(dim, points, None, StepSetKind::Custom)
    }

    /// Validates and canonicalises a step set on the torus of width `r`.
    pub fn on_torus(dim: usize, points: Vec<Vec<i64>>, r: u32) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidStepSet(format!("torus width {r} < 2")));
        }
        Self::build(dim, points, Some(r), StepSetKind::Custom)
    }

    fn build(
        dim: usize,
        points: Vec<Vec<i64>>,
        modulus: Option<u32>,
        kind: StepSetKind,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidStepSet("dimension must be positive".into()));
        }
        let mut pts = Vec::with_capacity(points.len());
        for p in points {
            if p.len() != dim {
                return Err(Error::InvalidStepSet(format!(
                    "point {p:?} does not have dimension {dim}"
                )));
            }
            let p = match modulus {
                None => p,
                Some(r) => p.iter().map(|&c| reduce_coord(c, r)).collect(),
            };
            if p.iter().all(|&c| c == 0) {
                return Err(Error::InvalidStepSet("the origin is not a valid step".into()));
            }
            if pts.contains(&p) {
                return Err(Error::InvalidStepSet(format!("duplicate point {p:?}")));
            }
            pts.push(p);
        }
        for p in &pts {
            if !pts.contains(&negate(p, modulus)) {
                return Err(Error::InvalidStepSet(format!(
                    "step set is not symmetric: {p:?} present but its reversal is not"
                )));
            }
        }
        if pts.len() < 2 {
            return Err(Error::InvalidStepSet(format!(
                "need at least two points, got {}",
                pts.len()
            )));
        }
        if modulus.is_none() && pts.len() % 2 != 0 {
            return Err(Error::InvalidStepSet("degree must be even on Z^d".into()));
        }

        let mut reps: Vec<Vec<i64>> = pts
            .iter()
            .filter(|p| {
                let n = negate(p, modulus);
                if &n == *p {
                    true
                } else {
                    is_positive(p)
                }
            })
            .cloned()
            .collect();
        reps.sort_by(|a, b| b.cmp(a));
        let mut ordered = Vec::with_capacity(pts.len());
        for rep in reps {
            let neg = negate(&rep, modulus);
            let self_reverse = neg == rep;
            ordered.push(rep);
            if !self_reverse {
                ordered.push(neg);
            }
        }
        let reversal = ordered
            .iter()
            .map(|p| {
                let n = negate(p, modulus);
                ordered.iter().position(|q| *q == n).expect("symmetry checked")
            })
            .collect();
        Ok(StepSet {
            dim,
            points: ordered,
            reversal,
            modulus,
            kind,
        })
    }

    /// `{±e_1, ..., ±e_d}` on `Z^d`.
    pub fn nearest_neighbor(dim: usize) -> Result<Self> {
        let mut pts = Vec::with_capacity(2 * dim);
        for i in 1..=dim as i32 {
            pts.push(unit_vector(i, dim));
            pts.push(unit_vector(-i, dim));
        }
        Self::build(dim, pts, None, StepSetKind::NearestNeighbor)
    }

    /// Nearest-neighbour steps on the torus of width `r >= 3`.
    pub fn nearest_neighbor_torus(dim: usize, r: u32) -> Result<Self> {
        if r < 3 {
            return Err(Error::InvalidStepSet(format!(
                "nearest-neighbour torus needs r >= 3 (got {r}); use the hypercube for r = 2"
            )));
        }
        let base = Self::nearest_neighbor(dim)?;
        let mut s = Self::build(dim, base.points, Some(r), StepSetKind::NearestNeighbor)?;
        s.kind = StepSetKind::NearestNeighbor;
        Ok(s)
    }

    /// Product of complete graphs: change exactly one coordinate to any
    /// other value mod `r`. Degree `d(r - 1)`.
    pub fn hamming(dim: usize, r: u32) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidStepSet(format!("hamming width {r} < 2")));
        }
        let mut pts = Vec::with_capacity(dim * (r as usize - 1));
        for i in 0..dim {
            for j in 1..i64::from(r) {
                let mut v = vec![0; dim];
                v[i] = j;
                pts.push(v);
            }
        }
        Self::build(dim, pts, Some(r), StepSetKind::Hamming)
    }

    /// The hypercube `{0,1}^m`: flip one bit. Every step is its own reversal.
    pub fn hypercube(m: usize) -> Result<Self> {
        let pts = (1..=m as i32).map(|i| unit_vector(i, m)).collect();
        Self::build(m, pts, Some(2), StepSetKind::Hypercube)
    }

    /// Parses a preset name: `nn`, `hamming(r)` or `hypercube`. `dim` is
    /// the lattice dimension (for the hypercube, the degree `m`).
    pub fn from_preset(name: &str, dim: usize) -> Result<Self> {
        let name = name.trim();
        if name == "nn" {
            return Self::nearest_neighbor(dim);
        }
        if name == "hypercube" {
            return Self::hypercube(dim);
        }
        if let Some(inner) = name.strip_prefix("hamming(").and_then(|s| s.strip_suffix(')')) {
            let r: u32 = inner
                .trim()
                .parse()
                .map_err(|_| Error::InvalidStepSet(format!("bad hamming width in {name:?}")))?;
            return Self::hamming(dim, r);
        }
        Err(Error::InvalidStepSet(format!("unknown preset {name:?}")))
    }

    pub fn from_spec(spec: StepSetSpec) -> Result<Self> {
        match spec.modulus {
            None => Self::new(spec.dim, spec.points),
            Some(r) => Self::on_torus(spec.dim, spec.points, r),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(s)?)
    }

    pub fn to_spec(&self) -> StepSetSpec {
        StepSetSpec {
            dim: self.dim,
            points: self.points.clone(),
            modulus: self.modulus,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("step set serialises")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of allowed steps `m = |V0|`.
    pub fn degree(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn point(&self, dir: Direction) -> &[i64] {
        &self.points[dir.0]
    }

    pub fn reverse(&self, dir: Direction) -> Direction {
        Direction(self.reversal[dir.0])
    }

    pub fn reversal_map(&self) -> &[usize] {
        &self.reversal
    }

    pub fn directions(&self) -> impl Iterator<Item = Direction> + '_ {
        (0..self.points.len()).map(Direction)
    }

    pub fn modulus(&self) -> Option<u32> {
        self.modulus
    }

    pub fn kind(&self) -> StepSetKind {
        self.kind
    }

    pub fn is_nearest_neighbor(&self) -> bool {
        self.kind == StepSetKind::NearestNeighbor
    }

    /// True if some step is its own reversal (only possible on a torus).
    pub fn has_self_reverse(&self) -> bool {
        self.reversal.iter().enumerate().any(|(i, &j)| i == j)
    }

    /// Largest absolute coordinate over all steps.
    pub fn max_abs_coordinate(&self) -> i64 {
        self.points
            .iter()
            .flat_map(|p| p.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// `k . x` for the step in direction `dir`.
    pub fn phase(&self, dir: Direction, k: &FourierVector) -> f64 {
        k.dot(&self.points[dir.0])
    }

    /// Covariance of a single uniform step, `H_{ij} = sum_x x_i x_j D(x)`,
    /// as exact numerators over the common denominator `m`.
    pub fn step_covariance_numerators(&self) -> Vec<Vec<i64>> {
        let d = self.dim;
        let mut h = vec![vec![0; d]; d];
        for p in &self.points {
            for i in 0..d {
                for j in 0..d {
                    h[i][j] += p[i] * p[j];
                }
            }
        }
        h
    }
}

impl fmt::Display for StepSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StepSetKind::NearestNeighbor => write!(f, "nn(d={})", self.dim)?,
            StepSetKind::Hamming => write!(f, "hamming(d={})", self.dim)?,
            StepSetKind::Hypercube => write!(f, "hypercube(m={})", self.dim)?,
            StepSetKind::Custom => write!(f, "custom(d={}, m={})", self.dim, self.degree())?,
        }
        if let Some(r) = self.modulus {
            write!(f, " mod {r}")?;
        }
        Ok(())
    }
}

/// A wave vector `k` with every component in `[-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FourierVector(Vec<f64>);

const RANGE_SLACK: f64 = 1e-12;

impl FourierVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        for &c in &components {
            if !c.is_finite() {
                return Err(Error::InvalidWave(format!("non-finite component {c}")));
            }
            if c.abs() > PI + RANGE_SLACK {
                return Err(Error::InvalidWave(format!("component {c} outside [-pi, pi]")));
            }
        }
        Ok(FourierVector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        FourierVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `k_iota`, with `k_iota = -k_{|iota|}` for negative `iota`.
    pub fn component(&self, iota: i32) -> f64 {
        let c = self.0[iota.unsigned_abs() as usize - 1];
        if iota < 0 {
            -c
        } else {
            c
        }
    }

    pub fn dot(&self, x: &[i64]) -> f64 {
        self.0.iter().zip(x).map(|(k, &x)| k * x as f64).sum()
    }

    /// `k * factor`; `factor` must keep the components in range.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn negated(&self) -> Self {
        FourierVector(self.0.iter().map(|c| -c).collect())
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

/// The finite torus `T_{r,d} = (Z/rZ)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub dim: usize,
    pub width: u32,
}

impl TorusSpec {
    pub fn new(dim: usize, width: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidTorus("dimension must be positive".into()));
        }
        if width < 2 {
            return Err(Error::InvalidTorus(format!("width {width} < 2")));
        }
        let t = TorusSpec { dim, width };
        if (width as f64).powi(dim as i32) > u32::MAX as f64 {
            return Err(Error::InvalidTorus("volume does not fit in memory".into()));
        }
        Ok(t)
    }

    /// `V = r^d`.
    pub fn volume(&self) -> usize {
        (self.width as usize).pow(self.dim as u32)
    }

    /// Mixed-radix index of a point; coordinates are reduced mod `r`.
    pub fn index_of(&self, x: &[i64]) -> usize {
        let r = i64::from(self.width);
        x.iter()
            .rev()
            .fold(0usize, |acc, &c| acc * self.width as usize + c.rem_euclid(r) as usize)
    }

    /// Point with coordinates in `0..r` at a mixed-radix index.
    pub fn point_at(&self, mut idx: usize) -> Vec<i64> {
        let r = self.width as usize;
        let mut x = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            x.push((idx % r) as i64);
            idx /= r;
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.volume()).map(|i| self.point_at(i))
    }

    /// Integer frequencies `{-floor((r-1)/2), ..., ceil((r-1)/2)}` of one axis
    /// of the dual torus; the wave component is `2 pi j / r`.
    pub fn dual_frequencies(&self) -> Vec<i64> {
        let r = i64::from(self.width);
        let lo = -((r - 1) / 2);
        let hi = (r - 1) - (r - 1) / 2;
        (lo..=hi).collect()
    }

    /// Every point of the dual torus, in mixed-radix order over
    /// [`TorusSpec::dual_frequencies`] (first axis fastest).
    pub fn dual_grid(&self) -> Vec<FourierVector> {
        let freqs = self.dual_frequencies();
        let r = freqs.len();
        let step = 2.0 * PI / self.width as f64;
        (0..self.volume())
            .map(|mut idx| {
                let mut k = Vec::with_capacity(self.dim);
                for _ in 0..self.dim {
                    k.push(step * freqs[idx % r] as f64);
                    idx /= r;
                }
                FourierVector(k)
            })
            .collect()
    }
}

/// `D^(k) = (1/m) sum_{x in V0} e^{i k.x}`.
///
/// Symmetry of the step set makes the sum real; for torus step sets with
/// self-reversing steps this holds on the dual grid only.
pub fn step_transform(step_set: &StepSet, k: &FourierVector) -> f64 {
    debug_assert_eq!(k.dim(), step_set.dim());
    let m = step_set.degree() as f64;
    let sum: Complex64 = step_set
        .points()
        .iter()
        .map(|x| Complex64::from_polar(1.0, k.dot(x)))
        .sum();
    let value = sum / m;
    debug_assert!(
        value.im.abs() <= 1e-12,
        "step transform has imaginary part {} at {:?}",
        value.im,
        k
    );
    value.re.clamp(-1.0, 1.0)
}

/// Closed form of [`step_transform`] for the Hamming step set at a dual
/// point with `a` non-zero components: `1 - r a / (d (r - 1))`.
pub fn hamming_step_transform(dim: usize, r: u32, a: usize) -> Result<f64> {
    if r < 2 {
        return Err(Error::Domain(format!("hamming width {r} < 2")));
    }
    if a > dim {
        return Err(Error::Domain(format!("{a} non-zero components exceed dimension {dim}")));
    }
    let r = r as f64;
    Ok(1.0 - r * a as f64 / (dim as f64 * (r - 1.0)))
}

/// Closed form of [`step_transform`] for the hypercube at a dual point with
/// `a` non-zero bits: `1 - 2a/m`.
pub fn hypercube_step_transform(m: usize, a: usize) -> Result<f64> {
    if a > m {
        return Err(Error::Domain(format!("{a} non-zero bits exceed degree {m}")));
    }
    Ok(1.0 - 2.0 * a as f64 / m as f64)
}
