//! Inputs shared by the benchmarks.

use nbw_core::{FourierVector, StepSet};

pub fn nn(d: usize) -> StepSet {
    StepSet::nearest_neighbor(d).expect("d >= 1")
}

/// A generic wave vector away from the special points.
pub fn generic_wave(d: usize) -> FourierVector {
    FourierVector::new((0..d).map(|i| 0.3 + 0.41 * i as f64).collect()).expect("within [-pi, pi]")
}
