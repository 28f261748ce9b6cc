//! Sparse linear solvers used by the steady-state computation, plus a small
//! closed-form eigen solver.

mod banded;
mod gmres;

pub use banded::BandedLu;
pub use gmres::{gmres, GmresOutcome, Ilu0};

use crate::C64;

pub(crate) fn norm2(v: &[C64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x.norm_sqr()).sum())
}

/// Eigenvalues of a general complex 2×2 matrix `[[a, b], [c, d]]`.
///
/// Returned as `(mean + root, mean − root)` with the principal square root,
/// so for a real-positive discriminant the first has the larger real part.
pub fn eigenvalues_2x2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let mean = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let root = (half_diff * half_diff + b * c).sqrt();
    (mean + root, mean - root)
}
