//! Dense complex matrix helpers shared by the evaluation layers.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::scalar::{modulus, Real};

/// Dense complex matrix.
pub type CMat<R> = DMatrix<Complex<R>>;

/// Condition estimate above which a solve is reported as singular.
pub const COND_LIMIT: f64 = 1e12;

/// Largest singular value (operator norm); `0` for empty matrices.
pub fn op_norm<R: Real>(m: &CMat<R>) -> R {
    if m.is_empty() {
        return R::zero();
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(R::zero(), |a, b| if b > a { b } else { a })
}

/// Singular values in no particular order.
pub fn singular_values<R: Real>(m: &CMat<R>) -> Vec<R> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

/// 2-norm condition number `σ_max / σ_min` of a square matrix; `+∞` when singular.
pub fn condition<R: Real>(m: &CMat<R>) -> f64 {
    let sv = singular_values(m);
    if sv.is_empty() {
        return 1.0;
    }
    let max = sv.iter().map(|s| s.as_f64()).fold(0.0, f64::max);
    let min = sv.iter().map(|s| s.as_f64()).fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `A Y = B` by partially pivoted LU.
pub fn solve<R: Real>(a: &CMat<R>, b: &CMat<R>) -> Option<CMat<R>> {
    a.clone().lu().solve(b)
}

/// Kronecker product `coefficient ⊗ matrix`: block `(a, b)` is `coefficient[(a, b)] · matrix`.
pub fn kron<R: Real>(coefficient: &CMat<R>, matrix: &CMat<R>) -> CMat<R> {
    coefficient.kronecker(matrix)
}

pub fn identity<R: Real>(n: usize) -> CMat<R> {
    CMat::identity(n, n)
}

/// Block-diagonal matrix `A ⊕ B`.
pub fn block_diag<R: Real>(a: &CMat<R>, b: &CMat<R>) -> CMat<R> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Largest entrywise modulus of `A - B`.
pub fn max_abs_diff<R: Real>(a: &CMat<R>, b: &CMat<R>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in comparison");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| modulus(x - y).as_f64())
        .fold(0.0, f64::max)
}
