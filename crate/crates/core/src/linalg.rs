//! Small dense linear-algebra helpers on complex matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::C64;

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Extreme eigenvalues `(min, max)` of a Hermitian matrix.
pub fn hermitian_extremes(m: &DMatrix<C64>) -> (f64, f64) {
    if m.nrows() == 1 {
        let v = m[(0, 0)].re;
        return (v, v);
    }
    let eig = SymmetricEigen::new(m.clone());
    eig.eigenvalues
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
            (lo.min(e), hi.max(e))
        })
}

/// `M^* M` for a tall or wide complex matrix.
pub fn gram(m: &DMatrix<C64>) -> DMatrix<C64> {
    m.adjoint() * m
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn vec_max_abs_diff(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Sum of entry moduli, the complex l1 norm.
pub fn l1_norm(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}
