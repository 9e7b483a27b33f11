//! Benchmark fixtures shared by the criterion targets.

use multisense_core::measurement::{assemble_distinct, EntryDist};
use multisense_core::{
    random_sparse_signal, BasisKind, DMatrix, DVector, ProfileFamily, ProfileSet, UnitaryBasis, C64,
};

/// A distinct-sampling instance with global profiles and its measurements.
pub fn recovery_instance(n: usize, m: usize, s: usize, seed: u64) -> (DMatrix<C64>, DVector<C64>) {
    let p = ProfileSet::family(ProfileFamily::Global, 2, n, seed, false).expect("valid family");
    let u = UnitaryBasis::new(BasisKind::Canonical, n).expect("valid basis");
    let a = assemble_distinct(&p, &u, m, EntryDist::Gaussian, seed)
        .expect("valid ensemble")
        .matrix;
    let x = random_sparse_signal(n, s, seed).expect("s <= n");
    let y = &a * &x;
    (a, y)
}
