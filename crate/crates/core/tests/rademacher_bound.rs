//! High-probability bound for Rademacher diagonal profiles. The absolute
//! constant in the bound is unknown, so it is taken as 1 and violations are
//! reported instead of failing the test.

use multisense_core::constants::{coherence, gamma_identical};
use multisense_core::{BasisKind, ProfileSet, UnitaryBasis};

#[test]
fn rademacher_identical_constant_against_high_probability_bound() {
    let (n, c, eps) = (256usize, 16usize, 0.01f64);
    let u = UnitaryBasis::new(BasisKind::Fourier, n).unwrap();
    let bound = ((n as f64).sqrt() + (c as f64).sqrt() + (2.0 * (2.0 / eps).ln()).sqrt())
        * coherence(&u).sqrt();
    let mut violations = 0;
    let mut worst = 0.0_f64;
    for seed in 0..50 {
        let p = ProfileSet::rademacher_diagonal(c, n, seed).unwrap();
        assert_eq!((p.alpha(), p.beta()), (1.0, 1.0));
        let g = gamma_identical(&p, &u).unwrap();
        assert!(g.is_finite() && g >= (c as f64).sqrt() / (n as f64).sqrt() - 1e-12);
        worst = worst.max(g / bound);
        if g > bound {
            violations += 1;
        }
    }
    println!("rademacher bound: {violations}/50 violations, worst ratio {worst:.4}");
}
