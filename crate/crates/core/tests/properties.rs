use multisense_core::aric::{aric_exhaustive, aric_sampled};
use multisense_core::constants::{gamma_distinct, gamma_identical, xi_distinct, xi_identical};
use multisense_core::measurement::{assemble_distinct, assemble_identical, EntryDist};
use multisense_core::recovery::sigma_s;
use multisense_core::{BasisKind, DMatrix, DVector, ProfileFamily, ProfileSet, UnitaryBasis, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

fn basis_kind() -> impl Strategy<Value = BasisKind> {
    prop::sample::select(BasisKind::ALL.to_vec())
}

fn family() -> impl Strategy<Value = ProfileFamily> {
    prop::sample::select(ProfileFamily::ALL.to_vec())
}

fn random_dense_set(sensors: usize, n: usize, seed: u64) -> ProfileSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats = (0..sensors)
        .map(|_| {
            DMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            })
        })
        .collect();
    ProfileSet::dense(mats).unwrap()
}

fn check_chains(p: &ProfileSet, u: &UnitaryBasis) -> Result<(), TestCaseError> {
    let c = p.sensors() as f64;
    let cond = (p.beta() / p.alpha()).sqrt();
    let gd = gamma_distinct(p, u).unwrap();
    let gi = gamma_identical(p, u).unwrap();
    let xd = xi_distinct(p);
    let xi = xi_identical(p);
    prop_assert!(1.0 - TOL <= gd, "gamma_distinct {gd} < 1");
    prop_assert!(gd <= xd + TOL, "gamma_distinct {gd} > xi_distinct {xd}");
    prop_assert!(xd <= cond * c.sqrt() + TOL);
    prop_assert!(gd <= gi + TOL, "gamma_distinct {gd} > gamma_identical {gi}");
    prop_assert!(gi <= xi + TOL, "gamma_identical {gi} > xi_identical {xi}");
    prop_assert!(xi <= cond * c + TOL);
    prop_assert!(xd <= xi + TOL);
    if p.is_normal() {
        prop_assert!(xi <= cond * c.sqrt() + TOL, "normal set: xi_identical {xi}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bound_chains_for_structured_sets(
        fam in family(),
        log_c in 0usize..4,
        circulant in any::<bool>(),
        kind in basis_kind(),
        seed in any::<u64>(),
    ) {
        let c = 1usize << log_c;
        prop_assume!(c >= 2 || fam != ProfileFamily::Banded);
        let p = ProfileSet::family(fam, c, 32, seed, circulant).unwrap();
        let u = UnitaryBasis::new(kind, 32).unwrap();
        check_chains(&p, &u)?;
    }

    #[test]
    fn bound_chains_for_dense_sets(
        c in 1usize..5,
        kind in basis_kind(),
        seed in any::<u64>(),
    ) {
        let p = random_dense_set(c, 32, seed);
        let u = UnitaryBasis::new(kind, 32).unwrap();
        check_chains(&p, &u)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesis_round_trips(kind in basis_kind(), seed in any::<u64>()) {
        let u = UnitaryBasis::new(kind, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DVector::from_fn(64, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>()));
        let f = u.apply(&x).unwrap();
        prop_assert!((f.norm() - x.norm()).abs() < 1e-12);
        let back = u.apply_adjoint(&f).unwrap();
        prop_assert!((back - &x).norm() < 1e-12);
    }

    #[test]
    fn sampled_constants_lie_inside_exhaustive_ones(seed in any::<u64>(), s in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(6, 10, |_, _| C64::new(rng.random::<f64>() - 0.5, 0.0));
        let e = aric_exhaustive(&a, s).unwrap();
        let r = aric_sampled(&a, s, 500, seed).unwrap();
        prop_assert!(e.alpha_s <= e.beta_s);
        prop_assert!(r.alpha_s >= e.alpha_s - 1e-9 && r.beta_s <= e.beta_s + 1e-9);
    }

    #[test]
    fn sigma_s_matches_brute_force(seed in any::<u64>(), n in 1usize..10, s in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DVector::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        // best s-term l1 error over every support of size min(s, n)
        let k = s.min(n);
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let tail: f64 = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| x[i].norm()).sum();
            best = best.min(tail);
        }
        prop_assert!((sigma_s(&x, s) - best).abs() < 1e-12);
    }

    #[test]
    fn assemblers_are_pure_in_the_seed(seed in any::<u64>(), fam in family()) {
        let p = ProfileSet::family(fam, 2, 32, seed, false).unwrap();
        let u = UnitaryBasis::new(BasisKind::Cosine, 32).unwrap();
        for dist in [EntryDist::Gaussian, EntryDist::Rademacher] {
            let a = assemble_distinct(&p, &u, 8, dist, seed).unwrap();
            let b = assemble_distinct(&p, &u, 8, dist, seed).unwrap();
            prop_assert_eq!(a.matrix, b.matrix);
            let a = assemble_identical(&p, &u, 8, dist, seed).unwrap();
            let b = assemble_identical(&p, &u, 8, dist, seed).unwrap();
            prop_assert_eq!(a.matrix, b.matrix);
        }
    }
}
