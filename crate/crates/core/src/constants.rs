//! Coherence-type constants of a profile set and sparsity basis, and the
//! sufficient measurement counts they imply.
//!
//! Every constant carries the `alpha^{-1/2}` prefactor. Diagonal and
//! circulant sets are evaluated without forming the profile matrices: a
//! circulant set with eigenvalues `lambda_c` and basis `U` behaves exactly
//! like a diagonal set with diagonals `lambda_c` and basis `F U`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_extremes, spectral_norm};
use crate::profiles::{mean_energy, ProfileSet, ProfileStructure};
use crate::transforms::{BasisKind, UnitaryBasis, UnitaryDft};
use crate::C64;

/// Which sufficient measurement condition to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionMode {
    DistinctNonuniversal,
    DistinctUniversal,
    IdenticalNonuniversal,
    IdenticalUniversal,
}

impl ConditionMode {
    pub const ALL: [ConditionMode; 4] = [
        ConditionMode::DistinctNonuniversal,
        ConditionMode::DistinctUniversal,
        ConditionMode::IdenticalNonuniversal,
        ConditionMode::IdenticalUniversal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionMode::DistinctNonuniversal => "distinct-nonuniversal",
            ConditionMode::DistinctUniversal => "distinct-universal",
            ConditionMode::IdenticalNonuniversal => "identical-nonuniversal",
            ConditionMode::IdenticalUniversal => "identical-universal",
        }
    }

    pub fn is_universal(self) -> bool {
        matches!(
            self,
            ConditionMode::DistinctUniversal | ConditionMode::IdenticalUniversal
        )
    }
}

impl fmt::Display for ConditionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConditionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConditionMode::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown condition mode '{s}'")))
    }
}

/// All constants for one (profile set, basis, sparsity) triple plus the
/// right-hand side of one measurement condition.
///
/// The absolute constant hidden in the conditions is pinned to
/// `absolute_constant` (always 1), so `measurement_rhs` is a reproducible
/// scale, not a certified count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub mode: ConditionMode,
    pub basis_kind: BasisKind,
    pub sensors: usize,
    pub n: usize,
    pub s: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_distinct: f64,
    pub xi_distinct: f64,
    pub gamma_identical: f64,
    pub xi_identical: f64,
    /// The same four constants without the `alpha^{-1/2}` prefactor.
    pub raw_gamma_distinct: f64,
    pub raw_xi_distinct: f64,
    pub raw_gamma_identical: f64,
    pub raw_xi_identical: f64,
    pub coherence_mu: f64,
    /// Only defined when `sensors` divides `n`.
    pub gamma_bar: Option<f64>,
    pub mu_tilde: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub log_factor: f64,
    pub measurement_rhs: f64,
    pub fixed_point_iterations: usize,
    pub absolute_constant: f64,
}

/// `mu(V) = max |v_ij|^2`.
pub fn coherence(u: &UnitaryBasis) -> f64 {
    if u.kind() == BasisKind::Canonical {
        return 1.0;
    }
    coherence_of(u.matrix())
}

pub fn coherence_of(v: &DMatrix<C64>) -> f64 {
    v.iter().fold(0.0_f64, |m, z| m.max(z.norm_sqr()))
}

/// `sqrt(C) max_c max_j ||U_c e_j||_2` with `U_c` the `c`-th block of `N/C` rows.
pub fn gamma_bar_block(u: &UnitaryBasis, sensors: usize) -> Result<f64> {
    gamma_bar_block_of(u.matrix(), sensors)
}

pub fn gamma_bar_block_of(v: &DMatrix<C64>, sensors: usize) -> Result<f64> {
    let n = v.nrows();
    if sensors == 0 {
        return Err(Error::CountTooSmall { count: 0, min: 1 });
    }
    if !n.is_multiple_of(sensors) {
        return Err(Error::Divisibility {
            what: "n",
            value: n,
            divisor: sensors,
        });
    }
    let block = n / sensors;
    let mut best = 0.0_f64;
    for c in 0..sensors {
        let rows = v.rows(c * block, block);
        for j in 0..n {
            best = best.max(rows.column(j).norm_squared());
        }
    }
    Ok((sensors as f64).sqrt() * best.sqrt())
}

/// `min { sqrt(mu(U) N), sqrt(C) }`.
pub fn mu_tilde(u: &UnitaryBasis, sensors: usize) -> f64 {
    (coherence(u) * u.n() as f64)
        .sqrt()
        .min((sensors as f64).sqrt())
}

type DiagonalView<'a> = (&'a [DVector<C64>], std::borrow::Cow<'a, DMatrix<C64>>);

/// Profile vectors and effective basis for the diagonal fast path.
fn diagonal_view<'a>(p: &'a ProfileSet, v: &'a DMatrix<C64>) -> Option<DiagonalView<'a>> {
    match p.structure() {
        ProfileStructure::Diagonal(h) => Some((h.as_slice(), std::borrow::Cow::Borrowed(v))),
        ProfileStructure::Circulant(l) => {
            Some((l.as_slice(), std::borrow::Cow::Owned(dft_columns(v))))
        }
        ProfileStructure::Dense(_) => None,
    }
}

/// `F V` with `F` the unitary DFT.
pub fn dft_columns(v: &DMatrix<C64>) -> DMatrix<C64> {
    let dft = UnitaryDft::new(v.nrows());
    let mut out = v.clone();
    let mut col = vec![C64::new(0.0, 0.0); v.nrows()];
    for j in 0..v.ncols() {
        col.copy_from_slice(v.column(j).as_slice());
        dft.forward(&mut col);
        out.column_mut(j).copy_from_slice(&col);
    }
    out
}

fn check_basis(p: &ProfileSet, v: &DMatrix<C64>) -> Result<()> {
    if v.nrows() != p.n() || v.ncols() != p.n() {
        return Err(Error::LengthMismatch {
            expected: p.n(),
            found: v.nrows(),
        });
    }
    Ok(())
}

/// Unnormalized `max_c max_j ||H_c U e_j||_2`.
fn raw_gamma_distinct(p: &ProfileSet, v: &DMatrix<C64>) -> Result<f64> {
    check_basis(p, v)?;
    let n = p.n();
    let best_sq = match diagonal_view(p, v) {
        Some((h, v)) => {
            let weights = v.map(|z| z.norm_sqr());
            h.iter()
                .map(|hc| {
                    let e: Vec<f64> = hc.iter().map(|z| z.norm_sqr()).collect();
                    (0..n)
                        .map(|j| (0..n).map(|i| e[i] * weights[(i, j)]).sum::<f64>())
                        .fold(0.0_f64, f64::max)
                })
                .fold(0.0_f64, f64::max)
        }
        None => (0..p.sensors())
            .map(|c| {
                let w = p.apply_to_columns(c, v);
                w.column_iter()
                    .map(|col| col.norm_squared())
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max),
    };
    Ok(best_sq.sqrt())
}

/// Unnormalized `max_j || [H_1 U e_j ... H_C U e_j] ||_{2->2}`.
fn raw_gamma_identical(p: &ProfileSet, v: &DMatrix<C64>) -> Result<f64> {
    check_basis(p, v)?;
    let n = p.n();
    let c = p.sensors();
    let best_sq = match diagonal_view(p, v) {
        Some((h, v)) => {
            let weights = v.map(|z| z.norm_sqr());
            (0..n)
                .into_par_iter()
                .map(|j| {
                    let g = DMatrix::from_fn(c, c, |a, b| {
                        (0..n)
                            .map(|i| h[a][i].conj() * h[b][i] * weights[(i, j)])
                            .sum::<C64>()
                    });
                    hermitian_extremes(&g).1
                })
                .reduce(|| 0.0, f64::max)
        }
        None => {
            let w: Vec<DMatrix<C64>> = (0..c).map(|k| p.apply_to_columns(k, v)).collect();
            (0..n)
                .into_par_iter()
                .map(|j| {
                    let g = DMatrix::from_fn(c, c, |a, b| w[a].column(j).dotc(&w[b].column(j)));
                    hermitian_extremes(&g).1
                })
                .reduce(|| 0.0, f64::max)
        }
    };
    Ok(best_sq.max(0.0).sqrt())
}

fn raw_xi_distinct(p: &ProfileSet) -> f64 {
    match p.structure() {
        ProfileStructure::Diagonal(h) | ProfileStructure::Circulant(h) => h
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0_f64, |m, z| m.max(z.norm())),
        ProfileStructure::Dense(mats) => mats.iter().map(spectral_norm).fold(0.0_f64, f64::max),
    }
}

fn raw_xi_identical(p: &ProfileSet) -> f64 {
    match p.structure() {
        ProfileStructure::Diagonal(h) | ProfileStructure::Circulant(h) => {
            let c = h.len() as f64;
            let peak = mean_energy(h).into_iter().fold(0.0_f64, f64::max);
            (peak * c).sqrt()
        }
        ProfileStructure::Dense(mats) => {
            let n = p.n();
            let mut s = DMatrix::<C64>::zeros(n, n);
            for h in mats {
                s += h * h.adjoint();
            }
            let s = (&s + s.adjoint()) * C64::new(0.5, 0.0);
            hermitian_extremes(&s).1.max(0.0).sqrt()
        }
    }
}

fn prefactor(p: &ProfileSet) -> f64 {
    1.0 / p.alpha().sqrt()
}

/// `alpha^{-1/2} max_c max_j ||H_c U e_j||_2`.
pub fn gamma_distinct(p: &ProfileSet, u: &UnitaryBasis) -> Result<f64> {
    gamma_distinct_of(p, u.matrix())
}

/// [`gamma_distinct`] against an arbitrary (unitary) basis matrix.
pub fn gamma_distinct_of(p: &ProfileSet, v: &DMatrix<C64>) -> Result<f64> {
    Ok(prefactor(p) * raw_gamma_distinct(p, v)?)
}

/// `alpha^{-1/2} max_j || [H_1 U e_j ... H_C U e_j] ||_{2->2}`.
pub fn gamma_identical(p: &ProfileSet, u: &UnitaryBasis) -> Result<f64> {
    gamma_identical_of(p, u.matrix())
}

pub fn gamma_identical_of(p: &ProfileSet, v: &DMatrix<C64>) -> Result<f64> {
    Ok(prefactor(p) * raw_gamma_identical(p, v)?)
}

/// `alpha^{-1/2} max_c ||H_c||_{2->2}`.
pub fn xi_distinct(p: &ProfileSet) -> f64 {
    prefactor(p) * raw_xi_distinct(p)
}

/// `alpha^{-1/2} || [H_1 ... H_C] ||_{2->2} = alpha^{-1/2} sqrt(||sum_c H_c H_c^*||)`.
pub fn xi_identical(p: &ProfileSet) -> f64 {
    prefactor(p) * raw_xi_identical(p)
}

/// Log factor of the nonuniversal conditions.
pub fn log_factor_nonuniversal(s: usize, n: usize, m: f64, epsilon: f64) -> f64 {
    let ln2s = (2.0 * s as f64).ln();
    ln2s * ln2s * (2.0 * n as f64).ln() * (2.0 * m).ln() + (2.0 / epsilon).ln()
}

/// Log factor of the universal conditions.
pub fn log_factor_universal(s: usize, n: usize, epsilon: f64) -> f64 {
    (2.0 * n as f64 / s as f64).ln() + (2.0 / epsilon).ln() / s as f64
}

const FIXED_POINT_MAX_ITER: usize = 200;

/// Solves `m = scale * L1(m)` by monotone fixed-point iteration from `m = 1`.
/// Returns `(m, L1(m), iterations)`.
pub fn solve_measurement_fixed_point(
    scale: f64,
    s: usize,
    n: usize,
    epsilon: f64,
) -> (f64, f64, usize) {
    let mut m = 1.0_f64;
    for it in 1..=FIXED_POINT_MAX_ITER {
        let next = scale * log_factor_nonuniversal(s, n, m.max(0.5), epsilon);
        if (next - m).abs() <= 1e-9 * next.abs().max(1.0) {
            return (
                next,
                log_factor_nonuniversal(s, n, next.max(0.5), epsilon),
                it,
            );
        }
        m = next;
    }
    (
        m,
        log_factor_nonuniversal(s, n, m.max(0.5), epsilon),
        FIXED_POINT_MAX_ITER,
    )
}

/// Evaluates every constant and the right-hand side of the chosen
/// sufficient measurement condition (absolute constant pinned to 1).
pub fn measurement_condition_report(
    p: &ProfileSet,
    u: &UnitaryBasis,
    s: usize,
    delta: f64,
    epsilon: f64,
    mode: ConditionMode,
) -> Result<ConstantsReport> {
    let n = p.n();
    if u.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: u.n(),
        });
    }
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!(
            "sparsity {s} outside 1..={n}"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta {delta} outside (0, 1]"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} outside (0, 1)"
        )));
    }
    let v = u.matrix();
    let pre = prefactor(p);
    let raw_gd = raw_gamma_distinct(p, v)?;
    let raw_gi = raw_gamma_identical(p, v)?;
    let raw_xd = raw_xi_distinct(p);
    let raw_xi = raw_xi_identical(p);
    let (gd, gi, xd, xi) = (pre * raw_gd, pre * raw_gi, pre * raw_xd, pre * raw_xi);

    let governing = match mode {
        ConditionMode::DistinctNonuniversal => gd,
        ConditionMode::DistinctUniversal => xd,
        ConditionMode::IdenticalNonuniversal => gi,
        ConditionMode::IdenticalUniversal => xi,
    };
    let scale = (p.beta() / p.alpha()) * governing * governing * s as f64 / (delta * delta);
    let (rhs, log_factor, iterations) = if mode.is_universal() {
        let l2 = log_factor_universal(s, n, epsilon);
        (scale * l2, l2, 0)
    } else {
        solve_measurement_fixed_point(scale, s, n, epsilon)
    };

    Ok(ConstantsReport {
        mode,
        basis_kind: u.kind(),
        sensors: p.sensors(),
        n,
        s,
        alpha: p.alpha(),
        beta: p.beta(),
        gamma_distinct: gd,
        xi_distinct: xd,
        gamma_identical: gi,
        xi_identical: xi,
        raw_gamma_distinct: raw_gd,
        raw_xi_distinct: raw_xd,
        raw_gamma_identical: raw_gi,
        raw_xi_identical: raw_xi,
        coherence_mu: coherence(u),
        gamma_bar: gamma_bar_block(u, p.sensors()).ok(),
        mu_tilde: mu_tilde(u, p.sensors()),
        delta,
        epsilon,
        log_factor,
        measurement_rhs: rhs,
        fixed_point_iterations: iterations,
        absolute_constant: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ProfileFamily;

    fn basis(kind: BasisKind, n: usize) -> UnitaryBasis {
        UnitaryBasis::new(kind, n).unwrap()
    }

    #[test]
    fn identity_witness_gives_one() {
        for c in [1, 3, 5] {
            let p = ProfileSet::dense(vec![DMatrix::identity(8, 8); c]).unwrap();
            let u = basis(BasisKind::Canonical, 8);
            assert!((gamma_distinct(&p, &u).unwrap() - 1.0).abs() < 1e-12);
            assert!((xi_distinct(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partitioned_distinct_constants() {
        for c in [1, 2, 4, 8] {
            let p = ProfileSet::perfectly_partitioned(c, 64).unwrap();
            let sq = (c as f64).sqrt();
            let canonical = basis(BasisKind::Canonical, 64);
            let fourier = basis(BasisKind::Fourier, 64);
            assert!((gamma_distinct(&p, &canonical).unwrap() - sq).abs() < 1e-12);
            assert!((gamma_distinct(&p, &fourier).unwrap() - 1.0).abs() < 1e-12);
            assert!((xi_distinct(&p) - sq).abs() < 1e-12);
            assert!((gamma_identical(&p, &fourier).unwrap() - 1.0).abs() < 1e-10);
            assert!((gamma_identical(&p, &canonical).unwrap() - sq).abs() < 1e-10);
            assert!((xi_identical(&p) - sq).abs() < 1e-12);
        }
    }

    #[test]
    fn global_profiles_have_unit_xi_distinct() {
        for c in [1, 2, 4, 8, 16, 32] {
            let p = ProfileSet::globally_spread(c, 256, c as u64).unwrap();
            assert_eq!(xi_distinct(&p), 1.0);
        }
    }

    #[test]
    fn single_sensor_identical_equals_distinct() {
        let u = basis(BasisKind::Cosine, 32);
        for fam in [ProfileFamily::Partitioned, ProfileFamily::Global] {
            let p = ProfileSet::family(fam, 1, 32, 2, false).unwrap();
            let gd = gamma_distinct(&p, &u).unwrap();
            let gi = gamma_identical(&p, &u).unwrap();
            assert!((gd - gi).abs() < 1e-12);
        }
    }

    #[test]
    fn single_identity_xi_identical() {
        let p = ProfileSet::dense(vec![DMatrix::identity(6, 6)]).unwrap();
        assert!((xi_identical(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_values() {
        assert_eq!(coherence(&basis(BasisKind::Canonical, 16)), 1.0);
        assert!((coherence(&basis(BasisKind::Fourier, 256)) - 1.0 / 256.0).abs() < 1e-15);
        let haar = basis(BasisKind::HaarWavelet, 256);
        let scan = haar
            .matrix()
            .iter()
            .map(|z| z.re * z.re + z.im * z.im)
            .fold(0.0, f64::max);
        assert_eq!(coherence(&haar), scan);
        assert!((scan - 0.5).abs() < 1e-12);
    }

    #[test]
    fn block_constants() {
        for c in [1, 2, 4, 16] {
            let f = basis(BasisKind::Fourier, 64);
            assert!((gamma_bar_block(&f, c).unwrap() - 1.0).abs() < 1e-12);
            assert!((mu_tilde(&f, c) - 1.0).abs() < 1e-12);
            let i = basis(BasisKind::Canonical, 64);
            assert!((gamma_bar_block(&i, c).unwrap() - (c as f64).sqrt()).abs() < 1e-12);
        }
        assert_eq!(mu_tilde(&basis(BasisKind::Canonical, 64), 16), 4.0);
        let cos = basis(BasisKind::Cosine, 256);
        let expected = (256.0 * coherence(&cos)).sqrt().min(8.0);
        assert_eq!(mu_tilde(&cos, 64), expected);
        assert!(matches!(
            gamma_bar_block(&cos, 3),
            Err(Error::Divisibility { .. })
        ));
        for kind in BasisKind::ALL {
            let u = basis(kind, 64);
            for c in [2, 4, 8] {
                assert!(gamma_bar_block(&u, c).unwrap() <= mu_tilde(&u, c) + 1e-12);
            }
        }
    }

    #[test]
    fn block_constant_equals_gamma_distinct_of_partitioned_set() {
        for kind in BasisKind::ALL {
            let u = basis(kind, 64);
            for c in [2, 4, 8] {
                let p = ProfileSet::perfectly_partitioned(c, 64).unwrap();
                let gd = gamma_distinct(&p, &u).unwrap();
                assert!((gd - gamma_bar_block(&u, c).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_xi_distinct_matches_svd() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mats: Vec<DMatrix<C64>> = (0..3)
            .map(|_| {
                DMatrix::from_fn(9, 9, |_, _| {
                    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                })
            })
            .collect();
        let p = ProfileSet::dense(mats.clone()).unwrap();
        let oracle = mats
            .iter()
            .map(|m| m.clone().svd(false, false).singular_values.max())
            .fold(0.0, f64::max)
            / p.alpha().sqrt();
        assert!((xi_distinct(&p) - oracle).abs() < 1e-10);
    }

    #[test]
    fn condition_report_trivial_case() {
        let p = ProfileSet::dense(vec![DMatrix::identity(16, 16)]).unwrap();
        let u = basis(BasisKind::Canonical, 16);
        let r =
            measurement_condition_report(&p, &u, 1, 1.0, 0.5, ConditionMode::DistinctNonuniversal)
                .unwrap();
        assert!((r.gamma_distinct - 1.0).abs() < 1e-12);
        // beta/alpha = Gamma = delta = s = 1: rhs is the log factor at m*
        assert!((r.measurement_rhs - r.log_factor).abs() < 1e-6);
        assert_eq!(r.absolute_constant, 1.0);
    }

    #[test]
    fn identical_condition_dominates_distinct() {
        let u = basis(BasisKind::Fourier, 64);
        for fam in [
            ProfileFamily::Partitioned,
            ProfileFamily::Banded,
            ProfileFamily::Global,
        ] {
            let p = ProfileSet::family(fam, 4, 64, 1, false).unwrap();
            let d = measurement_condition_report(
                &p,
                &u,
                3,
                0.5,
                0.01,
                ConditionMode::DistinctNonuniversal,
            )
            .unwrap();
            let i = measurement_condition_report(
                &p,
                &u,
                3,
                0.5,
                0.01,
                ConditionMode::IdenticalNonuniversal,
            )
            .unwrap();
            assert!(i.measurement_rhs >= d.measurement_rhs - 1e-9);
            let du = measurement_condition_report(
                &p,
                &u,
                3,
                0.5,
                0.01,
                ConditionMode::DistinctUniversal,
            )
            .unwrap();
            let iu = measurement_condition_report(
                &p,
                &u,
                3,
                0.5,
                0.01,
                ConditionMode::IdenticalUniversal,
            )
            .unwrap();
            assert!(iu.measurement_rhs >= du.measurement_rhs - 1e-9);
        }
    }

    #[test]
    fn fixed_point_converges_quickly() {
        for n in [16, 256, 4096] {
            for s in [1, 4, 16] {
                let scale = 3.0 * s as f64;
                let (m, l1, it) = solve_measurement_fixed_point(scale, s, n, 0.01);
                assert!(it <= 50, "iterations {it}");
                assert!((scale * l1 - m).abs() <= 1.0);
                assert!((scale * log_factor_nonuniversal(s, n, m, 0.01) - m).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn report_validation() {
        let p = ProfileSet::perfectly_partitioned(2, 16).unwrap();
        let u = basis(BasisKind::Fourier, 16);
        assert!(measurement_condition_report(
            &p,
            &u,
            0,
            0.5,
            0.1,
            ConditionMode::DistinctUniversal
        )
        .is_err());
        assert!(measurement_condition_report(
            &p,
            &u,
            2,
            0.0,
            0.1,
            ConditionMode::DistinctUniversal
        )
        .is_err());
        assert!(measurement_condition_report(
            &p,
            &u,
            2,
            0.5,
            1.0,
            ConditionMode::DistinctUniversal
        )
        .is_err());
        let wrong = basis(BasisKind::Fourier, 32);
        assert!(gamma_distinct(&p, &wrong).is_err());
    }

    #[test]
    fn mode_parsing() {
        for m in ConditionMode::ALL {
            assert_eq!(m.name().parse::<ConditionMode>().unwrap(), m);
        }
    }

    #[test]
    fn circulant_matches_diagonal_with_fourier_rotated_basis() {
        for fam in [ProfileFamily::Banded, ProfileFamily::Global] {
            let diag = ProfileSet::family(fam, 4, 32, 9, false).unwrap();
            let circ = ProfileSet::family(fam, 4, 32, 9, true).unwrap();
            let dense = ProfileSet::dense((0..4).map(|c| circ.materialize(c)).collect()).unwrap();
            for kind in [BasisKind::Cosine, BasisKind::HaarWavelet] {
                let u = basis(kind, 32);
                let fu = dft_columns(u.matrix());
                let via_circ = gamma_distinct(&circ, &u).unwrap();
                let via_diag = gamma_distinct_of(&diag, &fu).unwrap();
                let via_dense = gamma_distinct(&dense, &u).unwrap();
                assert!((via_circ - via_diag).abs() < 1e-10);
                assert!((via_circ - via_dense).abs() < 1e-10);
                let gi_circ = gamma_identical(&circ, &u).unwrap();
                let gi_diag = gamma_identical_of(&diag, &fu).unwrap();
                let gi_dense = gamma_identical(&dense, &u).unwrap();
                assert!((gi_circ - gi_diag).abs() < 1e-10);
                assert!((gi_circ - gi_dense).abs() < 1e-10);
            }
            assert!((xi_distinct(&circ) - xi_distinct(&dense)).abs() < 1e-10);
            assert!((xi_identical(&circ) - xi_identical(&dense)).abs() < 1e-10);
        }
    }

    /// `H_c` moves block `c` of `C` equal blocks into block 0, scaled by `sqrt(C)`.
    fn block_shift_set(c: usize, block: usize) -> ProfileSet {
        let n = c * block;
        let scale = C64::new((c as f64).sqrt(), 0.0);
        let mats = (0..c)
            .map(|k| {
                let mut h = DMatrix::<C64>::zeros(n, n);
                for i in 0..block {
                    h[(i, k * block + i)] = scale;
                }
                h
            })
            .collect();
        ProfileSet::dense(mats).unwrap()
    }

    #[test]
    fn block_shift_construction_is_sharp_for_xi_identical() {
        for c in [1, 2, 3, 5] {
            let p = block_shift_set(c, 4);
            assert!((p.alpha() - 1.0).abs() < 1e-12);
            assert!((p.beta() - 1.0).abs() < 1e-12);
            assert!((xi_identical(&p) - c as f64).abs() < 1e-10);
            assert!((xi_distinct(&p) - (c as f64).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_coherence_brackets() {
        for fam in ProfileFamily::ALL {
            for c in [2, 4, 8] {
                let p = ProfileSet::family(fam, c, 64, 5, false).unwrap();
                let ProfileStructure::Diagonal(h) = p.structure() else {
                    unreachable!()
                };
                let q = crate::profiles::overlap_degree(&p).unwrap() as f64;
                let hmax = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
                for kind in BasisKind::ALL {
                    let u = basis(kind, 64);
                    let mu = coherence(&u);
                    let pre = 1.0 / p.alpha().sqrt();
                    let gd = gamma_distinct(&p, &u).unwrap();
                    let gi = gamma_identical(&p, &u).unwrap();
                    assert!(gd <= pre * mu.sqrt() * hmax + 1e-10);
                    assert!((mu * c as f64).sqrt() <= gi + 1e-10, "{fam} {kind} C={c}");
                    assert!(
                        gi <= pre * (mu * q).sqrt() * hmax + 1e-10,
                        "{fam} {kind} C={c}"
                    );
                }
            }
        }
    }
}
