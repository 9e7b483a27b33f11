//! Empirical asymmetric restricted isometry constants.
//!
//! `alpha_s` and `beta_s` are the extreme values of `||A x||^2 / ||x||^2`
//! over nonzero `s`-sparse `x`. The exhaustive method is exact up to
//! floating point; the sampled method only ever reports an interval inside
//! the true one.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::hermitian_extremes;
use crate::rng::stream_rng;
use crate::C64;

/// Largest number of supports the exhaustive search will visit.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// `(sqrt 2 + 1) / (sqrt 2 - 1) = 3 + 2 sqrt 2`.
pub fn sufficiency_threshold() -> f64 {
    (2f64.sqrt() + 1.0) / (2f64.sqrt() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AricMethod {
    Exhaustive,
    Sampled,
}

impl fmt::Display for AricMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AricMethod::Exhaustive => "exhaustive",
            AricMethod::Sampled => "sampled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AricEstimate {
    pub s: usize,
    pub alpha_s: f64,
    pub beta_s: f64,
    pub method: AricMethod,
    pub supports_checked: u64,
}

impl AricEstimate {
    /// `beta_s / alpha_s`, infinite when `alpha_s` vanishes.
    pub fn ratio(&self) -> f64 {
        if self.alpha_s <= 0.0 {
            f64::INFINITY
        } else {
            self.beta_s / self.alpha_s
        }
    }

    /// Symmetric constant of the rescaled matrix `sqrt(2/(alpha+beta)) A`.
    pub fn symmetric_constant(&self) -> f64 {
        (self.beta_s - self.alpha_s) / (self.beta_s + self.alpha_s)
    }
}

/// True iff `beta / alpha < (sqrt 2 + 1)/(sqrt 2 - 1)` for an estimate of order `2s`.
pub fn recovery_sufficient(est: &AricEstimate) -> bool {
    est.ratio() < sufficiency_threshold()
}

/// `binom(n, k)` without overflow for the sizes that matter here.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn check_order(n: usize, s: usize) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!(
            "order {s} outside 1..={n}"
        )));
    }
    Ok(())
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for pos in (0..k).rev() {
        if idx[pos] < n - k + pos {
            idx[pos] += 1;
            for q in pos + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact ARICs over all `s`-subsets, via eigenvalues of the `s x s` Gram blocks.
pub fn aric_exhaustive(a: &DMatrix<C64>, s: usize) -> Result<AricEstimate> {
    let n = a.ncols();
    check_order(n, s)?;
    let count = binomial(n, s);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::CombinatorialBlowup {
            n,
            s,
            count,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let g = a.adjoint() * a;
    let (lo, hi) = (0..=n - s)
        .into_par_iter()
        .map(|first| {
            let mut rest: Vec<usize> = (first + 1..first + s).collect();
            let mut sub = DMatrix::<C64>::zeros(s, s);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            loop {
                let support = |k: usize| if k == 0 { first } else { rest[k - 1] };
                for p in 0..s {
                    for q in 0..s {
                        sub[(p, q)] = g[(support(p), support(q))];
                    }
                }
                let (l, h) = hermitian_extremes(&sub);
                lo = lo.min(l);
                hi = hi.max(h);
                if rest.is_empty() || !next_combination(&mut rest, n) {
                    break;
                }
            }
            (lo, hi)
        })
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |x, y| (x.0.min(y.0), x.1.max(y.1)),
        );
    Ok(AricEstimate {
        s,
        alpha_s: lo.max(0.0),
        beta_s: hi,
        method: AricMethod::Exhaustive,
        supports_checked: count as u64,
    })
}

fn energy(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Running extremes of `||A x||^2 / ||x||^2` over `trials` random `s`-sparse
/// `x` with uniform support and complex Gaussian coefficients.
pub fn aric_sampled(a: &DMatrix<C64>, s: usize, trials: usize, seed: u64) -> Result<AricEstimate> {
    let n = a.ncols();
    check_order(n, s)?;
    if trials == 0 {
        return Err(Error::CountTooSmall { count: 0, min: 1 });
    }
    let mut rng = stream_rng(seed, 0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut x = DVector::<C64>::zeros(s);
    for _ in 0..trials {
        let mut support = index::sample(&mut rng, n, s).into_vec();
        support.sort_unstable();
        for v in x.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v = C64::new(re, im);
        }
        let sub = a.select_columns(&support);
        let ratio = energy(&(sub * &x)) / energy(&x);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok(AricEstimate {
        s,
        alpha_s: lo,
        beta_s: hi,
        method: AricMethod::Sampled,
        supports_checked: trials as u64,
    })
}
