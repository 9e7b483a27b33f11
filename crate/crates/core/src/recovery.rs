//! l1 decoding: `min ||z||_1` subject to `||A z - y||_2 <= eta`, with
//! `||z||_1 = sum_j |z_j|` over complex moduli.
//!
//! The solver is ADMM on a thin SVD of `A` (normalized to unit spectral
//! norm). For `eta = 0` the affine constraint is handled by exact
//! projection; for `eta > 0` the splitting has one copy of `z` for the l1
//! term and one copy of `A z` for the ball. Either way a step costs
//! `O(N r)` after the factorization, `r = rank A`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::l1_norm;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eta: f64,
    pub max_iterations: usize,
    /// Relative tolerance on the ADMM primal and dual residuals.
    pub primal_tol: f64,
    /// Absolute tolerance on `max(0, ||A x - y|| - eta)`.
    pub feasibility_tol: f64,
    pub algorithm_note: String,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eta: 0.0,
            max_iterations: 20_000,
            primal_tol: 1e-7,
            feasibility_tol: 1e-7,
            algorithm_note: "admm, thin-svd projection, residual-balanced penalty".into(),
        }
    }
}

impl SolverConfig {
    pub fn with_eta(eta: f64) -> Self {
        SolverConfig {
            eta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eta must be >= 0, got {}",
                self.eta
            )));
        }
        if !(self.primal_tol > 0.0 && self.feasibility_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::CountTooSmall { count: 0, min: 1 });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub x_hat: DVector<C64>,
    pub iterations: usize,
    /// `max(0, ||A x_hat - y|| - eta)`.
    pub final_feasibility_gap: f64,
    /// `||x_hat||_1`.
    pub objective: f64,
    pub converged: bool,
}

/// `v max(0, 1 - t/|v|)` entrywise.
fn shrink(v: &mut DVector<C64>, t: f64) {
    for z in v.iter_mut() {
        let r = z.norm();
        *z = if r <= t {
            C64::new(0.0, 0.0)
        } else {
            *z * ((r - t) / r)
        };
    }
}

/// Thin factorization of the normalized operator `A / ||A||`.
struct Factor {
    /// `A / ||A||`.
    a: DMatrix<C64>,
    /// Right singular vectors with nonnegligible singular value, `N x r`.
    v: DMatrix<C64>,
    /// Their singular values, normalized.
    sigma: DVector<f64>,
    /// Left singular vectors, `m x r`.
    w: DMatrix<C64>,
    scale: f64,
}

impl Factor {
    fn new(a: &DMatrix<C64>) -> Option<Self> {
        let (m, n) = a.shape();
        let svd = a.clone().svd(true, true);
        let top = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        if top == 0.0 || !top.is_finite() {
            return None;
        }
        let floor = top * f64::EPSILON * m.max(n) as f64;
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > floor)
            .collect();
        let u = svd.u.expect("requested");
        let vt = svd.v_t.expect("requested");
        let scale = 1.0 / top;
        Some(Factor {
            a: a * C64::new(scale, 0.0),
            v: vt.select_rows(&keep).adjoint(),
            sigma: DVector::from_iterator(
                keep.len(),
                keep.iter().map(|&i| svd.singular_values[i] * scale),
            ),
            w: u.select_columns(&keep),
            scale,
        })
    }

    fn rank(&self) -> usize {
        self.sigma.len()
    }
}

struct Best {
    x: Option<DVector<C64>>,
    objective: f64,
}

impl Best {
    fn offer(&mut self, x: &DVector<C64>) {
        let obj = l1_norm(x);
        if obj < self.objective {
            self.objective = obj;
            self.x = Some(x.clone());
        }
    }
}

/// Solves `min ||z||_1 s.t. ||A z - y||_2 <= eta`.
///
/// Fails only on invalid input or when no feasible point exists, i.e. when
/// `y` is farther than `eta` from the range of `A`. Non-convergence is
/// reported through `converged = false` with the best feasible iterate.
pub fn solve_bpdn(
    a: &DMatrix<C64>,
    y: &DVector<C64>,
    cfg: &SolverConfig,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    let (m, n) = a.shape();
    if y.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: y.len(),
        });
    }
    let zero = || DVector::<C64>::zeros(n);
    let trivial = |x: DVector<C64>, gap: f64| RecoveryResult {
        objective: l1_norm(&x),
        x_hat: x,
        iterations: 0,
        final_feasibility_gap: gap,
        converged: true,
    };
    if y.norm() <= cfg.eta {
        return Ok(trivial(zero(), 0.0));
    }
    let Some(f) = Factor::new(a) else {
        return Err(Error::InvalidParameter(format!(
            "eta {} is below the distance {} from y to range(A) = {{0}}",
            cfg.eta,
            y.norm()
        )));
    };
    let ys = y * C64::new(f.scale, 0.0);
    let eta_s = cfg.eta * f.scale;

    // minimum-norm least-squares point and the distance from y to range(A)
    let coeffs = f.w.ad_mul(&ys);
    let x0 = &f.v
        * DVector::from_iterator(
            f.rank(),
            coeffs.iter().zip(f.sigma.iter()).map(|(c, s)| c / *s),
        );
    let dist = (&ys - &f.w * &coeffs).norm() / f.scale;
    if dist > cfg.eta + cfg.feasibility_tol {
        return Err(Error::InvalidParameter(format!(
            "eta {} is below the distance {dist} from y to range(A)",
            cfg.eta
        )));
    }
    if f.rank() == n {
        // unique least-squares point: feasible set is x0 alone when eta = 0
        if cfg.eta == 0.0 {
            let gap = ((a * &x0) - y).norm();
            return Ok(trivial(x0, gap));
        }
    }
    let x0_norm = x0.norm();
    if x0_norm == 0.0 {
        return Ok(trivial(zero(), 0.0));
    }
    let rho0 = (n as f64).sqrt() / x0_norm;

    let (x, iterations, converged, best) = if eta_s == 0.0 {
        basis_pursuit(&f, &x0, rho0, cfg)
    } else {
        denoising(&f, &ys, eta_s, &x0, rho0, cfg)
    };
    let x = if eta_s == 0.0 {
        x
    } else {
        polish(&f, &ys, eta_s, x, &x0)
    };

    let gap_of = |x: &DVector<C64>| ((a * x) - y).norm() - cfg.eta;
    let mut x_hat = x;
    if let Some(bx) = best.x {
        if best.objective < l1_norm(&x_hat) && gap_of(&bx) <= cfg.feasibility_tol {
            x_hat = bx;
        }
    }
    let gap = gap_of(&x_hat).max(0.0);
    Ok(RecoveryResult {
        objective: l1_norm(&x_hat),
        x_hat,
        iterations,
        final_feasibility_gap: gap,
        converged: converged && gap <= cfg.feasibility_tol,
    })
}

const BALANCE_RATIO: f64 = 10.0;
const BALANCE_FACTOR: f64 = 2.0;

/// Adjusts `rho` when one residual dominates; returns the factor the scaled
/// duals must be multiplied by.
fn balance(rho: &mut f64, primal: f64, dual: f64) -> f64 {
    if primal > BALANCE_RATIO * dual {
        *rho *= BALANCE_FACTOR;
        1.0 / BALANCE_FACTOR
    } else if dual > BALANCE_RATIO * primal {
        *rho /= BALANCE_FACTOR;
        BALANCE_FACTOR
    } else {
        1.0
    }
}

/// ADMM for `min ||z||_1 s.t. x in {A x = y}, x = z`. The `x` iterates are
/// exactly feasible.
fn basis_pursuit(
    f: &Factor,
    x0: &DVector<C64>,
    rho0: f64,
    cfg: &SolverConfig,
) -> (DVector<C64>, usize, bool, Best) {
    let n = x0.len();
    let mut rho = rho0;
    let mut x = x0.clone();
    let mut z = x0.clone();
    let mut u = DVector::<C64>::zeros(n);
    let mut coef = DVector::<C64>::zeros(f.rank());
    let mut best = Best {
        x: None,
        objective: f64::INFINITY,
    };
    for it in 1..=cfg.max_iterations {
        // x = P(z - u)
        x.copy_from(&z);
        x -= &u;
        coef.gemv_ad(C64::new(1.0, 0.0), &f.v, &x, C64::new(0.0, 0.0));
        x.gemv(C64::new(-1.0, 0.0), &f.v, &coef, C64::new(1.0, 0.0));
        x += x0;
        best.offer(&x);

        let z_prev = z.clone();
        z.copy_from(&x);
        z += &u;
        shrink(&mut z, 1.0 / rho);
        u += &x;
        u -= &z;

        let primal = (&x - &z).norm();
        let dual = rho * (&z - &z_prev).norm();
        let eps_pri = cfg.primal_tol * x.norm().max(z.norm());
        let eps_dual = cfg.primal_tol * rho * u.norm();
        if primal <= eps_pri && dual <= eps_dual {
            return (x, it, true, best);
        }
        let k = balance(&mut rho, primal, dual);
        if k != 1.0 {
            u *= C64::new(k, 0.0);
        }
    }
    (x, cfg.max_iterations, false, best)
}

/// ADMM with splitting `z = x`, `w = A x`: l1 on `z`, ball constraint on `w`.
fn denoising(
    f: &Factor,
    ys: &DVector<C64>,
    eta: f64,
    x0: &DVector<C64>,
    rho0: f64,
    cfg: &SolverConfig,
) -> (DVector<C64>, usize, bool, Best) {
    let n = x0.len();
    let m = ys.len();
    let one = C64::new(1.0, 0.0);
    let nil = C64::new(0.0, 0.0);
    // (I + A^* A)^{-1} = I - V diag(s^2 / (1 + s^2)) V^*
    let damp: DVector<C64> = f.sigma.map(|s| C64::new(s * s / (1.0 + s * s), 0.0));
    let mut rho = rho0;
    let mut x = x0.clone();
    let mut ax = &f.a * &x;
    let mut z = x.clone();
    let mut w = project_ball(&ax, ys, eta);
    let mut u1 = DVector::<C64>::zeros(n);
    let mut u2 = DVector::<C64>::zeros(m);
    let mut coef = DVector::<C64>::zeros(f.rank());
    let mut rhs = DVector::<C64>::zeros(n);
    let mut tmp_m = DVector::<C64>::zeros(m);
    let mut tmp_n = DVector::<C64>::zeros(n);
    let mut best = Best {
        x: None,
        objective: f64::INFINITY,
    };
    for it in 1..=cfg.max_iterations {
        // x = (I + A^*A)^{-1} (z - u1 + A^*(w - u2))
        tmp_m.copy_from(&w);
        tmp_m -= &u2;
        rhs.gemv_ad(one, &f.a, &tmp_m, nil);
        rhs += &z;
        rhs -= &u1;
        coef.gemv_ad(one, &f.v, &rhs, nil);
        coef.component_mul_assign(&damp);
        x.copy_from(&rhs);
        x.gemv(-one, &f.v, &coef, one);
        ax.gemv(one, &f.a, &x, nil);
        if (&ax - ys).norm() <= eta {
            best.offer(&x);
        }

        let z_prev = z.clone();
        z.copy_from(&x);
        z += &u1;
        shrink(&mut z, 1.0 / rho);

        let w_prev = w.clone();
        tmp_m.copy_from(&ax);
        tmp_m += &u2;
        w = project_ball(&tmp_m, ys, eta);

        u1 += &x;
        u1 -= &z;
        u2 += &ax;
        u2 -= &w;

        let primal = ((&x - &z).norm_squared() + (&ax - &w).norm_squared()).sqrt();
        tmp_m.copy_from(&w);
        tmp_m -= &w_prev;
        tmp_n.gemv_ad(one, &f.a, &tmp_m, nil);
        tmp_n += &z;
        tmp_n -= &z_prev;
        let dual = rho * tmp_n.norm();
        let eps_pri = cfg.primal_tol
            * (x.norm_squared() + ax.norm_squared())
                .sqrt()
                .max((z.norm_squared() + w.norm_squared()).sqrt());
        // x carries no objective, so u1 + A^* u2 vanishes at the optimum;
        // u1 alone is the scaled l1 subgradient
        let eps_dual = cfg.primal_tol * rho * u1.norm();
        if primal <= eps_pri && dual <= eps_dual {
            return (x, it, true, best);
        }
        let k = balance(&mut rho, primal, dual);
        if k != 1.0 {
            u1 *= C64::new(k, 0.0);
            u2 *= C64::new(k, 0.0);
        }
    }
    (x, cfg.max_iterations, false, best)
}

fn project_ball(v: &DVector<C64>, center: &DVector<C64>, radius: f64) -> DVector<C64> {
    let d = v - center;
    let r = d.norm();
    if r <= radius {
        v.clone()
    } else {
        center + d * C64::new(radius / r, 0.0)
    }
}

/// Moves `x` toward the feasible point `x0` just far enough to satisfy
/// `||A x - y|| <= eta`.
fn polish(
    f: &Factor,
    ys: &DVector<C64>,
    eta: f64,
    x: DVector<C64>,
    x0: &DVector<C64>,
) -> DVector<C64> {
    let r0 = &f.a * &x - ys;
    let c = r0.norm_squared() - eta * eta;
    if c <= 0.0 {
        return x;
    }
    let d = &f.a * x0 - ys - &r0;
    let qa = d.norm_squared();
    let qb = 2.0 * r0.dotc(&d).re;
    if qa == 0.0 {
        return x;
    }
    let disc = (qb * qb - 4.0 * qa * c).max(0.0);
    let denom = -qb + disc.sqrt();
    let t = if denom > 0.0 {
        (2.0 * c / denom).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let t = (t * (1.0 + 1e-12)).min(1.0);
    &x + (x0 - &x) * C64::new(t, 0.0)
}

/// `||x - x_hat|| / ||x||`, or `||x_hat||` when `x = 0`.
pub fn relative_error(x: &DVector<C64>, x_hat: &DVector<C64>) -> f64 {
    let nx = x.norm();
    let diff = (x - x_hat).norm();
    if nx == 0.0 {
        x_hat.norm()
    } else {
        diff / nx
    }
}

/// Strict: `relative_error < tol`.
pub fn success(x: &DVector<C64>, x_hat: &DVector<C64>, tol: f64) -> bool {
    relative_error(x, x_hat) < tol
}

/// Best `s`-term approximation error in l1: the sum of the `N - s`
/// smallest moduli.
pub fn sigma_s(x: &DVector<C64>, s: usize) -> f64 {
    let mut mags: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    if s >= mags.len() {
        return 0.0;
    }
    mags.sort_by(|a, b| a.total_cmp(b));
    mags[..mags.len() - s].iter().sum()
}
