//! Unitary sparsity bases.
//!
//! A [`UnitaryBasis`] is the synthesis operator `U`: coefficients `x` map to
//! the signal `f = U x`. Each kind has an `O(N log N)` (or `O(N)`) fast path
//! for `U x` and `U^* y`; the dense matrix is only built when asked for.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Number of filter-bank stages used by the Haar basis.
pub const HAAR_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Canonical,
    Fourier,
    Cosine,
    HaarWavelet,
}

impl BasisKind {
    pub const ALL: [BasisKind; 4] = [
        BasisKind::Canonical,
        BasisKind::Fourier,
        BasisKind::Cosine,
        BasisKind::HaarWavelet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Canonical => "canonical",
            BasisKind::Fourier => "fourier",
            BasisKind::Cosine => "cosine",
            BasisKind::HaarWavelet => "haar",
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "canonical" => Ok(BasisKind::Canonical),
            "fourier" => Ok(BasisKind::Fourier),
            "cosine" => Ok(BasisKind::Cosine),
            "haar" | "wavelet" => Ok(BasisKind::HaarWavelet),
            other => Err(Error::InvalidParameter(format!(
                "unknown basis '{other}' (expected canonical, fourier, cosine or haar)"
            ))),
        }
    }
}

/// Unitary DFT of a fixed length.
///
/// `forward` applies `F` with `F[j,k] = exp(-2 pi i jk/N)/sqrt(N)`, `inverse`
/// applies `F^*`.
#[derive(Clone)]
pub struct UnitaryDft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl UnitaryDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        UnitaryDft {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
        scale(buf, 1.0 / (self.n as f64).sqrt());
    }

    pub fn inverse(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
        scale(buf, 1.0 / (self.n as f64).sqrt());
    }
}

impl fmt::Debug for UnitaryDft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitaryDft").field("n", &self.n).finish()
    }
}

fn scale(buf: &mut [C64], s: f64) {
    buf.iter_mut().for_each(|v| *v *= s);
}

/// An `N x N` unitary synthesis transform.
#[derive(Debug, Clone)]
pub struct UnitaryBasis {
    kind: BasisKind,
    n: usize,
    wavelet_levels: usize,
    dft: Option<UnitaryDft>,
    matrix: OnceLock<DMatrix<C64>>,
}

impl UnitaryBasis {
    /// Builds the basis of the given kind.
    ///
    /// Fourier is the inverse unitary DFT, cosine the orthonormal DCT-III and
    /// the wavelet basis is periodic Haar synthesis with [`HAAR_LEVELS`]
    /// stages, which needs `n = 2^k` with `k >= 5`.
    pub fn new(kind: BasisKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension { n, min: 2 });
        }
        let mut wavelet_levels = 0;
        let dft = match kind {
            BasisKind::Canonical => None,
            BasisKind::Fourier => Some(UnitaryDft::new(n)),
            BasisKind::Cosine => Some(UnitaryDft::new(2 * n)),
            BasisKind::HaarWavelet => {
                if !n.is_power_of_two() {
                    return Err(Error::UnsupportedDimension {
                        kind: "haar",
                        n,
                        reason: "length must be a power of two",
                    });
                }
                if n.trailing_zeros() < 5 {
                    return Err(Error::UnsupportedDimension {
                        kind: "haar",
                        n,
                        reason: "a 4-level decomposition needs n >= 32",
                    });
                }
                wavelet_levels = HAAR_LEVELS;
                None
            }
        };
        Ok(UnitaryBasis {
            kind,
            n,
            wavelet_levels,
            dft,
            matrix: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn wavelet_levels(&self) -> usize {
        self.wavelet_levels
    }

    /// The dense matrix, built on first use and cached.
    pub fn matrix(&self) -> &DMatrix<C64> {
        self.matrix.get_or_init(|| {
            if self.kind == BasisKind::Canonical {
                return DMatrix::identity(self.n, self.n);
            }
            let mut m = DMatrix::zeros(self.n, self.n);
            let mut col = vec![C64::new(0.0, 0.0); self.n];
            for k in 0..self.n {
                col.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                col[k] = C64::new(1.0, 0.0);
                self.synthesize(&mut col);
                m.column_mut(k).copy_from_slice(&col);
            }
            m
        })
    }

    /// `U x`.
    pub fn apply(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        self.check_len(x.len())?;
        let mut buf = x.as_slice().to_vec();
        self.synthesize(&mut buf);
        Ok(DVector::from_vec(buf))
    }

    /// `U^* y`.
    pub fn apply_adjoint(&self, y: &DVector<C64>) -> Result<DVector<C64>> {
        self.check_len(y.len())?;
        let mut buf = y.as_slice().to_vec();
        self.analyze(&mut buf);
        Ok(DVector::from_vec(buf))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }

    /// In-place `U x`; `buf.len()` must equal `n`.
    pub(crate) fn synthesize(&self, buf: &mut [C64]) {
        match self.kind {
            BasisKind::Canonical => {}
            BasisKind::Fourier => self.dft.as_ref().expect("plan").inverse(buf),
            BasisKind::Cosine => self.dct3(buf),
            BasisKind::HaarWavelet => haar_synthesis(buf, self.wavelet_levels),
        }
    }

    /// In-place `U^* y`.
    pub(crate) fn analyze(&self, buf: &mut [C64]) {
        match self.kind {
            BasisKind::Canonical => {}
            BasisKind::Fourier => self.dft.as_ref().expect("plan").forward(buf),
            BasisKind::Cosine => self.dct2(buf),
            BasisKind::HaarWavelet => haar_analysis(buf, self.wavelet_levels),
        }
    }

    fn dct_weight(&self, k: usize) -> f64 {
        let n = self.n as f64;
        if k == 0 {
            (1.0 / n).sqrt()
        } else {
            (2.0 / n).sqrt()
        }
    }

    // x_j = sum_k w_k X_k cos(pi (2j+1) k / 2N), evaluated as the real part of a
    // length-2N inverse FFT; real and imaginary inputs are handled separately
    // because the kernel is real.
    fn dct3(&self, buf: &mut [C64]) {
        let n = self.n;
        let plan = self.dft.as_ref().expect("plan");
        let mut work = vec![C64::new(0.0, 0.0); 2 * n];
        let mut out = vec![C64::new(0.0, 0.0); n];
        for part in 0..2 {
            for (k, w) in work.iter_mut().enumerate() {
                *w = if k < n {
                    let v = if part == 0 { buf[k].re } else { buf[k].im };
                    let phase = std::f64::consts::PI * k as f64 / (2.0 * n as f64);
                    C64::from_polar(self.dct_weight(k) * v, phase)
                } else {
                    C64::new(0.0, 0.0)
                };
            }
            plan.inverse.process(&mut work);
            for j in 0..n {
                let v = work[j].re;
                if part == 0 {
                    out[j].re = v;
                } else {
                    out[j].im = v;
                }
            }
        }
        buf.copy_from_slice(&out);
    }

    // X_k = w_k sum_j x_j cos(pi (2j+1) k / 2N).
    fn dct2(&self, buf: &mut [C64]) {
        let n = self.n;
        let plan = self.dft.as_ref().expect("plan");
        let mut work = vec![C64::new(0.0, 0.0); 2 * n];
        let mut out = vec![C64::new(0.0, 0.0); n];
        for part in 0..2 {
            for (j, w) in work.iter_mut().enumerate() {
                *w = if j < n {
                    C64::new(if part == 0 { buf[j].re } else { buf[j].im }, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
            }
            plan.forward.process(&mut work);
            for k in 0..n {
                let phase = -std::f64::consts::PI * k as f64 / (2.0 * n as f64);
                let v = self.dct_weight(k) * (work[k] * C64::from_polar(1.0, phase)).re;
                if part == 0 {
                    out[k].re = v;
                } else {
                    out[k].im = v;
                }
            }
        }
        buf.copy_from_slice(&out);
    }
}

/// Alias matching the construction vocabulary used by the CLI.
pub fn build_basis(kind: BasisKind, n: usize) -> Result<UnitaryBasis> {
    UnitaryBasis::new(kind, n)
}

// Coefficient layout after `levels` stages on length n:
// [approx (n/2^L) | detail L | ... | detail 2 (n/4) | detail 1 (n/2)].
fn haar_analysis(buf: &mut [C64], levels: usize) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut len = buf.len();
    let mut tmp = vec![C64::new(0.0, 0.0); len];
    for _ in 0..levels {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (buf[2 * i], buf[2 * i + 1]);
            tmp[i] = (a + b) * r;
            tmp[half + i] = (a - b) * r;
        }
        buf[..len].copy_from_slice(&tmp[..len]);
        len = half;
    }
}

fn haar_synthesis(buf: &mut [C64], levels: usize) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let n = buf.len();
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut len = n >> (levels - 1);
    for _ in 0..levels {
        let half = len / 2;
        for i in 0..half {
            let (a, d) = (buf[i], buf[half + i]);
            tmp[2 * i] = (a + d) * r;
            tmp[2 * i + 1] = (a - d) * r;
        }
        buf[..len].copy_from_slice(&tmp[..len]);
        len *= 2;
    }
}
