//! Sensor profile families and the joint near-isometry constants.
//!
//! A [`ProfileSet`] holds `C` profile matrices `H_1..H_C` together with the
//! extreme eigenvalues `(alpha, beta)` of `C^{-1} sum_c H_c^* H_c`. Diagonal
//! and circulant sets are stored by their diagonals (resp. eigenvalues); a
//! circulant `H_c = F^* diag(lambda_c) F` is never materialized unless asked.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::hermitian_extremes;
use crate::rng::stream_rng;
use crate::transforms::UnitaryDft;
use crate::C64;

/// Entries with modulus at or below this count as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Smallest admissible eigenvalue of the Gram average.
pub const SINGULAR_GRAM_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileFamily {
    Partitioned,
    Banded,
    Global,
    Rademacher,
}

impl ProfileFamily {
    pub const ALL: [ProfileFamily; 4] = [
        ProfileFamily::Partitioned,
        ProfileFamily::Banded,
        ProfileFamily::Global,
        ProfileFamily::Rademacher,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileFamily::Partitioned => "partitioned",
            ProfileFamily::Banded => "banded",
            ProfileFamily::Global => "global",
            ProfileFamily::Rademacher => "rademacher",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, ProfileFamily::Global | ProfileFamily::Rademacher)
    }
}

impl fmt::Display for ProfileFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "partitioned" => Ok(ProfileFamily::Partitioned),
            "banded" => Ok(ProfileFamily::Banded),
            "global" => Ok(ProfileFamily::Global),
            "rademacher" => Ok(ProfileFamily::Rademacher),
            other => Err(Error::InvalidParameter(format!(
                "unknown profile family '{other}' (expected partitioned, banded, global or rademacher)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ProfileStructure {
    /// `H_c = diag(h_c)`.
    Diagonal(Vec<DVector<C64>>),
    /// `H_c = F^* diag(lambda_c) F` with `F` the unitary DFT.
    Circulant(Vec<DVector<C64>>),
    Dense(Vec<DMatrix<C64>>),
}

impl ProfileStructure {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileStructure::Diagonal(_) => "diagonal",
            ProfileStructure::Circulant(_) => "circulant",
            ProfileStructure::Dense(_) => "dense",
        }
    }
}

/// Immutable set of `C` sensor profiles with cached `(alpha, beta)`.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    n: usize,
    structure: ProfileStructure,
    alpha: f64,
    beta: f64,
}

impl ProfileSet {
    fn from_structure(n: usize, structure: ProfileStructure) -> Result<Self> {
        let (alpha, beta) = gram_extremes(n, &structure)?;
        if alpha <= SINGULAR_GRAM_FLOOR {
            return Err(Error::SingularGram {
                min_eigenvalue: alpha,
            });
        }
        Ok(ProfileSet {
            n,
            structure,
            alpha,
            beta,
        })
    }

    /// Diagonal profiles `H_c = diag(h_c)`.
    pub fn diagonal(diagonals: Vec<DVector<C64>>) -> Result<Self> {
        let n = common_len(&diagonals)?;
        Self::from_structure(n, ProfileStructure::Diagonal(diagonals))
    }

    /// Circulant profiles from their DFT eigenvalues.
    pub fn circulant_from_eigs(eigs: Vec<DVector<C64>>) -> Result<Self> {
        let n = common_len(&eigs)?;
        Self::from_structure(n, ProfileStructure::Circulant(eigs))
    }

    /// Arbitrary square profile matrices.
    pub fn dense(mats: Vec<DMatrix<C64>>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or(Error::CountTooSmall { count: 0, min: 1 })?;
        let n = first.nrows();
        if n == 0 {
            return Err(Error::InvalidDimension { n, min: 1 });
        }
        for m in &mats {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: if m.nrows() != n { m.nrows() } else { m.ncols() },
                });
            }
        }
        Self::from_structure(n, ProfileStructure::Dense(mats))
    }

    /// Example (i): `H_c = sqrt(C) P_{I_c}` on contiguous equal blocks.
    pub fn perfectly_partitioned(sensors: usize, n: usize) -> Result<Self> {
        check_count(sensors, 1)?;
        check_divides(sensors, n)?;
        let block = n / sensors;
        let height = C64::new((sensors as f64).sqrt(), 0.0);
        let diagonals = (0..sensors)
            .map(|c| {
                DVector::from_fn(n, |i, _| {
                    if i / block == c {
                        height
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Self::diagonal(diagonals)
    }

    /// Example (ii): smooth compactly supported profiles with a phase ramp.
    ///
    /// Sensor `c` carries a raised-cosine bump centred on block `c` that
    /// reaches half a block into each neighbour, so only adjacent profiles
    /// overlap. The magnitudes are renormalized pointwise so that
    /// `C^{-1} sum_c |h_c|^2 = 1`, and entry `i` is multiplied by
    /// `exp(i ((c-1) 2 pi / C + (i+1) 2 pi / (N C)))`.
    pub fn banded_cosine(sensors: usize, n: usize) -> Result<Self> {
        check_count(sensors, 2)?;
        check_divides(sensors, n)?;
        let block = (n / sensors) as f64;
        let bumps: Vec<Vec<f64>> = (0..sensors)
            .map(|c| {
                let centre = (c as f64 + 0.5) * block - 0.5;
                (0..n)
                    .map(|i| {
                        let t = (i as f64 - centre).abs();
                        if t < block {
                            (PI * t / (2.0 * block)).cos()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let scale = (sensors as f64).sqrt();
        let diagonals = (0..sensors)
            .map(|c| {
                DVector::from_fn(n, |i, _| {
                    let energy: f64 = bumps.iter().map(|b| b[i] * b[i]).sum();
                    let magnitude = scale * bumps[c][i] / energy.sqrt();
                    let theta = c as f64 * 2.0 * PI / sensors as f64
                        + (i + 1) as f64 * 2.0 * PI / (n * sensors) as f64;
                    C64::from_polar(magnitude, theta)
                })
            })
            .collect();
        Self::diagonal(diagonals)
    }

    /// Example (iii): i.i.d. unimodular entries `exp(i phi)`, `phi ~ U[0, 2 pi)`.
    pub fn globally_spread(sensors: usize, n: usize, seed: u64) -> Result<Self> {
        check_count(sensors, 1)?;
        check_dim(n)?;
        let mut rng = stream_rng(seed, 0);
        let diagonals = (0..sensors)
            .map(|_| DVector::from_fn(n, |_, _| exact_unimodular(&mut rng)))
            .collect();
        Self::diagonal(diagonals)
    }

    /// Independent Rademacher diagonals.
    pub fn rademacher_diagonal(sensors: usize, n: usize, seed: u64) -> Result<Self> {
        check_count(sensors, 1)?;
        check_dim(n)?;
        let mut rng = stream_rng(seed, 0);
        let diagonals = (0..sensors)
            .map(|_| {
                DVector::from_fn(n, |_, _| {
                    C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
                })
            })
            .collect();
        Self::diagonal(diagonals)
    }

    /// Builds a family member; `circulant` moves the same vectors into the
    /// eigenvalue domain. `seed` is ignored by deterministic families.
    pub fn family(
        family: ProfileFamily,
        sensors: usize,
        n: usize,
        seed: u64,
        circulant: bool,
    ) -> Result<Self> {
        let set = match family {
            ProfileFamily::Partitioned => Self::perfectly_partitioned(sensors, n)?,
            ProfileFamily::Banded => Self::banded_cosine(sensors, n)?,
            ProfileFamily::Global => Self::globally_spread(sensors, n, seed)?,
            ProfileFamily::Rademacher => Self::rademacher_diagonal(sensors, n, seed)?,
        };
        if circulant {
            set.into_circulant()
        } else {
            Ok(set)
        }
    }

    /// Reinterprets diagonal vectors as circulant eigenvalues.
    pub fn into_circulant(self) -> Result<Self> {
        match self.structure {
            ProfileStructure::Diagonal(v) => Ok(ProfileSet {
                structure: ProfileStructure::Circulant(v),
                ..self
            }),
            _ => Err(Error::Structure {
                expected: "diagonal",
            }),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sensors(&self) -> usize {
        match &self.structure {
            ProfileStructure::Diagonal(v) | ProfileStructure::Circulant(v) => v.len(),
            ProfileStructure::Dense(m) => m.len(),
        }
    }

    pub fn structure(&self) -> &ProfileStructure {
        &self.structure
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Diagonal and circulant profiles are normal; dense ones are tested.
    pub fn is_normal(&self) -> bool {
        match &self.structure {
            ProfileStructure::Dense(mats) => mats.iter().all(|h| {
                let scale = h.norm().max(1.0);
                let defect = (h * h.adjoint() - h.adjoint() * h).norm();
                defect <= 1e-12 * scale * scale
            }),
            _ => true,
        }
    }

    /// Dense `H_c`.
    pub fn materialize(&self, c: usize) -> DMatrix<C64> {
        match &self.structure {
            ProfileStructure::Diagonal(v) => DMatrix::from_diagonal(&v[c]),
            ProfileStructure::Circulant(eigs) => {
                let dft = UnitaryDft::new(self.n);
                let mut m = DMatrix::zeros(self.n, self.n);
                let mut col = vec![C64::new(0.0, 0.0); self.n];
                for k in 0..self.n {
                    col.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                    col[k] = C64::new(1.0, 0.0);
                    apply_circulant(&dft, &eigs[c], &mut col);
                    m.column_mut(k).copy_from_slice(&col);
                }
                m
            }
            ProfileStructure::Dense(m) => m[c].clone(),
        }
    }

    /// `H_c M` for a dense `N x K` matrix `M`, column by column.
    pub fn apply_to_columns(&self, c: usize, m: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.structure {
            ProfileStructure::Diagonal(v) => {
                let h = &v[c];
                DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| h[i] * m[(i, j)])
            }
            ProfileStructure::Circulant(eigs) => {
                let dft = UnitaryDft::new(self.n);
                let mut out = m.clone();
                let mut col = vec![C64::new(0.0, 0.0); self.n];
                for j in 0..m.ncols() {
                    col.copy_from_slice(m.column(j).as_slice());
                    apply_circulant(&dft, &eigs[c], &mut col);
                    out.column_mut(j).copy_from_slice(&col);
                }
                out
            }
            ProfileStructure::Dense(mats) => &mats[c] * m,
        }
    }
}

fn apply_circulant(dft: &UnitaryDft, eig: &DVector<C64>, buf: &mut [C64]) {
    dft.forward(buf);
    buf.iter_mut().zip(eig.iter()).for_each(|(v, l)| *v *= l);
    dft.inverse(buf);
}

fn check_count(sensors: usize, min: usize) -> Result<()> {
    if sensors < min {
        return Err(Error::CountTooSmall {
            count: sensors,
            min,
        });
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension { n, min: 1 });
    }
    Ok(())
}

fn check_divides(sensors: usize, n: usize) -> Result<()> {
    check_dim(n)?;
    if !n.is_multiple_of(sensors) {
        return Err(Error::Divisibility {
            what: "n",
            value: n,
            divisor: sensors,
        });
    }
    Ok(())
}

fn common_len(vs: &[DVector<C64>]) -> Result<usize> {
    let first = vs
        .first()
        .ok_or(Error::CountTooSmall { count: 0, min: 1 })?;
    let n = first.len();
    check_dim(n)?;
    if let Some(bad) = vs.iter().find(|v| v.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    Ok(n)
}

/// Uniform phase, redrawn until both `|z|` and `|z|^2` round to exactly 1.
fn exact_unimodular<R: Rng>(rng: &mut R) -> C64 {
    loop {
        let z = C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
        if z.norm_sqr() == 1.0 && z.norm() == 1.0 {
            return z;
        }
    }
}

/// Pointwise `C^{-1} sum_c |v_c|^2`.
pub(crate) fn mean_energy(vs: &[DVector<C64>]) -> Vec<f64> {
    let n = vs[0].len();
    let c = vs.len() as f64;
    (0..n)
        .map(|i| vs.iter().map(|v| v[i].norm_sqr()).sum::<f64>() / c)
        .collect()
}

fn gram_extremes(n: usize, structure: &ProfileStructure) -> Result<(f64, f64)> {
    match structure {
        ProfileStructure::Diagonal(v) | ProfileStructure::Circulant(v) => {
            let e = mean_energy(v);
            Ok(e.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                }))
        }
        ProfileStructure::Dense(mats) => {
            let mut g = DMatrix::<C64>::zeros(n, n);
            for h in mats {
                g += h.adjoint() * h;
            }
            g /= C64::new(mats.len() as f64, 0.0);
            // symmetrize away rounding before the Hermitian solver
            let g = (&g + g.adjoint()) * C64::new(0.5, 0.0);
            Ok(hermitian_extremes(&g))
        }
    }
}

/// `(alpha, beta)`: extreme eigenvalues of `C^{-1} sum_c H_c^* H_c`.
pub fn joint_near_isometry(p: &ProfileSet) -> Result<(f64, f64)> {
    let (alpha, beta) = gram_extremes(p.n, &p.structure)?;
    if alpha <= SINGULAR_GRAM_FLOOR {
        return Err(Error::SingularGram {
            min_eigenvalue: alpha,
        });
    }
    Ok((alpha, beta))
}

/// Largest number of profiles whose supports meet the support of any one
/// profile (the profile itself included).
pub fn overlap_degree(p: &ProfileSet) -> Result<usize> {
    let ProfileStructure::Diagonal(v) = &p.structure else {
        return Err(Error::Structure {
            expected: "diagonal",
        });
    };
    let supports: Vec<Vec<bool>> = v
        .iter()
        .map(|h| h.iter().map(|z| z.norm() > SUPPORT_THRESHOLD).collect())
        .collect();
    let meets = |a: &[bool], b: &[bool]| a.iter().zip(b).any(|(x, y)| *x && *y);
    Ok(supports
        .iter()
        .map(|sc| supports.iter().filter(|sd| meets(sc, sd)).count())
        .max()
        .unwrap_or(0))
}
