//! Stacked measurement matrices for the four sampling architectures.
//!
//! Sensor `c` always draws its random factor from stream `c` of the master
//! seed; identical sampling reuses stream 0 for every sensor. With this
//! discipline distinct and identical sampling coincide at `C = 1`, and
//! block-diagonal sampling reproduces distinct sampling with partitioned
//! profiles.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::ProfileSet;
use crate::rng::stream_rng;
use crate::transforms::UnitaryBasis;
use crate::C64;

/// Entry distribution of the random factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryDist {
    #[default]
    Gaussian,
    Rademacher,
}

impl EntryDist {
    pub fn name(self) -> &'static str {
        match self {
            EntryDist::Gaussian => "gaussian",
            EntryDist::Rademacher => "rademacher",
        }
    }

    fn code(self) -> u8 {
        match self {
            EntryDist::Gaussian => 0,
            EntryDist::Rademacher => 1,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(EntryDist::Gaussian),
            1 => Ok(EntryDist::Rademacher),
            _ => Err(Error::Format(format!(
                "unknown entry distribution code {code}"
            ))),
        }
    }
}

impl fmt::Display for EntryDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntryDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(EntryDist::Gaussian),
            "rademacher" | "bernoulli" => Ok(EntryDist::Rademacher),
            other => Err(Error::InvalidParameter(format!(
                "unknown entry distribution '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    Distinct,
    DistinctVaried,
    Identical,
    BlockDiagonal,
}

impl SamplingMode {
    pub const ALL: [SamplingMode; 4] = [
        SamplingMode::Distinct,
        SamplingMode::DistinctVaried,
        SamplingMode::Identical,
        SamplingMode::BlockDiagonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplingMode::Distinct => "distinct",
            SamplingMode::DistinctVaried => "distinct-varied",
            SamplingMode::Identical => "identical",
            SamplingMode::BlockDiagonal => "block-diagonal",
        }
    }

    fn code(self) -> u8 {
        match self {
            SamplingMode::Distinct => 0,
            SamplingMode::DistinctVaried => 1,
            SamplingMode::Identical => 2,
            SamplingMode::BlockDiagonal => 3,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        SamplingMode::ALL
            .into_iter()
            .find(|m| m.code() == code)
            .ok_or_else(|| Error::Format(format!("unknown sampling mode code {code}")))
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        SamplingMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown sampling mode '{s}'")))
    }
}

/// A measurement matrix together with everything needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    pub matrix: DMatrix<C64>,
    pub mode: SamplingMode,
    pub row_counts: Vec<usize>,
    pub seed: u64,
    pub entry_dist: EntryDist,
    pub profile_ref: String,
    pub basis_ref: String,
}

impl MeasurementEnsemble {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn sensors(&self) -> usize {
        self.row_counts.len()
    }

    /// Row offset of sensor `c`'s block.
    pub fn block_offset(&self, c: usize) -> usize {
        self.row_counts[..c].iter().sum()
    }

    pub fn block(&self, c: usize) -> DMatrix<C64> {
        self.matrix
            .rows(self.block_offset(c), self.row_counts[c])
            .into_owned()
    }

    pub fn with_refs(
        mut self,
        profile_ref: impl Into<String>,
        basis_ref: impl Into<String>,
    ) -> Self {
        self.profile_ref = profile_ref.into();
        self.basis_ref = basis_ref.into();
        self
    }
}

/// Draws a `rows x cols` matrix of i.i.d. entries from stream `stream` of
/// `seed`, filled row by row.
pub fn subgaussian_stream(
    rows: usize,
    cols: usize,
    dist: EntryDist,
    seed: u64,
    stream: u64,
) -> DMatrix<f64> {
    let mut rng = stream_rng(seed, stream);
    let values: Vec<f64> = match dist {
        EntryDist::Gaussian => (0..rows * cols)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect(),
        EntryDist::Rademacher => (0..rows * cols)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect(),
    };
    DMatrix::from_row_slice(rows, cols, &values)
}

/// I.i.d. zero-mean unit-variance entries, deterministic in `seed`.
pub fn subgaussian_matrix(rows: usize, cols: usize, dist: EntryDist, seed: u64) -> DMatrix<f64> {
    subgaussian_stream(rows, cols, dist, seed, 0)
}

/// `R * W` for real `R` and complex `W` via two real products.
fn real_times_complex(r: &DMatrix<f64>, w: &DMatrix<C64>) -> DMatrix<C64> {
    let re = r * w.map(|z| z.re);
    let im = r * w.map(|z| z.im);
    re.zip_map(&im, C64::new)
}

fn check_dims(p: &ProfileSet, u: &UnitaryBasis) -> Result<()> {
    if p.n() != u.n() {
        return Err(Error::LengthMismatch {
            expected: p.n(),
            found: u.n(),
        });
    }
    Ok(())
}

fn equal_split(m: usize, sensors: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::CountTooSmall { count: 0, min: 1 });
    }
    if !m.is_multiple_of(sensors) {
        return Err(Error::Divisibility {
            what: "m",
            value: m,
            divisor: sensors,
        });
    }
    Ok(m / sensors)
}

fn stack(
    p: &ProfileSet,
    u: &UnitaryBasis,
    row_counts: &[usize],
    scales: &[f64],
    dist: EntryDist,
    seed: u64,
    shared: bool,
) -> DMatrix<C64> {
    let n = p.n();
    let m: usize = row_counts.iter().sum();
    let mut out = DMatrix::<C64>::zeros(m, n);
    let shared_draw = shared.then(|| subgaussian_stream(row_counts[0], n, dist, seed, 0));
    let mut offset = 0;
    for (c, (&rows, &scale)) in row_counts.iter().zip(scales).enumerate() {
        let hu = p.apply_to_columns(c, u.matrix());
        let block = match &shared_draw {
            Some(a) => real_times_complex(a, &hu),
            None => real_times_complex(&subgaussian_stream(rows, n, dist, seed, c as u64), &hu),
        };
        out.rows_mut(offset, rows)
            .copy_from(&(block * C64::new(scale, 0.0)));
        offset += rows;
    }
    out
}

fn ensemble(
    matrix: DMatrix<C64>,
    mode: SamplingMode,
    row_counts: Vec<usize>,
    dist: EntryDist,
    seed: u64,
    u: &UnitaryBasis,
) -> MeasurementEnsemble {
    MeasurementEnsemble {
        matrix,
        mode,
        row_counts,
        seed,
        entry_dist: dist,
        profile_ref: String::new(),
        basis_ref: format!("{}:{}", u.kind(), u.n()),
    }
}

/// `A = m^{-1/2} [A_1 H_1 U; ...; A_C H_C U]` with independent `A_c`.
pub fn assemble_distinct(
    p: &ProfileSet,
    u: &UnitaryBasis,
    m: usize,
    dist: EntryDist,
    seed: u64,
) -> Result<MeasurementEnsemble> {
    check_dims(p, u)?;
    let c = p.sensors();
    let per = equal_split(m, c)?;
    let counts = vec![per; c];
    let scales = vec![1.0 / (m as f64).sqrt(); c];
    let a = stack(p, u, &counts, &scales, dist, seed, false);
    Ok(ensemble(a, SamplingMode::Distinct, counts, dist, seed, u))
}

/// Distinct sampling with `m_c` rows for sensor `c`, block scaled by `(C m_c)^{-1/2}`.
pub fn assemble_distinct_varied(
    p: &ProfileSet,
    u: &UnitaryBasis,
    row_counts: &[usize],
    dist: EntryDist,
    seed: u64,
) -> Result<MeasurementEnsemble> {
    check_dims(p, u)?;
    let c = p.sensors();
    if row_counts.len() != c {
        return Err(Error::LengthMismatch {
            expected: c,
            found: row_counts.len(),
        });
    }
    if let Some(sensor) = row_counts.iter().position(|&r| r == 0) {
        return Err(Error::EmptySensor { sensor });
    }
    let scales: Vec<f64> = row_counts
        .iter()
        .map(|&r| 1.0 / ((c * r) as f64).sqrt())
        .collect();
    let a = stack(p, u, row_counts, &scales, dist, seed, false);
    Ok(ensemble(
        a,
        SamplingMode::DistinctVaried,
        row_counts.to_vec(),
        dist,
        seed,
        u,
    ))
}

/// `A = m^{-1/2} [A H_1 U; ...; A H_C U]` with one shared `(m/C) x N` factor.
pub fn assemble_identical(
    p: &ProfileSet,
    u: &UnitaryBasis,
    m: usize,
    dist: EntryDist,
    seed: u64,
) -> Result<MeasurementEnsemble> {
    check_dims(p, u)?;
    let c = p.sensors();
    let per = equal_split(m, c)?;
    let counts = vec![per; c];
    let scales = vec![1.0 / (m as f64).sqrt(); c];
    let a = stack(p, u, &counts, &scales, dist, seed, true);
    Ok(ensemble(a, SamplingMode::Identical, counts, dist, seed, u))
}

/// The real block-diagonal factor `sqrt(C/m) diag(Phi_1, ..., Phi_C)` before `U`.
///
/// `Phi_c` is the `c`-th column block of an `(m/C) x N` draw from stream `c`.
pub fn block_diagonal_factor(
    n: usize,
    sensors: usize,
    m: usize,
    dist: EntryDist,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if sensors == 0 {
        return Err(Error::CountTooSmall { count: 0, min: 1 });
    }
    let per = equal_split(m, sensors)?;
    if !n.is_multiple_of(sensors) {
        return Err(Error::Divisibility {
            what: "n",
            value: n,
            divisor: sensors,
        });
    }
    let width = n / sensors;
    let scale = (sensors as f64 / m as f64).sqrt();
    let mut out = DMatrix::<f64>::zeros(m, n);
    for c in 0..sensors {
        let full = subgaussian_stream(per, n, dist, seed, c as u64);
        out.view_mut((c * per, c * width), (per, width))
            .copy_from(&(full.columns(c * width, width) * scale));
    }
    Ok(out)
}

/// `A = sqrt(C/m) diag(Phi_1, ..., Phi_C) U`.
pub fn assemble_block_diagonal(
    u: &UnitaryBasis,
    sensors: usize,
    m: usize,
    dist: EntryDist,
    seed: u64,
) -> Result<MeasurementEnsemble> {
    let n = u.n();
    let factor = block_diagonal_factor(n, sensors, m, dist, seed)?;
    let per = m / sensors;
    let width = n / sensors;
    let v = u.matrix();
    let mut a = DMatrix::<C64>::zeros(m, n);
    for c in 0..sensors {
        let phi = factor.view((c * per, c * width), (per, width)).into_owned();
        let rows = v.rows(c * width, width).into_owned();
        a.rows_mut(c * per, per)
            .copy_from(&real_times_complex(&phi, &rows));
    }
    Ok(ensemble(
        a,
        SamplingMode::BlockDiagonal,
        vec![per; sensors],
        dist,
        seed,
        u,
    ))
}

const MAGIC: &[u8; 8] = b"MSENSEMB";
const FORMAT_VERSION: u32 = 1;

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = r.read_u32::<LittleEndian>()? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

impl MeasurementEnsemble {
    /// Little-endian container: header (magic, version, mode, distribution,
    /// dimensions, seed, row counts, references) followed by the matrix as
    /// row-major `f64` pairs `(re, im)`.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u8(self.mode.code())?;
        w.write_u8(self.entry_dist.code())?;
        w.write_u64::<LittleEndian>(self.rows() as u64)?;
        w.write_u64::<LittleEndian>(self.cols() as u64)?;
        w.write_u64::<LittleEndian>(self.seed)?;
        w.write_u64::<LittleEndian>(self.row_counts.len() as u64)?;
        for &r in &self.row_counts {
            w.write_u64::<LittleEndian>(r as u64)?;
        }
        write_str(w, &self.profile_ref)?;
        write_str(w, &self.basis_ref)?;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.matrix[(i, j)];
                w.write_f64::<LittleEndian>(z.re)?;
                w.write_f64::<LittleEndian>(z.im)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let mode = SamplingMode::from_code(r.read_u8()?)?;
        let entry_dist = EntryDist::from_code(r.read_u8()?)?;
        let rows = r.read_u64::<LittleEndian>()? as usize;
        let cols = r.read_u64::<LittleEndian>()? as usize;
        let seed = r.read_u64::<LittleEndian>()?;
        let sensors = r.read_u64::<LittleEndian>()? as usize;
        let row_counts = (0..sensors)
            .map(|_| r.read_u64::<LittleEndian>().map(|v| v as usize))
            .collect::<std::io::Result<Vec<_>>>()?;
        if row_counts.iter().sum::<usize>() != rows {
            return Err(Error::Format("row counts do not sum to rows".into()));
        }
        let profile_ref = read_str(r)?;
        let basis_ref = read_str(r)?;
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let re = r.read_f64::<LittleEndian>()?;
            let im = r.read_f64::<LittleEndian>()?;
            values.push(C64::new(re, im));
        }
        Ok(MeasurementEnsemble {
            matrix: DMatrix::from_row_slice(rows, cols, &values),
            mode,
            row_counts,
            seed,
            entry_dist,
            profile_ref,
            basis_ref,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(&mut &bytes[..])
    }
}
