//! Phase-transition experiments: empirical success of noiseless l1 recovery
//! over a grid of undersampling ratios `m/(CN)` and sparsity ratios `s/N`.
//!
//! Grid column `j` (1-based) sits at `m/(CN) = j/cols` and row `i` at
//! `s/N = i/rows`. Counts are rounded as `m = round(j/cols * C N)` snapped
//! up to a multiple of `C`, and `s = max(1, round(i/rows * N))`.
//!
//! Every (cell, trial) pair derives its own seeds from the master seed, so
//! results do not depend on the thread count.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{
    assemble_block_diagonal, assemble_distinct, assemble_identical, EntryDist,
};
use crate::profiles::{ProfileFamily, ProfileSet};
use crate::recovery::{solve_bpdn, success, SolverConfig};
use crate::rng::{derive_seed, stream_rng};
use crate::transforms::{BasisKind, UnitaryBasis};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentSampling {
    Distinct,
    Identical,
    /// Block-diagonal matrices; the profile family is ignored.
    BlockDiagonal,
}

impl ExperimentSampling {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentSampling::Distinct => "distinct",
            ExperimentSampling::Identical => "identical",
            ExperimentSampling::BlockDiagonal => "block-diagonal",
        }
    }
}

impl fmt::Display for ExperimentSampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentSampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "distinct" => Ok(ExperimentSampling::Distinct),
            "identical" => Ok(ExperimentSampling::Identical),
            "block-diagonal" => Ok(ExperimentSampling::BlockDiagonal),
            other => Err(Error::InvalidParameter(format!(
                "unknown sampling '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Number of sparsity levels (grid rows).
    pub grid_rows: usize,
    /// Number of undersampling levels (grid columns).
    pub grid_cols: usize,
    pub trials: usize,
    pub tol: f64,
    pub sensors: Vec<usize>,
    pub family: ProfileFamily,
    pub basis: BasisKind,
    pub sampling: ExperimentSampling,
    pub entry_dist: EntryDist,
    /// Use circulant profiles with the family's vectors as eigenvalues.
    pub circulant: bool,
    /// Draw a new measurement matrix for every trial; otherwise one matrix
    /// per cell is reused across its trials.
    pub fresh_ensemble_per_trial: bool,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 128,
            grid_rows: 50,
            grid_cols: 50,
            trials: 20,
            tol: 1e-3,
            sensors: vec![1, 2, 4],
            family: ProfileFamily::Global,
            basis: BasisKind::Canonical,
            sampling: ExperimentSampling::Distinct,
            entry_dist: EntryDist::Gaussian,
            circulant: false,
            fresh_ensemble_per_trial: true,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// N = 64, 16 x 16 grid, 10 trials.
    pub fn scaled_down() -> Self {
        ExperimentConfig {
            n: 64,
            grid_rows: 16,
            grid_cols: 16,
            trials: 10,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(Error::CountTooSmall { count: 0, min: 1 });
        }
        if self.trials == 0 {
            return Err(Error::CountTooSmall { count: 0, min: 1 });
        }
        if self.sensors.is_empty() || self.sensors.contains(&0) {
            return Err(Error::InvalidParameter("sensor counts must be >= 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tol must be > 0, got {}",
                self.tol
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidDimension { n: 0, min: 1 });
        }
        UnitaryBasis::new(self.basis, self.n)?;
        self.solver.validate()
    }

    /// Total measurement count at column `j` (0-based) for `sensors` sensors.
    pub fn m_at(&self, col: usize, sensors: usize) -> usize {
        let target =
            ((col + 1) as f64 / self.grid_cols as f64 * (sensors * self.n) as f64).round() as usize;
        target.max(1).div_ceil(sensors) * sensors
    }

    /// Sparsity at row `i` (0-based).
    pub fn s_at(&self, row: usize) -> usize {
        (((row + 1) as f64 / self.grid_rows as f64) * self.n as f64)
            .round()
            .max(1.0) as usize
    }

    pub fn row_ordinate(&self, row: usize) -> f64 {
        (row + 1) as f64 / self.grid_rows as f64
    }

    pub fn col_abscissa(&self, col: usize) -> f64 {
        (col + 1) as f64 / self.grid_cols as f64
    }
}

/// Empirical success fractions for one sensor count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub sensors: usize,
    pub config: ExperimentConfig,
    /// `successes[row][col]` out of `config.trials`.
    pub successes: Vec<Vec<usize>>,
    pub success_fraction: Vec<Vec<f64>>,
    pub m_values: Vec<usize>,
    pub s_values: Vec<usize>,
    pub transition_curve: Vec<Option<f64>>,
}

/// `s` unimodular entries at uniformly random distinct positions.
pub fn random_sparse_signal(n: usize, s: usize, seed: u64) -> Result<DVector<C64>> {
    if s > n {
        return Err(Error::InvalidParameter(format!(
            "sparsity {s} exceeds dimension {n}"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let support = index::sample(&mut rng, n, s);
    let mut x = DVector::<C64>::zeros(n);
    for i in support.iter() {
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        x[i] = C64::from_polar(1.0, theta);
    }
    Ok(x)
}

const SALT_SIGNAL: u64 = 1;
const SALT_ENSEMBLE: u64 = 2;
const SALT_PROFILE: u64 = 3;

/// Seed of the profile set used for every cell at one sensor count.
pub fn profile_seed(cfg: &ExperimentConfig, sensors: usize) -> u64 {
    derive_seed(cfg.seed, &[SALT_PROFILE, sensors as u64])
}

fn trial_success(
    cfg: &ExperimentConfig,
    profiles: &ProfileSet,
    basis: &UnitaryBasis,
    sensors: usize,
    row: usize,
    col: usize,
    trial: usize,
) -> Result<bool> {
    let m = cfg.m_at(col, sensors);
    let s = cfg.s_at(row);
    let cell = [sensors as u64, row as u64, col as u64];
    let x = random_sparse_signal(
        cfg.n,
        s,
        derive_seed(
            cfg.seed,
            &[SALT_SIGNAL, cell[0], cell[1], cell[2], trial as u64],
        ),
    )?;
    let ens_seed = if cfg.fresh_ensemble_per_trial {
        derive_seed(
            cfg.seed,
            &[SALT_ENSEMBLE, cell[0], cell[1], cell[2], trial as u64],
        )
    } else {
        derive_seed(cfg.seed, &[SALT_ENSEMBLE, cell[0], cell[1], cell[2]])
    };
    let ens = match cfg.sampling {
        ExperimentSampling::Distinct => {
            assemble_distinct(profiles, basis, m, cfg.entry_dist, ens_seed)?
        }
        ExperimentSampling::Identical => {
            assemble_identical(profiles, basis, m, cfg.entry_dist, ens_seed)?
        }
        ExperimentSampling::BlockDiagonal => {
            assemble_block_diagonal(basis, sensors, m, cfg.entry_dist, ens_seed)?
        }
    };
    let y = &ens.matrix * &x;
    Ok(match solve_bpdn(&ens.matrix, &y, &cfg.solver) {
        Ok(r) => success(&x, &r.x_hat, cfg.tol),
        Err(_) => false,
    })
}

/// Runs the grid for one sensor count.
pub fn run_phase_grid(cfg: &ExperimentConfig, sensors: usize) -> Result<PhaseGrid> {
    cfg.validate()?;
    if sensors == 0 {
        return Err(Error::CountTooSmall { count: 0, min: 1 });
    }
    if cfg.sampling == ExperimentSampling::BlockDiagonal && !cfg.n.is_multiple_of(sensors) {
        return Err(Error::Divisibility {
            what: "n",
            value: cfg.n,
            divisor: sensors,
        });
    }
    let basis = UnitaryBasis::new(cfg.basis, cfg.n)?;
    let family = if cfg.sampling == ExperimentSampling::BlockDiagonal {
        ProfileFamily::Partitioned
    } else {
        cfg.family
    };
    let profiles = ProfileSet::family(
        family,
        sensors,
        cfg.n,
        profile_seed(cfg, sensors),
        cfg.circulant,
    )?;
    basis.matrix();

    let (rows, cols, trials) = (cfg.grid_rows, cfg.grid_cols, cfg.trials);
    let outcomes: Vec<bool> = (0..rows * cols * trials)
        .into_par_iter()
        .map(|k| {
            let (cell, trial) = (k / trials, k % trials);
            let (row, col) = (cell / cols, cell % cols);
            trial_success(cfg, &profiles, &basis, sensors, row, col, trial)
        })
        .collect::<Result<_>>()?;

    let successes: Vec<Vec<usize>> = (0..rows)
        .map(|row| {
            (0..cols)
                .map(|col| {
                    let base = (row * cols + col) * trials;
                    outcomes[base..base + trials]
                        .iter()
                        .filter(|&&ok| ok)
                        .count()
                })
                .collect()
        })
        .collect();
    let success_fraction: Vec<Vec<f64>> = successes
        .iter()
        .map(|r| r.iter().map(|&k| k as f64 / trials as f64).collect())
        .collect();
    let transition_curve = transition_curve(&success_fraction);
    Ok(PhaseGrid {
        sensors,
        config: cfg.clone(),
        m_values: (0..cols).map(|c| cfg.m_at(c, sensors)).collect(),
        s_values: (0..rows).map(|r| cfg.s_at(r)).collect(),
        successes,
        success_fraction,
        transition_curve,
    })
}

/// One grid per entry of `cfg.sensors`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PhaseGrid>> {
    cfg.validate()?;
    cfg.sensors
        .iter()
        .map(|&c| run_phase_grid(cfg, c))
        .collect()
}

/// Per column, the largest ordinate `(i+1)/rows` whose success fraction is
/// at least one half, or `None` if no cell in the column reaches it.
pub fn transition_curve(success_fraction: &[Vec<f64>]) -> Vec<Option<f64>> {
    let rows = success_fraction.len();
    let cols = success_fraction.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|col| {
            (0..rows)
                .rev()
                .find(|&row| success_fraction[row][col] >= 0.5)
                .map(|row| (row + 1) as f64 / rows as f64)
        })
        .collect()
}

/// Counts the columns where every curve is present and the curves are
/// non-decreasing in the given order. Returns `(non_decreasing, comparable)`.
pub fn non_decreasing_columns(curves: &[Vec<Option<f64>>]) -> (usize, usize) {
    let cols = curves.iter().map(|c| c.len()).min().unwrap_or(0);
    let mut comparable = 0;
    let mut ok = 0;
    for col in 0..cols {
        let vals: Option<Vec<f64>> = curves.iter().map(|c| c[col]).collect();
        if let Some(v) = vals {
            comparable += 1;
            if v.windows(2).all(|w| w[0] <= w[1]) {
                ok += 1;
            }
        }
    }
    (ok, comparable)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            n: 32,
            grid_rows: 4,
            grid_cols: 4,
            trials: 3,
            sensors: vec![1, 2],
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn sparse_signal_shape() {
        let x = random_sparse_signal(16, 16, 1).unwrap();
        assert!(x.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        let x = random_sparse_signal(16, 1, 2).unwrap();
        assert_eq!(x.iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert!((x.norm() - 1.0).abs() < 1e-15);
        assert!(random_sparse_signal(4, 5, 0).is_err());
    }

    #[test]
    fn support_positions_are_uniform() {
        let (n, s, draws) = (16, 3, 100_000);
        let mut counts = vec![0f64; n];
        for k in 0..draws {
            let x = random_sparse_signal(n, s, k as u64).unwrap();
            for (i, z) in x.iter().enumerate() {
                if z.norm() > 0.0 {
                    counts[i] += 1.0;
                }
            }
        }
        let expected = (draws * s) as f64 / n as f64;
        let chi2: f64 = counts
            .iter()
            .map(|c| (c - expected).powi(2) / expected)
            .sum();
        // 15 degrees of freedom; 0.999 quantile is 37.7
        assert!(chi2 < 37.7, "chi-square {chi2}");
    }

    #[test]
    fn grid_rounding() {
        let cfg = ExperimentConfig::scaled_down();
        assert_eq!(cfg.m_at(15, 4), 256);
        assert_eq!(cfg.m_at(0, 1), 4);
        assert_eq!(cfg.m_at(0, 3), 12);
        assert_eq!(cfg.s_at(0), 4);
        assert_eq!(cfg.s_at(15), 64);
        for c in [1, 2, 3, 4, 7] {
            for col in 0..16 {
                assert_eq!(cfg.m_at(col, c) % c, 0);
            }
        }
    }

    #[test]
    fn curve_of_synthetic_grids() {
        let ones = vec![vec![1.0; 5]; 4];
        assert_eq!(transition_curve(&ones), vec![Some(1.0); 5]);
        let zeros = vec![vec![0.0; 5]; 4];
        assert_eq!(transition_curve(&zeros), vec![None; 5]);
        // success iff s/N <= m/(2CN)
        let (rows, cols) = (10, 10);
        let grid: Vec<Vec<f64>> = (0..rows)
            .map(|i| {
                (0..cols)
                    .map(|j| {
                        let s = (i + 1) as f64 / rows as f64;
                        let m = (j + 1) as f64 / cols as f64;
                        if s <= m / 2.0 + 1e-12 {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let curve = transition_curve(&grid);
        for (j, v) in curve.iter().enumerate() {
            let m = (j + 1) as f64 / cols as f64;
            let expected = ((m / 2.0) * rows as f64 + 1e-9).floor() / rows as f64;
            if expected == 0.0 {
                assert_eq!(*v, None);
            } else {
                assert!((v.unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monotone_column_count() {
        let a = vec![Some(0.1), Some(0.5), None];
        let b = vec![Some(0.2), Some(0.4), Some(0.3)];
        assert_eq!(non_decreasing_columns(&[a, b]), (1, 2));
    }

    #[test]
    fn easy_and_hopeless_corners() {
        let cfg = tiny();
        let g = run_phase_grid(&cfg, 1).unwrap();
        // m = N, s small: square system, exact
        assert_eq!(g.success_fraction[0][3], 1.0);
        // s = N with m = N/4
        assert_eq!(g.success_fraction[3][0], 0.0);
        for row in &g.successes {
            assert!(row.iter().all(|&k| k <= cfg.trials));
        }
    }

    #[test]
    fn deterministic_grids() {
        let cfg = tiny();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let c = pool.install(|| run_experiment(&cfg)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn block_diagonal_matches_distinct_partitioned() {
        let cfg = ExperimentConfig {
            family: ProfileFamily::Partitioned,
            basis: BasisKind::Fourier,
            ..tiny()
        };
        let bd = ExperimentConfig {
            sampling: ExperimentSampling::BlockDiagonal,
            ..cfg.clone()
        };
        for c in [1, 2] {
            let a = run_phase_grid(&cfg, c).unwrap();
            let b = run_phase_grid(&bd, c).unwrap();
            assert_eq!(a.successes, b.successes);
        }
    }

    #[test]
    fn shared_ensemble_option() {
        let cfg = ExperimentConfig {
            fresh_ensemble_per_trial: false,
            ..tiny()
        };
        let g = run_phase_grid(&cfg, 2).unwrap();
        assert_eq!(g.success_fraction.len(), 4);
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = tiny();
        cfg.sensors = vec![];
        assert!(cfg.validate().is_err());
        let mut cfg = tiny();
        cfg.basis = BasisKind::HaarWavelet;
        cfg.n = 24;
        assert!(cfg.validate().is_err());
    }
}
