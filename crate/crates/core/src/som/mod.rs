//! 7×7 self-organizing map with a Gaussian lattice neighborhood and the
//! quantization error (mean distance to the best-matching unit).

pub mod curve;
pub mod inputs;
pub mod snapshot;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::sensor::SensorId;
pub use curve::{qe_csv, qe_for_sessions, som_qe_curve, QeConfig, QeCurve, QeMode, QePoint};
pub use inputs::{build_inputs, build_inputs_with, window_std_inputs, InputMode, InputSet, ZScore};
pub use snapshot::SomSnapshot;

pub const GRID_WIDTH: usize = 7;
pub const GRID_HEIGHT: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no input vectors")]
    EmptyInputs,
    #[error("neighborhood radius must be positive, got {0}")]
    BadSigma(f64),
    #[error("invalid training schedule: {0}")]
    BadSchedule(String),
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("non-finite value in input vector {0}")]
    NonFinite(usize),
    #[error("session {session} lacks sensors {missing:?}")]
    MissingSensors { session: String, missing: Vec<SensorId> },
    #[error("group {0:?} has no sessions")]
    EmptyGroup(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

/// Lattice of model vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SomGrid {
    width: usize,
    height: usize,
    dim: usize,
    models: Vec<f64>,
}

impl SomGrid {
    /// `models` holds `width * height` vectors of length `dim`, row-major.
    pub fn new(width: usize, height: usize, dim: usize, models: Vec<f64>) -> Result<Self, SomError> {
        if width == 0 || height == 0 || dim == 0 {
            return Err(SomError::BadGrid(format!("{width}x{height}, dim {dim}")));
        }
        if models.len() != width * height * dim {
            return Err(SomError::BadGrid(format!(
                "{} values for {width}x{height}x{dim}",
                models.len()
            )));
        }
        if let Some(p) = models.iter().position(|v| !v.is_finite()) {
            return Err(SomError::NonFinite(p / dim));
        }
        Ok(SomGrid {
            width,
            height,
            dim,
            models,
        })
    }

    pub fn from_vectors(width: usize, height: usize, vectors: &[Vec<f64>]) -> Result<Self, SomError> {
        let dim = vectors.first().map_or(0, Vec::len);
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(SomError::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        Self::new(width, height, dim, vectors.concat())
    }

    /// Uniform draws inside the per-dimension `[min, max]` of `inputs`.
    pub fn random_init(
        width: usize,
        height: usize,
        inputs: &[Vec<f64>],
        rng: &mut impl Rng,
    ) -> Result<Self, SomError> {
        let dim = check_inputs(inputs, None)?;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for x in inputs {
            for d in 0..dim {
                lo[d] = lo[d].min(x[d]);
                hi[d] = hi[d].max(x[d]);
            }
        }
        let mut models = Vec::with_capacity(width * height * dim);
        for _ in 0..width * height {
            for d in 0..dim {
                models.push(lo[d] + (hi[d] - lo[d]) * rng.random::<f64>());
            }
        }
        Self::new(width, height, dim, models)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn units(&self) -> usize {
        self.width * self.height
    }

    pub fn model(&self, unit: usize) -> &[f64] {
        &self.models[unit * self.dim..(unit + 1) * self.dim]
    }

    pub fn models(&self) -> impl Iterator<Item = &[f64]> {
        self.models.chunks_exact(self.dim)
    }

    /// (row, column) of a unit.
    pub fn coord(&self, unit: usize) -> (usize, usize) {
        (unit / self.width, unit % self.width)
    }

    fn lattice_d2(&self, a: usize, b: usize) -> usize {
        let (ra, ca) = self.coord(a);
        let (rb, cb) = self.coord(b);
        ra.abs_diff(rb).pow(2) + ca.abs_diff(cb).pow(2)
    }

    /// Multiplies every model vector by `c`.
    pub fn scaled(&self, c: f64) -> SomGrid {
        SomGrid {
            models: self.models.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

fn check_inputs(inputs: &[Vec<f64>], dim: Option<usize>) -> Result<usize, SomError> {
    let first = inputs.first().ok_or(SomError::EmptyInputs)?;
    let dim = dim.unwrap_or(first.len());
    for (i, x) in inputs.iter().enumerate() {
        if x.len() != dim {
            return Err(SomError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SomError::NonFinite(i));
        }
    }
    Ok(dim)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest model vector; ties go to the lowest index.
pub fn bmu(grid: &SomGrid, x: &[f64]) -> Result<usize, SomError> {
    if x.len() != grid.dim {
        return Err(SomError::DimensionMismatch {
            expected: grid.dim,
            got: x.len(),
        });
    }
    Ok(bmu_unchecked(grid, x).0)
}

fn bmu_unchecked(grid: &SomGrid, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, m) in grid.models().enumerate() {
        let d = dist2(x, m);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Gaussian lattice kernel `exp(-|r_c - r_i|² / 2σ²)`.
pub fn neighborhood(grid: &SomGrid, c: usize, i: usize, sigma: f64) -> Result<f64, SomError> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(SomError::BadSigma(sigma));
    }
    Ok((-(grid.lattice_d2(c, i) as f64) / (2.0 * sigma * sigma)).exp())
}

/// One learning step for one unit: `m += rate · (x − m)`, with `rate = α·h`.
pub fn update_unit(model: &mut [f64], x: &[f64], rate: f64) {
    for (m, v) in model.iter_mut().zip(x) {
        *m += rate * (v - *m);
    }
}

/// Linear decay of learning rate and radius over epochs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingSchedule {
    pub epochs: usize,
    pub alpha0: f64,
    pub alpha_end: f64,
    pub sigma0: f64,
    pub sigma_end: f64,
    pub seed: u64,
}

impl Default for TrainingSchedule {
    fn default() -> Self {
        TrainingSchedule {
            epochs: 100,
            alpha0: 0.5,
            alpha_end: 0.01,
            sigma0: 3.5,
            sigma_end: 0.5,
            seed: 1,
        }
    }
}

impl TrainingSchedule {
    pub fn with_seed(seed: u64) -> Self {
        TrainingSchedule {
            seed,
            ..Self::default()
        }
    }

    /// A zero learning rate is accepted and leaves the grid unchanged.
    pub fn validate(&self) -> Result<(), SomError> {
        let bad = |m: &str| Err(SomError::BadSchedule(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.alpha0) || !(0.0..=self.alpha0).contains(&self.alpha_end) {
            return bad("need 0 <= alpha_end <= alpha0 <= 1");
        }
        if !(self.sigma_end > 0.0 && self.sigma_end <= self.sigma0 && self.sigma0.is_finite()) {
            return bad("need 0 < sigma_end <= sigma0");
        }
        Ok(())
    }

    fn progress(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            0.0
        } else {
            epoch as f64 / (self.epochs - 1) as f64
        }
    }

    pub fn alpha(&self, epoch: usize) -> f64 {
        self.alpha0 + (self.alpha_end - self.alpha0) * self.progress(epoch)
    }

    pub fn sigma(&self, epoch: usize) -> f64 {
        self.sigma0 + (self.sigma_end - self.sigma0) * self.progress(epoch)
    }
}

/// Trains a copy of `grid`. Presentation order is reshuffled every epoch
/// from the schedule seed.
pub fn train(grid: &SomGrid, inputs: &[Vec<f64>], schedule: &TrainingSchedule) -> Result<SomGrid, SomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    train_with_rng(grid, inputs, schedule, &mut rng)
}

fn train_with_rng(
    grid: &SomGrid,
    inputs: &[Vec<f64>],
    schedule: &TrainingSchedule,
    rng: &mut ChaCha8Rng,
) -> Result<SomGrid, SomError> {
    schedule.validate()?;
    check_inputs(inputs, Some(grid.dim))?;
    let mut g = grid.clone();
    let units = g.units();
    let max_d2 = (g.width - 1).pow(2) + (g.height - 1).pow(2);
    let d2: Vec<usize> = (0..units * units).map(|k| g.lattice_d2(k / units, k % units)).collect();
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    for epoch in 0..schedule.epochs {
        let alpha = schedule.alpha(epoch);
        let sigma = schedule.sigma(epoch);
        let rate: Vec<f64> = (0..=max_d2)
            .map(|d| alpha * (-(d as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        order.shuffle(rng);
        for &k in &order {
            let x = &inputs[k];
            let (c, _) = bmu_unchecked(&g, x);
            for i in 0..units {
                let r = rate[d2[c * units + i]];
                if r > 0.0 {
                    update_unit(&mut g.models[i * g.dim..(i + 1) * g.dim], x, r);
                }
            }
        }
    }
    Ok(g)
}

/// Random initialization from the inputs followed by training, both driven
/// by the schedule seed.
pub fn fit(width: usize, height: usize, inputs: &[Vec<f64>], schedule: &TrainingSchedule) -> Result<SomGrid, SomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let init = SomGrid::random_init(width, height, inputs, &mut rng)?;
    train_with_rng(&init, inputs, schedule, &mut rng)
}

/// The grid `fit` starts from.
pub fn initial_grid(width: usize, height: usize, inputs: &[Vec<f64>], seed: u64) -> Result<SomGrid, SomError> {
    SomGrid::random_init(width, height, inputs, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Mean Euclidean distance from each input to its best-matching model.
pub fn quantization_error(grid: &SomGrid, inputs: &[Vec<f64>]) -> Result<f64, SomError> {
    check_inputs(inputs, Some(grid.dim))?;
    let total: f64 = inputs.iter().map(|x| bmu_unchecked(grid, x).1.sqrt()).sum();
    Ok(total / inputs.len() as f64)
}
