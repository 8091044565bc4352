//! Input vectors for the map, one dimension per analysis sensor in the order
//! S2, S3, S5..S12.

use std::fmt;
use std::str::FromStr;

use super::SomError;
use crate::acquisition::{Session, SAMPLE_PERIOD_MS};
use crate::profiling::SensorSeries;
use crate::sensor::SensorId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputMode {
    /// One vector of raw mV readings per grid timestamp.
    #[default]
    Raw,
    /// One vector of per-sensor population STDs per disjoint window.
    WindowStd { window_ms: u32 },
}

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputMode::Raw => f.write_str("raw"),
            InputMode::WindowStd { window_ms } => write!(f, "window-std:{window_ms}"),
        }
    }
}

impl FromStr for InputMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "raw" {
            return Ok(InputMode::Raw);
        }
        let ms = s
            .strip_prefix("window-std:")
            .and_then(|v| v.parse::<u32>().ok())
            .filter(|&ms| ms > 0 && ms % SAMPLE_PERIOD_MS == 0)
            .ok_or_else(|| format!("unknown input mode {s:?}"))?;
        Ok(InputMode::WindowStd { window_ms: ms })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSet {
    pub vectors: Vec<Vec<f64>>,
    /// Timestamps (or windows) dropped because some sensor had no reading.
    pub skipped: usize,
}

fn sensor_columns(session: &Session) -> Result<Vec<SensorSeries>, SomError> {
    let present = session.sensors();
    let missing: Vec<SensorId> = SensorId::eligible().filter(|s| !present.contains(s)).collect();
    if !missing.is_empty() {
        return Err(SomError::MissingSensors {
            session: session.key(),
            missing,
        });
    }
    Ok(SensorId::eligible()
        .map(|s| SensorSeries::from_session(session, s))
        .collect())
}

/// Raw per-timestamp vectors of the ten analysis sensors.
pub fn build_inputs(session: &Session) -> Result<InputSet, SomError> {
    let cols = sensor_columns(session)?;
    let n = cols[0].slots.len();
    let mut vectors = Vec::with_capacity(n);
    let mut skipped = 0;
    for t in 0..n {
        let v: Option<Vec<f64>> = cols.iter().map(|c| c.slots[t]).collect();
        match v {
            Some(v) => vectors.push(v),
            None => skipped += 1,
        }
    }
    Ok(InputSet { vectors, skipped })
}

/// Per-window STD vectors. Windows with any missing reading are skipped.
pub fn window_std_inputs(session: &Session, window_ms: u32) -> Result<InputSet, SomError> {
    if window_ms == 0 || window_ms % SAMPLE_PERIOD_MS != 0 {
        return Err(SomError::BadGrid(format!("window of {window_ms} ms")));
    }
    let per = (window_ms / SAMPLE_PERIOD_MS) as usize;
    let cols = sensor_columns(session)?;
    let windows = cols[0].slots.len() / per;
    let mut vectors = Vec::with_capacity(windows);
    let mut skipped = 0;
    for w in 0..windows {
        let mut v = Vec::with_capacity(cols.len());
        for c in &cols {
            let chunk: Option<Vec<f64>> = c.slots[w * per..(w + 1) * per].iter().copied().collect();
            match chunk {
                Some(x) => v.push(crate::profiling::session_std(&x).expect("non-empty window")),
                None => break,
            }
        }
        if v.len() == cols.len() {
            vectors.push(v);
        } else {
            skipped += 1;
        }
    }
    Ok(InputSet { vectors, skipped })
}

pub fn build_inputs_with(session: &Session, mode: InputMode) -> Result<InputSet, SomError> {
    match mode {
        InputMode::Raw => build_inputs(session),
        InputMode::WindowStd { window_ms } => window_std_inputs(session, window_ms),
    }
}

/// Per-dimension standardization fitted on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScore {
    pub mean: Vec<f64>,
    /// Population STD; zero-spread dimensions are stored as 1.
    pub std: Vec<f64>,
}

impl ZScore {
    pub fn fit(inputs: &[Vec<f64>]) -> Result<Self, SomError> {
        let dim = inputs.first().ok_or(SomError::EmptyInputs)?.len();
        let n = inputs.len() as f64;
        let mut mean = vec![0.0; dim];
        for x in inputs {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for x in inputs {
            for d in 0..dim {
                var[d] += (x[d] - mean[d]).powi(2);
            }
        }
        let std = var
            .iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(ZScore { mean, std })
    }

    pub fn apply(&self, inputs: &mut [Vec<f64>]) {
        for x in inputs {
            for d in 0..x.len() {
                x[d] = (x[d] - self.mean[d]) / self.std[d];
            }
        }
    }
}
