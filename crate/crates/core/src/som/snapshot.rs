//! Text snapshot of a trained grid.
//!
//! ```text
//! # gripforge-som v1 width=7 height=7 dim=10 seed=1 epochs=100 alpha0=0.5 alpha_end=0.01 sigma0=3.5 sigma_end=0.5 inputs=raw
//! # zscore-mean m1,...,mD      (only for normalized inputs)
//! # zscore-std s1,...,sD
//! v1,...,vD                    (49 rows, row-major)
//! ```
//!
//! Values use Rust's shortest round-trip float formatting, so reading a
//! snapshot back gives bit-identical models.

use std::collections::HashMap;
use std::path::Path;

use super::{InputMode, SomError, SomGrid, TrainingSchedule, ZScore};

pub const SOM_HEADER: &str = "# gripforge-som v1";

#[derive(Debug, Clone, PartialEq)]
pub struct SomSnapshot {
    pub grid: SomGrid,
    pub schedule: TrainingSchedule,
    pub input_mode: InputMode,
    pub zscore: Option<ZScore>,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_row(line: usize, text: &str, dim: usize) -> Result<Vec<f64>, SomError> {
    let row: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| SomError::Parse { line, msg: e.to_string() })?;
    if row.len() != dim {
        return Err(SomError::Parse {
            line,
            msg: format!("expected {dim} values, got {}", row.len()),
        });
    }
    Ok(row)
}

impl SomSnapshot {
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let s = &self.schedule;
        let mut out = format!(
            "{SOM_HEADER} width={} height={} dim={} seed={} epochs={} alpha0={} alpha_end={} sigma0={} sigma_end={} inputs={}\n",
            g.width(),
            g.height(),
            g.dim(),
            s.seed,
            s.epochs,
            s.alpha0,
            s.alpha_end,
            s.sigma0,
            s.sigma_end,
            self.input_mode
        );
        if let Some(z) = &self.zscore {
            out.push_str(&format!("# zscore-mean {}\n# zscore-std {}\n", join(&z.mean), join(&z.std)));
        }
        for m in g.models() {
            out.push_str(&join(m));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SomError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (_, head) = lines.next().ok_or(SomError::Parse {
            line: 1,
            msg: "empty snapshot".into(),
        })?;
        let rest = head.strip_prefix(SOM_HEADER).ok_or(SomError::Parse {
            line: 1,
            msg: format!("expected {SOM_HEADER:?}"),
        })?;
        let kv: HashMap<&str, &str> = rest.split_whitespace().filter_map(|t| t.split_once('=')).collect();
        fn field<T: std::str::FromStr>(kv: &HashMap<&str, &str>, k: &str) -> Result<T, SomError> {
            kv.get(k).and_then(|v| v.parse().ok()).ok_or(SomError::Parse {
                line: 1,
                msg: format!("missing or bad {k}"),
            })
        }
        let width: usize = field(&kv, "width")?;
        let height: usize = field(&kv, "height")?;
        let dim: usize = field(&kv, "dim")?;
        let schedule = TrainingSchedule {
            epochs: field(&kv, "epochs")?,
            alpha0: field(&kv, "alpha0")?,
            alpha_end: field(&kv, "alpha_end")?,
            sigma0: field(&kv, "sigma0")?,
            sigma_end: field(&kv, "sigma_end")?,
            seed: field(&kv, "seed")?,
        };
        let input_mode: InputMode = field(&kv, "inputs")?;
        let mut z_mean = None;
        let mut z_std = None;
        let mut models = Vec::with_capacity(width * height * dim);
        for (line, l) in lines {
            if l.is_empty() {
                continue;
            }
            if let Some(v) = l.strip_prefix("# zscore-mean ") {
                z_mean = Some(parse_row(line, v, dim)?);
            } else if let Some(v) = l.strip_prefix("# zscore-std ") {
                z_std = Some(parse_row(line, v, dim)?);
            } else if l.starts_with('#') {
                continue;
            } else {
                models.extend(parse_row(line, l, dim)?);
            }
        }
        let zscore = match (z_mean, z_std) {
            (Some(mean), Some(std)) => Some(ZScore { mean, std }),
            (None, None) => None,
            _ => {
                return Err(SomError::Parse {
                    line: 0,
                    msg: "zscore needs both mean and std".into(),
                })
            }
        };
        Ok(SomSnapshot {
            grid: SomGrid::new(width, height, dim, models)?,
            schedule,
            input_mode,
            zscore,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, SomError> {
        let text = std::fs::read_to_string(path).map_err(|e| SomError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), SomError> {
        std::fs::write(path, self.to_text()).map_err(|e| SomError::Io(e.to_string()))
    }
}
