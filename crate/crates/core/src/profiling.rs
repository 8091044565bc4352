//! Spatiotemporal features of sensor series: fixed-window average amplitudes
//! (AmV), session variability (population STD), descriptive ranges and task
//! timing.

use thiserror::Error;

use crate::acquisition::{Event, Session, SAMPLE_PERIOD_MS};
use crate::sensor::SensorId;

/// Window length used for AmV profiles.
pub const DEFAULT_WINDOW_MS: u32 = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("series is empty")]
    Empty,
    #[error("window of {0} ms is not a positive multiple of 20 ms")]
    BadWindow(u32),
    #[error("no sessions given")]
    NoSessions,
}

/// One sensor's samples on the 20 ms grid of a session.
///
/// `slots[i]` holds the reading at `start_ms + 20 i`, or `None` when the
/// stream delivered nothing for that slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSeries {
    pub sensor: SensorId,
    pub start_ms: u32,
    pub slots: Vec<Option<f64>>,
    /// Slot indices carrying a gap annotation.
    pub gap_slots: Vec<usize>,
}

impl SensorSeries {
    pub fn from_values(sensor: SensorId, values: Vec<f64>) -> Self {
        SensorSeries {
            sensor,
            start_ms: 0,
            slots: values.into_iter().map(Some).collect(),
            gap_slots: Vec::new(),
        }
    }

    /// Grid slots run from the session's start annotation up to its end.
    pub fn from_session(session: &Session, sensor: SensorId) -> Self {
        let start = session.start_ms();
        let end = session.end_ms();
        let n = ((end - start) / SAMPLE_PERIOD_MS) as usize;
        let mut slots = vec![None; n];
        for s in session.samples_for(sensor) {
            if s.t_ms >= start && s.t_ms < end {
                slots[((s.t_ms - start) / SAMPLE_PERIOD_MS) as usize] = Some(s.v_mv as f64);
            }
        }
        let gap_slots = session
            .annotations()
            .iter()
            .filter(|a| a.event == Event::Gap && a.t_ms >= start && a.t_ms < end)
            .map(|a| ((a.t_ms - start) / SAMPLE_PERIOD_MS) as usize)
            .collect();
        SensorSeries {
            sensor,
            start_ms: start,
            slots,
            gap_slots,
        }
    }

    /// Present readings in time order.
    pub fn values(&self) -> Vec<f64> {
        self.slots.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start_ms: u32,
    pub amv: f64,
    /// Window has a missing slot or a gap annotation.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedProfile {
    pub sensor: SensorId,
    pub window_ms: u32,
    pub windows: Vec<Window>,
    /// Samples in the incomplete trailing window that were not used.
    pub dropped_tail: usize,
}

impl WindowedProfile {
    /// AmV values, leaving out flagged windows unless asked to keep them.
    pub fn amv_values(&self, include_flagged: bool) -> Vec<f64> {
        self.windows
            .iter()
            .filter(|w| include_flagged || !w.flagged)
            .map(|w| w.amv)
            .collect()
    }
}

/// Disjoint fixed windows; `AmV = window sum / samples per window`.
///
/// A flagged window averages over the samples it does have.
pub fn window_amv(series: &SensorSeries, window_ms: u32) -> Result<WindowedProfile, ProfileError> {
    if window_ms == 0 || window_ms % SAMPLE_PERIOD_MS != 0 {
        return Err(ProfileError::BadWindow(window_ms));
    }
    if series.slots.is_empty() {
        return Err(ProfileError::Empty);
    }
    let per = (window_ms / SAMPLE_PERIOD_MS) as usize;
    let full = series.slots.len() / per;
    let windows = (0..full)
        .map(|w| {
            let range = w * per..(w + 1) * per;
            let chunk = &series.slots[range.clone()];
            let present: Vec<f64> = chunk.iter().flatten().copied().collect();
            let flagged =
                present.len() < per || series.gap_slots.iter().any(|g| range.contains(g));
            let sum: f64 = present.iter().sum();
            let amv = if flagged {
                sum / present.len() as f64
            } else {
                sum / per as f64
            };
            Window {
                start_ms: series.start_ms + (w * per) as u32 * SAMPLE_PERIOD_MS,
                amv,
                flagged,
            }
        })
        .collect();
    Ok(WindowedProfile {
        sensor: series.sensor,
        window_ms,
        windows,
        dropped_tail: series.slots.len() - full * per,
    })
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation `sqrt(Σ(x − x̄)² / N)`.
pub fn session_std(values: &[f64]) -> Result<f64, ProfileError> {
    if values.is_empty() {
        return Err(ProfileError::Empty);
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|x| (x - m) * (x - m)).sum();
    Ok((ss / values.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionStats {
    pub n: usize,
    pub mean: f64,
    /// Population STD.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// `std / sqrt(n)`.
    pub sem: f64,
}

pub fn descriptive(values: &[f64]) -> Result<SessionStats, ProfileError> {
    let std = session_std(values)?;
    let n = values.len();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SessionStats {
        n,
        mean: mean(values).clamp(min, max),
        std,
        min,
        max,
        sem: std / (n as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VariabilityMode {
    /// One STD per (session, sensor).
    PerSensor,
    /// One pooled within-sensor STD per session:
    /// `sqrt(Σ_sensors Σ (x − x̄_sensor)² / Σ n)`.
    #[default]
    Pooled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariabilityPoint {
    pub session_key: String,
    pub session_index: u32,
    /// `None` for pooled values.
    pub sensor: Option<SensorId>,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VariabilityCurve {
    pub points: Vec<VariabilityPoint>,
    pub warnings: Vec<String>,
}

impl VariabilityCurve {
    pub fn stds(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.std).collect()
    }
}

/// Per-session STD, ordered by session index.
///
/// Excluded sensors (S1, S4) in `filter` are dropped with a warning, as are
/// sensors a session has no samples for.
pub fn variability_curve(
    sessions: &[Session],
    filter: &[SensorId],
    mode: VariabilityMode,
) -> Result<VariabilityCurve, ProfileError> {
    if sessions.is_empty() {
        return Err(ProfileError::NoSessions);
    }
    let mut curve = VariabilityCurve::default();
    let mut sensors = Vec::new();
    for &s in filter {
        if s.is_excluded() {
            curve
                .warnings
                .push(format!("{s} is excluded from analysis (too little output); ignored"));
        } else if !sensors.contains(&s) {
            sensors.push(s);
        }
    }
    let mut ordered: Vec<&Session> = sessions.iter().collect();
    ordered.sort_by_key(|s| s.index());
    for session in ordered {
        let mut pooled_ss = 0.0;
        let mut pooled_n = 0usize;
        for &sensor in &sensors {
            let values: Vec<f64> = session.samples_for(sensor).map(|s| s.v_mv as f64).collect();
            if values.is_empty() {
                curve
                    .warnings
                    .push(format!("{}: no samples for {sensor}", session.key()));
                continue;
            }
            let std = session_std(&values)?;
            match mode {
                VariabilityMode::PerSensor => curve.points.push(VariabilityPoint {
                    session_key: session.key(),
                    session_index: session.index(),
                    sensor: Some(sensor),
                    std,
                }),
                VariabilityMode::Pooled => {
                    pooled_ss += std * std * values.len() as f64;
                    pooled_n += values.len();
                }
            }
        }
        if mode == VariabilityMode::Pooled && pooled_n > 0 {
            curve.points.push(VariabilityPoint {
                session_key: session.key(),
                session_index: session.index(),
                sensor: None,
                std: (pooled_ss / pooled_n as f64).sqrt(),
            });
        }
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskMetrics {
    pub duration_s: f64,
    pub incident_count: usize,
    /// Duration of steps 1-4, `None` for steps without an annotation.
    pub step_durations_s: [Option<f64>; 4],
}

/// Task duration, incidents and per-step durations from the annotations.
///
/// A step lasts until the next step annotation or the end of the session.
pub fn task_metrics(session: &Session) -> TaskMetrics {
    let end = session.end_ms();
    let steps: Vec<(usize, u32)> = session
        .annotations()
        .iter()
        .filter_map(|a| a.event.step_number().map(|k| (k, a.t_ms)))
        .collect();
    let mut step_durations_s = [None; 4];
    for (i, &(k, t)) in steps.iter().enumerate() {
        let until = steps.get(i + 1).map_or(end, |s| s.1);
        step_durations_s[k] = Some(until.saturating_sub(t) as f64 / 1000.0);
    }
    TaskMetrics {
        duration_s: session.duration_s(),
        incident_count: session
            .annotations()
            .iter()
            .filter(|a| a.event == Event::Incident)
            .count(),
        step_durations_s,
    }
}

/// One row per window: `session,sensor,window_start_ms,amv_mv`.
pub fn amv_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a WindowedProfile)>) -> String {
    let mut out = String::from("session,sensor,window_start_ms,amv_mv\n");
    for (key, prof) in rows {
        for w in &prof.windows {
            out.push_str(&format!("{key},{},{},{}\n", prof.sensor, w.start_ms, w.amv));
        }
    }
    out
}

/// `session,sensor,std_mv`; pooled rows use `pooled` as the sensor.
pub fn std_csv(points: &[VariabilityPoint]) -> String {
    let mut out = String::from("session,sensor,std_mv\n");
    for p in points {
        let sensor = p.sensor.map_or("pooled".to_string(), |s| s.to_string());
        out.push_str(&format!("{},{sensor},{}\n", p.session_key, p.std));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::{Annotation, Glove, Hand, Sample};
    use proptest::prelude::*;

    fn series(values: Vec<f64>) -> SensorSeries {
        SensorSeries::from_values(SensorId::S5, values)
    }

    #[test]
    fn amv_examples() {
        let p = window_amv(&series(vec![500.0; 100]), DEFAULT_WINDOW_MS).unwrap();
        assert_eq!(p.windows.len(), 1);
        assert_eq!(p.windows[0].amv, 500.0);

        let p = window_amv(&series((1..=100).map(f64::from).collect()), 2000).unwrap();
        assert_eq!(p.windows[0].amv, 50.5);

        let p = window_amv(&series(vec![1.0; 250]), 2000).unwrap();
        assert_eq!(p.windows.len(), 2);
        assert_eq!(p.dropped_tail, 50);
        assert_eq!(p.windows[1].start_ms, 2000);

        assert_eq!(window_amv(&series(vec![]), 2000), Err(ProfileError::Empty));
        assert_eq!(window_amv(&series(vec![1.0]), 30), Err(ProfileError::BadWindow(30)));
    }

    #[test]
    fn std_examples() {
        assert_eq!(session_std(&[7.0; 9]).unwrap(), 0.0);
        assert!((session_std(&[1.0, 2.0, 3.0]).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let x = [1.0, 4.0, 9.0, -2.0];
        let scaled: Vec<f64> = x.iter().map(|v| -3.0 * v).collect();
        let (s, s3) = (session_std(&x).unwrap(), session_std(&scaled).unwrap());
        assert!((s3 - 3.0 * s).abs() < 1e-12);
        assert_eq!(session_std(&[]), Err(ProfileError::Empty));
    }

    #[test]
    fn descriptive_examples() {
        let d = descriptive(&[5.0]).unwrap();
        assert_eq!((d.min, d.max, d.mean, d.std, d.sem), (5.0, 5.0, 5.0, 0.0, 0.0));
        let d = descriptive(&[0.0, 10.0]).unwrap();
        assert_eq!((d.mean, d.std), (5.0, 5.0));
        assert!((d.sem - 5.0 / 2f64.sqrt()).abs() < 1e-15);
        let a = descriptive(&[3.0, 1.0, 2.0, 8.0]).unwrap();
        let b = descriptive(&[8.0, 2.0, 3.0, 1.0]).unwrap();
        assert_eq!(a, b);
    }

    fn session_with(values: &[(u32, u8, u16)], ann: &[(u32, Event)], index: u32) -> Session {
        Session::new(
            "u",
            Hand::Dominant,
            index,
            values
                .iter()
                .map(|&(t_ms, s, v_mv)| Sample {
                    glove: Glove::Left,
                    sensor: SensorId::new(s).unwrap(),
                    t_ms,
                    v_mv,
                })
                .collect(),
            ann.iter().map(|&(t_ms, event)| Annotation { t_ms, event }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn series_from_session_marks_gaps() {
        // 3 windows of 2 samples (40 ms), slot 3 missing and annotated as gap
        let s = session_with(
            &[(0, 5, 10), (20, 5, 20), (40, 5, 30), (80, 5, 50), (100, 5, 60)],
            &[(0, Event::Start), (60, Event::Gap), (120, Event::End)],
            1,
        );
        let series = SensorSeries::from_session(&s, SensorId::S5);
        assert_eq!(series.slots.len(), 6);
        assert_eq!(series.slots[3], None);
        let p = window_amv(&series, 40).unwrap();
        assert_eq!(p.windows.len(), 3);
        assert_eq!(p.windows[0].amv, 15.0);
        assert!(p.windows[1].flagged);
        assert_eq!(p.windows[1].amv, 30.0);
        assert_eq!(p.amv_values(false), vec![15.0, 55.0]);
        assert_eq!(p.amv_values(true).len(), 3);
    }

    #[test]
    fn variability_modes() {
        let a = session_with(
            &[(0, 5, 0), (0, 6, 100), (20, 5, 10), (20, 6, 100)],
            &[(0, Event::Start), (40, Event::End)],
            2,
        );
        let b = session_with(
            &[(0, 5, 7), (0, 6, 7), (20, 5, 7), (20, 6, 7)],
            &[(0, Event::Start), (40, Event::End)],
            1,
        );
        let sensors = [SensorId::S5, SensorId::S6];
        let per = variability_curve(&[a.clone(), b.clone()], &sensors, VariabilityMode::PerSensor).unwrap();
        assert_eq!(per.stds(), vec![0.0, 0.0, 5.0, 0.0]);
        assert_eq!(per.points[0].session_index, 1);
        let pooled = variability_curve(&[a, b], &sensors, VariabilityMode::Pooled).unwrap();
        // sensor5 ss = 50, sensor6 ss = 0, n = 4
        assert_eq!(pooled.stds(), vec![0.0, (50.0f64 / 4.0).sqrt()]);

        let w = variability_curve(&[pooled_dummy()], &[SensorId::S1, SensorId::S5], VariabilityMode::Pooled)
            .unwrap();
        assert_eq!(w.warnings.len(), 1);
        assert_eq!(variability_curve(&[], &sensors, VariabilityMode::Pooled), Err(ProfileError::NoSessions));
    }

    fn pooled_dummy() -> Session {
        session_with(&[(0, 5, 1)], &[(0, Event::Start), (20, Event::End)], 1)
    }

    #[test]
    fn task_metric_steps() {
        let s = session_with(
            &[],
            &[
                (0, Event::Start),
                (0, Event::Step1),
                (4000, Event::Step2),
                (5000, Event::Incident),
                (6000, Event::Step3),
                (8000, Event::Step4),
                (10_000, Event::End),
            ],
            1,
        );
        let m = task_metrics(&s);
        assert_eq!(m.duration_s, 10.0);
        assert_eq!(m.incident_count, 1);
        assert_eq!(m.step_durations_s, [Some(4.0), Some(2.0), Some(2.0), Some(2.0)]);

        let plain = session_with(&[], &[(0, Event::Start), (500, Event::End)], 1);
        assert_eq!(task_metrics(&plain).incident_count, 0);
        assert_eq!(task_metrics(&plain).step_durations_s, [None; 4]);
    }

    #[test]
    fn csv_rows() {
        let p = window_amv(&series(vec![2.0; 200]), 2000).unwrap();
        let csv = amv_csv([("x_d_01", &p)]);
        assert_eq!(csv, "session,sensor,window_start_ms,amv_mv\nx_d_01,S5,0,2\nx_d_01,S5,2000,2\n");
    }

    proptest! {
        #[test]
        fn window_mean_equals_sample_mean(v in proptest::collection::vec(0u16..=3300, 100..700)) {
            let vals: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let p = window_amv(&series(vals.clone()), 2000).unwrap();
            let covered = &vals[..p.windows.len() * 100];
            let amv = p.amv_values(false);
            let lhs = amv.iter().sum::<f64>() / amv.len() as f64;
            let rhs = covered.iter().sum::<f64>() / covered.len() as f64;
            prop_assert!((lhs - rhs).abs() < 1e-9);
            let d = descriptive(&vals).unwrap();
            for a in amv {
                prop_assert!(d.min <= a && a <= d.max);
            }
        }

        #[test]
        fn std_translation_invariant(v in proptest::collection::vec(-1e3f64..1e3, 1..200), c in -1e4f64..1e4) {
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let (a, b) = (session_std(&v).unwrap(), session_std(&shifted).unwrap());
            prop_assert!((a - b).abs() < 1e-7 * (1.0 + a));
        }
    }
}
