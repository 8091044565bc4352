//! Cohort-level expert/novice comparisons: session STD and QE t tests and
//! first-vs-last-session ANOVAs on windowed sensor data.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::acquisition::{Hand, Session};
use crate::profiling::{variability_curve, window_amv, ProfileError, SensorSeries, VariabilityMode};
use crate::sensor::SensorId;
use crate::stats::{anova_2x2, two_group_t, Anova2x2Result, Report, StatsError, TwoGroupResult};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no sessions for group {0}")]
    MissingGroup(String),
    #[error("{session} has no complete window for {sensor}")]
    NoWindows { session: String, sensor: SensorId },
    #[error("qe csv line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// `expert_d`, `novice_n`, ...
pub fn group_name(user: &str, hand: Hand) -> String {
    format!("{user}_{}", hand.code())
}

/// Sessions keyed by group name, each group sorted by session index.
pub fn group_sessions(sessions: &[Session]) -> BTreeMap<String, Vec<Session>> {
    let mut out: BTreeMap<String, Vec<Session>> = BTreeMap::new();
    for s in sessions {
        out.entry(group_name(s.user(), s.hand())).or_default().push(s.clone());
    }
    for v in out.values_mut() {
        v.sort_by_key(|s| s.index());
    }
    out
}

/// Mean of the complete (unflagged) AmV windows of one sensor.
pub fn windowed_mean(session: &Session, sensor: SensorId, window_ms: u32) -> Result<f64, AnalysisError> {
    let prof = window_amv(&SensorSeries::from_session(session, sensor), window_ms)?;
    let v = prof.amv_values(false);
    if v.is_empty() {
        return Err(AnalysisError::NoWindows {
            session: session.key(),
            sensor,
        });
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Pooled within-sensor STD of the ten analysis sensors, one per session in
/// index order.
pub fn pooled_std_series(sessions: &[Session]) -> Result<Vec<f64>, AnalysisError> {
    let sensors: Vec<SensorId> = SensorId::eligible().collect();
    Ok(variability_curve(sessions, &sensors, VariabilityMode::Pooled)?.stds())
}

/// Readings of `sensor` that fall in complete windows.
fn windowed_samples(session: &Session, sensor: SensorId, window_ms: u32) -> Result<Vec<f64>, AnalysisError> {
    let series = SensorSeries::from_session(session, sensor);
    let prof = window_amv(&series, window_ms)?;
    let per = (window_ms / crate::acquisition::SAMPLE_PERIOD_MS) as usize;
    let mut out = Vec::new();
    for (w, win) in prof.windows.iter().enumerate() {
        if !win.flagged {
            out.extend(series.slots[w * per..(w + 1) * per].iter().flatten());
        }
    }
    Ok(out)
}

fn first_last(group: &[Session]) -> Option<(&Session, &Session)> {
    let first = group.iter().min_by_key(|s| s.index())?;
    let last = group.iter().max_by_key(|s| s.index())?;
    Some((first, last))
}

/// `cells[skill][session]` for a first-vs-last 2×2 design. Every cell is cut
/// to the size of the smallest so the design is balanced.
pub fn first_last_cells(
    a: &[Session],
    b: &[Session],
    sensor: SensorId,
    window_ms: u32,
) -> Result<[[Vec<f64>; 2]; 2], AnalysisError> {
    let (a0, a1) = first_last(a).ok_or(AnalysisError::MissingGroup("first".into()))?;
    let (b0, b1) = first_last(b).ok_or(AnalysisError::MissingGroup("second".into()))?;
    let mut cells = [
        [windowed_samples(a0, sensor, window_ms)?, windowed_samples(a1, sensor, window_ms)?],
        [windowed_samples(b0, sensor, window_ms)?, windowed_samples(b1, sensor, window_ms)?],
    ];
    let n = cells.iter().flatten().map(Vec::len).min().unwrap_or(0);
    for c in cells.iter_mut().flatten() {
        c.truncate(n);
    }
    Ok(cells)
}

/// (group, session index, QE) rows of a `group,session,qe_mv` file.
pub fn parse_qe_csv(text: &str) -> Result<Vec<(String, u32, f64)>, AnalysisError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("group,")) {
            continue;
        }
        let bad = |msg: &str| AnalysisError::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(bad("expected group,session,qe_mv"));
        }
        let k = f[1].parse().map_err(|_| bad("bad session index"))?;
        let q = f[2].parse().map_err(|_| bad("bad qe value"))?;
        out.push((f[0].to_string(), k, q));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub users: [String; 2],
    pub hand: Hand,
    pub window_ms: u32,
    pub anova_sensors: Vec<SensorId>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            users: ["expert".into(), "novice".into()],
            hand: Hand::Dominant,
            window_ms: crate::profiling::DEFAULT_WINDOW_MS,
            anova_sensors: vec![SensorId::S5, SensorId::S6, SensorId::S7],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub groups: [String; 2],
    pub std: TwoGroupResult,
    pub qe: Option<TwoGroupResult>,
    pub anovas: Vec<(SensorId, Anova2x2Result)>,
}

/// Runs the t tests (STD, and QE if rows are given) and one ANOVA per sensor.
pub fn compare(
    sessions: &[Session],
    qe_rows: Option<&[(String, u32, f64)]>,
    opts: &CompareOptions,
) -> Result<Comparison, AnalysisError> {
    let groups = group_sessions(sessions);
    let names = [group_name(&opts.users[0], opts.hand), group_name(&opts.users[1], opts.hand)];
    let pick = |n: &String| groups.get(n).ok_or_else(|| AnalysisError::MissingGroup(n.clone()));
    let (a, b) = (pick(&names[0])?, pick(&names[1])?);
    let std = two_group_t(&pooled_std_series(a)?, &pooled_std_series(b)?)?;
    let qe = match qe_rows {
        Some(rows) => {
            let of = |n: &String| -> Vec<f64> { rows.iter().filter(|r| &r.0 == n).map(|r| r.2).collect() };
            Some(two_group_t(&of(&names[0]), &of(&names[1]))?)
        }
        None => None,
    };
    let mut anovas = Vec::new();
    for &sensor in &opts.anova_sensors {
        let c = first_last_cells(a, b, sensor, opts.window_ms)?;
        anovas.push((sensor, anova_2x2([[&c[0][0], &c[0][1]], [&c[1][0], &c[1][1]]])?));
    }
    Ok(Comparison {
        groups: names,
        std,
        qe,
        anovas,
    })
}

impl Comparison {
    pub fn report(&self) -> Report {
        let mut r = Report::default();
        let vs = format!("{} vs {}", self.groups[0], self.groups[1]);
        r.push_t(format!("STD {vs}"), &self.std);
        if let Some(q) = &self.qe {
            r.push_t(format!("QE {vs}"), q);
        }
        for (sensor, a) in &self.anovas {
            r.push_anova(&sensor.to_string(), a, ["expertise", "session"]);
        }
        r
    }

    /// Report table followed by group and cell means.
    pub fn to_text(&self) -> String {
        let mut out = self.report().to_text();
        out.push('\n');
        let [g0, g1] = &self.groups;
        out.push_str(&format!(
            "STD means: {g0} {:.3} mV, {g1} {:.3} mV\n",
            self.std.mean_a, self.std.mean_b
        ));
        if let Some(q) = &self.qe {
            out.push_str(&format!("QE means: {g0} {:.3} mV, {g1} {:.3} mV\n", q.mean_a, q.mean_b));
        }
        for (sensor, a) in &self.anovas {
            let m = a.cell_means;
            out.push_str(&format!(
                "{sensor} cell means (first, last), n={}: {g0} {:.1}, {:.1}; {g1} {:.1}, {:.1}\n",
                a.n_per_cell, m[0][0], m[0][1], m[1][0], m[1][1]
            ));
        }
        out
    }
}
