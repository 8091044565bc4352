//! Session container and its CSV file format.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use super::{Glove, Hand, SAMPLE_PERIOD_MS};
use crate::sensor::SensorId;

pub const SESSION_HEADER: &str = "# gripforge-session v1";

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid session: {0}")]
    Invalid(String),
    #[error("frames from more than one glove ({0:?} and {1:?})")]
    MixedGloves(Glove, Glove),
    #[error("no frames to assemble")]
    NoFrames,
    #[error("sequence number {0} repeated")]
    RepeatedSequence(u16),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Start,
    Step1,
    Step2,
    Step3,
    Step4,
    Incident,
    /// Frame(s) missing from the stream at this slot.
    Gap,
    End,
}

impl Event {
    pub fn name(self) -> &'static str {
        match self {
            Event::Start => "start",
            Event::Step1 => "step1",
            Event::Step2 => "step2",
            Event::Step3 => "step3",
            Event::Step4 => "step4",
            Event::Incident => "incident",
            Event::Gap => "gap",
            Event::End => "end",
        }
    }

    pub fn step(k: usize) -> Option<Event> {
        [Event::Step1, Event::Step2, Event::Step3, Event::Step4]
            .get(k)
            .copied()
    }

    pub fn step_number(self) -> Option<usize> {
        match self {
            Event::Step1 => Some(0),
            Event::Step2 => Some(1),
            Event::Step3 => Some(2),
            Event::Step4 => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Event {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "start" => Event::Start,
            "step1" => Event::Step1,
            "step2" => Event::Step2,
            "step3" => Event::Step3,
            "step4" => Event::Step4,
            "incident" => Event::Incident,
            "gap" => Event::Gap,
            "end" => Event::End,
            other => return Err(format!("unknown event {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Annotation {
    pub t_ms: u32,
    pub event: Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sample {
    pub glove: Glove,
    pub sensor: SensorId,
    /// Milliseconds since session start.
    pub t_ms: u32,
    pub v_mv: u16,
}

/// One recorded task session: one user, one hand.
///
/// Samples are sorted by `(t_ms, sensor)` with at most one sample per key,
/// and annotations hold exactly one `start` before exactly one `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    user: String,
    hand: Hand,
    index: u32,
    samples: Vec<Sample>,
    annotations: Vec<Annotation>,
    link_rate_bps: Option<u32>,
}

impl Session {
    pub fn new(
        user: impl Into<String>,
        hand: Hand,
        index: u32,
        samples: Vec<Sample>,
        annotations: Vec<Annotation>,
    ) -> Result<Self, SessionError> {
        let s = Session {
            user: user.into(),
            hand,
            index,
            samples,
            annotations,
            link_rate_bps: None,
        };
        s.check()?;
        Ok(s)
    }

    pub fn with_link_rate(mut self, bps: u32) -> Self {
        self.link_rate_bps = Some(bps);
        self
    }

    fn check(&self) -> Result<(), SessionError> {
        let invalid = |m: String| Err(SessionError::Invalid(m));
        if self.user.is_empty()
            || self.user.chars().any(|c| c.is_whitespace() || c == '=' || c == ',')
        {
            return invalid(format!("bad user label {:?}", self.user));
        }
        if self.index == 0 {
            return invalid("session index must be >= 1".into());
        }
        for (i, s) in self.samples.iter().enumerate() {
            if s.v_mv > super::frame::MAX_MV {
                return invalid(format!("sample {i}: {} mV above 3300 mV", s.v_mv));
            }
            if s.t_ms % SAMPLE_PERIOD_MS != 0 {
                return invalid(format!("sample {i}: t_ms {} not on the 20 ms grid", s.t_ms));
            }
        }
        if let Some(i) = self
            .samples
            .windows(2)
            .position(|w| (w[1].t_ms, w[1].sensor) <= (w[0].t_ms, w[0].sensor))
        {
            let (a, b) = (&self.samples[i], &self.samples[i + 1]);
            return invalid(format!(
                "samples not strictly ordered by (t_ms, sensor): ({}, {}) then ({}, {})",
                a.t_ms, a.sensor, b.t_ms, b.sensor
            ));
        }
        if self.annotations.windows(2).any(|w| w[1].t_ms < w[0].t_ms) {
            return invalid("annotations not in time order".into());
        }
        let count = |e| self.annotations.iter().filter(|a| a.event == e).count();
        if count(Event::Start) != 1 || count(Event::End) != 1 {
            return invalid("need exactly one start and one end annotation".into());
        }
        if self.start_ms() >= self.end_ms() {
            return invalid("start must precede end".into());
        }
        Ok(())
    }

    pub fn user(&self) -> &str {
        &self.user
    }

    pub fn hand(&self) -> Hand {
        self.hand
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn link_rate_bps(&self) -> Option<u32> {
        self.link_rate_bps
    }

    fn event_time(&self, e: Event) -> u32 {
        self.annotations
            .iter()
            .find(|a| a.event == e)
            .map(|a| a.t_ms)
            .expect("checked at construction")
    }

    pub fn start_ms(&self) -> u32 {
        self.event_time(Event::Start)
    }

    pub fn end_ms(&self) -> u32 {
        self.event_time(Event::End)
    }

    pub fn duration_s(&self) -> f64 {
        (self.end_ms() - self.start_ms()) as f64 / 1000.0
    }

    /// Stable key such as `expert_d_01`.
    pub fn key(&self) -> String {
        format!("{}_{}_{:02}", self.user, self.hand.code(), self.index)
    }

    /// Sensors that have at least one sample, ascending.
    pub fn sensors(&self) -> Vec<SensorId> {
        let mut seen = [false; 13];
        for s in &self.samples {
            seen[s.sensor.index() as usize] = true;
        }
        SensorId::all().filter(|s| seen[s.index() as usize]).collect()
    }

    pub fn samples_for(&self, sensor: SensorId) -> impl Iterator<Item = &Sample> + '_ {
        self.samples.iter().filter(move |s| s.sensor == sensor)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, SessionError> {
        read_session(path)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), SessionError> {
        write_session(path, self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * self.samples.len() + 128);
        out.push_str(&format!(
            "{SESSION_HEADER} user={} hand={} index={}",
            self.user,
            self.hand.code(),
            self.index
        ));
        if let Some(bps) = self.link_rate_bps {
            out.push_str(&format!(" link_bps={bps}"));
        }
        out.push('\n');
        for a in &self.annotations {
            out.push_str(&format!("@{},{}\n", a.t_ms, a.event));
        }
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.t_ms,
                s.sensor.index(),
                s.glove.code(),
                s.v_mv
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, SessionError> {
        let mut lines = text.lines().enumerate();
        let perr = |line: usize, msg: String| SessionError::Parse { line, msg };
        let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
        let rest = header
            .strip_prefix(SESSION_HEADER)
            .ok_or_else(|| perr(1, format!("bad header {header:?}")))?;
        let (mut user, mut hand, mut index, mut link) = (None, None, None, None);
        for kv in rest.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| perr(1, format!("bad header field {kv:?}")))?;
            match k {
                "user" => user = Some(v.to_string()),
                "hand" => {
                    hand = Some(v.parse::<Hand>().map_err(|e| perr(1, e))?);
                }
                "index" => {
                    index = Some(v.parse::<u32>().map_err(|_| perr(1, format!("bad index {v:?}")))?)
                }
                "link_bps" => {
                    link = Some(v.parse::<u32>().map_err(|_| perr(1, format!("bad link_bps {v:?}")))?)
                }
                _ => {}
            }
        }
        let user = user.ok_or_else(|| perr(1, "missing user=".into()))?;
        let hand = hand.ok_or_else(|| perr(1, "missing hand=".into()))?;
        let index = index.ok_or_else(|| perr(1, "missing index=".into()))?;

        let mut samples = Vec::new();
        let mut annotations = Vec::new();
        for (i, line) in lines {
            let n = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(ann) = line.strip_prefix('@') {
                let (t, e) = ann
                    .split_once(',')
                    .ok_or_else(|| perr(n, format!("bad annotation {line:?}")))?;
                let t_ms = t.parse().map_err(|_| perr(n, format!("bad time {t:?}")))?;
                let event = e.parse().map_err(|m| perr(n, m))?;
                annotations.push(Annotation { t_ms, event });
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(perr(n, format!("expected t_ms,sensor,glove,v_mv in {line:?}")));
            }
            let t_ms = f[0].parse().map_err(|_| perr(n, format!("bad t_ms {:?}", f[0])))?;
            let sensor = f[1].parse::<SensorId>().map_err(|e| perr(n, e.to_string()))?;
            let glove = f[2].parse::<Glove>().map_err(|e| perr(n, e))?;
            let v_mv = f[3].parse().map_err(|_| perr(n, format!("bad v_mv {:?}", f[3])))?;
            samples.push(Sample {
                glove,
                sensor,
                t_ms,
                v_mv,
            });
        }
        let mut s = Session::new(user, hand, index, samples, annotations)?;
        s.link_rate_bps = link;
        Ok(s)
    }
}

pub fn read_session(path: impl AsRef<Path>) -> Result<Session, SessionError> {
    Session::from_csv(&fs::read_to_string(path)?)
}

pub fn write_session(path: impl AsRef<Path>, session: &Session) -> Result<(), SessionError> {
    fs::write(path, session.to_csv())?;
    Ok(())
}
