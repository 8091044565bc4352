//! Glove data acquisition: stream frames, session assembly and storage.

pub mod frame;
pub mod session;

use std::fmt;
use std::str::FromStr;

pub use frame::{decode_frame, decode_stream, encode_frame, Frame, FrameError, StreamDecoder};
pub use session::{read_session, write_session, Annotation, Event, Sample, Session, SessionError};

use crate::sensor::SensorId;

/// Sampling period of the glove firmware (50 Hz).
pub const SAMPLE_PERIOD_MS: u32 = 20;

/// Bluetooth link rate of the gloves.
pub const LINK_RATE_BPS: u32 = 115_200;

/// Battery level below which the user is told to change the battery.
pub const BATTERY_WARN_V: f64 = 3.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Glove {
    Left,
    Right,
}

impl Glove {
    pub fn wire_id(self) -> u8 {
        match self {
            Glove::Left => 0x01,
            Glove::Right => 0x02,
        }
    }

    pub fn from_wire_id(b: u8) -> Option<Glove> {
        match b {
            0x01 => Some(Glove::Left),
            0x02 => Some(Glove::Right),
            _ => None,
        }
    }

    pub fn code(self) -> char {
        match self {
            Glove::Left => 'L',
            Glove::Right => 'R',
        }
    }
}

impl FromStr for Glove {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "L" | "l" | "left" => Ok(Glove::Left),
            "R" | "r" | "right" => Ok(Glove::Right),
            _ => Err(format!("unknown glove {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hand {
    Dominant,
    NonDominant,
}

impl Hand {
    pub fn code(self) -> char {
        match self {
            Hand::Dominant => 'd',
            Hand::NonDominant => 'n',
        }
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hand::Dominant => "dominant",
            Hand::NonDominant => "non-dominant",
        })
    }
}

impl FromStr for Hand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "d" | "dominant" => Ok(Hand::Dominant),
            "n" | "non-dominant" | "nondominant" => Ok(Hand::NonDominant),
            _ => Err(format!("unknown hand {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionMeta {
    pub user: String,
    pub hand: Hand,
    pub index: u32,
}

/// Assembles decoded frames of one glove into a session.
///
/// Sample times come from the sequence numbers (20 ms per step, u16
/// wrap-around unwrapped), so every sample sits on the grid. Each missing
/// sequence number becomes a `gap` annotation at its slot; nothing is
/// interpolated.
pub fn stream_to_session(frames: &[Frame], meta: SessionMeta) -> Result<Session, SessionError> {
    let first = frames.first().ok_or(SessionError::NoFrames)?;
    let glove = first.glove;
    let mut samples = Vec::with_capacity(frames.len() * crate::sensor::SENSORS_PER_GLOVE);
    let mut annotations = vec![Annotation {
        t_ms: 0,
        event: Event::Start,
    }];
    let mut offset: u32 = 0;
    let mut prev_seq = first.seq;
    for (i, f) in frames.iter().enumerate() {
        if f.glove != glove {
            return Err(SessionError::MixedGloves(glove, f.glove));
        }
        if i > 0 {
            let delta = f.seq.wrapping_sub(prev_seq) as u32;
            if delta == 0 {
                return Err(SessionError::RepeatedSequence(f.seq));
            }
            for missing in offset + 1..offset + delta {
                annotations.push(Annotation {
                    t_ms: missing * SAMPLE_PERIOD_MS,
                    event: Event::Gap,
                });
            }
            offset += delta;
            prev_seq = f.seq;
        }
        let t_ms = offset * SAMPLE_PERIOD_MS;
        for sensor in SensorId::all() {
            samples.push(Sample {
                glove,
                sensor,
                t_ms,
                v_mv: f.voltages[sensor.slot()],
            });
        }
    }
    annotations.push(Annotation {
        t_ms: (offset + 1) * SAMPLE_PERIOD_MS,
        event: Event::End,
    });
    Ok(Session::new(meta.user, meta.hand, meta.index, samples, annotations)?.with_link_rate(LINK_RATE_BPS))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatteryState {
    Ok,
    WarnChangeBattery,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryStatus {
    pub v_battery: f64,
    pub state: BatteryState,
}

pub fn battery_check(v_battery: f64) -> BatteryStatus {
    let state = if v_battery < BATTERY_WARN_V {
        BatteryState::WarnChangeBattery
    } else {
        BatteryState::Ok
    };
    BatteryStatus { v_battery, state }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frames(seqs: &[u16], glove: Glove) -> Vec<Frame> {
        seqs.iter()
            .map(|&seq| Frame {
                glove,
                seq,
                t_ms: 5_000 + seq as u32 * 20,
                voltages: std::array::from_fn(|i| ((seq as u32 * 7 + i as u32) % 3301) as u16),
            })
            .collect()
    }

    fn meta() -> SessionMeta {
        SessionMeta {
            user: "novice".into(),
            hand: Hand::Dominant,
            index: 1,
        }
    }

    #[test]
    fn battery() {
        assert_eq!(battery_check(4.2).state, BatteryState::Ok);
        assert_eq!(battery_check(3.6).state, BatteryState::WarnChangeBattery);
        assert_eq!(battery_check(3.7).state, BatteryState::Ok);
    }

    #[test]
    fn three_frames_make_36_samples() {
        let s = stream_to_session(&frames(&[0, 1, 2], Glove::Left), meta()).unwrap();
        assert_eq!(s.samples().len(), 36);
        assert_eq!(s.link_rate_bps(), Some(LINK_RATE_BPS));
        assert_eq!(s.sensors().len(), 12);
    }

    #[test]
    fn gap_is_annotated() {
        let s = stream_to_session(&frames(&[0, 1, 3], Glove::Right), meta()).unwrap();
        let gaps: Vec<u32> = s
            .annotations()
            .iter()
            .filter(|a| a.event == Event::Gap)
            .map(|a| a.t_ms)
            .collect();
        assert_eq!(gaps, vec![40]);
        assert_eq!(s.samples().len(), 36);
        assert_eq!(s.samples().last().unwrap().t_ms, 60);
        assert_eq!(s.end_ms(), 80);
    }

    #[test]
    fn hundred_frames_last_two_seconds() {
        let seqs: Vec<u16> = (0..100).collect();
        let s = stream_to_session(&frames(&seqs, Glove::Left), meta()).unwrap();
        assert_eq!(s.duration_s(), 2.0);
    }

    #[test]
    fn sequence_wraps() {
        let s = stream_to_session(&frames(&[65534, 65535, 0, 1], Glove::Left), meta()).unwrap();
        assert_eq!(s.end_ms(), 80);
        assert!(s.annotations().iter().all(|a| a.event != Event::Gap));
    }

    #[test]
    fn mixed_gloves_rejected() {
        let mut f = frames(&[0, 1], Glove::Left);
        f[1].glove = Glove::Right;
        assert!(matches!(
            stream_to_session(&f, meta()),
            Err(SessionError::MixedGloves(Glove::Left, Glove::Right))
        ));
        assert!(matches!(stream_to_session(&[], meta()), Err(SessionError::NoFrames)));
    }

    proptest! {
        #[test]
        fn sample_count_preserved(steps in proptest::collection::vec(1u16..4, 0..60)) {
            let mut seqs = vec![10u16];
            for d in steps {
                let next = seqs.last().unwrap().wrapping_add(d);
                seqs.push(next);
            }
            let s = stream_to_session(&frames(&seqs, Glove::Left), meta()).unwrap();
            prop_assert_eq!(s.samples().len(), seqs.len() * 12);
            let back = Session::from_csv(&s.to_csv()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
