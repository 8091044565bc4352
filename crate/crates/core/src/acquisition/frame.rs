//! Fixed-length 33-byte glove frame.
//!
//! ```text
//! 0      sync 0xAA
//! 1      glove (0x01 left, 0x02 right)
//! 2..4   sequence, u16 LE
//! 4..8   t_ms, u32 LE
//! 8..32  twelve u16 LE voltages, S1..S12, mV
//! 32     XOR of bytes 1..=31
//! ```

use thiserror::Error;

use super::Glove;
use crate::sensor::SENSORS_PER_GLOVE;

pub const SYNC: u8 = 0xAA;
pub const FRAME_LEN: usize = 33;
pub const MAX_MV: u16 = 3300;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("need {FRAME_LEN} bytes, got {0}")]
    Underflow(usize),
    #[error("bad sync byte 0x{0:02X}, stream must resync")]
    Resync(u8),
    #[error("checksum mismatch: stored 0x{stored:02X}, computed 0x{computed:02X}")]
    Corrupt { stored: u8, computed: u8 },
    #[error("unknown glove id 0x{0:02X}")]
    UnknownGlove(u8),
    #[error("sensor S{sensor} voltage {mv} mV above {MAX_MV} mV")]
    VoltageOutOfRange { sensor: usize, mv: u16 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub glove: Glove,
    pub seq: u16,
    pub t_ms: u32,
    /// Millivolt readings in sensor order S1..S12.
    pub voltages: [u16; SENSORS_PER_GLOVE],
}

fn check_voltages(v: &[u16; SENSORS_PER_GLOVE]) -> Result<(), FrameError> {
    match v.iter().position(|&mv| mv > MAX_MV) {
        Some(i) => Err(FrameError::VoltageOutOfRange {
            sensor: i + 1,
            mv: v[i],
        }),
        None => Ok(()),
    }
}

pub fn checksum(payload: &[u8]) -> u8 {
    payload.iter().fold(0, |acc, b| acc ^ b)
}

pub fn encode_frame(frame: &Frame) -> Result<[u8; FRAME_LEN], FrameError> {
    check_voltages(&frame.voltages)?;
    let mut out = [0u8; FRAME_LEN];
    out[0] = SYNC;
    out[1] = frame.glove.wire_id();
    out[2..4].copy_from_slice(&frame.seq.to_le_bytes());
    out[4..8].copy_from_slice(&frame.t_ms.to_le_bytes());
    for (i, mv) in frame.voltages.iter().enumerate() {
        out[8 + 2 * i..10 + 2 * i].copy_from_slice(&mv.to_le_bytes());
    }
    out[32] = checksum(&out[1..32]);
    Ok(out)
}

/// Decodes one frame from the start of `bytes`. Trailing bytes are ignored.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    if bytes.is_empty() {
        return Err(FrameError::Underflow(0));
    }
    if bytes[0] != SYNC {
        return Err(FrameError::Resync(bytes[0]));
    }
    if bytes.len() < FRAME_LEN {
        return Err(FrameError::Underflow(bytes.len()));
    }
    let computed = checksum(&bytes[1..32]);
    if computed != bytes[32] {
        return Err(FrameError::Corrupt {
            stored: bytes[32],
            computed,
        });
    }
    let glove = Glove::from_wire_id(bytes[1]).ok_or(FrameError::UnknownGlove(bytes[1]))?;
    let seq = u16::from_le_bytes([bytes[2], bytes[3]]);
    let t_ms = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]);
    let mut voltages = [0u16; SENSORS_PER_GLOVE];
    for (i, v) in voltages.iter_mut().enumerate() {
        *v = u16::from_le_bytes([bytes[8 + 2 * i], bytes[9 + 2 * i]]);
    }
    check_voltages(&voltages)?;
    Ok(Frame {
        glove,
        seq,
        t_ms,
        voltages,
    })
}

/// Incremental decoder for a raw byte stream.
///
/// Bytes before a sync byte are discarded. A candidate frame that fails its
/// checksum is skipped one byte at a time so that a 0xAA inside a payload
/// cannot lock the decoder onto a false boundary.
#[derive(Debug, Default)]
pub struct StreamDecoder {
    buf: Vec<u8>,
    discarded: usize,
    corrupt: usize,
}

impl StreamDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Bytes dropped while searching for sync.
    pub fn discarded_bytes(&self) -> usize {
        self.discarded
    }

    /// Candidate frames rejected (checksum, glove id or voltage range).
    pub fn rejected_frames(&self) -> usize {
        self.corrupt
    }

    /// Next complete, verified frame, or `None` if more bytes are needed.
    pub fn next_frame(&mut self) -> Option<Frame> {
        loop {
            match self.buf.iter().position(|&b| b == SYNC) {
                Some(0) => {}
                Some(p) => {
                    self.discarded += p;
                    self.buf.drain(..p);
                }
                None => {
                    self.discarded += self.buf.len();
                    self.buf.clear();
                    return None;
                }
            }
            if self.buf.len() < FRAME_LEN {
                return None;
            }
            match decode_frame(&self.buf[..FRAME_LEN]) {
                Ok(f) => {
                    self.buf.drain(..FRAME_LEN);
                    return Some(f);
                }
                Err(_) => {
                    self.corrupt += 1;
                    self.discarded += 1;
                    self.buf.drain(..1);
                }
            }
        }
    }
}

impl Iterator for StreamDecoder {
    type Item = Frame;

    fn next(&mut self) -> Option<Frame> {
        self.next_frame()
    }
}

/// Decodes every verified frame in a complete byte stream.
pub fn decode_stream(bytes: &[u8]) -> Vec<Frame> {
    let mut d = StreamDecoder::new();
    d.push(bytes);
    d.collect()
}
