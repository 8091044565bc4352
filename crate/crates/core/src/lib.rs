//! Grip-force analytics: FSR glove sensors, session acquisition, windowed
//! profiling, self-organizing map quantization error and the statistics used
//! to tell expert from novice manual robot control.

pub mod acquisition;
pub mod analysis;
pub mod pipeline;
pub mod plot;
pub mod profiling;
pub mod sensor;
pub mod simulator;
pub mod som;
pub mod stats;

pub use acquisition::{Glove, Hand, Session};
pub use sensor::SensorId;
