//! Seeded expert/novice session generator.
//!
//! Each sensor reading is drawn independently from a clipped normal whose
//! mean is the profile's interpolated session target and whose STD is
//! `SEM · sqrt(n)`, n being the session's sample count per sensor. That
//! makes the session-mean standard error equal to the profile's SEM.

pub mod noise;
pub mod profile;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use thiserror::Error;

use crate::acquisition::{Annotation, Event, Glove, Hand, Sample, Session, SessionError, SAMPLE_PERIOD_MS};
use crate::sensor::SensorId;
pub use noise::ClippedNormal;
pub use profile::{interpolate_profile, FixedIncident, SensorTarget, Skill, SkillProfile};

/// Sessions per hand in the task protocol.
pub const SESSIONS_PER_HAND: u32 = 10;

/// Length of the amplitude bump added after an incident.
pub const INCIDENT_BUMP_MS: u32 = 1000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("session index {0} outside 1..=10")]
    SessionIndex(u32),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("profile has no target for {0}")]
    MissingSensor(SensorId),
    #[error("no clipped normal matches mean {mean} mV with STD {std} mV")]
    InfeasibleNoise { mean: f64, std: f64 },
    #[error(transparent)]
    Session(#[from] SessionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Sessions per hand, 1..=10.
    pub sessions: u32,
    pub sensors: Vec<SensorId>,
    /// Relative STD increase of the non-dominant hand from session 1 to 10.
    pub nondominant_std_growth: f64,
    /// Extra mV added to every sensor for one second after an incident.
    pub incident_amplitude_mv: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 1,
            sessions: SESSIONS_PER_HAND,
            sensors: SensorId::all().collect(),
            nondominant_std_growth: 0.5,
            incident_amplitude_mv: 0.0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(seed: u64) -> Self {
        GeneratorConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(1..=SESSIONS_PER_HAND).contains(&self.sessions) {
            return Err(SimError::InvalidConfig(format!(
                "sessions must be in 1..=10, got {}",
                self.sessions
            )));
        }
        if self.sensors.is_empty() {
            return Err(SimError::InvalidConfig("no sensors to emit".into()));
        }
        if !(self.nondominant_std_growth >= 0.0) || !self.incident_amplitude_mv.is_finite() {
            return Err(SimError::InvalidConfig("growth/amplitude out of range".into()));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-session stream seed from (master seed, user, hand, session index).
pub fn session_seed(master: u64, user: &str, hand: Hand, index: u32) -> u64 {
    let mut h = splitmix64(master);
    for b in user.bytes() {
        h = splitmix64(h ^ b as u64);
    }
    h = splitmix64(h ^ hand.code() as u64);
    splitmix64(h ^ index as u64)
}

/// Readings per sensor for a session of `duration_s` seconds.
pub fn samples_for_duration(duration_s: f64) -> u32 {
    let ms = (duration_s * 1000.0).round() as u32;
    ms / SAMPLE_PERIOD_MS
}

/// Noise STD for one sensor of one session.
fn sample_std(sem: f64, n: u32, hand: Hand, k: u32, growth: f64) -> f64 {
    let base = sem * (n as f64).sqrt();
    match hand {
        Hand::Dominant => base,
        Hand::NonDominant => {
            base * (1.0 + growth * (k as f64 - 1.0) / (SESSIONS_PER_HAND as f64 - 1.0))
        }
    }
}

pub fn simulate_session(
    profile: &SkillProfile,
    config: &GeneratorConfig,
    hand: Hand,
    index: u32,
) -> Result<Session, SimError> {
    config.validate()?;
    profile.validate()?;
    let targets = profile.targets(index)?;
    let n = samples_for_duration(profile.duration_s(index)?);
    let end_ms = n * SAMPLE_PERIOD_MS;
    let user = profile.label.label();
    let mut rng = ChaCha8Rng::seed_from_u64(session_seed(config.seed, user, hand, index));

    let mut annotations = vec![Annotation { t_ms: 0, event: Event::Start }];
    let fractions = profile.step_fractions(index)?;
    let mut cum = 0.0;
    for (k, f) in fractions.iter().enumerate() {
        let slot = (cum * n as f64).round() as u32;
        annotations.push(Annotation {
            t_ms: slot.min(n.saturating_sub(1)) * SAMPLE_PERIOD_MS,
            event: Event::step(k).expect("four steps"),
        });
        cum += f;
    }
    let mut incidents = profile.fixed_incidents_for(hand, index);
    if profile.incident_rate > 0.0 {
        let poisson = Poisson::new(profile.incident_rate).expect("positive rate");
        incidents += poisson.sample(&mut rng) as u32;
    }
    let mut incident_slots: Vec<u32> = (0..incidents).map(|_| rng.random_range(0..n)).collect();
    incident_slots.sort_unstable();
    for &s in &incident_slots {
        annotations.push(Annotation {
            t_ms: s * SAMPLE_PERIOD_MS,
            event: Event::Incident,
        });
    }
    annotations.push(Annotation { t_ms: end_ms, event: Event::End });
    annotations.sort_by_key(|a| (a.t_ms, a.event));

    let bump_slots = INCIDENT_BUMP_MS / SAMPLE_PERIOD_MS;
    let mut bump = vec![0.0f64; n as usize];
    if config.incident_amplitude_mv != 0.0 {
        for &s in &incident_slots {
            for b in bump.iter_mut().skip(s as usize).take(bump_slots as usize) {
                *b = config.incident_amplitude_mv;
            }
        }
    }

    let mut sensors = config.sensors.clone();
    sensors.sort();
    sensors.dedup();
    let glove = match hand {
        Hand::Dominant => Glove::Right,
        Hand::NonDominant => Glove::Left,
    };
    let mut columns: Vec<Vec<u16>> = Vec::with_capacity(sensors.len());
    for &sensor in &sensors {
        let (mean, sem) = *targets.get(&sensor).ok_or(SimError::MissingSensor(sensor))?;
        let std = sample_std(sem, n, hand, index, config.nondominant_std_growth);
        let clipped = ClippedNormal::matching(mean, std).ok_or(SimError::InfeasibleNoise { mean, std })?;
        let normal = Normal::new(clipped.loc, clipped.scale).expect("finite scale");
        columns.push(
            (0..n as usize)
                .map(|i| {
                    let x = normal.sample(&mut rng) + bump[i];
                    x.clamp(0.0, 3300.0).round() as u16
                })
                .collect(),
        );
    }
    let mut samples = Vec::with_capacity(n as usize * sensors.len());
    for i in 0..n as usize {
        for (j, &sensor) in sensors.iter().enumerate() {
            samples.push(Sample {
                glove,
                sensor,
                t_ms: i as u32 * SAMPLE_PERIOD_MS,
                v_mv: columns[j][i],
            });
        }
    }
    Ok(Session::new(user, hand, index, samples, annotations)?)
}

/// Sessions of both users and both hands, ordered expert/novice, dominant/
/// non-dominant, then session index.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub sessions: Vec<Session>,
}

impl Cohort {
    pub fn select(&self, user: &str, hand: Hand) -> Vec<Session> {
        self.sessions
            .iter()
            .filter(|s| s.user() == user && s.hand() == hand)
            .cloned()
            .collect()
    }
}

pub fn simulate_cohort(
    expert: &SkillProfile,
    novice: &SkillProfile,
    config: &GeneratorConfig,
) -> Result<Cohort, SimError> {
    config.validate()?;
    let mut jobs = Vec::new();
    for profile in [expert, novice] {
        for hand in [Hand::Dominant, Hand::NonDominant] {
            for k in 1..=config.sessions {
                jobs.push((profile, hand, k));
            }
        }
    }
    // each session owns its own seeded stream, so generation order is free
    let sessions = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(p, hand, k)| scope.spawn(move || simulate_session(p, config, hand, k)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("generator thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(Cohort { sessions })
}
