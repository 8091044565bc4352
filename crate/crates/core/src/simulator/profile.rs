//! Skill profiles: per-sensor targets, durations, incidents and step timing
//! for a synthetic expert or novice.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{SimError, SESSIONS_PER_HAND};
use crate::acquisition::Hand;
use crate::sensor::SensorId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Skill {
    Expert,
    Novice,
}

impl Skill {
    pub fn label(self) -> &'static str {
        match self {
            Skill::Expert => "expert",
            Skill::Novice => "novice",
        }
    }
}

impl fmt::Display for Skill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Skill {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expert" => Ok(Skill::Expert),
            "novice" => Ok(Skill::Novice),
            _ => Err(format!("unknown skill {s:?}")),
        }
    }
}

/// Session-mean targets (mV) and their standard errors for the first and
/// last session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorTarget {
    pub first_mean: f64,
    pub first_sem: f64,
    pub last_mean: f64,
    pub last_sem: f64,
}

impl SensorTarget {
    pub const fn new(first_mean: f64, first_sem: f64, last_mean: f64, last_sem: f64) -> Self {
        SensorTarget {
            first_mean,
            first_sem,
            last_mean,
            last_sem,
        }
    }
}

/// Incidents placed deterministically in one session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedIncident {
    #[serde(with = "hand_code")]
    pub hand: Hand,
    pub session: u32,
    pub count: u32,
}

mod hand_code {
    use super::Hand;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(h: &Hand, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&h.code().to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Hand, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillProfile {
    pub label: Skill,
    pub duration_first_s: f64,
    pub duration_last_s: f64,
    /// Expected incidents per session (Poisson), on top of `fixed_incidents`.
    pub incident_rate: f64,
    #[serde(default)]
    pub fixed_incidents: Vec<FixedIncident>,
    /// Relative durations of steps 1-4 in the first and last session.
    pub steps_first: [f64; 4],
    pub steps_last: [f64; 4],
    #[serde(with = "sensor_keys")]
    pub sensors: BTreeMap<SensorId, SensorTarget>,
}

mod sensor_keys {
    use super::{SensorId, SensorTarget};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<SensorId, SensorTarget>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let named: BTreeMap<String, &SensorTarget> =
            m.iter().map(|(k, v)| (k.to_string(), v)).collect();
        named.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<SensorId, SensorTarget>, D::Error> {
        let named = BTreeMap::<String, SensorTarget>::deserialize(d)?;
        named
            .into_iter()
            .map(|(k, v)| {
                k.parse::<SensorId>()
                    .map(|id| (id, v))
                    .map_err(serde::de::Error::custom)
            })
            .collect()
    }
}

fn lerp(a: f64, b: f64, k: u32) -> f64 {
    a + (k as f64 - 1.0) / (SESSIONS_PER_HAND as f64 - 1.0) * (b - a)
}

fn check_index(k: u32) -> Result<(), SimError> {
    if (1..=SESSIONS_PER_HAND).contains(&k) {
        Ok(())
    } else {
        Err(SimError::SessionIndex(k))
    }
}

impl SkillProfile {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidProfile(m));
        for (s, t) in &self.sensors {
            for m in [t.first_mean, t.last_mean] {
                if !(0.0..=3300.0).contains(&m) {
                    return bad(format!("{s}: mean {m} outside [0, 3300] mV"));
                }
            }
            for e in [t.first_sem, t.last_sem] {
                if !(e > 0.0 && e.is_finite()) {
                    return bad(format!("{s}: SEM {e} must be positive"));
                }
            }
        }
        for d in [self.duration_first_s, self.duration_last_s] {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("duration {d} s must be positive"));
            }
        }
        if !(self.incident_rate >= 0.0 && self.incident_rate.is_finite()) {
            return bad(format!("incident rate {} must be >= 0", self.incident_rate));
        }
        for steps in [self.steps_first, self.steps_last] {
            if steps.iter().any(|f| !(*f >= 0.0)) || (steps.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad(format!("step fractions {steps:?} must be >= 0 and sum to 1"));
            }
        }
        for fi in &self.fixed_incidents {
            check_index(fi.session)?;
        }
        Ok(())
    }

    /// Interpolated `(mean, sem)` per sensor for session `k` in 1..=10.
    pub fn targets(&self, k: u32) -> Result<BTreeMap<SensorId, (f64, f64)>, SimError> {
        interpolate_profile(self, k)
    }

    pub fn duration_s(&self, k: u32) -> Result<f64, SimError> {
        check_index(k)?;
        Ok(lerp(self.duration_first_s, self.duration_last_s, k))
    }

    pub fn step_fractions(&self, k: u32) -> Result<[f64; 4], SimError> {
        check_index(k)?;
        let raw: [f64; 4] = std::array::from_fn(|i| lerp(self.steps_first[i], self.steps_last[i], k));
        let total: f64 = raw.iter().sum();
        Ok(raw.map(|f| f / total))
    }

    pub fn fixed_incidents_for(&self, hand: Hand, k: u32) -> u32 {
        self.fixed_incidents
            .iter()
            .filter(|f| f.hand == hand && f.session == k)
            .map(|f| f.count)
            .sum()
    }

    pub fn to_toml(&self) -> String {
        let body = toml::to_string(self).expect("profile serializes");
        format!("# gripforge profile v1\n{body}")
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let p: SkillProfile =
            toml::from_str(text).map_err(|e| SimError::InvalidProfile(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| SimError::InvalidProfile(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml(&text)
    }

    /// First/last-session values reported for the expert's dominant hand.
    /// Sensors other than S5/S6/S7 carry placeholder targets.
    pub fn expert() -> Self {
        let mut sensors = placeholders(Skill::Expert);
        sensors.insert(SensorId::S5, SensorTarget::new(241.0, 4.3, 78.0, 4.9));
        sensors.insert(SensorId::S6, SensorTarget::new(576.0, 3.8, 474.0, 4.5));
        sensors.insert(SensorId::S7, SensorTarget::new(594.0, 1.8, 609.0, 2.2));
        SkillProfile {
            label: Skill::Expert,
            duration_first_s: 10.20,
            duration_last_s: 7.48,
            incident_rate: 0.0,
            // three small trajectory adjustments, last three non-dominant sessions
            fixed_incidents: (8..=10)
                .map(|session| FixedIncident {
                    hand: Hand::NonDominant,
                    session,
                    count: 1,
                })
                .collect(),
            steps_first: [0.30, 0.25, 0.25, 0.20],
            steps_last: [0.30, 0.25, 0.25, 0.20],
            sensors,
        }
    }

    /// First/last-session values reported for the novice's dominant hand.
    pub fn novice() -> Self {
        let mut sensors = placeholders(Skill::Novice);
        sensors.insert(SensorId::S5, SensorTarget::new(790.0, 2.7, 640.0, 3.6));
        sensors.insert(SensorId::S6, SensorTarget::new(504.0, 2.4, 445.0, 3.3));
        sensors.insert(SensorId::S7, SensorTarget::new(98.0, 1.2, 78.0, 1.6));
        SkillProfile {
            label: Skill::Novice,
            duration_first_s: 24.56,
            duration_last_s: 18.78,
            // 20 incidents over 2 hands x 10 sessions
            incident_rate: 1.0,
            fixed_incidents: Vec::new(),
            steps_first: [0.45, 0.20, 0.20, 0.15],
            steps_last: [0.35, 0.22, 0.23, 0.20],
            sensors,
        }
    }
}

/// Placeholder targets for sensors without published values. The novice
/// gets larger magnitudes and roughly 2.5x the per-sample spread.
fn placeholders(skill: Skill) -> BTreeMap<SensorId, SensorTarget> {
    let ids = [2u8, 3, 8, 9, 10, 11, 12];
    let (means, scale, sem_first, sem_last): ([f64; 7], f64, f64, f64) = match skill {
        Skill::Expert => ([310.0, 280.0, 350.0, 420.0, 390.0, 260.0, 300.0], 0.9, 2.7, 3.1),
        Skill::Novice => ([520.0, 480.0, 610.0, 700.0, 650.0, 450.0, 560.0], 0.85, 4.3, 4.9),
    };
    let mut m: BTreeMap<SensorId, SensorTarget> = ids
        .iter()
        .zip(means)
        .map(|(&i, mean)| {
            (
                SensorId::new(i).expect("valid id"),
                SensorTarget::new(mean, sem_first, mean * scale, sem_last),
            )
        })
        .collect();
    // S1 and S4: near-zero output
    for id in [SensorId::S1, SensorId::S4] {
        m.insert(id, SensorTarget::new(3.0, 0.1, 3.0, 0.1));
    }
    m
}

/// Linear interpolation of every sensor target between session 1 and 10.
pub fn interpolate_profile(
    profile: &SkillProfile,
    k: u32,
) -> Result<BTreeMap<SensorId, (f64, f64)>, SimError> {
    check_index(k)?;
    Ok(profile
        .sensors
        .iter()
        .map(|(&s, t)| {
            (
                s,
                (lerp(t.first_mean, t.last_mean, k), lerp(t.first_sem, t.last_sem, k)),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_endpoints() {
        let e = SkillProfile::expert();
        assert_eq!(e.targets(1).unwrap()[&SensorId::S5], (241.0, 4.3));
        assert_eq!(e.targets(10).unwrap()[&SensorId::S5], (78.0, 4.9));
        let k = 4;
        let want = 241.0 + (k as f64 - 1.0) / 9.0 * (78.0 - 241.0);
        assert!((e.targets(k).unwrap()[&SensorId::S5].0 - want).abs() < 1e-12);
        assert!(matches!(e.targets(0), Err(SimError::SessionIndex(0))));
        assert!(matches!(e.targets(11), Err(SimError::SessionIndex(11))));
    }

    #[test]
    fn default_profiles_carry_reported_values() {
        let n = SkillProfile::novice();
        assert_eq!(n.sensors[&SensorId::S5], SensorTarget::new(790.0, 2.7, 640.0, 3.6));
        assert_eq!(n.sensors[&SensorId::S6], SensorTarget::new(504.0, 2.4, 445.0, 3.3));
        assert_eq!(n.sensors[&SensorId::S7], SensorTarget::new(98.0, 1.2, 78.0, 1.6));
        assert_eq!((n.duration_first_s, n.duration_last_s), (24.56, 18.78));
        let e = SkillProfile::expert();
        assert_eq!(e.sensors[&SensorId::S6], SensorTarget::new(576.0, 3.8, 474.0, 4.5));
        assert_eq!(e.sensors[&SensorId::S7], SensorTarget::new(594.0, 1.8, 609.0, 2.2));
        assert_eq!((e.duration_first_s, e.duration_last_s), (10.20, 7.48));
        let fixed: u32 = e.fixed_incidents.iter().map(|f| f.count).sum();
        assert_eq!(fixed, 3);
        assert_eq!(n.incident_rate * 20.0, 20.0);
        assert_eq!(e.sensors.len(), 12);
        e.validate().unwrap();
        n.validate().unwrap();
    }

    #[test]
    fn skill_trends() {
        let e = SkillProfile::expert();
        let s5: Vec<f64> = (1..=10).map(|k| e.targets(k).unwrap()[&SensorId::S5].0).collect();
        assert!(s5.windows(2).all(|w| w[1] < w[0]));
        let s7: Vec<f64> = (1..=10).map(|k| e.targets(k).unwrap()[&SensorId::S7].0).collect();
        assert!(s7.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn toml_round_trip() {
        for p in [SkillProfile::expert(), SkillProfile::novice()] {
            let text = p.to_toml();
            assert_eq!(SkillProfile::from_toml(&text).unwrap(), p);
        }
        let mut bad = SkillProfile::expert();
        bad.steps_first = [0.5, 0.5, 0.5, 0.0];
        assert!(SkillProfile::from_toml(&bad.to_toml()).is_err());
        let mut bad = SkillProfile::novice();
        bad.sensors.get_mut(&SensorId::S5).unwrap().first_sem = 0.0;
        assert!(matches!(bad.validate(), Err(SimError::InvalidProfile(_))));
    }
}
