//! Per-session QE series for groups of sessions (user × hand).

use super::{fit, quantization_error, InputMode, InputSet, SomError, SomSnapshot, TrainingSchedule, ZScore};
use super::{GRID_HEIGHT, GRID_WIDTH};
use crate::acquisition::Session;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QeMode {
    /// One grid trained on the pooled inputs of every group.
    #[default]
    Reference,
    /// One grid per group, trained on that group's inputs only.
    PerGroup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QeConfig {
    pub schedule: TrainingSchedule,
    pub mode: QeMode,
    pub input_mode: InputMode,
    pub normalize: bool,
}

impl Default for QeConfig {
    fn default() -> Self {
        QeConfig {
            schedule: TrainingSchedule::default(),
            mode: QeMode::Reference,
            input_mode: InputMode::Raw,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QePoint {
    pub group: String,
    pub session_key: String,
    pub session_index: u32,
    pub qe: f64,
    pub vectors: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QeCurve {
    pub points: Vec<QePoint>,
    /// Trained grids: one named "pooled" in reference mode, else one per group.
    pub snapshots: Vec<(String, SomSnapshot)>,
}

impl QeCurve {
    pub fn group(&self, name: &str) -> Vec<f64> {
        self.points.iter().filter(|p| p.group == name).map(|p| p.qe).collect()
    }
}

struct Prepared<'a> {
    group: &'a str,
    session: &'a Session,
    set: InputSet,
}

fn prepare<'a>(groups: &'a [(String, Vec<Session>)], mode: InputMode) -> Result<Vec<Prepared<'a>>, SomError> {
    let mut out = Vec::new();
    for (name, sessions) in groups {
        if sessions.is_empty() {
            return Err(SomError::EmptyGroup(name.clone()));
        }
        let mut sorted: Vec<&Session> = sessions.iter().collect();
        sorted.sort_by_key(|s| s.index());
        for s in sorted {
            let set = super::build_inputs_with(s, mode)?;
            if set.vectors.is_empty() {
                return Err(SomError::EmptyInputs);
            }
            out.push(Prepared {
                group: name,
                session: s,
                set,
            });
        }
    }
    Ok(out)
}

fn train_snapshot(inputs: &[&Prepared], config: &QeConfig) -> Result<SomSnapshot, SomError> {
    let mut pooled: Vec<Vec<f64>> = inputs.iter().flat_map(|p| p.set.vectors.iter().cloned()).collect();
    let zscore = if config.normalize {
        let z = ZScore::fit(&pooled)?;
        z.apply(&mut pooled);
        Some(z)
    } else {
        None
    };
    Ok(SomSnapshot {
        grid: fit(GRID_WIDTH, GRID_HEIGHT, &pooled, &config.schedule)?,
        schedule: config.schedule,
        input_mode: config.input_mode,
        zscore,
    })
}

fn evaluate(snapshot: &SomSnapshot, items: &[&Prepared]) -> Result<Vec<QePoint>, SomError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .iter()
            .map(|p| {
                scope.spawn(move || {
                    let qe = match &snapshot.zscore {
                        Some(z) => {
                            let mut v = p.set.vectors.clone();
                            z.apply(&mut v);
                            quantization_error(&snapshot.grid, &v)?
                        }
                        None => quantization_error(&snapshot.grid, &p.set.vectors)?,
                    };
                    Ok(QePoint {
                        group: p.group.to_string(),
                        session_key: p.session.key(),
                        session_index: p.session.index(),
                        qe,
                        vectors: p.set.vectors.len(),
                        skipped: p.set.skipped,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("QE thread panicked"))
            .collect()
    })
}

/// Trains according to `config.mode`, then evaluates QE for every session.
/// Points come out group by group, each ordered by session index.
pub fn som_qe_curve(groups: &[(String, Vec<Session>)], config: &QeConfig) -> Result<QeCurve, SomError> {
    if groups.is_empty() {
        return Err(SomError::EmptyGroup(String::new()));
    }
    let prepared = prepare(groups, config.input_mode)?;
    let all: Vec<&Prepared> = prepared.iter().collect();
    match config.mode {
        QeMode::Reference => {
            let snap = train_snapshot(&all, config)?;
            let points = evaluate(&snap, &all)?;
            Ok(QeCurve {
                points,
                snapshots: vec![("pooled".to_string(), snap)],
            })
        }
        QeMode::PerGroup => {
            let mut points = Vec::new();
            let mut snapshots = Vec::new();
            for (name, _) in groups {
                let mine: Vec<&Prepared> = all.iter().copied().filter(|p| p.group == name).collect();
                let snap = train_snapshot(&mine, config)?;
                points.extend(evaluate(&snap, &mine)?);
                snapshots.push((name.clone(), snap));
            }
            Ok(QeCurve { points, snapshots })
        }
    }
}

/// QE of sessions against an existing (e.g. reloaded) grid.
pub fn qe_for_sessions(snapshot: &SomSnapshot, group: &str, sessions: &[Session]) -> Result<Vec<QePoint>, SomError> {
    let groups = [(group.to_string(), sessions.to_vec())];
    let prepared = prepare(&groups, snapshot.input_mode)?;
    let all: Vec<&Prepared> = prepared.iter().collect();
    evaluate(snapshot, &all)
}

/// `group,session,qe_mv` rows.
pub fn qe_csv(points: &[QePoint]) -> String {
    let mut out = String::from("group,session,qe_mv\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.group, p.session_index, p.qe));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::Hand;
    use crate::simulator::{simulate_session, GeneratorConfig, SkillProfile};

    fn sessions(profile: &SkillProfile, seed: u64, n: u32) -> Vec<Session> {
        let cfg = GeneratorConfig::with_seed(seed);
        (1..=n)
            .map(|k| simulate_session(profile, &cfg, Hand::Dominant, k).unwrap())
            .collect()
    }

    fn quick() -> QeConfig {
        QeConfig {
            schedule: TrainingSchedule {
                epochs: 10,
                ..TrainingSchedule::with_seed(3)
            },
            ..QeConfig::default()
        }
    }

    #[test]
    fn counts_and_order() {
        let groups = vec![
            ("expert_d".to_string(), sessions(&SkillProfile::expert(), 1, 3)),
            ("novice_d".to_string(), sessions(&SkillProfile::novice(), 1, 3)),
        ];
        let c = som_qe_curve(&groups, &quick()).unwrap();
        assert_eq!(c.points.len(), 6);
        assert_eq!(c.snapshots.len(), 1);
        let idx: Vec<u32> = c.points.iter().map(|p| p.session_index).collect();
        assert_eq!(idx, vec![1, 2, 3, 1, 2, 3]);
        assert!(c.group("novice_d").iter().zip(c.group("expert_d")).all(|(n, e)| *n > e));

        let csv = qe_csv(&c.points);
        assert!(csv.starts_with("group,session,qe_mv\nexpert_d,1,"));
        assert_eq!(csv.lines().count(), 7);

        let per = som_qe_curve(&groups, &QeConfig { mode: QeMode::PerGroup, ..quick() }).unwrap();
        assert_eq!(per.snapshots.len(), 2);
        assert_eq!(per.points.len(), 6);
    }

    #[test]
    fn identical_groups_identical_qe() {
        let s = sessions(&SkillProfile::expert(), 2, 2);
        let groups = vec![("a".to_string(), s.clone()), ("b".to_string(), s)];
        for mode in [QeMode::Reference, QeMode::PerGroup] {
            let c = som_qe_curve(&groups, &QeConfig { mode, ..quick() }).unwrap();
            assert_eq!(c.group("a"), c.group("b"));
        }
    }

    #[test]
    fn reloaded_grid_gives_same_qe() {
        let groups = vec![("novice_d".to_string(), sessions(&SkillProfile::novice(), 4, 2))];
        for normalize in [false, true] {
            let c = som_qe_curve(&groups, &QeConfig { normalize, ..quick() }).unwrap();
            let snap = SomSnapshot::parse(&c.snapshots[0].1.to_text()).unwrap();
            let again = qe_for_sessions(&snap, "novice_d", &groups[0].1).unwrap();
            assert_eq!(again, c.points);
        }
    }

    #[test]
    fn summary_inputs() {
        let groups = vec![("expert_d".to_string(), sessions(&SkillProfile::expert(), 5, 2))];
        let cfg = QeConfig {
            input_mode: InputMode::WindowStd { window_ms: 2000 },
            ..quick()
        };
        let c = som_qe_curve(&groups, &cfg).unwrap();
        // 10.2 s and ~9.9 s sessions: 5 and 4 full windows
        assert_eq!(c.points[0].vectors, 5);
        assert!(c.points.iter().all(|p| p.qe >= 0.0));
    }

    #[test]
    fn empty_group_rejected() {
        let groups = vec![("x".to_string(), Vec::new())];
        assert_eq!(som_qe_curve(&groups, &quick()), Err(SomError::EmptyGroup("x".into())));
        assert!(som_qe_curve(&[], &quick()).is_err());
    }
}
