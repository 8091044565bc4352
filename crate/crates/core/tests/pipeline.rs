use gripforge_core::acquisition::{decode_stream, encode_frame, stream_to_session, Frame, Glove, Hand, Session, SessionMeta};
use gripforge_core::analysis::{compare, group_sessions, CompareOptions};
use gripforge_core::pipeline::{load_sessions, simulate_artifacts, somqe_artifacts, write_artifacts, SomqeOptions};
use gripforge_core::profiling::{session_std, window_amv, SensorSeries};
use gripforge_core::sensor::SensorId;
use gripforge_core::simulator::{simulate_cohort, GeneratorConfig, SkillProfile};
use gripforge_core::som::{QeConfig, SomSnapshot, TrainingSchedule};

fn cohort(sessions: u32, seed: u64) -> Vec<Session> {
    let cfg = GeneratorConfig {
        sessions,
        ..GeneratorConfig::with_seed(seed)
    };
    simulate_cohort(&SkillProfile::expert(), &SkillProfile::novice(), &cfg)
        .unwrap()
        .sessions
}

#[test]
fn session_files_round_trip_through_disk() {
    let sessions = cohort(2, 3);
    let dir = tempfile::tempdir().unwrap();
    for s in &sessions {
        s.write(dir.path().join(format!("{}.csv", s.key()))).unwrap();
    }
    std::fs::write(dir.path().join("notes.csv"), "not,a,session\n").unwrap();
    let mut back = load_sessions(dir.path()).unwrap();
    back.sort_by_key(|s| s.key());
    let mut want = sessions.clone();
    want.sort_by_key(|s| s.key());
    assert_eq!(back, want);
}

#[test]
fn frames_to_session_keeps_voltages() {
    let s = &cohort(1, 11)[0];
    let n = s.samples().len() / 12;
    let mut bytes = Vec::new();
    for k in 0..n {
        let mut v = [0u16; 12];
        for (i, x) in v.iter_mut().enumerate() {
            *x = s.samples()[k * 12 + i].v_mv;
        }
        let f = Frame {
            glove: Glove::Right,
            seq: k as u16,
            t_ms: k as u32 * 20,
            voltages: v,
        };
        bytes.extend_from_slice(&encode_frame(&f).unwrap());
    }
    let frames = decode_stream(&bytes);
    assert_eq!(frames.len(), n);
    let meta = SessionMeta {
        user: "replay".into(),
        hand: Hand::Dominant,
        index: 1,
    };
    let back = stream_to_session(&frames, meta).unwrap();
    for id in SensorId::all() {
        let a: Vec<u16> = s.samples_for(id).map(|x| x.v_mv).collect();
        let b: Vec<u16> = back.samples_for(id).map(|x| x.v_mv).collect();
        assert_eq!(a, b, "{id}");
    }
}

#[test]
fn expert_is_steadier_than_novice() {
    let sessions = cohort(3, 5);
    let groups = group_sessions(&sessions);
    let mean_std = |g: &str| {
        let ss = &groups[g];
        ss.iter()
            .map(|s| {
                let v: Vec<f64> = s.samples_for(SensorId::S5).map(|x| x.v_mv as f64).collect();
                session_std(&v).unwrap()
            })
            .sum::<f64>()
            / ss.len() as f64
    };
    assert!(mean_std("expert_d") < mean_std("novice_d"));
    let s = &groups["novice_d"][0];
    let p = window_amv(&SensorSeries::from_session(s, SensorId::S5), 2000).unwrap();
    assert!(p.windows.len() >= 5);
}

#[test]
fn simulate_somqe_compare_end_to_end() {
    let cfg = GeneratorConfig {
        sessions: 4,
        ..GeneratorConfig::with_seed(2)
    };
    let arts = simulate_artifacts(&SkillProfile::expert(), &SkillProfile::novice(), &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_artifacts(dir.path(), &arts).unwrap();
    let sessions = load_sessions(dir.path()).unwrap();
    assert_eq!(sessions.len(), 16);

    let opts = SomqeOptions {
        qe: QeConfig {
            schedule: TrainingSchedule {
                epochs: 10,
                ..TrainingSchedule::default()
            },
            ..QeConfig::default()
        },
        ..SomqeOptions::default()
    };
    let q = somqe_artifacts(&sessions, &opts).unwrap();
    assert_eq!(q[0].name, "qe.csv");
    assert_eq!(q[0].contents.lines().count(), 9);

    let snap = SomSnapshot::parse(&q.iter().find(|a| a.name == "grid.txt").unwrap().contents).unwrap();
    let again = somqe_artifacts(
        &sessions,
        &SomqeOptions {
            grid: Some(snap),
            ..opts.clone()
        },
    )
    .unwrap();
    assert_eq!(again[0].contents, q[0].contents);

    let rows = gripforge_core::analysis::parse_qe_csv(&q[0].contents).unwrap();
    let c = compare(&sessions, Some(&rows), &CompareOptions::default()).unwrap();
    let std = &c.std;
    assert_eq!(std.df, 6.0);
    assert!(std.t < 0.0 && std.p < 0.01);
    assert!(c.qe.as_ref().unwrap().mean_a < c.qe.as_ref().unwrap().mean_b);
    assert_eq!(c.anovas.len(), 3);
}
