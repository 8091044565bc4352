//! File-level pipeline stages: simulate, profile, SOM-QE and compare. Each
//! stage returns its outputs as named text artifacts; writing them is left
//! to the caller.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::acquisition::session::SESSION_HEADER;
use crate::acquisition::{Hand, Session, SessionError};
use crate::analysis::{compare, group_sessions, parse_qe_csv, AnalysisError, CompareOptions};
use crate::plot::{amv_chart, qe_chart, std_chart};
use crate::profiling::{
    amv_csv, std_csv, task_metrics, variability_curve, window_amv, ProfileError, SensorSeries, VariabilityMode,
    DEFAULT_WINDOW_MS,
};
use crate::sensor::SensorId;
use crate::simulator::{session_seed, simulate_cohort, GeneratorConfig, SimError, SkillProfile};
use crate::som::{qe_csv, qe_for_sessions, som_qe_curve, QeConfig, SomError, SomSnapshot};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    BadSession { path: PathBuf, source: SessionError },
    #[error("no session files in {0}")]
    NoSessions(PathBuf),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// One output file, `name` relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: impl Into<String>, contents: impl Into<String>) -> Self {
        Artifact {
            name: name.into(),
            contents: contents.into(),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), PipelineError> {
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        std::fs::write(&path, &a.contents).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

/// Every `*.csv` in `dir` that starts with a session header, in file name
/// order. Other CSV files are ignored.
pub fn load_sessions(dir: &Path) -> Result<Vec<Session>, PipelineError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        if !text.starts_with(SESSION_HEADER) {
            continue;
        }
        out.push(Session::from_csv(&text).map_err(|source| PipelineError::BadSession { path: p.clone(), source })?);
    }
    if out.is_empty() {
        return Err(PipelineError::NoSessions(dir.to_path_buf()));
    }
    Ok(out)
}

pub fn session_file_name(s: &Session) -> String {
    format!("{}.csv", s.key())
}

/// Cohort session files, the two profiles used and a manifest.
pub fn simulate_artifacts(
    expert: &SkillProfile,
    novice: &SkillProfile,
    config: &GeneratorConfig,
) -> Result<Vec<Artifact>, PipelineError> {
    let cohort = simulate_cohort(expert, novice, config)?;
    let mut manifest = format!(
        "# gripforge manifest v1\nseed={}\nsessions_per_hand={}\nexpert_profile=expert.toml\nnovice_profile=novice.toml\nnondominant_std_growth={}\nincident_amplitude_mv={}\nfile,user,hand,index,stream_seed\n",
        config.seed, config.sessions, config.nondominant_std_growth, config.incident_amplitude_mv
    );
    let mut out = Vec::with_capacity(cohort.sessions.len() + 3);
    for s in &cohort.sessions {
        let name = session_file_name(s);
        manifest.push_str(&format!(
            "{name},{},{},{},{}\n",
            s.user(),
            s.hand().code(),
            s.index(),
            session_seed(config.seed, s.user(), s.hand(), s.index())
        ));
        out.push(Artifact::new(name, s.to_csv()));
    }
    out.push(Artifact::new("expert.toml", expert.to_toml()));
    out.push(Artifact::new("novice.toml", novice.to_toml()));
    out.push(Artifact::new("manifest.txt", manifest));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileOptions {
    pub sensors: Vec<SensorId>,
    pub window_ms: u32,
    pub std_mode: VariabilityMode,
    pub plot: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            sensors: SensorId::eligible().collect(),
            window_ms: DEFAULT_WINDOW_MS,
            std_mode: VariabilityMode::PerSensor,
            plot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileOutput {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
}

/// `amv.csv`, `std.csv`, `tasks.csv` and, with `plot`, `std.svg` plus one
/// `amv_<session>.svg` per session.
pub fn profile_artifacts(sessions: &[Session], opts: &ProfileOptions) -> Result<ProfileOutput, PipelineError> {
    if sessions.is_empty() {
        return Err(ProfileError::NoSessions.into());
    }
    let groups = group_sessions(sessions);
    let mut warnings = Vec::new();
    let mut artifacts = Vec::new();

    let sensors: Vec<SensorId> = opts.sensors.iter().copied().filter(|s| !s.is_excluded()).collect();
    let mut amv_rows = Vec::new();
    let mut svgs = Vec::new();
    for group in groups.values() {
        for s in group {
            let profs = sensors
                .iter()
                .filter(|&&id| s.samples_for(id).next().is_some())
                .map(|&id| window_amv(&SensorSeries::from_session(s, id), opts.window_ms))
                .collect::<Result<Vec<_>, _>>()?;
            if opts.plot {
                svgs.push(Artifact::new(format!("amv_{}.svg", s.key()), amv_chart(s, &profs).to_svg()));
            }
            amv_rows.push((s.key(), profs));
        }
    }
    let flat = amv_rows.iter().flat_map(|(k, ps)| ps.iter().map(move |p| (k.as_str(), p)));
    artifacts.push(Artifact::new("amv.csv", amv_csv(flat)));

    let mut std_points = Vec::new();
    let mut pooled = Vec::new();
    for (name, group) in &groups {
        let curve = variability_curve(group, &opts.sensors, opts.std_mode)?;
        for w in curve.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        std_points.extend(curve.points);
        if opts.plot {
            let p = variability_curve(group, &sensors, VariabilityMode::Pooled)?;
            pooled.push((
                name.clone(),
                p.points.iter().map(|x| (x.session_index, x.std)).collect::<Vec<_>>(),
            ));
        }
    }
    artifacts.push(Artifact::new("std.csv", std_csv(&std_points)));

    let mut tasks = String::from("session,duration_s,incidents,step1_s,step2_s,step3_s,step4_s\n");
    for s in groups.values().flatten() {
        let m = task_metrics(s);
        let steps: Vec<String> = m
            .step_durations_s
            .iter()
            .map(|d| d.map(|v| v.to_string()).unwrap_or_default())
            .collect();
        tasks.push_str(&format!("{},{},{},{}\n", s.key(), m.duration_s, m.incident_count, steps.join(",")));
    }
    artifacts.push(Artifact::new("tasks.csv", tasks));

    if opts.plot {
        artifacts.push(Artifact::new("std.svg", std_chart(&pooled).to_svg()));
        artifacts.extend(svgs);
    }
    Ok(ProfileOutput { artifacts, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SomqeOptions {
    pub qe: QeConfig,
    pub hands: Vec<Hand>,
    /// Evaluate against this grid instead of training.
    pub grid: Option<SomSnapshot>,
    pub plot: bool,
}

impl Default for SomqeOptions {
    fn default() -> Self {
        SomqeOptions {
            qe: QeConfig::default(),
            hands: vec![Hand::Dominant],
            grid: None,
            plot: false,
        }
    }
}

/// `qe.csv`, the trained grid(s) and optionally `qe.svg`.
pub fn somqe_artifacts(sessions: &[Session], opts: &SomqeOptions) -> Result<Vec<Artifact>, PipelineError> {
    let groups: Vec<(String, Vec<Session>)> = group_sessions(sessions)
        .into_iter()
        .filter(|(_, v)| opts.hands.contains(&v[0].hand()))
        .collect();
    if groups.is_empty() {
        return Err(SomError::EmptyGroup(format!("no sessions for hands {:?}", opts.hands)).into());
    }
    let mut artifacts = Vec::new();
    let points = match &opts.grid {
        Some(snap) => {
            let mut pts = Vec::new();
            for (name, ss) in &groups {
                pts.extend(qe_for_sessions(snap, name, ss)?);
            }
            pts
        }
        None => {
            let curve = som_qe_curve(&groups, &opts.qe)?;
            for (name, snap) in &curve.snapshots {
                let file = if curve.snapshots.len() == 1 {
                    "grid.txt".to_string()
                } else {
                    format!("grid_{name}.txt")
                };
                artifacts.push(Artifact::new(file, snap.to_text()));
            }
            curve.points
        }
    };
    artifacts.insert(0, Artifact::new("qe.csv", qe_csv(&points)));
    if opts.plot {
        artifacts.push(Artifact::new("qe.svg", qe_chart(&points).to_svg()));
    }
    Ok(artifacts)
}

/// `report.txt` and `report.csv`. QE rows, if given, come from a `qe.csv`.
pub fn compare_artifacts(
    sessions: &[Session],
    qe_csv_text: Option<&str>,
    opts: &CompareOptions,
) -> Result<Vec<Artifact>, PipelineError> {
    let rows = qe_csv_text.map(parse_qe_csv).transpose()?;
    let c = compare(sessions, rows.as_deref(), opts)?;
    Ok(vec![
        Artifact::new("report.txt", c.to_text()),
        Artifact::new("report.csv", c.report().to_csv()),
    ])
}
