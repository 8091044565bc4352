use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gripforge_core::acquisition::{stream_to_session, Glove, Hand, SessionMeta, StreamDecoder};
use gripforge_core::analysis::CompareOptions;
use gripforge_core::pipeline::{
    compare_artifacts, load_sessions, profile_artifacts, simulate_artifacts, somqe_artifacts, write_artifacts,
    ProfileOptions, SomqeOptions,
};
use gripforge_core::profiling::{VariabilityMode, DEFAULT_WINDOW_MS};
use gripforge_core::sensor::SensorId;
use gripforge_core::simulator::{GeneratorConfig, SkillProfile, SESSIONS_PER_HAND};
use gripforge_core::som::{InputMode, QeConfig, QeMode, SomSnapshot, TrainingSchedule};

const PROFILE_DIR_ENV: &str = "GRIPFORGE_PROFILE_DIR";

#[derive(Parser)]
#[command(name = "gripforge", version, about = "Grip-force session simulation, profiling, SOM-QE and statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an expert/novice cohort of session files plus a manifest.
    Simulate(SimulateArgs),
    /// Decode a binary glove frame stream into a session file.
    Ingest(IngestArgs),
    /// Windowed AmV, session STD and task timing for a directory of sessions.
    Profile(ProfileArgs),
    /// Train the 7x7 map and write per-session quantization error.
    Somqe(SomqeArgs),
    /// t tests on STD and QE, and first-vs-last ANOVAs for S5/S6/S7.
    Compare(CompareArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = SESSIONS_PER_HAND)]
    sessions: u32,
    #[arg(long)]
    out: PathBuf,
    /// Expert profile TOML (default: $GRIPFORGE_PROFILE_DIR/expert.toml, else built in).
    #[arg(long)]
    expert_profile: Option<PathBuf>,
    #[arg(long)]
    novice_profile: Option<PathBuf>,
    /// Relative growth of non-dominant-hand STD from session 1 to 10.
    #[arg(long, default_value_t = 0.5)]
    nondominant_growth: f64,
    /// mV added to all sensors for one second after each incident.
    #[arg(long, default_value_t = 0.0)]
    incident_amplitude: f64,
}

#[derive(clap::Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    user: String,
    /// d (dominant) or n (non-dominant).
    #[arg(long)]
    hand: Hand,
    #[arg(long)]
    index: u32,
    /// Keep only frames of this glove (L or R); required if both are present.
    #[arg(long)]
    glove: Option<Glove>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StdMode {
    PerSensor,
    Pooled,
}

#[derive(clap::Args)]
struct ProfileArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated sensors, e.g. S5,S6,S7 (default: the ten analysis sensors).
    #[arg(long, value_delimiter = ',')]
    sensors: Option<Vec<SensorId>>,
    #[arg(long, default_value_t = DEFAULT_WINDOW_MS)]
    window_ms: u32,
    #[arg(long, value_enum, default_value_t = StdMode::PerSensor)]
    std_mode: StdMode,
    #[arg(long)]
    plot: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Pooled,
    PerGroup,
}

#[derive(Clone, Copy, ValueEnum)]
enum Hands {
    D,
    N,
    Both,
}

#[derive(clap::Args)]
struct SomqeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha0: f64,
    #[arg(long, default_value_t = 3.5)]
    sigma0: f64,
    #[arg(long, value_enum, default_value_t = Mode::Pooled)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Hands::D)]
    hands: Hands,
    /// raw, or window-std:<ms> for per-window STD summaries.
    #[arg(long, default_value = "raw")]
    inputs: InputMode,
    /// z-score each input dimension before training.
    #[arg(long)]
    normalize: bool,
    /// Evaluate against a saved grid snapshot instead of training.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    plot: bool,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    /// qe.csv written by `somqe`.
    #[arg(long)]
    qe: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "d")]
    hand: Hand,
    #[arg(long, default_value_t = DEFAULT_WINDOW_MS)]
    window_ms: u32,
    #[arg(long, value_delimiter = ',', default_value = "S5,S6,S7")]
    sensors: Vec<SensorId>,
}

fn load_profile(explicit: Option<&Path>, name: &str, builtin: fn() -> SkillProfile) -> Result<SkillProfile, String> {
    let path = match explicit {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(PROFILE_DIR_ENV)
            .map(|d| Path::new(&d).join(format!("{name}.toml")))
            .filter(|p| p.exists()),
    };
    match path {
        Some(p) => SkillProfile::read(&p).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(builtin()),
    }
}

fn simulate(a: SimulateArgs) -> Result<(), String> {
    let expert = load_profile(a.expert_profile.as_deref(), "expert", SkillProfile::expert)?;
    let novice = load_profile(a.novice_profile.as_deref(), "novice", SkillProfile::novice)?;
    let cfg = GeneratorConfig {
        sessions: a.sessions,
        nondominant_std_growth: a.nondominant_growth,
        incident_amplitude_mv: a.incident_amplitude,
        ..GeneratorConfig::with_seed(a.seed)
    };
    let arts = simulate_artifacts(&expert, &novice, &cfg).map_err(|e| e.to_string())?;
    write_artifacts(&a.out, &arts).map_err(|e| e.to_string())?;
    println!("wrote {} sessions to {}", 4 * a.sessions, a.out.display());
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<(), String> {
    let bytes = std::fs::read(&a.input).map_err(|e| format!("{}: {e}", a.input.display()))?;
    let mut dec = StreamDecoder::new();
    dec.push(&bytes);
    let mut frames: Vec<_> = dec.by_ref().collect();
    if dec.discarded_bytes() > 0 || dec.rejected_frames() > 0 {
        eprintln!(
            "warning: skipped {} bytes, rejected {} candidate frames",
            dec.discarded_bytes(),
            dec.rejected_frames()
        );
    }
    match a.glove {
        Some(g) => frames.retain(|f| f.glove == g),
        None => {
            if frames.iter().any(|f| f.glove != frames[0].glove) {
                return Err("stream holds both gloves; choose one with --glove".into());
            }
        }
    }
    let meta = SessionMeta {
        user: a.user,
        hand: a.hand,
        index: a.index,
    };
    let s = stream_to_session(&frames, meta).map_err(|e| e.to_string())?;
    s.write(&a.out).map_err(|e| e.to_string())?;
    println!("{}: {} frames, {:.2} s -> {}", s.key(), frames.len(), s.duration_s(), a.out.display());
    Ok(())
}

fn profile(a: ProfileArgs) -> Result<(), String> {
    let sessions = load_sessions(&a.input).map_err(|e| e.to_string())?;
    let opts = ProfileOptions {
        sensors: a.sensors.unwrap_or_else(|| SensorId::eligible().collect()),
        window_ms: a.window_ms,
        std_mode: match a.std_mode {
            StdMode::PerSensor => VariabilityMode::PerSensor,
            StdMode::Pooled => VariabilityMode::Pooled,
        },
        plot: a.plot,
    };
    let out = profile_artifacts(&sessions, &opts).map_err(|e| e.to_string())?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    write_artifacts(&a.out, &out.artifacts).map_err(|e| e.to_string())?;
    println!("profiled {} sessions into {}", sessions.len(), a.out.display());
    Ok(())
}

fn somqe(a: SomqeArgs) -> Result<(), String> {
    let sessions = load_sessions(&a.input).map_err(|e| e.to_string())?;
    let grid = a
        .grid
        .as_ref()
        .map(|p| SomSnapshot::read(p).map_err(|e| format!("{}: {e}", p.display())))
        .transpose()?;
    let defaults = TrainingSchedule::default();
    let opts = SomqeOptions {
        qe: QeConfig {
            schedule: TrainingSchedule {
                epochs: a.epochs,
                alpha0: a.alpha0,
                alpha_end: defaults.alpha_end.min(a.alpha0),
                sigma0: a.sigma0,
                sigma_end: defaults.sigma_end.min(a.sigma0),
                seed: a.seed,
            },
            mode: match a.mode {
                Mode::Pooled => QeMode::Reference,
                Mode::PerGroup => QeMode::PerGroup,
            },
            input_mode: a.inputs,
            normalize: a.normalize,
        },
        hands: match a.hands {
            Hands::D => vec![Hand::Dominant],
            Hands::N => vec![Hand::NonDominant],
            Hands::Both => vec![Hand::Dominant, Hand::NonDominant],
        },
        grid,
        plot: a.plot,
    };
    let arts = somqe_artifacts(&sessions, &opts).map_err(|e| e.to_string())?;
    write_artifacts(&a.out, &arts).map_err(|e| e.to_string())?;
    println!("{} QE rows written to {}", arts[0].contents.lines().count() - 1, a.out.join("qe.csv").display());
    Ok(())
}

fn compare(a: CompareArgs) -> Result<(), String> {
    let sessions = load_sessions(&a.input).map_err(|e| e.to_string())?;
    let qe = a
        .qe
        .as_ref()
        .map(|p| std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display())))
        .transpose()?;
    let opts = CompareOptions {
        hand: a.hand,
        window_ms: a.window_ms,
        anova_sensors: a.sensors,
        ..CompareOptions::default()
    };
    let arts = compare_artifacts(&sessions, qe.as_deref(), &opts).map_err(|e| e.to_string())?;
    write_artifacts(&a.out, &arts).map_err(|e| e.to_string())?;
    print!("{}", arts[0].contents);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ingest(a) => ingest(a),
        Command::Profile(a) => profile(a),
        Command::Somqe(a) => somqe(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
