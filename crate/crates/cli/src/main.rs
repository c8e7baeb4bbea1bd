use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaptsel_core::config::{AdapterConfig, PRESET_NAMES};
use adaptsel_core::geometry::Vec3;
use adaptsel_core::scene::{Scene, TargetId};
use adaptsel_core::simulator::{
    generate_environment, run_batch, run_trial, BatchConfig, BatchError, EnvKind, EnvironmentSpec,
    TrajectoryParams, TrialMode,
};
use adaptsel_core::trace::{read_raw, replay, ReplayOutcome, TraceError};
use adaptsel_service::{SceneCatalog, ServiceOptions};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

/// Adaptive switching between VR ray-selection techniques.
#[derive(Parser)]
#[command(name = "adaptsel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a study environment and write its scene document.
    Generate {
        #[arg(long)]
        env: EnvKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target visual angle, degrees.
        #[arg(long, default_value_t = 2.5)]
        target_size: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one simulated selection trial and print its result.
    Trial(TrialArgs),
    /// Run a batch of simulated trials; writes summary, per-trial rows and traces.
    Batch {
        /// Batch config document.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the engine over a recorded trace and compare every frame.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        /// Engine config that must match the one recorded.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Host the WebSocket session service.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Scene document to offer (and open by default) besides the bundled ones.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, default_value = "application")]
        preset: String,
        /// Sandbox bundle served at `/`.
        #[arg(long, default_value = "sandbox-ui/dist")]
        static_dir: PathBuf,
        /// Write each session's trace here when it closes.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Check scene, engine config, batch config or trace files.
    Validate {
        #[arg(long)]
        scene: Vec<PathBuf>,
        #[arg(long)]
        config: Vec<PathBuf>,
        #[arg(long)]
        batch: Vec<PathBuf>,
        #[arg(long)]
        trace: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct TrialArgs {
    /// Scene document; otherwise a generated environment.
    #[arg(long, requires = "target")]
    scene: Option<PathBuf>,
    #[arg(long)]
    target: Option<u32>,
    #[arg(long, conflicts_with = "scene", default_value = "sparse")]
    env: EnvKind,
    #[arg(long, default_value_t = 2.5)]
    target_size: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// adaptive, raycasting, stickyray or raycursor.
    #[arg(long, default_value = "adaptive")]
    mode: TrialMode,
    #[arg(long, default_value = "study")]
    preset: String,
    /// Engine config overrides on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the decision trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Config(String),
    Divergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Config(_) => 2,
            Failure::Divergence(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Config(m) | Failure::Divergence(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Preset document: `<ADAPTSEL_PRESET_DIR>/<name>.json` when present, else a
/// built-in preset.
fn preset_document(name: &str) -> Result<Value, Failure> {
    if let Some(dir) = std::env::var_os("ADAPTSEL_PRESET_DIR") {
        let path = Path::new(&dir).join(format!("{name}.json"));
        if path.is_file() {
            return serde_json::from_str(&read(&path)?)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())));
        }
    }
    if PRESET_NAMES.contains(&name) {
        Ok(json!({ "preset": name }))
    } else {
        Err(Failure::Usage(format!(
            "unknown preset `{name}` (expected one of {})",
            PRESET_NAMES.join(", ")
        )))
    }
}

fn engine_config(preset: &str, overrides: Option<&Path>) -> Result<AdapterConfig, Failure> {
    let mut doc = preset_document(preset)?;
    if let Some(path) = overrides {
        let extra: Value = serde_json::from_str(&read(path)?).map_err(config_err)?;
        let (Some(base), Value::Object(extra)) = (doc.as_object_mut(), extra) else {
            return Err(Failure::Config(format!(
                "{}: expected a JSON object",
                path.display()
            )));
        };
        base.extend(extra);
    }
    AdapterConfig::from_json(&doc.to_string(), None).map_err(config_err)
}

fn load_scene(path: &Path) -> Result<Scene, Failure> {
    Scene::from_json(&read(path)?).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn generate(env: EnvKind, seed: u64, target_size: f64, out: &Path) -> Result<(), Failure> {
    let spec = EnvironmentSpec::new(env, target_size, seed);
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let environment = generate_environment(&spec).map_err(config_err)?;
    write(out, &environment.scene.to_json())?;
    println!("{}", environment.target.0);
    Ok(())
}

fn trial(args: &TrialArgs) -> Result<(), Failure> {
    let config = engine_config(&args.preset, args.config.as_deref())?;
    let (scene, target, ready) = match &args.scene {
        Some(path) => {
            let scene = load_scene(path)?;
            let target = TargetId(args.target.expect("clap requires --target"));
            if scene.get(target).is_none() {
                return Err(Failure::Usage(format!("scene has no target {}", target.0)));
            }
            let ready = scene
                .content_box(0.0)
                .map(|b| (b.min + b.max) / 2.0)
                .unwrap_or_else(|| Vec3::new(0.0, 1.6, 3.0));
            (scene, target, ready)
        }
        None => {
            let spec = EnvironmentSpec::new(args.env, args.target_size, args.seed);
            spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let env = generate_environment(&spec).map_err(config_err)?;
            let ready = spec.center();
            (env.scene, env.target, ready)
        }
    };
    let traj = TrajectoryParams::default();
    let (result, trace) = run_trial(&scene, target, &ready, args.mode, &traj, &config, args.seed);
    if let Some(path) = &args.trace {
        write(path, &trace.to_jsonl())?;
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&result).expect("result serializes")
    );
    Ok(())
}

fn batch(config: Option<&Path>, preset: Option<&str>, out: &Path) -> Result<(), Failure> {
    let mut batch = match config {
        Some(path) => BatchConfig::from_json(&read(path)?).map_err(|e| match e {
            BatchError::Schema { .. } | BatchError::Invalid(_) => {
                Failure::Config(format!("{}: {e}", path.display()))
            }
            other => config_err(other),
        })?,
        None => BatchConfig::default(),
    };
    if let Some(name) = preset {
        let doc = preset_document(name)?;
        match doc.get("preset").and_then(Value::as_str) {
            Some(builtin) if doc.as_object().is_some_and(|m| m.len() == 1) => {
                batch.preset = builtin.to_string();
            }
            _ => batch.config = Some(doc),
        }
    }
    let output = run_batch(&batch).map_err(config_err)?;
    output.write(out).map_err(config_err)?;
    println!(
        "{} trials written to {}",
        output.trials.len(),
        out.display()
    );
    Ok(())
}

fn replay_trace(trace: &Path, config: Option<&Path>) -> Result<(), Failure> {
    let file = std::fs::File::open(trace)
        .map_err(|e| Failure::Config(format!("{}: {e}", trace.display())))?;
    let raw = read_raw(BufReader::new(file)).map_err(config_err)?;
    let config = match config {
        Some(path) => Some(AdapterConfig::load(path, None).map_err(config_err)?),
        None => None,
    };
    match replay(&raw, config.as_ref()) {
        Ok(ReplayOutcome::Identical { frames, switches }) => {
            println!("identical: {frames} frames, {switches} switches");
            Ok(())
        }
        Ok(ReplayOutcome::Diverged(d)) => Err(Failure::Divergence(format!(
            "diverged at frame {} (line {}), field `{}`: recorded {} replayed {}",
            d.frame, d.line, d.field, d.recorded, d.replayed
        ))),
        Err(e @ TraceError::Pointer { .. }) => Err(Failure::Divergence(e.to_string())),
        Err(e) => Err(config_err(e)),
    }
}

fn serve(
    host: &str,
    port: u16,
    scene: Option<&Path>,
    preset: &str,
    static_dir: PathBuf,
    trace_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    let config = engine_config(preset, None)?;
    let mut catalog = SceneCatalog::bundled();
    let mut default_scene = EnvKind::Sparse.name().to_string();
    if let Some(path) = scene {
        let name = path
            .file_stem()
            .map_or("scene".into(), |s| s.to_string_lossy().into_owned());
        catalog.insert(&name, load_scene(path)?);
        default_scene = name;
    }
    if let Some(dir) = &trace_dir {
        std::fs::create_dir_all(dir).map_err(config_err)?;
    }
    let options = ServiceOptions {
        catalog,
        default_scene,
        config,
        static_dir,
        trace_dir,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(config_err)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| Failure::Config(format!("cannot listen on {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(config_err)?;
        println!("listening on http://{addr}");
        adaptsel_service::serve(listener, options)
            .await
            .map_err(config_err)
    })
}

fn validate(
    scenes: &[PathBuf],
    configs: &[PathBuf],
    batches: &[PathBuf],
    traces: &[PathBuf],
) -> Result<(), Failure> {
    if scenes.len() + configs.len() + batches.len() + traces.len() == 0 {
        return Err(Failure::Usage(
            "nothing to validate: pass --scene, --config, --batch or --trace".into(),
        ));
    }
    let mut bad = Vec::new();
    let mut check = |path: &Path, r: Result<String, String>| match r {
        Ok(detail) => println!("ok {}: {detail}", path.display()),
        Err(e) => {
            println!("invalid {}: {e}", path.display());
            bad.push(path.display().to_string());
        }
    };
    for p in scenes {
        let r = read(p)
            .map_err(|f| f.message().to_string())
            .and_then(|t| Scene::from_json(&t).map_err(|e| e.to_string()));
        check(p, r.map(|s| format!("{} targets", s.len())));
    }
    for p in configs {
        let r = AdapterConfig::load(p, None).map_err(|e| e.to_string());
        check(p, r.map(|c| format!("config {}", c.hash())));
    }
    for p in batches {
        let r = read(p).map_err(|f| f.message().to_string()).and_then(|t| {
            let b = BatchConfig::from_json(&t).map_err(|e| e.to_string())?;
            b.adapter_config().map_err(|e| e.to_string())?;
            Ok(b)
        });
        check(p, r.map(|b| format!("{} trials", b.trial_count())));
    }
    for p in traces {
        let r = std::fs::File::open(p)
            .map_err(|e| e.to_string())
            .and_then(|f| read_raw(BufReader::new(f)).map_err(|e| e.to_string()));
        check(p, r.map(|t| format!("{} frames", t.frames.len())));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Config(format!("invalid: {}", bad.join(", "))))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            env,
            seed,
            target_size,
            out,
        } => generate(env, seed, target_size, &out),
        Command::Trial(args) => trial(&args),
        Command::Batch {
            config,
            preset,
            out,
        } => batch(config.as_deref(), preset.as_deref(), &out),
        Command::Replay { trace, config } => replay_trace(&trace, config.as_deref()),
        Command::Serve {
            host,
            port,
            scene,
            preset,
            static_dir,
            trace_dir,
        } => serve(
            &host,
            port,
            scene.as_deref(),
            &preset,
            static_dir,
            trace_dir,
        ),
        Command::Validate {
            scene,
            config,
            batch,
            trace,
        } => validate(&scene, &config, &batch, &trace),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
