use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use baac::agent::Status;
use baac::engine::{run, EngineConfig, EngineError};
use baac::lang::{load_settings, Mode, Strategy};
use baac::load::load_problem;
use baac::render::{render_grid, RenderHints};
use baac::semantics::{check_trajectory, Fixture};
use baac::trace::{write_trace, Trace};

#[derive(Parser)]
#[command(name = "baac", version, about = "Run, check and render multi-agent action theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the agents of a settings file up to its horizon.
    Run {
        settings: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        horizon: Option<u32>,
        /// Write the run log here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Write the trajectory as a fixture here.
        #[arg(long)]
        fixture_out: Option<PathBuf>,
        /// Run every agent on one thread.
        #[arg(long)]
        deterministic: bool,
    },
    /// Validate a trajectory fixture against its theories.
    Check { fixture: PathBuf },
    /// Draw a trace or fixture as ASCII frames.
    Render {
        file: PathBuf,
        /// Settings file to take `render.*` hints from.
        #[arg(long)]
        settings: Option<PathBuf>,
    },
}

/// Exit statuses.
const OK: u8 = 0;
const GOAL_FAILURE: u8 = 1;
const CONFIG: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run { settings, seed, strategy, mode, horizon, trace_out, fixture_out, deterministic } => {
            cmd_run(&settings, RunFlags { seed, strategy, mode, horizon, trace_out, fixture_out, deterministic })
        }
        Command::Check { fixture } => cmd_check(&fixture),
        Command::Render { file, settings } => cmd_render(&file, settings.as_deref()),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(CONFIG)
        }
    }
}

struct RunFlags {
    seed: Option<u64>,
    strategy: Option<Strategy>,
    mode: Option<Mode>,
    horizon: Option<u32>,
    trace_out: Option<PathBuf>,
    fixture_out: Option<PathBuf>,
    deterministic: bool,
}

fn cmd_run(path: &Path, flags: RunFlags) -> Result<u8> {
    let mut settings = load_settings(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(s) = flags.seed {
        settings.seed = s;
    }
    if let Some(s) = flags.strategy {
        settings.strategy = s;
    }
    if let Some(m) = flags.mode {
        settings.mode = m;
    }
    if let Some(h) = flags.horizon {
        settings.horizon = h;
    }
    if flags.deterministic {
        settings.deterministic = true;
    }
    let problem = load_problem(&settings.theories)?;
    let config = EngineConfig::from_settings(&settings);
    let run = match run(&problem, &config) {
        Ok(r) => r,
        Err(e @ (EngineError::Initial(_) | EngineError::Global(_))) => {
            eprintln!("error: {e}");
            return Ok(CONFIG);
        }
        Err(e) => return Err(e.into()),
    };

    if let Some(out) = &flags.trace_out {
        let theories = relative_paths(&settings.theories, out)?;
        let text = write_trace(&problem.sig, &run, &theories, &settings.render);
        std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    }
    if let Some(out) = &flags.fixture_out {
        let theories = relative_paths(&settings.theories, out)?;
        let text = Fixture::from_trajectory(&problem.sig, theories, &run.trajectory).render();
        std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    }

    for v in &run.report.violations {
        eprintln!("violation: {v}");
    }
    let mut ok = run.report.is_valid();
    for (agent, status) in &run.statuses {
        let reached = run.succeeded(agent);
        let note = if *status == Status::Failed { " (failed)" } else { "" };
        println!("{agent}: {}{note}", if reached { "success" } else { "failure" });
        if *status != Status::Failed && !reached {
            ok = false;
        }
    }
    Ok(if ok { OK } else { GOAL_FAILURE })
}

fn cmd_check(path: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let fixture = Fixture::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let problem = load_problem(&fixture.theory_paths(base))?;
    let traj = fixture.to_trajectory(&problem.sig)?;
    let report = check_trajectory(&problem, &traj, fixture.horizon as usize);
    if report.is_valid() {
        println!("valid");
        for (agent, ok) in &report.success {
            println!("{agent}: {}", if *ok { "success" } else { "failure" });
        }
        Ok(OK)
    } else {
        for v in &report.violations {
            println!("{v}");
        }
        Ok(GOAL_FAILURE)
    }
}

fn cmd_render(path: &Path, settings: Option<&Path>) -> Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (mut hints, states) = match Trace::parse(&text) {
        Ok(trace) => (trace.render.clone(), trace.state_maps()?),
        Err(trace_err) => {
            let fixture = Fixture::parse(&text)
                .map_err(|e| anyhow::anyhow!("{} is neither a trace ({trace_err}) nor a fixture ({e})", path.display()))?;
            let states: Vec<BTreeMap<String, i64>> =
                fixture.steps.into_iter().map(|s| s.state.into_iter().collect()).collect();
            (BTreeMap::new(), states)
        }
    };
    if let Some(s) = settings {
        let s = load_settings(s).with_context(|| format!("reading {}", s.display()))?;
        hints.extend(s.render);
    }
    match RenderHints::from_map(&hints) {
        Ok(h) => print!("{}", render_grid(&h, &states)),
        Err(e) => log::warn!("not rendering: {e}"),
    }
    Ok(OK)
}

/// `paths` rewritten relative to the directory that will hold `out`.
fn relative_paths(paths: &[PathBuf], out: &Path) -> Result<Vec<String>> {
    let dir = match out.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let dir = dir.canonicalize().with_context(|| format!("resolving {}", dir.display()))?;
    paths
        .iter()
        .map(|p| {
            let p = p.canonicalize().with_context(|| format!("resolving {}", p.display()))?;
            Ok(relative(&p, &dir).to_string_lossy().replace('\\', "/"))
        })
        .collect()
}

fn relative(path: &Path, dir: &Path) -> PathBuf {
    let a: Vec<Component> = path.components().collect();
    let b: Vec<Component> = dir.components().collect();
    let common = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    if common == 0 {
        return path.to_path_buf();
    }
    let mut out = PathBuf::new();
    for _ in common..b.len() {
        out.push("..");
    }
    for c in &a[common..] {
        out.push(c);
    }
    out
}
