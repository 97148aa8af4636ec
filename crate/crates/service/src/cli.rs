//! `domcity serve` and `domcity export`.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 input unreadable.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use domcity_core::layout::Viewport;
use domcity_core::query::FilterSpec;
use domcity_core::scene::{ColorMode, StyleConfig, TextureMode};

use crate::engine::Engine;
use crate::session::{Origin, SessionState, Snapshot, UpdateMode};
use crate::watch::{watch_file, FileWatcher, DEFAULT_POLL_INTERVAL};
use crate::{server, wire};

#[derive(Parser, Debug)]
#[command(name = "domcity", version, about = "Render HTML documents as layered 3D DOM cities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Serve scenes and live updates over HTTP.
    Serve(ServeArgs),
    /// Write the scene for an HTML file as JSON.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value_t = 7878)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// HTML file to load at startup.
    #[arg(long, conflicts_with = "url")]
    input: Option<PathBuf>,
    /// Fetch HTML from a URL (no scripts run; synthetic layout).
    #[arg(long)]
    url: Option<String>,
    /// Re-read --input whenever it changes.
    #[arg(long, requires = "input")]
    watch: bool,
    /// Stage incoming snapshots until POST /refresh.
    #[arg(long)]
    manual_refresh: bool,
    #[command(flatten)]
    scene: SceneArgs,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    scene: SceneArgs,
}

#[derive(Args, Debug)]
struct SceneArgs {
    #[arg(long, default_value_t = 1.0)]
    layer_gap: f64,
    #[arg(long, value_enum, default_value_t = ColorArg::PerLayer)]
    color_mode: ColorArg,
    #[arg(long, value_enum, default_value_t = TextureArg::None)]
    texture_mode: TextureArg,
    /// Keep elements outside the viewport.
    #[arg(long)]
    no_crop: bool,
    /// Only show elements whose match text contains this (case-insensitive).
    #[arg(long, default_value = "")]
    query: String,
    #[arg(long)]
    depth_min: Option<usize>,
    #[arg(long)]
    depth_max: Option<usize>,
    /// Viewport for synthetic layout, WIDTHxHEIGHT in CSS pixels.
    #[arg(long, default_value = "1280x800", value_parser = parse_viewport)]
    viewport: Viewport,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ColorArg {
    PerLayer,
    TagHash,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TextureArg {
    None,
    Leaves,
    All,
}

fn parse_viewport(text: &str) -> Result<Viewport, String> {
    let (w, h) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {text:?}"))?;
    let w: f64 = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let h: f64 = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    Viewport::new(w, h).map_err(|e| e.to_string())
}

impl SceneArgs {
    fn style(&self) -> StyleConfig {
        StyleConfig {
            layer_gap: self.layer_gap,
            color_mode: match self.color_mode {
                ColorArg::PerLayer => ColorMode::PerLayer,
                ColorArg::TagHash => ColorMode::TagHash,
            },
            texture_mode: match self.texture_mode {
                TextureArg::None => TextureMode::None,
                TextureArg::Leaves => TextureMode::LeavesOnly,
                TextureArg::All => TextureMode::AllBoxes,
            },
            ..StyleConfig::default()
        }
    }

    fn filter(&self) -> FilterSpec {
        FilterSpec {
            depth_min: self.depth_min.unwrap_or(0),
            depth_max: self.depth_max,
            search: self.query.clone(),
            subtree_root: None,
            cropping: !self.no_crop,
        }
    }

    fn session(&self) -> Result<SessionState, CliError> {
        SessionState::new(self.filter(), self.style())
            .and_then(|s| s.with_default_viewport(self.viewport))
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Runtime(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Runtime(m) => m,
        }
    }
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Export(args) => export(&args),
        Command::Serve(args) => match tokio::runtime::Runtime::new() {
            Ok(runtime) => runtime.block_on(serve(args)),
            Err(e) => Err(CliError::Runtime(e.to_string())),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("domcity: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn export(args: &ExportArgs) -> Result<(), CliError> {
    let mut session = args.scene.session()?;
    let bytes = std::fs::read(&args.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.input.display())))?;
    session
        .handle_snapshot(Snapshot::from_file_bytes(&bytes))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(&args.out, wire::scene_to_json(session.scene()))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", args.out.display())))
}

async fn fetch(url: &str) -> Result<Snapshot, CliError> {
    let unreadable = |e: reqwest::Error| CliError::Input(format!("cannot fetch {url}: {e}"));
    let body = reqwest::get(url)
        .await
        .and_then(|r| r.error_for_status())
        .map_err(unreadable)?
        .text()
        .await
        .map_err(unreadable)?;
    log::warn!("{url}: fetched HTML only; no scripts run and layout is synthetic");
    Ok(Snapshot::from_html(body, Origin::Url))
}

async fn serve(args: ServeArgs) -> Result<(), CliError> {
    let mut session = args.scene.session()?;
    let mut watcher = None;
    let initial = match (&args.input, &args.url) {
        (Some(path), _) => {
            let (w, bytes) = FileWatcher::open(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            if args.watch {
                watcher = Some(w);
            }
            Some(Snapshot::from_file_bytes(&bytes))
        }
        (None, Some(url)) => Some(fetch(url).await?),
        (None, None) => None,
    };
    if let Some(snapshot) = initial {
        session
            .handle_snapshot(snapshot)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    if args.manual_refresh {
        session
            .set_update_mode(UpdateMode::Manual)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }

    let engine = Engine::new(session);
    if let Some(watcher) = watcher {
        tokio::spawn(watch_file(engine.clone(), watcher, DEFAULT_POLL_INTERVAL));
    }
    let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
        .await
        .map_err(|e| CliError::Runtime(format!("cannot listen on {}:{}: {e}", args.host, args.port)))?;
    if let Ok(addr) = listener.local_addr() {
        log::info!("serving on http://{addr}");
    }
    server::serve(engine, listener)
        .await
        .map_err(|e| CliError::Runtime(e.to_string()))
}
