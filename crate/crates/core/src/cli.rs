//! Command-line front end. Exit codes: 0 success, 1 error, 2 warnings under
//! `--warn-as-error`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench;
use crate::command::Command;
use crate::engine::{Engine, Outcome};
use crate::error::{EngineError, Result};
use crate::model::GlyphTemplate;
use crate::persist::{GalleryClient, SceneDocument};
use crate::service;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "marvist", version, about = "Author AR glyph visualizations from the command line")]
pub struct Cli {
    /// Exit with status 2 when any validation warning was reported.
    #[arg(long, global = true)]
    pub warn_as_error: bool,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub output: OutputFormat,
    /// Scene file loaded before a single subcommand and saved after it.
    #[arg(long, global = true)]
    pub scene: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Top,
}

#[derive(Debug, Subcommand)]
pub enum Top {
    /// Run a command script, one command per line.
    Run { script: PathBuf },
    /// Serve the HTTP session API.
    Serve {
        /// Overrides MARVIST_BIND.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Time glyph construction and scale propagation.
    Bench {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value = "cube")]
        template: String,
        #[arg(long, default_value_t = 10)]
        runs: usize,
    },
    #[command(flatten)]
    Engine(Command),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_WARNINGS: i32 = 2;

struct Printer {
    format: OutputFormat,
    warned: bool,
}

impl Printer {
    fn outcome(&mut self, o: &Outcome) {
        self.warned |= !o.warnings.is_empty();
        let mut out = std::io::stdout().lock();
        match self.format {
            OutputFormat::Json => {
                let _ = writeln!(out, "{}", serde_json::to_string(o).unwrap_or_default());
            }
            OutputFormat::Text => {
                for l in &o.lines {
                    let _ = writeln!(out, "{l}");
                }
                for e in &o.events {
                    let _ = writeln!(out, "EVENT {} {}", e.kind, e.object);
                }
            }
        }
        for w in &o.warnings {
            eprintln!("WARN {} metric={} {}", w.rule, w.metric, w.message);
        }
    }

    fn error(&self, e: &EngineError, context: Option<String>) -> i32 {
        match context {
            Some(c) => eprintln!("ERROR {}: {} ({c})", e.code(), e),
            None => eprintln!("ERROR {}: {}", e.code(), e),
        }
        EXIT_ERROR
    }

    fn finish(&self, warn_as_error: bool) -> i32 {
        if warn_as_error && self.warned {
            EXIT_WARNINGS
        } else {
            EXIT_OK
        }
    }
}

fn cwd() -> PathBuf {
    std::env::current_dir().unwrap_or_else(|_| PathBuf::from("."))
}

pub fn run_script(engine: &mut Engine, text: &str, mut on_outcome: impl FnMut(&Outcome)) -> std::result::Result<(), (usize, EngineError)> {
    for (i, line) in text.lines().enumerate() {
        match engine.execute_line(line) {
            Ok(Some(o)) => on_outcome(&o),
            Ok(None) => {}
            Err(e) => return Err((i + 1, e)),
        }
    }
    Ok(())
}

fn template_for_bench(name: &str) -> Result<GlyphTemplate> {
    match name {
        "cube" => Ok(GlyphTemplate::cube()),
        "sphere" => Ok(GlyphTemplate::sphere()),
        other => GalleryClient::from_env().fetch_template(other),
    }
}

fn run_single(cli: &Cli, cmd: &Command, printer: &mut Printer) -> i32 {
    let mut engine = Engine::default().with_base_dir(cwd());
    if let Some(path) = &cli.scene {
        if path.exists() {
            match SceneDocument::load(path) {
                Ok(doc) => engine.load_document(doc),
                Err(e) => return printer.error(&e, Some(path.display().to_string())),
            }
        }
    }
    match engine.execute(cmd) {
        Ok(o) => printer.outcome(&o),
        Err(e) => return printer.error(&e, None),
    }
    if let (Some(path), true) = (&cli.scene, cmd.mutates()) {
        if let Err(e) = engine.document().save(path) {
            return printer.error(&e, Some(path.display().to_string()));
        }
    }
    printer.finish(cli.warn_as_error)
}

fn script_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => cwd(),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut printer = Printer {
        format: cli.output,
        warned: false,
    };
    match &cli.command {
        Top::Run { script } => {
            let text = match std::fs::read_to_string(script) {
                Ok(t) => t,
                Err(e) => return printer.error(&e.into(), Some(script.display().to_string())),
            };
            let mut engine = Engine::default().with_base_dir(script_dir(script));
            if let Some(path) = &cli.scene {
                if path.exists() {
                    match SceneDocument::load(path) {
                        Ok(doc) => engine.load_document(doc),
                        Err(e) => return printer.error(&e, Some(path.display().to_string())),
                    }
                }
            }
            if let Err((line, e)) = run_script(&mut engine, &text, |o| printer.outcome(o)) {
                return printer.error(&e, Some(format!("{}:{line}", script.display())));
            }
            if let Some(path) = &cli.scene {
                if let Err(e) = engine.document().save(path) {
                    return printer.error(&e, Some(path.display().to_string()));
                }
            }
            printer.finish(cli.warn_as_error)
        }
        Top::Serve { bind } => {
            let addr = match bind {
                Some(b) => b.parse().map_err(|_| EngineError::InvalidArgument(format!("bad address '{b}'"))),
                None => service::bind_address(),
            };
            let addr = match addr {
                Ok(a) => a,
                Err(e) => return printer.error(&e, None),
            };
            let state = service::AppState::new(GalleryClient::from_env(), cwd());
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(r) => r,
                Err(e) => return printer.error(&e.into(), None),
            };
            match runtime.block_on(service::serve(addr, state)) {
                Ok(()) => EXIT_OK,
                Err(e) => printer.error(&e.into(), None),
            }
        }
        Top::Bench { n, template, runs } => {
            let report = template_for_bench(template).and_then(|t| bench::run(*n, &t, *runs));
            match report {
                Ok(r) => {
                    match cli.output {
                        OutputFormat::Json => {
                            println!("{}", serde_json::to_string(&r).unwrap_or_default())
                        }
                        OutputFormat::Text => {
                            println!("glyphs: {} ({})", r.glyphs, r.template);
                            println!("runs: {} after 1 warm-up", r.runs);
                            println!("construction median: {:.6} s", r.construction_median_s);
                            println!("propagation median: {:.6} s", r.propagation_median_s);
                        }
                    }
                    EXIT_OK
                }
                Err(e) => printer.error(&e, None),
            }
        }
        Top::Engine(cmd) => run_single(&cli, cmd, &mut printer),
    }
}
