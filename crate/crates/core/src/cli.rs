//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::builder::TypedValueParser;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::battery::{run_battery, BatteryConfig, DEFAULT_SEED, DEFAULT_TRUNCATION, MIN_TRUNCATION, PROPERTY_SAMPLES};
use crate::cache::{CacheDir, StageStatus};
use crate::error::Error;
use crate::matrix::MatrixK;
use crate::pipeline::{mu6_generators, ConstructionContext};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportItem {
    Transport,
    Reflections,
    Scalars,
    Generators,
    None,
}

#[derive(Debug, Parser)]
#[command(name = "wedge32", version, about = "Build and verify the order-3 reflection group obtained from E6 through the exterior square")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory holding the stage caches.
    #[arg(long, global = true, env = "WEDGE32_CACHE_DIR", default_value = "wedge32-cache")]
    pub cache_dir: PathBuf,

    /// Output format.
    #[arg(long, global = true, env = "WEDGE32_FORMAT", value_enum, default_value = "text")]
    pub format: Format,

    /// Worker threads (defaults to the available cores).
    #[arg(long, global = true, env = "WEDGE32_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every construction stage, reusing valid caches.
    Build,
    /// Run the verification battery.
    Verify {
        /// Comma-separated check ids or aliases (default: all).
        #[arg(long, env = "WEDGE32_CHECKS", value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Molien series truncation degree.
        #[arg(long, env = "WEDGE32_TRUNCATION", default_value_t = DEFAULT_TRUNCATION,
              value_parser = clap::value_parser!(u64).range(MIN_TRUNCATION as u64..).map(|v| v as usize))]
        truncation: usize,
        /// Build missing or invalid caches instead of failing.
        #[arg(long, env = "WEDGE32_BUILD_MISSING")]
        build_missing: bool,
        /// Seed of the randomized exterior-square property suite.
        #[arg(long, env = "WEDGE32_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Write generators of W and the transport matrix as JSON.
    Export {
        /// Output file (default: standard output).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Items to include; `none` gives an empty document.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "transport,reflections,scalars,generators")]
        include: Vec<ExportItem>,
        /// Build missing or invalid caches instead of failing.
        #[arg(long, env = "WEDGE32_BUILD_MISSING")]
        build_missing: bool,
    },
    /// Delete the caches.
    Clean,
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Cache(_) => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

fn matrix_text(m: &MatrixK) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|k| m.get(i, k).to_text()).collect()).collect()
}

/// The export document for `ctx`.
pub fn export_document(ctx: &ConstructionContext, include: &[ExportItem]) -> serde_json::Value {
    let has = |x: ExportItem| include.contains(&x) && !include.contains(&ExportItem::None);
    let list = |ms: &mut dyn Iterator<Item = &MatrixK>| ms.map(matrix_text).collect::<Vec<_>>();
    let f = ctx.field();
    let mut doc = json!({
        "field": f.id(),
        "order": ctx.w.order(),
        "encoding": "field-id:coordinates over the basis ζ^a·Π√p",
    });
    doc["transport"] = if has(ExportItem::Transport) {
        json!({ "c": ctx.transport.c.to_string(), "p": matrix_text(&ctx.transport.p) })
    } else {
        serde_json::Value::Null
    };
    doc["reflections"] = json!(if has(ExportItem::Reflections) { list(&mut ctx.reflections.iter()) } else { vec![] });
    doc["scalars"] = json!(if has(ExportItem::Scalars) { list(&mut mu6_generators(f).iter()) } else { vec![] });
    doc["generators"] = json!(if has(ExportItem::Generators) { list(&mut ctx.w.generators().iter()) } else { vec![] });
    doc
}

fn stage_line(s: &StageStatus) -> String {
    match s {
        StageStatus::Loaded(n) => format!("{n}: loaded"),
        StageStatus::Built(n) => format!("{n}: built"),
        StageStatus::Rebuilt(n, why) => format!("{n}: rebuilt ({why})"),
    }
}

/// Run the CLI on `args`; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    if let Some(n) = cli.jobs {
        // a pool may already exist in-process (tests); the request is then moot
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    let cache = CacheDir::new(&cli.cache_dir);
    match &cli.command {
        Command::Build => {
            let (ctx, stages) = cache.obtain(true).inspect_err(|_| {
                let _ = writeln!(err, "build failed; finished stages are kept and the cache is marked dirty");
            })?;
            match cli.format {
                Format::Text => {
                    for s in &stages {
                        writeln!(out, "{}", stage_line(s))?;
                    }
                    writeln!(out, "E6: {} elements; W: {} elements over {}", ctx.e6.order(), ctx.w.order(), ctx.field().id())?;
                }
                Format::Json => {
                    let doc = json!({
                        "stages": stages.iter().map(stage_line).collect::<Vec<_>>(),
                        "e6_order": ctx.e6.order(),
                        "w_order": ctx.w.order(),
                        "field": ctx.field().id(),
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
                }
            }
            Ok(EXIT_PASS)
        }
        Command::Verify { checks, truncation, build_missing, seed } => {
            let config = BatteryConfig {
                truncation: *truncation,
                seed: *seed,
                property_samples: PROPERTY_SAMPLES,
                checks: checks.clone(),
            };
            // reject unknown check names before any expensive work
            crate::battery::select_checks(config.checks.as_deref())?;
            let (ctx, _) = cache.obtain(*build_missing)?;
            let report = run_battery(&ctx, &config)?;
            if config.checks.is_none() && config.truncation == DEFAULT_TRUNCATION && config.seed == DEFAULT_SEED {
                cache.store_report(&report, ctx.field())?;
            }
            match cli.format {
                Format::Text => write!(out, "{}", report.to_text())?,
                Format::Json => writeln!(out, "{}", report.to_json())?,
            }
            Ok(if report.passed() { EXIT_PASS } else { EXIT_CHECK_FAILURE })
        }
        Command::Export { output, include, build_missing } => {
            let (ctx, _) = cache.obtain(*build_missing)?;
            let text = serde_json::to_string_pretty(&export_document(&ctx, include))?;
            match output {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => writeln!(out, "{text}")?,
            }
            Ok(EXIT_PASS)
        }
        Command::Clean => {
            let n = cache.clean()?;
            writeln!(out, "removed {n} cache files from {}", cache.root().display())?;
            Ok(EXIT_PASS)
        }
    }
}
