use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use potkit_cli::{execute, load, presets, write_outputs, RunOptions, EXIT_SCHEMA};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "potkit",
    version,
    about = "Run potential-theory scenarios and report verdicts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a bundled preset.
    Run {
        /// Scenario JSON file.
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        file: Option<PathBuf>,
        /// Name of a bundled preset (see `potkit list`).
        #[arg(long)]
        preset: Option<String>,
        /// Seed for all randomized sampling [default: 0].
        #[arg(long)]
        seed: Option<u64>,
        /// Lattice resolution for grids and sampled fields [default: 256].
        #[arg(long)]
        grid: Option<usize>,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Output directory.
        #[arg(long, default_value = "potkit-out")]
        out: PathBuf,
    },
    /// List the bundled presets.
    List {
        #[arg(long)]
        json: bool,
        /// Only presets carrying this tag.
        #[arg(long)]
        tag: Option<String>,
    },
    /// Print a preset's scenario JSON.
    Show { name: String },
}

fn preset_text(name: &str) -> anyhow::Result<&'static str> {
    match presets::source(name) {
        Some(s) => Ok(s),
        None => bail!(
            "unknown preset '{name}'; available: {}",
            presets::names().collect::<Vec<_>>().join(", ")
        ),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_SCHEMA as u8)
        }
    }
}

fn real_main() -> anyhow::Result<i32> {
    match Cli::parse().command {
        Command::Run {
            file,
            preset,
            seed,
            grid,
            tol_scale,
            out,
        } => {
            if !(tol_scale.is_finite() && tol_scale > 0.0) {
                bail!("--tol-scale must be positive");
            }
            if grid == Some(0) {
                bail!("--grid must be positive");
            }
            let (text, source) = match (&file, &preset) {
                (Some(path), _) => (
                    std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?,
                    path.display().to_string(),
                ),
                (None, Some(name)) => (preset_text(name)?.to_string(), format!("preset:{name}")),
                (None, None) => unreachable!("clap requires a file or a preset"),
            };
            let (sc, objects) = match load(&text, &source) {
                Ok(x) => x,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(EXIT_SCHEMA);
                }
            };
            let report = execute(
                &sc,
                &objects,
                &RunOptions {
                    seed,
                    grid,
                    tol_scale,
                },
            );
            write_outputs(&report, &out, report.verdicts.grid)
                .with_context(|| format!("writing {}", out.display()))?;
            for c in &report.verdicts.checks {
                let state = if c.met { "ok" } else { "FAILED" };
                println!(
                    "{state:>6}  {}  [{:?}, expected {:?}]  {}",
                    c.id,
                    c.outcome,
                    c.expect,
                    c.error.as_deref().unwrap_or(&c.summary)
                );
            }
            println!(
                "{}: {}",
                sc.name,
                if report.verdicts.pass {
                    "all checks met"
                } else {
                    "some checks not met"
                }
            );
            Ok(report.verdicts.exit_code())
        }
        Command::List { json, tag } => {
            let rows = presets::list(tag.as_deref());
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
                for r in rows {
                    println!("{:w$}  {:10}  {}", r.name, r.tags.join(","), r.description);
                }
            }
            Ok(0)
        }
        Command::Show { name } => {
            print!("{}", preset_text(&name)?);
            Ok(0)
        }
    }
}
