//! Executes a scenario and writes `verdicts.json`, `margins.csv` and `fields/*.csv`.

use crate::assemble::{assemble, Assembled};
use crate::checks::{run_check, Env, MarginRow, Plot};
use crate::scenario::{line_of, Expect, Scenario, SchemaError, SCHEMA_VERSION};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_GRID: usize = 256;

/// Command-line overrides; `None` falls back to the scenario, then the defaults.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub tol_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: None,
            grid: None,
            tol_scale: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckVerdict {
    pub id: String,
    pub kind: String,
    pub expect: Expect,
    pub outcome: Outcome,
    /// The outcome matches `expect`; errors never do.
    pub met: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdicts {
    pub schema: u32,
    pub scenario: String,
    pub seed: u64,
    pub grid: usize,
    pub tol_scale: f64,
    pub pass: bool,
    pub checks: Vec<CheckVerdict>,
}

impl Verdicts {
    /// 0 when every check met its expectation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub verdicts: Verdicts,
    /// `(check id, row)` in scenario order.
    pub margins: Vec<(String, MarginRow)>,
    pub plots: Vec<Plot>,
}

/// Parses, validates and assembles a scenario. Assembly failures are reported
/// as schema violations anchored at the offending entry.
pub fn load(text: &str, source: &str) -> Result<(Scenario, Assembled), SchemaError> {
    let sc = Scenario::parse(text, source)?;
    let objects = assemble(&sc).map_err(|e| SchemaError {
        source: source.to_string(),
        line: line_of(text, &format!("\"{}\"", e.name), 0),
        column: None,
        message: e.to_string(),
    })?;
    Ok((sc, objects))
}

/// Runs all checks, in parallel, and collects the results in scenario order.
pub fn execute(sc: &Scenario, objects: &Assembled, opts: &RunOptions) -> RunReport {
    let env = Env {
        scenario: sc,
        objects,
        seed: opts.seed.or(sc.seed).unwrap_or(DEFAULT_SEED),
        grid: opts.grid.or(sc.grid).unwrap_or(DEFAULT_GRID),
        tol_scale: opts.tol_scale,
    };
    let results: Vec<_> = sc
        .checks
        .par_iter()
        .enumerate()
        .map(|(k, c)| run_check(&c.check, &env, k))
        .collect();
    let mut checks = Vec::new();
    let mut margins = Vec::new();
    let mut plots = Vec::new();
    for (k, (entry, res)) in sc.checks.iter().zip(results).enumerate() {
        let id = entry.id_at(k);
        let v = match res {
            Ok(r) => {
                let outcome = if r.pass { Outcome::Pass } else { Outcome::Fail };
                margins.extend(r.margins.into_iter().map(|m| (id.clone(), m)));
                plots.extend(r.plots.into_iter().map(|p| Plot {
                    name: format!("{id}-{}", p.name),
                    ..p
                }));
                CheckVerdict {
                    id,
                    kind: entry.check.kind().into(),
                    expect: entry.expect,
                    outcome,
                    met: r.pass == (entry.expect == Expect::Pass),
                    summary: r.summary,
                    metrics: r.metrics,
                    error: None,
                }
            }
            Err(e) => CheckVerdict {
                id,
                kind: entry.check.kind().into(),
                expect: entry.expect,
                outcome: Outcome::Error,
                met: false,
                summary: "check could not be evaluated".into(),
                metrics: BTreeMap::new(),
                error: Some(e.to_string()),
            },
        };
        checks.push(v);
    }
    for p in &sc.outputs.fields {
        let window = p
            .window
            .or_else(|| sc.domain.as_ref().and_then(|d| d.bounding_box()));
        if let (Some(field), Some(window)) = (objects.fields.get(&p.field), window) {
            plots.push(Plot {
                name: p.field.clone(),
                field: field.clone(),
                window,
            });
        }
    }
    let pass = checks.iter().all(|c| c.met);
    RunReport {
        verdicts: Verdicts {
            schema: SCHEMA_VERSION,
            scenario: sc.name.clone(),
            seed: env.seed,
            grid: env.grid,
            tol_scale: env.tol_scale,
            pass,
            checks,
        },
        margins,
        plots,
    }
}

/// Serialized `verdicts.json`; byte-stable for a fixed scenario and seed.
pub fn verdicts_json(v: &Verdicts) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("verdicts serialize");
    s.push('\n');
    s
}

fn sample_plot(p: &Plot, n: usize, path: &Path) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "value"])?;
    let (lo, hi) = p.window;
    let n = n.max(2);
    for j in 0..n {
        for i in 0..n {
            let x = lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64;
            let y = lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64;
            let mut q = lo;
            for k in 0..q.dim() {
                q[k] = 0.5 * (lo[k] + hi[k]);
            }
            q[0] = x;
            q[1] = y;
            let v = p.field.eval(&q).to_f64();
            w.write_record([x.to_string(), y.to_string(), v.to_string()])?;
        }
    }
    w.flush()
}

/// Writes all artifacts under `dir`, sampling fields on an `n × n` lattice.
pub fn write_outputs(report: &RunReport, dir: &Path, n: usize) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("verdicts.json"), verdicts_json(&report.verdicts))?;
    let mut w = csv::Writer::from_path(dir.join("margins.csv"))?;
    w.write_record(["check", "item", "lhs", "rhs", "margin", "tol", "pass"])?;
    for (id, m) in &report.margins {
        w.write_record([
            id.clone(),
            m.item.clone(),
            m.lhs.to_string(),
            m.rhs.to_string(),
            m.margin.to_string(),
            m.tol.to_string(),
            m.pass.to_string(),
        ])?;
    }
    w.flush()?;
    let planar: Vec<&Plot> = report
        .plots
        .iter()
        .filter(|p| p.window.0.dim() >= 2)
        .collect();
    if !planar.is_empty() {
        let fields = dir.join("fields");
        fs::create_dir_all(&fields)?;
        for p in planar {
            sample_plot(p, n, &fields.join(format!("{}.csv", sanitize(&p.name))))?;
        }
    }
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
