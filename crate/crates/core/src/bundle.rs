//! Report bundle: the files of a run, rendered in memory and written to the
//! output directory in one rename.
//!
//! Layout:
//! - `summary.json`: schema version, resolved config, models, verdicts
//! - `suites/<suite>.json`: full reports with per-sample margins
//! - `tables/<suite>/<name>_mNN.csv` and `margins/<suite>/<check>_mNN.csv`
//! - `svg/<suite>/<check>_mNN.svg` when plots are requested
//! - `metadata.json`: wall-clock data, the only nondeterministic file

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::report::margin_svg;
use crate::suites::RunOutcome;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bundle {
    /// Relative path → contents, in sorted order.
    pub files: BTreeMap<PathBuf, Vec<u8>>,
}

fn model_tag(model: Option<usize>) -> String {
    match model {
        Some(i) => format!("m{i:02}"),
        None => "global".into(),
    }
}

/// File stem unique within a suite: `name_mNN`, then `name_mNN_2`, ….
fn unique(seen: &mut BTreeMap<String, usize>, stem: String) -> String {
    let count = seen.entry(stem.clone()).or_insert(0);
    *count += 1;
    if *count == 1 {
        stem
    } else {
        format!("{stem}_{count}")
    }
}

fn pretty(value: &serde_json::Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

impl Bundle {
    /// Render every deterministic file of the bundle.
    pub fn render(cfg: &RunConfig, outcome: &RunOutcome, svg: bool) -> Result<Self> {
        let mut files = BTreeMap::new();
        let mut suites = Vec::new();
        let mut hard = Vec::new();
        let mut warnings = Vec::new();
        let mut errors = Vec::new();
        for res in &outcome.suites {
            for (model, check) in res.hard_failures() {
                hard.push(json!({"suite": res.suite, "model": model, "check": check}));
            }
            for (model, check) in res.warnings() {
                warnings.push(json!({"suite": res.suite, "model": model, "check": check}));
            }
            for e in &res.errors {
                errors.push(json!({"suite": res.suite, "model": e.model, "message": e.message}));
            }
            let checks: Vec<_> = res
                .checks
                .iter()
                .map(|c| {
                    let mut s = c.report.summary();
                    s["model"] = json!(c.model);
                    s
                })
                .collect();
            let data: Vec<_> = res
                .data
                .iter()
                .map(|d| json!({"model": d.model, "name": d.name, "value": d.value}))
                .collect();
            suites.push(json!({"suite": res.suite, "checks": checks, "data": data}));

            files.insert(
                PathBuf::from(format!("suites/{}.json", res.suite)),
                pretty(&serde_json::to_value(res)?)?,
            );
            let mut seen = BTreeMap::new();
            for t in &res.tables {
                let stem = unique(&mut seen, format!("{}_{}", t.name, model_tag(t.model)));
                files.insert(
                    PathBuf::from(format!("tables/{}/{stem}.csv", res.suite)),
                    t.table.to_csv().into_bytes(),
                );
            }
            let mut seen = BTreeMap::new();
            for c in &res.checks {
                let stem = unique(
                    &mut seen,
                    format!("{}_{}", c.report.check, model_tag(c.model)),
                );
                files.insert(
                    PathBuf::from(format!("margins/{}/{stem}.csv", res.suite)),
                    c.report.to_csv().into_bytes(),
                );
                if svg {
                    files.insert(
                        PathBuf::from(format!("svg/{}/{stem}.svg", res.suite)),
                        margin_svg(&c.report).into_bytes(),
                    );
                }
            }
        }
        let summary = json!({
            "schema_version": SCHEMA_VERSION,
            "tool": "driftlab",
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg.to_toml(),
            "settings": outcome.settings,
            "models": outcome.models,
            "exit_code": outcome.exit_code(),
            "hard_failures": hard,
            "warnings": warnings,
            "errors": errors,
            "suites": suites,
        });
        files.insert(PathBuf::from("summary.json"), pretty(&summary)?);
        Ok(Self { files })
    }

    /// Write the bundle plus `metadata.json` to `out`. Files go to a
    /// temporary sibling directory first, which is then renamed into place,
    /// so an interrupted run leaves either the old bundle or the new one.
    pub fn write_atomic(&self, out: &Path, metadata: &serde_json::Value) -> Result<()> {
        let parent = match out.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&parent)?;
        let staging = tempfile::Builder::new()
            .prefix(".driftlab-staging-")
            .tempdir_in(&parent)?;
        for (rel, bytes) in &self.files {
            let path = staging.path().join(rel);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, bytes)?;
        }
        std::fs::write(staging.path().join("metadata.json"), pretty(metadata)?)?;

        if out.exists() {
            if !out.is_dir() {
                return Err(Error::Config(format!(
                    "output path {} is not a directory",
                    out.display()
                )));
            }
            let old = tempfile::Builder::new()
                .prefix(".driftlab-old-")
                .tempdir_in(&parent)?;
            let old_path = old.path().join("bundle");
            std::fs::rename(out, &old_path)?;
            std::fs::rename(staging.keep(), out)?;
            drop(old);
        } else {
            std::fs::rename(staging.keep(), out)?;
        }
        Ok(())
    }
}

/// Wall-clock metadata for `metadata.json`.
pub fn metadata(elapsed: std::time::Duration) -> serde_json::Value {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "finished_unix": now,
        "elapsed_seconds": elapsed.as_secs_f64(),
        "threads": rayon::current_num_threads(),
    })
}
