use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use driftlab::bundle::{metadata, Bundle};
use driftlab::config::RunConfig;
use driftlab::{catalog, suites, Error};

/// Output directory when neither `--out`, the config nor the environment
/// names one.
const DEFAULT_OUT: &str = "driftlab-report";
const OUT_ENV: &str = "DRIFTLAB_OUT";

#[derive(Parser)]
#[command(
    name = "driftlab",
    version,
    about = "Verification suites for drifting Laplacians on radial weighted models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a report bundle.
    Run {
        /// TOML model/run config; without it the default model matrix runs.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bundle directory (default: config `run.out`, then $DRIFTLAB_OUT,
        /// then ./driftlab-report).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suites to run, comma separated.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        /// Operator grid cells.
        #[arg(long)]
        grid: Option<usize>,
        /// Tolerance of the identity checks.
        #[arg(long)]
        tol: Option<f64>,
        /// Also write SVG margin plots.
        #[arg(long)]
        svg: bool,
    },
    /// List the built-in model catalog.
    ListModels {
        /// Print the catalog as JSON.
        #[arg(long)]
        json: bool,
        /// Keep only models with this property (e.g. asymptotically-nonnegative).
        #[arg(long)]
        property: Option<String>,
    },
    /// Print the JSON schema of the config file.
    Schema,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Other(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.into()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<std::fmt::Error> for Failure {
    fn from(e: std::fmt::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            suite,
            grid,
            tol,
            svg,
        } => run(config, out, suite, grid, tol, svg),
        Command::ListModels { json, property } => {
            list_models(json, property.as_deref()).map(|()| 0)
        }
        Command::Schema => schema().map(|()| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_config(
    path: Option<PathBuf>,
    suite: Vec<String>,
    grid: Option<usize>,
    tol: Option<f64>,
    svg: bool,
) -> std::result::Result<RunConfig, Error> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_path(&p).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read {}: {io}", p.display())),
            other => other,
        })?,
        None => RunConfig::default_matrix(),
    };
    if !suite.is_empty() {
        cfg.run.suites = suite;
    }
    if let Some(g) = grid {
        cfg.run.grid = g;
    }
    if let Some(t) = tol {
        cfg.run.tol = t;
    }
    cfg.run.svg |= svg;
    cfg.normalize()?;
    cfg.cases()?;
    Ok(cfg)
}

fn run(
    path: Option<PathBuf>,
    out: Option<PathBuf>,
    suite: Vec<String>,
    grid: Option<usize>,
    tol: Option<f64>,
    svg: bool,
) -> std::result::Result<u8, Failure> {
    let start = Instant::now();
    let cfg = load_config(path, suite, grid, tol, svg)?;
    let out = out
        .or_else(|| cfg.run.out.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let outcome = suites::run(&cfg)?;
    let bundle = Bundle::render(&cfg, &outcome, cfg.run.svg)?;
    bundle
        .write_atomic(&out, &metadata(start.elapsed()))
        .with_context(|| format!("writing bundle to {}", out.display()))?;

    for res in &outcome.suites {
        let hard = res.hard_failures();
        let warnings = res.warnings();
        let status = if !hard.is_empty() || !res.errors.is_empty() {
            "FAIL"
        } else if !warnings.is_empty() {
            "WARN"
        } else {
            "ok"
        };
        println!(
            "{:<11} {:<4} checks={} hard_failures={} warnings={} errors={}",
            res.suite,
            status,
            res.checks.len(),
            hard.len(),
            warnings.len(),
            res.errors.len()
        );
        for (model, check) in hard {
            eprintln!("  hard failure: {check} ({})", model_name(&outcome, model));
        }
        for (model, check) in warnings {
            eprintln!("  warning: {check} ({})", model_name(&outcome, model));
        }
        for e in &res.errors {
            eprintln!("  error: {} ({})", e.message, model_name(&outcome, e.model));
        }
    }
    println!("bundle written to {}", out.display());
    Ok(outcome.exit_code() as u8)
}

fn model_name(outcome: &suites::RunOutcome, model: Option<usize>) -> String {
    match model {
        Some(i) => outcome.models[i].label.clone(),
        None => "global".into(),
    }
}

/// Write to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e).context("writing to stdout"),
        _ => Ok(()),
    }
}

fn list_models(json: bool, property: Option<&str>) -> std::result::Result<(), Failure> {
    let cat = catalog::catalog_json(property)?;
    if json {
        emit(&(serde_json::to_string_pretty(&cat).context("serializing catalog")? + "\n"))?;
        return Ok(());
    }
    let mut text = String::from("families:\n");
    for f in catalog::family_schemas() {
        let params: Vec<String> = f
            .params
            .iter()
            .map(|p| format!("{} ({})", p.name, p.constraint))
            .collect();
        writeln!(
            text,
            "  [{}] {:<18} {:<48} params: {}",
            f.section,
            f.family,
            f.formula,
            params.join(", ")
        )?;
    }
    text.push_str("models:\n");
    for m in cat["models"].as_array().into_iter().flatten() {
        let props = &m["properties"];
        writeln!(
            text,
            "  {:<17} {:<46} K={} growth={} asymptotically_nonnegative={}",
            m["name"].as_str().unwrap_or_default(),
            m["description"].as_str().unwrap_or_default(),
            props["curvature_bound"],
            props["growth"].as_str().unwrap_or_default(),
            props["asymptotically_nonnegative"],
        )?;
    }
    emit(&text)?;
    Ok(())
}

fn schema() -> std::result::Result<(), Failure> {
    let s = driftlab::config::config_schema();
    emit(&(serde_json::to_string_pretty(&s).context("serializing schema")? + "\n"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn overrides_are_validated() {
        let err = load_config(None, vec!["nope".into()], None, None, false).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = load_config(None, vec![], Some(3), None, false).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let cfg = load_config(
            None,
            vec!["heat".into(), "curvature".into()],
            Some(200),
            None,
            true,
        )
        .unwrap();
        assert_eq!(cfg.run.suites, vec!["curvature", "heat"]);
        assert!(cfg.run.svg && cfg.run.matrix);
    }
}
