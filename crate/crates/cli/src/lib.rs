//! Scenario runner: TOML configuration, bundled scenarios, and CSV artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use kostin_core::packet::write_snapshot_csv;
use kostin_core::propagator;
use kostin_core::validate::{self, format_reports_text, write_reports_csv, ScenarioOutcome};
use kostin_core::{ComplexGridField, PhysicalSystem};

pub use kostin_core::validate::Scenario;

const BUNDLED: &[(&str, &str)] = &[
    ("free_spreading", include_str!("../scenarios/free_spreading.toml")),
    ("damped_free", include_str!("../scenarios/damped_free.toml")),
    ("harmonic_damped", include_str!("../scenarios/harmonic_damped.toml")),
    ("kernel_free", include_str!("../scenarios/kernel_free.toml")),
    ("kernel_harmonic", include_str!("../scenarios/kernel_harmonic.toml")),
    ("cubic_linearized", include_str!("../scenarios/cubic_linearized.toml")),
];

/// A configuration that failed to parse or validate. The message carries the
/// offending key and, for syntax and schema errors, its line.
#[derive(Debug, thiserror::Error)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: String,
    pub message: String,
}

pub fn list_scenarios() -> Vec<&'static str> {
    BUNDLED.iter().map(|(name, _)| *name).collect()
}

pub fn bundled_source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, src)| *src)
}

/// Parses and validates a scenario. `origin` names the source in messages.
pub fn parse_scenario(text: &str, origin: &str) -> std::result::Result<Scenario, ConfigError> {
    let err = |message: String| ConfigError { origin: origin.to_string(), message };
    let sc: Scenario = toml::from_str(text).map_err(|e| err(e.to_string().trim_end().to_string()))?;
    sc.validated().map_err(|e| err(e.to_string()))
}

pub fn bundled_scenario(name: &str) -> Option<Scenario> {
    let src = bundled_source(name)?;
    Some(parse_scenario(src, name).expect("bundled scenarios are valid"))
}

/// Loads a scenario from a file, or from the bundled set when `spec` is not
/// an existing path but names a bundled scenario. Returns the scenario and
/// the directory that relative output paths are resolved against.
pub fn load_scenario(spec: &str) -> Result<(Scenario, PathBuf)> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(sc) = bundled_scenario(spec) {
            return Ok((sc, PathBuf::from(".")));
        }
    }
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let sc = parse_scenario(&text, &path.display().to_string())?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((sc, base))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub outcome: ScenarioOutcome,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.outcome.all_pass()
    }
}

pub fn output_dir(sc: &Scenario, base: &Path, opts: &RunOptions) -> PathBuf {
    match (&opts.out, &sc.output.dir) {
        (Some(out), _) => out.clone(),
        (None, Some(dir)) => base.join(dir),
        (None, None) => PathBuf::from("out").join(&sc.id),
    }
}

/// Loads, runs and writes one scenario.
pub fn run(config: &str, opts: &RunOptions) -> Result<RunSummary> {
    let (sc, base) = load_scenario(config)?;
    let dir = output_dir(&sc, &base, opts);
    run_scenario(&sc, &dir, opts.quiet)
}

fn progress(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        eprintln!("{}", msg.as_ref());
    }
}

pub fn run_scenario(sc: &Scenario, dir: &Path, quiet: bool) -> Result<RunSummary> {
    progress(quiet, format!("running scenario {}", sc.id));
    let outcome = validate::run_scenario(sc).with_context(|| format!("scenario {}", sc.id))?;
    for w in &outcome.warnings {
        progress(quiet, format!("warning: {w}"));
    }
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let files = write_artifacts(sc, &outcome, dir)?;
    if sc.pipelines.validate {
        progress(quiet, format_reports_text(&outcome.reports).trim_end());
    }
    progress(quiet, format!("wrote {} files to {}", files.len(), dir.display()));
    Ok(RunSummary { out_dir: dir.to_path_buf(), outcome, files })
}

fn create(dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    files.push(path);
    Ok(BufWriter::new(f))
}

fn write_snapshots(
    dir: &Path,
    prefix: &str,
    fields: &[ComplexGridField],
    sys: &PhysicalSystem,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    for (k, f) in fields.iter().enumerate() {
        let mut w = create(dir, &format!("{prefix}_{k:04}.csv"), files)?;
        write_snapshot_csv(f, sys, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Metadata<'a> {
    scenario: &'a str,
    unix_time_s: u64,
    version: &'a str,
    all_pass: bool,
    warnings: &'a [String],
}

fn write_artifacts(sc: &Scenario, out: &ScenarioOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if let Some(series) = out.series.as_ref().filter(|_| sc.pipelines.trajectory) {
        let mut w = create(dir, "trajectory.csv", &mut files)?;
        series.write_csv(&mut w)?;
        w.flush()?;
    }
    write_snapshots(dir, "packet", &out.packet_snapshots, &sc.system, &mut files)?;
    if let Some(run) = &out.pde {
        write_snapshots(dir, "pde", &run.snapshots, &sc.system, &mut files)?;
    }
    if let Some(kernel) = &out.kernel {
        let mut w = create(dir, "kernel.csv", &mut files)?;
        kernel.write_csv(&mut w)?;
        w.flush()?;
        let fam = sc.family()?;
        let psi0 = propagator::member_packet(
            sc.initial.v0,
            &fam,
            &sc.system,
            &sc.potential,
            0.0,
            sc.time.dt_ode,
            &kernel.x0_grid,
        )?;
        let mut w = create(dir, "propagated.csv", &mut files)?;
        write_snapshot_csv(&propagator::propagate(kernel, &psi0)?, &sc.system, &mut w)?;
        w.flush()?;
    }
    if sc.pipelines.validate {
        let mut w = create(dir, "report.csv", &mut files)?;
        write_reports_csv(&out.reports, &mut w)?;
        w.flush()?;
        let mut w = create(dir, "report.txt", &mut files)?;
        w.write_all(format_reports_text(&out.reports).as_bytes())?;
        w.flush()?;
    }
    // Wall-clock data lives only here so that every CSV is reproducible.
    let meta = Metadata {
        scenario: &sc.id,
        unix_time_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        version: env!("CARGO_PKG_VERSION"),
        all_pass: out.all_pass(),
        warnings: &out.warnings,
    };
    let mut w = create(dir, "metadata.toml", &mut files)?;
    w.write_all(toml::to_string(&meta)?.as_bytes())?;
    w.flush()?;
    Ok(files)
}
