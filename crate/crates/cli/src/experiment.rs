//! Subcommand drivers. Each one checks that the output directory is writable,
//! computes, writes its artifacts and finishes with `manifest.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use meascool::{
    build_table, cooling_free_report, oracle_report, run, sample_trajectories, sweep, BatchSpec,
    CoolingError, PopulationDistribution64, StepRecord64, SweepBase64,
};
use serde::Serialize;
use thiserror::Error;

use crate::config::{axis_name, ConfigError, ExperimentConfig};

/// Oracle-check tolerances on the coefficient error and on `|U†U − I|`.
pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<CoolingError> for CliError {
    fn from(e: CoolingError) -> Self {
        match e {
            CoolingError::Domain {
                name,
                value,
                reason,
            } => CliError::Config(ConfigError::Invalid {
                key: name.to_string(),
                reason: format!("{value}: {reason}"),
            }),
            CoolingError::UnknownVariant(_)
            | CoolingError::Schedule(_)
            | CoolingError::Capacity { .. } => CliError::Config(ConfigError::Invalid {
                key: "segments".into(),
                reason: e.to_string(),
            }),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Coeffs,
    Run,
    Sweep,
    OracleCheck,
    Trajectories,
}

/// Files written by one subcommand, manifest last.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

pub fn execute(
    command: Command,
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<Artifacts, CliError> {
    match command {
        Command::Coeffs => export_coefficients(config, out_dir),
        Command::Run => run_experiment(config, out_dir),
        Command::Sweep => run_sweep(config, out_dir),
        Command::OracleCheck => oracle_check(config, out_dir),
        Command::Trajectories => run_trajectories(config, out_dir),
    }
}

/// Create `dir` and prove it accepts a file.
pub fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let probe = dir.join(".meascool-write-probe");
    File::create(&probe).map_err(io_err(&probe))?;
    fs::remove_file(&probe).map_err(io_err(&probe))
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct CsvFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvFile {
    fn create(path: PathBuf, header: &[&str]) -> Result<Self, CliError> {
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut csv = CsvFile {
            path,
            out: BufWriter::new(file),
        };
        csv.row(header.iter().map(|s| s.to_string()))?;
        Ok(csv)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<(), CliError> {
        let line = fields.into_iter().collect::<Vec<_>>().join(",");
        writeln!(self.out, "{line}").map_err(io_err(&self.path))
    }

    fn finish(mut self, artifacts: &mut Artifacts) -> Result<(), CliError> {
        self.out.flush().map_err(io_err(&self.path))?;
        artifacts.files.push(self.path);
        Ok(())
    }
}

fn write_json<S: Serialize>(
    path: PathBuf,
    value: &S,
    artifacts: &mut Artifacts,
) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("artifact is serializable");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    artifacts.files.push(path);
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    config: &'a ExperimentConfig,
    /// Fock truncation of the initial state, when a run was made.
    n_max: Option<usize>,
    seed: u64,
    rng: &'static str,
    rng_streams: Option<usize>,
    wall_time_s: f64,
    files: Vec<String>,
}

struct ManifestExtras {
    n_max: Option<usize>,
    rng_streams: Option<usize>,
}

fn finish(
    command: Command,
    config: &ExperimentConfig,
    out_dir: &Path,
    started: Instant,
    extras: ManifestExtras,
    mut artifacts: Artifacts,
) -> Result<Artifacts, CliError> {
    let files = artifacts
        .files
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let manifest = Manifest {
        tool: "meascool",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        n_max: extras.n_max,
        seed: config.seed,
        rng: "ChaCha8 (seed_from_u64(seed), stream = chunk index)",
        rng_streams: extras.rng_streams,
        wall_time_s: started.elapsed().as_secs_f64(),
        files,
    };
    write_json(out_dir.join("manifest.json"), &manifest, &mut artifacts)?;
    Ok(artifacts)
}

const RECORD_HEADER: [&str; 7] = [
    "N", "n_bar", "F_ground", "P_g", "T_eff_K", "F_th", "segment",
];

fn record_fields(r: &StepRecord64) -> Vec<String> {
    vec![
        r.step.to_string(),
        fmt_f64(r.n_bar),
        fmt_f64(r.ground_fidelity),
        fmt_f64(r.survival),
        fmt_f64(r.effective_temperature),
        fmt_f64(r.thermal_fidelity),
        r.segment.to_string(),
    ]
}

fn write_histogram(
    path: PathBuf,
    d: &PopulationDistribution64,
    artifacts: &mut Artifacts,
) -> Result<(), CliError> {
    let mut csv = CsvFile::create(path, &["n", "p_n"])?;
    for (n, p) in d.probabilities().into_iter().enumerate() {
        csv.row([n.to_string(), fmt_f64(p)])?;
    }
    csv.finish(artifacts)
}

/// Coefficient table of `[coefficients]` (or of the first segment) with
/// `|c_n|^(2k)` columns, plus the protected levels in JSON.
pub fn export_coefficients(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<Artifacts, CliError> {
    prepare_out_dir(out_dir)?;
    let started = Instant::now();
    let mut artifacts = Artifacts::default();
    let (variant, n_max, powers) = match &config.coefficients {
        Some(c) => (c.variant, c.n_max, c.powers.clone()),
        None => (config.segments[0].variant, 2500, Vec::new()),
    };
    let params = config
        .segments
        .iter()
        .find(|s| s.variant == variant)
        .map_or(config.params, |s| s.params);
    let table = build_table(variant, &params, n_max);
    let pow_cols: Vec<Vec<f64>> = powers.iter().map(|&k| table.abs2_pow(k)).collect();

    let mut header = vec!["n".to_string(), "re".into(), "im".into(), "abs2".into()];
    header.extend(powers.iter().map(|k| format!("abs2_pow_{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvFile::create(out_dir.join("coefficients.csv"), &header_refs)?;
    for (n, c) in table.values.iter().enumerate() {
        let mut row = vec![
            n.to_string(),
            fmt_f64(c.re),
            fmt_f64(c.im),
            fmt_f64(c.norm_sqr()),
        ];
        row.extend(pow_cols.iter().map(|col| fmt_f64(col[n])));
        csv.row(row)?;
    }
    csv.finish(&mut artifacts)?;

    let report = cooling_free_report(variant, &params, n_max);
    write_json(out_dir.join("cooling_free.json"), &report, &mut artifacts)?;
    finish(
        Command::Coeffs,
        config,
        out_dir,
        started,
        ManifestExtras {
            n_max: Some(n_max),
            rng_streams: None,
        },
        artifacts,
    )
}

#[derive(Serialize)]
struct RunSummary<'a> {
    schedule: &'a meascool::ProtocolSchedule64,
    initial_n_bar: f64,
    n_max: usize,
    truncated: bool,
    records: &'a [StepRecord64],
}

/// Deterministic run: `run.csv`, `run.json`, optional histograms and
/// coefficient table.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<Artifacts, CliError> {
    prepare_out_dir(out_dir)?;
    let started = Instant::now();
    let mut artifacts = Artifacts::default();
    let schedule = config.schedule()?;
    let initial = schedule.initial_state(&config.thermal_spec())?;
    let outcome = run(&initial, &schedule)?;

    let mut csv = CsvFile::create(out_dir.join("run.csv"), &RECORD_HEADER)?;
    for r in &outcome.records {
        csv.row(record_fields(r))?;
    }
    csv.finish(&mut artifacts)?;

    let summary = RunSummary {
        schedule: &schedule,
        initial_n_bar: initial.mean_occupation()?,
        n_max: initial.n_max(),
        truncated: outcome.truncated,
        records: &outcome.records,
    };
    write_json(out_dir.join("run.json"), &summary, &mut artifacts)?;

    if config.histogram {
        write_histogram(
            out_dir.join("histogram_initial.csv"),
            &initial,
            &mut artifacts,
        )?;
        write_histogram(
            out_dir.join("histogram.csv"),
            &outcome.final_state,
            &mut artifacts,
        )?;
    }
    if config.coefficients.is_some() {
        let coeffs = export_coefficients(config, out_dir)?;
        artifacts.files.extend(
            coeffs
                .files
                .into_iter()
                .filter(|p| !p.ends_with("manifest.json")),
        );
    }
    finish(
        Command::Run,
        config,
        out_dir,
        started,
        ManifestExtras {
            n_max: Some(initial.n_max()),
            rng_streams: None,
        },
        artifacts,
    )
}

/// One terminal record per grid point in `sweep.csv`.
pub fn run_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<Artifacts, CliError> {
    let Some(sweep_cfg) = &config.sweep else {
        return Err(ConfigError::Missing(vec!["sweep".into()]).into());
    };
    prepare_out_dir(out_dir)?;
    let started = Instant::now();
    let mut artifacts = Artifacts::default();
    let base = SweepBase64 {
        thermal: config.thermal_spec(),
        schedule: config.schedule()?,
    };
    let rows = sweep(sweep_cfg.axis, &sweep_cfg.grid, &base)?;

    let axis = axis_name(sweep_cfg.axis);
    let mut header = vec![axis, "initial_n_bar"];
    header.extend(RECORD_HEADER);
    header.extend(["truncated", "error"]);
    let mut csv = CsvFile::create(out_dir.join("sweep.csv"), &header)?;
    let mut failures = 0usize;
    for row in &rows {
        let mut fields = vec![
            fmt_f64(row.value),
            row.initial_n_bar.map(fmt_f64).unwrap_or_default(),
        ];
        match &row.terminal {
            Ok(r) => {
                fields.extend(record_fields(r));
                fields.extend([row.truncated.to_string(), String::new()]);
            }
            Err(e) => {
                failures += 1;
                fields.extend(std::iter::repeat_n(String::new(), RECORD_HEADER.len()));
                fields.extend([
                    row.truncated.to_string(),
                    format!("\"{}\"", e.to_string().replace('"', "'")),
                ]);
            }
        }
        csv.row(fields)?;
    }
    csv.finish(&mut artifacts)?;
    if failures > 0 {
        log::warn!(
            "{failures} of {} sweep points failed; see the error column",
            rows.len()
        );
    }
    finish(
        Command::Sweep,
        config,
        out_dir,
        started,
        ManifestExtras {
            n_max: None,
            rng_streams: None,
        },
        artifacts,
    )
}

/// Random closed-form vs block-propagator comparison, `oracle.json`. Fails
/// with a numeric error (after writing the report) when a tolerance is missed.
pub fn oracle_check(config: &ExperimentConfig, out_dir: &Path) -> Result<Artifacts, CliError> {
    prepare_out_dir(out_dir)?;
    let started = Instant::now();
    let mut artifacts = Artifacts::default();
    let report = oracle_report(config.oracle_draws, config.seed)?;
    write_json(out_dir.join("oracle.json"), &report, &mut artifacts)?;
    let artifacts = finish(
        Command::OracleCheck,
        config,
        out_dir,
        started,
        ManifestExtras {
            n_max: None,
            rng_streams: None,
        },
        artifacts,
    )?;
    if report.max_abs_error > ORACLE_TOLERANCE || report.max_unitarity_defect > UNITARITY_TOLERANCE
    {
        return Err(CliError::Numeric(format!(
            "oracle mismatch: max coefficient error {:e}, max unitarity defect {:e}",
            report.max_abs_error, report.max_unitarity_defect
        )));
    }
    Ok(artifacts)
}

/// Monte Carlo survival estimate against the deterministic `P_g(N)`,
/// `trajectories.csv`.
pub fn run_trajectories(config: &ExperimentConfig, out_dir: &Path) -> Result<Artifacts, CliError> {
    prepare_out_dir(out_dir)?;
    let started = Instant::now();
    let mut artifacts = Artifacts::default();
    let schedule = config.schedule()?;
    let initial = schedule.initial_state(&config.thermal_spec())?;
    let exact = run(&initial, &schedule)?;
    let spec = BatchSpec {
        trajectories: config.trajectories.count,
        seed: config.seed,
        chunk_size: config.trajectories.chunk_size,
    };
    let batch = sample_trajectories(&initial, &schedule, &spec)?;

    let mut csv = CsvFile::create(
        out_dir.join("trajectories.csv"),
        &["N", "P_g_estimate", "standard_error", "P_g", "z"],
    )?;
    for r in &exact.records {
        if r.step > batch.steps() {
            break;
        }
        let est = batch.estimate(r.step);
        let se = batch.standard_error(r.step);
        let z = if se > 0.0 {
            (est - r.survival) / se
        } else {
            0.0
        };
        csv.row([
            r.step.to_string(),
            fmt_f64(est),
            fmt_f64(se),
            fmt_f64(r.survival),
            fmt_f64(z),
        ])?;
    }
    csv.finish(&mut artifacts)?;
    finish(
        Command::Trajectories,
        config,
        out_dir,
        started,
        ManifestExtras {
            n_max: Some(initial.n_max()),
            rng_streams: Some(batch.streams),
        },
        artifacts,
    )
}
