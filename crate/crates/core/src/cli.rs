//! Command implementations behind the `bardina` binary.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::info;

use crate::diagnostics::Recorder;
use crate::error::{Error, Result};
use crate::io::{RunConfig, SnapshotFile, TimeSeriesWriter};
use crate::solver::Solver;
use crate::verify::{alpha_sweep, run_suite, AlphaSweep, Suite, SuiteReport};
use crate::weights::WeightField;

pub const TIME_SERIES_FILE: &str = "timeseries.csv";

/// Snapshot file name for a step.
pub fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step:08}.bin")
}

/// What a finished run left on disk.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub rows: usize,
    pub snapshots: Vec<PathBuf>,
    pub initial_energy: f64,
    pub final_energy: f64,
}

fn output_dir(cfg: &RunConfig, config_path: &Path) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| {
        config_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("output")
    })
}

/// Run the configured simulation, writing the time series and snapshots
/// every `output.every` steps (the initial and final states always).
pub fn cmd_run(config_path: &Path, allow_large_gamma: bool) -> Result<RunSummary> {
    let cfg = RunConfig::load(config_path)?;
    let spec = cfg.weight_spec(allow_large_gamma)?;
    let solver = Solver::new(&cfg.solver)?;
    let dir = output_dir(&cfg, config_path);
    fs::create_dir_all(&dir)?;
    let every = cfg.solver.output_every;
    let n_steps = cfg.solver.n_steps();
    info!(
        "run: {}x{} grid, {} steps of dt = {}, output to {}",
        cfg.solver.nx,
        cfg.solver.ny,
        n_steps,
        cfg.solver.dt,
        dir.display()
    );
    let mut writer = TimeSeriesWriter::new(BufWriter::new(File::create(dir.join(TIME_SERIES_FILE))?))?;
    let mut recorder = Recorder::new(WeightField::new(solver.grid(), &spec));
    let mut summary = RunSummary {
        output_dir: dir.clone(),
        rows: 0,
        snapshots: Vec::new(),
        initial_energy: f64::NAN,
        final_energy: f64::NAN,
    };
    let alpha = cfg.solver.alpha;
    let nu = cfg.solver.nu;
    solver.run_from(solver.initial_state()?, |s, st| {
        let rec = recorder.observe(s, st)?;
        if st.step == 0 {
            summary.initial_energy = rec.energy;
        }
        summary.final_energy = rec.energy;
        if st.step % every == 0 || st.step == n_steps {
            writer.write_record(&rec)?;
            summary.rows += 1;
            let path = dir.join(snapshot_name(st.step));
            SnapshotFile::from_field(&st.v, st.t, alpha, nu).write(&path)?;
            summary.snapshots.push(path);
        }
        Ok(())
    })?;
    writer.flush()?;
    info!(
        "run finished: E {:.6e} -> {:.6e}, {} rows",
        summary.initial_energy, summary.final_energy, summary.rows
    );
    Ok(summary)
}

pub fn cmd_verify(config_path: &Path, suite: Suite, allow_large_gamma: bool) -> Result<SuiteReport> {
    let cfg = RunConfig::load(config_path)?;
    // validates gamma before any work
    cfg.weight_spec(allow_large_gamma)?;
    info!("verify: suite {suite} at {}x{}", cfg.solver.nx, cfg.solver.ny);
    run_suite(suite, &cfg, allow_large_gamma)
}

pub fn cmd_compare_nse(config_path: &Path, alphas: &[f64]) -> Result<AlphaSweep> {
    let cfg = RunConfig::load(config_path)?;
    if alphas.is_empty() {
        return Err(Error::Config("alpha list is empty".into()));
    }
    alpha_sweep(&cfg.solver, alphas)
}
