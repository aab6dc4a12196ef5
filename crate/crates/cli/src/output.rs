//! CSV tables for experiment results.

use std::fs::File;
use std::path::{Path, PathBuf};

use vpe_core::experiments::{ExperimentOutput, Statistic, SweepResult, VqeResult};

use crate::error::CliError;

/// Twelve significant digits in scientific notation.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("cannot write {}: {e}", path.display()))
}

fn write_table(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `rate,replicate,estimator,abs_error`, one row per record in canonical order.
pub fn write_records(path: &Path, sweep: &SweepResult) -> Result<(), CliError> {
    let axis = if sweep.axis.is_empty() {
        "rate"
    } else {
        sweep.axis.as_str()
    };
    let rows = sweep.records.iter().map(|r| {
        vec![
            fmt12(r.rate),
            r.replicate.to_string(),
            r.estimator.clone(),
            fmt12(r.abs_error),
        ]
    });
    write_table(
        path,
        &header(&[axis, "replicate", "estimator", "abs_error"]),
        rows,
    )
}

/// Aggregates per estimator and rate; the zero-noise floor appears as rate 0.
pub fn write_summary(path: &Path, sweep: &SweepResult) -> Result<(), CliError> {
    let floor = SweepResult {
        records: sweep.floor.clone(),
        ..Default::default()
    };
    let rows = floor
        .aggregates()
        .into_iter()
        .chain(sweep.aggregates())
        .map(|a| {
            vec![
                a.estimator.clone(),
                fmt12(a.rate),
                a.count.to_string(),
                fmt12(a.rms),
                fmt12(a.median),
            ]
        });
    write_table(
        path,
        &header(&["estimator", "rate", "count", "rms", "median"]),
        rows,
    )
}

fn slope_field(s: Option<f64>) -> String {
    s.map(fmt12).unwrap_or_default()
}

/// Log-log slopes above the floor; empty when fewer than two points qualify.
pub fn write_slopes(path: &Path, sweep: &SweepResult) -> Result<(), CliError> {
    let rows = sweep.estimators().into_iter().map(|e| {
        vec![
            e.clone(),
            slope_field(sweep.slope(&e, Statistic::Rms)),
            slope_field(sweep.slope(&e, Statistic::Median)),
        ]
    });
    write_table(
        path,
        &header(&["estimator", "rms_slope", "median_slope"]),
        rows,
    )
}

pub fn write_failures(path: &Path, sweep: &SweepResult) -> Result<(), CliError> {
    let rows = sweep.failures.iter().map(|f| {
        vec![
            fmt12(f.rate),
            f.replicate.to_string(),
            f.estimator.clone(),
            f.message.clone(),
        ]
    });
    write_table(
        path,
        &header(&["rate", "replicate", "estimator", "message"]),
        rows,
    )
}

/// Every objective evaluation of every run, parameters in columns `p0..`.
pub fn write_trajectory(path: &Path, vqe: &VqeResult) -> Result<(), CliError> {
    let width = vqe
        .runs
        .iter()
        .flat_map(|r| r.optimization.trajectory.iter())
        .map(|e| e.parameters.len())
        .max()
        .unwrap_or(0);
    let mut names = header(&["rate", "replicate", "estimator", "evaluation", "value"]);
    names.extend((0..width).map(|k| format!("p{k}")));
    let rows = vqe.runs.iter().flat_map(|run| {
        run.optimization
            .trajectory
            .iter()
            .enumerate()
            .map(move |(i, e)| {
                let mut row = vec![
                    fmt12(run.rate),
                    run.replicate.to_string(),
                    run.estimator.clone(),
                    i.to_string(),
                    fmt12(e.value),
                ];
                row.extend(e.parameters.iter().map(|&p| fmt12(p)));
                row.resize(5 + width, String::new());
                row
            })
    });
    write_table(path, &names, rows)
}

/// Final state of every variational run.
pub fn write_vqe_runs(path: &Path, vqe: &VqeResult) -> Result<(), CliError> {
    let rows = vqe.runs.iter().map(|r| {
        vec![
            fmt12(r.rate),
            r.replicate.to_string(),
            r.estimator.clone(),
            fmt12(r.final_estimate),
            fmt12(r.final_truth),
            fmt12(vqe.ground_energy),
            r.optimization.evaluations.to_string(),
            r.optimization.converged.to_string(),
        ]
    });
    let names = header(&[
        "rate",
        "replicate",
        "estimator",
        "final_estimate",
        "final_truth",
        "ground_energy",
        "evaluations",
        "converged",
    ]);
    write_table(path, &names, rows)
}

/// Writes every table for `output` under `dir`, returning the paths in order.
pub fn write_all(dir: &Path, output: &ExperimentOutput) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let sweep = output.sweep();
    let file = |suffix: &str| dir.join(format!("{}{suffix}.csv", sweep.name));
    let mut written = Vec::new();
    let mut emit =
        |path: PathBuf, f: &dyn Fn(&Path) -> Result<(), CliError>| -> Result<(), CliError> {
            f(&path)?;
            written.push(path);
            Ok(())
        };
    emit(file(""), &|p| write_records(p, sweep))?;
    emit(file("_summary"), &|p| write_summary(p, sweep))?;
    emit(file("_slopes"), &|p| write_slopes(p, sweep))?;
    emit(file("_failures"), &|p| write_failures(p, sweep))?;
    match output {
        ExperimentOutput::Vqe(v) => {
            emit(file("_trajectory"), &|p| write_trajectory(p, v))?;
            emit(file("_runs"), &|p| write_vqe_runs(p, v))?;
        }
        ExperimentOutput::Sampling(s) => {
            let rows = s
                .limits
                .iter()
                .map(|(k, v)| vec![k.clone(), fmt12(*v)])
                .collect::<Vec<_>>();
            emit(file("_limits"), &|p| {
                write_table(p, &header(&["curve", "limit"]), rows.clone())
            })?;
        }
        ExperimentOutput::Sweep(_) => {}
    }
    Ok(written)
}
