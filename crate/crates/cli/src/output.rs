//! report.json, spectrum.csv, rates.csv and the optional binary dumps.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::pipeline::{Artifacts, RunReport};
use crate::PipelineError;

#[derive(Serialize)]
struct SpectrumLine {
    h: f64,
    j: usize,
    lambda_numeric: f64,
    lambda_predicted: Option<f64>,
    ratio: Option<f64>,
    residual: f64,
}

#[derive(Serialize)]
struct RateLine {
    branch: usize,
    #[serde(rename = "E_pred")]
    e_pred: f64,
    #[serde(rename = "E_fit")]
    e_fit: Option<f64>,
    gamma_pred: f64,
    gamma_fit: Option<f64>,
    prefactor_fit: Option<f64>,
    rms_log_misfit: Option<f64>,
}

pub const SPECTRUM_HEADER: &str = "h,j,lambda_numeric,lambda_predicted,ratio,residual";
pub const RATES_HEADER: &str = "branch,E_pred,E_fit,gamma_pred,gamma_fit,prefactor_fit,rms_log_misfit";

fn io(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Output(format!("{}: {e}", path.display()))
}

fn write_csv<T: Serialize>(path: &Path, header: &str, rows: impl IntoIterator<Item = T>) -> Result<(), PipelineError> {
    // header written by hand so that empty tables still carry it
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| io(path, e))?;
    w.write_record(header.split(',')).map_err(|e| io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Writes every output into `dir` (created if missing); returns the paths written.
pub fn write_outputs(dir: &Path, report: &RunReport, artifacts: &Artifacts) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).map_err(|e| io(&path, e))?;
    fs::write(&path, json + "\n").map_err(|e| io(&path, e))?;
    written.push(path);

    let path = dir.join("spectrum.csv");
    write_csv(
        &path,
        SPECTRUM_HEADER,
        report.ratios.iter().map(|r| SpectrumLine {
            h: r.h,
            j: r.j,
            lambda_numeric: r.lambda_numeric,
            lambda_predicted: r.lambda_predicted,
            ratio: r.ratio,
            residual: r.residual,
        }),
    )?;
    written.push(path);

    let path = dir.join("rates.csv");
    write_csv(
        &path,
        RATES_HEADER,
        report.rates.iter().map(|r| RateLine {
            branch: r.branch,
            e_pred: r.energy_pred,
            e_fit: r.fit.map(|f| f.energy),
            gamma_pred: r.gamma_pred,
            gamma_fit: r.fit.map(|f| f.gamma),
            prefactor_fit: r.fit.map(|f| f.prefactor),
            rms_log_misfit: r.fit.map(|f| f.rms_log_misfit),
        }),
    )?;
    written.push(path);

    for (h, vecs) in &artifacts.eigenvectors {
        let path = dir.join(format!("eigenvectors_h{h}.bin"));
        let n = vecs.first().map_or(0, Vec::len);
        wk_spectrum::dump::write_eigenvectors(&path, n, vecs).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    for (h, qms) in &artifacts.quasimodes {
        let path = dir.join(format!("quasimodes_h{h}.bin"));
        wk_quasimode::write_quasimodes(&path, qms).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
