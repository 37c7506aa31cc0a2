//! File formats: JSON tensors and problem descriptions, CSV iteration logs,
//! JSON run summaries.
//!
//! A tensor file is `{"dims": [..], "data": [[re, im], ..]}` with the data
//! flat in first-index-fastest order. A problem file names its tensor files
//! by path relative to its own directory.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::objective::{per_ratio, transformed, Dagger, Family, ProblemSpec};
use crate::solver::{IterationRecord, SolveResult, SolveStatus};
use crate::tensor::DenseTensor;

#[derive(Serialize, Deserialize)]
struct TensorFile {
    dims: Vec<usize>,
    data: Vec<[f64; 2]>,
}

pub fn write_tensor(path: &Path, t: &DenseTensor) -> Result<()> {
    let file = TensorFile {
        dims: t.dims().to_vec(),
        data: t.data().iter().map(|z| [z.re, z.im]).collect(),
    };
    let body = serde_json::to_string(&file)?;
    fs::write(path, body)?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<DenseTensor> {
    let body = fs::read_to_string(path)?;
    let file: TensorFile = serde_json::from_str(&body)?;
    let data = file
        .data
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    DenseTensor::from_data(&file.dims, data)
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    family: String,
    dagger: String,
    #[serde(default = "one")]
    gamma: usize,
    ranks: Vec<usize>,
    weights: Vec<f64>,
    tensors: Vec<String>,
    #[serde(default)]
    real: bool,
}

fn one() -> usize {
    1
}

/// Writes a problem file plus one tensor file per data tensor into `dir`.
/// Returns the problem file path.
pub fn write_problem(dir: &Path, name: &str, spec: &ProblemSpec) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut tensor_names = Vec::new();
    for (k, t) in spec.tensors.iter().enumerate() {
        let fname = format!("{name}_tensor_{k}.json");
        write_tensor(&dir.join(&fname), t)?;
        tensor_names.push(fname);
    }
    let file = ProblemFile {
        family: spec.family.as_str().to_string(),
        dagger: spec.dagger.as_str().to_string(),
        gamma: spec.gamma,
        ranks: spec.ranks.clone(),
        weights: spec.weights.clone(),
        tensors: tensor_names,
        real: spec.real_data,
    };
    let path = dir.join(format!("{name}.problem.json"));
    fs::write(&path, serde_json::to_string_pretty(&file)?)?;
    Ok(path)
}

/// Reads a problem file, resolving tensor paths against its directory.
pub fn read_problem(path: &Path) -> Result<ProblemSpec> {
    let body = fs::read_to_string(path)?;
    let file: ProblemFile = serde_json::from_str(&body)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let tensors = file
        .tensors
        .iter()
        .map(|t| read_tensor(&base.join(t)))
        .collect::<Result<Vec<_>>>()?;
    let mut spec = ProblemSpec::new(
        Family::parse(&file.family)?,
        tensors,
        file.weights,
        file.ranks,
        Dagger::parse(&file.dagger)?,
        file.gamma,
    )?;
    spec.real_data = file.real;
    Ok(spec)
}

/// One CSV row per rotation: k, f, grad_norm, p, i, j, theta, phi,
/// step_norm, slack. Mode and pair indices are 1-based on disk.
pub fn write_iteration_log(path: &Path, records: &[IterationRecord]) -> Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "k,f,grad_norm,p,i,j,theta,phi,step_norm,slack")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.objective,
            r.grad_norm,
            r.mode + 1,
            r.pair.0 + 1,
            r.pair.1 + 1,
            r.theta,
            r.phi,
            r.step_norm,
            r.slack
        )?;
    }
    Ok(())
}

/// Run summary mirroring the benchmark tables: final value, residual against
/// the weighted input norm, diagonal concentration where meaningful.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub solver: String,
    pub family: String,
    pub final_objective: f64,
    pub input_norm_sq: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per: Option<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub sweeps: f64,
    pub status: String,
    pub wall_time_s: f64,
}

pub fn summarize(
    spec: &ProblemSpec,
    result: &SolveResult,
    solver: &str,
    wall_time_s: f64,
) -> Result<RunSummary> {
    let input_norm_sq: f64 = spec
        .tensors
        .iter()
        .zip(&spec.weights)
        .map(|(t, a)| a * t.frobenius_norm_sq())
        .sum();
    let per = match spec.family {
        Family::Jatd | Family::JatdS => {
            let w = transformed(spec, &result.tuple)?;
            if w.len() == 1 {
                Some(per_ratio(&w[0])?)
            } else {
                let num: f64 = w
                    .iter()
                    .zip(&spec.weights)
                    .map(|(t, a)| a * t.diag_norm_sq())
                    .sum();
                let den: f64 = w
                    .iter()
                    .zip(&spec.weights)
                    .map(|(t, a)| a * t.frobenius_norm_sq())
                    .sum();
                Some(num / den)
            }
        }
        _ => None,
    };
    Ok(RunSummary {
        solver: solver.to_string(),
        family: spec.family.as_str().to_string(),
        final_objective: result.final_objective,
        input_norm_sq,
        residual: input_norm_sq - result.final_objective,
        per,
        grad_norm: result.final_grad_norm,
        iterations: result.rotations,
        sweeps: result.sweeps,
        status: match result.status {
            SolveStatus::GradConverged => "grad-converged".to_string(),
            SolveStatus::MaxIter => "max-iter".to_string(),
        },
        wall_time_s,
    })
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(summary)?)?;
    Ok(())
}

/// Reads back a summary, mostly for tests and tooling.
pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let body = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&body)?)
}
