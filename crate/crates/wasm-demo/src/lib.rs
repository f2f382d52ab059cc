//! Browser bindings for three small experiments. Every export returns a JSON
//! string; the plain Rust functions behind them are usable natively.

use cpdeflate::cpd::{als, cg_els, dcpd, random_init, StopRule};
use cpdeflate::random::{add_noise, derive_seed, random_cp, random_tensor, rng_from_seed, Distribution};
use cpdeflate::rank1::{ce_refine, seroap, thosvd, Seroap, Thosvd, DEFAULT_CE_TOL};
use cpdeflate::{c64, Scalar, Tensor};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_ENTRIES: usize = 20_000;

fn check_shape(shape: &[usize]) -> Result<(), String> {
    if shape.is_empty() || shape.contains(&0) {
        return Err("dimensions must be positive".into());
    }
    if shape.iter().product::<usize>() > MAX_ENTRIES {
        return Err(format!("at most {MAX_ENTRIES} entries in the browser"));
    }
    Ok(())
}

fn parse_shape(text: &str) -> Result<Vec<usize>, String> {
    let shape = text
        .split(['x', 'X', ',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| format!("bad dimension `{s}`")))
        .collect::<Result<Vec<_>, _>>()?;
    check_shape(&shape)?;
    Ok(shape)
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
pub struct GapReport {
    pub shape: Vec<usize>,
    /// `|T - THOSVD(T)| - |T - SeROAP(T)|` per trial.
    pub gaps: Vec<f64>,
    pub negative: usize,
}

fn gaps<S: Scalar>(shape: &[usize], trials: usize, seed: u32) -> cpdeflate::Result<Vec<f64>> {
    (0..trials)
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed as u64, &[i as u64]));
            let t: Tensor<S> = random_tensor(shape, Distribution::Uniform, &mut rng)?;
            Ok(thosvd(&t)?.residual(&t)? - seroap(&t)?.residual(&t)?)
        })
        .collect()
}

/// THOSVD minus SeROAP residual on `trials` random tensors.
pub fn rank1_gap_report(shape: &str, trials: usize, complex: bool, seed: u32) -> Result<String, String> {
    let shape = parse_shape(shape)?;
    if shape.len() < 3 {
        return Err("use at least three modes".into());
    }
    let trials = trials.clamp(1, 2000);
    let gaps = if complex {
        gaps::<c64>(&shape, trials, seed)
    } else {
        gaps::<f64>(&shape, trials, seed)
    }
    .map_err(|e| e.to_string())?;
    let negative = gaps.iter().filter(|&&g| g < -1e-10).count();
    json(&GapReport { shape, gaps, negative })
}

#[derive(Serialize)]
pub struct Curve {
    pub algorithm: &'static str,
    /// `|T - model|` before the first iteration and after each one.
    pub residuals: Vec<f64>,
}

#[derive(Serialize)]
pub struct CurveReport {
    pub shape: Vec<usize>,
    pub rank: usize,
    pub snr_db: f64,
    pub curves: Vec<Curve>,
}

/// Residual per iteration of DCPD (SeROAP and THOSVD), ALS and CG on one
/// noisy low-rank tensor of unit norm. DCPD counts one sweep per iteration.
pub fn deflation_curve_report(n: usize, rank: usize, snr_db: f64, iterations: usize, seed: u32) -> Result<String, String> {
    let shape = vec![n, n, n];
    check_shape(&shape)?;
    if rank == 0 || rank > 10 {
        return Err("rank must be between 1 and 10".into());
    }
    let iterations = iterations.clamp(1, 500);
    let run = || -> cpdeflate::Result<Vec<Curve>> {
        let mut rng = rng_from_seed(derive_seed(seed as u64, &[0]));
        let (_, t) = random_cp::<f64, _>(&shape, rank, Distribution::Uniform, &mut rng)?;
        let t = t.scale(1.0 / t.norm());
        let t = add_noise(&t, snr_db, &mut rng)?;
        let init = random_init::<f64>(&shape, rank, derive_seed(seed as u64, &[1]))?;
        let stop = StopRule::fixed(iterations);
        Ok(vec![
            Curve {
                algorithm: "dcpd-seroap",
                residuals: dcpd(&t, rank, &Seroap::default(), &stop, false)?.1.report.residual_history,
            },
            Curve {
                algorithm: "dcpd-thosvd",
                residuals: dcpd(&t, rank, &Thosvd, &stop, false)?.1.report.residual_history,
            },
            Curve {
                algorithm: "als",
                residuals: als(&t, &init, &stop)?.1.residual_history,
            },
            Curve {
                algorithm: "cg",
                residuals: cg_els(&t, &init, &stop)?.1.residual_history,
            },
        ])
    };
    let curves = run().map_err(|e| e.to_string())?;
    json(&CurveReport {
        shape,
        rank,
        snr_db,
        curves,
    })
}

#[derive(Serialize)]
pub struct CeReport {
    pub shape: Vec<usize>,
    pub thosvd_residual: f64,
    pub seroap_residual: f64,
    pub ce_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every half-step, starting from the SeROAP point.
    pub lambda_history: Vec<f64>,
}

fn ce_run<S: Scalar>(shape: &[usize], max_iter: usize, seed: u32) -> cpdeflate::Result<CeReport> {
    let mut rng = rng_from_seed(derive_seed(seed as u64, &[2]));
    let t: Tensor<S> = random_tensor(shape, Distribution::Uniform, &mut rng)?;
    let start = seroap(&t)?;
    let (term, state) = ce_refine(&t, &start, max_iter, DEFAULT_CE_TOL)?;
    Ok(CeReport {
        shape: shape.to_vec(),
        thosvd_residual: thosvd(&t)?.residual(&t)?,
        seroap_residual: start.residual(&t)?,
        ce_residual: term.residual(&t)?,
        iterations: state.iterations,
        converged: state.converged,
        lambda_history: state.lambda_history,
    })
}

/// Coupled-eigenvalue refinement of SeROAP on a random three-way tensor.
pub fn ce_refinement_report(shape: &str, complex: bool, max_iter: usize, seed: u32) -> Result<String, String> {
    let shape = parse_shape(shape)?;
    if shape.len() != 3 {
        return Err("the refinement needs exactly three modes".into());
    }
    if shape[0] * shape[1] > 400 {
        return Err("I1 * I2 must be at most 400".into());
    }
    let max_iter = max_iter.clamp(1, 1000);
    let report = if complex {
        ce_run::<c64>(&shape, max_iter, seed)
    } else {
        ce_run::<f64>(&shape, max_iter, seed)
    }
    .map_err(|e| e.to_string())?;
    json(&report)
}

#[wasm_bindgen]
pub fn rank1_gap(shape: &str, trials: usize, complex: bool, seed: u32) -> Result<String, JsError> {
    rank1_gap_report(shape, trials, complex, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn deflation_curves(n: usize, rank: usize, snr_db: f64, iterations: usize, seed: u32) -> Result<String, JsError> {
    deflation_curve_report(n, rank, snr_db, iterations, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ce_refinement(shape: &str, complex: bool, max_iter: usize, seed: u32) -> Result<String, JsError> {
    ce_refinement_report(shape, complex, max_iter, seed).map_err(|e| JsError::new(&e))
}
