use web_time::Instant;

use serde::Serialize;

use crate::cpd::{SolveReport, StopReason, StopRule};
use crate::rank1::{Rank1Method, Rank1Term};
use crate::{Error, Result, Scalar, Tensor, Vector};

/// Norms recorded at one `(r, l)` step of the deflation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub y_norm: f64,
    pub x_norm: f64,
    pub e_norm: f64,
}

/// Everything a deflation run produced. Sweeps and components are 0-based
/// here: `records[l][r]` describes component `r` in sweep `l`, with sweep 0
/// the initialisation.
#[derive(Clone, Debug, Serialize)]
pub struct DeflationTrace<S> {
    pub method: String,
    /// Whether the rank-1 operator claimed to be a best-approximation oracle.
    pub best_operator: bool,
    pub rank: usize,
    pub records: Vec<Vec<StepRecord>>,
    #[serde(skip)]
    pub terms: Vec<Vec<Rank1Term<S>>>,
    /// `|E[R, l]|` at the end of every sweep.
    pub sweep_residuals: Vec<f64>,
    /// `E[r, l]`, kept only when tensor retention was requested.
    #[serde(skip)]
    pub residuals: Option<Vec<Vec<Tensor<S>>>>,
    pub report: SolveReport,
}

impl<S: Scalar> DeflationTrace<S> {
    pub fn sweeps(&self) -> usize {
        self.records.len()
    }

    /// `X[r, l]` rebuilt from the stored term.
    pub fn x(&self, r: usize, l: usize) -> Tensor<S> {
        self.terms[l][r].to_tensor()
    }

    /// Retained `E[r, l]`.
    pub fn e(&self, r: usize, l: usize) -> Result<&Tensor<S>> {
        self.residuals.as_ref().map(|e| &e[l][r]).ok_or(Error::MissingTensors)
    }
}

fn zero_term<S: Scalar>(shape: &[usize]) -> Rank1Term<S> {
    Rank1Term {
        lambda: S::zero(),
        factors: shape
            .iter()
            .map(|&n| Vector::from_fn(n, |i, _| if i == 0 { S::one() } else { S::zero() }))
            .collect(),
    }
}

/// Deflation-based CP decomposition.
///
/// Sweep 0 peels `R` rank-1 terms off successive residuals:
/// `X[r,0] = φ(Y[r,0])`, `Y[r+1,0] = Y[r,0] - X[r,0]`. Every later sweep
/// re-approximates each component from its previous estimate plus the
/// running residual, `Y[r,l] = X[r,l-1] + E[r-1,l]` (with `E[R,l-1]` for the
/// first component), and sets `E[r,l] = Y[r,l] - X[r,l]`. The stop rule is
/// applied to `|E[R,l]|` after each sweep; `max_iterations` counts sweeps
/// including the initial one. Returns the last sweep's terms.
///
/// The previous estimate `X[r,l-1]` is passed to `φ` as a hint. A zero
/// `Y[r,l]` yields a zero term without calling `φ`.
pub fn dcpd<S: Scalar>(
    t: &Tensor<S>,
    rank: usize,
    phi: &dyn Rank1Method<S>,
    stop: &StopRule,
    retain: bool,
) -> Result<(Vec<Rank1Term<S>>, DeflationTrace<S>)> {
    if rank == 0 {
        return Err(Error::InvalidArgument("rank must be positive".into()));
    }
    let clock = Instant::now();
    let approximate = |y: &Tensor<S>, hint: Option<&Rank1Term<S>>, r: usize, l: usize| {
        if y.norm() == 0.0 {
            return Ok(zero_term(y.shape()));
        }
        phi.approximate(y, hint).map_err(|e| Error::Rank1Failure {
            r: r + 1,
            l: l + 1,
            source: Box::new(e),
        })
    };
    let mut records = Vec::new();
    let mut terms: Vec<Vec<Rank1Term<S>>> = Vec::new();
    let mut kept: Vec<Vec<Tensor<S>>> = Vec::new();
    let mut sweep_residuals = Vec::new();

    let mut y = t.clone();
    let mut sweep_records = Vec::with_capacity(rank);
    let mut sweep_terms = Vec::with_capacity(rank);
    let mut sweep_e = Vec::new();
    for r in 0..rank {
        let x = approximate(&y, None, r, 0)?;
        let e = &y - &x.to_tensor();
        sweep_records.push(StepRecord {
            y_norm: y.norm(),
            x_norm: x.lambda.modulus(),
            e_norm: e.norm(),
        });
        sweep_terms.push(x);
        if retain {
            sweep_e.push(e.clone());
        }
        y = e;
    }
    let mut e_last = y;
    let mut history = vec![t.norm(), e_last.norm()];
    sweep_residuals.push(e_last.norm());
    records.push(sweep_records);
    terms.push(sweep_terms);
    if retain {
        kept.push(sweep_e);
    }

    let mut l = 0;
    let reason = loop {
        if let Some(reason) = stop.check(l + 1, history[l], history[l + 1]) {
            break reason;
        }
        l += 1;
        let mut sweep_records = Vec::with_capacity(rank);
        let mut sweep_terms: Vec<Rank1Term<S>> = Vec::with_capacity(rank);
        let mut sweep_e = Vec::new();
        let mut e_prev = e_last;
        for (r, prev) in terms[l - 1].iter().enumerate() {
            let y = &prev.to_tensor() + &e_prev;
            let x = approximate(&y, Some(prev), r, l)?;
            let e = &y - &x.to_tensor();
            sweep_records.push(StepRecord {
                y_norm: y.norm(),
                x_norm: x.lambda.modulus(),
                e_norm: e.norm(),
            });
            sweep_terms.push(x);
            if retain {
                sweep_e.push(e.clone());
            }
            e_prev = e;
        }
        e_last = e_prev;
        history.push(e_last.norm());
        sweep_residuals.push(e_last.norm());
        records.push(sweep_records);
        terms.push(sweep_terms);
        if retain {
            kept.push(sweep_e);
        }
    };
    let report = SolveReport {
        iterations: history.len() - 1,
        residual_history: history,
        converged: reason != StopReason::MaxIterations,
        stop_reason: reason,
        wall_time: clock.elapsed(),
    };
    let trace = DeflationTrace {
        method: phi.name().to_string(),
        best_operator: phi.is_best(),
        rank,
        records,
        terms,
        sweep_residuals,
        residuals: retain.then_some(kept),
        report,
    };
    Ok((trace.terms.last().expect("at least one sweep").clone(), trace))
}
