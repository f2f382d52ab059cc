//! Rank-1 approximation operators.
//!
//! Every operator maps a tensor to a [`Rank1Term`] `lambda * u1 o ... o uN`
//! with unit factors. [`Rank1Method`] is the common interface consumed by the
//! deflation driver.

mod ce;
mod oracle;
mod seroap;
mod thosvd;

pub use ce::{build_gram, ce_refine, CeState, DEFAULT_CE_MAX_ITER, DEFAULT_CE_TOL};
pub use oracle::BestRank1Oracle;
pub use seroap::{seroap, seroap_traced, SeroapTrace};
pub use thosvd::thosvd;

use crate::products::khatri_rao_except;
use crate::{Error, Matrix, Result, Scalar, Tensor, Vector};

/// `lambda * u1 o u2 o ... o uN` with unit-norm factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank1Term<S> {
    pub lambda: S,
    pub factors: Vec<Vector<S>>,
}

impl<S: Scalar> Rank1Term<S> {
    /// Builds a term from arbitrary nonzero vectors, moving their norms into
    /// `lambda`.
    pub fn from_vectors(scale: S, vectors: Vec<Vector<S>>) -> Result<Self> {
        let mut lambda = scale;
        let mut factors = Vec::with_capacity(vectors.len());
        for v in vectors {
            let n = v.norm();
            if n == 0.0 {
                return Err(Error::ZeroNorm("rank-1 factor"));
            }
            lambda *= S::from_real(n);
            factors.push(v / S::from_real(n));
        }
        Ok(Rank1Term { lambda, factors })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.len()).collect()
    }

    pub fn to_tensor(&self) -> Tensor<S> {
        Tensor::outer(&self.factors)
            .expect("factors are nonempty")
            .scale(self.lambda)
    }

    /// `|T - X|_F`.
    pub fn residual(&self, t: &Tensor<S>) -> Result<f64> {
        if t.shape() != self.shape().as_slice() {
            return Err(Error::shape(format!(
                "rank-1 term of shape {:?} against tensor {:?}",
                self.shape(),
                t.shape()
            )));
        }
        Ok((t - &self.to_tensor()).norm())
    }

    /// Same factors with `lambda` replaced by the optimal `<T, U>`.
    pub fn rescaled(&self, t: &Tensor<S>) -> Result<Self> {
        let u = Tensor::outer(&self.factors)?;
        Ok(Rank1Term {
            lambda: t.inner(&u)?,
            factors: self.factors.clone(),
        })
    }
}

/// A rank-1 approximation operator.
pub trait Rank1Method<S: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    /// Approximates `t`. `hint` is a previous estimate that operators may use
    /// as an extra starting point; most ignore it.
    fn approximate(&self, t: &Tensor<S>, hint: Option<&Rank1Term<S>>) -> Result<Rank1Term<S>>;

    /// True only for operators that stand in for the best rank-1
    /// approximation, which the contraction theorems assume.
    fn is_best(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Thosvd;

impl<S: Scalar> Rank1Method<S> for Thosvd {
    fn name(&self) -> &str {
        "thosvd"
    }

    fn approximate(&self, t: &Tensor<S>, _: Option<&Rank1Term<S>>) -> Result<Rank1Term<S>> {
        thosvd(t)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Seroap {
    /// Process modes in nonincreasing order of extent.
    pub presort: bool,
}

impl<S: Scalar> Rank1Method<S> for Seroap {
    fn name(&self) -> &str {
        "seroap"
    }

    fn approximate(&self, t: &Tensor<S>, _: Option<&Rank1Term<S>>) -> Result<Rank1Term<S>> {
        Ok(seroap_traced(t, self.presort)?.0)
    }
}

/// SeROAP followed by the coupled-eigenvalue refinement. Tensors that are
/// not three-way get plain SeROAP.
#[derive(Clone, Copy, Debug)]
pub struct SeroapCe {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SeroapCe {
    fn default() -> Self {
        SeroapCe {
            max_iter: DEFAULT_CE_MAX_ITER,
            tol: DEFAULT_CE_TOL,
        }
    }
}

impl<S: Scalar> Rank1Method<S> for SeroapCe {
    fn name(&self) -> &str {
        "seroap+ce"
    }

    fn approximate(&self, t: &Tensor<S>, _: Option<&Rank1Term<S>>) -> Result<Rank1Term<S>> {
        let start = seroap(t)?;
        if t.order() != 3 {
            return Ok(start);
        }
        Ok(ce_refine(t, &start, self.max_iter, self.tol)?.0)
    }
}

/// Residual difference `|T - a(T)| - |T - b(T)|`.
pub fn compare_rank1<S: Scalar>(
    t: &Tensor<S>,
    a: &dyn Rank1Method<S>,
    b: &dyn Rank1Method<S>,
) -> Result<f64> {
    let ra = a.approximate(t, None)?.residual(t)?;
    let rb = b.approximate(t, None)?.residual(t)?;
    Ok(ra - rb)
}

/// Outcome of [`rank1_als`].
#[derive(Clone, Debug)]
pub struct Rank1AlsReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Alternating least squares with `R = 1`: each factor is replaced by the
/// normalised contraction of `T` with the conjugates of the others. Stops
/// when `|lambda|` changes by at most `rel_tol * |T|` over a sweep, or after
/// `max_iter` sweeps.
pub fn rank1_als<S: Scalar>(
    t: &Tensor<S>,
    init: &Rank1Term<S>,
    max_iter: usize,
    rel_tol: f64,
) -> Result<(Rank1Term<S>, Rank1AlsReport)> {
    let order = t.order();
    if init.shape() != t.shape() {
        return Err(Error::shape(format!(
            "initial term {:?} for tensor {:?}",
            init.shape(),
            t.shape()
        )));
    }
    let norm_t = t.norm();
    if norm_t == 0.0 {
        return Err(Error::ZeroNorm("tensor"));
    }
    let unfoldings: Vec<Matrix<S>> = (0..order).map(|n| t.unfold(n)).collect::<Result<_>>()?;
    let mut factors: Vec<Matrix<S>> = init
        .factors
        .iter()
        .map(|f| Matrix::from_column_slice(f.len(), 1, f.as_slice()))
        .collect();
    let mut term = init.rescaled(t)?;
    let mut prev = term.lambda.modulus();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut lambda = S::zero();
        for n in 0..order {
            let k = khatri_rao_except(&factors, n)?;
            let c = &unfoldings[n] * k.map(|z| z.conjugate());
            let cn = c.norm();
            if cn == 0.0 {
                return Err(Error::ZeroNorm("rank-1 ALS contraction"));
            }
            factors[n] = c / S::from_real(cn);
            lambda = S::from_real(cn);
        }
        term = Rank1Term {
            lambda,
            factors: factors.iter().map(|f| f.column(0).into_owned()).collect(),
        };
        let change = (lambda.modulus() - prev).abs();
        prev = lambda.modulus();
        if change <= rel_tol * norm_t {
            converged = true;
            break;
        }
    }
    let residual = term.residual(t)?;
    Ok((
        term,
        Rank1AlsReport {
            iterations,
            residual,
            converged,
        },
    ))
}
