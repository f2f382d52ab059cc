use rand::Rng;

use crate::products::khatri_rao_except;
use crate::random::Distribution;
use crate::{Error, Matrix, Result, Scalar, Tensor};

/// Rank-`R` CP model: factor matrices `A(n)` of size `I_n x R`.
#[derive(Clone, Debug, PartialEq)]
pub struct CPModel<S> {
    factors: Vec<Matrix<S>>,
}

impl<S: Scalar> CPModel<S> {
    pub fn new(factors: Vec<Matrix<S>>) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::InvalidArgument("a CP model needs at least one factor".into()));
        };
        let rank = first.ncols();
        if rank == 0 {
            return Err(Error::InvalidArgument("CP rank must be positive".into()));
        }
        if let Some(bad) = factors.iter().find(|f| f.ncols() != rank || f.nrows() == 0) {
            return Err(Error::shape(format!(
                "factor of size {}x{} in a rank-{rank} model",
                bad.nrows(),
                bad.ncols()
            )));
        }
        Ok(CPModel { factors })
    }

    /// Factor entries drawn i.i.d. from `dist`.
    pub fn random<R: Rng + ?Sized>(
        shape: &[usize],
        rank: usize,
        dist: Distribution,
        rng: &mut R,
    ) -> Result<Self> {
        if rank == 0 || shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "invalid model size {shape:?} with rank {rank}"
            )));
        }
        let factors = shape
            .iter()
            .map(|&n| Matrix::from_fn(n, rank, |_, _| S::sample(dist, rng)))
            .collect();
        Ok(CPModel { factors })
    }

    pub fn zeros(shape: &[usize], rank: usize) -> Result<Self> {
        Self::new(shape.iter().map(|&n| Matrix::zeros(n, rank)).collect())
    }

    pub fn rank(&self) -> usize {
        self.factors[0].ncols()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.nrows()).collect()
    }

    pub fn factors(&self) -> &[Matrix<S>] {
        &self.factors
    }

    pub fn factors_mut(&mut self) -> &mut [Matrix<S>] {
        &mut self.factors
    }

    pub fn into_factors(self) -> Vec<Matrix<S>> {
        self.factors
    }

    /// Sum of the `R` outer products of corresponding factor columns.
    pub fn reconstruct(&self) -> Tensor<S> {
        let shape = self.shape();
        if self.order() == 1 {
            let col = self.factors[0].column_sum();
            return Tensor::new(shape, col.as_slice().to_vec()).expect("consistent shape");
        }
        let kr = khatri_rao_except(&self.factors, 0).expect("factor ranks agree");
        let unfolded = &self.factors[0] * kr.transpose();
        Tensor::fold(&unfolded, 0, &shape).expect("consistent shape")
    }

    /// All factors stacked column-major into one vector, mode by mode.
    pub fn to_flat(&self) -> Vec<S> {
        self.factors
            .iter()
            .flat_map(|f| f.as_slice().iter().copied())
            .collect()
    }

    /// Inverse of [`CPModel::to_flat`] for a given shape and rank.
    pub fn from_flat(shape: &[usize], rank: usize, flat: &[S]) -> Result<Self> {
        let total: usize = shape.iter().map(|n| n * rank).sum();
        if flat.len() != total {
            return Err(Error::shape(format!(
                "flat parameter vector of length {} for {shape:?} rank {rank}",
                flat.len()
            )));
        }
        let mut offset = 0;
        let factors = shape
            .iter()
            .map(|&n| {
                let f = Matrix::from_column_slice(n, rank, &flat[offset..offset + n * rank]);
                offset += n * rank;
                f
            })
            .collect();
        Self::new(factors)
    }
}
