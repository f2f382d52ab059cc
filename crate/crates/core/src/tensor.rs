//! Dense N-way tensors.
//!
//! Entries are stored first-index-fastest: the multi-index `(i1, ..., iN)`
//! lives at offset `i1 + I1*(i2 + I2*(i3 + ...))`. Unfoldings follow the
//! Kolda convention, so `unfold(0)` is the buffer viewed as an
//! `I1 x (I2...IN)` column-major matrix and the other unfoldings are
//! explicit permutations.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Sub};

use serde::Serialize;

use crate::{c64, Error, Matrix, Result, Scalar, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    shape: Vec<usize>,
    data: Vec<S>,
}

/// Angle between two tensors, always in `[0, pi/2]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Angle(f64);

impl Angle {
    /// Clamps `radians` into `[0, pi/2]`.
    pub fn new(radians: f64) -> Self {
        Angle(radians.clamp(0.0, FRAC_PI_2))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "tensor shape must be a non-empty list of positive extents, got {shape:?}"
        )));
    }
    Ok(shape.iter().product())
}

impl<S: Scalar> Tensor<S> {
    pub fn new(shape: Vec<usize>, data: Vec<S>) -> Result<Self> {
        let len = check_shape(&shape)?;
        if data.len() != len {
            return Err(Error::shape(format!(
                "buffer of length {} for shape {:?} (expected {len})",
                data.len(),
                shape
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        Ok(Tensor {
            shape: shape.to_vec(),
            data: vec![S::zero(); len],
        })
    }

    /// Fills a tensor by evaluating `f` on every multi-index, in storage order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> S) -> Result<Self> {
        let len = check_shape(shape)?;
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, shape);
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flat buffer in storage order.
    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut off = 0;
        let mut stride = 1;
        for (&i, &n) in index.iter().zip(&self.shape) {
            debug_assert!(i < n);
            off += i * stride;
            stride *= n;
        }
        off
    }

    pub fn get(&self, index: &[usize]) -> S {
        self.data[self.offset(index)]
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// Mode-`mode` unfolding (0-based), an `I_mode x prod_{j != mode} I_j`
    /// matrix whose column index runs over the remaining modes with the
    /// smaller mode varying fastest.
    pub fn unfold(&self, mode: usize) -> Result<Matrix<S>> {
        self.check_mode(mode)?;
        let rows = self.shape[mode];
        let cols = self.len() / rows;
        if mode == 0 {
            return Ok(Matrix::from_column_slice(rows, cols, &self.data));
        }
        // Entries with the same row form `outer` contiguous runs of `inner`.
        let inner: usize = self.shape[..mode].iter().product();
        let outer = cols / inner;
        let mut out = Matrix::zeros(rows, cols);
        for o in 0..outer {
            for i in 0..rows {
                let src = inner * (i + rows * o);
                let dst_col = inner * o;
                for k in 0..inner {
                    out[(i, dst_col + k)] = self.data[src + k];
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`Tensor::unfold`].
    pub fn fold(matrix: &Matrix<S>, mode: usize, shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        if mode >= shape.len() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: shape.len(),
            });
        }
        let rows = shape[mode];
        if matrix.nrows() != rows || matrix.nrows() * matrix.ncols() != len {
            return Err(Error::shape(format!(
                "cannot fold a {}x{} matrix along mode {mode} into {shape:?}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if mode == 0 {
            return Ok(Tensor {
                shape: shape.to_vec(),
                data: matrix.as_slice().to_vec(),
            });
        }
        let inner: usize = shape[..mode].iter().product();
        let outer = matrix.ncols() / inner;
        let mut data = vec![S::zero(); len];
        for o in 0..outer {
            for i in 0..rows {
                let dst = inner * (i + rows * o);
                let src_col = inner * o;
                for k in 0..inner {
                    data[dst + k] = matrix[(i, src_col + k)];
                }
            }
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    /// `<self, other> = sum self_i * conj(other_i)`.
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |acc, (&a, &b)| acc + a * b.conjugate()))
    }

    pub fn norm_squared(&self) -> f64 {
        self.data.iter().map(|z| z.modulus_squared()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// `arccos(|<T,U>| / (|T| |U|))`, clamped to `[0, pi/2]`.
    pub fn angle(&self, other: &Self) -> Result<Angle> {
        let (na, nb) = (self.norm(), other.norm());
        if na == 0.0 {
            return Err(Error::ZeroNorm("first tensor"));
        }
        if nb == 0.0 {
            return Err(Error::ZeroNorm("second tensor"));
        }
        let cos = self.inner(other)?.modulus() / (na * nb);
        Ok(Angle::new(cos.min(1.0).acos()))
    }

    /// Rank-1 tensor `v1 o v2 o ... o vN`.
    pub fn outer(vectors: &[Vector<S>]) -> Result<Self> {
        let shape: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
        let len = check_shape(&shape)?;
        let mut data = Vec::with_capacity(len);
        data.push(S::one());
        for v in vectors {
            let prev = std::mem::take(&mut data);
            data.reserve(prev.len() * v.len());
            for &c in v.iter() {
                data.extend(prev.iter().map(|&p| p * c));
            }
        }
        Ok(Tensor { shape, data })
    }

    pub fn scale(&self, alpha: S) -> Self {
        self.map(|z| z * alpha)
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conjugate())
    }

    /// `self + alpha * other`, in place.
    pub fn axpy(&mut self, alpha: S, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// Vectorised slice `T(:, :, k)` of a three-way tensor, i.e. column `k` of
    /// the buffer viewed as `(I1*I2) x I3`.
    pub fn frontal_slice(&self, k: usize) -> Result<Vector<S>> {
        if self.order() != 3 {
            return Err(Error::InvalidArgument(format!(
                "frontal slices need a three-way tensor, got order {}",
                self.order()
            )));
        }
        let n = self.shape[0] * self.shape[1];
        if k >= self.shape[2] {
            return Err(Error::InvalidArgument(format!(
                "slice {k} out of range for I3 = {}",
                self.shape[2]
            )));
        }
        Ok(Vector::from_column_slice(&self.data[k * n..(k + 1) * n]))
    }

    /// Fibre along mode 0 at the given trailing indices, `T(:, i2, ..., iN)`.
    pub fn mode0_fibre(&self, trailing: &[usize]) -> Vector<S> {
        let mut idx = Vec::with_capacity(self.order());
        idx.push(0);
        idx.extend_from_slice(trailing);
        let start = self.offset(&idx);
        Vector::from_column_slice(&self.data[start..start + self.shape[0]])
    }

    /// Reorders modes: mode `k` of the result is mode `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.order()];
        if perm.len() != self.order() || perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of {} modes",
                self.order()
            )));
        }
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut src = vec![0usize; self.order()];
        Tensor::from_fn(&shape, |idx| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = idx[k];
            }
            self.get(&src)
        })
    }

    pub fn to_complex(&self) -> Tensor<c64> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.to_c64()).collect(),
        }
    }

    /// Converts from a complex tensor; real targets keep the real parts.
    pub fn from_complex(t: &Tensor<c64>) -> Self {
        Tensor {
            shape: t.shape.clone(),
            data: t.data.iter().map(|&z| S::from_c64(z)).collect(),
        }
    }
}

/// Advances a first-index-fastest multi-index; wraps to all zeros at the end.
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for (i, &n) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < n {
            return;
        }
        *i = 0;
    }
}

impl<S: Scalar> Add for &Tensor<S> {
    type Output = Tensor<S>;

    fn add(self, rhs: Self) -> Tensor<S> {
        assert_eq!(self.shape, rhs.shape, "tensor shapes differ");
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<S: Scalar> Sub for &Tensor<S> {
    type Output = Tensor<S>;

    fn sub(self, rhs: Self) -> Tensor<S> {
        assert_eq!(self.shape, rhs.shape, "tensor shapes differ");
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_tensor, rng_from_seed, Distribution};
    use crate::Field;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    /// 2x2x2x2 fixture given through its mode-1 unfolding.
    fn fixture() -> Tensor<c64> {
        let unfolded = Matrix::from_row_slice(
            2,
            8,
            &[
                c(1., 0.), c(-1., 0.), c(0., 0.), c(1., 0.), c(3., 0.), c(0., 1.), c(0., 0.), c(1., 0.),
                c(0., 0.), c(1., 0.), c(0., -1.), c(1., 0.), c(1., 0.), c(0., 0.), c(2., 0.), c(0., -2.),
            ],
        );
        Tensor::fold(&unfolded, 0, &[2, 2, 2, 2]).unwrap()
    }

    #[test]
    fn mode1_unfolding_of_fixture_is_the_buffer() {
        let t = fixture();
        let m = t.unfold(0).unwrap();
        assert_eq!(m[(0, 5)], c(0., 1.));
        assert_eq!(m[(1, 7)], c(0., -2.));
        assert_eq!(m.as_slice(), t.data());
    }

    #[test]
    fn unfolding_matches_index_arithmetic() {
        // Oracle: enumerate all entries and place them by the Kolda column formula.
        let t = fixture();
        for mode in 0..4 {
            let m = t.unfold(mode).unwrap();
            let shape = t.shape().to_vec();
            let mut idx = vec![0; 4];
            for _ in 0..t.len() {
                let mut col = 0;
                let mut stride = 1;
                for (j, (&i, &n)) in idx.iter().zip(&shape).enumerate() {
                    if j != mode {
                        col += i * stride;
                        stride *= n;
                    }
                }
                assert_eq!(m[(idx[mode], col)], t.get(&idx));
                increment(&mut idx, &shape);
            }
        }
    }

    #[test]
    fn zero_tensor_unfolds_to_zero_matrix() {
        let t = Tensor::<f64>::zeros(&[2, 3, 4]).unwrap();
        let m = t.unfold(0).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (2, 12));
        assert!(m.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mode_out_of_range_is_rejected() {
        let t = Tensor::<f64>::zeros(&[2, 2]).unwrap();
        assert!(matches!(t.unfold(2), Err(Error::ModeOutOfRange { .. })));
        let m = Matrix::<f64>::zeros(3, 2);
        assert!(Tensor::fold(&m, 0, &[2, 3]).is_err());
    }

    #[test]
    fn degenerate_vector_fold() {
        let m = Matrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let t = Tensor::fold(&m, 0, &[2]).unwrap();
        assert_eq!(t.shape(), &[2]);
        assert_eq!(t.data(), &[1.0, 2.0]);
    }

    #[test]
    fn inner_products() {
        let ones = Tensor::from_fn(&[2, 2, 2], |_| 1.0).unwrap();
        assert_eq!(ones.inner(&ones).unwrap(), 8.0);
        let zero = Tensor::zeros(&[2, 2, 2]).unwrap();
        assert_eq!(ones.inner(&zero).unwrap(), 0.0);
        assert!(ones.inner(&Tensor::zeros(&[2, 4]).unwrap()).is_err());

        let mut rng = rng_from_seed(11);
        let a: Tensor<c64> = random_tensor(&[2, 2, 2], Distribution::Uniform, &mut rng).unwrap();
        let b: Tensor<c64> = random_tensor(&[2, 2, 2], Distribution::Uniform, &mut rng).unwrap();
        let mut direct = c64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    direct += a.get(&[i, j, k]) * b.get(&[i, j, k]).conj();
                }
            }
        }
        assert!((a.inner(&b).unwrap() - direct).norm() < 1e-14);
        let nn = a.inner(&a).unwrap().re;
        assert!((a.norm().powi(2) - nn).abs() <= 1e-12 * nn);
    }

    #[test]
    fn angles() {
        let a = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let b = Tensor::new(vec![2, 2], vec![0.0, 0.0, 0.0, 3.0]).unwrap();
        assert!((a.angle(&b).unwrap().radians() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(a.angle(&a.scale(-2.0)).unwrap().radians(), 0.0);
        assert!(matches!(
            a.angle(&Tensor::zeros(&[2, 2]).unwrap()),
            Err(Error::ZeroNorm(_))
        ));
    }

    #[test]
    fn angle_matches_compensated_recomputation() {
        // Oracle: Kahan-compensated sums of real and imaginary parts.
        let mut rng = rng_from_seed(5);
        let a: Tensor<c64> = random_tensor(&[3, 4, 5], Distribution::Uniform, &mut rng).unwrap();
        let b: Tensor<c64> = random_tensor(&[3, 4, 5], Distribution::Uniform, &mut rng).unwrap();
        fn ksum(xs: impl Iterator<Item = f64>) -> f64 {
            let (mut s, mut comp) = (0.0f64, 0.0f64);
            for x in xs {
                let y = x - comp;
                let t = s + y;
                comp = (t - s) - y;
                s = t;
            }
            s
        }
        let pairs: Vec<(c64, c64)> = a.data().iter().copied().zip(b.data().iter().copied()).collect();
        let re = ksum(pairs.iter().map(|(x, y)| (x * y.conj()).re));
        let im = ksum(pairs.iter().map(|(x, y)| (x * y.conj()).im));
        let na = ksum(a.data().iter().map(|x| x.norm_sqr())).sqrt();
        let nb = ksum(b.data().iter().map(|x| x.norm_sqr())).sqrt();
        let expected = ((re * re + im * im).sqrt() / (na * nb)).acos();
        assert!((a.angle(&b).unwrap().radians() - expected).abs() < 1e-13);
    }

    #[test]
    fn outer_of_basis_vectors() {
        let e1 = Vector::from_column_slice(&[1.0, 0.0]);
        let t = Tensor::outer(&[e1.clone(), e1.clone(), e1]).unwrap();
        assert_eq!(t.get(&[0, 0, 0]), 1.0);
        assert_eq!(t.norm(), 1.0);
    }

    #[test]
    fn permute_moves_indices() {
        let t = fixture().permute(&[0, 2, 1, 3]).unwrap().permute(&[3, 1, 2, 0]).unwrap();
        let f = fixture();
        assert_eq!(t.get(&[1, 0, 1, 0]), f.get(&[0, 1, 0, 1]));
        assert_eq!(t.get(&[0, 1, 1, 1]), f.get(&[1, 1, 1, 0]));
        assert!(f.permute(&[0, 0, 1, 2]).is_err());
        assert!(f.permute(&[0, 1, 2]).is_err());
    }

    #[test]
    fn field_tag_follows_scalar_type() {
        assert_eq!(<f64 as Scalar>::FIELD, Field::Real);
        assert_eq!(<c64 as Scalar>::FIELD, Field::Complex);
    }

    proptest! {
        #[test]
        fn fold_inverts_unfold(seed in any::<u64>(), dims in proptest::collection::vec(1usize..5, 1..5)) {
            let mut rng = rng_from_seed(seed);
            let t: Tensor<c64> = random_tensor(&dims, Distribution::Uniform, &mut rng).unwrap();
            for mode in 0..dims.len() {
                let back = Tensor::fold(&t.unfold(mode).unwrap(), mode, &dims).unwrap();
                prop_assert_eq!(&back, &t);
            }
        }

        #[test]
        fn norm_splits_over_unfolding_columns(seed in any::<u64>(), mode in 0usize..3) {
            let mut rng = rng_from_seed(seed);
            let t: Tensor<f64> = random_tensor(&[3, 4, 2], Distribution::Normal, &mut rng).unwrap();
            let m = t.unfold(mode).unwrap();
            let by_cols: f64 = m.column_iter().map(|c| c.norm_squared()).sum();
            prop_assert!((by_cols - t.norm_squared()).abs() <= 1e-12 * t.norm_squared());
        }

        #[test]
        fn inner_of_outer_products_factorises(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let unit = |rng: &mut _, n| {
                let v: Tensor<c64> = random_tensor(&[n], Distribution::Normal, rng).unwrap();
                Vector::from_column_slice(v.data()).normalize()
            };
            let us: Vec<Vector<c64>> = [2, 3, 4].iter().map(|&n| unit(&mut rng, n)).collect();
            let vs: Vec<Vector<c64>> = [2, 3, 4].iter().map(|&n| unit(&mut rng, n)).collect();
            let lhs = Tensor::outer(&us).unwrap().inner(&Tensor::outer(&vs).unwrap()).unwrap();
            let rhs = us.iter().zip(&vs).fold(c64::new(1.0, 0.0), |acc, (u, v)| acc * v.dotc(u));
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1e-300) + 1e-15);
        }

        #[test]
        fn angle_is_symmetric_and_scale_invariant(seed in any::<u64>(), re in -3.0f64..3.0, im in 0.1f64..3.0) {
            let mut rng = rng_from_seed(seed);
            let a: Tensor<c64> = random_tensor(&[2, 3, 2], Distribution::Uniform, &mut rng).unwrap();
            let b: Tensor<c64> = random_tensor(&[2, 3, 2], Distribution::Uniform, &mut rng).unwrap();
            let g = a.angle(&b).unwrap().radians();
            prop_assert!((g - b.angle(&a).unwrap().radians()).abs() < 1e-12);
            let s = c64::new(re, im);
            prop_assert!((g - a.scale(s).angle(&b).unwrap().radians()).abs() < 1e-7);
        }
    }
}
