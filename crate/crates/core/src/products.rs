//! Column stacking and the Kronecker family of matrix products.

use crate::{Error, Matrix, Result, Scalar, Vector};

/// Stacks the columns of `m` into one vector.
pub fn vec<S: Scalar>(m: &Matrix<S>) -> Vector<S> {
    Vector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`]: reads `v` column by column into a `rows x cols` matrix.
pub fn unvec<S: Scalar>(v: &Vector<S>, rows: usize, cols: usize) -> Result<Matrix<S>> {
    if rows * cols != v.len() {
        return Err(Error::shape(format!(
            "cannot reshape a vector of length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(Matrix::from_column_slice(rows, cols, v.as_slice()))
}

pub fn kronecker<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = Matrix::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            for q in 0..bc {
                for p in 0..br {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Column-wise Kronecker product: column `r` is `kron(a[:, r], b[:, r])`.
pub fn khatri_rao<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    if a.ncols() != b.ncols() {
        return Err(Error::shape(format!(
            "Khatri-Rao needs equal column counts ({} vs {})",
            a.ncols(),
            b.ncols()
        )));
    }
    let (ar, br) = (a.nrows(), b.nrows());
    let mut out = Matrix::zeros(ar * br, a.ncols());
    for r in 0..a.ncols() {
        for i in 0..ar {
            let s = a[(i, r)];
            for p in 0..br {
                out[(i * br + p, r)] = s * b[(p, r)];
            }
        }
    }
    Ok(out)
}

pub fn hadamard<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!(
            "Hadamard product of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.component_mul(b))
}

/// `A(N) ⊙ ... ⊙ A(n+1) ⊙ A(n-1) ⊙ ... ⊙ A(1)`: the Khatri-Rao product of
/// every factor except `skip`, highest mode first. Its transpose multiplies
/// the factor of mode `skip` in the mode-`skip` unfolding of a CP model.
pub fn khatri_rao_except<S: Scalar>(factors: &[Matrix<S>], skip: usize) -> Result<Matrix<S>> {
    let mut iter = factors
        .iter()
        .enumerate()
        .rev()
        .filter(|&(n, _)| n != skip)
        .map(|(_, f)| f);
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidArgument("need at least two factors".into()))?;
    iter.try_fold(first.clone(), |acc, f| khatri_rao(&acc, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vec_stacks_columns() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(vec(&m).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(unvec(&vec(&m), 3, 1).is_err());
        assert_eq!(unvec(&vec(&m), 2, 2).unwrap(), m);
    }

    #[test]
    fn kronecker_of_identities() {
        let i2 = Matrix::<f64>::identity(2, 2);
        assert_eq!(kronecker(&i2, &i2), Matrix::identity(4, 4));
    }

    #[test]
    fn khatri_rao_of_single_columns_is_kronecker() {
        let a = Matrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let b = Matrix::from_column_slice(2, 1, &[3.0, 5.0]);
        let kr = khatri_rao(&a, &b).unwrap();
        assert_eq!(kr, kronecker(&a, &b));
        assert_eq!(kr.as_slice(), &[3.0, 5.0, 6.0, 10.0]);
        assert!(khatri_rao(&a, &Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn hadamard_with_ones() {
        let a = Matrix::from_row_slice(2, 3, &[1.0, -2.0, 3.0, 4.0, 5.0, -6.0]);
        assert_eq!(hadamard(&a, &Matrix::from_element(2, 3, 1.0)).unwrap(), a);
        assert!(hadamard(&a, &Matrix::zeros(3, 2)).is_err());
    }

    proptest! {
        #[test]
        fn vec_of_outer_product_is_kronecker(a in proptest::collection::vec(-5.0f64..5.0, 1..5),
                                             b in proptest::collection::vec(-5.0f64..5.0, 1..5)) {
            let av = Matrix::from_column_slice(a.len(), 1, &a);
            let bv = Matrix::from_column_slice(b.len(), 1, &b);
            let outer = &av * bv.transpose();
            let lhs = vec(&outer);
            let rhs = kronecker(&bv, &av);
            prop_assert_eq!(lhs.as_slice(), rhs.as_slice());
        }

        #[test]
        fn unvec_inverts_vec(data in proptest::collection::vec(-5.0f64..5.0, 15)) {
            let m = Matrix::from_column_slice(3, 5, &data);
            prop_assert_eq!(unvec(&vec(&m), 3, 5).unwrap(), m);
        }
    }
}
