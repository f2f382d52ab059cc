//! Matrix kernels: dominant singular triplets and eigenpairs by power
//! iteration, dense SVD / pseudo-inverse, and the nearest-Kronecker-product
//! decomposition of Hermitian matrices.

use crate::{c64, Error, Field, Matrix, Result, Scalar, Vector};

pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SingularTriplet<S> {
    pub u: Vector<S>,
    pub sigma: f64,
    pub v: Vector<S>,
    /// False when the iteration budget ran out; `u`, `v` are then the best
    /// iterate and callers decide whether to refine.
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct EigPair<S> {
    pub lambda: f64,
    pub x: Vector<S>,
    /// Whether power iteration met the tolerance. When it did not, the pair
    /// comes from a dense eigensolve instead.
    pub converged: bool,
    pub iterations: usize,
}

/// Thin SVD `M = U diag(s) V^H` with nonincreasing singular values.
#[derive(Clone, Debug)]
pub struct Svd<S> {
    pub u: Matrix<S>,
    pub singular_values: Vec<f64>,
    pub v: Matrix<S>,
}

/// Deterministic start vector: all ones plus a fixed aperiodic perturbation,
/// normalised.
fn start_vector<S: Scalar>(n: usize) -> Vector<S> {
    let v = Vector::from_fn(n, |j, _| S::from_real(1.0 + 0.5 * ((j + 1) as f64 * 0.618_033_988_7).sin()));
    v.normalize()
}

/// Rotates `v` so its largest-modulus component is real and positive and
/// returns the unit factor that was applied.
pub fn normalize_phase<S: Scalar>(v: &mut Vector<S>) -> S {
    let Some(big) = v
        .iter()
        .copied()
        .max_by(|a, b| a.modulus().total_cmp(&b.modulus()))
    else {
        return S::one();
    };
    let m = big.modulus();
    if m == 0.0 {
        return S::one();
    }
    let phase = big.conjugate() / S::from_real(m);
    *v *= phase;
    phase
}

/// Power iteration on a Hermitian positive semidefinite matrix. Returns the
/// iterate, its Rayleigh quotient, whether `|Ax - lambda x| <= tol * scale`
/// was met, and the number of iterations.
fn psd_power<S: Scalar>(
    a: &Matrix<S>,
    mut x: Vector<S>,
    max_iter: usize,
    tol: f64,
    scale: f64,
) -> (Vector<S>, f64, bool, usize) {
    let mut lambda = 0.0;
    for it in 1..=max_iter {
        let y = a * &x;
        lambda = x.dotc(&y).real();
        let resid = (&y - &x * S::from_real(lambda)).norm();
        if resid <= tol * scale {
            return (x, lambda, true, it);
        }
        let ny = y.norm();
        if ny == 0.0 {
            return (x, 0.0, false, it);
        }
        x = y / S::from_real(ny);
    }
    (x, lambda, false, max_iter)
}

/// Dominant singular triplet by power iteration on the smaller Gram matrix.
pub fn dominant_triplet<S: Scalar>(
    m: &Matrix<S>,
    max_iter: usize,
    tol: f64,
) -> Result<SingularTriplet<S>> {
    if m.iter().all(|z| z.is_zero()) {
        return Err(Error::ZeroNorm("matrix"));
    }
    let wide = m.nrows() <= m.ncols();
    let gram = if wide { m * m.adjoint() } else { m.adjoint() * m };
    let n = gram.nrows();
    let mut start = start_vector::<S>(n);
    if (&gram * &start).norm() == 0.0 {
        // Start lies in the null space; use the column of largest diagonal.
        let j = (0..n)
            .max_by(|&a, &b| gram[(a, a)].real().total_cmp(&gram[(b, b)].real()))
            .unwrap_or(0);
        start = Vector::from_fn(n, |i, _| if i == j { S::one() } else { S::zero() });
    }
    let scale = gram.diagonal().iter().map(|z| z.real()).sum::<f64>();
    let (x, _, converged, iterations) = psd_power(&gram, start, max_iter, tol, scale);
    let (mut u, mut v, sigma) = if wide {
        let w = m.adjoint() * &x;
        let s = w.norm();
        (x, w / S::from_real(s), s)
    } else {
        let w = m * &x;
        let s = w.norm();
        (w / S::from_real(s), x, s)
    };
    let phase = normalize_phase(&mut u);
    v *= phase;
    Ok(SingularTriplet {
        u,
        sigma,
        v,
        converged,
        iterations,
    })
}

/// Dominant triplet taken from the dense SVD, with the same phase convention
/// as [`dominant_triplet`].
pub fn dense_dominant_triplet<S: Scalar>(m: &Matrix<S>) -> Result<SingularTriplet<S>> {
    if m.iter().all(|z| z.is_zero()) {
        return Err(Error::ZeroNorm("matrix"));
    }
    let svd = full_svd(m);
    let mut u = svd.u.column(0).into_owned();
    let mut v = svd.v.column(0).into_owned();
    let phase = normalize_phase(&mut u);
    v *= phase;
    Ok(SingularTriplet {
        u,
        sigma: svd.singular_values[0],
        v,
        converged: true,
        iterations: 0,
    })
}

/// Power iteration first, dense SVD when the iteration budget runs out.
pub fn dominant_triplet_or_dense<S: Scalar>(m: &Matrix<S>) -> Result<SingularTriplet<S>> {
    let t = dominant_triplet(m, DEFAULT_MAX_ITER, DEFAULT_TOL)?;
    if t.converged {
        Ok(t)
    } else {
        dense_dominant_triplet(m)
    }
}

/// Thin SVD with singular values in non-increasing order.
pub fn full_svd<S: Scalar>(m: &Matrix<S>) -> Svd<S> {
    let (u, s, v) = match S::FIELD {
        Field::Real => faer_svd(m, |z| z.to_c64().re, S::from_real, |x| x),
        Field::Complex => faer_svd(m, S::to_c64, S::from_c64, |z: c64| z.re),
    };
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    Svd {
        u: Matrix::from_columns(&order.iter().map(|&i| u.column(i)).collect::<Vec<_>>()),
        singular_values: order.iter().map(|&i| s[i]).collect(),
        v: Matrix::from_columns(&order.iter().map(|&i| v.column(i)).collect::<Vec<_>>()),
    }
}

fn to_faer<S: Scalar, T: faer::traits::ComplexField>(m: &Matrix<S>, into: impl Fn(S) -> T) -> faer::Mat<T> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| into(m[(i, j)]))
}

fn from_faer<S: Scalar, T: Copy>(m: faer::MatRef<'_, T>, from: impl Fn(T) -> S) -> Matrix<S> {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| from(m[(i, j)]))
}

fn faer_svd<S: Scalar, T: faer::traits::ComplexField + Copy>(
    m: &Matrix<S>,
    into: impl Fn(S) -> T,
    from: impl Fn(T) -> S,
    real: impl Fn(T) -> f64,
) -> (Matrix<S>, Vec<f64>, Matrix<S>) {
    let svd = to_faer(m, into).thin_svd().expect("SVD did not converge");
    let s = svd.S().column_vector();
    let values = (0..s.nrows()).map(|k| real(s[k])).collect();
    (from_faer(svd.U(), &from), values, from_faer(svd.V(), &from))
}

fn faer_eigh<S: Scalar, T: faer::traits::ComplexField + Copy>(
    h: &Matrix<S>,
    into: impl Fn(S) -> T,
    from: impl Fn(T) -> S,
    real: impl Fn(T) -> f64,
) -> (Vec<f64>, Matrix<S>) {
    let eig = to_faer(h, into)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver did not converge");
    let s = eig.S().column_vector();
    ((0..s.nrows()).map(|k| real(s[k])).collect(), from_faer(eig.U(), from))
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen<S: Scalar>(h: &Matrix<S>) -> (Vec<f64>, Matrix<S>) {
    let sym = (h + h.adjoint()) * S::from_real(0.5);
    match S::FIELD {
        Field::Real => faer_eigh(&sym, |z| z.to_c64().re, S::from_real, |x| x),
        Field::Complex => faer_eigh(&sym, S::to_c64, S::from_c64, |z: c64| z.re),
    }
}

/// Moore-Penrose pseudo-inverse, dropping singular values at or below
/// `rank_tol * sigma_1`.
pub fn pinv<S: Scalar>(m: &Matrix<S>, rank_tol: f64) -> Matrix<S> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Matrix::zeros(cols, rows);
    }
    let svd = full_svd(m);
    let s1 = svd.singular_values[0];
    let mut out = Matrix::zeros(cols, rows);
    if s1 == 0.0 {
        return out;
    }
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > rank_tol * s1 {
            let vk = svd.v.column(k);
            let uk = svd.u.column(k);
            out += (vk * uk.adjoint()) * S::from_real(1.0 / s);
        }
    }
    out
}

fn hermitian_deviation<S: Scalar>(h: &Matrix<S>) -> f64 {
    (h - h.adjoint()).norm()
}

fn check_hermitian<S: Scalar>(h: &Matrix<S>) -> Result<()> {
    if !h.is_square() {
        return Err(Error::shape(format!(
            "expected a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let dev = hermitian_deviation(h);
    if dev > 1e-10 * h.norm().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// Eigenpair of the largest (signed) eigenvalue of a Hermitian matrix.
pub fn hermitian_eig_max<S: Scalar>(h: &Matrix<S>, max_iter: usize, tol: f64) -> Result<EigPair<S>> {
    hermitian_eig_max_from(h, None, max_iter, tol)
}

/// As [`hermitian_eig_max`], warm-started from `start` when given.
///
/// Power iteration runs on `H + cI` with `c` a Gershgorin bound that makes
/// the shifted matrix positive semidefinite; from a warm start the Rayleigh
/// quotient never decreases.
pub fn hermitian_eig_max_from<S: Scalar>(
    h: &Matrix<S>,
    start: Option<&Vector<S>>,
    max_iter: usize,
    tol: f64,
) -> Result<EigPair<S>> {
    check_hermitian(h)?;
    let n = h.nrows();
    let mut x0 = match start {
        Some(s) if s.len() == n && s.norm() > 0.0 => s.normalize(),
        Some(s) if s.len() != n => {
            return Err(Error::shape(format!(
                "start vector of length {} for a {n}x{n} matrix",
                s.len()
            )))
        }
        _ => start_vector(n),
    };
    let scale = h.norm();
    if scale == 0.0 {
        normalize_phase(&mut x0);
        return Ok(EigPair {
            lambda: 0.0,
            x: x0,
            converged: true,
            iterations: 0,
        });
    }
    let shift = (0..n)
        .map(|i| {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| h[(i, j)].modulus()).sum();
            off - h[(i, i)].real()
        })
        .fold(0.0f64, f64::max);
    let mut shifted = h.clone();
    for i in 0..n {
        shifted[(i, i)] += S::from_real(shift);
    }
    let (mut x, _, converged, iterations) = psd_power(&shifted, x0, max_iter, tol, scale);
    if !converged {
        let dense = dense_eig_max(h);
        return Ok(EigPair {
            iterations,
            converged: false,
            ..dense
        });
    }
    normalize_phase(&mut x);
    let lambda = x.dotc(&(h * &x)).real();
    Ok(EigPair {
        lambda,
        x,
        converged,
        iterations,
    })
}

/// Largest eigenpair from a dense Hermitian eigendecomposition.
pub fn dense_eig_max<S: Scalar>(h: &Matrix<S>) -> EigPair<S> {
    let (values, vectors) = hermitian_eigen(h);
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Ties within rounding resolve to the first eigenvector.
    let k = values
        .iter()
        .position(|&v| v >= top - 1e-14 * top.abs())
        .expect("nonempty spectrum");
    let mut x = vectors.column(k).into_owned();
    normalize_phase(&mut x);
    EigPair {
        lambda: values[k],
        x,
        converged: true,
        iterations: 0,
    }
}

/// `M ≈ Σ_r kron(Q_r, P_r)` with Hermitian `P_r` (`I1 x I1`, acting on the
/// fast index) and `Q_r` (`I2 x I2`).
#[derive(Clone, Debug)]
pub struct KroneckerSum {
    pub p: Vec<Matrix<c64>>,
    pub q: Vec<Matrix<c64>>,
    /// Singular values of the rearranged matrix for the retained terms.
    pub singular_values: Vec<f64>,
    pub dim_p: usize,
    pub dim_q: usize,
}

impl KroneckerSum {
    /// Kronecker rank `R'` (number of retained terms).
    pub fn rank(&self) -> usize {
        self.p.len()
    }

    pub fn reconstruct(&self) -> Matrix<c64> {
        let n = self.dim_p * self.dim_q;
        let mut m = Matrix::zeros(n, n);
        for (p, q) in self.p.iter().zip(&self.q) {
            m += crate::products::kronecker(q, p);
        }
        m
    }

    /// `Σ_r (y^H Q_r* y) P_r`: the matrix whose top eigenvector updates `x`.
    pub fn contract_q(&self, y: &Vector<c64>) -> Matrix<c64> {
        let mut g = Matrix::zeros(self.dim_p, self.dim_p);
        for (p, q) in self.p.iter().zip(&self.q) {
            let w = y.dotc(&(q.map(|z| z.conj()) * y)).re;
            g += p * c64::new(w, 0.0);
        }
        g
    }

    /// `Σ_r (x^H P_r x) Q_r*`: the matrix whose top eigenvector updates `y`.
    pub fn contract_p(&self, x: &Vector<c64>) -> Matrix<c64> {
        let mut g = Matrix::zeros(self.dim_q, self.dim_q);
        for (p, q) in self.p.iter().zip(&self.q) {
            let w = x.dotc(&(p * x)).re;
            g += q.map(|z| z.conj()) * c64::new(w, 0.0);
        }
        g
    }

    /// `Σ_r (y^H Q_r* y)(x^H P_r x)`, equal to `z^H M z` for `z = conj(y) ⊗ x`.
    pub fn quadratic_form(&self, x: &Vector<c64>, y: &Vector<c64>) -> f64 {
        x.dotc(&(self.contract_q(y) * x)).re
    }
}

/// Van Loan rearrangement: the `I2^2 x I1^2` matrix with
/// `R[k + l*I2, m + n*I1] = M[m + k*I1, n + l*I1]`, so that
/// `kron(Q, P)` maps to `vec(Q) vec(P)^T`.
pub fn rearrange<S: Scalar>(m: &Matrix<S>, dim_p: usize, dim_q: usize) -> Result<Matrix<S>> {
    let n = dim_p * dim_q;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::shape(format!(
            "{}x{} matrix does not factor as ({dim_p}*{dim_q})^2",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut r = Matrix::zeros(dim_q * dim_q, dim_p * dim_p);
    for l in 0..dim_q {
        for k in 0..dim_q {
            for nn in 0..dim_p {
                for mm in 0..dim_p {
                    r[(k + l * dim_q, mm + nn * dim_p)] = m[(mm + k * dim_p, nn + l * dim_p)];
                }
            }
        }
    }
    Ok(r)
}

/// Orthonormal basis (Frobenius inner product) of the real vector space of
/// `n x n` Hermitian matrices, as the columns `vec(B_a)` of an `n^2 x n^2`
/// unitary matrix.
fn hermitian_basis(n: usize) -> Matrix<c64> {
    let mut w = Matrix::zeros(n * n, n * n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = 0;
    for j in 0..n {
        w[(j + j * n, a)] = c64::new(1.0, 0.0);
        a += 1;
    }
    for j in 0..n {
        for k in j + 1..n {
            w[(j + k * n, a)] = c64::new(s, 0.0);
            w[(k + j * n, a)] = c64::new(s, 0.0);
            a += 1;
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            w[(j + k * n, a)] = c64::new(0.0, s);
            w[(k + j * n, a)] = c64::new(0.0, -s);
            a += 1;
        }
    }
    w
}

fn hermitize(m: &Matrix<c64>, term: usize) -> Result<Matrix<c64>> {
    let h = (m + m.adjoint()) * c64::new(0.5, 0.0);
    let base = m.norm();
    let change = if base > 0.0 { (&h - m).norm() / base } else { 0.0 };
    if change > 1e-6 {
        return Err(Error::NkpHermitization { term, change });
    }
    Ok(h)
}

/// Decomposes a Hermitian `(I1 I2) x (I1 I2)` matrix as a sum of Kronecker
/// products of Hermitian factors.
///
/// The rearranged matrix is expressed in orthonormal Hermitian bases on both
/// sides, which turns it into a real matrix `C` with the same singular
/// values; the SVD of `C` then yields exactly Hermitian factors. Terms are
/// kept until the discarded tail satisfies
/// `sqrt(Σ_dropped σ²) <= tol * |M|_F`, so the reconstruction error is at
/// most `tol * |M|_F`.
pub fn nkp_decompose<S: Scalar>(
    m: &Matrix<S>,
    dim_p: usize,
    dim_q: usize,
    tol: f64,
) -> Result<KroneckerSum> {
    let mc = m.map(|z| z.to_c64());
    check_hermitian(&mc)?;
    let r = rearrange(&mc, dim_p, dim_q)?;
    let wq = hermitian_basis(dim_q);
    let wp = hermitian_basis(dim_p);
    let coords = wq.adjoint() * &r * wp.map(|z| z.conj());
    let imag = coords.map(|z| z.im).norm();
    let real = coords.map(|z| z.re);
    if imag > 1e-8 * real.norm().max(1e-300) {
        return Err(Error::NotHermitian { deviation: imag });
    }
    let total = mc.norm();
    let svd = full_svd(&real);
    let s = &svd.singular_values;
    let mut keep = s.len();
    let mut tail = 0.0;
    while keep > 0 {
        let next = tail + s[keep - 1] * s[keep - 1];
        if next.sqrt() > tol * total {
            break;
        }
        tail = next;
        keep -= 1;
    }
    let mut p = Vec::with_capacity(keep);
    let mut q = Vec::with_capacity(keep);
    for (k, &sk) in s.iter().enumerate().take(keep) {
        let qv = &wq * svd.u.column(k).map(|x| c64::new(x * sk, 0.0));
        let pv = &wp * svd.v.column(k).map(|x| c64::new(x, 0.0));
        q.push(hermitize(
            &Matrix::from_column_slice(dim_q, dim_q, qv.as_slice()),
            k,
        )?);
        p.push(hermitize(
            &Matrix::from_column_slice(dim_p, dim_p, pv.as_slice()),
            k,
        )?);
    }
    Ok(KroneckerSum {
        p,
        q,
        singular_values: s[..keep].to_vec(),
        dim_p,
        dim_q,
    })
}
