use crate::linalg::dominant_triplet_or_dense;
use crate::products::{kronecker, unvec, vec};
use crate::rank1::Rank1Term;
use crate::{Error, Matrix, Result, Scalar, Tensor, Vector};

/// Intermediate quantities of one SeROAP run, indexed as in the algorithm
/// listing (`right_vectors[0]` is `v1`, `reshaped[0]` is `V1`, ...).
#[derive(Clone, Debug)]
pub struct SeroapTrace<S> {
    pub right_vectors: Vec<Vector<S>>,
    pub reshaped: Vec<Matrix<S>>,
    /// Dominant left / right singular vectors of the last reshaped matrix.
    pub u: Vector<S>,
    pub v: Vector<S>,
    /// `conj(v) ⊗ u`, the vectorised rank-1 matrix at the bottom.
    pub w: Vector<S>,
    /// Projected unfoldings `X(N-2), ..., X(1)` in the order computed.
    pub projections: Vec<Matrix<S>>,
    /// Mode-1 unfolding of the output.
    pub unfolding: Matrix<S>,
}

pub fn seroap<S: Scalar>(t: &Tensor<S>) -> Result<Rank1Term<S>> {
    Ok(seroap_traced(t, false)?.0)
}

/// Sequential rank-1 approximation and projection.
///
/// Descends through dominant right singular vectors of successively reshaped
/// matrices, then ascends by projecting the rows of each reshaped matrix onto
/// the current rank-1 vector. Order-2 inputs reduce to the dominant singular
/// triplet. With `presort` the modes are processed in nonincreasing order of
/// extent; the trace then refers to the permuted tensor.
pub fn seroap_traced<S: Scalar>(t: &Tensor<S>, presort: bool) -> Result<(Rank1Term<S>, SeroapTrace<S>)> {
    if t.order() < 2 {
        return Err(Error::InvalidArgument("SeROAP needs a tensor of order >= 2".into()));
    }
    if t.norm() == 0.0 {
        return Err(Error::ZeroNorm("tensor"));
    }
    if presort {
        let mut perm: Vec<usize> = (0..t.order()).collect();
        perm.sort_by(|&a, &b| t.shape()[b].cmp(&t.shape()[a]));
        let (term, trace) = run(&t.permute(&perm)?)?;
        let mut factors = vec![Vector::zeros(0); t.order()];
        for (k, f) in perm.iter().zip(term.factors) {
            factors[*k] = f;
        }
        return Ok((
            Rank1Term {
                lambda: term.lambda,
                factors,
            },
            trace,
        ));
    }
    run(t)
}

fn run<S: Scalar>(t: &Tensor<S>) -> Result<(Rank1Term<S>, SeroapTrace<S>)> {
    let shape = t.shape();
    let order = shape.len();
    let mut levels = vec![t.unfold(0)?];
    let mut right_vectors = Vec::with_capacity(order - 2);
    for n in 1..order - 1 {
        let v = dominant_triplet_or_dense(&levels[n - 1])?.v;
        let rows = shape[n];
        levels.push(unvec(&v, rows, v.len() / rows)?);
        right_vectors.push(v);
    }
    let bottom = dominant_triplet_or_dense(&levels[order - 2])?;
    let (u, v) = (bottom.u.clone(), bottom.v.clone());
    let as_col = |x: &Vector<S>| Matrix::from_column_slice(x.len(), 1, x.as_slice());
    let w0 = kronecker(&as_col(&v.map(|z| z.conjugate())), &as_col(&u)).column(0).into_owned();

    if order == 2 {
        let sigma = S::from_real(bottom.sigma);
        let unfolding = (&u * v.adjoint()) * sigma;
        let term = Rank1Term {
            lambda: sigma,
            factors: vec![u.clone(), v.map(|z| z.conjugate())],
        };
        let trace = SeroapTrace {
            right_vectors,
            reshaped: Vec::new(),
            u,
            v,
            w: w0,
            projections: Vec::new(),
            unfolding,
        };
        return Ok((term, trace));
    }

    let mut w = w0.clone();
    let mut heads = vec![Vector::zeros(0); order - 2];
    let mut projections = Vec::with_capacity(order - 2);
    for n in (0..order - 2).rev() {
        let a = &levels[n] * &w;
        let x = &a * w.adjoint();
        w = vec(&x);
        heads[n] = a;
        projections.push(x);
    }
    // The output is a_1 o conj(a_2 o conj(a_3 o ... conj(u o conj(v)))), so
    // the factor of mode m carries m conjugations.
    let conj_times = |x: Vector<S>, m: usize| if m % 2 == 1 { x.map(|z| z.conjugate()) } else { x };
    let mut factors: Vec<Vector<S>> = heads.into_iter().enumerate().map(|(m, a)| conj_times(a, m)).collect();
    factors.push(conj_times(u.clone(), order - 2));
    factors.push(conj_times(v.map(|z| z.conjugate()), order - 2));
    let term = Rank1Term::from_vectors(S::one(), factors)?;
    let unfolding = projections.last().expect("order >= 3").clone();
    levels.remove(0);
    let trace = SeroapTrace {
        right_vectors,
        reshaped: levels,
        u,
        v,
        w: w0,
        projections,
        unfolding,
    };
    Ok((term, trace))
}
