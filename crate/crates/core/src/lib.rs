//! Dense tensor toolkit for canonical polyadic (CP) decomposition.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`], [`products`], [`random`], [`io`]: dense N-way arrays over
//!   real or complex scalars, unfoldings, multilinear products, seeded
//!   generation and the plain-text tensor format.
//! * [`linalg`]: dominant singular triplets, SVD, pseudo-inverse, dominant
//!   Hermitian eigenpairs and the nearest-Kronecker-product decomposition.
//! * [`rank1`]: rank-1 approximation operators (THOSVD, SeROAP, the
//!   coupled-eigenvalue refinement and a multi-restart reference oracle).
//! * [`cpd`]: full CP solvers (ALS, nonlinear CG with exact line search) and
//!   the deflation driver `dcpd`.
//! * [`diagnostics`]: angle tables and contraction checks on deflation traces,
//!   plus Monte-Carlo estimation of the residual-chain probability.
//!
//! Element layout everywhere is first-index-fastest, so the mode-1 unfolding
//! of a tensor is a reinterpretation of its buffer.

pub mod cpd;
pub mod diagnostics;
mod error;
pub mod io;
pub mod linalg;
mod model;
pub mod products;
pub mod random;
pub mod rank1;
mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use model::CPModel;
pub use scalar::{c64, Field, Scalar};
pub use tensor::{Angle, Tensor};

/// Column-major dense matrix used throughout the crate.
pub type Matrix<S> = nalgebra::DMatrix<S>;
/// Dense column vector.
pub type Vector<S> = nalgebra::DVector<S>;
