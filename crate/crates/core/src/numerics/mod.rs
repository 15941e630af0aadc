//! Dense kernels, the seeded random stream and the finite-difference oracle.

mod gradcheck;
mod linalg;
mod rng;

pub use gradcheck::finite_diff_grad;
pub use linalg::{
    ensure_finite, median, pairwise_sq_distances, solve_dd, symmetric_eigen, upper_triangle,
    SINGULAR_PIVOT,
};
pub use rng::RandomStream;

/// Row-major dense matrix of reals.
pub type Matrix = ndarray::Array2<f64>;
/// Dense column vector of reals.
pub type Vector = ndarray::Array1<f64>;
