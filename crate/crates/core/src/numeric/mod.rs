//! Small numerical kernels: adaptive quadrature, scalar and 2-D optimizers,
//! bracketed root finding.

mod optim;
mod quad;

pub use optim::{
    find_root, maximize_nelder_mead, maximize_scalar, NelderMeadOptions, PlaneOptimum,
    ScalarOptimum,
};
pub use quad::integrate;
