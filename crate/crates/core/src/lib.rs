// NaN-rejecting guards are written as negated comparisons; index loops
// mirror the quadrature formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod fakestat;
pub mod grid;
pub mod harness;
pub mod hawkes;
pub mod kernels;
pub mod mc;
pub mod quad;
pub mod rescale;
pub mod rng;
pub mod specfn;
pub mod stats;
pub mod volterra;
