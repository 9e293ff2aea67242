//! Natively two-dimensional selective state-space modelling.
//!
//! The crate is organised around a 2D recurrence whose hidden state at (i, j)
//! averages per-axis one-step estimates from the cell above and the cell to
//! the left. It provides:
//!
//! * a dense tensor engine with a recorded-operation tape ([`tensor`]),
//! * SSM parametrization, HiPPO initialization, selective projections and
//!   discretization rules ([`ssm`]),
//! * a sequential reference scan plus the wavefront-parallel forward and
//!   hand-derived backward kernels ([`scan2d`], [`scan1d`]),
//! * neural building blocks and the hybrid hierarchical vision model ([`nn`]),
//! * a desk-scale training harness ([`train`]),
//! * bit-exact file formats ([`io`]) and a micro-benchmark harness ([`bench`]).

pub mod error;
pub mod linalg;
pub mod scan1d;
pub mod ssm;
pub mod tensor;

pub use error::{M2dError, Result};
pub use tensor::{Graph, Scalar, Tensor, Var};
