//! Parallel execution, file formats and the command line front-end for
//! [`masspcf_core`].
//!
//! The numerical kernels live in the core crate; this crate schedules them
//! across threads ([`matrix`], [`parallel`]) and moves PCF collections and
//! matrices to and from disk ([`io`]).

pub mod cli;
pub mod error;
pub mod io;
pub mod matrix;
pub mod parallel;
pub mod workers;

pub use masspcf_core as core;
pub use masspcf_core::{
    datagen, Bounds, CombinationIntegral, L2InnerProduct, LpDistance, Pcf, PcfArray, PcfError,
    Scalar, ScalarKind,
};

pub use error::Error;
pub use matrix::{
    l2_kernel, pairwise, pdist, BlockRowSchedule, CancelToken, JobStats, PairwiseJob,
    PairwiseMatrix,
};
pub use parallel::{par_mean, par_std_dev, par_tree_reduce, par_variance};

pub type Result<T, E = Error> = std::result::Result<T, E>;
