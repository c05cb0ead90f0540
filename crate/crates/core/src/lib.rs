//! Piecewise constant functions (PCFs) on `[0, ∞)` and the sweep-based
//! machinery for integrating, comparing and reducing them.
//!
//! A PCF is stored as a contiguous list of `(time, value)` rows. Pairwise
//! integrals are computed by walking the implicit common refinement of two
//! PCFs (see [`sweep`]); nothing is ever resampled onto a shared grid.
//!
//! The crate is `no_std` and only needs `alloc`. Threads, files and the
//! command line live in the `masspcf` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod array;
pub mod datagen;
pub mod error;
pub mod integrate;
pub mod pcf;
pub mod reduce;
pub mod scalar;
pub mod sweep;

pub use array::{PcfArray, PcfView, PcfViewMut, Shape, SliceSpec};
pub use error::PcfError;
pub use integrate::{
    combine_integrate, combine_integrate_timedep, integrate_single, l2_inner_product, lp_distance,
    Bounds, CombinationIntegral, L2InnerProduct, LpDistance,
};
pub use pcf::{AnyPcf, Discretization, Pcf};
pub use reduce::{mean, reduce_pair, std_dev, tree_reduce, variance, Accumulator, Normalization};
pub use scalar::{Scalar, ScalarKind};
pub use sweep::{iterate_rectangles, iterate_segments, Rectangle, Segment};

pub type Result<T, E = PcfError> = core::result::Result<T, E>;
