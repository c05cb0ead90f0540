//! Multi-threaded reductions.
//!
//! The reduction tree has the same shape as [`masspcf_core::tree_reduce`];
//! only the nodes of one level are combined concurrently. Results are
//! therefore bitwise identical to the sequential versions for any worker
//! count.

use std::borrow::Borrow;

use masspcf_core::reduce::{
    check_variance_input, combine_tree_window, mean_from_sum, reduce_pair, Accumulator,
    Normalization,
};
use masspcf_core::{Pcf, PcfError, Scalar};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::workers::resolve_workers;
use crate::Result;

fn pool(workers: Option<usize>) -> ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(workers))
        .build()
        .expect("thread pool")
}

fn tree_reduce_in<T, P, F>(items: &[P], op: &F) -> std::result::Result<Pcf<T>, PcfError>
where
    T: Scalar,
    P: Borrow<Pcf<T>> + Sync,
    F: Fn(T, T) -> T + Sync,
{
    if items.is_empty() {
        return Err(PcfError::EmptyCollection);
    }
    let mut columns = items
        .par_chunks(2)
        .map(|pair| Accumulator::from_slice(op, pair))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut stride = 1;
    while stride < columns.len() {
        columns
            .par_chunks_mut(2 * stride)
            .try_for_each(|window| combine_tree_window(window, stride))?;
        stride *= 2;
    }
    Ok(columns.swap_remove(0).into_pcf())
}

/// Parallel [`masspcf_core::tree_reduce`].
pub fn par_tree_reduce<T, P, F>(items: &[P], op: F, workers: Option<usize>) -> Result<Pcf<T>>
where
    T: Scalar,
    P: Borrow<Pcf<T>> + Sync,
    F: Fn(T, T) -> T + Sync,
{
    Ok(pool(workers).install(|| tree_reduce_in(items, &op))?)
}

/// Parallel [`masspcf_core::mean`].
pub fn par_mean<T, P>(items: &[P], workers: Option<usize>) -> Result<Pcf<T>>
where
    T: Scalar,
    P: Borrow<Pcf<T>> + Sync,
{
    let sum = par_tree_reduce(items, |a, b| a + b, workers)?;
    Ok(mean_from_sum(&sum, items.len())?)
}

/// Parallel [`masspcf_core::variance`].
pub fn par_variance<T, P>(
    items: &[P],
    normalization: Normalization,
    workers: Option<usize>,
) -> Result<Pcf<T>>
where
    T: Scalar,
    P: Borrow<Pcf<T>> + Sync,
{
    check_variance_input(items.len())?;
    let result = pool(workers).install(|| {
        let add = |a: T, b: T| a + b;
        let mean = mean_from_sum(&tree_reduce_in(items, &add)?, items.len())?;
        let squares = items
            .par_iter()
            .map(|f| reduce_pair(f.borrow(), &mean, |a, b| (a - b) * (a - b)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let total = tree_reduce_in(&squares, &add)?;
        mean_from_sum(&total, normalization.divisor(items.len()))
    })?;
    Ok(result)
}

/// Parallel [`masspcf_core::std_dev`].
pub fn par_std_dev<T, P>(items: &[P], workers: Option<usize>) -> Result<Pcf<T>>
where
    T: Scalar,
    P: Borrow<Pcf<T>> + Sync,
{
    Ok(par_variance(items, Normalization::Unbiased, workers)?.apply_unary(T::sqrt)?)
}
