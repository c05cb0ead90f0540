//! Pointwise reductions of PCF collections.
//!
//! [`reduce_pair`] computes `h_*(f, g)` with one rectangle sweep, writing a
//! point only where the combined value changes. [`Accumulator`] keeps a
//! reduction state in a pair of buffers that are reused and swapped across
//! combines, and [`tree_reduce`] folds a collection through a fixed binary
//! tree of accumulators.

use alloc::vec::Vec;
use core::borrow::Borrow;
use core::mem;

use crate::error::PcfError;
use crate::pcf::Pcf;
use crate::scalar::Scalar;
use crate::sweep::rectangles;
use crate::Result;

/// Writes `h_*(f, g)` into `out`, reusing its allocation.
fn reduce_into<T, H>(out: &mut Vec<[T; 2]>, f: &[[T; 2]], g: &[[T; 2]], h: &H) -> Result<()>
where
    T: Scalar,
    H: Fn(T, T) -> T,
{
    out.clear();
    // one output point per rectangle at most
    let needed = f.len() + g.len();
    if out.capacity() < needed {
        out.reserve(needed.max(2 * out.capacity()));
    }
    let mut finite = true;
    rectangles(f, g, T::ZERO, T::INFINITY, |r| {
        let v = h(r.f_value, r.g_value);
        finite &= v.is_finite();
        match out.last() {
            Some(last) if last[1] == v => {}
            _ => out.push([r.left, v]),
        }
    });
    if finite {
        Ok(())
    } else {
        Err(PcfError::NonFiniteValue)
    }
}

/// `h_*(f, g)(t) = h(f(t), g(t))`, minimally discretized.
pub fn reduce_pair<T, H>(f: &Pcf<T>, g: &Pcf<T>, h: H) -> Result<Pcf<T>>
where
    T: Scalar,
    H: Fn(T, T) -> T,
{
    let mut out = Vec::new();
    reduce_into(&mut out, f.as_matrix(), g.as_matrix(), &h)?;
    Ok(Pcf::from_points_unchecked(out))
}

/// Mutable reduction state `A` supporting `A ⊕= f`, `A ⊕= A'` and `A → Pcf`.
///
/// Each combine writes into the side buffer and swaps it in; buffers only
/// ever grow. A fresh accumulator reads as the zero PCF, and its first combine
/// takes the right-hand side as-is, so operations without an identity
/// element (e.g. `min`) work too.
#[derive(Clone, Debug)]
pub struct Accumulator<T, F> {
    points: Vec<[T; 2]>,
    side: Vec<[T; 2]>,
    op: F,
    empty: bool,
}

impl<T, F> Accumulator<T, F>
where
    T: Scalar,
    F: Fn(T, T) -> T,
{
    pub fn new(op: F) -> Self {
        Accumulator {
            points: alloc::vec![[T::ZERO, T::ZERO]],
            side: Vec::new(),
            op,
            empty: true,
        }
    }

    /// Accumulator holding the reduction of `items` in order.
    pub fn from_slice<P: Borrow<Pcf<T>>>(op: F, items: &[P]) -> Result<Self> {
        let mut acc = Self::new(op);
        for f in items {
            acc.combine(f.borrow())?;
        }
        Ok(acc)
    }

    /// `A ⊕= f`.
    pub fn combine(&mut self, f: &Pcf<T>) -> Result<()> {
        self.combine_points(f.as_matrix())
    }

    /// `A ⊕= A'`.
    pub fn combine_accumulator<G>(&mut self, other: &Accumulator<T, G>) -> Result<()> {
        if other.empty {
            return Ok(());
        }
        self.combine_points(&other.points)
    }

    fn combine_points(&mut self, rhs: &[[T; 2]]) -> Result<()> {
        if self.empty {
            self.points.clear();
            self.points.push(rhs[0]);
            for &p in &rhs[1..] {
                if p[1] != self.points[self.points.len() - 1][1] {
                    self.points.push(p);
                }
            }
            self.empty = false;
            return Ok(());
        }
        reduce_into(&mut self.side, &self.points, rhs, &self.op)?;
        mem::swap(&mut self.points, &mut self.side);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// Current state as `(time, value)` rows.
    pub fn as_matrix(&self) -> &[[T; 2]] {
        &self.points
    }

    /// Capacity of the larger of the two buffers.
    pub fn capacity(&self) -> usize {
        self.points.capacity().max(self.side.capacity())
    }

    pub fn to_pcf(&self) -> Pcf<T> {
        Pcf::from_points_unchecked(self.points.clone())
    }

    /// `A → Pcf`, handing over the state buffer.
    pub fn into_pcf(self) -> Pcf<T> {
        Pcf::from_points_unchecked(self.points)
    }
}

/// One level of the reduction tree on a window of `2 * stride` columns:
/// column `stride` is folded into column `0`.
pub fn combine_tree_window<T, F>(window: &mut [Accumulator<T, F>], stride: usize) -> Result<()>
where
    T: Scalar,
    F: Fn(T, T) -> T,
{
    if window.len() > stride {
        let (left, right) = window.split_at_mut(stride);
        left[0].combine_accumulator(&right[0])?;
    }
    Ok(())
}

/// Reduces `items` through a binary tree: leaves are paired `(1,2)(3,4)…`,
/// then adjacent results are paired level by level, with an unpaired node
/// passed through unchanged. The shape depends only on `items.len()`.
pub fn tree_reduce<T, P, F>(items: &[P], op: F) -> Result<Pcf<T>>
where
    T: Scalar,
    P: Borrow<Pcf<T>>,
    F: Fn(T, T) -> T,
{
    if items.is_empty() {
        return Err(PcfError::EmptyCollection);
    }
    let mut columns = items
        .chunks(2)
        .map(|pair| Accumulator::from_slice(&op, pair))
        .collect::<Result<Vec<_>>>()?;
    let mut stride = 1;
    while stride < columns.len() {
        for window in columns.chunks_mut(2 * stride) {
            combine_tree_window(window, stride)?;
        }
        stride *= 2;
    }
    Ok(columns.swap_remove(0).into_pcf())
}

/// `sum / n`, as used by [`mean`].
pub fn mean_from_sum<T: Scalar>(sum: &Pcf<T>, n: usize) -> Result<Pcf<T>> {
    Ok(sum
        .scale(T::ONE / T::from_usize(n))?
        .minimize_discretization())
}

/// Pointwise mean `(1/n) Σ f_i`.
pub fn mean<T: Scalar, P: Borrow<Pcf<T>>>(items: &[P]) -> Result<Pcf<T>> {
    let sum = tree_reduce(items, |a, b| a + b)?;
    mean_from_sum(&sum, items.len())
}

/// Divisor applied to the sum of squared deviations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `1 / (n - 1)`, the unbiased sample variance.
    #[default]
    Unbiased,
    /// `1 / n`.
    Population,
    /// `1 / (n + 1)`.
    NPlusOne,
}

impl Normalization {
    pub fn divisor(self, n: usize) -> usize {
        match self {
            Normalization::Unbiased => n - 1,
            Normalization::Population => n,
            Normalization::NPlusOne => n + 1,
        }
    }
}

/// Squared deviations from `mean`, one PCF per item.
pub fn squared_deviations<T: Scalar, P: Borrow<Pcf<T>>>(
    items: &[P],
    mean: &Pcf<T>,
) -> Result<Vec<Pcf<T>>> {
    items
        .iter()
        .map(|f| reduce_pair(f.borrow(), mean, |a, b| (a - b) * (a - b)))
        .collect()
}

pub fn check_variance_input(n: usize) -> Result<()> {
    if n < 2 {
        return Err(PcfError::InsufficientData { needed: 2, got: n });
    }
    Ok(())
}

/// Pointwise variance `(1/d) Σ (f_i - f̄)^2` with `d` from `normalization`.
pub fn variance<T: Scalar, P: Borrow<Pcf<T>>>(
    items: &[P],
    normalization: Normalization,
) -> Result<Pcf<T>> {
    check_variance_input(items.len())?;
    let m = mean(items)?;
    let total = tree_reduce(&squared_deviations(items, &m)?, |a, b| a + b)?;
    mean_from_sum(&total, normalization.divisor(items.len()))
}

/// Pointwise sample standard deviation (unbiased variance, then square root).
pub fn std_dev<T: Scalar, P: Borrow<Pcf<T>>>(items: &[P]) -> Result<Pcf<T>> {
    variance(items, Normalization::Unbiased)?.apply_unary(T::sqrt)
}
