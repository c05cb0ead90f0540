//! Implicit common-grid sweeps.
//!
//! [`iterate_rectangles`] walks two PCFs at once with one cursor each and
//! emits the cells of their minimal common refinement, clipped to `[a, b)`.
//! [`iterate_segments`] does the same for a single PCF. Both hand each cell
//! to a callback; nothing is allocated.
//!
//! Cell edges are always copied from the inputs (a stored time point or one
//! of the bounds), never computed, so the cells tile `[a, b)` exactly.

use crate::error::PcfError;
use crate::pcf::{piece_index, Pcf};
use crate::scalar::Scalar;
use crate::Result;

/// One cell `[left, right)` of the common refinement of two PCFs, with both
/// functions' values on it. `right` is `+∞` for the unbounded final cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle<T> {
    pub left: T,
    pub right: T,
    pub f_value: T,
    pub g_value: T,
}

impl<T: Scalar> Rectangle<T> {
    #[inline]
    pub fn width(&self) -> T {
        self.right - self.left
    }
}

/// One constant piece `[left, right)` of a single PCF.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<T> {
    pub left: T,
    pub right: T,
    pub value: T,
}

impl<T: Scalar> Segment<T> {
    #[inline]
    pub fn width(&self) -> T {
        self.right - self.left
    }
}

pub(crate) fn check_bounds<T: Scalar>(a: T, b: T) -> Result<()> {
    // also rejects NaN in either bound
    if a >= T::ZERO && a.is_finite() && a < b {
        Ok(())
    } else {
        Err(PcfError::InvalidBounds)
    }
}

/// Visits every cell of the common refinement of `f` and `g` on `[a, b)` in
/// increasing time order. Simultaneous jumps produce one cell, and
/// zero-width cells are never emitted. `b` may be `+∞`.
pub fn iterate_rectangles<T, V>(f: &Pcf<T>, g: &Pcf<T>, a: T, b: T, visit: V) -> Result<()>
where
    T: Scalar,
    V: FnMut(Rectangle<T>),
{
    check_bounds(a, b)?;
    rectangles(f.as_matrix(), g.as_matrix(), a, b, visit);
    Ok(())
}

/// Unchecked core of [`iterate_rectangles`] over raw point buffers.
#[inline]
pub(crate) fn rectangles<T, V>(fp: &[[T; 2]], gp: &[[T; 2]], a: T, b: T, mut visit: V)
where
    T: Scalar,
    V: FnMut(Rectangle<T>),
{
    let (fl, gl) = (fp.len(), gp.len());
    let mut i = piece_index(fp, a);
    let mut j = piece_index(gp, a);
    let mut left = a;
    loop {
        // +∞ stands for "no further breakpoint"
        let next_f = if i + 1 < fl {
            fp[i + 1][0]
        } else {
            T::INFINITY
        };
        let next_g = if j + 1 < gl {
            gp[j + 1][0]
        } else {
            T::INFINITY
        };
        let next = if next_f < next_g { next_f } else { next_g };
        let (f_value, g_value) = (fp[i][1], gp[j][1]);
        if !(next < b) {
            visit(Rectangle {
                left,
                right: b,
                f_value,
                g_value,
            });
            return;
        }
        visit(Rectangle {
            left,
            right: next,
            f_value,
            g_value,
        });
        i += (next_f == next) as usize;
        j += (next_g == next) as usize;
        left = next;
    }
}

/// Visits every constant piece of `f` on `[a, b)` in order. Adjacent pieces
/// with equal values are not merged.
pub fn iterate_segments<T, V>(f: &Pcf<T>, a: T, b: T, visit: V) -> Result<()>
where
    T: Scalar,
    V: FnMut(Segment<T>),
{
    check_bounds(a, b)?;
    segments(f.as_matrix(), a, b, visit);
    Ok(())
}

#[inline]
pub(crate) fn segments<T, V>(fp: &[[T; 2]], a: T, b: T, mut visit: V)
where
    T: Scalar,
    V: FnMut(Segment<T>),
{
    let k = piece_index(fp, a);
    let mut left = a;
    let mut value = fp[k][1];
    for p in &fp[k + 1..] {
        if !(p[0] < b) {
            break;
        }
        visit(Segment {
            left,
            right: p[0],
            value,
        });
        left = p[0];
        value = p[1];
    }
    visit(Segment {
        left,
        right: b,
        value,
    });
}
