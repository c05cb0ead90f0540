//! The PCF value type.
//!
//! A [`Pcf`] is a right-continuous step function on `[0, ∞)`, stored as a
//! contiguous `n × 2` matrix of `(time, value)` rows. Row `i` says the
//! function equals `value` on `[time_i, time_{i+1})`; the last row extends to
//! infinity. Instances are validated on construction and immutable after.

use alloc::vec::Vec;
use core::fmt;

use crate::error::PcfError;
use crate::reduce::reduce_pair;
use crate::scalar::{Scalar, ScalarKind};
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct Pcf<T> {
    points: Vec<[T; 2]>,
}

impl<T: Scalar> Pcf<T> {
    /// Validates `points` and takes ownership of the buffer.
    pub fn new(mut points: Vec<[T; 2]>) -> Result<Self> {
        validate(&points)?;
        // -0.0 passes the start check; store the canonical +0.0
        points[0][0] = T::ZERO;
        Ok(Pcf { points })
    }

    /// Copies `rows` into a new validated PCF.
    pub fn from_rows(rows: &[[T; 2]]) -> Result<Self> {
        Self::new(rows.to_vec())
    }

    pub fn from_pairs<I: IntoIterator<Item = (T, T)>>(pairs: I) -> Result<Self> {
        Self::new(pairs.into_iter().map(|(t, v)| [t, v]).collect())
    }

    /// The canonical zero function `[(0, 0)]`.
    pub fn zero() -> Self {
        Pcf {
            points: alloc::vec![[T::ZERO, T::ZERO]],
        }
    }

    /// Caller guarantees the PCF invariants hold.
    pub(crate) fn from_points_unchecked(points: Vec<[T; 2]>) -> Self {
        debug_assert!(validate(&points).is_ok());
        Pcf { points }
    }

    /// Number of stored rows.
    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; a PCF has at least one row.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn kind(&self) -> ScalarKind {
        T::KIND
    }

    /// Read-only `(time, value)` rows, without copying.
    #[inline]
    pub fn as_matrix(&self) -> &[[T; 2]] {
        &self.points
    }

    pub fn into_matrix(self) -> Vec<[T; 2]> {
        self.points
    }

    #[inline]
    pub fn time(&self, i: usize) -> T {
        self.points[i][0]
    }

    #[inline]
    pub fn value(&self, i: usize) -> T {
        self.points[i][1]
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        self.points.iter().map(|p| p[0])
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        self.points.iter().map(|p| p[1])
    }

    pub fn last_value(&self) -> T {
        self.points[self.points.len() - 1][1]
    }

    /// True when the final (unbounded) piece is zero, i.e. integrals over
    /// `[0, ∞)` of `|f|^p` are finite.
    pub fn is_eventually_zero(&self) -> bool {
        self.last_value() == T::ZERO
    }

    pub fn discretization(&self) -> Discretization<T> {
        Discretization(self.times().collect())
    }

    /// Value at `t`, using the rightmost row with `time <= t`.
    pub fn evaluate(&self, t: T) -> Result<T> {
        if !(t >= T::ZERO) || !t.is_finite() {
            return Err(PcfError::NegativeTime);
        }
        Ok(self.points[piece_index(&self.points, t)][1])
    }

    pub fn scale(&self, a: T) -> Result<Self> {
        if !a.is_finite() {
            return Err(PcfError::NonFiniteValue);
        }
        if a == T::ZERO {
            return Ok(Self::zero());
        }
        let mut points = self.points.clone();
        for p in &mut points {
            p[1] = p[1] * a;
            if !p[1].is_finite() {
                return Err(PcfError::NonFiniteValue);
            }
        }
        Ok(Pcf { points })
    }

    /// Pointwise sum, minimally discretized.
    pub fn add(&self, other: &Self) -> Result<Self> {
        reduce_pair(self, other, |a, b| a + b)
    }

    /// Drops every row whose value equals the previous row's value.
    pub fn minimize_discretization(&self) -> Self {
        let mut points = Vec::with_capacity(self.points.len());
        points.push(self.points[0]);
        for &p in &self.points[1..] {
            if p[1] != points[points.len() - 1][1] {
                points.push(p);
            }
        }
        Pcf { points }
    }

    pub fn is_minimal(&self) -> bool {
        self.points.windows(2).all(|w| w[0][1] != w[1][1])
    }

    /// `h_*(f)(t) = h(f(t))`, minimally discretized.
    pub fn apply_unary<H: Fn(T) -> T>(&self, h: H) -> Result<Self> {
        let mut points: Vec<[T; 2]> = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let v = h(p[1]);
            if !v.is_finite() {
                return Err(PcfError::NonFiniteValue);
            }
            match points.last() {
                Some(last) if last[1] == v => {}
                _ => points.push([p[0], v]),
            }
        }
        Ok(Pcf { points })
    }
}

impl<T: Scalar> fmt::Display for Pcf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<PCF size={}, dtype={}>", self.len(), T::KIND)
    }
}

impl<T: Scalar> TryFrom<Vec<[T; 2]>> for Pcf<T> {
    type Error = PcfError;

    fn try_from(points: Vec<[T; 2]>) -> Result<Self> {
        Pcf::new(points)
    }
}

fn validate<T: Scalar>(points: &[[T; 2]]) -> Result<()> {
    if points.is_empty() {
        return Err(PcfError::Empty);
    }
    for (row, p) in points.iter().enumerate() {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(PcfError::NonFinite { row });
        }
    }
    if points[0][0] != T::ZERO {
        return Err(PcfError::NonZeroStart);
    }
    for (i, w) in points.windows(2).enumerate() {
        if !(w[0][0] < w[1][0]) {
            return Err(PcfError::NonIncreasingTimes { row: i + 1 });
        }
    }
    Ok(())
}

/// `max { i : times[i] <= t }`; `t` must be `>= 0`.
#[inline]
pub(crate) fn piece_index<T: Scalar>(points: &[[T; 2]], t: T) -> usize {
    points.partition_point(|p| p[0] <= t) - 1
}

/// An ordered sequence of time points starting at 0 on which some PCF is
/// constant between consecutive entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Discretization<T>(Vec<T>);

impl<T: Scalar> Discretization<T> {
    pub fn new(times: Vec<T>) -> Result<Self> {
        match times.first() {
            None => return Err(PcfError::Empty),
            Some(&t0) if t0 != T::ZERO => return Err(PcfError::NonZeroStart),
            _ => {}
        }
        for (i, w) in times.windows(2).enumerate() {
            if !w[1].is_finite() {
                return Err(PcfError::NonFinite { row: i + 1 });
            }
            if !(w[0] < w[1]) {
                return Err(PcfError::NonIncreasingTimes { row: i + 1 });
            }
        }
        Ok(Discretization(times))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// `self ≤ other` in the refinement order: every point of `self` is a
    /// point of `other`.
    pub fn is_refined_by(&self, other: &Self) -> bool {
        let mut j = 0;
        for &t in &self.0 {
            while j < other.0.len() && other.0[j] < t {
                j += 1;
            }
            if j == other.0.len() || other.0[j] != t {
                return false;
            }
        }
        true
    }

    /// Minimal common refinement (sorted union).
    pub fn common_refinement(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(&x), Some(&y)) if y < x => {
                    j += 1;
                    y
                }
                (Some(&x), Some(_)) => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        Discretization(out)
    }
}

/// A PCF whose precision is only known at runtime (e.g. loaded from a file).
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPcf {
    F32(Pcf<f32>),
    F64(Pcf<f64>),
}

impl AnyPcf {
    pub fn kind(&self) -> ScalarKind {
        match self {
            AnyPcf::F32(_) => ScalarKind::F32,
            AnyPcf::F64(_) => ScalarKind::F64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyPcf::F32(f) => f.len(),
            AnyPcf::F64(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same-kind addition; mixed kinds are rejected, never promoted.
    pub fn add(&self, other: &AnyPcf) -> Result<AnyPcf> {
        match (self, other) {
            (AnyPcf::F32(f), AnyPcf::F32(g)) => f.add(g).map(AnyPcf::F32),
            (AnyPcf::F64(f), AnyPcf::F64(g)) => f.add(g).map(AnyPcf::F64),
            _ => Err(PcfError::MixedPrecision {
                left: self.kind(),
                right: other.kind(),
            }),
        }
    }
}

impl From<Pcf<f32>> for AnyPcf {
    fn from(f: Pcf<f32>) -> Self {
        AnyPcf::F32(f)
    }
}

impl From<Pcf<f64>> for AnyPcf {
    fn from(f: Pcf<f64>) -> Self {
        AnyPcf::F64(f)
    }
}
