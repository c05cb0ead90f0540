//! Combination integrals `r(∫_a^b h(f(t), g(t)) dt)` and their single-PCF
//! counterparts.
//!
//! Contributions are summed strictly left to right in time order, in `f64`
//! regardless of the storage precision, and rounded to the storage type once
//! at the end. Over `[a, ∞)` the final cell is unbounded: it contributes
//! nothing when the integrand is exactly zero there and is reported as
//! [`PcfError::DivergentIntegral`] otherwise.

use crate::error::PcfError;
use crate::pcf::Pcf;
use crate::scalar::Scalar;
use crate::sweep::{check_bounds, rectangles, segments};
use crate::Result;

/// Integration interval `[start, end)` with `0 <= start < end <= ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds<T> {
    start: T,
    end: T,
}

impl<T: Scalar> Bounds<T> {
    pub fn new(start: T, end: T) -> Result<Self> {
        check_bounds(start, end)?;
        Ok(Bounds { start, end })
    }

    /// `[0, ∞)`.
    pub fn unbounded() -> Self {
        Bounds {
            start: T::ZERO,
            end: T::INFINITY,
        }
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn end(&self) -> T {
        self.end
    }

    pub fn is_unbounded(&self) -> bool {
        self.end.is_infinite()
    }
}

impl<T: Scalar> Default for Bounds<T> {
    fn default() -> Self {
        Self::unbounded()
    }
}

#[inline]
fn finish(sum: f64, tail: f64) -> Result<f64> {
    if tail.is_nan() {
        return Err(PcfError::NonFiniteValue);
    }
    if tail != 0.0 {
        return Err(PcfError::DivergentIntegral);
    }
    if !sum.is_finite() {
        return Err(PcfError::NonFiniteValue);
    }
    Ok(sum)
}

/// `∫_a^b h(f(t), g(t)) dt` in `f64`, before any outer map.
#[inline]
pub(crate) fn combine_integrate_raw<T, H>(
    f: &[[T; 2]],
    g: &[[T; 2]],
    h: &H,
    bounds: Bounds<T>,
) -> Result<f64>
where
    T: Scalar,
    H: Fn(f64, f64) -> f64,
{
    let mut sum = 0.0f64;
    let mut tail = 0.0f64;
    rectangles(f, g, bounds.start, bounds.end, |r| {
        let v = h(r.f_value.to_f64(), r.g_value.to_f64());
        if r.right.is_infinite() {
            tail = v;
        } else {
            sum += v * (r.right.to_f64() - r.left.to_f64());
        }
    });
    finish(sum, tail)
}

/// `∫_a^b h(f(t), g(t)) dt`.
pub fn combine_integrate<T, H>(f: &Pcf<T>, g: &Pcf<T>, h: H, bounds: Bounds<T>) -> Result<T>
where
    T: Scalar,
    H: Fn(f64, f64) -> f64,
{
    combine_integrate_raw(f.as_matrix(), g.as_matrix(), &h, bounds).map(T::from_f64)
}

/// Time-dependent integrand given by its antiderivative in `t`:
/// each cell contributes `H(v_f, v_g, right) - H(v_f, v_g, left)`.
///
/// With an unbounded upper limit, `H` is evaluated at `t = ∞` on the final
/// cell; a non-finite contribution there is a [`PcfError::DivergentIntegral`].
pub fn combine_integrate_timedep<T, A>(
    f: &Pcf<T>,
    g: &Pcf<T>,
    antiderivative: A,
    bounds: Bounds<T>,
) -> Result<T>
where
    T: Scalar,
    A: Fn(f64, f64, f64) -> f64,
{
    let mut sum = 0.0f64;
    let mut divergent = false;
    rectangles(
        f.as_matrix(),
        g.as_matrix(),
        bounds.start,
        bounds.end,
        |r| {
            let (x, y) = (r.f_value.to_f64(), r.g_value.to_f64());
            let c = antiderivative(x, y, r.right.to_f64()) - antiderivative(x, y, r.left.to_f64());
            if r.right.is_infinite() && !c.is_finite() {
                divergent = true;
            } else {
                sum += c;
            }
        },
    );
    if divergent {
        return Err(PcfError::DivergentIntegral);
    }
    finish(sum, 0.0).map(T::from_f64)
}

/// `∫_a^b h(f(t)) dt` by segment iteration.
pub fn integrate_single<T, H>(f: &Pcf<T>, h: H, bounds: Bounds<T>) -> Result<T>
where
    T: Scalar,
    H: Fn(f64) -> f64,
{
    let mut sum = 0.0f64;
    let mut tail = 0.0f64;
    segments(f.as_matrix(), bounds.start, bounds.end, |s| {
        let v = h(s.value.to_f64());
        if s.right.is_infinite() {
            tail = v;
        } else {
            sum += v * (s.right.to_f64() - s.left.to_f64());
        }
    });
    finish(sum, tail).map(T::from_f64)
}

/// `(∫_a^b |f - g|^p)^(1/p)`, `p >= 1`.
pub fn lp_distance<T: Scalar>(f: &Pcf<T>, g: &Pcf<T>, p: f64, bounds: Bounds<T>) -> Result<T> {
    LpDistance::new(p)?.with_bounds(bounds).evaluate(f, g)
}

/// `∫_a^b f g`.
pub fn l2_inner_product<T: Scalar>(f: &Pcf<T>, g: &Pcf<T>, bounds: Bounds<T>) -> Result<T> {
    combine_integrate(f, g, |x, y| x * y, bounds)
}

/// A functional of a PCF pair, as used to fill pairwise matrices.
pub trait CombinationIntegral<T: Scalar> {
    fn evaluate(&self, f: &Pcf<T>, g: &Pcf<T>) -> Result<T>;

    /// `F(f, g) == F(g, f)`; pairwise matrices then compute one triangle.
    fn is_symmetric(&self) -> bool {
        false
    }

    /// `F(f, f) == 0` for every `f`; the diagonal is then never evaluated.
    fn has_zero_diagonal(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Exponent {
    One,
    Two,
    Other(f64),
}

/// The `L_p` distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpDistance<T> {
    exponent: Exponent,
    bounds: Bounds<T>,
}

impl<T: Scalar> LpDistance<T> {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(PcfError::InvalidExponent);
        }
        let exponent = if p == 1.0 {
            Exponent::One
        } else if p == 2.0 {
            Exponent::Two
        } else {
            Exponent::Other(p)
        };
        Ok(LpDistance {
            exponent,
            bounds: Bounds::unbounded(),
        })
    }

    pub fn with_bounds(mut self, bounds: Bounds<T>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn p(&self) -> f64 {
        match self.exponent {
            Exponent::One => 1.0,
            Exponent::Two => 2.0,
            Exponent::Other(p) => p,
        }
    }
}

impl<T: Scalar> CombinationIntegral<T> for LpDistance<T> {
    #[inline]
    fn evaluate(&self, f: &Pcf<T>, g: &Pcf<T>) -> Result<T> {
        let (f, g) = (f.as_matrix(), g.as_matrix());
        let d = match self.exponent {
            Exponent::One => {
                combine_integrate_raw(f, g, &|x: f64, y: f64| libm::fabs(x - y), self.bounds)?
            }
            Exponent::Two => {
                let s =
                    combine_integrate_raw(f, g, &|x: f64, y: f64| (x - y) * (x - y), self.bounds)?;
                libm::sqrt(s)
            }
            Exponent::Other(p) => {
                let s = combine_integrate_raw(
                    f,
                    g,
                    &|x: f64, y: f64| libm::pow(libm::fabs(x - y), p),
                    self.bounds,
                )?;
                libm::pow(s, 1.0 / p)
            }
        };
        Ok(T::from_f64(d))
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn has_zero_diagonal(&self) -> bool {
        true
    }
}

/// The `L_2` inner product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2InnerProduct<T> {
    bounds: Bounds<T>,
}

impl<T: Scalar> L2InnerProduct<T> {
    pub fn new(bounds: Bounds<T>) -> Self {
        L2InnerProduct { bounds }
    }
}

impl<T: Scalar> Default for L2InnerProduct<T> {
    fn default() -> Self {
        Self::new(Bounds::unbounded())
    }
}

impl<T: Scalar> CombinationIntegral<T> for L2InnerProduct<T> {
    #[inline]
    fn evaluate(&self, f: &Pcf<T>, g: &Pcf<T>) -> Result<T> {
        combine_integrate_raw(
            f.as_matrix(),
            g.as_matrix(),
            &|x: f64, y: f64| x * y,
            self.bounds,
        )
        .map(T::from_f64)
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

fn identity(x: f64) -> f64 {
    x
}

/// A general combination integral `outer(∫_a^b h(f, g))`.
#[derive(Clone, Copy)]
pub struct Combination<T, H, R = fn(f64) -> f64> {
    h: H,
    outer: R,
    bounds: Bounds<T>,
    symmetric: bool,
}

impl<T: Scalar, H: Fn(f64, f64) -> f64> Combination<T, H> {
    /// Not symmetric unless declared with [`Combination::symmetric`].
    pub fn new(h: H, bounds: Bounds<T>) -> Self {
        Combination {
            h,
            outer: identity,
            bounds,
            symmetric: false,
        }
    }
}

impl<T: Scalar, H: Fn(f64, f64) -> f64, R: Fn(f64) -> f64> Combination<T, H, R> {
    pub fn with_outer<R2: Fn(f64) -> f64>(self, outer: R2) -> Combination<T, H, R2> {
        Combination {
            h: self.h,
            outer,
            bounds: self.bounds,
            symmetric: self.symmetric,
        }
    }

    pub fn symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }
}

impl<T, H, R> CombinationIntegral<T> for Combination<T, H, R>
where
    T: Scalar,
    H: Fn(f64, f64) -> f64,
    R: Fn(f64) -> f64,
{
    fn evaluate(&self, f: &Pcf<T>, g: &Pcf<T>) -> Result<T> {
        let s = combine_integrate_raw(f.as_matrix(), g.as_matrix(), &self.h, self.bounds)?;
        let v = (self.outer)(s);
        if !v.is_finite() {
            return Err(PcfError::NonFiniteValue);
        }
        Ok(T::from_f64(v))
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// A time-dependent combination integral given by an antiderivative
/// `H(x, y, t)` in `t`.
#[derive(Clone, Copy)]
pub struct TimeDependent<T, A, R = fn(f64) -> f64> {
    antiderivative: A,
    outer: R,
    bounds: Bounds<T>,
    symmetric: bool,
}

impl<T: Scalar, A: Fn(f64, f64, f64) -> f64> TimeDependent<T, A> {
    pub fn new(antiderivative: A, bounds: Bounds<T>) -> Self {
        TimeDependent {
            antiderivative,
            outer: identity,
            bounds,
            symmetric: false,
        }
    }
}

impl<T: Scalar, A: Fn(f64, f64, f64) -> f64, R: Fn(f64) -> f64> TimeDependent<T, A, R> {
    pub fn with_outer<R2: Fn(f64) -> f64>(self, outer: R2) -> TimeDependent<T, A, R2> {
        TimeDependent {
            antiderivative: self.antiderivative,
            outer,
            bounds: self.bounds,
            symmetric: self.symmetric,
        }
    }

    pub fn symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }
}

impl<T, A, R> CombinationIntegral<T> for TimeDependent<T, A, R>
where
    T: Scalar,
    A: Fn(f64, f64, f64) -> f64,
    R: Fn(f64) -> f64,
{
    fn evaluate(&self, f: &Pcf<T>, g: &Pcf<T>) -> Result<T> {
        let s = combine_integrate_timedep(f, g, &self.antiderivative, self.bounds)?.to_f64();
        let v = (self.outer)(s);
        if !v.is_finite() {
            return Err(PcfError::NonFiniteValue);
        }
        Ok(T::from_f64(v))
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}
