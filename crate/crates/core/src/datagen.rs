//! Seeded random PCF generators.
//!
//! Every element draws from its own ChaCha8 stream, keyed by the seed and the
//! element's flat index, so output is identical across platforms, element
//! order and thread count. Distribution sampling goes through `rand_distr`
//! and `libm`, which are both pure software.
//!
//! Pinned: `rand_chacha` 0.9 (`ChaCha8Rng`), `rand` 0.9, `rand_distr` 0.5.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::array::PcfArray;
use crate::error::PcfError;
use crate::pcf::Pcf;
use crate::scalar::Scalar;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        RngSpec { seed }
    }

    /// Generator for stream `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrigKind {
    Sin,
    Cos,
}

impl TrigKind {
    fn apply(self, x: f64) -> f64 {
        match self {
            TrigKind::Sin => libm::sin(x),
            TrigKind::Cos => libm::cos(x),
        }
    }
}

/// Sorts `times` in place and replaces every duplicate (and any exact zero)
/// with a fresh draw until all entries are distinct and positive.
fn make_distinct<T: Scalar, R: Rng>(
    rng: &mut R,
    times: &mut Vec<T>,
    mut draw: impl FnMut(&mut R) -> T,
) {
    loop {
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut redraw = 0;
        let mut kept: Vec<T> = Vec::with_capacity(times.len());
        for &t in times.iter() {
            if t == T::ZERO || kept.last() == Some(&t) {
                redraw += 1;
            } else {
                kept.push(t);
            }
        }
        if redraw == 0 {
            return;
        }
        for _ in 0..redraw {
            kept.push(draw(rng));
        }
        *times = kept;
    }
}

/// One noisy trigonometric PCF: `n_points` uniform times in `[0, 1)`, sorted,
/// with `t_0 = 0` prepended; value `g(2π t) + ε`, `ε ~ N(0, sigma)`.
pub fn noisy_trig_pcf<T: Scalar, R: Rng>(
    rng: &mut R,
    n_points: usize,
    kind: TrigKind,
    sigma: f64,
) -> Result<Pcf<T>> {
    if n_points == 0 || !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(PcfError::BadShape);
    }
    let noise = Normal::new(0.0, sigma).map_err(|_| PcfError::BadShape)?;
    let uniform = |r: &mut R| T::from_f64(r.random::<f64>());
    let mut times: Vec<T> = (0..n_points).map(|_| uniform(rng)).collect();
    make_distinct(rng, &mut times, uniform);

    let mut rows = Vec::with_capacity(n_points + 1);
    for t in core::iter::once(T::ZERO).chain(times) {
        let v = kind.apply(TAU * t.to_f64()) + noise.sample(rng);
        rows.push([t, T::from_f64(v)]);
    }
    Pcf::new(rows)
}

/// Array of noisy `sin`/`cos` PCFs of the given shape; element `k` (row-major)
/// uses stream `k`.
pub fn noisy_trig<T: Scalar>(
    shape: &[usize],
    n_points: usize,
    kind: TrigKind,
    sigma: f64,
    rng: RngSpec,
) -> Result<PcfArray<T>> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(PcfError::BadShape);
    }
    let n: usize = shape.iter().product();
    let items = (0..n)
        .map(|k| noisy_trig_pcf(&mut rng.stream(k as u64), n_points, kind, sigma))
        .collect::<Result<Vec<_>>>()?;
    PcfArray::from_vec(shape, items)
}

pub fn noisy_sin<T: Scalar>(
    shape: &[usize],
    n_points: usize,
    sigma: f64,
    rng: RngSpec,
) -> Result<PcfArray<T>> {
    noisy_trig(shape, n_points, TrigKind::Sin, sigma, rng)
}

pub fn noisy_cos<T: Scalar>(
    shape: &[usize],
    n_points: usize,
    sigma: f64,
    rng: RngSpec,
) -> Result<PcfArray<T>> {
    noisy_trig(shape, n_points, TrigKind::Cos, sigma, rng)
}

/// Default noise level of the trigonometric generators.
pub const DEFAULT_SIGMA: f64 = 0.1;

/// A synthetic benchmark PCF together with the time scale it was built with.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticPcf<T> {
    pub pcf: Pcf<T>,
    pub scale: f64,
}

/// One synthetic benchmark PCF:
///
/// 1. `n ~ U{10, …, 1000}`
/// 2. scale `|α|`, `α ~ N(0, 1)`
/// 3. `n - 1` raw times `~ N(0, 1)`, ordered by increasing magnitude
/// 4. `n - 1` values `v_0 … v_{n-2} ~ N(0, 1)`
/// 5. rows `(0, v_0), (|α||t_1|, v_1), …, (|α||t_{n-1}|, 0)`
///
/// A raw time whose scaled value would coincide with an earlier one (or be
/// 0) is redrawn, as is `α = 0`.
pub fn synthetic_pcf<T: Scalar, R: Rng>(rng: &mut R) -> SyntheticPcf<T> {
    let n: usize = rng.random_range(10..=1000);
    let scale = loop {
        let a: f64 = StandardNormal.sample(rng);
        let a = libm::fabs(a);
        if a > 0.0 {
            break a;
        }
    };
    let scaled = |r: &mut R| {
        let t: f64 = StandardNormal.sample(r);
        T::from_f64(scale * libm::fabs(t))
    };
    let mut times: Vec<T> = (0..n - 1).map(|_| scaled(rng)).collect();
    make_distinct(rng, &mut times, scaled);

    let mut rows = Vec::with_capacity(n);
    rows.push([T::ZERO, T::ZERO]);
    for (k, t) in times.into_iter().enumerate() {
        rows.push([t, T::ZERO]);
        let v: f64 = StandardNormal.sample(rng);
        rows[k][1] = T::from_f64(v);
    }
    // last row keeps value 0
    SyntheticPcf {
        pcf: Pcf::new(rows).expect("generator produces valid rows"),
        scale,
    }
}

/// `count` synthetic benchmark PCFs; PCF `i` uses stream `i`.
pub fn synthetic_benchmark<T: Scalar>(count: usize, rng: RngSpec) -> Vec<Pcf<T>> {
    (0..count)
        .map(|i| synthetic_pcf(&mut rng.stream(i as u64)).pcf)
        .collect()
}
