//! Shaped containers of PCFs with strided, non-copying views.
//!
//! Elements are shared handles (`Arc<Pcf<T>>`), so slicing, assignment and
//! reshaping move handles around and never copy point buffers.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::PcfError;
use crate::pcf::Pcf;
use crate::reduce::mean;
use crate::scalar::Scalar;
use crate::Result;

/// Extents of an array, displayed as `Shape(10, 5, 4)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape(pub Vec<usize>);

impl Shape {
    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn size(&self) -> usize {
        self.0.iter().product()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Shape(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

impl PartialEq<[usize]> for Shape {
    fn eq(&self, other: &[usize]) -> bool {
        self.0 == other
    }
}

impl<const N: usize> PartialEq<[usize; N]> for Shape {
    fn eq(&self, other: &[usize; N]) -> bool {
        self.0 == other
    }
}

/// Per-dimension selector: a single index (drops the dimension) or a
/// `start..end` range with a positive step (keeps it).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceSpec {
    Index(usize),
    Range {
        start: usize,
        /// `None` means the full extent.
        end: Option<usize>,
        step: usize,
    },
}

impl SliceSpec {
    /// `:`
    pub const ALL: SliceSpec = SliceSpec::Range {
        start: 0,
        end: None,
        step: 1,
    };

    /// `start:end`
    pub fn range(start: usize, end: usize) -> Self {
        SliceSpec::Range {
            start,
            end: Some(end),
            step: 1,
        }
    }

    /// `start:`
    pub fn from(start: usize) -> Self {
        SliceSpec::Range {
            start,
            end: None,
            step: 1,
        }
    }

    /// `start:end:step`
    pub fn stepped(start: usize, end: usize, step: usize) -> Self {
        SliceSpec::Range {
            start,
            end: Some(end),
            step,
        }
    }
}

impl From<usize> for SliceSpec {
    fn from(i: usize) -> Self {
        SliceSpec::Index(i)
    }
}

/// Offset/stride/extent description of a strided view over flat storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    offset: usize,
    shape: Vec<usize>,
    strides: Vec<usize>,
}

impl Layout {
    pub fn contiguous(shape: &[usize]) -> Self {
        let mut strides = alloc::vec![0; shape.len()];
        let mut acc = 1;
        for d in (0..shape.len()).rev() {
            strides[d] = acc;
            acc *= shape[d];
        }
        Layout {
            offset: 0,
            shape: shape.to_vec(),
            strides,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn size(&self) -> usize {
        self.shape.iter().product()
    }

    /// Applies `specs` to the leading dimensions; missing trailing specs
    /// select everything.
    pub fn slice(&self, specs: &[SliceSpec]) -> Result<Layout> {
        if specs.len() > self.shape.len() {
            return Err(PcfError::BadDimension {
                dim: specs.len() - 1,
                rank: self.shape.len(),
            });
        }
        let mut offset = self.offset;
        let mut shape = Vec::with_capacity(self.shape.len());
        let mut strides = Vec::with_capacity(self.shape.len());
        for (dim, (&extent, &stride)) in self.shape.iter().zip(&self.strides).enumerate() {
            match specs.get(dim).copied().unwrap_or(SliceSpec::ALL) {
                SliceSpec::Index(i) => {
                    if i >= extent {
                        return Err(PcfError::OutOfBounds {
                            dim,
                            index: i,
                            extent,
                        });
                    }
                    offset += i * stride;
                }
                SliceSpec::Range { start, end, step } => {
                    if step == 0 {
                        return Err(PcfError::InvalidStep);
                    }
                    let end = end.unwrap_or(extent);
                    if end > extent {
                        return Err(PcfError::OutOfBounds {
                            dim,
                            index: end,
                            extent,
                        });
                    }
                    if start >= end {
                        return Err(PcfError::OutOfBounds {
                            dim,
                            index: start,
                            extent,
                        });
                    }
                    offset += start * stride;
                    shape.push((end - start).div_ceil(step));
                    strides.push(stride * step);
                }
            }
        }
        Ok(Layout {
            offset,
            shape,
            strides,
        })
    }

    /// Flat storage offset of a multi-index.
    pub fn offset_of(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.shape.len() {
            return Err(PcfError::BadDimension {
                dim: index.len(),
                rank: self.shape.len(),
            });
        }
        let mut off = self.offset;
        for (dim, ((&i, &extent), &stride)) in
            index.iter().zip(&self.shape).zip(&self.strides).enumerate()
        {
            if i >= extent {
                return Err(PcfError::OutOfBounds {
                    dim,
                    index: i,
                    extent,
                });
            }
            off += i * stride;
        }
        Ok(off)
    }

    /// Flat offsets of all addressed elements in row-major order.
    pub fn offsets(&self) -> impl Iterator<Item = usize> + '_ {
        let total = self.size();
        let mut index = alloc::vec![0usize; self.shape.len()];
        let mut off = self.offset;
        (0..total).map(move |k| {
            if k > 0 {
                // odometer increment
                for d in (0..index.len()).rev() {
                    index[d] += 1;
                    off += self.strides[d];
                    if index[d] < self.shape[d] {
                        break;
                    }
                    off -= index[d] * self.strides[d];
                    index[d] = 0;
                }
            }
            off
        })
    }

    /// Layout with dimension `dim` removed, plus that dimension's extent and
    /// stride.
    fn without(&self, dim: usize) -> (Layout, usize, usize) {
        let mut rest = self.clone();
        let extent = rest.shape.remove(dim);
        let stride = rest.strides.remove(dim);
        (rest, extent, stride)
    }
}

/// Row-major array of shared PCF handles.
#[derive(Clone, Debug, PartialEq)]
pub struct PcfArray<T> {
    shape: Vec<usize>,
    data: Vec<Arc<Pcf<T>>>,
}

fn check_extents(shape: &[usize]) -> Result<()> {
    if shape.contains(&0) {
        return Err(PcfError::ZeroExtent);
    }
    Ok(())
}

impl<T: Scalar> PcfArray<T> {
    /// Array of canonical zero PCFs, all sharing one handle.
    pub fn zeros(shape: &[usize]) -> Result<Self> {
        check_extents(shape)?;
        let zero = Arc::new(Pcf::zero());
        Ok(PcfArray {
            shape: shape.to_vec(),
            data: alloc::vec![zero; shape.iter().product()],
        })
    }

    pub fn from_vec(shape: &[usize], items: Vec<Pcf<T>>) -> Result<Self> {
        Self::from_handles(shape, items.into_iter().map(Arc::new).collect())
    }

    pub fn from_handles(shape: &[usize], data: Vec<Arc<Pcf<T>>>) -> Result<Self> {
        check_extents(shape)?;
        let size: usize = shape.iter().product();
        if size != data.len() {
            return Err(PcfError::ShapeMismatch {
                expected: shape.to_vec(),
                got: alloc::vec![data.len()],
            });
        }
        Ok(PcfArray {
            shape: shape.to_vec(),
            data,
        })
    }

    /// One-dimensional array.
    pub fn from_pcfs(items: Vec<Pcf<T>>) -> Result<Self> {
        let n = items.len();
        Self::from_vec(&[n], items)
    }

    pub fn shape(&self) -> Shape {
        Shape(self.shape.clone())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, index: &[usize]) -> Result<&Pcf<T>> {
        let off = Layout::contiguous(&self.shape).offset_of(index)?;
        Ok(&self.data[off])
    }

    pub fn set(&mut self, index: &[usize], f: Pcf<T>) -> Result<()> {
        let off = Layout::contiguous(&self.shape).offset_of(index)?;
        self.data[off] = Arc::new(f);
        Ok(())
    }

    /// Elements in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = &Pcf<T>> {
        self.data.iter().map(|f| &**f)
    }

    pub fn handles(&self) -> &[Arc<Pcf<T>>] {
        &self.data
    }

    pub fn view(&self) -> PcfView<'_, T> {
        PcfView {
            data: &self.data,
            layout: Layout::contiguous(&self.shape),
        }
    }

    pub fn slice(&self, specs: &[SliceSpec]) -> Result<PcfView<'_, T>> {
        self.view().slice(specs)
    }

    pub fn slice_mut(&mut self, specs: &[SliceSpec]) -> Result<PcfViewMut<'_, T>> {
        let layout = Layout::contiguous(&self.shape).slice(specs)?;
        Ok(PcfViewMut {
            data: &mut self.data,
            layout,
        })
    }

    /// Mean over dimension `dim`, which is removed from the result.
    pub fn mean_along(&self, dim: usize) -> Result<PcfArray<T>> {
        self.view().mean_along(dim)
    }
}

/// Read-only strided view into a [`PcfArray`].
#[derive(Clone, Debug)]
pub struct PcfView<'a, T> {
    data: &'a [Arc<Pcf<T>>],
    layout: Layout,
}

impl<'a, T: Scalar> PcfView<'a, T> {
    pub fn shape(&self) -> Shape {
        Shape(self.layout.shape.clone())
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.layout.size()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, index: &[usize]) -> Result<&'a Pcf<T>> {
        Ok(&self.data[self.layout.offset_of(index)?])
    }

    pub fn slice(&self, specs: &[SliceSpec]) -> Result<PcfView<'a, T>> {
        Ok(PcfView {
            data: self.data,
            layout: self.layout.slice(specs)?,
        })
    }

    /// Addressed elements in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = &'a Pcf<T>> + '_ {
        let data = self.data;
        self.layout.offsets().map(move |o| &*data[o])
    }

    pub fn handles(&self) -> impl Iterator<Item = Arc<Pcf<T>>> + '_ {
        let data = self.data;
        self.layout.offsets().map(move |o| data[o].clone())
    }

    /// Compact copy of the addressed handles (point buffers are shared).
    pub fn to_array(&self) -> PcfArray<T> {
        PcfArray {
            shape: self.layout.shape.clone(),
            data: self.handles().collect(),
        }
    }

    pub fn mean_along(&self, dim: usize) -> Result<PcfArray<T>> {
        let rank = self.layout.shape.len();
        if dim >= rank {
            return Err(PcfError::BadDimension { dim, rank });
        }
        let (rest, extent, stride) = self.layout.without(dim);
        let mut out = Vec::with_capacity(rest.size());
        let mut fiber: Vec<&Pcf<T>> = Vec::with_capacity(extent);
        for base in rest.offsets() {
            fiber.clear();
            fiber.extend((0..extent).map(|k| &*self.data[base + k * stride]));
            out.push(Arc::new(mean(&fiber)?));
        }
        Ok(PcfArray {
            shape: rest.shape,
            data: out,
        })
    }
}

/// Mutable strided view; writes go to the parent array's storage.
#[derive(Debug)]
pub struct PcfViewMut<'a, T> {
    data: &'a mut [Arc<Pcf<T>>],
    layout: Layout,
}

impl<T: Scalar> PcfViewMut<'_, T> {
    pub fn shape(&self) -> Shape {
        Shape(self.layout.shape.clone())
    }

    pub fn set(&mut self, index: &[usize], f: Pcf<T>) -> Result<()> {
        let off = self.layout.offset_of(index)?;
        self.data[off] = Arc::new(f);
        Ok(())
    }

    /// Replaces every addressed element with the corresponding element of
    /// `source`; shapes must match exactly.
    pub fn assign(&mut self, source: &PcfView<'_, T>) -> Result<()> {
        if source.layout.shape != self.layout.shape {
            return Err(PcfError::ShapeMismatch {
                expected: self.layout.shape.clone(),
                got: source.layout.shape.clone(),
            });
        }
        let offsets: Vec<usize> = self.layout.offsets().collect();
        for (off, f) in offsets.into_iter().zip(source.handles()) {
            self.data[off] = f;
        }
        Ok(())
    }

    pub fn assign_array(&mut self, source: &PcfArray<T>) -> Result<()> {
        self.assign(&source.view())
    }

    /// Sets every addressed element to `f`.
    pub fn fill(&mut self, f: Pcf<T>) {
        let f = Arc::new(f);
        let offsets: Vec<usize> = self.layout.offsets().collect();
        for off in offsets {
            self.data[off] = f.clone();
        }
    }
}
