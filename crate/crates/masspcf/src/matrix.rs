//! Pairwise integrated combination matrices (distance and Gram matrices).
//!
//! Rows are split into contiguous block rows. Workers pull whole blocks from
//! a shared queue as they go idle, since the cost of a block depends on the
//! PCFs in it and cannot be predicted. Every entry is computed by exactly one
//! worker with a fixed summation order, so the output does not depend on the
//! worker count. For symmetric integrals only the upper triangle is
//! evaluated and each value is written to both `(i, j)` and `(j, i)`.
//!
//! Results are collected on the calling thread, which also reports progress
//! after every block and checks for cancellation.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;

use masspcf_core::{CombinationIntegral, L2InnerProduct, LpDistance, Pcf, PcfError, Scalar};

use crate::error::Error;
use crate::workers::resolve_workers;
use crate::Result;

/// Largest output a single block row may hold.
pub const MAX_BLOCK_BYTES: usize = 64 << 20;

/// Below this many estimated rectangle visits the job runs on one worker.
pub const SERIAL_WORK_THRESHOLD: u64 = 1 << 20;

/// Dense row-major `M × M` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseMatrix<T> {
    size: usize,
    data: Vec<T>,
    symmetric: bool,
}

impl<T: Scalar> PairwiseMatrix<T> {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.size.max(1))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_nested(&self) -> Vec<Vec<T>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.size;
        let mut data = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        PairwiseMatrix {
            size: n,
            data,
            symmetric: self.symmetric,
        }
    }
}

/// Contiguous, disjoint, covering partition of `0..M` into row blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockRowSchedule {
    blocks: Vec<Range<usize>>,
}

impl BlockRowSchedule {
    pub fn new(rows: usize, block_height: usize) -> Self {
        let h = block_height.max(1);
        let blocks = (0..rows).step_by(h).map(|s| s..(s + h).min(rows)).collect();
        BlockRowSchedule { blocks }
    }

    /// `max(1, ⌈M / (8 · workers)⌉)`, capped so that one block's output fits
    /// in [`MAX_BLOCK_BYTES`].
    pub fn default_height(rows: usize, workers: usize, elem_bytes: usize) -> usize {
        let h = rows.div_ceil(8 * workers.max(1)).max(1);
        let cap = (MAX_BLOCK_BYTES / (rows.max(1) * elem_bytes.max(1))).max(1);
        h.min(cap)
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Shared flag for interrupting a running job between rows.
#[derive(Clone, Debug, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

/// Instrumentation of a finished job.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JobStats {
    /// Number of integral evaluations performed.
    pub entries_computed: u64,
    pub blocks: usize,
    pub workers: usize,
}

/// Which columns of row `i` get evaluated.
#[derive(Clone, Copy)]
struct Pattern {
    symmetric: bool,
    zero_diagonal: bool,
}

impl Pattern {
    fn columns(self, i: usize, m: usize) -> Range<usize> {
        match (self.symmetric, self.zero_diagonal) {
            (true, true) => i + 1..m,
            (true, false) => i..m,
            (false, _) => 0..m,
        }
    }

    fn skips(self, i: usize, j: usize) -> bool {
        !self.symmetric && self.zero_diagonal && i == j
    }

    fn entries(self, rows: Range<usize>, m: usize) -> u64 {
        rows.map(|i| {
            let c = self.columns(i, m);
            let n = c.len() as u64;
            if !self.symmetric && self.zero_diagonal {
                n - 1
            } else {
                n
            }
        })
        .sum()
    }
}

struct BlockResult<T> {
    rows: Range<usize>,
    /// Values of the evaluated columns, row after row.
    values: Vec<T>,
    entries: u64,
    error: Option<(usize, usize, PcfError)>,
    /// Stopped early by cancellation; `values` is incomplete.
    partial: bool,
}

type ProgressSink<'a> = Box<dyn FnMut(f64) + 'a>;

/// A pairwise matrix computation, configured builder-style and executed
/// with [`PairwiseJob::run`].
pub struct PairwiseJob<'a, T, F> {
    items: &'a [Pcf<T>],
    integral: &'a F,
    workers: Option<usize>,
    block_height: Option<usize>,
    progress: Option<ProgressSink<'a>>,
    cancel: CancelToken,
    serial_fallback: bool,
}

impl<'a, T, F> PairwiseJob<'a, T, F>
where
    T: Scalar,
    F: CombinationIntegral<T> + Sync,
{
    pub fn new(items: &'a [Pcf<T>], integral: &'a F) -> Self {
        PairwiseJob {
            items,
            integral,
            workers: None,
            block_height: None,
            progress: None,
            cancel: CancelToken::new(),
            serial_fallback: true,
        }
    }

    /// `None` resolves through [`resolve_workers`].
    pub fn workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn block_height(mut self, rows: usize) -> Self {
        self.block_height = Some(rows.max(1));
        self
    }

    /// Runs with exactly the requested worker count even for tiny inputs.
    pub fn no_serial_fallback(mut self) -> Self {
        self.serial_fallback = false;
        self
    }

    /// `sink` receives the completed fraction after every block, on the
    /// calling thread; the values are non-decreasing and the last is `1.0`.
    pub fn on_progress(mut self, sink: impl FnMut(f64) + 'a) -> Self {
        self.progress = Some(Box::new(sink));
        self
    }

    pub fn cancel_token(mut self, token: CancelToken) -> Self {
        self.cancel = token;
        self
    }

    pub fn run(self) -> Result<PairwiseMatrix<T>> {
        self.run_instrumented().map(|(m, _)| m)
    }

    pub fn run_instrumented(mut self) -> Result<(PairwiseMatrix<T>, JobStats)> {
        let m = self.items.len();
        if m == 0 {
            return Err(PcfError::EmptyCollection.into());
        }
        let pattern = Pattern {
            symmetric: self.integral.is_symmetric(),
            zero_diagonal: self.integral.has_zero_diagonal(),
        };
        let total = pattern.entries(0..m, m);
        let mut workers = resolve_workers(self.workers);
        if self.serial_fallback {
            let avg_len = self.items.iter().map(Pcf::len).sum::<usize>() as u64 / m as u64;
            if total.saturating_mul(2 * avg_len) < SERIAL_WORK_THRESHOLD {
                workers = 1;
            }
        }
        let height = self.block_height.unwrap_or_else(|| {
            BlockRowSchedule::default_height(m, workers, std::mem::size_of::<T>())
        });
        let schedule = BlockRowSchedule::new(m, height);
        workers = workers.min(schedule.len());

        let mut data = vec![T::ZERO; m * m];
        let next_block = AtomicUsize::new(0);
        let abort = AtomicBool::new(false);
        let (tx, rx) = mpsc::channel::<BlockResult<T>>();
        let items = self.items;
        let integral = self.integral;
        let cancel = &self.cancel;
        let blocks = schedule.blocks();

        let mut done: u64 = 0;
        let mut computed: u64 = 0;
        let mut first_error: Option<(usize, usize, PcfError)> = None;

        thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let (next_block, abort) = (&next_block, &abort);
                scope.spawn(move || loop {
                    if abort.load(Ordering::Relaxed) || cancel.is_cancelled() {
                        return;
                    }
                    let b = next_block.fetch_add(1, Ordering::Relaxed);
                    let Some(rows) = blocks.get(b) else {
                        return;
                    };
                    let result = compute_block(items, integral, pattern, rows.clone(), cancel);
                    if result.error.is_some() {
                        abort.store(true, Ordering::Relaxed);
                    }
                    if tx.send(result).is_err() {
                        return;
                    }
                });
            }
            drop(tx);

            for result in rx {
                computed += result.entries;
                if let Some(e) = result.error {
                    if first_error.as_ref().is_none_or(|f| (e.0, e.1) < (f.0, f.1)) {
                        first_error = Some(e);
                    }
                    continue;
                }
                if result.partial {
                    continue;
                }
                let mut values = result.values.into_iter();
                for i in result.rows {
                    for j in pattern.columns(i, m) {
                        if pattern.skips(i, j) {
                            continue;
                        }
                        let v = values.next().expect("block result covers its columns");
                        data[i * m + j] = v;
                        if pattern.symmetric {
                            data[j * m + i] = v;
                        }
                    }
                }
                done += result.entries;
                if let Some(sink) = self.progress.as_mut() {
                    if !cancel.is_cancelled() {
                        sink(if total == 0 {
                            1.0
                        } else {
                            done as f64 / total as f64
                        });
                    }
                }
            }
        });

        if let Some((row, col, source)) = first_error {
            return Err(Error::Pair { row, col, source });
        }
        if self.cancel.is_cancelled() {
            return Err(Error::Cancelled);
        }
        debug_assert_eq!(done, total);
        let stats = JobStats {
            entries_computed: computed,
            blocks: schedule.len(),
            workers,
        };
        Ok((
            PairwiseMatrix {
                size: m,
                data,
                symmetric: pattern.symmetric,
            },
            stats,
        ))
    }
}

fn compute_block<T, F>(
    items: &[Pcf<T>],
    integral: &F,
    pattern: Pattern,
    rows: Range<usize>,
    cancel: &CancelToken,
) -> BlockResult<T>
where
    T: Scalar,
    F: CombinationIntegral<T>,
{
    let m = items.len();
    let mut values = Vec::with_capacity(pattern.entries(rows.clone(), m) as usize);
    let mut entries = 0;
    for i in rows.clone() {
        if cancel.is_cancelled() {
            return BlockResult {
                rows,
                values,
                entries,
                error: None,
                partial: true,
            };
        }
        for j in pattern.columns(i, m) {
            if pattern.skips(i, j) {
                continue;
            }
            entries += 1;
            match integral.evaluate(&items[i], &items[j]) {
                Ok(v) => values.push(v),
                Err(e) => {
                    return BlockResult {
                        rows,
                        values,
                        entries,
                        error: Some((i, j, e)),
                        partial: true,
                    }
                }
            }
        }
    }
    BlockResult {
        rows,
        values,
        entries,
        error: None,
        partial: false,
    }
}

/// Matrix of `integral` over all pairs of `items`.
pub fn pairwise<T, F>(
    items: &[Pcf<T>],
    integral: &F,
    workers: Option<usize>,
) -> Result<PairwiseMatrix<T>>
where
    T: Scalar,
    F: CombinationIntegral<T> + Sync,
{
    PairwiseJob::new(items, integral).workers(workers).run()
}

/// `L_p` distance matrix over `[0, ∞)`.
pub fn pdist<T: Scalar>(
    items: &[Pcf<T>],
    p: f64,
    workers: Option<usize>,
) -> Result<PairwiseMatrix<T>> {
    pairwise(items, &LpDistance::new(p)?, workers)
}

/// `L_2` Gram matrix over `[0, ∞)`.
pub fn l2_kernel<T: Scalar>(items: &[Pcf<T>], workers: Option<usize>) -> Result<PairwiseMatrix<T>> {
    pairwise(items, &L2InnerProduct::default(), workers)
}
