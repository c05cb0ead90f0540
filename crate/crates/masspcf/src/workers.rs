//! Worker-count resolution.

use std::num::NonZeroUsize;
use std::thread;

/// Environment variable overriding the automatic worker count.
pub const THREADS_ENV: &str = "MASSPCF_THREADS";

/// An explicit request wins, then `MASSPCF_THREADS`, then the number of
/// available cores.
pub fn resolve_workers(requested: Option<usize>) -> usize {
    if let Some(n) = requested.filter(|&n| n > 0) {
        return n;
    }
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(available)
}

pub fn available() -> usize {
    thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
}
