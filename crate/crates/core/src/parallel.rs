//! Worker-pool plumbing shared by the trajectory-averaging routines.

use crate::error::{Error, Result};

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool when `None`.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::param("threads", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Splits `0..total` into fixed-size blocks; the split never depends on the worker count.
pub fn blocks(total: usize, block: usize) -> impl Iterator<Item = std::ops::Range<usize>> + Clone {
    let block = block.max(1);
    (0..total.div_ceil(block)).map(move |b| b * block..((b + 1) * block).min(total))
}
