use anyhow::{Context, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "PROJCLUST_THREADS";

/// Runs `f` on a pool sized by `PROJCLUST_THREADS`, or on the global pool
/// when the variable is unset.
pub fn with_threads<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => {
            let threads: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|n| *n >= 1)
                .with_context(|| format!("{THREADS_VAR} must be a positive integer (got '{v}')"))?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}
