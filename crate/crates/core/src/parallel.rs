use rayon::ThreadPool;

use crate::{Error, Result};

/// Either a dedicated pool of a fixed size or the global rayon pool.
pub(crate) struct Workers(Option<ThreadPool>);

impl Workers {
    pub(crate) fn new(threads: Option<usize>) -> Result<Self> {
        match threads {
            None => Ok(Workers(None)),
            Some(0) => Err(Error::Usage("thread count must be at least 1".into())),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map(|p| Workers(Some(p)))
                .map_err(|e| Error::Usage(format!("cannot build thread pool: {e}"))),
        }
    }

    pub(crate) fn install<T, F>(&self, f: F) -> T
    where
        T: Send,
        F: FnOnce() -> T + Send,
    {
        match &self.0 {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }
}

pub(crate) fn install<T, F>(threads: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    Ok(Workers::new(threads)?.install(f))
}
