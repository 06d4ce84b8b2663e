//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over a rayon pool;
//! without it, or with [`Parallelism::Sequential`], everything runs on the
//! calling thread. Results are always returned in input order.

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "EHLICH_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

/// Worker count from `EHLICH_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

pub struct Workers {
    mode: Parallelism,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers")
            .field("mode", &self.mode)
            .field("threads", &self.threads())
            .finish()
    }
}

impl Workers {
    pub fn new(mode: Parallelism, threads: Option<usize>) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = match (mode, threads) {
                (Parallelism::Parallel, Some(t)) => Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(t)
                        .build()
                        .expect("failed to build thread pool"),
                ),
                _ => None,
            };
            Self { mode, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = threads;
            Self { mode }
        }
    }

    pub fn sequential() -> Self {
        Self::new(Parallelism::Sequential, None)
    }

    pub fn mode(&self) -> Parallelism {
        self.mode
    }

    pub fn threads(&self) -> usize {
        #[cfg(feature = "parallel")]
        {
            match (&self.mode, &self.pool) {
                (Parallelism::Sequential, _) => 1,
                (_, Some(pool)) => pool.current_num_threads(),
                (_, None) => rayon::current_num_threads(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            1
        }
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.mode == Parallelism::Parallel {
            use rayon::prelude::*;
            return match &self.pool {
                Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                None => items.par_iter().map(&f).collect(),
            };
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<u32> = (0..1000).collect();
        for w in [
            Workers::sequential(),
            Workers::new(Parallelism::Parallel, Some(3)),
            Workers::new(Parallelism::Parallel, None),
        ] {
            let out = w.map(&items, |x| x * 2);
            assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn sequential_reports_one_thread() {
        assert_eq!(Workers::sequential().threads(), 1);
    }
}
