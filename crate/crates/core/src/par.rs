//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over a rayon pool;
//! without it, or when a single worker is requested, items are processed in
//! order on the calling thread. Output order always matches input order.

/// How many workers a computation may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Single thread, input order.
    Sequential,
    /// The global rayon pool.
    #[default]
    Parallel,
    /// A dedicated pool with this many threads.
    Workers(usize),
}

impl Execution {
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            None | Some(0) => Execution::Parallel,
            Some(1) => Execution::Sequential,
            Some(n) => Execution::Workers(n),
        }
    }

    pub fn is_sequential(self) -> bool {
        matches!(self, Execution::Sequential) || !cfg!(feature = "parallel")
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match exec {
            Execution::Sequential => items.iter().map(f).collect(),
            Execution::Parallel => items.par_iter().map(f).collect(),
            Execution::Workers(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(_) => items.par_iter().map(f).collect(),
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = exec;
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        for exec in [
            Execution::Sequential,
            Execution::Parallel,
            Execution::Workers(3),
        ] {
            let ys = map(exec, &xs, |x| x * x);
            assert_eq!(ys, xs.iter().map(|x| x * x).collect::<Vec<_>>());
        }
    }

    #[test]
    fn worker_counts() {
        assert_eq!(Execution::from_workers(Some(1)), Execution::Sequential);
        assert_eq!(Execution::from_workers(None), Execution::Parallel);
        assert_eq!(Execution::from_workers(Some(4)), Execution::Workers(4));
    }
}
