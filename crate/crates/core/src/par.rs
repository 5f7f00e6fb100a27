//! Execution policy for the data-parallel loops (shift sweeps, index maps,
//! search branches, random trials).
//!
//! With the `parallel` feature the work runs on a rayon pool sized by
//! [`Parallelism`]; without it every policy degrades to a plain sequential
//! loop. Outputs are always collected in input order, so results do not
//! depend on the worker count.

/// How many workers a data-parallel loop may use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    #[default]
    Sequential,
    /// Rayon's global pool.
    Auto,
    /// A dedicated pool with this many threads.
    Threads(usize),
}

impl Parallelism {
    /// `0` selects [`Parallelism::Auto`], `1` sequential, otherwise a pool of
    /// `jobs` threads.
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            0 => Parallelism::Auto,
            1 => Parallelism::Sequential,
            n => Parallelism::Threads(n),
        }
    }

    pub fn is_sequential(self) -> bool {
        !cfg!(feature = "parallel") || self == Parallelism::Sequential
    }
}

/// Number of workers the policy runs on.
pub fn workers(par: Parallelism) -> usize {
    #[cfg(feature = "parallel")]
    {
        match par {
            Parallelism::Sequential => 1,
            Parallelism::Auto => rayon::current_num_threads(),
            Parallelism::Threads(n) => n.max(1),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = par;
        1
    }
}

/// Ordered map over a slice.
pub fn map<T, R, F>(items: &[T], par: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match par {
            Parallelism::Sequential => items.iter().map(f).collect(),
            Parallelism::Auto => items.par_iter().map(f).collect(),
            Parallelism::Threads(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build()
            {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(_) => items.iter().map(f).collect(),
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = par;
        items.iter().map(f).collect()
    }
}

/// Ordered map over `0..n`.
pub fn map_range<R, F>(n: usize, par: Parallelism, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    map(&idx, par, |&i| f(i))
}
