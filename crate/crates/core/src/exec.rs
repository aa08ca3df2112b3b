//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature disabled every [`Execution`] runs sequentially.

/// How to evaluate independent work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Like [`Execution::map`] but short-circuits on the first error.
    pub fn try_map<T, R, E, F>(self, items: &[T], f: F) -> Result<Vec<R>, E>
    where
        T: Sync,
        R: Send,
        E: Send,
        F: Fn(&T) -> Result<R, E> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Fills `out` chunk by chunk; `f` receives the chunk and its start offset.
    pub fn for_each_chunk<R, F>(self, out: &mut [R], chunk: usize, f: F)
    where
        R: Send,
        F: Fn(&mut [R], usize) + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            out.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(k, c)| f(c, k * chunk));
            return;
        }
        for (k, c) in out.chunks_mut(chunk).enumerate() {
            f(c, k * chunk);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = Execution::Sequential.map(&xs, |x| x * x);
        let b = Execution::Parallel.map(&xs, |x| x * x);
        assert_eq!(a, b);

        let mut out_a = vec![0u64; 1000];
        let mut out_b = vec![0u64; 1000];
        Execution::Sequential.for_each_chunk(&mut out_a, 64, |c, off| {
            for (i, v) in c.iter_mut().enumerate() {
                *v = (off + i) as u64;
            }
        });
        Execution::Parallel.for_each_chunk(&mut out_b, 64, |c, off| {
            for (i, v) in c.iter_mut().enumerate() {
                *v = (off + i) as u64;
            }
        });
        assert_eq!(out_a, out_b);
        assert_eq!(out_a[999], 999);
    }

    #[test]
    fn try_map_propagates_errors() {
        let xs = [1, 2, 3];
        let r: Result<Vec<i32>, &str> =
            Execution::Parallel.try_map(&xs, |&x| if x == 2 { Err("two") } else { Ok(x) });
        assert_eq!(r, Err("two"));
    }
}
