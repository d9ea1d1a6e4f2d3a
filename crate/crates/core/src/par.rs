//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the `Parallel` mode runs on the rayon pool;
//! without it both modes run sequentially.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// First `Some` in slice order, whichever worker finds it.
pub fn find_map_first<T, R, F>(items: &[T], exec: Execution, f: F) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter().find_map_first(f);
    }
    let _ = exec;
    items.iter().find_map(f)
}

/// Order-preserving map.
pub fn map<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u32> = (0..1000).collect();
        let f = |&x: &u32| (x % 97 == 41 && x > 300).then_some(x);
        assert_eq!(
            find_map_first(&xs, Execution::Parallel, f),
            find_map_first(&xs, Execution::Sequential, f)
        );
        assert_eq!(find_map_first(&xs, Execution::Parallel, f), Some(332));
        assert_eq!(map(&xs, Execution::Parallel, |x| x * 2), map(&xs, Execution::Sequential, |x| x * 2));
    }
}
