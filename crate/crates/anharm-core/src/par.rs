//! Data-parallel map over independent work items.
//!
//! With the `parallel` feature (default) the work runs on the rayon pool;
//! without it the same API falls back to a sequential loop. Output order
//! matches input order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Map `f` over `items`, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Sequential reference path, always available (benchmarks compare against it).
pub fn map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_preserved() {
        let out = map((0..100).collect::<Vec<_>>(), |i| i * i);
        let expect: Vec<_> = (0..100).map(|i| i * i).collect();
        assert_eq!(out, expect);
        assert_eq!(map_seq((0..10).collect(), |i: i32| i + 1), (1..=10).collect::<Vec<_>>());
    }
}
