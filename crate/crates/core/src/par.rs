//! Order-preserving map over an index range, parallel when the `parallel`
//! feature is enabled.

#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: u64, f: F) -> Vec<R>
where
    F: Fn(u64) -> R,
{
    (0..n).map(f).collect()
}
