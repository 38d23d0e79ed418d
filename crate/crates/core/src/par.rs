//! Index-ordered fan-out that runs on rayon when the `parallel` feature is on.

use crate::error::Result;

/// Evaluate `f(i)` for every `i` in `range`, returning results in index order.
/// The first error (in index order) wins.
pub fn map_indices<T, F>(range: std::ops::Range<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        range.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).collect()
    }
}
