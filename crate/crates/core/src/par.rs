//! Order-preserving parallel map used by every assembly loop.
//!
//! Each index is computed independently and results are returned in index
//! order, so reductions performed afterwards do not depend on the thread count.

use crate::prelude::*;

#[cfg(feature = "std")]
pub(crate) fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "std"))]
pub(crate) fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
