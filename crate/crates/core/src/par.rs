//! Data-parallel helpers. With the `parallel` feature the closures run on
//! the rayon pool, otherwise they run sequentially in index order. Results
//! are always returned in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f).collect()`, possibly in parallel.
#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Applies `f` to every lane of `values` along `axis`.
pub fn for_each_lane_mut<F>(values: &mut ndarray::ArrayD<f64>, axis: usize, f: F)
where
    F: Fn(ndarray::ArrayViewMut1<'_, f64>) + Sync + Send,
{
    let lanes = values.lanes_mut(ndarray::Axis(axis));
    #[cfg(feature = "parallel")]
    ndarray::Zip::from(lanes).par_for_each(f);
    #[cfg(not(feature = "parallel"))]
    ndarray::Zip::from(lanes).for_each(f);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
