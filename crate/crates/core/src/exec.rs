//! Execution strategy for embarrassingly parallel loops.
//!
//! Every parallel loop in the crate goes through [`Exec`], so serial and
//! parallel runs share one code path. Outputs are identical either way: maps
//! collect in index order and reductions are only used for exact integer
//! accumulation.

/// Serial or data-parallel execution. `Parallel` degrades to serial when the
/// crate is built without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Serial,
    #[default]
    Parallel,
}

impl Exec {
    /// `(0..len).map(f)` collected in index order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Folds over `0..len` in per-worker accumulators and merges them. The
    /// result is order-independent only when `fold`/`merge` are exact, as for
    /// integer counts.
    pub fn fold_merge<A, I, F, R>(self, len: usize, identity: I, fold: F, merge: R) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(A, usize) -> A + Sync + Send,
        R: Fn(A, A) -> A + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().fold(&identity, &fold).reduce(&identity, &merge)
            }
            _ => {
                let _ = merge;
                (0..len).fold(identity(), fold)
            }
        }
    }

    /// Applies `f` to every index; the first error in index order wins.
    pub fn try_map<T, E, F>(self, len: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(len, f).into_iter().collect()
    }
}
