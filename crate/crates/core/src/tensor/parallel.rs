//! Deterministic parallel execution helpers.
//!
//! Work is split into contiguous index ranges, one per worker, and every
//! output element is produced by exactly one worker with a fixed evaluation
//! order inside it. Results are therefore bitwise identical for any worker
//! count. Reductions use a fixed left-to-right pairwise (tree) split that
//! depends only on the length, never on the worker count.

use std::sync::atomic::{AtomicUsize, Ordering};

use super::scalar::Scalar;

static WORKERS: AtomicUsize = AtomicUsize::new(0);

/// Set the process-wide default worker count (0 restores the automatic value).
pub fn set_workers(n: usize) {
    WORKERS.store(n, Ordering::Relaxed);
}

/// Default worker count: explicit setting, else `M2D_WORKERS`, else core count.
pub fn workers() -> usize {
    let n = WORKERS.load(Ordering::Relaxed);
    if n > 0 {
        return n;
    }
    if let Ok(v) = std::env::var("M2D_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Run `body` over `0..n` split into at most `workers` contiguous ranges.
///
/// `body` receives a range and must only write outputs owned by indices in
/// that range; determinism follows because range boundaries never change what
/// a single index computes.
pub fn for_each_range<F>(n: usize, workers: usize, body: F)
where
    F: Fn(std::ops::Range<usize>) + Sync,
{
    let workers = workers.max(1).min(n.max(1));
    if workers == 1 || n < 2 {
        body(0..n);
        return;
    }
    let chunk = n.div_ceil(workers);
    std::thread::scope(|scope| {
        for w in 0..workers {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(n);
            if lo >= hi {
                break;
            }
            let body = &body;
            scope.spawn(move || body(lo..hi));
        }
    });
}

const TREE_LEAF: usize = 16;

/// Fixed-order pairwise (tree) sum; the split depends only on the length.
pub fn tree_sum<T: Scalar>(xs: &[T]) -> T {
    if xs.len() <= TREE_LEAF {
        let mut acc = T::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
}

/// Fixed-order pairwise (tree) dot product.
pub fn tree_dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= TREE_LEAF {
        let mut acc = T::zero();
        for (&x, &y) in a.iter().zip(b) {
            acc += x * y;
        }
        return acc;
    }
    let mid = a.len() / 2;
    tree_dot(&a[..mid], &b[..mid]) + tree_dot(&a[mid..], &b[mid..])
}

/// General strided tree dot: `sum_k a[a_off + k*a_stride] * b[b_off + k*b_stride]`
/// over `len` terms, with the same fixed pairwise split as [`tree_dot`].
pub fn tree_dot2<T: Scalar>(
    a: &[T],
    a_off: usize,
    a_stride: usize,
    b: &[T],
    b_off: usize,
    b_stride: usize,
    len: usize,
) -> T {
    if len <= TREE_LEAF {
        let mut acc = T::zero();
        for k in 0..len {
            acc += a[a_off + k * a_stride] * b[b_off + k * b_stride];
        }
        return acc;
    }
    let mid = len / 2;
    tree_dot2(a, a_off, a_stride, b, b_off, b_stride, mid)
        + tree_dot2(
            a,
            a_off + mid * a_stride,
            a_stride,
            b,
            b_off + mid * b_stride,
            b_stride,
            len - mid,
        )
}

/// Strided tree sum over `len` elements starting at `off`.
pub fn tree_sum_strided<T: Scalar>(xs: &[T], off: usize, stride: usize, len: usize) -> T {
    if len <= TREE_LEAF {
        let mut acc = T::zero();
        for k in 0..len {
            acc += xs[off + k * stride];
        }
        return acc;
    }
    let mid = len / 2;
    tree_sum_strided(xs, off, stride, mid)
        + tree_sum_strided(xs, off + mid * stride, stride, len - mid)
}

/// Split `buf` into `rows` rows of `row_len` and run `f(row_index, row)` on
/// each, distributing whole rows over at most `workers` threads. Each row is
/// written by exactly one worker, so output bits never depend on the count.
pub fn for_each_row<T: Send, F>(buf: &mut [T], rows: usize, row_len: usize, workers: usize, f: F)
where
    F: Fn(usize, &mut [T]) + Sync,
{
    debug_assert_eq!(buf.len(), rows * row_len);
    let workers = workers.max(1).min(rows.max(1));
    if workers == 1 || rows <= 1 {
        for (i, row) in buf.chunks_mut(row_len.max(1)).enumerate() {
            f(i, row);
        }
        return;
    }
    let rows_per = rows.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, chunk) in buf.chunks_mut(rows_per * row_len).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (r, row) in chunk.chunks_mut(row_len).enumerate() {
                    f(w * rows_per + r, row);
                }
            });
        }
    });
}

/// Raw mutable pointer that may be sent to worker threads.
///
/// Safety contract for users: every index written through the pointer is owned
/// by exactly one worker (disjoint writes), and the allocation outlives the
/// thread scope.
#[derive(Clone, Copy)]
pub(crate) struct SendPtr<T>(pub *mut T);

unsafe impl<T> Send for SendPtr<T> {}
unsafe impl<T> Sync for SendPtr<T> {}

impl<T> SendPtr<T> {
    #[inline]
    pub(crate) unsafe fn add(&self, off: usize) -> *mut T {
        self.0.add(off)
    }
}
