//! Wavefront-parallel forward pass.
//!
//! Workers are spawned once per call and sweep the diagonals in lockstep with
//! a barrier between consecutive diagonals. Within a diagonal the work items
//! are (cell, channel) pairs split into contiguous ranges; every item writes
//! only its own state vector and output scalar, and each item's arithmetic is
//! identical to the sequential kernel (same [`eval_cell`] body), so results
//! are bitwise identical to [`scan2d_sequential`] for every worker count.

use std::sync::{Barrier, Mutex};

use crate::error::{M2dError, Result};
use crate::tensor::parallel::SendPtr;
use crate::tensor::{Scalar, Tensor};

use super::schedule::WavefrontSchedule;
use super::{eval_cell, scan2d_sequential, Dims, HiddenGrid, Scan2dInput};

/// Position of a numeric failure, ordered by schedule position.
type FirstBad = Mutex<Option<(usize, usize, usize)>>; // (diag, item, flat cell-channel id)

pub fn scan2d_wavefront<T: Scalar>(
    input: &Scan2dInput<'_, T>,
    workers: usize,
) -> Result<(Tensor<T>, HiddenGrid<T>)> {
    let dims = input.dims()?;
    let Dims { h, w, d, n } = dims;
    let workers = workers.max(1);
    if workers == 1 {
        // Same cell body, diagonal order instead of raster order; outputs are
        // bitwise equal either way. Delegating keeps the one-worker path free
        // of synchronization.
        return scan2d_sequential(input);
    }

    let sched = WavefrontSchedule::new(h, w);
    let mut grid = vec![T::zero(); h * w * d * n];
    let mut y = vec![T::zero(); h * w * d];

    let xv = input.x.data();
    let btv = input.field.bt.data();
    let bzv = input.field.bz.data();
    let cv = input.field.c.data();
    let dtv = input.field.dt.data();
    let dzv = input.field.dz.data();
    let atv = input.a_t.data();
    let azv = input.a_z.data();
    let dskv = input.d_skip.data();

    let grid_ptr = SendPtr(grid.as_mut_ptr());
    let y_ptr = SendPtr(y.as_mut_ptr());
    let barrier = Barrier::new(workers);
    let first_bad: FirstBad = Mutex::new(None);

    std::thread::scope(|scope| {
        for worker_id in 0..workers {
            let barrier = &barrier;
            let first_bad = &first_bad;
            let sched = &sched;
            scope.spawn(move || {
                for diag in 0..sched.diagonals() {
                    let (row_lo, count) = sched.diagonal_span(diag);
                    let items = count * d;
                    let chunk = items.div_ceil(workers);
                    let lo = (worker_id * chunk).min(items);
                    let hi = ((worker_id + 1) * chunk).min(items);
                    for item in lo..hi {
                        let cell_k = item / d;
                        let ch = item % d;
                        let i = row_lo + cell_k;
                        let j = diag - i;
                        let pos = i * w + j;
                        let cell_off = (pos * d + ch) * n;
                        // Safety: the cell's own slice is written by exactly
                        // this item; neighbour slices belong to diagonal-1,
                        // finished before the barrier released this round.
                        let out = unsafe {
                            std::slice::from_raw_parts_mut(grid_ptr.add(cell_off), n)
                        };
                        let up = (i > 0).then(|| unsafe {
                            let off = (((i - 1) * w + j) * d + ch) * n;
                            std::slice::from_raw_parts(grid_ptr.add(off) as *const T, n)
                        });
                        let left = (j > 0).then(|| unsafe {
                            let off = ((pos - 1) * d + ch) * n;
                            std::slice::from_raw_parts(grid_ptr.add(off) as *const T, n)
                        });
                        let yv = eval_cell(
                            &atv[ch * n * n..(ch + 1) * n * n],
                            &azv[ch * n * n..(ch + 1) * n * n],
                            &btv[pos * n..(pos + 1) * n],
                            &bzv[pos * n..(pos + 1) * n],
                            &cv[pos * n..(pos + 1) * n],
                            dtv[pos * d + ch],
                            dzv[pos * d + ch],
                            xv[pos * d + ch],
                            dskv[ch],
                            up,
                            left,
                            out,
                        );
                        unsafe { *y_ptr.add(pos * d + ch) = yv };
                        if !yv.is_finite() || !out.iter().all(|v| v.is_finite()) {
                            let mut bad = first_bad.lock().unwrap();
                            let key = (diag, item, pos * d + ch);
                            if bad.map_or(true, |prev| key < prev) {
                                *bad = Some(key);
                            }
                        }
                    }
                    barrier.wait();
                    if first_bad.lock().unwrap().is_some() {
                        break;
                    }
                }
            });
        }
    });

    if let Some((_, _, flat)) = *first_bad.lock().unwrap() {
        let pos = flat / d;
        return Err(M2dError::Numeric(format!(
            "non-finite hidden state at cell ({}, {}), channel {}",
            pos / w,
            pos % w,
            flat % d
        )));
    }
    Ok((Tensor::new(vec![h, w, d], y)?, HiddenGrid { h: grid, dims }))
}
