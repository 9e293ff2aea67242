//! Anti-diagonal wavefront schedule: diagonal `d` holds the cells
//! `{(i, j) : i + j = d}`, and both dependencies of every cell sit on
//! diagonal `d - 1`, so all cells of a diagonal may run in parallel.

/// Enumeration of the diagonals of an `H x W` grid.
#[derive(Clone, Copy, Debug)]
pub struct WavefrontSchedule {
    h: usize,
    w: usize,
}

impl WavefrontSchedule {
    pub fn new(h: usize, w: usize) -> Self {
        WavefrontSchedule { h, w }
    }

    /// Number of diagonals: `H + W - 1`.
    pub fn diagonals(&self) -> usize {
        self.h + self.w - 1
    }

    /// First row index and cell count of diagonal `d`; cells are
    /// `(row_lo + k, d - row_lo - k)` for `k` in `0..count`, ordered by
    /// ascending row index.
    pub fn diagonal_span(&self, d: usize) -> (usize, usize) {
        let row_lo = d.saturating_sub(self.w - 1);
        let row_hi = d.min(self.h - 1);
        (row_lo, row_hi - row_lo + 1)
    }

    /// Cells of diagonal `d` in schedule order.
    pub fn cells(&self, d: usize) -> impl Iterator<Item = (usize, usize)> {
        let (lo, count) = self.diagonal_span(d);
        (0..count).map(move |k| (lo + k, d - lo - k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_square_has_31_diagonals() {
        assert_eq!(WavefrontSchedule::new(16, 16).diagonals(), 31);
    }

    #[test]
    fn cell_counts_sum_to_grid_size() {
        for (h, w) in [(1, 1), (1, 8), (8, 1), (5, 3), (16, 16), (7, 13)] {
            let s = WavefrontSchedule::new(h, w);
            let total: usize = (0..s.diagonals()).map(|d| s.diagonal_span(d).1).sum();
            assert_eq!(total, h * w, "{h}x{w}");
        }
    }

    #[test]
    fn every_dependency_lies_on_the_previous_diagonal() {
        for (h, w) in [(1, 6), (6, 1), (4, 7), (16, 16)] {
            let s = WavefrontSchedule::new(h, w);
            let mut seen = vec![false; h * w];
            for d in 0..s.diagonals() {
                for (i, j) in s.cells(d) {
                    assert_eq!(i + j, d);
                    assert!(i < h && j < w);
                    assert!(!seen[i * w + j], "cell visited twice");
                    seen[i * w + j] = true;
                    if i > 0 {
                        assert_eq!((i - 1) + j, d - 1);
                    }
                    if j > 0 {
                        assert_eq!(i + (j - 1), d - 1);
                    }
                }
            }
            assert!(seen.iter().all(|&v| v));
        }
    }

    #[test]
    fn cells_are_ordered_by_row_index() {
        let s = WavefrontSchedule::new(4, 4);
        let rows: Vec<usize> = s.cells(3).map(|(i, _)| i).collect();
        assert_eq!(rows, vec![0, 1, 2, 3]);
    }
}
