use std::fmt::Write as _;

/// Compressed sparse row matrix.
///
/// Built from triplets: duplicates are summed in insertion order after a
/// stable sort by position, so equal inputs give bit-identical matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: Vec<(usize, usize, f64)>) -> Self {
        // stable bucket pass by row, then a stable sort of each row by column
        let mut start = vec![0usize; nrows + 1];
        for &(r, c, _) in &triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            start[r + 1] += 1;
        }
        for r in 0..nrows {
            start[r + 1] += start[r];
        }
        let mut next = start.clone();
        let mut bucket = vec![(0usize, 0.0f64); triplets.len()];
        for (r, c, v) in triplets {
            bucket[next[r]] = (c, v);
            next[r] += 1;
        }
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(bucket.len());
        let mut values: Vec<f64> = Vec::with_capacity(bucket.len());
        for r in 0..nrows {
            let row = &mut bucket[start[r]..start[r + 1]];
            row.sort_by_key(|&(c, _)| c);
            let mut last = None;
            for &(c, v) in row.iter() {
                if last == Some(c) {
                    *values.last_mut().expect("previous entry exists") += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Row pointers and column indices.
    pub fn pattern(&self) -> (&[usize], &[usize]) {
        (&self.row_ptr, &self.col_idx)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterate the stored entries `(row, col, value)` row by row.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (r, self.col_idx[i], self.values[i]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(i) => self.values[range.start + i],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|i| self.values[i] * x[self.col_idx[i]]).sum())
            .collect()
    }

    /// `self^T x`
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (r, c, v) in self.triplets() {
            y[c] += v * x[r];
        }
        y
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(r, c, v)| (c, r, v)).collect())
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        self.triplets().map(|(r, c, v)| (v - self.get(c, r)).abs()).fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            d[r][c] += v;
        }
        d
    }

    /// Matrix Market coordinate format, 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for (r, c, v) in self.triplets() {
            let _ = writeln!(out, "{} {} {:?}", r + 1, c + 1, v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = SparseOperator::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (0, 1, -1.0)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 2), 1.5);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.matvec(&[1.0, 2.0, 3.0]), vec![0.0, 4.5]);
        assert_eq!(a.matvec_transpose(&[1.0, 2.0]), vec![2.0, -1.0, 3.0]);
        assert_eq!(a.transpose().transpose(), a);
        let mm = a.to_matrix_market();
        assert!(mm.starts_with("%%MatrixMarket matrix coordinate real general\n2 3 3\n1 1 2.0\n"));
    }

    #[test]
    fn asymmetry() {
        let a = SparseOperator::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, 0.75)]);
        assert_eq!(a.max_asymmetry(), 0.25);
    }
}
