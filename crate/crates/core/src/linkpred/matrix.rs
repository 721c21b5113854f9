//! Row-major dense and CSR sparse matrices with the handful of products the
//! GCN needs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "dense matrix shape");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self · other`
    pub fn matmul(&self, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Dense::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let o = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if *a != 0.0 {
                    for (x, b) in o.iter_mut().zip(other.row(k)) {
                        *x += a * b;
                    }
                }
            }
        }
        out
    }

    /// `selfᵀ · other`
    pub fn t_matmul(&self, other: &Dense) -> Dense {
        assert_eq!(self.rows, other.rows, "t_matmul shape");
        let mut out = Dense::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let b = other.row(k);
            for (i, a) in self.row(k).iter().enumerate() {
                if *a != 0.0 {
                    for (x, y) in out.row_mut(i).iter_mut().zip(b) {
                        *x += a * y;
                    }
                }
            }
        }
        out
    }

    /// `self · otherᵀ`
    pub fn matmul_t(&self, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.cols, "matmul_t shape");
        let mut out = Dense::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                out.data[i * other.rows + j] = dot(self.row(i), other.row(j));
            }
        }
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += a · other`
    pub fn axpy(&mut self, a: f64, other: &Dense) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "axpy shape");
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compressed sparse rows; column indices sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Duplicate coordinates are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (i, j, v) in entries {
            assert!(i < rows && j < cols, "triplet out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            indptr[i + 1] += 1;
            indices.push(j);
            values.push(v);
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Self { rows, cols, indptr, indices, values }
    }

    pub fn from_dense(d: &Dense) -> Self {
        let mut t = Vec::new();
        for i in 0..d.rows {
            for (j, v) in d.row(i).iter().enumerate() {
                if *v != 0.0 {
                    t.push((i, j, *v));
                }
            }
        }
        Self::from_triplets(d.rows, d.cols, t)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Dense {
        let mut d = Dense::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                d.set(i, j, v);
            }
        }
        d
    }

    fn row_times(&self, i: usize, b: &Dense, out: &mut [f64]) {
        for (k, a) in self.row(i) {
            for (x, y) in out.iter_mut().zip(b.row(k)) {
                *x += a * y;
            }
        }
    }

    /// `self · b`. Rows are independent, so the parallel path gives the same
    /// bits as the serial one.
    pub fn mul_dense(&self, b: &Dense, parallel: bool) -> Dense {
        assert_eq!(self.cols, b.rows, "spmm shape");
        let mut out = Dense::zeros(self.rows, b.cols);
        if b.cols == 0 {
            return out;
        }
        if parallel {
            out.data.par_chunks_mut(b.cols).enumerate().for_each(|(i, o)| self.row_times(i, b, o));
        } else {
            out.data.chunks_mut(b.cols).enumerate().for_each(|(i, o)| self.row_times(i, b, o));
        }
        out
    }

    /// `selfᵀ · b`
    pub fn t_mul_dense(&self, b: &Dense) -> Dense {
        assert_eq!(self.rows, b.rows, "spmm_t shape");
        let mut out = Dense::zeros(self.cols, b.cols);
        for k in 0..self.rows {
            let src = b.row(k);
            for (j, a) in self.row(k) {
                for (x, y) in out.row_mut(j).iter_mut().zip(src) {
                    *x += a * y;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(a: &Dense, b: &Dense) -> Dense {
        let mut out = Dense::zeros(a.rows, b.cols);
        for i in 0..a.rows {
            for j in 0..b.cols {
                let mut s = 0.0;
                for k in 0..a.cols {
                    s += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    fn transpose(a: &Dense) -> Dense {
        let mut t = Dense::zeros(a.cols, a.rows);
        for i in 0..a.rows {
            for j in 0..a.cols {
                t.set(j, i, a.get(i, j));
            }
        }
        t
    }

    fn close(a: &Dense, b: &Dense) -> bool {
        a.rows == b.rows && a.cols == b.cols && a.data.iter().zip(&b.data).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    fn mat(rows: usize, cols: usize) -> impl Strategy<Value = Dense> {
        prop::collection::vec(prop_oneof![Just(0.0), -3.0f64..3.0], rows * cols)
            .prop_map(move |d| Dense::from_vec(rows, cols, d))
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = Csr::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5)]);
        assert_eq!(m.indptr, [0, 1, 2]);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(1, 0), 0.0);
    }

    proptest! {
        #[test]
        fn products_match_naive(a in mat(4, 3), b in mat(3, 5), c in mat(4, 5), e in mat(6, 3)) {
            prop_assert!(close(&a.matmul(&b), &naive(&a, &b)));
            prop_assert!(close(&a.t_matmul(&c), &naive(&transpose(&a), &c)));
            prop_assert!(close(&a.matmul_t(&e), &naive(&a, &transpose(&e))));
            let s = Csr::from_dense(&a);
            prop_assert_eq!(s.to_dense(), a.clone());
            prop_assert!(close(&s.mul_dense(&b, false), &naive(&a, &b)));
            prop_assert_eq!(s.mul_dense(&b, true), s.mul_dense(&b, false));
            prop_assert!(close(&s.t_mul_dense(&c), &naive(&transpose(&a), &c)));
        }
    }
}
