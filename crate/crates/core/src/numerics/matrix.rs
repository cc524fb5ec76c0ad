use serde::{Deserialize, Serialize};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    /// `self · v`, summing each row left to right.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(v, &mut out);
        out
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.cols, "matvec input length");
        assert_eq!(out.len(), self.rows, "matvec output length");
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols.max(1))) {
            *o = dot(row, v);
        }
    }

    /// `selfᵀ · v`.
    pub fn transpose_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "transpose_matvec input length");
        let mut out = vec![0.0; self.cols];
        for (row, &s) in self.data.chunks_exact(self.cols.max(1)).zip(v) {
            for (o, &w) in out.iter_mut().zip(row) {
                *o += s * w;
            }
        }
        out
    }

    /// `self += scale · u vᵀ` without materializing the outer product.
    pub fn add_outer(&mut self, scale: f64, u: &[f64], v: &[f64]) {
        assert_eq!(u.len(), self.rows, "add_outer row vector");
        assert_eq!(v.len(), self.cols, "add_outer column vector");
        for (row, &ui) in self.data.chunks_exact_mut(self.cols.max(1)).zip(u) {
            let s = scale * ui;
            if s == 0.0 {
                continue;
            }
            for (w, &vj) in row.iter_mut().zip(v) {
                *w += s * vj;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot length");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// `u vᵀ`.
pub fn outer(u: &[f64], v: &[f64]) -> Matrix {
    let mut m = Matrix::zeros(u.len(), v.len());
    m.add_outer(1.0, u, v);
    m
}

/// `accum += scale · a`, elementwise. Works for vectors and (via
/// [`Matrix::as_slice`]) matrices alike.
pub fn axpy(scale: f64, a: &[f64], accum: &mut [f64]) {
    assert_eq!(a.len(), accum.len(), "axpy length");
    if scale == 0.0 {
        return;
    }
    for (acc, &x) in accum.iter_mut().zip(a) {
        *acc += scale * x;
    }
}
