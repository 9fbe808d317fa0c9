//! Dense row-major 2-D tensors and the arithmetic kernels shared by the
//! taped (autodiff) and plain (inference) execution paths.
//!
//! Keeping one set of kernels means a sampled rollout and a later gradient
//! pass see bit-identical forward arithmetic.

use serde::{Deserialize, Serialize};

use crate::{PolicyError, Result};

/// A `rows x cols` matrix of `f64`. Scalars are `1 x 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![value],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(PolicyError::ShapeMismatch {
                context: "Tensor::from_vec",
                expected: (rows, cols),
                actual: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Stack equal-length rows into a matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(PolicyError::ShapeMismatch {
                    context: "Tensor::from_rows",
                    expected: (1, cols),
                    actual: (1, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.data[index * self.cols..(index + 1) * self.cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    /// The single entry of a `1 x 1` tensor.
    pub fn item(&self) -> Result<f64> {
        if self.rows * self.cols != 1 {
            return Err(PolicyError::NonScalar {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.data[0])
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Kernels. Shape agreement is the caller's contract; these assert it.
// ---------------------------------------------------------------------------

/// `a (r x k) * b (k x c) -> (r x c)`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.cols, b.rows, "matmul inner dimensions");
    let mut out = Tensor::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let a_row = a.row(i);
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a_row.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    out
}

/// `a (r x k) * b^T` where `b` is `(c x k)` -> `(r x c)`.
pub fn matmul_nt(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.cols, b.cols, "matmul_nt inner dimensions");
    let mut out = Tensor::zeros(a.rows, b.rows);
    for i in 0..a.rows {
        let a_row = a.row(i);
        for j in 0..b.rows {
            let b_row = b.row(j);
            let mut acc = 0.0;
            for (x, y) in a_row.iter().zip(b_row) {
                acc += x * y;
            }
            out.data[i * b.rows + j] = acc;
        }
    }
    out
}

/// `a^T * b` where `a` is `(k x r)`, `b` is `(k x c)` -> `(r x c)`.
pub fn matmul_tn(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.rows, b.rows, "matmul_tn inner dimensions");
    let mut out = Tensor::zeros(a.cols, b.cols);
    for k in 0..a.rows {
        let a_row = a.row(k);
        let b_row = b.row(k);
        for (i, &aki) in a_row.iter().enumerate() {
            if aki == 0.0 {
                continue;
            }
            let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aki * bkj;
            }
        }
    }
    out
}

pub fn zip(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    assert_eq!(a.shape(), b.shape(), "elementwise shape");
    Tensor {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

/// Broadcast a `1 x c` row over every row of `x (r x c)`.
pub fn zip_row(x: &Tensor, row: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    assert_eq!(row.rows, 1, "broadcast row must be 1 x c");
    assert_eq!(x.cols, row.cols, "broadcast width");
    let mut out = Tensor::zeros(x.rows, x.cols);
    for i in 0..x.rows {
        for j in 0..x.cols {
            out.data[i * x.cols + j] = f(x.data[i * x.cols + j], row.data[j]);
        }
    }
    out
}

/// Column sums of `x (r x c)` -> `1 x c`.
pub fn col_sum(x: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(1, x.cols);
    for i in 0..x.rows {
        for j in 0..x.cols {
            out.data[j] += x.data[i * x.cols + j];
        }
    }
    out
}

/// Row sums of `x (r x c)` -> `r x 1`.
pub fn row_sum(x: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(x.rows, 1);
    for i in 0..x.rows {
        out.data[i] = x.row(i).iter().sum();
    }
    out
}

pub fn accumulate(target: &mut Tensor, addend: &Tensor) {
    assert_eq!(target.shape(), addend.shape(), "accumulate shape");
    for (t, &a) in target.data.iter_mut().zip(&addend.data) {
        *t += a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small_known() {
        let a = Tensor::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = Tensor::from_vec(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = matmul(&a, &b);
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn transposed_variants_agree_with_explicit_transpose() {
        let a = Tensor::from_vec(2, 3, vec![1.0, -2.0, 0.5, 3.0, 1.0, -1.0]).unwrap();
        let b = Tensor::from_vec(4, 3, vec![2.0, 0.0, 1.0, -1.0, 1.0, 0.5, 0.0, 2.0, -2.0, 1.0, 1.0, 1.0]).unwrap();
        // a * b^T via matmul of manual transpose.
        let mut bt = Tensor::zeros(3, 4);
        for i in 0..4 {
            for j in 0..3 {
                bt.set(j, i, b.get(i, j));
            }
        }
        assert_eq!(matmul_nt(&a, &b), matmul(&a, &bt));

        let c = Tensor::from_vec(2, 4, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let mut at = Tensor::zeros(3, 2);
        for i in 0..2 {
            for j in 0..3 {
                at.set(j, i, a.get(i, j));
            }
        }
        assert_eq!(matmul_tn(&a, &c), matmul(&at, &c));
    }

    #[test]
    fn row_and_col_sums() {
        let x = Tensor::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(row_sum(&x).data(), &[6.0, 15.0]);
        assert_eq!(col_sum(&x).data(), &[5.0, 7.0, 9.0]);
    }
}
