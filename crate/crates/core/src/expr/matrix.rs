//! Square matrices of expressions.

use super::eval::{EvalError, Evaluator};
use super::node::Expr;
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Row-major matrix of expressions sharing one chart.
#[derive(Clone, Debug)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl ExprMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Expr::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Expr::one() } else { Expr::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.data[i * self.cols + j] = e;
    }

    pub fn entries(&self) -> &[Expr] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&Expr, &Expr) -> Expr) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let terms: Vec<Expr> = (0..self.cols).map(|k| self.get(i, k) * rhs.get(k, j)).collect();
            Expr::sum(&terms)
        })
    }

    /// Determinant by cofactor expansion along the first row.
    ///
    /// Cost grows factorially; intended for the small fiber dimensions used here.
    pub fn det(&self) -> Expr {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let idx: Vec<usize> = (0..self.rows).collect();
        self.minor_det(&idx, &idx)
    }

    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> Expr {
        match rows.len() {
            0 => Expr::one(),
            1 => self.get(rows[0], cols[0]).clone(),
            2 => {
                self.get(rows[0], cols[0]) * self.get(rows[1], cols[1])
                    - self.get(rows[0], cols[1]) * self.get(rows[1], cols[0])
            }
            _ => {
                let sub_rows = &rows[1..];
                let mut acc = Expr::zero();
                for (k, &c) in cols.iter().enumerate() {
                    let a = self.get(rows[0], c);
                    if a.is_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = a * self.minor_det(sub_rows, &sub_cols);
                    acc = if k % 2 == 0 { acc + term } else { acc - term };
                }
                acc
            }
        }
    }

    /// Symbolic inverse `adj(A) / det(A)`.
    ///
    /// Singularity is not detected here; it surfaces as a division-by-zero
    /// error when the result is evaluated where `det(A) = 0`.
    pub fn inverse(&self) -> Self {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        if n == 1 {
            return Self::from_fn(1, 1, |_, _| Expr::one() / self.get(0, 0));
        }
        let det = self.det();
        let all: Vec<usize> = (0..n).collect();
        Self::from_fn(n, n, |i, j| {
            // adj(A)_ij = (-1)^(i+j) M_ji
            let rows: Vec<usize> = all.iter().copied().filter(|&r| r != j).collect();
            let cols: Vec<usize> = all.iter().copied().filter(|&c| c != i).collect();
            let minor = self.minor_det(&rows, &cols);
            let cof = if (i + j) % 2 == 0 { minor } else { -minor };
            cof / &det
        })
    }

    pub fn eval<T: Scalar>(&self, ev: &mut Evaluator<'_, T>) -> Result<Mat<T>, EvalError> {
        let data = ev.eval_all(&self.data)?;
        Ok(Mat::from_row_major(self.rows, self.cols, data))
    }

    pub fn eval_at<T: Scalar>(&self, point: &[T]) -> Result<Mat<T>, EvalError> {
        self.eval(&mut Evaluator::new(point))
    }
}
