use num_bigint::BigInt;
use num_traits::Zero;

use crate::scalar::{self, Scalar};

/// The feasibility instance `{x : Ax = b, x >= 0}` with integer data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    rows: usize,
    cols: usize,
    a: Vec<Vec<BigInt>>,
    b: Vec<BigInt>,
}

impl Problem {
    /// Panics if `a` is ragged or `b` does not have one entry per row.
    pub fn new(cols: usize, a: Vec<Vec<BigInt>>, b: Vec<BigInt>) -> Self {
        assert_eq!(a.len(), b.len(), "row count of A and length of b differ");
        assert!(a.iter().all(|r| r.len() == cols), "ragged matrix");
        Problem { rows: a.len(), cols, a, b }
    }

    pub fn from_i64(a: &[&[i64]], b: &[i64]) -> Self {
        let cols = a.first().map_or(0, |r| r.len());
        Self::new(
            cols,
            a.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect(),
            b.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn a(&self) -> &[Vec<BigInt>] {
        &self.a
    }

    pub fn b(&self) -> &[BigInt] {
        &self.b
    }

    /// The subproblem on the given columns (all rows kept).
    pub fn select_columns(&self, cols: &[usize]) -> Problem {
        let a = self
            .a
            .iter()
            .map(|r| cols.iter().map(|&j| r[j].clone()).collect())
            .collect();
        Problem::new(cols.len(), a, self.b.clone())
    }

    /// The subproblem on the given rows.
    pub fn select_rows(&self, rows: &[usize]) -> Problem {
        Problem::new(
            self.cols,
            rows.iter().map(|&i| self.a[i].clone()).collect(),
            rows.iter().map(|&i| self.b[i].clone()).collect(),
        )
    }

    pub fn a_rational(&self) -> Vec<Vec<Scalar>> {
        self.a
            .iter()
            .map(|r| r.iter().map(scalar::from_big).collect())
            .collect()
    }

    pub fn b_rational(&self) -> Vec<Scalar> {
        self.b.iter().map(scalar::from_big).collect()
    }

    /// `A x` in exact arithmetic.
    pub fn apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        self.a
            .iter()
            .map(|r| {
                r.iter()
                    .zip(x)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(Scalar::zero(), |acc, (a, v)| acc + scalar::from_big(a) * v)
            })
            .collect()
    }

    /// `A^T y` in exact arithmetic.
    pub fn apply_transpose(&self, y: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.cols];
        for (row, yi) in self.a.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                if !a.is_zero() {
                    *o += scalar::from_big(a) * yi;
                }
            }
        }
        out
    }
}
