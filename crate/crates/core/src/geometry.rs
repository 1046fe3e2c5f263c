//! D-norm geometry on exact rationals: scaled inner products, affine
//! projections and row-space preprocessing.
//!
//! Throughout, `D = diag(4 / u_i^2)` for a positive bound vector `u`, so that
//! the box `{0 <= x <= u}` sits inside the D-ball of radius `2 sqrt(n)`.
//! Norms are only ever exposed squared: the D-norm of a rational vector is in
//! general irrational.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::error::{Result, SolveError};
use crate::problem::Problem;
use crate::scalar::{self, Scalar};

/// Diagonal scaling induced by the current upper bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DContext {
    u: Vec<Scalar>,
    d: Vec<Scalar>,
    d_inv: Vec<Scalar>,
}

impl DContext {
    pub fn new(u: Vec<Scalar>) -> Result<Self> {
        if let Some(j) = u.iter().position(|x| !x.is_positive()) {
            return Err(SolveError::Dimension(format!("bound u[{j}] is not positive")));
        }
        let four = scalar::int(4);
        let d_inv: Vec<Scalar> = u.iter().map(|x| x * x / &four).collect();
        let d = d_inv.iter().map(|x| x.recip()).collect();
        Ok(DContext { u, d, d_inv })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[Scalar] {
        &self.u
    }

    /// Diagonal of `D`.
    pub fn d(&self) -> &[Scalar] {
        &self.d
    }

    /// Diagonal of `D^{-1}`.
    pub fn d_inv(&self) -> &[Scalar] {
        &self.d_inv
    }

    /// `<x, y>_D` without dimension checks.
    pub(crate) fn inner(&self, x: &[Scalar], y: &[Scalar]) -> Scalar {
        let mut acc = Scalar::zero();
        for ((a, b), d) in x.iter().zip(y).zip(&self.d) {
            if !a.is_zero() && !b.is_zero() {
                acc += a * b * d;
            }
        }
        acc
    }

    pub(crate) fn norm_sq(&self, x: &[Scalar]) -> Scalar {
        self.inner(x, x)
    }

    /// `D x`.
    pub fn scale(&self, x: &[Scalar]) -> Vec<Scalar> {
        x.iter().zip(&self.d).map(|(a, d)| a * d).collect()
    }

    /// `D^{-1} x`.
    pub fn unscale(&self, x: &[Scalar]) -> Vec<Scalar> {
        x.iter().zip(&self.d_inv).map(|(a, d)| a * d).collect()
    }
}

fn check_dim(ctx: &DContext, v: &[Scalar], name: &str) -> Result<()> {
    if v.len() != ctx.dim() {
        return Err(SolveError::Dimension(format!(
            "{name} has length {}, expected {}",
            v.len(),
            ctx.dim()
        )));
    }
    Ok(())
}

/// `<x, y>_D = sum_i d_ii x_i y_i`.
pub fn d_inner(x: &[Scalar], y: &[Scalar], ctx: &DContext) -> Result<Scalar> {
    check_dim(ctx, x, "x")?;
    check_dim(ctx, y, "y")?;
    Ok(ctx.inner(x, y))
}

pub fn d_norm_sq(x: &[Scalar], ctx: &DContext) -> Result<Scalar> {
    d_inner(x, x, ctx)
}

/// The affine set `{x : C x = d}`; rows of `C` must be linearly independent.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSystem {
    pub c: Vec<Vec<Scalar>>,
    pub d: Vec<Scalar>,
}

impl AffineSystem {
    pub fn new(c: Vec<Vec<Scalar>>, d: Vec<Scalar>) -> Self {
        AffineSystem { c, d }
    }

    pub fn from_problem(p: &Problem) -> Self {
        AffineSystem { c: p.a_rational(), d: p.b_rational() }
    }
}

/// Result of [`row_reduce`].
#[derive(Debug, Clone, PartialEq)]
pub enum RowReduction {
    /// `rows` are the indices of a maximal independent prefix-greedy subset of
    /// the original rows; `problem` is the original restricted to them.
    Reduced { rows: Vec<usize>, problem: Problem },
    /// `y^T A = 0` and `y^T b != 0`.
    Inconsistent { y: Vec<Scalar> },
}

struct EchelonRow {
    pivot: usize,
    coeffs: Vec<Scalar>,
    rhs: Scalar,
    combo: Vec<Scalar>,
}

/// Drops rows of `(A, b)` that are linear combinations of earlier rows, or
/// reports inconsistency. Kept rows are the original integer rows, so the
/// reduced system describes exactly the same affine set.
pub fn row_reduce(problem: &Problem) -> RowReduction {
    let m = problem.rows();
    let a = problem.a_rational();
    let b = problem.b_rational();
    let mut basis: Vec<EchelonRow> = Vec::new();
    let mut kept = Vec::new();

    for k in 0..m {
        let mut coeffs = a[k].clone();
        let mut rhs = b[k].clone();
        let mut combo = vec![Scalar::zero(); m];
        combo[k] = scalar::one();
        for row in &basis {
            let f = coeffs[row.pivot].clone();
            if f.is_zero() {
                continue;
            }
            for (c, r) in coeffs.iter_mut().zip(&row.coeffs) {
                if !r.is_zero() {
                    *c -= &f * r;
                }
            }
            rhs -= &f * &row.rhs;
            for (c, r) in combo.iter_mut().zip(&row.combo) {
                if !r.is_zero() {
                    *c -= &f * r;
                }
            }
        }
        match coeffs.iter().position(|c| !c.is_zero()) {
            Some(pivot) => {
                let p = coeffs[pivot].clone();
                coeffs.iter_mut().for_each(|c| *c /= &p);
                rhs /= &p;
                combo.iter_mut().for_each(|c| *c /= &p);
                basis.push(EchelonRow { pivot, coeffs, rhs, combo });
                kept.push(k);
            }
            None if !rhs.is_zero() => return RowReduction::Inconsistent { y: combo },
            None => {}
        }
    }
    let reduced = problem.select_rows(&kept);
    RowReduction::Reduced { rows: kept, problem: reduced }
}

/// Solves the square system `mat * x = rhs` by Gauss-Jordan elimination with
/// first-nonzero pivoting. `None` when `mat` is singular.
pub fn solve_square(mat: &[Vec<Scalar>], rhs: &[Scalar]) -> Option<Vec<Scalar>> {
    let k = mat.len();
    let mut aug: Vec<Vec<Scalar>> = mat
        .iter()
        .zip(rhs)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, piv);
        let p = aug[col][col].clone();
        aug[col].iter_mut().for_each(|v| *v /= &p);
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row).skip(col) {
                *v -= &f * pv;
            }
        }
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

fn invert(mat: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let k = mat.len();
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let mut e = vec![Scalar::zero(); k];
        e[j] = scalar::one();
        cols.push(solve_square(mat, &e)?);
    }
    Some((0..k).map(|i| (0..k).map(|j| cols[j][i].clone()).collect()).collect())
}

/// D-orthogonal projector onto affine sets `{x : C x = d}` for a fixed `C`,
/// caching `(C D^{-1} C^T)^{-1}`.
#[derive(Debug, Clone)]
pub struct Projector {
    c: Vec<Vec<Scalar>>,
    gram_inv: Vec<Vec<Scalar>>,
    ctx: DContext,
}

impl Projector {
    pub fn new(c: &[Vec<Scalar>], ctx: &DContext) -> Result<Self> {
        for (i, row) in c.iter().enumerate() {
            check_dim(ctx, row, &format!("C row {i}"))?;
        }
        let k = c.len();
        let scaled: Vec<Vec<Scalar>> = c.iter().map(|r| ctx.unscale(r)).collect();
        let mut gram = vec![vec![Scalar::zero(); k]; k];
        for i in 0..k {
            for j in i..k {
                let g = scalar::dot(&scaled[i], &c[j]);
                gram[j][i] = g.clone();
                gram[i][j] = g;
            }
        }
        let gram_inv = invert(&gram).ok_or(SolveError::Singular)?;
        Ok(Projector { c: c.to_vec(), gram_inv, ctx: ctx.clone() })
    }

    /// Returns `(y, lambda)` where `y` is the point of `{C x = d}` at minimum
    /// D-distance from `xbar` and `y - xbar = D^{-1} C^T lambda`.
    pub fn project(&self, d: &[Scalar], xbar: &[Scalar]) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
        check_dim(&self.ctx, xbar, "xbar")?;
        if d.len() != self.c.len() {
            return Err(SolveError::Dimension(format!(
                "right-hand side has length {}, expected {}",
                d.len(),
                self.c.len()
            )));
        }
        let resid: Vec<Scalar> = self
            .c
            .iter()
            .zip(d)
            .map(|(row, di)| di - scalar::dot(row, xbar))
            .collect();
        let lambda: Vec<Scalar> = self.gram_inv.iter().map(|row| scalar::dot(row, &resid)).collect();
        let mut step = vec![Scalar::zero(); self.ctx.dim()];
        for (row, l) in self.c.iter().zip(&lambda) {
            if l.is_zero() {
                continue;
            }
            for (s, a) in step.iter_mut().zip(row) {
                if !a.is_zero() {
                    *s += a * l;
                }
            }
        }
        let step = self.ctx.unscale(&step);
        // ||y - xbar||_D^2 = (d - C xbar)^T lambda
        if self.ctx.norm_sq(&step) != scalar::dot(&resid, &lambda) {
            return Err(SolveError::Internal("projection distance identity failed".into()));
        }
        let y = xbar.iter().zip(&step).map(|(a, s)| a + s).collect();
        Ok((y, lambda))
    }
}

/// Projects `xbar` onto `{x : sys.c x = sys.d}` in the D-norm. See
/// [`Projector::project`].
pub fn project_affine(
    sys: &AffineSystem,
    xbar: &[Scalar],
    ctx: &DContext,
) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    Projector::new(&sys.c, ctx)?.project(&sys.d, xbar)
}

/// Squared D-distance from `xbar` to the hyperplane `{x : <p, x>_D = beta}`
/// together with the sign of `beta - <p, xbar>_D`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneGap {
    pub dist_sq: Scalar,
    pub side: Ordering,
}

pub fn signed_gap_to_hyperplane(
    p: &[Scalar],
    norm_sq: &Scalar,
    beta: &Scalar,
    xbar: &[Scalar],
    ctx: &DContext,
) -> Result<HyperplaneGap> {
    check_dim(ctx, p, "p")?;
    check_dim(ctx, xbar, "xbar")?;
    if norm_sq.is_zero() {
        return Err(SolveError::Dimension("hyperplane normal has zero norm".into()));
    }
    let diff = beta - ctx.inner(p, xbar);
    Ok(HyperplaneGap {
        dist_sq: &diff * &diff / norm_sq,
        side: diff.cmp(&Scalar::zero()),
    })
}
