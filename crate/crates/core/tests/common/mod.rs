//! Reference oracles for the integration tests. Everything here uses its own
//! dense elimination and never calls solver code.

#![allow(dead_code)]

use bubble_lp::{Problem, Scalar};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

pub fn q(v: &BigInt) -> Scalar {
    Scalar::from_integer(v.clone())
}

pub fn qi(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

/// Solves `M x = rhs` for an `r x c` matrix. Returns `None` when the system is
/// inconsistent or `M` lacks full column rank.
pub fn unique_solution(m: &[Vec<Scalar>], rhs: &[Scalar]) -> Option<Vec<Scalar>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<Scalar>> =
        m.iter().zip(rhs).map(|(r, b)| r.iter().cloned().chain([b.clone()]).collect()).collect();
    let mut pivot_row = 0;
    for c in 0..cols {
        let sel = (pivot_row..rows).find(|&r| !aug[r][c].is_zero())?;
        aug.swap(pivot_row, sel);
        let inv = aug[pivot_row][c].recip();
        for x in aug[pivot_row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !aug[r][c].is_zero() {
                let f = aug[r][c].clone();
                let pivot = aug[pivot_row].clone();
                for (x, pv) in aug[r].iter_mut().zip(&pivot) {
                    *x -= pv * &f;
                }
            }
        }
        pivot_row += 1;
    }
    if aug[pivot_row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|c| aug[c][cols].clone()).collect())
}

/// Feasibility of `{Ax = b, x >= 0}` by enumerating every column subset and
/// looking for a nonnegative basic solution.
pub fn bfs_feasible(p: &Problem) -> Option<Vec<Scalar>> {
    let n = p.cols();
    let a: Vec<Vec<Scalar>> = p.a().iter().map(|r| r.iter().map(q).collect()).collect();
    let b: Vec<Scalar> = p.b().iter().map(q).collect();
    if b.iter().all(|x| x.is_zero()) {
        return Some(vec![Scalar::zero(); n]);
    }
    for mask in 1u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        if cols.len() > p.rows() {
            continue;
        }
        let sub: Vec<Vec<Scalar>> =
            a.iter().map(|r| cols.iter().map(|&j| r[j].clone()).collect()).collect();
        if let Some(xs) = unique_solution(&sub, &b) {
            if xs.iter().all(|x| !x.is_negative()) {
                let mut x = vec![Scalar::zero(); n];
                for (&j, v) in cols.iter().zip(xs) {
                    x[j] = v;
                }
                return Some(x);
            }
        }
    }
    None
}

/// D-norm projection of `xbar` onto `{C y = d}` from the KKT system
/// `[D C^T; C 0] [y; -lambda] = [D xbar; d]`, `D = diag(4/u^2)`.
pub fn kkt_project(c: &[Vec<Scalar>], d: &[Scalar], u: &[Scalar], xbar: &[Scalar]) -> Vec<Scalar> {
    let n = u.len();
    let k = c.len();
    let dd: Vec<Scalar> = u.iter().map(|x| qi(4) / (x * x)).collect();
    let mut m = vec![vec![Scalar::zero(); n + k]; n + k];
    let mut rhs = vec![Scalar::zero(); n + k];
    for j in 0..n {
        m[j][j] = dd[j].clone();
        rhs[j] = &dd[j] * &xbar[j];
        for i in 0..k {
            m[j][n + i] = c[i][j].clone();
            m[n + i][j] = c[i][j].clone();
        }
    }
    rhs[n..].clone_from_slice(d);
    let sol = unique_solution(&m, &rhs).expect("KKT matrix is regular for full-rank C");
    sol[..n].to_vec()
}

/// Maximum of `(A^T v + w)^T x` over the vertices of `[0, u]`, compared with
/// `b^T v + w^T u / (2n)`.
pub fn separator_by_vertices(p: &Problem, u: &[Scalar], v: &[Scalar], w: &[Scalar]) -> bool {
    let n = p.cols();
    if w.iter().any(|x| x.is_negative()) || w.iter().all(|x| x.is_zero()) {
        return false;
    }
    let coef: Vec<Scalar> = (0..n)
        .map(|j| {
            let mut s = w[j].clone();
            for (row, vi) in p.a().iter().zip(v) {
                s += q(&row[j]) * vi;
            }
            s
        })
        .collect();
    let mut rhs = Scalar::zero();
    for (bi, vi) in p.b().iter().zip(v) {
        rhs += q(bi) * vi;
    }
    let two_n = qi(2 * n as i64);
    for (wj, uj) in w.iter().zip(u) {
        rhs += wj * uj / &two_n;
    }
    (0u32..(1 << n)).all(|mask| {
        let mut val = Scalar::zero();
        for j in 0..n {
            if mask >> j & 1 == 1 {
                val += &coef[j] * &u[j];
            }
        }
        val < rhs
    })
}

pub fn is_feasible_point(p: &Problem, x: &[Scalar]) -> bool {
    x.len() == p.cols()
        && x.iter().all(|v| !v.is_negative())
        && p.a().iter().zip(p.b()).all(|(row, bi)| {
            let mut s = Scalar::zero();
            for (a, xj) in row.iter().zip(x) {
                s += q(a) * xj;
            }
            s == q(bi)
        })
}

/// `y^T A = 0` and `y^T b != 0`.
pub fn is_inconsistency(p: &Problem, y: &[Scalar]) -> bool {
    if y.len() != p.rows() {
        return false;
    }
    let zero_combo = (0..p.cols()).all(|j| {
        let mut s = Scalar::zero();
        for (row, yi) in p.a().iter().zip(y) {
            s += q(&row[j]) * yi;
        }
        s.is_zero()
    });
    let mut yb = Scalar::zero();
    for (bi, yi) in p.b().iter().zip(y) {
        yb += q(bi) * yi;
    }
    zero_combo && !yb.is_zero()
}

/// The 500-instance suite: `m` in 1..=4, `n` in 2..=8 with `m <= n`,
/// entries in `[-5, 5]`, every other instance planted.
pub fn suite_instance(k: u64) -> Problem {
    let n = 2 + (k % 7) as usize;
    let m = 1 + ((k / 7) % 4) as usize;
    bubble_lp::io::gen_random(1000 + k, m.min(n), n, 5, k.is_multiple_of(2))
}
