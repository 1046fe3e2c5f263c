//! Independent verification of everything the solver emits.
//!
//! Nothing here calls into the solver modules: the only shared code is the
//! rational scalar type and the [`Problem`] container. Linear algebra needed
//! for replay (row selection, rank) is done with a separate fraction-free
//! integer elimination.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::problem::Problem;
use crate::scalar::{self, serde_str, Scalar};

/// How the `(v, w)` pair of an audit entry was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    /// End of the bubble loop; carries the iterate `z` as witness.
    Separator,
    /// Empty shifted region `{Ax = b, x >= u/(2n)}`.
    Farkas,
}

/// One bound update of the outer loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub iteration: usize,
    /// Original indices of the active variables, increasing.
    pub active: Vec<usize>,
    #[serde(with = "serde_str::vec")]
    pub u_before: Vec<Scalar>,
    pub kind: CertKind,
    /// Multipliers over all original rows.
    #[serde(with = "serde_str::vec")]
    pub v: Vec<Scalar>,
    /// Multipliers over the active variables.
    #[serde(with = "serde_str::vec")]
    pub w: Vec<Scalar>,
    #[serde(with = "serde_str::opt_vec", default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<Scalar>>,
    /// Shrunk bounds before grid rounding.
    #[serde(with = "serde_str::vec")]
    pub u_prime: Vec<Scalar>,
    /// Bounds handed to the next iteration (active variables of this entry).
    #[serde(with = "serde_str::vec")]
    pub u_after: Vec<Scalar>,
    /// Original indices fixed to zero by this entry.
    pub fixed: Vec<usize>,
}

/// How the outer loop ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    /// A point of `P` in original coordinates.
    Feasible {
        #[serde(with = "serde_str::vec")]
        x: Vec<Scalar>,
    },
    /// `y^T A_S = 0`, `y^T b != 0` on the active columns `S`.
    Inconsistent {
        active: Vec<usize>,
        #[serde(with = "serde_str::vec")]
        y: Vec<Scalar>,
    },
    /// `A_S` has full column rank and the unique solution has a negative entry.
    NegativeUnique {
        active: Vec<usize>,
        #[serde(with = "serde_str::vec")]
        x: Vec<Scalar>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditLog {
    pub entries: Vec<AuditEntry>,
    pub terminal: Terminal,
}

fn rat(v: &BigInt) -> Scalar {
    Scalar::from_integer(v.clone())
}

fn a_transpose(problem: &Problem, y: &[Scalar]) -> Vec<Scalar> {
    (0..problem.cols())
        .map(|j| {
            problem
                .a()
                .iter()
                .zip(y)
                .fold(Scalar::zero(), |acc, (row, yi)| acc + rat(&row[j]) * yi)
        })
        .collect()
}

fn b_dot(problem: &Problem, y: &[Scalar]) -> Scalar {
    problem.b().iter().zip(y).fold(Scalar::zero(), |acc, (b, yi)| acc + rat(b) * yi)
}

/// `Ax = b` and `x >= 0`, exactly.
pub fn check_feasible(problem: &Problem, x: &[Scalar]) -> bool {
    if x.len() != problem.cols() || x.iter().any(|v| v.is_negative()) {
        return false;
    }
    problem.a().iter().zip(problem.b()).all(|(row, b)| {
        let lhs = row.iter().zip(x).fold(Scalar::zero(), |acc, (a, v)| acc + rat(a) * v);
        lhs == rat(b)
    })
}

/// `(v^T A + w^T) x < v^T b + w^T u / (2n)` for every `x` in the box
/// `[0, u]`, checked at the box maximiser. Also requires `w >= 0`, `w != 0`.
pub fn check_separator(
    problem: &Problem,
    u: &[Scalar],
    n_active: usize,
    v: &[Scalar],
    w: &[Scalar],
) -> bool {
    let n = problem.cols();
    if u.len() != n || w.len() != n || v.len() != problem.rows() || n_active == 0 {
        return false;
    }
    if w.iter().any(|x| x.is_negative()) || w.iter().all(|x| x.is_zero()) {
        return false;
    }
    if u.iter().any(|x| !x.is_positive()) {
        return false;
    }
    let coef = a_transpose(problem, v);
    let box_max = coef
        .iter()
        .zip(w)
        .zip(u)
        .fold(Scalar::zero(), |acc, ((c, wj), uj)| {
            let t = c + wj;
            if t.is_positive() {
                acc + t * uj
            } else {
                acc
            }
        });
    let wu = w.iter().zip(u).fold(Scalar::zero(), |acc, (a, b)| acc + a * b);
    let rhs = b_dot(problem, v) + wu / Scalar::from_integer(BigInt::from(2 * n_active));
    box_max < rhs
}

/// Witness form of a bubble separator: with `D = diag(4/u^2)` and
/// `l = u/(2n)`, `Dz = A^T v + w`, `||z||_D^2 = b^T v + l^T w` and
/// `||z||_D^2 > 4n`.
pub fn check_separator_witness(
    problem: &Problem,
    u: &[Scalar],
    v: &[Scalar],
    w: &[Scalar],
    z: &[Scalar],
) -> bool {
    let n = problem.cols();
    if u.len() != n || w.len() != n || z.len() != n || v.len() != problem.rows() || n == 0 {
        return false;
    }
    if u.iter().any(|x| !x.is_positive()) || w.iter().any(|x| x.is_negative()) {
        return false;
    }
    let four = scalar::int(4);
    let dz: Vec<Scalar> = z.iter().zip(u).map(|(zj, uj)| &four * zj / (uj * uj)).collect();
    let coef = a_transpose(problem, v);
    if coef.iter().zip(w).zip(&dz).any(|((c, wj), d)| &(c + wj) != d) {
        return false;
    }
    let norm = dz.iter().zip(z).fold(Scalar::zero(), |acc, (a, b)| acc + a * b);
    let two_n = scalar::int(2 * n as i64);
    let lw = w.iter().zip(u).fold(Scalar::zero(), |acc, (wj, uj)| acc + wj * uj / &two_n);
    norm == b_dot(problem, v) + lw && norm > scalar::int(4 * n as i64)
}

/// `A^T v + w = 0`, `w >= 0`, `b^T v + l^T w > 0`: the region
/// `{Ax = b, x >= l}` is empty.
pub fn check_farkas(problem: &Problem, ell: &[Scalar], v: &[Scalar], w: &[Scalar]) -> bool {
    let n = problem.cols();
    if ell.len() != n || w.len() != n || v.len() != problem.rows() {
        return false;
    }
    if w.iter().any(|x| x.is_negative()) {
        return false;
    }
    let coef = a_transpose(problem, v);
    if coef.iter().zip(w).any(|(c, wj)| !(c + wj).is_zero()) {
        return false;
    }
    let lw = ell.iter().zip(w).fold(Scalar::zero(), |acc, (a, b)| acc + a * b);
    (b_dot(problem, v) + lw).is_positive()
}

/// Fraction-free elimination over the integers. Returns the indices of rows
/// that are independent of all earlier rows.
fn independent_rows(rows: &[Vec<BigInt>]) -> Vec<usize> {
    let mut echelon: Vec<(usize, Vec<BigInt>)> = Vec::new();
    let mut kept = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        let mut r = row.clone();
        for (pc, e) in &echelon {
            if r[*pc].is_zero() {
                continue;
            }
            let f = r[*pc].clone();
            let piv = e[*pc].clone();
            for (x, y) in r.iter_mut().zip(e) {
                *x = &*x * &piv - y * &f;
            }
        }
        if let Some(pc) = r.iter().position(|x| !x.is_zero()) {
            echelon.push((pc, r));
            kept.push(k);
        }
    }
    kept
}

fn rank(rows: &[Vec<BigInt>]) -> usize {
    independent_rows(rows).len()
}

/// Product of the `m` largest squared column norms of `(A, b)` after
/// dropping redundant rows, and its integer square-root ceiling.
pub fn hadamard_bound(problem: &Problem) -> (BigInt, BigInt) {
    let keep = independent_rows(problem.a());
    let mut norms: Vec<BigInt> = (0..=problem.cols())
        .map(|j| {
            keep.iter()
                .map(|&i| {
                    let v = if j < problem.cols() { &problem.a()[i][j] } else { &problem.b()[i] };
                    v * v
                })
                .sum()
        })
        .collect();
    norms.sort_unstable_by(|a, b| b.cmp(a));
    let delta_sq: BigInt = norms.iter().take(keep.len()).product();
    let delta_hat = scalar::ceil_sqrt_int(&delta_sq);
    (delta_sq, delta_hat)
}

fn grid_ceil(x: &Scalar, denom: &BigInt) -> Scalar {
    let d = Scalar::from_integer(denom.clone());
    (x * &d).ceil() / d
}

/// Replays an audit log against the original problem. Returns `true` iff
/// every recorded step and the terminal verdict check out.
pub fn replay_audit(problem: &Problem, audit: &AuditLog) -> bool {
    replay_audit_detailed(problem, audit).is_ok()
}

/// As [`replay_audit`], naming the first failing check.
pub fn replay_audit_detailed(problem: &Problem, audit: &AuditLog) -> Result<(), String> {
    let n = problem.cols();
    let (_, delta_hat) = hadamard_bound(problem);
    let delta_hat_q = Scalar::from_integer(delta_hat.clone());
    let threshold = delta_hat_q.recip();
    let mut active: Vec<usize> = (0..n).collect();
    let mut u: Vec<Scalar> = vec![delta_hat_q.clone(); n];

    for (k, e) in audit.entries.iter().enumerate() {
        let fail = |what: &str| Err(format!("entry {k}: {what}"));
        if e.iteration != k + 1 {
            return fail("iteration index out of order");
        }
        if e.active != active {
            return fail("active set mismatch");
        }
        let n_act = active.len();
        let u_cur: Vec<Scalar> = active.iter().map(|&j| u[j].clone()).collect();
        if e.u_before != u_cur {
            return fail("u_before mismatch");
        }
        let sub = problem.select_columns(&active);
        if !check_separator(&sub, &u_cur, n_act, &e.v, &e.w) {
            return fail("separator inequality fails");
        }
        match e.kind {
            CertKind::Farkas => {
                let two_n = scalar::int(2 * n_act as i64);
                let ell: Vec<Scalar> = u_cur.iter().map(|x| x / &two_n).collect();
                if e.z.is_some() || !check_farkas(&sub, &ell, &e.v, &e.w) {
                    return fail("Farkas certificate fails");
                }
            }
            CertKind::Separator => match &e.z {
                Some(z) if check_separator_witness(&sub, &u_cur, &e.v, &e.w, z) => {}
                _ => return fail("separator witness fails"),
            },
        }
        // u'_j = min(u_j, sum(u w) / (2 n w_j))
        let s = u_cur.iter().zip(&e.w).fold(Scalar::zero(), |acc, (a, b)| acc + a * b);
        let two_n = scalar::int(2 * n_act as i64);
        let u_prime: Vec<Scalar> = u_cur
            .iter()
            .zip(&e.w)
            .map(|(uj, wj)| {
                if wj.is_zero() {
                    uj.clone()
                } else {
                    let cand = &s / (&two_n * wj);
                    if &cand < uj {
                        cand
                    } else {
                        uj.clone()
                    }
                }
            })
            .collect();
        if e.u_prime != u_prime {
            return fail("u_prime mismatch");
        }
        let grid = BigInt::from(3 * n_act) * &delta_hat;
        let u_after: Vec<Scalar> = u_prime
            .iter()
            .zip(&u_cur)
            .map(|(up, uc)| grid_ceil(up, &grid).min(uc.clone()))
            .collect();
        if e.u_after != u_after {
            return fail("u_after mismatch");
        }
        let fixed: Vec<usize> = active
            .iter()
            .zip(&u_after)
            .filter(|(_, x)| **x < threshold)
            .map(|(&j, _)| j)
            .collect();
        if e.fixed != fixed {
            return fail("fixed set mismatch");
        }
        for (&j, x) in active.iter().zip(&u_after) {
            u[j] = x.clone();
        }
        active.retain(|j| !fixed.contains(j));
    }

    match &audit.terminal {
        Terminal::Feasible { x } => {
            if !check_feasible(problem, x) {
                return Err("terminal point is not feasible".into());
            }
        }
        Terminal::Inconsistent { active: s, y } => {
            if *s != active {
                return Err("terminal active set mismatch".into());
            }
            let sub = problem.select_columns(s);
            if y.len() != problem.rows()
                || a_transpose(&sub, y).iter().any(|c| !c.is_zero())
                || b_dot(&sub, y).is_zero()
            {
                return Err("inconsistency certificate fails".into());
            }
        }
        Terminal::NegativeUnique { active: s, x } => {
            if *s != active || x.len() != s.len() {
                return Err("terminal active set mismatch".into());
            }
            let sub = problem.select_columns(s);
            let cols: Vec<Vec<BigInt>> = (0..s.len())
                .map(|j| sub.a().iter().map(|r| r[j].clone()).collect())
                .collect();
            if rank(&cols) != s.len() {
                return Err("active columns are not independent".into());
            }
            let ax_eq_b = sub.a().iter().zip(sub.b()).all(|(row, b)| {
                row.iter().zip(x).fold(Scalar::zero(), |acc, (a, v)| acc + rat(a) * v) == rat(b)
            });
            if !ax_eq_b || !x.iter().any(|v| v.is_negative()) {
                return Err("unique solution is not a negative solution".into());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn line() -> Problem {
        Problem::from_i64(&[&[1, 1]], &[1])
    }

    #[test]
    fn feasible_examples() {
        assert!(check_feasible(&line(), &[ratio(1, 2), ratio(1, 2)]));
        assert!(!check_feasible(&line(), &[int(2), int(-1)]));
        assert!(!check_feasible(&line(), &[int(1), int(1)]));
        assert!(!check_feasible(&line(), &[int(1)]));
    }

    #[test]
    fn separator_examples() {
        let p = line();
        let u = [int(2), int(2)];
        assert!(!check_separator(&p, &u, 2, &[int(0)], &[int(1), int(0)]));
        let neg = Problem::from_i64(&[&[1, 1]], &[-1]);
        assert!(check_separator(&neg, &u, 2, &[int(-2)], &[int(2), int(2)]));
        assert!(!check_separator(&neg, &u, 2, &[int(-2)], &[int(0), int(0)]));
    }

    #[test]
    fn farkas_examples() {
        let neg = Problem::from_i64(&[&[1, 1]], &[-1]);
        let ell = [ratio(1, 2), ratio(1, 2)];
        assert!(check_farkas(&neg, &ell, &[int(-2)], &[int(2), int(2)]));
        assert!(!check_farkas(&neg, &ell, &[int(-2)], &[int(4), int(-2)]));
        assert!(!check_farkas(&neg, &ell, &[int(-1)], &[int(2), int(2)]));
    }

    #[test]
    fn hadamard_bound_examples() {
        let p = Problem::from_i64(&[&[1, 0], &[0, 1]], &[1, 1]);
        assert_eq!(hadamard_bound(&p).0, BigInt::from(2));
        let p = Problem::from_i64(&[&[1, 1]], &[2]);
        assert_eq!(hadamard_bound(&p).0, BigInt::from(4));
        let p = Problem::from_i64(&[&[2, 0], &[0, 3]], &[0, 0]);
        assert_eq!(hadamard_bound(&p), (BigInt::from(36), BigInt::from(6)));
    }

    #[test]
    fn empty_audit_with_feasible_terminal() {
        let audit = AuditLog {
            entries: vec![],
            terminal: Terminal::Feasible { x: vec![ratio(1, 2), ratio(1, 2)] },
        };
        assert!(replay_audit(&line(), &audit));
        let bad = AuditLog { entries: vec![], terminal: Terminal::Feasible { x: vec![int(1), int(1)] } };
        assert!(!replay_audit(&line(), &bad));
    }

    #[test]
    fn independent_rows_greedy() {
        let rows: Vec<Vec<BigInt>> = [[1, 1], [2, 2], [0, 1]]
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        assert_eq!(independent_rows(&rows), vec![0, 2]);
    }
}
