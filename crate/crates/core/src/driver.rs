//! Outer loop: keep an upper-bound box around every basic feasible solution,
//! shrink it with the separators produced by the bubble procedure, and fix
//! variables whose bound falls below `1/Delta`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::bubble::{self, BubbleOutcome};
use crate::certificates::{AuditEntry, AuditLog, CertKind, Terminal};
use crate::config::Config;
use crate::error::{Result, SolveError};
use crate::geometry::{self, RowReduction};
use crate::instrument::{self, Instrument, SolveStats};
use crate::problem::Problem;
use crate::scalar::{self, Scalar};

/// Bounds and fixings of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleState {
    /// One bound per original variable; fixed variables keep their last value.
    u: Vec<Scalar>,
    fixed: Vec<bool>,
    delta_sq: BigInt,
    delta_hat: BigInt,
}

impl ScaleState {
    /// All bounds start at `delta_hat = ceil(sqrt(delta_sq))`.
    pub fn new(n: usize, delta_sq: BigInt) -> Self {
        let delta_hat = scalar::ceil_sqrt_int(&delta_sq).max(BigInt::from(1));
        ScaleState {
            u: vec![Scalar::from_integer(delta_hat.clone()); n],
            fixed: vec![false; n],
            delta_sq,
            delta_hat,
        }
    }

    pub fn delta_sq(&self) -> &BigInt {
        &self.delta_sq
    }

    pub fn delta_hat(&self) -> &BigInt {
        &self.delta_hat
    }

    pub fn u(&self) -> &[Scalar] {
        &self.u
    }

    pub fn active(&self) -> Vec<usize> {
        (0..self.u.len()).filter(|&j| !self.fixed[j]).collect()
    }

    pub fn fixed(&self) -> Vec<usize> {
        (0..self.u.len()).filter(|&j| self.fixed[j]).collect()
    }

    pub fn active_bounds(&self) -> Vec<Scalar> {
        self.active().into_iter().map(|j| self.u[j].clone()).collect()
    }

    /// Installs new bounds for the active variables (in order).
    pub fn set_active_bounds(&mut self, bounds: &[Scalar]) {
        for (j, b) in self.active().into_iter().zip(bounds) {
            debug_assert!(*b <= self.u[j]);
            self.u[j] = b.clone();
        }
    }

    /// Fixes every active variable with `u_j < 1/delta_hat`; returns them.
    pub fn fix_variables(&mut self) -> Vec<usize> {
        let threshold = Scalar::new(BigInt::from(1), self.delta_hat.clone());
        let newly: Vec<usize> =
            self.active().into_iter().filter(|&j| self.u[j] < threshold).collect();
        for &j in &newly {
            self.fixed[j] = true;
        }
        newly
    }
}

/// Product of the `m` largest squared Euclidean column norms of `(A, b)`.
pub fn compute_delta_sq(problem: &Problem) -> BigInt {
    let m = problem.rows();
    let mut norms: Vec<BigInt> = (0..=problem.cols())
        .map(|j| {
            (0..m)
                .map(|i| {
                    let v = if j < problem.cols() { &problem.a()[i][j] } else { &problem.b()[i] };
                    v * v
                })
                .sum()
        })
        .collect();
    norms.sort_unstable_by(|a, b| b.cmp(a));
    norms.into_iter().take(m).product()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundUpdate {
    pub u_prime: Vec<Scalar>,
    /// `argmax_j u_j w_j` (smallest index on ties); `u'_p <= u_p / 2`.
    pub halved: usize,
}

/// `u'_j = min(u_j, 1/w_j)` after scaling `w` so that `sum u_j w_j = 2n`.
pub fn update_bounds(u: &[Scalar], w: &[Scalar]) -> Result<BoundUpdate> {
    let n = u.len();
    if w.len() != n {
        return Err(SolveError::Dimension(format!("w has length {}, expected {n}", w.len())));
    }
    if w.iter().any(|x| x.is_negative()) || w.iter().all(|x| x.is_zero()) {
        return Err(SolveError::Internal("bound update needs w >= 0, w != 0".into()));
    }
    let s = scalar::dot(u, w);
    let two_n = scalar::int(2 * n as i64);
    let u_prime: Vec<Scalar> = u
        .iter()
        .zip(w)
        .map(|(uj, wj)| {
            if wj.is_zero() {
                return uj.clone();
            }
            let cand = &s / (&two_n * wj);
            if &cand < uj {
                cand
            } else {
                uj.clone()
            }
        })
        .collect();
    let mut halved = 0;
    let mut best = &u[0] * &w[0];
    for j in 1..n {
        let key = &u[j] * &w[j];
        if key > best {
            best = key;
            halved = j;
        }
    }
    if u_prime[halved].clone() * scalar::int(2) > u[halved] {
        return Err(SolveError::Internal(format!("bound {halved} was not halved")));
    }
    Ok(BoundUpdate { u_prime, halved })
}

/// Rounds each bound up to the grid `1/(3 n delta_hat)`.
pub fn round_bounds(u_prime: &[Scalar], n: usize, delta_hat: &BigInt) -> Vec<Scalar> {
    let denom = Scalar::from_integer(BigInt::from(3 * n) * delta_hat);
    u_prime.iter().map(|x| (x * &denom).ceil() / &denom).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReducedSystem {
    UniqueSolution(Vec<Scalar>),
    /// Row-reduced problem and the original row indices it keeps.
    Underdetermined { problem: Problem, rows: Vec<usize> },
    Inconsistent(Vec<Scalar>),
}

/// Classifies `A_S x = b` for the active columns.
pub fn solve_reduced(problem: &Problem) -> ReducedSystem {
    match geometry::row_reduce(problem) {
        RowReduction::Inconsistent { y } => ReducedSystem::Inconsistent(y),
        RowReduction::Reduced { rows, problem: reduced } => {
            if reduced.rows() < reduced.cols() {
                return ReducedSystem::Underdetermined { problem: reduced, rows };
            }
            let x = geometry::solve_square(&reduced.a_rational(), &reduced.b_rational())
                .expect("independent rows with rank equal to column count form a regular matrix");
            ReducedSystem::UniqueSolution(x)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Feasible(Vec<Scalar>),
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub verdict: Verdict,
    /// Every bound update and the terminal step; replayable on its own.
    pub audit: AuditLog,
    pub stats: SolveStats,
    pub delta_sq: BigInt,
}

/// `n * ceil(log2(delta_sq)) + n`.
pub fn outer_iteration_cap(n: usize, delta_sq: &BigInt) -> u64 {
    let log = if *delta_sq <= BigInt::from(1) { 0 } else { (delta_sq - 1u32).bits() };
    n as u64 * log + n as u64
}

fn lift(n: usize, active: &[usize], x: &[Scalar]) -> Vec<Scalar> {
    let mut full = vec![Scalar::zero(); n];
    for (&j, v) in active.iter().zip(x) {
        full[j] = v.clone();
    }
    full
}

/// Decides feasibility of `{Ax = b, x >= 0}`.
pub fn solve_feasibility(problem: &Problem, config: &Config) -> Result<Solution> {
    let n = problem.cols();
    let m = problem.rows();
    let reduced = match geometry::row_reduce(problem) {
        RowReduction::Inconsistent { y } => {
            let audit = AuditLog {
                entries: Vec::new(),
                terminal: Terminal::Inconsistent { active: (0..n).collect(), y },
            };
            return Ok(Solution {
                verdict: Verdict::Infeasible,
                audit,
                stats: SolveStats::default(),
                delta_sq: BigInt::zero(),
            });
        }
        RowReduction::Reduced { problem, .. } => problem,
    };
    let mut scale = ScaleState::new(n, compute_delta_sq(&reduced));
    let delta_hat = scale.delta_hat().clone();
    let cap = outer_iteration_cap(n, scale.delta_sq());
    let mut instr = Instrument::new(n, &delta_hat, scale.u(), config.strictness);
    let mut entries = Vec::new();

    let (verdict, terminal) = loop {
        let active = scale.active();
        let sub = problem.select_columns(&active);
        let (bubble_problem, rows) = match solve_reduced(&sub) {
            ReducedSystem::Inconsistent(y) => {
                break (Verdict::Infeasible, Terminal::Inconsistent { active, y });
            }
            ReducedSystem::UniqueSolution(x) => {
                if scalar::is_nonneg(&x) {
                    let full = lift(n, &active, &x);
                    break (Verdict::Feasible(full.clone()), Terminal::Feasible { x: full });
                }
                break (Verdict::Infeasible, Terminal::NegativeUnique { active, x });
            }
            ReducedSystem::Underdetermined { problem, rows } => (problem, rows),
        };
        if entries.len() as u64 >= cap {
            return Err(SolveError::IterationCap { what: "outer", cap });
        }
        let u_before = scale.active_bounds();
        let run = bubble::run_bubble(&bubble_problem, u_before.clone(), config)?;
        if run.iterations > bubble::iteration_cap(run.n_active) {
            return Err(SolveError::IterationCap {
                what: "bubble",
                cap: bubble::iteration_cap(run.n_active),
            });
        }
        let fixed_so_far = n - active.len();
        instr.record_bubble(&run, fixed_so_far);
        let (kind, v_red, w, z) = match run.outcome {
            BubbleOutcome::Feasible(x) => {
                let full = lift(n, &active, &x);
                break (Verdict::Feasible(full.clone()), Terminal::Feasible { x: full });
            }
            BubbleOutcome::Separator { v, w, z } => (CertKind::Separator, v, w, Some(z)),
            BubbleOutcome::FarkasEmptyK { v, w } => (CertKind::Farkas, v, w, None),
        };
        let mut v = vec![Scalar::zero(); m];
        for (&r, val) in rows.iter().zip(v_red) {
            v[r] = val;
        }

        let n_act = active.len();
        let update = update_bounds(&u_before, &w)?;
        instr.record_halving();
        let u_after: Vec<Scalar> = round_bounds(&update.u_prime, n_act, &delta_hat)
            .into_iter()
            .zip(&u_before)
            .map(|(r, old)| r.min(old.clone()))
            .collect();
        instr.observe_bits(scalar::max_bit_size(&u_after));

        let psi_before = instrument::potential(scale.u(), &delta_hat);
        scale.set_active_bounds(&u_after);
        let newly_fixed = scale.fix_variables();
        let psi_after = instrument::potential(scale.u(), &delta_hat);
        instr.assert_phase_progress(psi_before, psi_after, fixed_so_far + 1, !newly_fixed.is_empty())?;
        log::debug!(
            "outer {}: {} active, kind {:?}, fixed {:?}",
            entries.len() + 1,
            n_act,
            kind,
            newly_fixed
        );

        entries.push(AuditEntry {
            iteration: entries.len() + 1,
            active,
            u_before,
            kind,
            v,
            w,
            z,
            u_prime: update.u_prime,
            u_after,
            fixed: newly_fixed,
        });
    };

    let stats = instr.finish()?;
    Ok(Solution {
        verdict,
        audit: AuditLog { entries, terminal },
        stats,
        delta_sq: scale.delta_sq().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn delta_sq_examples() {
        let p = Problem::from_i64(&[&[1, 0], &[0, 1]], &[1, 1]);
        assert_eq!(compute_delta_sq(&p), BigInt::from(2));
        let p = Problem::from_i64(&[&[1, 1]], &[2]);
        assert_eq!(compute_delta_sq(&p), BigInt::from(4));
        let p = Problem::from_i64(&[&[2, 0], &[0, 3]], &[0, 0]);
        assert_eq!(compute_delta_sq(&p), BigInt::from(36));
    }

    #[test]
    fn update_bounds_examples() {
        let u = [int(4), int(4)];
        let up = update_bounds(&u, &[ratio(3, 4), ratio(1, 4)]).unwrap();
        assert_eq!(up.u_prime, vec![ratio(4, 3), int(4)]);
        assert_eq!(up.halved, 0);

        let u = [int(2), int(6), ratio(1, 3)];
        let w: Vec<Scalar> = u.iter().map(|x| int(2) / x).collect();
        let up = update_bounds(&u, &w).unwrap();
        let half: Vec<Scalar> = u.iter().map(|x| x / int(2)).collect();
        assert_eq!(up.u_prime, half);

        let up = update_bounds(&[int(4), int(4)], &[int(7), int(0)]).unwrap();
        assert_eq!(up.u_prime, vec![int(1), int(4)]);

        assert!(update_bounds(&[int(1), int(1)], &[int(0), int(0)]).is_err());
        assert!(update_bounds(&[int(1), int(1)], &[int(1), int(-1)]).is_err());
    }

    #[test]
    fn round_bounds_examples() {
        let dh = BigInt::from(2);
        assert_eq!(round_bounds(&[ratio(5, 12)], 2, &dh), vec![ratio(5, 12)]);
        assert_eq!(round_bounds(&[ratio(1, 10)], 2, &dh), vec![ratio(1, 6)]);
        assert_eq!(round_bounds(&[ratio(99, 1200)], 2, &dh), vec![ratio(1, 12)]);
    }

    #[test]
    fn fix_variables_examples() {
        let mut s = ScaleState::new(2, BigInt::from(4));
        assert_eq!(s.delta_hat(), &BigInt::from(2));
        s.set_active_bounds(&[ratio(1, 100), int(2)]);
        assert_eq!(s.fix_variables(), vec![0]);
        assert_eq!(s.active(), vec![1]);
        assert_eq!(s.fix_variables(), Vec::<usize>::new());
        s.set_active_bounds(&[ratio(1, 3)]);
        assert_eq!(s.fix_variables(), vec![1]);
        assert!(s.active().is_empty());
    }

    #[test]
    fn solve_reduced_examples() {
        let p = Problem::from_i64(&[&[1, 0], &[0, 1]], &[1, -1]);
        assert_eq!(solve_reduced(&p), ReducedSystem::UniqueSolution(vec![int(1), int(-1)]));
        let p = Problem::from_i64(&[&[1, 1]], &[1]);
        assert!(matches!(solve_reduced(&p), ReducedSystem::Underdetermined { .. }));
        let p = Problem::new(0, vec![vec![], vec![]], vec![BigInt::from(0), BigInt::from(0)]);
        assert_eq!(solve_reduced(&p), ReducedSystem::UniqueSolution(vec![]));
        let p = Problem::new(0, vec![vec![]], vec![BigInt::from(3)]);
        assert!(matches!(solve_reduced(&p), ReducedSystem::Inconsistent(_)));
    }

    #[test]
    fn outer_cap_formula() {
        assert_eq!(outer_iteration_cap(2, &BigInt::from(1)), 2);
        assert_eq!(outer_iteration_cap(2, &BigInt::from(4)), 6);
        assert_eq!(outer_iteration_cap(3, &BigInt::from(5)), 12);
    }

    #[test]
    fn solve_examples() {
        let cfg = Config::default();
        let sol = solve_feasibility(&Problem::from_i64(&[&[1, 1]], &[1]), &cfg).unwrap();
        assert_eq!(sol.verdict, Verdict::Feasible(vec![ratio(1, 2), ratio(1, 2)]));

        let sol = solve_feasibility(&Problem::from_i64(&[&[1, 1]], &[-1]), &cfg).unwrap();
        assert_eq!(sol.verdict, Verdict::Infeasible);
        assert!(!sol.audit.entries.is_empty());

        let sol = solve_feasibility(&Problem::from_i64(&[&[1, 1], &[1, 1]], &[1, 2]), &cfg).unwrap();
        assert_eq!(sol.verdict, Verdict::Infeasible);
        assert!(sol.audit.entries.is_empty());
        assert!(matches!(sol.audit.terminal, Terminal::Inconsistent { .. }));
    }
}
