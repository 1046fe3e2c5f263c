//! Potential-function accounting for the outer loop.
//!
//! The potential is `Psi = sum_j ln max(u_j, 1/Delta)` over all original
//! variables (fixed ones sit at the floor). Outside the last iteration of a
//! phase it has to drop by at least `ln(n' + 1) / 2`, where `n'` is the number
//! of variables still active. Values are computed in `f64`; nothing here
//! feeds back into solver decisions.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::config::Strictness;
use crate::error::{Result, SolveError};
use crate::scalar::{self, Scalar};

/// Absolute slack for floating-point evaluation of the potential.
pub const EPS_INSTR: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    /// Number of variables fixed before the phase, plus one.
    pub phase: usize,
    pub n_active: usize,
    /// Outer iterations (bubble calls ending in a bound update).
    pub iterations: usize,
    pub potential_drop: f64,
    pub drops: Vec<f64>,
    pub bubble_iters: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BubbleCall {
    pub n_active: usize,
    pub iterations: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub outer_iters: usize,
    pub bubble_iters_total: u64,
    pub per_phase: Vec<PhaseStats>,
    /// `Psi` in bits after initialisation and after every bound update.
    pub potential_trace: Vec<f64>,
    pub max_bitsize: u64,
    pub bubble_calls: Vec<BubbleCall>,
    pub progress_checks: u64,
    pub net_gain_checks: u64,
    pub rounding_applied: u64,
    pub rounding_fallbacks: u64,
    pub halving_checks: u64,
    pub phase_checks: u64,
    pub instrument_warnings: u64,
    /// `(n-1) + 2 ln(Delta) sum_i 1/ln(n-i+2)`.
    pub iteration_bound: f64,
}

/// `sum_j ln max(u_j, 1/delta_hat)` (natural log).
pub fn potential(u: &[Scalar], delta_hat: &BigInt) -> f64 {
    let floor = Scalar::new(BigInt::from(1), delta_hat.clone());
    u.iter()
        .map(|x| if *x > floor { scalar::to_f64(x).ln() } else { scalar::to_f64(&floor).ln() })
        .sum()
}

/// `(n-1) + 2 ln(delta_hat) sum_{i=1}^{n} 1/ln(n-i+2)`.
pub fn iteration_bound(n: usize, delta_hat: &BigInt) -> f64 {
    let log_delta = scalar::to_f64(&Scalar::from_integer(delta_hat.clone())).ln();
    let sum: f64 = (1..=n).map(|i| 1.0 / ((n - i + 2) as f64).ln()).sum();
    (n as f64 - 1.0) + 2.0 * log_delta * sum
}

/// Live bookkeeping for one solve.
#[derive(Debug, Clone)]
pub struct Instrument {
    n: usize,
    strictness: Strictness,
    stats: SolveStats,
}

impl Instrument {
    pub fn new(n: usize, delta_hat: &BigInt, u: &[Scalar], strictness: Strictness) -> Self {
        let psi = potential(u, delta_hat);
        let stats = SolveStats {
            potential_trace: vec![psi / std::f64::consts::LN_2],
            iteration_bound: iteration_bound(n, delta_hat),
            ..Default::default()
        };
        Instrument { n, strictness, stats }
    }

    fn report(&mut self, msg: String) -> Result<()> {
        match self.strictness {
            Strictness::Abort => Err(SolveError::Instrument(msg)),
            Strictness::Warn => {
                log::warn!("{msg}");
                self.stats.instrument_warnings += 1;
                Ok(())
            }
        }
    }

    pub fn record_bubble(&mut self, run: &crate::bubble::BubbleRun, fixed_so_far: usize) {
        let s = &mut self.stats;
        s.bubble_iters_total += run.iterations;
        s.bubble_calls.push(BubbleCall { n_active: run.n_active, iterations: run.iterations });
        s.max_bitsize = s.max_bitsize.max(run.stats.max_bits);
        s.progress_checks += run.stats.progress_checks;
        s.net_gain_checks += run.stats.net_gain_checks;
        s.rounding_applied += run.stats.rounding_applied;
        s.rounding_fallbacks += run.stats.rounding_fallbacks;
        let phase = fixed_so_far + 1;
        if s.per_phase.last().is_none_or(|p| p.phase != phase) {
            s.per_phase.push(PhaseStats { phase, n_active: run.n_active, ..Default::default() });
        }
        s.per_phase.last_mut().unwrap().bubble_iters += run.iterations;
    }

    pub fn record_halving(&mut self) {
        self.stats.halving_checks += 1;
    }

    pub fn observe_bits(&mut self, bits: u64) {
        self.stats.max_bitsize = self.stats.max_bitsize.max(bits);
    }

    /// Accounts one bound update: `before`/`after` are potentials, `k` the
    /// phase index, `last_of_phase` whether the update fixed a variable.
    pub fn assert_phase_progress(
        &mut self,
        before: f64,
        after: f64,
        k: usize,
        last_of_phase: bool,
    ) -> Result<()> {
        self.stats.outer_iters += 1;
        self.stats.potential_trace.push(after / std::f64::consts::LN_2);
        let drop = before - after;
        if let Some(ph) = self.stats.per_phase.last_mut() {
            ph.iterations += 1;
            ph.potential_drop += drop;
            ph.drops.push(drop);
        }
        if drop < -EPS_INSTR {
            self.report(format!("potential increased by {} in phase {k}", -drop))?;
        }
        if !last_of_phase {
            let required = 0.5 * ((self.n - k + 2) as f64).ln();
            self.stats.phase_checks += 1;
            if drop < required - EPS_INSTR {
                self.report(format!(
                    "potential dropped by {drop} < {required} in phase {k} (n = {})",
                    self.n
                ))?;
            }
        }
        Ok(())
    }

    /// Checks the total iteration count against the concrete bound.
    pub fn finish(mut self) -> Result<SolveStats> {
        let outer = self.stats.outer_iters as f64;
        if outer > self.stats.iteration_bound + EPS_INSTR {
            let msg = format!(
                "{} outer iterations exceed bound {}",
                self.stats.outer_iters, self.stats.iteration_bound
            );
            self.report(msg)?;
        }
        Ok(self.stats)
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn potential_examples() {
        let dh = BigInt::from(7);
        let p = potential(&[int(7), int(7)], &dh);
        assert!((p - 2.0 * 7f64.ln()).abs() < 1e-12);
        assert_eq!(potential(&[int(1), int(1)], &dh), 0.0);
        let p = potential(&[ratio(1, 8), ratio(1, 100)], &dh);
        assert!((p + 2.0 * 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn uniform_halving_passes_in_phase_one() {
        let dh = BigInt::from(64);
        let u: Vec<Scalar> = vec![int(8); 4];
        let halved: Vec<Scalar> = vec![int(4); 4];
        let mut ins = Instrument::new(4, &dh, &u, Strictness::Abort);
        let before = potential(&u, &dh);
        let after = potential(&halved, &dh);
        assert!((before - after - 4.0 * 2f64.ln()).abs() < 1e-12);
        assert!(4.0 * 2f64.ln() >= 0.5 * 5f64.ln());
        ins.assert_phase_progress(before, after, 1, false).unwrap();
    }

    #[test]
    fn last_iteration_of_phase_is_exempt() {
        let dh = BigInt::from(64);
        let u: Vec<Scalar> = vec![int(8); 4];
        let mut ins = Instrument::new(4, &dh, &u, Strictness::Abort);
        ins.assert_phase_progress(1.0, 1.0, 1, true).unwrap();
        assert!(ins.assert_phase_progress(1.0, 1.0, 1, false).is_err());
    }

    #[test]
    fn single_index_tight_case() {
        // u_p w_p = n + 1 on one coordinate, 1 elsewhere: the drop is ln(n+1).
        let n = 4usize;
        let dh = BigInt::from(1000);
        let u: Vec<Scalar> = vec![int(10); n];
        let mut after = u.clone();
        after[0] = ratio(10, (n + 1) as i64);
        let drop = potential(&u, &dh) - potential(&after, &dh);
        assert!((drop - ((n + 1) as f64).ln()).abs() < 1e-12);
        let mut ins = Instrument::new(n, &dh, &u, Strictness::Abort);
        ins.assert_phase_progress(potential(&u, &dh), potential(&after, &dh), 1, false).unwrap();
    }

    #[test]
    fn warn_mode_counts_instead_of_failing() {
        let dh = BigInt::from(64);
        let u: Vec<Scalar> = vec![int(8); 2];
        let mut ins = Instrument::new(2, &dh, &u, Strictness::Warn);
        ins.assert_phase_progress(1.0, 1.0, 1, false).unwrap();
        assert_eq!(ins.stats().instrument_warnings, 1);
    }
}
