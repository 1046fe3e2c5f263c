//! Problem text format, random instances and solve reports.
//!
//! Problem format: first line `m n`, then `m` lines of `n` integers (rows of
//! `A`), then one line of `m` integers (`b`). Text after `#` and blank lines
//! are ignored. Integers have arbitrary precision.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificates::{AuditEntry, AuditLog, Terminal};
use crate::config::{Config, OutputFormat};
use crate::driver::{Solution, Verdict};
use crate::geometry::{self, RowReduction};
use crate::instrument::SolveStats;
use crate::problem::Problem;
use crate::scalar::{self, serde_str, Scalar};

/// Parse failure with a 1-based line and token position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, token {token}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub token: usize,
    pub msg: String,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<&'a str>,
}

fn err(line: usize, token: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, token, msg: msg.into() }
}

fn ints(line: &Line<'_>, expected: usize, what: &str) -> Result<Vec<BigInt>, ParseError> {
    if line.tokens.len() != expected {
        return Err(err(
            line.number,
            line.tokens.len().min(expected) + 1,
            format!("expected {expected} integers in {what}, found {}", line.tokens.len()),
        ));
    }
    line.tokens
        .iter()
        .enumerate()
        .map(|(k, t)| {
            t.parse::<BigInt>()
                .map_err(|_| err(line.number, k + 1, format!("not an integer: {t:?}")))
        })
        .collect()
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some(Line { number: i + 1, tokens })
    });
    let last_line = text.lines().count().max(1);

    let header = lines.next().ok_or_else(|| err(last_line, 1, "missing header \"m n\""))?;
    let dims = ints(&header, 2, "header")?;
    let to_usize = |v: &BigInt, k: usize| {
        usize::try_from(v).map_err(|_| err(header.number, k, format!("invalid dimension {v}")))
    };
    let m = to_usize(&dims[0], 1)?;
    let n = to_usize(&dims[1], 2)?;

    let mut a = Vec::with_capacity(m);
    for i in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| err(last_line, 1, format!("missing row {} of A", i + 1)))?;
        a.push(ints(&line, n, "row of A")?);
    }
    let b = if m == 0 {
        Vec::new()
    } else {
        let line = lines.next().ok_or_else(|| err(last_line, 1, "missing right-hand side"))?;
        ints(&line, m, "right-hand side")?
    };
    if let Some(extra) = lines.next() {
        return Err(err(extra.number, 1, "unexpected trailing data"));
    }
    Ok(Problem::new(n, a, b))
}

/// Inverse of [`parse_problem`].
pub fn format_problem(problem: &Problem) -> String {
    let mut out = format!("{} {}\n", problem.rows(), problem.cols());
    let join = |xs: &[BigInt]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    for row in problem.a() {
        out.push_str(&join(row));
        out.push('\n');
    }
    if problem.rows() > 0 {
        out.push_str(&join(problem.b()));
        out.push('\n');
    }
    out
}

/// Random instance with entries uniform in `[-coeff_bound, coeff_bound]`.
/// Dependent rows are dropped, so the result may have fewer than `m` rows.
/// With `planted`, `b = A x0` for a random integer `x0 >= 0`.
pub fn gen_random(seed: u64, m: usize, n: usize, coeff_bound: i64, planted: bool) -> Problem {
    assert!(m <= n && coeff_bound >= 1, "gen_random needs m <= n and coeff_bound >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<Vec<BigInt>> = (0..m)
        .map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-coeff_bound..=coeff_bound))).collect())
        .collect();
    let b: Vec<BigInt> = if planted {
        let x0: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=coeff_bound)).collect();
        a.iter().map(|row| row.iter().zip(&x0).map(|(aij, xj)| aij * xj).sum()).collect()
    } else {
        (0..m).map(|_| BigInt::from(rng.gen_range(-coeff_bound..=coeff_bound))).collect()
    };
    let homogeneous = Problem::new(n, a, vec![BigInt::zero(); m]);
    let rows = match geometry::row_reduce(&homogeneous) {
        RowReduction::Reduced { rows, .. } => rows,
        RowReduction::Inconsistent { .. } => unreachable!("b = 0 is always consistent"),
    };
    let a = rows.iter().map(|&i| homogeneous.a()[i].clone()).collect();
    let b = rows.iter().map(|&i| b[i].clone()).collect();
    Problem::new(n, a, b)
}

/// JSON report of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// `"feasible"` or `"infeasible"`.
    pub verdict: String,
    #[serde(with = "serde_str::opt_vec", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<Vec<AuditEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<Terminal>,
    pub stats: SolveStats,
    pub delta_sq: String,
}

impl Report {
    pub fn new(solution: &Solution, config: &Config) -> Self {
        let (verdict, x) = match &solution.verdict {
            Verdict::Feasible(x) => ("feasible", Some(x.clone())),
            Verdict::Infeasible => ("infeasible", None),
        };
        let (audit, terminal) = if config.emit_audit {
            (Some(solution.audit.entries.clone()), Some(solution.audit.terminal.clone()))
        } else {
            (None, None)
        };
        Report {
            verdict: verdict.into(),
            x,
            audit,
            terminal,
            stats: solution.stats.clone(),
            delta_sq: solution.delta_sq.to_string(),
        }
    }

    pub fn audit_log(&self) -> Option<AuditLog> {
        Some(AuditLog { entries: self.audit.clone()?, terminal: self.terminal.clone()? })
    }
}

pub fn emit_report(solution: &Solution, config: &Config) -> String {
    let report = Report::new(solution, config);
    match config.format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(&report).expect("report serialization cannot fail") + "\n"
        }
        OutputFormat::Text => format_text(&report),
    }
}

fn format_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "verdict: {}", r.verdict);
    if let Some(x) = &r.x {
        let xs: Vec<String> = x.iter().map(scalar::format).collect();
        let _ = writeln!(out, "x: {}", xs.join(" "));
    }
    let s = &r.stats;
    let _ = writeln!(out, "delta_sq: {}", r.delta_sq);
    let _ = writeln!(out, "outer iterations: {}", s.outer_iters);
    let _ = writeln!(out, "bubble iterations: {}", s.bubble_iters_total);
    let _ = writeln!(out, "max bit size: {}", s.max_bitsize);
    for ph in &s.per_phase {
        let _ = writeln!(
            out,
            "phase {}: {} active, {} outer, {} bubble, potential drop {:.6}",
            ph.phase, ph.n_active, ph.iterations, ph.bubble_iters, ph.potential_drop
        );
    }
    if let Some(entries) = &r.audit {
        let _ = writeln!(out, "audit entries: {}", entries.len());
    }
    out
}

pub fn parse_report(text: &str) -> Result<Report, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let p = parse_problem("1 2\n1 1\n1").unwrap();
        assert_eq!(p, Problem::from_i64(&[&[1, 1]], &[1]));
        let p = parse_problem("2 2\n1 0\n0 1\n3 4").unwrap();
        assert_eq!(p, Problem::from_i64(&[&[1, 0], &[0, 1]], &[3, 4]));
        let e = parse_problem("1 2\n1 x\n1").unwrap_err();
        assert_eq!((e.line, e.token), (2, 2));
    }

    #[test]
    fn parse_comments_and_big_integers() {
        let text = "# header\n1 2  # dims\n\n123456789012345678901234567890 -1\n# rhs\n7\n";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.a()[0][0], "123456789012345678901234567890".parse::<BigInt>().unwrap());
        assert_eq!(p.b(), &[BigInt::from(7)]);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_problem("").unwrap_err().line, 1);
        let e = parse_problem("1 2\n1 1 1\n1").unwrap_err();
        assert_eq!((e.line, e.token), (2, 3));
        let e = parse_problem("2 2\n1 1\n1 1\n1").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_problem("1 2\n1 1\n1\n5").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(parse_problem("-1 2\n").is_err());
    }

    #[test]
    fn format_round_trip() {
        let p = Problem::from_i64(&[&[1, -2, 3], &[0, 4, -5]], &[6, -7]);
        assert_eq!(parse_problem(&format_problem(&p)).unwrap(), p);
    }

    #[test]
    fn random_is_deterministic_and_full_rank() {
        let p = gen_random(7, 3, 5, 5, false);
        assert_eq!(p, gen_random(7, 3, 5, 5, false));
        assert!(matches!(geometry::row_reduce(&p), RowReduction::Reduced { ref rows, .. } if rows.len() == p.rows()));
        for row in p.a() {
            assert!(row.iter().all(|x| x.magnitude() <= &5u32.into()));
        }
    }

    #[test]
    fn report_examples() {
        let cfg = Config::default();
        let sol = crate::driver::solve_feasibility(&Problem::from_i64(&[&[1, 1]], &[1]), &cfg).unwrap();
        let text = emit_report(&sol, &cfg);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["verdict"], "feasible");
        assert_eq!(v["x"], serde_json::json!(["1/2", "1/2"]));
        assert!(v["delta_sq"].is_string());
        assert_eq!(parse_report(&text).unwrap(), Report::new(&sol, &cfg));
        assert_eq!(text, emit_report(&sol, &cfg));
    }
}
