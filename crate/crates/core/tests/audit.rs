use bubble_lp::certificates::{replay_audit, replay_audit_detailed, AuditLog};
use bubble_lp::scalar::{self, ratio};
use bubble_lp::{solve_feasibility, Config, Problem, Verdict};

fn infeasible_line() -> (Problem, AuditLog) {
    let p = Problem::from_i64(&[&[1, 1]], &[-1]);
    let sol = solve_feasibility(&p, &Config::default()).unwrap();
    assert_eq!(sol.verdict, Verdict::Infeasible);
    (p, sol.audit)
}

#[test]
fn end_to_end_replay() {
    let (p, audit) = infeasible_line();
    assert!(!audit.entries.is_empty());
    replay_audit_detailed(&p, &audit).unwrap();
}

#[test]
fn loosened_bound_is_rejected() {
    let (p, audit) = infeasible_line();
    let mut bad = audit.clone();
    bad.entries[0].u_prime[0] += ratio(1, 7);
    assert!(!replay_audit(&p, &bad));
    let mut bad = audit.clone();
    bad.entries[0].u_after[1] += ratio(1, 7);
    assert!(!replay_audit(&p, &bad));
    let mut bad = audit;
    bad.entries[0].w[0] = scalar::int(0);
    assert!(!replay_audit(&p, &bad));
}

#[test]
fn audit_survives_json() {
    let (p, audit) = infeasible_line();
    let text = serde_json::to_string(&audit).unwrap();
    let back: AuditLog = serde_json::from_str(&text).unwrap();
    assert_eq!(back, audit);
    assert!(replay_audit(&p, &back));
}

#[test]
fn audit_is_for_its_own_problem() {
    let (_, audit) = infeasible_line();
    let other = Problem::from_i64(&[&[1, 2]], &[-1]);
    assert!(!replay_audit(&other, &audit));
}
