mod common;

use bubble_lp::certificates;
use bubble_lp::config::Strictness;
use bubble_lp::geometry::{self, AffineSystem, DContext};
use bubble_lp::io::{self, emit_report, format_problem, parse_problem};
use bubble_lp::{scalar, solve_feasibility, Config, Problem, Scalar, Verdict};
use num_bigint::BigInt;
use proptest::prelude::*;

use common::{bfs_feasible, kkt_project, qi};

fn small_problem() -> impl Strategy<Value = Problem> {
    (1usize..=3, 2usize..=5).prop_flat_map(|(m, n)| {
        let m = m.min(n);
        (
            prop::collection::vec(prop::collection::vec(-4i64..=4, n), m),
            prop::collection::vec(-4i64..=4, m),
        )
            .prop_map(move |(a, b)| {
                let a = a.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
                Problem::new(n, a, b.into_iter().map(BigInt::from).collect())
            })
    })
}

fn positive_rational() -> impl Strategy<Value = Scalar> {
    (1i64..=20, 1i64..=6).prop_map(|(p, q)| scalar::ratio(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verdict_matches_enumeration_and_audit_replays(p in small_problem()) {
        let cfg = Config { strictness: Strictness::Abort, ..Config::default() };
        let sol = solve_feasibility(&p, &cfg).unwrap();
        let oracle = bfs_feasible(&p);
        match &sol.verdict {
            Verdict::Feasible(x) => {
                prop_assert!(oracle.is_some());
                prop_assert!(common::is_feasible_point(&p, x));
            }
            Verdict::Infeasible => prop_assert!(oracle.is_none()),
        }
        prop_assert!(certificates::replay_audit(&p, &sol.audit));
        prop_assert!(
            sol.audit.entries.len() as u64
                <= bubble_lp::driver::outer_iteration_cap(p.cols(), &sol.delta_sq)
        );
    }

    #[test]
    fn planted_instances_are_feasible(seed in any::<u64>(), n in 2usize..=6, m in 1usize..=3) {
        let p = io::gen_random(seed, m.min(n), n, 5, true);
        let sol = solve_feasibility(&p, &Config::default()).unwrap();
        prop_assert!(matches!(sol.verdict, Verdict::Feasible(_)));
    }

    #[test]
    fn box_fits_in_ball(u in prop::collection::vec(positive_rational(), 1..6), t in prop::collection::vec(0i64..=8, 6)) {
        let n = u.len();
        let x: Vec<Scalar> = u.iter().zip(&t).map(|(uj, tj)| uj * scalar::ratio(*tj, 8)).collect();
        let ctx = DContext::new(u).unwrap();
        prop_assert!(geometry::d_norm_sq(&x, &ctx).unwrap() <= qi(4 * n as i64));
    }

    #[test]
    fn projection_satisfies_kkt(
        u in prop::collection::vec(positive_rational(), 3..6),
        row in prop::collection::vec(-3i64..=3, 5),
        rhs in -5i64..=5,
        xs in prop::collection::vec(-6i64..=6, 5),
    ) {
        let n = u.len();
        let c = vec![row[..n].iter().map(|&v| qi(v)).collect::<Vec<_>>()];
        prop_assume!(c[0].iter().any(|v| *v != qi(0)));
        let d = vec![qi(rhs)];
        let xbar: Vec<Scalar> = xs[..n].iter().map(|&v| scalar::ratio(v, 3)).collect();
        let ctx = DContext::new(u.clone()).unwrap();
        let (y, _) = geometry::project_affine(&AffineSystem::new(c.clone(), d.clone()), &xbar, &ctx).unwrap();
        prop_assert_eq!(y, kkt_project(&c, &d, &u, &xbar));
    }

    #[test]
    fn problem_text_round_trip(p in small_problem()) {
        prop_assert_eq!(parse_problem(&format_problem(&p)).unwrap(), p);
    }

    #[test]
    fn scalar_text_round_trip(n in any::<i64>(), d in 1i64..=i64::MAX) {
        let x = scalar::ratio(n, d);
        prop_assert_eq!(scalar::parse(&scalar::format(&x)).unwrap(), x);
    }

    #[test]
    fn reports_are_byte_stable(seed in 0u64..1000) {
        let p = io::gen_random(seed, 2, 4, 5, seed % 2 == 0);
        let cfg = Config::default();
        let a = emit_report(&solve_feasibility(&p, &cfg).unwrap(), &cfg);
        let b = emit_report(&solve_feasibility(&p, &cfg).unwrap(), &cfg);
        prop_assert_eq!(&a, &b);
        let report = io::parse_report(&a).unwrap();
        prop_assert!(certificates::replay_audit(&p, &report.audit_log().unwrap()));
    }
}
