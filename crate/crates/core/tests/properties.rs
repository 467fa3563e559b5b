use picardlab_core::engine::{self, PipelineConfig};
use picardlab_core::gap::{self, GapOutcome, SeqWithMetric};
use picardlab_core::implicit::family::{make_j_point, make_j_right, FamilyParams};
use picardlab_core::implicit::f_from_psi;
use picardlab_core::oracle;
use picardlab_core::rational::{self, int, Rational};
use picardlab_core::scalar::{self, eval_lstar, ScalarFn};
use picardlab_core::space::{self, Axiom, FiniteSpace, IntervalSpace, OrderKind, Point, Selfmap, SpaceModel};
use picardlab_core::CheckConfig;
use proptest::prelude::*;

fn chain_leq(n: usize) -> Vec<Vec<bool>> {
    (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect()
}

fn positions() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::btree_set(-50i64..50, 2..9).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn line_embedded_spaces_validate(pos in positions(), den in 1i64..6) {
        let pos: Vec<Rational> = pos.into_iter().map(|p| rational::ratio(p, den)).collect();
        let s = FiniteSpace::on_line(&pos, chain_leq(pos.len())).unwrap();
        prop_assert!(space::validate_space(&SpaceModel::Finite(s)).is_valid());
    }

    #[test]
    fn stretched_distance_breaks_triangle(pos in positions()) {
        // points in increasing order; stretching d(first, last) past the
        // sum of the two legs through a middle point must be caught
        let n = pos.len();
        prop_assume!(n >= 3);
        let mut d: Vec<Vec<Rational>> =
            (0..n).map(|i| (0..n).map(|j| int((pos[i] - pos[j]).abs())).collect()).collect();
        let stretched = &d[0][n - 1] + int(1);
        d[0][n - 1] = stretched.clone();
        d[n - 1][0] = stretched;
        let s = FiniteSpace::new(d, chain_leq(n)).unwrap();
        let rep = space::validate_space(&SpaceModel::Finite(s));
        prop_assert!(rep.violations.iter().any(|v| v.axiom == Axiom::Triangle));
    }

    #[test]
    fn lstar_bounds_and_homogeneity(t in prop::array::uniform5(0.0f64..10.0), c in 0.0f64..5.0) {
        let l = eval_lstar(&t[0], &t[1], &t[2], &t[3], &t[4]);
        prop_assert!(l >= t[0] && l >= t[1] && l >= t[2]);
        prop_assert!(l >= (t[3] + t[4]) / 2.0);
        prop_assert!(l <= t.iter().cloned().fold(0.0, f64::max) + 1e-12);
        let lc = eval_lstar(&(c * t[0]), &(c * t[1]), &(c * t[2]), &(c * t[3]), &(c * t[4]));
        prop_assert!((lc - c * l).abs() <= 1e-9 * (1.0 + c * l));
    }

    #[test]
    fn q_value_of_continuous_linear(alpha in 0.05f64..0.95, s in 0.01f64..8.0) {
        let f = ScalarFn::linear_f64(alpha);
        let q = scalar::q_value(&f, s);
        prop_assert!(q >= alpha * s);
        prop_assert!(q <= alpha * (s + 1e-2 * s.min(1.0)) + 1e-12);
        prop_assert!(q < s);
    }

    #[test]
    fn matkowski_counts_for_linear(alpha in 0.1f64..0.9, t in 0.1f64..8.0) {
        let eps = 1e-8;
        let r = scalar::check_matkowski(&ScalarFn::linear_f64(alpha), &[t], 100_000, eps);
        prop_assert!(r.passed());
        let n = r.evidence("iterations").next().unwrap();
        let expected = ((eps / t).ln() / alpha.ln()).ceil();
        prop_assert!((n - expected).abs() <= 1.0, "n = {}, expected {}", n, expected);
    }

    #[test]
    fn families_are_members(w in prop::array::uniform6(0.0f64..3.0), j in 1usize..=6, seed in any::<u64>()) {
        let p = FamilyParams { count: 4, len: 60, seed, ..FamilyParams::default() };
        prop_assert!(make_j_right(w, j, &p).unwrap().is_member());
        let fam = make_j_point(w, j, &p).unwrap();
        prop_assert!(fam.is_member());
        prop_assert!(fam.sequences.iter().flatten().all(|t| t[j - 1] == w[j - 1]));
    }

    #[test]
    fn orbit_triangle_invariant(a in 0.0f64..0.99, c in 0.0f64..0.01, x0 in 0.0f64..1.0, amorphous in any::<bool>()) {
        let order = if amorphous { OrderKind::Amorphous } else { OrderKind::Usual };
        let space = SpaceModel::Interval(IntervalSpace::new(0.0, 1.0, order).unwrap());
        let t = Selfmap::Interval(ScalarFn::expr(&format!("{a}*t + {c}")).unwrap());
        let tr = engine::picard_orbit(&space, &t, Point::Real(x0), 10_000, 1e-12);
        for n in 1..tr.r.len() {
            prop_assert!((tr.s[n - 1] - tr.r[n - 1]).abs() <= tr.r[n] + 1e-12);
        }
        let ascending = tr.points.windows(2).all(|w| space.leq(&w[0], &w[1]));
        prop_assert_eq!(tr.flags.ascending, ascending);
    }

    #[test]
    fn theorem3_and_theorem2_traces_match(alpha in 0.3f64..0.9) {
        let space = SpaceModel::Interval(IntervalSpace::new(0.0, 1.0, OrderKind::Usual).unwrap());
        let t = Selfmap::Interval(ScalarFn::expr("(t+1)/2").unwrap());
        let cfg = PipelineConfig {
            checks: CheckConfig { trials: 32, ..CheckConfig::default() },
            ..PipelineConfig::default()
        };
        let psi = ScalarFn::linear_f64(alpha);
        let v3 = engine::run_theorem3(&space, &t, &psi, Point::Real(0.0), &cfg);
        let v2 = engine::run_theorem2(&space, &t, &mut f_from_psi(&psi).unwrap(), Point::Real(0.0), &cfg);
        prop_assert_eq!(v3.trace, v2.trace);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn gap_witnesses_satisfy_exact_invariants(legs in prop::collection::vec(0.4f64..1.0, 30..60), lo in 0.0f64..0.1) {
        // legs alternate between lo and the drawn upper ends, in shrinking steps
        let mut pts = vec![lo];
        for (k, hi) in legs.iter().enumerate() {
            let steps = k + 8;
            let (from, to) = if k % 2 == 0 { (lo, *hi) } else { (*hi, lo) };
            for i in 1..=steps {
                pts.push(from + (to - from) * i as f64 / steps as f64);
            }
        }
        let n = pts.len();
        let seq = SeqWithMetric::from_reals(pts);
        let theta = [0.3];
        if let Ok(GapOutcome::Gap(w)) = gap::extract_gap(&seq, &theta, n) {
            let r = gap::verify_witness(&seq, &w, &theta, f64::INFINITY);
            prop_assert!(r.passed(), "{:?}", r);
        }
    }

    #[test]
    fn finite_conclusion_whenever_hypotheses_hold(seed in any::<u64>(), n in 1usize..=10, density in 0.0f64..0.8) {
        let inst = oracle::random_instance(n, density, 0.5, seed).unwrap();
        let rep = oracle::brute_force(&inst);
        prop_assert!(rep.increasing);
        if rep.hypotheses_hold {
            prop_assert!(rep.conclusion_holds, "{:?}", rep);
        }
    }
}
