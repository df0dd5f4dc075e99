mod common;

use dd_coupler::*;
use delta_core::Generator;

const EXHAUSTIVE: SampleMode = SampleMode::Exhaustive { budget: 1 << 22 };

fn audit_gens() -> [Generator; 4] {
    [
        Generator::Cursor(1),
        Generator::Cursor(-1),
        Generator::A(1),
        Generator::B(1),
    ]
}

fn assert_clean(a: &DistanceAudit) {
    assert_eq!(a.violations, 0, "{} at n = {}", a.generator, a.n);
    assert_eq!(a.locality_failures, 0);
    assert_eq!(a.exact_above_certified, 0);
    assert!(a.max_fitted_constant.is_finite());
    assert!(a.max_explicit_ratio <= 1.0, "{}", a.max_explicit_ratio);
    if a.gen.is_lamp() {
        assert!(a.rows.iter().filter(|r| r.m <= 2).all(|r| r.observed == 0));
    }
}

#[test]
fn pair_a_audits_are_clean() {
    let p = common::pair_a();
    let c = DDCoupling::new(&p, 1).unwrap();
    for s in audit_gens().into_iter().chain([Generator::B(2)]) {
        let a = distance_audit(&c, s, EXHAUSTIVE).unwrap();
        // 𝒢_1^{(1)} is the middle cursor: 6³ elements.
        assert_eq!(a.checked, 216);
        assert_clean(&a);
        assert_eq!(a.gap_failures, 0);
        let sum = integrability_sum(&c, &a);
        assert!((sum.total - (sum.low + sum.middle + sum.high)).abs() < 1e-12);
        assert!(sum.total_phi_one <= 1.0 + 1e-12);
        let last = a.rows.last().unwrap().partial_sum;
        assert!((last - sum.total).abs() < 1e-9);
    }
    assert!(!p.hypotheses().holds, "ρ̃ = ρ fails the exponent hypothesis");
}

#[test]
fn shape_bound_matches_interval_and_level_forms() {
    let p = common::pair_a();
    let c = DDCoupling::new(&p, 1).unwrap();
    // m <= p: 3 (2κ^m - 1) sites of travel plus lamp letters, diam(A × B) = 2.
    assert_eq!(dd_coupler::audit::shape_bound(&c, 0), 3 + 2 * 2);
    assert_eq!(dd_coupler::audit::shape_bound(&c, 1), 3 * 5 + 2 * 6);
    let level = delta_core::level_mode_bound(p.target().params(), 1, 2);
    assert_eq!(dd_coupler::audit::shape_bound(&c, 2), level);
    assert_eq!(dd_coupler::audit::shape_bound(&c, 3), level);
}

#[test]
fn pair_b_audits_before_the_twist_reaches_the_interior() {
    let p = common::pair_b();
    assert!(p.hypotheses().holds);
    assert!(p.hypotheses().epsilon >= EPSILON_FLOOR);
    for (n, mode) in [
        (1, EXHAUSTIVE),
        (
            2,
            SampleMode::Sampled {
                samples: 3000,
                seed: 5,
            },
        ),
    ] {
        let c = DDCoupling::new(&p, n).unwrap();
        for s in audit_gens() {
            let a = distance_audit(&c, s, mode).unwrap();
            assert_clean(&a);
            assert!(integrability_sum(&c, &a).total_phi_one <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn pair_b_twist_is_the_only_source_of_violations() {
    let p = common::pair_b();
    let c = DDCoupling::new(&p, 3).unwrap();
    assert!(c.index().q_at_least_3);
    let mode = SampleMode::Sampled {
        samples: 2000,
        seed: 9,
    };
    for s in audit_gens() {
        let a = distance_audit(&c, s, mode).unwrap();
        assert_eq!(a.violations, a.violations_with_ep_change);
        match s {
            Generator::A(_) => assert!(a.violations > 0, "the a-lamp twist moves (E, P)"),
            _ => {
                assert_eq!(a.violations, 0);
                assert_eq!(a.ep_changes, 0);
                assert_eq!(a.locality_failures, 0);
            }
        }
        assert!(a.max_explicit_ratio <= 1.0);
    }
}

#[test]
fn sampled_audits_are_deterministic() {
    let p = common::pair_b();
    let c = DDCoupling::new(&p, 2).unwrap();
    let mode = SampleMode::Sampled {
        samples: 500,
        seed: 42,
    };
    let a = distance_audit(&c, Generator::Cursor(1), mode).unwrap();
    let b = distance_audit(&c, Generator::Cursor(1), mode).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.checked + a.rejected, 500);
}

#[test]
fn uniform_bound_over_small_n() {
    let p = common::pair_b();
    let cs: Vec<DDCoupling> = (1..=3).map(|n| DDCoupling::new(&p, n).unwrap()).collect();
    let mut runs = Vec::new();
    for c in &cs {
        let mode = if c.index().n == 1 {
            EXHAUSTIVE
        } else {
            SampleMode::Sampled {
                samples: 1500,
                seed: 3,
            }
        };
        for s in [Generator::Cursor(1), Generator::B(1)] {
            let a = distance_audit(c, s, mode).unwrap();
            let sum = integrability_sum(c, &a);
            runs.push((c, a, sum));
        }
    }
    let refs: Vec<_> = runs.iter().map(|(c, a, s)| (*c, a, s)).collect();
    let lamp = uniform_bound(&refs, true).unwrap();
    assert_eq!(lamp.checked_n, vec![1, 2, 3]);
    assert!(lamp.bounded && lamp.series.is_finite());
    let cursor = uniform_bound(&refs, false).unwrap();
    assert_eq!(cursor.checked_n, vec![3]);
    assert!(cursor.bounded);
}

#[test]
fn audit_rejects_foreign_generators() {
    let c = DDCoupling::new(&common::pair_a(), 1).unwrap();
    assert!(matches!(
        distance_audit(&c, Generator::A(2), EXHAUSTIVE),
        Err(DDError::Domain(_))
    ));
    assert!(matches!(
        distance_audit(&c, Generator::Cursor(2), EXHAUSTIVE),
        Err(DDError::Domain(_))
    ));
}
