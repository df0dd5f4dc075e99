use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use profile_forge::*;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn big(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

fn pow(b: u64, e: u32) -> BigUint {
    BigUint::from(b).pow(e)
}

fn sqrt_seq(m: usize) -> Sequences {
    build_sequences(&ProfileSpec::power(1, 1), 3, 3, m).unwrap()
}

/// Breakpoint table `(x, f̄(x))` built straight from the sequences.
fn tilde_table(seq: &Sequences) -> Vec<(BigRational, BigRational)> {
    let mut pts = Vec::new();
    for m in 0..seq.k.len() {
        let (k, l) = (big(&seq.k[m]), big(&seq.l[m]));
        pts.push((&k * &l, l.clone()));
        if m + 1 < seq.k.len() {
            pts.push((big(&seq.k[m + 1]) * &l, l));
        }
    }
    pts
}

fn interpolate(pts: &[(BigRational, BigRational)], x: &BigRational) -> BigRational {
    for w in pts.windows(2) {
        let ((a, fa), (b, fb)) = (&w[0], &w[1]);
        if x <= b {
            if a == b {
                return fa.clone();
            }
            return fa + (fb - fa) * (x - a) / (b - a);
        }
    }
    pts.last().unwrap().1.clone()
}

#[test]
fn closed_forms() {
    let id = build_sequences(&ProfileSpec::Identity, 3, 3, 5).unwrap();
    assert!(id.open_ended);
    assert_eq!(id.k, vec![BigUint::one()]);
    assert_eq!(id.l, vec![BigUint::one()]);

    let s = sqrt_seq(6);
    for m in 0..=6u32 {
        assert_eq!(s.k[m as usize], pow(3, m));
        assert_eq!(s.l[m as usize], pow(3, m));
    }

    let log = build_sequences(&ProfileSpec::IteratedLog { r: 1 }, 3, 3, 4).unwrap();
    for m in 1..=4u32 {
        assert_eq!(log.k[m as usize], pow(3, m));
        assert_eq!(log.l[m as usize], pow(3, 3u32.pow(m)));
    }
    for w in log.k.windows(2) {
        assert!(&w[1] >= &(&w[0] * 2u32));
    }
    assert!(build_sequences(&ProfileSpec::IteratedLog { r: 1 }, 3, 3, 40).is_err());
}

#[test]
fn tabulated_greedy_reproduces_the_square_root_example() {
    let points: Vec<(f64, f64)> = (0..8).map(|m| (9f64.powi(m), 3f64.powi(m))).collect();
    let spec = ProfileSpec::Tabulated { points };
    let seq = build_sequences(&spec, 3, 3, 6).unwrap();
    assert_eq!(seq.k, sqrt_seq(6).k);
    assert_eq!(seq.l, sqrt_seq(6).l);
    // f̄ tracks f within a factor-4 band on a grid.
    let end = seq.domain_end().unwrap().to_f64().unwrap();
    for i in 0..=400 {
        let x = end.powf(i as f64 / 400.0);
        let fb = seq
            .bar_f(&BigRational::from_float(x).unwrap())
            .unwrap()
            .to_f64()
            .unwrap();
        let ratio = fb / spec.companion(x);
        assert!((0.25..=4.0).contains(&ratio), "x={x} ratio={ratio}");
    }
}

#[test]
fn class_violations_are_rejected() {
    let decreasing = ProfileSpec::Tabulated {
        points: vec![(1.0, 2.0), (2.0, 1.5)],
    };
    assert!(matches!(
        decreasing.validate(),
        Err(ProfileError::NotInClass(_))
    ));
    let superlinear = ProfileSpec::Tabulated {
        points: vec![(1.0, 1.0), (2.0, 5.0)],
    };
    assert!(matches!(
        build_sequences(&superlinear, 3, 3, 3),
        Err(ProfileError::NotInClass(_))
    ));
    assert!(build_sequences(&ProfileSpec::Identity, 1, 3, 3).is_err());
}

#[test]
fn bar_f_matches_the_breakpoint_table() {
    let seq = sqrt_seq(5);
    let table = tilde_table(&seq);
    for (x, fx) in &table {
        assert_eq!(&seq.bar_f(x).unwrap(), fx, "breakpoint {x}");
    }
    // Continuity at k_{m+1} l_m: both branches give l_m.
    for m in 0..5 {
        let x = big(&seq.k[m + 1]) * big(&seq.l[m]);
        assert_eq!(seq.bar_f(&x).unwrap(), big(&seq.l[m]));
        assert_eq!(&x / big(&seq.k[m + 1]), big(&seq.l[m]));
    }
    // Worked value at x = 27: the plateau f̄ = l_1 = 3, so ρ̄ = 9.
    assert_eq!(seq.bar_f(&r(27, 1)).unwrap(), r(3, 1));
    assert_eq!(seq.bar_rho(&r(27, 1)).unwrap(), r(9, 1));
    assert_eq!(seq.bar_f(&r(18, 1)).unwrap(), r(3, 1));
    assert_eq!(seq.bar_f(&r(54, 1)).unwrap(), r(6, 1));
    for i in 1..2000 {
        let x = r(i * 7 + 3, 5);
        if x > seq.domain_end().unwrap() {
            break;
        }
        assert_eq!(seq.bar_f(&x).unwrap(), interpolate(&table, &x), "x = {x}");
    }
    assert_eq!(seq.bar_f(&r(1, 3)).unwrap(), BigRational::one());
    assert!(matches!(
        seq.bar_f(&(r(1, 1) + seq.domain_end().unwrap())),
        Err(ProfileError::Beyond(_))
    ));
}

#[test]
fn companions_stay_in_class() {
    for seq in [
        sqrt_seq(5),
        build_sequences(&ProfileSpec::IteratedLog { r: 1 }, 2, 2, 4).unwrap(),
    ] {
        let end = seq.domain_end().unwrap();
        let n = 3000;
        let grid: Vec<BigRational> = (0..=n)
            .map(|i| BigRational::one() + (&end - BigRational::one()) * r(i, n))
            .collect();
        for w in grid.windows(2) {
            let (fa, fb) = (seq.bar_f(&w[0]).unwrap(), seq.bar_f(&w[1]).unwrap());
            let (ra, rb) = (seq.bar_rho(&w[0]).unwrap(), seq.bar_rho(&w[1]).unwrap());
            assert!(fa <= fb && ra <= rb);
            assert!(&w[0] / &fa <= &w[1] / &fb && &w[0] / &ra <= &w[1] / &rb);
        }
        // c' ρ̄(x') <= ρ̄(c' x') for c' < 1 and x' >= 1/c'.
        for c in [r(1, 2), r(1, 3), r(2, 7)] {
            for x in grid
                .iter()
                .step_by(37)
                .filter(|x| *x * &c >= BigRational::one())
            {
                assert!(&c * seq.bar_rho(x).unwrap() <= seq.bar_rho(&(x * &c)).unwrap());
            }
        }
    }
}

#[test]
fn rho_bij_is_close_bijective_and_dominates() {
    let delta = default_delta();
    for seq in [
        sqrt_seq(4),
        build_sequences(&ProfileSpec::IteratedLog { r: 1 }, 2, 2, 3).unwrap(),
    ] {
        let bij = seq.rho_bij(&delta).unwrap();
        let end = seq.domain_end().unwrap();
        let n = 10_000;
        let mut prev: Option<BigRational> = None;
        for i in 0..=n {
            let x = BigRational::one() + (&end - BigRational::one()) * r(i, n);
            let y = bij.eval(&x).unwrap();
            let gap = (&y - seq.bar_rho(&x).unwrap()).abs();
            assert!(gap <= &delta * r(2, 1), "gap {gap} at {x}");
            if let Some(p) = &prev {
                assert!(&y > p);
            }
            assert_eq!(bij.inverse(&y).unwrap(), x);
            prev = Some(y);
        }
        // ρ̄(x) = y implies x <= ρ_bij⁻¹(2y) whenever 2y is in the image.
        let top = bij.image_end().unwrap();
        for i in 0..=2000 {
            let x = BigRational::one() + (&end - BigRational::one()) * r(i, 2000);
            let y = seq.bar_rho(&x).unwrap();
            if &y * r(2, 1) <= top {
                assert!(x <= bij.inverse(&(&y * r(2, 1))).unwrap());
            }
        }
        // Corner segment runs from k_{m+1} - δ to k_{m+1} + δ.
        let pts = bij.points();
        assert_eq!(pts[1].1, big(&seq.k[1]) - &delta);
        assert_eq!(pts[2].1, big(&seq.k[1]) + &delta);
    }
    let id = build_sequences(&ProfileSpec::Identity, 3, 3, 3).unwrap();
    let bij = id.rho_bij(&delta).unwrap();
    assert_eq!(bij.eval(&r(1000, 7)).unwrap(), r(1000, 7));
    assert!(sqrt_seq(2).rho_bij(&r(1, 2)).is_err());
}

#[test]
fn hypothesis_verdicts() {
    let id = ProfileSpec::Identity;
    let id_seq = build_sequences(&id, 3, 3, 5).unwrap();
    let rep = hypothesis_report(&id, &id_seq, 30, None);
    assert!(!rep.cursor_series.summable);
    assert!(rep.cursor_series.ln_terms.iter().all(|t| t.abs() < 1e-12));

    let sq = ProfileSpec::power(1, 1);
    let rep = hypothesis_report(&sq, &sqrt_seq(12), 30, Some((&id_seq, &default_delta())));
    assert!(rep.cursor_series.summable);
    for (m, t) in rep.cursor_series.ln_terms.iter().enumerate() {
        assert!((t - (-(m as f64) / 2.0 * 3f64.ln())).abs() < 1e-9);
    }
    let limit = 1.0 / (1.0 - 3f64.powf(-0.5));
    assert!(rep
        .cursor_series
        .partial_sums
        .iter()
        .all(|&s| s <= limit + 1e-9));
    assert!(rep.lamp_series.summable);
    let fit = rep.exponent.unwrap();
    assert!((fit.slope - 0.5).abs() < 1e-6, "slope {}", fit.slope);
    assert!(fit.epsilon > 0.0);

    let log = ProfileSpec::IteratedLog { r: 1 };
    let rep = hypothesis_report(&log, &build_sequences(&log, 3, 3, 6).unwrap(), 30, None);
    assert!(rep.cursor_series.summable);
    assert!(rep.lamp_series.summable);
}

proptest! {
    #[test]
    fn round_trip_on_random_rationals(n in 1i64..2_000_000, d in 1i64..1000) {
        let seq = sqrt_seq(6);
        let bij = seq.rho_bij(&default_delta()).unwrap();
        let x = BigRational::one() + r(n, d);
        prop_assume!(x <= seq.domain_end().unwrap());
        let y = bij.eval(&x).unwrap();
        prop_assert_eq!(bij.inverse(&y).unwrap(), x);
    }
}
