use std::sync::Arc;

use delta_core::{apply_generator, generators, DeltaElement, DeltaParams, Generator, Level};
use folner_atlas::FolnerAtlas;
use group_kernel::{s3_fiber, MarkedGamma};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use profile_forge::ProfileSpec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use z_coupler::*;

fn base() -> Arc<MarkedGamma> {
    Arc::new(MarkedGamma::abelian_base(2, 3).unwrap())
}

fn lamplighter(kappa: u64) -> DeltaParams {
    DeltaParams::lamplighter(kappa, base()).unwrap()
}

/// `κ = 3`, one level at offset 2 with the `S_3` fiber (`|Γ'_1| = 3`).
fn derived() -> DeltaParams {
    let level = Level {
        k: 2,
        gamma: Arc::new(s3_fiber()),
    };
    DeltaParams::new(3, base(), vec![level], None).unwrap()
}

/// Elements of `𝒢_n = F_{κ^n}` listed by the Følner machinery, not by the numbering.
fn all_elements(p: &DeltaParams, n: u32) -> Vec<DeltaElement> {
    let atlas = FolnerAtlas::new(p.clone()).unwrap();
    let idx = atlas.full(p.kappa().pow(n)).unwrap();
    atlas
        .set(idx)
        .unwrap()
        .enumerate(5_000_000)
        .unwrap()
        .collect()
}

#[test]
fn block_intervals_worked_example_and_laws() {
    let b = block_intervals(16, 3, 3).unwrap();
    assert_eq!(b.digits, vec![1, 2, 1]);
    assert_eq!(b.intervals, vec![(16, 16), (15, 17), (9, 17), (0, 26)]);
    let z = block_intervals(0, 3, 3).unwrap();
    assert_eq!(z.intervals, vec![(0, 0), (0, 2), (0, 8), (0, 26)]);
    for t in 0..27 {
        let b = block_intervals(t, 3, 3).unwrap();
        assert_eq!(b.intervals[0], (t, t));
        assert_eq!(b.intervals[3], (0, 26));
        for i in 0..3 {
            let ((lo, hi), (lo2, hi2)) = (b.intervals[i], b.intervals[i + 1]);
            assert!(lo2 <= lo && hi <= hi2);
            assert_eq!(hi - lo, 3u64.pow(i as u32) - 1);
            assert_eq!(
                b.shell(i + 1).count() as u64,
                3u64.pow(i as u32 + 1) - 3u64.pow(i as u32)
            );
        }
        if t < 26 {
            let i0 = carry_position(t, 3, 3).unwrap();
            let next = block_intervals(t + 1, 3, 3).unwrap();
            for i in (i0 + 1)..=3 {
                assert_eq!(b.intervals[i], next.intervals[i]);
            }
        }
    }
    assert!(block_intervals(27, 3, 3).is_err());
}

#[test]
fn carry_positions() {
    assert_eq!(carry_position(16, 3, 3).unwrap(), 0);
    assert_eq!(carry_position(17, 3, 3).unwrap(), 2);
    assert_eq!(carry_position(0, 3, 3).unwrap(), 0);
    assert!(matches!(
        carry_position(26, 3, 3),
        Err(ZError::Saturated { t: 26 })
    ));
    let twos: Vec<u64> = (0..26)
        .filter(|&t| carry_position(t, 3, 3).unwrap() == 2)
        .collect();
    assert_eq!(twos, vec![8, 17]);
}

fn check_bijection(p: &DeltaParams, n: u32, expected: u64) {
    let enc = ZEncoder::new(p, n as usize).unwrap();
    assert_eq!(enc.size(), &BigUint::from(expected));
    let elements = all_elements(p, n);
    assert_eq!(elements.len() as u64, expected);
    let mut codes: Vec<u64> = elements
        .iter()
        .map(|x| enc.encode(x).unwrap().to_u64().unwrap())
        .collect();
    for (x, &z) in elements.iter().zip(&codes) {
        assert_eq!(&enc.decode(&BigUint::from(z)).unwrap(), x);
        assert_eq!(enc.encode_fast(&enc.to_dense(x).unwrap()), Some(z as u128));
    }
    codes.sort_unstable();
    assert!(codes.iter().enumerate().all(|(i, &z)| i as u64 == z));
}

#[test]
fn lamplighter_first_level_is_a_bijection_onto_0_647() {
    check_bijection(&lamplighter(3), 1, 648);
}

#[test]
fn derived_instance_first_level_is_a_bijection() {
    check_bijection(&derived(), 1, 1944);
}

#[test]
fn zero_and_top_codes() {
    for p in [lamplighter(3), derived()] {
        let enc = ZEncoder::new(&p, 2).unwrap();
        assert!(enc.encode(&DeltaElement::identity()).unwrap().is_zero());
        assert!(enc.decode(&BigUint::zero()).unwrap().is_identity());
        let top = enc.size() - 1u32;
        let x = enc.decode(&top).unwrap();
        let dv = enc.digit_vector(&x).unwrap();
        for (d, r) in dv.digits().iter().zip(enc.base().radices()) {
            assert_eq!(d + 1u32, *r);
        }
        assert!(enc.decode(enc.size()).is_err());
        assert_eq!(
            enc.mu_size() * BigUint::from(9u32) * BigUint::from(6u32).pow(9),
            *enc.size()
        );
    }
    let outside = DeltaElement::cursor(9);
    assert!(ZEncoder::new(&lamplighter(3), 2)
        .unwrap()
        .encode(&outside)
        .is_err());
}

#[test]
fn second_level_round_trips_on_samples() {
    for p in [lamplighter(3), derived()] {
        let enc = ZEncoder::new(&p, 2).unwrap();
        let atlas = FolnerAtlas::new(p.clone()).unwrap();
        let idx = atlas.full(9).unwrap();
        let set = atlas.set(idx).unwrap();
        assert_eq!(set.cardinality(), *enc.size());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100_000 {
            let x = set.sample(&mut rng);
            let z = enc.encode(&x).unwrap();
            assert_eq!(enc.decode(&z).unwrap(), x);
        }
        let rep = sampled_sweep(&enc, 20_000, 5).unwrap();
        assert_eq!(rep.round_trip_failures, 0);
        // Decoded codes land in the Følner set.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..2000 {
            let z = rand::Rng::gen_range(&mut rng, 0..enc.size_u128().unwrap());
            let x = enc.decode(&BigUint::from(z)).unwrap();
            assert!(atlas.contains(idx, &x));
        }
    }
}

#[test]
fn dense_action_matches_the_group_law() {
    let p = derived();
    let check = |enc: &ZEncoder, x: &DeltaElement| {
        for s in generators(&p) {
            let mut d = enc.to_dense(x).unwrap();
            let inside = enc.apply_dense(&mut d, s);
            let y = apply_generator(&p, x, s).unwrap();
            match enc.to_dense(&y) {
                Ok(dy) => {
                    assert!(inside, "{x:?} {s:?}");
                    assert_eq!(d, dy);
                }
                Err(_) => assert!(!inside),
            }
        }
    };
    let enc1 = ZEncoder::new(&p, 1).unwrap();
    for x in all_elements(&p, 1) {
        check(&enc1, &x);
    }
    let enc2 = ZEncoder::new(&p, 2).unwrap();
    let atlas = FolnerAtlas::new(p.clone()).unwrap();
    let set = atlas.set(atlas.full(9).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3000 {
        check(&enc2, &set.sample(&mut rng));
    }
}

#[test]
fn first_level_gaps_exhaustive() {
    for p in [lamplighter(3), derived()] {
        let enc = ZEncoder::new(&p, 1).unwrap();
        let rep = exhaustive_sweep(&enc, 1 << 30, 1).unwrap();
        assert_eq!(rep.elements as u128, rep.size);
        assert_eq!(
            (rep.collisions, rep.round_trip_failures, rep.escapes()),
            (0, 0, 0)
        );
        assert!(rep.surjective);
        assert_eq!(rep.violations(true), 0);
        assert_eq!(rep.violations(false), 0);
        assert!(rep.lamp_max_gap() <= 6);
        // Only t = 1 is interior; i_0(1) = 0 and the bound is 3·6³.
        let up = rep
            .stats
            .iter()
            .find(|s| s.gen == Generator::Cursor(1))
            .unwrap();
        assert_eq!(up.buckets[0].bound, 648);
        assert!(up.buckets[0].max_gap < 648 && up.buckets[0].min_gap >= 1);
        // The slow path agrees element by element.
        for x in all_elements(&p, 1).into_iter().filter(|x| x.t == 1) {
            for s in generators(&p) {
                let gap = enc.neighbor_gap(&x, s).unwrap().to_u128().unwrap();
                if s.is_lamp() {
                    assert!(gap <= 6);
                } else {
                    assert!((1..648).contains(&gap));
                }
            }
        }
        assert!(matches!(
            enc.neighbor_gap(&DeltaElement::identity(), Generator::A(1)),
            Err(ZError::Interior { .. })
        ));
    }
}

#[test]
fn carry_histogram_matches_counts() {
    for (kappa, n_max) in [(2u64, 3usize), (3, 1)] {
        let p = lamplighter(kappa);
        for n in 1..=n_max {
            let enc = ZEncoder::new(&p, n).unwrap();
            let hist = carry_histogram(&enc);
            let rep = exhaustive_sweep(&enc, 1 << 30, 97).unwrap();
            let per_cursor = enc.size() / BigUint::from(kappa.pow(n as u32));
            for m in 0..n {
                let formula =
                    &per_cursor * BigUint::from((kappa - 1) * kappa.pow((n - m - 1) as u32));
                assert_eq!(hist[m], formula, "kappa {kappa} n {n} m {m}");
                assert_eq!(BigUint::from(rep.carry_counts[m]), formula);
            }
            assert_eq!(BigUint::from(rep.saturated), hist[n]);
            let total: BigUint = hist.iter().sum();
            assert_eq!(&total, enc.size());
            assert_eq!(
                rep.violations(true) + rep.violations(false) + rep.round_trip_failures,
                0
            );
        }
    }
    // κ = 3, n = 2: m = 0 carries 2/3 of 𝒢_2 and m = 1 carries 2/9.
    let enc = ZEncoder::new(&lamplighter(3), 2).unwrap();
    let hist = carry_histogram(&enc);
    assert_eq!(&hist[0] * 3u32, enc.size() * 2u32);
    assert_eq!(&hist[1] * 9u32, enc.size() * 2u32);
    let hist3 = carry_histogram(&ZEncoder::new(&lamplighter(3), 3).unwrap());
    let per = ZEncoder::new(&lamplighter(3), 3).unwrap().size() / 27u32;
    assert_eq!(hist3[2], per * 2u32);
}

#[test]
fn cursor_gaps_can_fall_below_the_band_floor() {
    // Elements with i_0(t) = 0 are not all at distance >= κ^0 q^{κ^0} = q: only
    // the upper bound of the band holds.
    let enc = ZEncoder::new(&lamplighter(2), 3).unwrap();
    let rep = exhaustive_sweep(&enc, 1 << 30, 1 << 20).unwrap();
    let up = rep
        .stats
        .iter()
        .find(|s| s.gen == Generator::Cursor(1))
        .unwrap();
    assert!(up.buckets[0].min_gap < 6);
    for b in &up.buckets {
        assert!(b.max_gap < b.bound);
    }
}

#[test]
fn derived_twist_breaks_the_lamp_gap_law_beyond_the_first_level() {
    // b-lamp at site 0, cursor at k_1 = 2: the a-lamp twists f'_1(2), moving μ.
    let p = derived();
    let enc = ZEncoder::new(&p, 2).unwrap();
    let mut x = DeltaElement::cursor(2);
    x.f0.insert(0, 1);
    let gap = enc.neighbor_gap(&x, Generator::A(1)).unwrap();
    assert!(gap > BigUint::from(6u32), "gap {gap}");
    let y = apply_generator(&p, &x, Generator::A(1)).unwrap();
    assert_eq!(y.fprime.len(), 1);
    let rep = sampled_sweep(&enc, 20_000, 9).unwrap();
    assert!(rep.violations(true) > 0);
    assert_eq!(rep.violations(false), 0);
    assert_eq!(rep.round_trip_failures, 0);
}

#[test]
fn digit_stability_under_generators() {
    let p = lamplighter(3);
    let enc = ZEncoder::new(&p, 2).unwrap();
    let atlas = FolnerAtlas::new(p.clone()).unwrap();
    let set = atlas.set(atlas.full(9).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5000 {
        let x = set.sample(&mut rng);
        if !enc.is_interior(x.t as u64) {
            continue;
        }
        let dx = enc.digit_vector(&x).unwrap();
        for s in generators(&p) {
            let y = apply_generator(&p, &x, s).unwrap();
            let dy = enc.digit_vector(&y).unwrap();
            let keep = match s {
                Generator::Cursor(1) => 2 * (carry_position(x.t as u64, 2, 3).unwrap() + 1),
                Generator::Cursor(_) => 2 * (carry_position(x.t as u64 - 1, 2, 3).unwrap() + 1),
                _ => 0,
            };
            assert!(dx.agrees_above(&dy, keep), "{x:?} {s:?}");
        }
    }
}

#[test]
fn integrability_sums() {
    let rho_id = Integrand::RhoLog {
        rho: ProfileSpec::Identity,
    };
    for n in 1..=2 {
        let enc = ZEncoder::new(&lamplighter(3), n).unwrap();
        let rep = if n == 1 {
            exhaustive_sweep(&enc, 1 << 30, 1).unwrap()
        } else {
            sampled_sweep(&enc, 50_000, 1).unwrap()
        };
        let total = BigUint::from(rep.elements);
        for st in rep.stats.iter().filter(|s| s.gen.is_lamp()) {
            let rows = gap_sum_rows(&st.histogram, &total, &rho_id, None);
            assert!(rows.last().unwrap().partial_sum <= 6f64.ln() + 1e-12);
            let mass = gap_sum_rows(
                &st.histogram,
                &total,
                &Integrand::Constant { value: 1.0 },
                None,
            );
            assert!(mass.last().unwrap().partial_sum <= 1.0 + 1e-12);
            assert!(rows
                .windows(2)
                .all(|w| w[0].partial_sum <= w[1].partial_sum));
        }
    }
    let sqrt = ProfileSpec::power(1, 1);
    let rep = majorant_report(&sqrt, 3, 6, 8, 40);
    assert!(rep.verdict.summable);
    let bound = rep.uniform_bound.unwrap();
    assert!(rep.partial_sums.windows(2).all(|w| w[0] <= w[1]));
    assert!(rep.partial_sums.iter().all(|&s| s <= bound));
    assert!(majorant_report(&sqrt, 3, 6, 30, 40)
        .partial_sums
        .iter()
        .all(|&s| s <= bound));
    let id = majorant_report(&ProfileSpec::Identity, 3, 6, 8, 40);
    assert!(!id.verdict.summable && id.uniform_bound.is_none());
    // Per-n majorant rows from the carry counts are monotone in R.
    for n in 1..=8 {
        let enc = ZEncoder::new(&lamplighter(3), n).unwrap();
        let rows = cursor_majorant_rows(
            &enc,
            &carry_histogram(&enc),
            &Integrand::RhoLog { rho: sqrt.clone() },
        );
        assert!(rows
            .windows(2)
            .all(|w| w[0].partial_sum <= w[1].partial_sum));
        let weighted: f64 = rep.terms[..n].iter().sum::<f64>() * 2.0 / 3.0;
        assert!((rows.last().unwrap().partial_sum - weighted).abs() < 1e-9 * weighted.max(1.0));
    }
}

#[test]
fn composition_of_gauges() {
    let rho = Integrand::RhoLog {
        rho: ProfileSpec::power(1, 1),
    };
    let c = compose_integrability(&rho, &Integrand::Power { num: 3, den: 1 }).unwrap();
    assert_eq!(c.result, rho);
    assert!(c.up_to_constants);
    let psi = Integrand::Power { num: 2, den: 3 };
    assert_eq!(
        compose_integrability(&Integrand::identity(), &psi)
            .unwrap()
            .result,
        psi
    );
    let pp = compose_integrability(
        &Integrand::Power { num: 1, den: 2 },
        &Integrand::Power { num: 4, den: 3 },
    )
    .unwrap();
    assert_eq!(pp.result, Integrand::Power { num: 2, den: 3 });
    assert!(!pp.up_to_constants);
    assert!(compose_integrability(&psi, &rho).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn fast_and_exact_paths_agree(z in 0u128..(9 * 6u128.pow(9) * 2187)) {
        let enc = ZEncoder::new(&derived(), 2).unwrap();
        let d = enc.decode_fast(z).unwrap();
        let x = enc.to_delta(&d);
        prop_assert_eq!(enc.decode(&BigUint::from(z)).unwrap(), x.clone());
        prop_assert_eq!(enc.encode(&x).unwrap(), BigUint::from(z));
        prop_assert_eq!(enc.digit_vector(&x).unwrap().recompose(), BigUint::from(z));
    }
}
