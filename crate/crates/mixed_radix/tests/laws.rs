use mixed_radix::*;
use num_bigint::BigUint;
use proptest::prelude::*;

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

/// Independent digit oracle: scan every digit vector in lexicographic order.
fn all_digit_vectors(radices: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for &b in radices {
        let mut next = Vec::new();
        for prefix in &out {
            for d in 0..b {
                let mut v = prefix.clone();
                v.push(d);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn eval(digits: &[u64], radices: &[u64]) -> u64 {
    let mut w = 1;
    let mut acc = 0;
    for (d, b) in digits.iter().zip(radices) {
        acc += d * w;
        w *= b;
    }
    acc
}

#[test]
fn scan_agrees_with_division_on_small_bases() {
    for radices in [&[2u64, 5, 8][..], &[3, 2, 3, 2], &[7], &[2, 2, 2, 2, 2]] {
        let base = MixedRadixBase::from_u64s(radices, false).unwrap();
        for v in all_digit_vectors(radices) {
            let x = eval(&v, radices);
            let d = decompose(&big(x), &base).unwrap();
            assert_eq!(d.digits_u64().unwrap(), v);
        }
    }
}

#[test]
fn worked_value_119() {
    // 1 + 2*4 + 10*11 over the base (2,5,8) with an open top digit.
    let base = MixedRadixBase::from_u64s(&[2, 5, 8], true).unwrap();
    let v = [1u64, 4, 11];
    assert_eq!(1 + 2 * 4 + 10 * 11, 119);
    assert_eq!(
        decompose(&big(119), &base).unwrap().digits_u64().unwrap(),
        v
    );
}

#[test]
fn pairwise_locality_base_2323() {
    let r = [2u64, 3, 2, 3];
    let base = MixedRadixBase::from_u64s(&r, false).unwrap();
    for k in 0..r.len() {
        let w: u64 = r[..=k].iter().product();
        for x in 0..36u64 {
            for y in x..36u64 {
                if y - x < w {
                    assert!(addition_locality_holds(&big(x), &big(y), k, &base).unwrap());
                }
            }
        }
    }
}

#[test]
fn counting_matches_histogram() {
    for radices in [&[2u64, 3, 2][..], &[2, 5, 8], &[3, 3, 3, 3]] {
        let base = MixedRadixBase::from_u64s(radices, false).unwrap();
        let total: u64 = radices.iter().product();
        for k in 0..radices.len() {
            let mut hist = vec![0u64; radices.len()];
            for x in 0..total {
                let digits = decompose(&big(x), &base).unwrap().digits_u64().unwrap();
                if let Some(j) = (k + 1..radices.len()).find(|&j| digits[j] + 1 < radices[j]) {
                    hist[j] += 1;
                }
            }
            for (m, &h) in hist.iter().enumerate() {
                assert_eq!(
                    count_by_carry_index(&base, k, m).unwrap(),
                    big(h),
                    "{radices:?} k={k} m={m}"
                );
            }
        }
    }
}

#[test]
fn range_law() {
    let r = [3u64, 2, 4, 2];
    let base = MixedRadixBase::from_u64s(&r, false).unwrap();
    for x in 0..48u64 {
        let d = decompose(&big(x), &base).unwrap().digits_u64().unwrap();
        for m in 0..r.len() {
            let bound: u64 = r[..=m].iter().product();
            assert_eq!(x < bound, d[m + 1..].iter().all(|&v| v == 0));
        }
    }
}

fn small_base() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(2u64..9, 1..6)
}

proptest! {
    #[test]
    fn round_trip(radices in small_base(), seed in any::<u64>()) {
        let base = MixedRadixBase::from_u64s(&radices, false).unwrap();
        let total: u64 = radices.iter().product();
        let x = seed % total;
        let d = decompose(&big(x), &base).unwrap();
        prop_assert_eq!(recompose(&d), big(x));
    }

    #[test]
    fn unbounded_top_round_trip(radices in small_base(), x in any::<u32>()) {
        let base = MixedRadixBase::from_u64s(&radices, true).unwrap();
        let d = decompose(&big(x as u64), &base).unwrap();
        prop_assert_eq!(d.recompose(), big(x as u64));
    }

    #[test]
    fn locality(radices in small_base(), a in any::<u64>(), gap in any::<u64>(), k in 0usize..5) {
        let k = k % radices.len();
        let base = MixedRadixBase::from_u64s(&radices, false).unwrap();
        let total: u64 = radices.iter().product();
        let w: u64 = radices[..=k].iter().product();
        let x = a % total;
        let y = (x + gap % w).min(total - 1);
        prop_assert!(addition_locality_holds(&big(x), &big(y), k, &base).unwrap());
    }

    #[test]
    fn lipschitz_images_cover(radices in small_base(), step in 1u64..50, i in 0usize..5) {
        let i = i % radices.len();
        let base = MixedRadixBase::from_u64s(&radices, false).unwrap();
        let total: u64 = radices.iter().product();
        let w: u64 = radices[..=i].iter().product();
        prop_assume!(step < w);
        let mut image: Vec<BigUint> = (0..total).step_by(step as usize).map(big).collect();
        if image.last() != Some(&big(total - 1)) {
            image.push(big(total - 1));
        }
        prop_assert!(max_gap(&image) <= big(step));
        prop_assert!(lipschitz_image_covers(&image, &base, i, &big(step)).unwrap());
    }
}
