mod common;

use std::collections::{BTreeSet, HashSet};

use dd_coupler::*;
use delta_core::generators;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

const BUDGET: u64 = 1 << 22;

/// `χ` rebuilt from its recursive definition: `u`'s inverse where defined, else
/// the value at `v - 1`.
fn chi_oracle(c: &CursorMap) -> Vec<u64> {
    let d = c.d() as usize;
    let mut inv = vec![None; d];
    for p in 0..c.q_blocks {
        for t in 0..c.width {
            inv[c.u(p, t) as usize] = Some(p * c.width + t);
        }
    }
    let mut out = Vec::with_capacity(d);
    for v in 0..d {
        let value = inv[v].unwrap_or_else(|| out[v - 1]);
        out.push(value);
    }
    out
}

fn check_cursor_laws(c: &CursorMap) {
    let d = c.d();
    let image: BTreeSet<u64> = (0..c.q_blocks)
        .flat_map(|p| (0..c.width).map(move |t| (p, t)))
        .map(|(p, t)| c.u(p, t))
        .collect();
    assert_eq!(image.len() as u64, c.q_blocks * c.width, "u is injective");
    assert!(image.iter().all(|&v| v < d));
    assert!(!c.in_image(d));
    for v in 0..d {
        assert_eq!(c.in_image(v), image.contains(&v));
        // No two consecutive values are skipped, so χ(v - 1) is defined by u.
        if !image.contains(&v) {
            assert!(v > 0 && image.contains(&(v - 1)));
        }
    }
    let oracle = chi_oracle(c);
    let chi: Vec<u64> = (0..d).map(|v| c.chi(v)).collect();
    assert_eq!(chi, oracle);
    for v in image.iter().copied() {
        let (p, t) = c.u_inverse(v).unwrap();
        assert_eq!(c.u(p, t), v);
    }
    for v in (0..d).filter(|v| !image.contains(v)) {
        assert_eq!(c.u_inverse(v), Err(DDError::Cursor { v }));
    }
    // Fibers of single values have one or two elements.
    let mut fiber = vec![0u64; (c.q_blocks * c.width) as usize];
    for &y in &chi {
        fiber[y as usize] += 1;
    }
    assert!(fiber.iter().all(|&f| f == 1 || f == 2));
    // Preimages of intervals: an interval of at most twice the length.
    let top = c.q_blocks * c.width;
    for a in 0..top {
        for b in a..top {
            let pre: Vec<u64> = (0..d)
                .filter(|&v| (a..=b).contains(&chi[v as usize]))
                .collect();
            let (lo, hi) = c.chi_preimage(a, b);
            assert_eq!(pre, (lo..=hi).collect::<Vec<_>>());
            assert!(hi - lo + 1 <= 2 * (b - a + 1));
        }
    }
}

#[test]
fn cursor_map_skips_odd_offsets_of_the_last_block() {
    let c = CursorMap::new(4, 3, 9).unwrap();
    assert_eq!(c.d(), 39);
    let skipped: Vec<u64> = (0..39).filter(|&v| !c.in_image(v)).collect();
    assert_eq!(skipped, vec![28, 30, 32]);
    assert_eq!(c.u(2, 5), 23);
    assert_eq!(
        (0..3).map(|t| c.u(3, t)).collect::<Vec<_>>(),
        vec![27, 29, 31]
    );
    assert_eq!(c.u(3, 3), 33);
    assert_eq!(c.u(3, 8), 38);
    // Each skipped value shares the fiber of its predecessor.
    for v in skipped {
        assert_eq!(c.chi(v), c.chi(v - 1));
    }
    check_cursor_laws(&c);
}

#[test]
fn cursor_map_without_remainder_is_the_identity() {
    let c = CursorMap::new(3, 0, 9).unwrap();
    assert!((0..27).all(|v| c.chi(v) == v && c.in_image(v)));
    assert!(CursorMap::new(0, 0, 3).is_err());
    assert!(CursorMap::new(2, 3, 3).is_err());
}

#[test]
fn cursor_map_laws_on_small_configurations() {
    for width in [3, 9] {
        for q in 1..=5 {
            for rem in 0..width {
                check_cursor_laws(&CursorMap::new(q, rem, width).unwrap());
            }
        }
    }
}

fn check_blocks(c: &CursorMap, kappa: u64, n: usize) {
    let d = c.d();
    let p = block_depth(d, kappa);
    assert!(kappa.pow(p as u32 - 1) < d && d <= kappa.pow(p as u32));
    for big_p in 0..c.q_blocks {
        for t in 0..c.width {
            let blocks = target_blocks(c, kappa, n, p, big_p, t);
            let v = c.u(big_p, t);
            for (i, &(lo, hi)) in blocks.iter().enumerate() {
                assert!(lo <= v && v <= hi, "cursor in every block");
                let size = hi - lo + 1;
                if i < p {
                    let k = kappa.pow(i as u32);
                    assert!(
                        k <= size && size <= 2 * k,
                        "size of block {i} at ({big_p}, {t}): {size}"
                    );
                }
                if i > 0 {
                    let (a, b) = blocks[i - 1];
                    assert!(lo <= a && b <= hi, "nesting at {i}");
                }
            }
            assert_eq!(blocks[p], (0, d - 1));
            // The blocks depend on t only through digits at or above i.
            if t + 1 < c.width {
                let next = target_blocks(c, kappa, n, p, big_p, t + 1);
                let mut carry = 0;
                while (t / kappa.pow(carry as u32)) % kappa == kappa - 1 {
                    carry += 1;
                }
                for i in carry + 1..=p {
                    assert_eq!(blocks[i], next[i], "shift stability at {i}");
                }
            }
        }
    }
}

#[test]
fn blocks_nest_and_have_controlled_sizes() {
    for rem in 0..3 {
        check_blocks(&CursorMap::new(4, rem, 3).unwrap(), 3, 1);
    }
    for (q, rem, width, n) in [
        (1, 1, 3, 1),
        (2, 0, 3, 1),
        (3, 3, 27, 3),
        (5, 12, 81, 4),
        (1, 5, 9, 2),
        (3, 7, 9, 2),
    ] {
        check_blocks(&CursorMap::new(q, rem, width).unwrap(), 3, n);
    }
}

fn check_base(c: &DDCoupling) {
    let idx = c.index();
    let q = BigUint::from(c.params().q());
    let q_d = q.pow(idx.big_d as u32);
    let target = c.params().target().params();
    for big_p in 0..idx.q_blocks {
        for t in 0..idx.width {
            let base = c.numbering().base(big_p, t);
            assert_eq!(base.len(), idx.p + 1 + idx.big_m);
            let mut prefix = BigUint::one();
            for (i, b) in base.iter().enumerate() {
                prefix *= b;
                let kappa_i = c.params().kappa().pow(i as u32) as u32;
                if i < idx.p {
                    assert!(q.pow(kappa_i) <= prefix && prefix <= q.pow(2 * kappa_i));
                } else if i == idx.p {
                    assert_eq!(prefix, q_d, "radix product at ({big_p}, {t})");
                } else {
                    let order = BigUint::from(target.prime_order(i - idx.p));
                    assert!(prefix >= &q_d * order);
                }
            }
            assert_eq!(&prefix, c.numbering().size_per_cursor());
        }
    }
}

#[test]
fn pair_a_index_and_spreading() {
    let p = common::pair_a();
    let c = DDCoupling::new(&p, 1).unwrap();
    let idx = c.index();
    // Oracle: |𝒢_1| = 3 · 6³; F_{3,0,1} holds 3 · 6³ elements with trivial
    // derived data, the successor F_{3,1,1} triples that (|Λ_1| = 3 at site 2).
    assert_eq!(idx.g_size, BigUint::from(648u32));
    assert_eq!((idx.d, idx.i, idx.j), (3, 0, 1));
    assert_eq!(idx.found_size, BigUint::from(648u32));
    assert_eq!(idx.pred_size, Some(BigUint::from(72u32)));
    assert_eq!((idx.big_d, idx.big_i, idx.big_j), (3, 1, 1));
    assert_eq!(idx.k_size, BigUint::from(1944u32));
    assert_eq!((idx.q_blocks, idx.rem, idx.p, idx.big_m), (1, 0, 1, 1));
    let s = c.spreading();
    assert_eq!(s.max_source, BigUint::from(215u32));
    assert_eq!(s.max_target, BigUint::from(647u32));
    assert_eq!(
        (s.a.clone(), s.neg_b.clone()),
        (BigUint::from(4u32), BigUint::from(213u32))
    );
    assert!(s.within_q3(6));
    check_spreading_exhaustive(s);
    check_base(&c);
    let carve = c.carving();
    assert!(carve.removed.is_zero(), "the box union is the full product");
    assert!(carve.k_sandwich);
}

fn check_spreading_exhaustive(s: &SpreadingMap) {
    let max = s.max_source.to_u64().unwrap();
    let values: Vec<BigUint> = (0..=max)
        .map(|x| s.apply(&BigUint::from(x)).unwrap())
        .collect();
    assert!(values[0].is_zero());
    assert_eq!(values[max as usize], s.max_target);
    for w in values.windows(2) {
        assert!(w[0] < w[1]);
        assert!(&w[1] - &w[0] <= s.a);
    }
    let image: HashSet<&BigUint> = values.iter().collect();
    for y in 0..=s.max_target.to_u64().unwrap() {
        let y = BigUint::from(y);
        match s.inverse(&y) {
            Ok(x) => assert_eq!(values[x.to_usize().unwrap()], y),
            Err(_) => assert!(!image.contains(&y)),
        }
    }
    assert!(s.apply(&(&s.max_source + 1u32)).is_err());
}

#[test]
fn spreading_with_equal_ranges_is_the_identity() {
    let s = SpreadingMap::new(BigUint::from(50u32), BigUint::from(50u32)).unwrap();
    assert_eq!(s.a, BigUint::one());
    assert!(s.neg_b.is_zero());
    for x in 0..=50u32 {
        assert_eq!(s.apply(&BigUint::from(x)).unwrap(), BigUint::from(x));
    }
    assert!(SpreadingMap::new(BigUint::from(51u32), BigUint::from(50u32)).is_err());
    assert!(SpreadingMap::new(BigUint::zero(), BigUint::from(50u32)).is_err());
}

/// The triple-map image, listed from the box description.
fn box_union(c: &DDCoupling) -> HashSet<(u64, BigUint, u64)> {
    let idx = c.index();
    let q_pow = BigUint::from(c.params().q()).pow(idx.width as u32);
    let low = (&q_pow * c.max_e()).to_u64().unwrap();
    let top = c.theta_tilde_size().to_u64().unwrap();
    let mut out = HashSet::new();
    for t in 0..idx.width {
        for theta in 0..top {
            let rows = if theta < low {
                idx.q_blocks
            } else {
                c.last_p() + 1
            };
            for big_p in 0..rows {
                out.insert((t, BigUint::from(theta), big_p));
            }
        }
    }
    out
}

/// Injection checks driven by the Følner enumeration of `𝒢_1` and `𝒦_1`
/// rather than by the numberings.
fn check_injection(p: &DDParams) -> DDCoupling {
    let c = DDCoupling::new(p, 1).unwrap();
    let source = p.source();
    let target = p.target();
    let g_idx = source.full(3).unwrap();
    let k_idx = c.index().k_index();
    let elements: Vec<_> = source
        .set(g_idx)
        .unwrap()
        .enumerate(BUDGET)
        .unwrap()
        .collect();
    assert_eq!(BigUint::from(elements.len()), c.index().g_size);
    let mut triples = HashSet::new();
    let mut images = HashSet::new();
    for x in &elements {
        let dense = c.encoder().to_dense(x).unwrap();
        let d = c.source_digits(&dense);
        triples.insert((d.t, d.theta_tilde.clone(), d.big_p));
        let y = c.inject(x).unwrap();
        assert!(target.contains(k_idx, &y), "image inside 𝒦_n");
        let g = c.numbering().from_delta(target, &y).unwrap();
        assert!(c.in_h(&g).unwrap(), "image inside ℋ_n");
        assert_eq!(g.v, c.numbering().cursor().u(d.big_p, d.t));
        images.insert(y);
    }
    assert_eq!(triples, box_union(&c), "triple map onto the box union");
    assert_eq!(images.len(), elements.len(), "injective");
    let report = c.verify_exhaustive(BUDGET).unwrap();
    assert!(report.triple_bijective && report.injective && report.image_in_h);
    c
}

#[test]
fn pair_a_injection_and_numbering_round_trip() {
    let p = common::pair_a();
    let c = check_injection(&p);
    // Every element of 𝒦_1 (1944 of them) through ϑ and back.
    let target = p.target();
    let k: Vec<_> = target
        .set(c.index().k_index())
        .unwrap()
        .enumerate(BUDGET)
        .unwrap()
        .collect();
    assert_eq!(k.len(), 1944);
    let mut codes = BTreeSet::new();
    for y in &k {
        let g = c.numbering().from_delta(target, y).unwrap();
        let theta = c.numbering().vartheta(&g).unwrap();
        assert!(&theta < c.numbering().size_per_cursor());
        assert_eq!(c.numbering().vartheta_decode(&theta, g.v).unwrap(), g);
        assert_eq!(&c.numbering().to_delta(&g), y);
        codes.insert(c.numbering().code(&g).unwrap().to_u64().unwrap());
    }
    assert_eq!(codes, (0..1944).collect());
    let identity = c
        .numbering()
        .from_delta(target, &Default::default())
        .unwrap();
    assert!(c.numbering().vartheta(&identity).unwrap().is_zero());
    let report = c.verify_exhaustive(BUDGET).unwrap();
    assert_eq!((report.ep_changes, report.nu_changes), (0, 0));
    let density = c.density(BUDGET).unwrap();
    assert!(density.within_bound, "{density:?}");
}

#[test]
fn extract_ep_divides_by_q() {
    let p = common::pair_c();
    let c = DDCoupling::new(&p, 1).unwrap();
    let enc = c.encoder();
    let q = c.index().q_blocks;
    assert_eq!(q, 2);
    let nus: Vec<BigUint> = vec![BigUint::zero(); 2];
    let x = enc.assemble(1, nus.clone(), BigUint::zero()).unwrap();
    assert_eq!(c.extract_ep(&x), (BigUint::zero(), 0));
    let x = enc.assemble(1, nus.clone(), BigUint::from(q)).unwrap();
    assert_eq!(c.extract_ep(&x), (BigUint::one(), 0));
    let x = enc.assemble(1, nus, BigUint::from(2 * q + 1)).unwrap();
    assert_eq!(c.extract_ep(&x), (BigUint::from(2u32), 1));
}

#[test]
fn pair_c_carving_density_and_generator_stability() {
    let p = common::pair_c();
    let c = check_injection(&p);
    let idx = c.index();
    assert_eq!(idx.g_size, BigUint::from(5832u32));
    assert_eq!(
        (idx.big_d, idx.q_blocks, idx.rem, idx.p, idx.big_m),
        (6, 2, 0, 2, 0)
    );
    assert_eq!(idx.k_size, BigUint::from(6u32 * 6u32.pow(6)));
    check_base(&c);
    check_spreading_exhaustive(c.spreading());
    let carve = c.carving();
    assert!(!carve.removed.is_zero() && carve.removed_within_bound && carve.k_sandwich);
    let density = c.density(BUDGET).unwrap();
    assert_eq!(
        density.h_size + carve.removed.to_u64().unwrap(),
        density.k_size
    );
    assert_eq!(density.unreachable, 0);
    assert!(density.within_bound, "{density:?}");
    // b-lamps keep (E, P) and ν̃_{>=1}; a-lamps only move them through the
    // derived-part twist at cursors t >= k_1.
    let enc = c.encoder();
    let gens = generators(p.source().params());
    for z in 0..enc.size_u128().unwrap() {
        let x = enc.decode_fast(z).unwrap();
        let d = c.source_digits(&x);
        for &s in gens.iter().filter(|s| s.is_lamp()) {
            let mut y = x.clone();
            if !enc.apply_dense(&mut y, s) {
                continue;
            }
            let dy = c.source_digits(&y);
            assert_eq!(dy.nus[1..], d.nus[1..]);
            if matches!(s, delta_core::Generator::B(_)) || x.t < 1 {
                assert_eq!((dy.e, dy.big_p), (d.e.clone(), d.big_p));
            }
        }
    }
}

#[test]
fn q_grows_along_the_power_pair() {
    let p = common::pair_b();
    let qs: Vec<u64> = (1..=4)
        .map(|n| find_target_index(&p, n).unwrap().q_blocks)
        .collect();
    assert_eq!(qs, vec![1, 1, 3, 5]);
    assert!(qs.windows(2).all(|w| w[0] <= w[1]));
    for n in 1..=4 {
        let idx = find_target_index(&p, n).unwrap();
        assert!(idx.pred_size.clone().unwrap() < idx.g_size && idx.g_size <= idx.found_size);
        assert_eq!(idx.big_d, idx.q_blocks * idx.width + idx.rem);
        assert!(idx.rem < idx.width);
        let kappa = 3u64;
        assert!(kappa.pow(idx.p as u32 - 1) < idx.big_d && idx.big_d <= kappa.pow(idx.p as u32));
    }
}

#[test]
fn identical_parameters_locate_the_source_set() {
    let lamp = common::lamplighter();
    let id = profile_forge::ProfileSpec::Identity;
    let p = DDParams::new(lamp.clone(), lamp, id.clone(), id, 2, common::M_MAX).unwrap();
    for n in 1..=2 {
        let idx = find_target_index(&p, n).unwrap();
        assert_eq!(idx.d, 3u64.pow(n as u32));
        assert_eq!(idx.found_size, idx.g_size);
    }
}

proptest! {
    #[test]
    fn cursor_map_random_laws(q in 1u64..7, width in 2u64..12, rem_seed in 0u64..1000) {
        let c = CursorMap::new(q, rem_seed % width, width).unwrap();
        let oracle = chi_oracle(&c);
        for v in 0..c.d() {
            prop_assert_eq!(c.chi(v), oracle[v as usize]);
        }
        for p in 0..q {
            for t in 0..width {
                prop_assert_eq!(c.chi(c.u(p, t)), p * width + t);
            }
        }
    }

    #[test]
    fn spreading_random_laws(src in 1u64..5000, extra in 0u64..200_000, xs in proptest::collection::vec(0u64..5000, 1..40)) {
        let tgt = src + extra;
        let s = SpreadingMap::new(BigUint::from(src), BigUint::from(tgt)).unwrap();
        prop_assert_eq!(s.apply(&BigUint::from(src)).unwrap(), BigUint::from(tgt));
        prop_assert!(s.apply(&BigUint::zero()).unwrap().is_zero());
        for x in xs.into_iter().map(|x| x % src) {
            let (y0, y1) = (s.apply(&BigUint::from(x)).unwrap(), s.apply(&BigUint::from(x + 1)).unwrap());
            prop_assert!(y0 < y1 && &y1 - &y0 <= s.a);
            prop_assert_eq!(s.inverse(&y0).unwrap(), BigUint::from(x));
        }
    }
}
