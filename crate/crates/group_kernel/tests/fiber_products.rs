use std::collections::{HashSet, VecDeque};

use group_kernel::*;
use proptest::prelude::*;

/// Independent BFS over the table, generators closed under inverses by search.
fn bfs_eccentricity(g: &FiniteGroup, gens: &[Elem]) -> u32 {
    let mut sym: Vec<Elem> = gens.to_vec();
    for &s in gens {
        let inv = (0..g.order() as Elem)
            .find(|&h| g.mul(s, h) == g.identity())
            .unwrap();
        sym.push(inv);
    }
    let mut dist = vec![None; g.order()];
    dist[g.identity() as usize] = Some(0u32);
    let mut q = VecDeque::from([g.identity()]);
    while let Some(x) = q.pop_front() {
        for &s in &sym {
            let y = g.mul(x, s) as usize;
            if dist[y].is_none() {
                dist[y] = Some(dist[x as usize].unwrap() + 1);
                q.push_back(y as Elem);
            }
        }
    }
    dist.into_iter().map(|d| d.unwrap()).max().unwrap()
}

fn check_marked(g: &MarkedGamma, order: usize, prime: usize) {
    let gr = g.gamma();
    assert_eq!(gr.order(), order);
    assert_eq!(g.gamma_prime_order(), prime);
    assert_eq!(g.q(), 6);
    assert!(gr.is_normal(g.gamma_prime()));
    // theta is a surjective homomorphism onto A x B with kernel exactly the derived part.
    let mut image = HashSet::new();
    for x in 0..order as Elem {
        image.insert(g.theta(x));
        for y in 0..order as Elem {
            assert_eq!(g.theta(gr.mul(x, y)), g.ab().mul(g.theta(x), g.theta(y)));
        }
    }
    assert_eq!(image.len(), 6);
    let kernel: Vec<Elem> = (0..order as Elem)
        .filter(|&x| g.theta(x) == g.ab().identity())
        .collect();
    assert_eq!(kernel, g.gamma_prime());
    // the quotient is abelian of order 6 with A and B landing on the two factors
    assert_eq!(g.theta(g.a_elem(1)), 3);
    assert_eq!(g.theta(g.b_elem(1)), 1);
    assert_eq!(
        g.diameter(),
        bfs_eccentricity(gr, &[g.a_elem(1), g.b_elem(1)])
    );
}

#[test]
fn s3_fiber_product() {
    check_marked(&s3_fiber(), 18, 3);
}

#[test]
fn a5_fiber_product() {
    check_marked(&a5_fiber(), 360, 60);
}

#[test]
fn abelian_base_has_trivial_derived_part() {
    let g = MarkedGamma::abelian_base(2, 3).unwrap();
    assert_eq!(g.gamma_prime_order(), 1);
    assert_eq!(g.diameter(), bfs_eccentricity(g.gamma(), &[3, 1]));
}

#[test]
fn commutator_lands_in_derived_part() {
    let g = s3_fiber();
    let gr = g.gamma();
    let c = gr.commutator(g.a_elem(1), g.b_elem(1));
    assert_ne!(c, gr.identity());
    assert_eq!(g.derived_part(c), c);
    assert!(g.prime_index(c).is_some());
    assert_eq!(gr.element_order(c), 3);
}

/// (g f)' = g' · s(g) f' s(g)⁻¹ · s(g) s(f) s(gf)⁻¹ with s = θᴬ θᴮ.
#[test]
fn derived_part_product_rule_exhaustive() {
    for g in [s3_fiber(), a5_fiber()] {
        let gr = g.gamma();
        let s = |x: Elem| gr.mul(g.theta_a(x), g.theta_b(x));
        for x in 0..gr.order() as Elem {
            let xp = g.derived_part(x);
            assert_eq!(gr.mul(xp, s(x)), x);
            assert!(g.prime_index(xp).is_some());
            for y in 0..gr.order() as Elem {
                let xy = gr.mul(x, y);
                let twist = gr.mul(gr.mul(s(x), s(y)), gr.inv(s(xy)));
                assert!(g.prime_index(twist).is_some());
                let rhs = gr.mul(gr.mul(xp, gr.conjugate(s(x), g.derived_part(y))), twist);
                assert_eq!(g.derived_part(xy), rhs);
            }
        }
    }
}

#[test]
fn text_round_trip() {
    let g = s3_fiber();
    let t = text::to_text(&g);
    let back = text::from_text(&t).unwrap();
    assert_eq!(back.gamma(), g.gamma());
    assert_eq!(back.gamma_prime(), g.gamma_prime());
}

#[test]
fn text_with_corrupted_table_fails() {
    let g = s3_fiber();
    let t = text::to_text(&g).replacen("0 1 2", "1 0 2", 1);
    assert!(text::from_text(&t).is_err());
}

#[test]
fn log_ratio_band_reported() {
    let (s3, a5) = (s3_fiber(), a5_fiber());
    let (lo, hi) = derived_log_ratio_band(&[&s3, &a5]).unwrap();
    assert!(lo > 0.0 && lo <= hi && hi.is_finite());
}

proptest! {
    #[test]
    fn theta_sections_compose(i in 0usize..360, j in 0usize..360) {
        let g = a5_fiber();
        let gr = g.gamma();
        let (x, y) = (i as Elem, j as Elem);
        prop_assert_eq!(g.theta(gr.inv(x)), g.ab().inv(g.theta(x)));
        prop_assert_eq!(g.derived_part(gr.mul(g.derived_part(x), g.derived_part(y))),
                        gr.mul(g.derived_part(x), g.derived_part(y)));
    }
}
