use std::collections::BTreeMap;
use std::sync::Arc;

use delta_core::*;
use group_kernel::{a5_fiber, s3_fiber, Elem, MarkedGamma};
use proptest::prelude::*;

fn base() -> Arc<MarkedGamma> {
    Arc::new(MarkedGamma::abelian_base(2, 3).unwrap())
}

fn lamplighter() -> DeltaParams {
    DeltaParams::lamplighter(2, base()).unwrap()
}

fn two_levels() -> DeltaParams {
    let levels = vec![
        Level {
            k: 2,
            gamma: Arc::new(s3_fiber()),
        },
        Level {
            k: 6,
            gamma: Arc::new(a5_fiber()),
        },
    ];
    DeltaParams::new(3, base(), levels, None).unwrap()
}

/// Independent model: the full product of `Γ_m ≀ ℤ` over all levels, with the
/// `a`-generator at site 0 on every level and the `b`-generator at site `k_m`.
#[derive(Clone, Debug, PartialEq)]
struct Full {
    t: i64,
    values: Vec<BTreeMap<i64, Elem>>,
}

impl Full {
    fn identity(levels: usize) -> Self {
        Self {
            t: 0,
            values: vec![BTreeMap::new(); levels + 1],
        }
    }

    fn group(p: &DeltaParams, m: usize) -> &group_kernel::FiniteGroup {
        if m == 0 {
            p.base().ab()
        } else {
            p.level(m).gamma.gamma()
        }
    }

    fn get(&self, p: &DeltaParams, m: usize, x: i64) -> Elem {
        self.values[m]
            .get(&x)
            .copied()
            .unwrap_or(Self::group(p, m).identity())
    }

    fn generator(p: &DeltaParams, s: Generator) -> Self {
        let n = p.levels().len();
        let mut g = Self::identity(n);
        let nb = p.b_order() as Elem;
        match s {
            Generator::Cursor(d) => g.t = d as i64,
            Generator::A(a) => {
                g.values[0].insert(0, a as Elem * nb);
                for m in 1..=n {
                    g.values[m].insert(0, p.level(m).gamma.a_elem(a));
                }
            }
            Generator::B(b) => {
                g.values[0].insert(0, b as Elem);
                for m in 1..=n {
                    g.values[m].insert(p.level(m).k as i64, p.level(m).gamma.b_elem(b));
                }
            }
        }
        g
    }

    fn mul(&self, p: &DeltaParams, other: &Self) -> Self {
        let mut out = Self::identity(self.values.len() - 1);
        out.t = self.t + other.t;
        for m in 0..self.values.len() {
            let gr = Self::group(p, m);
            let mut sites: Vec<i64> = self.values[m].keys().copied().collect();
            sites.extend(other.values[m].keys().map(|s| s + self.t));
            for s in sites {
                let v = gr.mul(self.get(p, m, s), other.get(p, m, s - self.t));
                if v != gr.identity() {
                    out.values[m].insert(s, v);
                } else {
                    out.values[m].remove(&s);
                }
            }
        }
        out
    }

    fn word(p: &DeltaParams, w: &[Generator]) -> Self {
        w.iter().fold(Self::identity(p.levels().len()), |acc, &s| {
            acc.mul(p, &Self::generator(p, s))
        })
    }
}

fn assert_matches_model(p: &DeltaParams, x: &DeltaElement, model: &Full) {
    assert_eq!(x.t, model.t);
    let (lo, hi) = range_interval(p, x);
    for m in 0..=p.levels().len() {
        let k = p.k(m).unwrap() as i64;
        for s in (lo - 2)..=(hi + k + 2) {
            assert_eq!(
                full_value(p, x, m, s),
                model.get(p, m, s),
                "level {m} site {s} of {}",
                to_text(x)
            );
        }
        for s in model.values[m].keys() {
            assert!(
                (lo..=hi + k).contains(s),
                "model value outside range at level {m}"
            );
        }
    }
}

fn word_strategy(p: &DeltaParams, max_len: usize) -> impl Strategy<Value = Vec<Generator>> {
    let gens = generators(p);
    prop::collection::vec(prop::sample::select(gens), 0..max_len)
}

#[test]
fn generator_elements_agree_with_model() {
    for p in [lamplighter(), two_levels()] {
        for s in generators(&p) {
            let x = DeltaElement::generator(&p, s);
            assert_matches_model(&p, &x, &Full::generator(&p, s));
            assert_eq!(
                apply_generator(&p, &DeltaElement::identity(), s).unwrap(),
                x
            );
        }
    }
}

#[test]
fn b_first_then_a_leaves_a_commutator_at_the_offset() {
    let p = two_levels();
    let (c, a, b) = (Generator::Cursor(1), Generator::A(1), Generator::B(1));
    let back = Generator::Cursor(-1);
    let b_then_a = evaluate_word(&p, &[b, c, c, a, back, back]).unwrap();
    let a_then_b = evaluate_word(&p, &[c, c, a, back, back, b]).unwrap();
    assert_eq!(b_then_a.f0, a_then_b.f0);
    assert!(a_then_b.fprime.is_empty());
    let g = &p.level(1).gamma;
    let gr = g.gamma();
    let expected = gr.commutator(g.b_elem(1), g.a_elem(1));
    assert_ne!(expected, gr.identity());
    assert_eq!(gr.element_order(expected), 3);
    assert_eq!(b_then_a.prime_at(1, 2), Some(expected));
    assert_eq!(b_then_a.fprime.len(), 1, "offset 6 is beyond reach");
    // `f_1(2) = β α` once the derived part is restored.
    assert_eq!(
        full_value(&p, &b_then_a, 1, 2),
        gr.mul(g.b_elem(1), g.a_elem(1))
    );
    let e1 = essential_contribution(&p, &b_then_a, 1).unwrap();
    let len = g.word_length(gr.mul(g.b_elem(1), g.a_elem(1))) as u64;
    assert_eq!(len, 2);
    assert_eq!(e1, 2 * (len - 1));
}

#[test]
fn b_generators_never_touch_derived_data() {
    let p = two_levels();
    let x = evaluate_word(
        &p,
        &[
            Generator::B(2),
            Generator::Cursor(1),
            Generator::Cursor(1),
            Generator::A(1),
            Generator::B(1),
        ],
    )
    .unwrap();
    for b in 1..3 {
        let y = apply_generator(&p, &x, Generator::B(b)).unwrap();
        assert_eq!(y.fprime, x.fprime);
    }
}

#[test]
fn text_round_trip_and_errors() {
    let p = two_levels();
    let x = evaluate_word(
        &p,
        &[
            Generator::B(1),
            Generator::Cursor(1),
            Generator::Cursor(1),
            Generator::A(1),
        ],
    )
    .unwrap();
    let s = to_text(&x);
    assert_eq!(from_text(&s).unwrap(), x);
    assert!(from_text("t=1; L2: 0:1").is_err());
    assert!(from_text("cursor 3").is_err());
}

#[test]
fn lamplighter_rejects_level_metric_on_other_groups() {
    assert!(lamplighter_length(&two_levels(), &DeltaElement::identity()).is_err());
}

#[test]
fn invalid_parameters_are_rejected() {
    let bad = vec![
        Level {
            k: 4,
            gamma: Arc::new(s3_fiber()),
        },
        Level {
            k: 6,
            gamma: Arc::new(a5_fiber()),
        },
    ];
    assert!(DeltaParams::new(3, base(), bad, None).is_err());
    assert!(DeltaParams::lamplighter(1, base()).is_err());
    let horizon = DeltaParams::new(
        2,
        base(),
        vec![Level {
            k: 2,
            gamma: Arc::new(s3_fiber()),
        }],
        Some(4),
    )
    .unwrap();
    assert_eq!(horizon.level_index(3).unwrap(), 1);
    assert!(matches!(
        horizon.level_index(4),
        Err(DeltaError::BeyondHorizon { n: 4, horizon: 4 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn words_match_full_model(w in word_strategy(&two_levels(), 40)) {
        let p = two_levels();
        let x = evaluate_word(&p, &w).unwrap();
        assert_matches_model(&p, &x, &Full::word(&p, &w));
    }

    #[test]
    fn multiplication_concatenates_words(
        u in word_strategy(&two_levels(), 25),
        v in word_strategy(&two_levels(), 25),
    ) {
        let p = two_levels();
        let x = evaluate_word(&p, &u).unwrap();
        let y = evaluate_word(&p, &v).unwrap();
        let uv: Vec<_> = u.iter().chain(&v).copied().collect();
        prop_assert_eq!(multiply(&p, &x, &y).unwrap(), evaluate_word(&p, &uv).unwrap());
    }

    #[test]
    fn inverse_and_associativity(
        u in word_strategy(&two_levels(), 20),
        v in word_strategy(&two_levels(), 20),
        w in word_strategy(&two_levels(), 20),
    ) {
        let p = two_levels();
        let [x, y, z] = [&u, &v, &w].map(|s| evaluate_word(&p, s).unwrap());
        let xi = inverse(&p, &x).unwrap();
        prop_assert!(multiply(&p, &x, &xi).unwrap().is_identity());
        prop_assert!(multiply(&p, &xi, &x).unwrap().is_identity());
        let left = multiply(&p, &multiply(&p, &x, &y).unwrap(), &z).unwrap();
        let right = multiply(&p, &x, &multiply(&p, &y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn generator_action_is_right_multiplication(u in word_strategy(&two_levels(), 30), i in 0usize..5) {
        let p = two_levels();
        let x = evaluate_word(&p, &u).unwrap();
        let s = generators(&p)[i];
        let g = DeltaElement::generator(&p, s);
        prop_assert_eq!(apply_generator(&p, &x, s).unwrap(), multiply(&p, &x, &g).unwrap());
    }

    #[test]
    fn tour_length_matches_brute_force(t in -6i64..7, sites in prop::collection::btree_set(-6i64..7, 0..5)) {
        // BFS over (position, visited set) on a padded segment.
        let targets: Vec<i64> = sites.iter().copied().collect();
        let full = (1u32 << targets.len()) - 1;
        let mark = |pos: i64, seen: u32| {
            targets.iter().enumerate().fold(seen, |acc, (i, &s)| if s == pos { acc | 1 << i } else { acc })
        };
        let mut dist = std::collections::HashMap::new();
        let start = (0i64, mark(0, 0));
        dist.insert(start, 0u64);
        let mut queue = std::collections::VecDeque::from([start]);
        let mut brute = None;
        while let Some((pos, seen)) = queue.pop_front() {
            let d = dist[&(pos, seen)];
            if pos == t && seen == full {
                brute = Some(d);
                break;
            }
            for next in [pos - 1, pos + 1] {
                if !(-9..=9).contains(&next) {
                    continue;
                }
                let key = (next, mark(next, seen));
                if !dist.contains_key(&key) {
                    dist.insert(key, d + 1);
                    queue.push_back(key);
                }
            }
        }
        let brute = brute.unwrap();
        prop_assert_eq!(tour_length(t, sites.into_iter()), brute);
    }
}
