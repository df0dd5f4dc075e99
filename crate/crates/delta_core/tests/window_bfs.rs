use std::sync::Arc;

use delta_core::window::UNREACHED;
use delta_core::*;
use group_kernel::{s3_fiber, MarkedGamma};

fn base() -> Arc<MarkedGamma> {
    Arc::new(MarkedGamma::abelian_base(2, 3).unwrap())
}

fn lamplighter() -> DeltaParams {
    DeltaParams::lamplighter(2, base()).unwrap()
}

fn one_level() -> DeltaParams {
    let level = Level {
        k: 2,
        gamma: Arc::new(s3_fiber()),
    };
    DeltaParams::new(2, base(), vec![level], None).unwrap()
}

#[test]
fn small_exact_lengths() {
    let p = lamplighter();
    assert_eq!(
        word_length_exact(&p, &DeltaElement::cursor(5), 1, 50).unwrap(),
        Some(5)
    );
    let mut lamp = DeltaElement::cursor(0);
    lamp.f0.insert(2, 3);
    assert_eq!(word_length_exact(&p, &lamp, 1, 50).unwrap(), Some(5));
    assert_eq!(lamplighter_length(&p, &lamp).unwrap(), 5);
}

#[test]
fn encoding_round_trips() {
    let p = one_level();
    let space = WindowSpace::new(&p, -1, 3).unwrap();
    for s in (0..space.states()).step_by(997) {
        let x = space.decode(s);
        assert_eq!(space.encode(&x), Some(s));
    }
    assert_eq!(space.encode(&DeltaElement::cursor(4)), None);
}

#[test]
fn lamplighter_bfs_equals_tour_formula() {
    let p = lamplighter();
    let space = WindowSpace::new(&p, -1, 3).unwrap();
    let dist = space.bfs((-1, 3)).unwrap();
    for (s, &d) in dist.iter().enumerate() {
        let x = space.decode(s as u64);
        assert_ne!(d, UNREACHED);
        assert_eq!(
            d as u64,
            lamplighter_length(&p, &x).unwrap(),
            "{}",
            to_text(&x)
        );
        assert!(word_length_upper(&p, &x).unwrap() >= d as u64);
    }
}

#[test]
fn padding_the_window_does_not_shorten_lamplighter_words() {
    let p = lamplighter();
    let narrow = WindowSpace::new(&p, -1, 3).unwrap();
    let wide = WindowSpace::new(&p, -2, 4).unwrap();
    let dn = narrow.bfs((-1, 3)).unwrap();
    let dw = wide.bfs((-2, 4)).unwrap();
    for (s, &d) in dn.iter().enumerate() {
        let x = narrow.decode(s as u64);
        assert_eq!(dw[wide.encode(&x).unwrap() as usize], d);
    }
}

#[test]
fn derived_level_bounds_dominate_window_lengths() {
    let p = one_level();
    let space = WindowSpace::new(&p, -1, 3).unwrap();
    let dist = space.bfs((-1, 3)).unwrap();
    let mut with_prime = 0;
    for (s, &d) in dist.iter().enumerate() {
        if d == UNREACHED {
            continue;
        }
        let x = space.decode(s as u64);
        if !x.fprime.is_empty() {
            with_prime += 1;
        }
        // Window lengths bound true lengths from above, so this is the stronger check.
        assert!(
            word_length_upper(&p, &x).unwrap() >= d as u64,
            "{}",
            to_text(&x)
        );
        if s % 101 == 0 {
            let (lo, hi) = range_interval(&p, &x);
            let y = DeltaElement::identity();
            if lo >= 0 {
                let bound =
                    distance_upper(&p, &y, &x, DistanceMode::Level { i: 1, d: hi }).unwrap();
                assert!(bound >= d as u64);
            }
            let xi = inverse(&p, &x).unwrap();
            assert_eq!(dist[space.encode(&xi).map(|v| v as usize).unwrap_or(s)], d);
        }
    }
    assert!(with_prime > 0);
}

#[test]
fn interval_bound_dominates_lamp_changes() {
    let p = lamplighter();
    let space = WindowSpace::new(&p, -1, 3).unwrap();
    let dist = space.bfs((-1, 3)).unwrap();
    for (s, &d) in dist.iter().enumerate().step_by(7) {
        let x = space.decode(s as u64);
        if x.t < 0 {
            continue;
        }
        let (lo, hi) = range_interval(&p, &x);
        let bound = distance_upper(
            &p,
            &DeltaElement::identity(),
            &x,
            DistanceMode::Interval { lo, hi },
        )
        .unwrap();
        assert!(bound >= d as u64);
    }
    let mut far = DeltaElement::cursor(1);
    far.f0.insert(9, 1);
    assert!(distance_upper(
        &p,
        &DeltaElement::identity(),
        &far,
        DistanceMode::Interval { lo: 0, hi: 2 }
    )
    .is_err());
}

#[test]
fn restricted_search_never_beats_the_full_window() {
    let p = lamplighter();
    let space = WindowSpace::new(&p, -1, 3).unwrap();
    let full = space.bfs((-1, 3)).unwrap();
    let right = space.bfs((0, 3)).unwrap();
    for (a, b) in full.iter().zip(&right) {
        if *b != UNREACHED {
            assert!(a <= b);
        }
    }
    assert!(space.bfs((1, 3)).is_err());
}

#[test]
fn oversized_windows_are_refused() {
    let p = one_level();
    assert!(matches!(
        WindowSpace::new(&p, -20, 20),
        Err(DeltaError::Window(_))
    ));
}
