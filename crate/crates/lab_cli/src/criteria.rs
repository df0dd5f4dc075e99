//! The eleven acceptance criteria, each runnable on its own.
//!
//! Every check compares library output against an independent computation
//! (digit scans, table searches, window BFS, membership scans) or against an
//! exact formula. Tolerances and sample sizes are pinned here.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;
use std::time::Instant;

use dd_coupler::{
    block_depth, distance_audit, integrability_sum, target_blocks, uniform_bound, CursorMap,
    DDCoupling, DDParams, SampleMode, SpreadingMap, EPSILON_FLOOR,
};
use delta_core::window::UNREACHED;
use delta_core::{
    generators, range_interval, word_length_upper, DeltaElement, DeltaParams, Generator, Level,
    WindowSpace,
};
use folner_atlas::{FolnerAtlas, FolnerIndex, SubsetChain};
use group_kernel::{a5_fiber, s3_fiber, Elem, MarkedGamma};
use mixed_radix::{
    addition_locality_holds, count_by_carry_index, decompose, lipschitz_image_covers,
    MixedRadixBase,
};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use profile_forge::{build_sequences, default_delta, hypothesis_report, ProfileSpec, Sequences};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use z_coupler::{
    carry_histogram, carry_position, cursor_majorant_rows, exhaustive_sweep, majorant_report,
    Integrand, ZEncoder,
};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub summary: String,
    pub details: Vec<String>,
    /// Set when a check fails for a documented structural reason.
    pub known_failure: Option<String>,
    pub elapsed_secs: f64,
    pub time_limit_secs: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} [{:.1}s of {:.0}s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.summary,
            self.elapsed_secs,
            self.time_limit_secs
        )
    }
}

/// Outcome of a criterion body before timing is applied.
#[derive(Default)]
struct Check {
    ok: bool,
    summary: String,
    details: Vec<String>,
    known_failure: Option<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            ok: true,
            ..Default::default()
        }
    }

    /// Records a detail line and folds `cond` into the verdict.
    fn expect(&mut self, cond: bool, what: impl Into<String>) {
        let what = what.into();
        self.details
            .push(format!("{} {what}", if cond { "ok  " } else { "FAIL" }));
        self.ok &= cond;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.details.push(format!("note {}", what.into()));
    }
}

pub const IDS: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub fn run(id: u8) -> Option<CriterionResult> {
    let (title, limit, body): (&str, f64, fn() -> Check) = match id {
        1 => ("variable-base laws", 10.0, c1_mixed_radix),
        2 => ("marked-group invariants", 10.0, c2_groups),
        3 => ("Følner exactness", 120.0, c3_folner),
        4 => ("ℤ-coupling bijectivity", 60.0, c4_bijectivity),
        5 => ("ℤ-coupling distance laws", 120.0, c5_gaps),
        6 => ("carry-position enumeration", 60.0, c6_enumeration),
        7 => ("ℤ-coupling integrability sums", 5.0, c7_sums),
        8 => ("diagonal coupling structure", 300.0, c8_structure),
        9 => ("diagonal coupling audits", 600.0, c9_audits),
        10 => ("metric oracle agreement", 300.0, c10_metric),
        11 => ("profile machinery", 5.0, c11_profiles),
        _ => return None,
    };
    let start = Instant::now();
    let mut c = body();
    let elapsed = start.elapsed().as_secs_f64();
    c.expect(
        elapsed <= limit,
        format!("runtime {elapsed:.2}s within {limit}s"),
    );
    Some(CriterionResult {
        id,
        title: title.into(),
        passed: c.ok,
        summary: c.summary,
        details: c.details,
        known_failure: c.known_failure,
        elapsed_secs: elapsed,
        time_limit_secs: limit,
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    IDS.iter().filter_map(|&id| run(id)).collect()
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn base_z2z3() -> Arc<MarkedGamma> {
    Arc::new(MarkedGamma::abelian_base(2, 3).expect("Z/2 x Z/3"))
}

fn lamplighter(kappa: u64) -> DeltaParams {
    DeltaParams::lamplighter(kappa, base_z2z3()).expect("lamplighter")
}

/// `κ = 3`, one `S_3` fiber level at offset 2: the smallest instance with `Γ' ≠ {e}`.
fn derived_instance() -> DeltaParams {
    let level = Level {
        k: 2,
        gamma: Arc::new(s3_fiber()),
    };
    DeltaParams::new(3, base_z2z3(), vec![level], None).expect("derived instance")
}

// ---------------------------------------------------------------- criterion 1

/// Every base with product at most `EXHAUSTIVE_PRODUCT` gets the full treatment.
pub const EXHAUSTIVE_PRODUCT: u64 = 360;
/// Locality is also checked through the library call (two decompositions per
/// pair) for every base with product at most this.
pub const LIBRARY_LOCALITY_PRODUCT: u64 = 96;

/// All radix sequences with entries `>= 2` and product at most `max`.
pub fn all_bases(max: u64) -> Vec<Vec<u64>> {
    fn rec(prefix: &mut Vec<u64>, prod: u64, max: u64, out: &mut Vec<Vec<u64>>) {
        for b in 2..=max / prod {
            prefix.push(b);
            out.push(prefix.clone());
            rec(prefix, prod * b, max, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 1, max, &mut out);
    out
}

#[derive(Default)]
struct RadixTally {
    bases: u64,
    values: u64,
    pairs: u64,
    library_pairs: u64,
    images: u64,
    failures: Vec<String>,
}

impl RadixTally {
    fn merge(mut self, o: Self) -> Self {
        self.bases += o.bases;
        self.values += o.values;
        self.pairs += o.pairs;
        self.library_pairs += o.library_pairs;
        self.images += o.images;
        self.failures.extend(o.failures.into_iter().take(5));
        self
    }

    fn fail(&mut self, r: &[u64], what: String) {
        if self.failures.len() < 5 {
            self.failures.push(format!("{r:?}: {what}"));
        }
    }
}

fn check_base(r: &[u64]) -> RadixTally {
    let mut t = RadixTally {
        bases: 1,
        ..Default::default()
    };
    let base = MixedRadixBase::from_u64s(r, false).expect("radices >= 2");
    let total: u64 = r.iter().product();
    let len = r.len();
    let prefix: Vec<u64> = (0..len).map(|i| r[..=i].iter().product()).collect();
    // Oracle digits by repeated division.
    let oracle: Vec<Vec<u64>> = (0..total)
        .map(|x| {
            let mut rest = x;
            r.iter()
                .map(|&b| {
                    let d = rest % b;
                    rest /= b;
                    d
                })
                .collect()
        })
        .collect();
    let mut seen = HashSet::with_capacity(total as usize);
    for x in 0..total {
        t.values += 1;
        let d = decompose(&big(x), &base).expect("in range");
        let digits = d.digits_u64().expect("small digits");
        if digits != oracle[x as usize] {
            t.fail(r, format!("decompose({x}) = {digits:?}"));
        }
        if d.recompose() != big(x) {
            t.fail(r, format!("recompose(decompose({x})) differs"));
        }
        if !seen.insert(digits.clone()) {
            t.fail(r, format!("digit vector of {x} repeats"));
        }
        for m in 0..len {
            if (x < prefix[m]) != digits[m + 1..].iter().all(|&v| v == 0) {
                t.fail(r, format!("range law at x = {x}, m = {m}"));
            }
        }
    }
    if decompose(&big(total), &base).is_ok() {
        t.fail(r, "the product itself decomposed".into());
    }
    // Carry indices from the oracle digits; `None` when saturated.
    let j0 = |x: u64, k: usize| (k + 1..len).find(|&j| oracle[x as usize][j] + 1 < r[j]);
    for k in 0..len {
        let mut hist = vec![0u64; len];
        for x in 0..total {
            if let Some(j) = j0(x, k) {
                hist[j] += 1;
            }
        }
        for (m, &h) in hist.iter().enumerate() {
            if count_by_carry_index(&base, k, m).ok() != Some(big(h)) {
                t.fail(r, format!("count k = {k}, m = {m}: expected {h}"));
            }
        }
        // Locality: every x <= y < total with y - x < b_0 ⋯ b_k.
        for x in 0..total {
            let top = (x + prefix[k]).min(total);
            for y in x..top {
                t.pairs += 1;
                let agree = match j0(x, k) {
                    Some(j) => oracle[x as usize][j + 1..] == oracle[y as usize][j + 1..],
                    None => true,
                };
                if !agree {
                    t.fail(r, format!("digits of {x}, {y} differ above j0 for k = {k}"));
                }
                if total <= LIBRARY_LOCALITY_PRODUCT {
                    t.library_pairs += 1;
                    if addition_locality_holds(&big(x), &big(y), k, &base) != Ok(true) {
                        t.fail(r, format!("addition_locality_holds({x}, {y}, {k})"));
                    }
                }
            }
        }
        // Lipschitz cover: images with steps c < b_0 ⋯ b_k that hit both ends.
        for c in 1..prefix[k] {
            let mut image: Vec<BigUint> = (0..total).step_by(c as usize).map(big).collect();
            if image.last() != Some(&big(total - 1)) {
                image.push(big(total - 1));
            }
            t.images += 1;
            // Oracle: every block of width b_0 ⋯ b_k meets the image.
            let blocks: BTreeSet<u64> = image
                .iter()
                .map(|v| v.to_u64().unwrap() / prefix[k])
                .collect();
            let covered = blocks.len() as u64 == total / prefix[k];
            if !covered || lipschitz_image_covers(&image, &base, k, &big(c)) != Ok(true) {
                t.fail(r, format!("Lipschitz cover k = {k}, c = {c}"));
            }
        }
        // A sparse image that skips a block is rejected.
        if k + 1 < len {
            let sparse = [big(0), big(total - 1)];
            let expect = total / prefix[k] <= 2;
            if lipschitz_image_covers(&sparse, &base, k, &big(1)) != Ok(expect) {
                t.fail(r, format!("sparse image verdict at k = {k}"));
            }
        }
    }
    t
}

fn c1_mixed_radix() -> Check {
    let mut c = Check::new();
    let bases = all_bases(EXHAUSTIVE_PRODUCT);
    let tally = bases
        .par_iter()
        .map(|r| check_base(r))
        .reduce(RadixTally::default, RadixTally::merge);
    c.expect(
        tally.failures.is_empty(),
        format!(
            "{} bases with product <= {EXHAUSTIVE_PRODUCT}: {} values, {} locality pairs ({} via the library call), {} Lipschitz images",
            tally.bases, tally.values, tally.pairs, tally.library_pairs, tally.images
        ),
    );
    for f in &tally.failures {
        c.note(f.clone());
    }
    // Counting formula against the closed form on every base with product <= 10^4
    // and length <= 3, and worked values.
    let mut formula_bases = 0;
    let mut formula_ok = true;
    for r in all_bases(10_000).into_iter().filter(|r| r.len() <= 3) {
        formula_bases += 1;
        let base = MixedRadixBase::from_u64s(&r, false).unwrap();
        for m in 0..r.len() {
            for k in 0..r.len() {
                let want: u64 = if k >= m {
                    0
                } else {
                    r[m + 1..].iter().product::<u64>()
                        * (r[m] - 1)
                        * r[..=k].iter().product::<u64>()
                };
                formula_ok &= count_by_carry_index(&base, k, m) == Ok(big(want));
            }
        }
    }
    c.expect(
        formula_ok,
        format!(
            "counting closed form on {formula_bases} bases with product <= 10^4 and length <= 3"
        ),
    );
    let open = MixedRadixBase::from_u64s(&[2, 5, 8], true).unwrap();
    let d100 = decompose(&big(100), &open).unwrap().digits_u64().unwrap();
    c.expect(
        d100 == [0, 0, 10],
        format!("100 over (2,5,8,..) = {d100:?}"),
    );
    c.summary = format!(
        "{} bases (product <= {EXHAUSTIVE_PRODUCT}) exhaustive, {} failures",
        tally.bases,
        tally.failures.len()
    );
    c
}

// ---------------------------------------------------------------- criterion 2

fn check_group(c: &mut Check, name: &str, g: &MarkedGamma, order: usize, prime: usize) {
    let gr = g.gamma();
    let n = gr.order() as Elem;
    c.expect(gr.order() == order, format!("{name}: |Γ| = {}", gr.order()));
    let e = gr.identity();
    let mut laws = true;
    for x in 0..n {
        laws &= gr.mul(e, x) == x && gr.mul(x, e) == x;
        laws &= gr.mul(x, gr.inv(x)) == e && gr.mul(gr.inv(x), x) == e;
    }
    let assoc = (0..n).into_par_iter().all(|x| {
        (0..n).all(|y| {
            let xy = gr.mul(x, y);
            (0..n).all(|z| gr.mul(xy, z) == gr.mul(x, gr.mul(y, z)))
        })
    });
    c.expect(
        laws && assoc,
        format!("{name}: identity, inverse and associativity laws on the full table"),
    );
    let mut gens = g.a_images().to_vec();
    gens.extend_from_slice(g.b_images());
    c.expect(
        gr.subgroup_closure(&gens).len() == order,
        format!("{name}: A ∪ B generates"),
    );
    // Derived part recomputed as the normal closure of all commutators [a, b].
    let comms: Vec<Elem> = g
        .a_images()
        .iter()
        .flat_map(|&a| g.b_images().iter().map(move |&b| (a, b)))
        .map(|(a, b)| gr.commutator(a, b))
        .collect();
    let closure = gr.normal_closure(&comms);
    c.expect(
        closure == g.gamma_prime() && closure.len() == prime && gr.is_normal(&closure),
        format!("{name}: |Γ'| = {} = |⟨⟨[A, B]⟩⟩|", closure.len()),
    );
    // Γ/Γ' ≅ Z/2 × Z/3: θ is a surjective homomorphism onto a cyclic group of
    // order 6 with kernel Γ', sending A and B to elements of orders 2 and 3.
    let ab = g.ab();
    let mut hom = true;
    let mut image = BTreeSet::new();
    for x in 0..n {
        image.insert(g.theta(x));
        for y in 0..n {
            hom &= g.theta(gr.mul(x, y)) == ab.mul(g.theta(x), g.theta(y));
        }
    }
    let kernel: Vec<Elem> = (0..n).filter(|&x| g.theta(x) == ab.identity()).collect();
    let abelian = (0..ab.order() as Elem)
        .all(|x| (0..ab.order() as Elem).all(|y| ab.mul(x, y) == ab.mul(y, x)));
    let orders = (
        ab.element_order(g.theta(g.a_elem(1))),
        ab.element_order(g.theta(g.b_elem(1))),
    );
    c.expect(
        hom && image.len() == 6 && kernel == g.gamma_prime() && abelian && orders == (2, 3),
        format!("{name}: Γ/Γ' ≅ Z/2 × Z/3 via θ"),
    );
    c.expect(
        g.diameter() == crate::oracle::bfs_diameter(gr, &gens),
        format!("{name}: diameter {} matches BFS", g.diameter()),
    );
}

fn c2_groups() -> Check {
    let mut c = Check::new();
    check_group(&mut c, "S3 fiber", &s3_fiber(), 18, 3);
    check_group(&mut c, "A5 fiber", &a5_fiber(), 360, 60);
    let base = MarkedGamma::abelian_base(2, 3).unwrap();
    let mut gens = base.a_images().to_vec();
    gens.extend_from_slice(base.b_images());
    let d = crate::oracle::bfs_diameter(base.gamma(), &gens);
    c.expect(
        d == 2 && base.diameter() == 2,
        format!("Z/2 × Z/3 diameter {d}"),
    );
    c.summary = "orders {18, 360}, derived orders {3, 60}, quotient Z/2 × Z/3".into();
    c
}

// ---------------------------------------------------------------- criterion 3

pub const FOLNER_ENUMERATION_LIMIT: u64 = 2_000_000;
pub const FOLNER_BOUNDARY_LIMIT: u64 = 300_000;

fn chain_instance() -> DeltaParams {
    let levels = vec![
        Level {
            k: 2,
            gamma: Arc::new(s3_fiber()),
        },
        Level {
            k: 4,
            gamma: Arc::new(a5_fiber()),
        },
    ];
    DeltaParams::new(3, base_z2z3(), levels, None).unwrap()
}

/// Counts the window elements passing the membership test, and checks that the
/// set's own enumeration lists each of them once.
fn enumeration_agrees(atlas: &FolnerAtlas, idx: FolnerIndex, size: u64) -> Result<(), String> {
    let space = WindowSpace::new(atlas.params(), 0, idx.n as i64 - 1).map_err(|e| e.to_string())?;
    let scan = (0..space.states())
        .into_par_iter()
        .filter(|&s| atlas.contains(idx, &space.decode(s)))
        .count() as u64;
    if scan != size {
        return Err(format!("{idx:?}: scan {scan}, formula {size}"));
    }
    let set = atlas.set(idx).map_err(|e| e.to_string())?;
    let mut hit = vec![false; space.states() as usize];
    let mut listed = 0u64;
    for x in set.enumerate(size).map_err(|e| e.to_string())? {
        let Some(s) = space.encode(&x) else {
            return Err(format!("{idx:?}: enumerated element outside the window"));
        };
        if hit[s as usize] || !atlas.contains(idx, &x) {
            return Err(format!("{idx:?}: repeated or foreign element"));
        }
        hit[s as usize] = true;
        listed += 1;
    }
    if listed != size {
        return Err(format!("{idx:?}: enumeration listed {listed}"));
    }
    Ok(())
}

fn c3_folner() -> Check {
    let mut c = Check::new();
    let mut enumerated = 0;
    let mut boundaries = 0;
    let mut steps = 0;
    for (name, params, n_chain) in [
        ("lamplighter", lamplighter(3), 14u64),
        ("S3 level", derived_instance(), 12),
        ("S3 + A5 levels", chain_instance(), 12),
    ] {
        let atlas = FolnerAtlas::new(params).unwrap();
        let q = atlas.params().q() as u32;
        let idx = atlas.indices(n_chain).unwrap();
        let mut errors = Vec::new();
        for &i in &idx {
            let size = atlas.cardinality(i).unwrap();
            let Some(s) = size.to_u64().filter(|&s| s <= FOLNER_ENUMERATION_LIMIT) else {
                continue;
            };
            if let Err(e) = enumeration_agrees(&atlas, i, s) {
                errors.push(e);
            }
            enumerated += 1;
            if i.n >= 2 && s <= FOLNER_BOUNDARY_LIMIT {
                let b = atlas.set(i).unwrap().boundary(s).unwrap();
                if !b.law_holds || b.boundary * i.n != 2 * b.size {
                    errors.push(format!("{i:?}: boundary {b:?}"));
                }
                boundaries += 1;
            }
        }
        for w in idx.windows(2) {
            let (a, b) = (
                atlas.cardinality(w[0]).unwrap(),
                atlas.cardinality(w[1]).unwrap(),
            );
            if !(&a * 2u32 <= b && b <= &a * (2 * q)) {
                errors.push(format!("ratio {:?} -> {:?}", w[0], w[1]));
            }
            steps += 1;
        }
        c.expect(
            errors.is_empty(),
            format!("{name}: {} indices up to n = {n_chain}", idx.len()),
        );
        for e in errors.into_iter().take(5) {
            c.note(e);
        }
    }
    let a5 = SubsetChain::build(&a5_fiber()).unwrap();
    c.expect(
        a5.sizes()
            .windows(2)
            .all(|w| 2 * w[0] <= w[1] && w[1] <= 12 * w[0]),
        format!("A5 subset chain sizes {:?}", a5.sizes()),
    );
    c.summary = format!(
        "{enumerated} sets enumerated (|F| <= {FOLNER_ENUMERATION_LIMIT}), {boundaries} boundaries (|F| <= {FOLNER_BOUNDARY_LIMIT}), {steps} successor ratios in [2, 2q]"
    );
    c
}

// ---------------------------------------------------------------- criterion 4

fn check_bijection(c: &mut Check, name: &str, p: &DeltaParams, expected: u64) {
    let enc = ZEncoder::new(p, 1).unwrap();
    let atlas = FolnerAtlas::new(p.clone()).unwrap();
    let set = atlas.set(atlas.full(p.kappa()).unwrap()).unwrap();
    let elements: Vec<DeltaElement> = set.enumerate(expected).unwrap().collect();
    let mut codes = Vec::with_capacity(elements.len());
    let mut round_trip = true;
    for x in &elements {
        let z = enc.encode(x).unwrap();
        round_trip &= enc.decode(&z).ok().as_ref() == Some(x);
        codes.push(z.to_u64().unwrap());
    }
    codes.sort_unstable();
    let onto =
        codes.len() as u64 == expected && codes.iter().enumerate().all(|(i, &z)| i as u64 == z);
    c.expect(
        onto && round_trip && enc.size() == &big(expected),
        format!("{name}: 𝒢_1 ↔ [0, {}] bijective", expected - 1),
    );
}

pub const ROUND_TRIP_SAMPLES: u64 = 100_000;

fn c4_bijectivity() -> Check {
    let mut c = Check::new();
    check_bijection(&mut c, "lamplighter κ = 3", &lamplighter(3), 648);
    check_bijection(&mut c, "S3 level at 2", &derived_instance(), 1944);
    for (name, p) in [
        ("lamplighter", lamplighter(3)),
        ("S3 level", derived_instance()),
    ] {
        let enc = ZEncoder::new(&p, 2).unwrap();
        let atlas = FolnerAtlas::new(p.clone()).unwrap();
        let set = atlas.set(atlas.full(9).unwrap()).unwrap();
        let failures = (0..ROUND_TRIP_SAMPLES / 1000)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(0xC4 ^ chunk);
                (0..1000)
                    .filter(|_| {
                        let x = set.sample(&mut rng);
                        let z = enc.encode(&x).unwrap();
                        enc.decode(&z).ok() != Some(x) || &z >= enc.size()
                    })
                    .count()
            })
            .sum::<usize>();
        c.expect(
            failures == 0,
            format!("{name} n = 2: {ROUND_TRIP_SAMPLES} sampled round trips, {failures} failures"),
        );
    }
    c.summary = "648 and 1944 element bijections, zero round-trip failures at n = 2".into();
    c
}

// ---------------------------------------------------------------- criterion 5

fn c5_gaps() -> Check {
    let mut c = Check::new();
    let mut total = 0;
    for (name, p, n) in [
        ("lamplighter", lamplighter(3), 1),
        ("lamplighter", lamplighter(3), 2),
        ("S3 level", derived_instance(), 1),
    ] {
        let enc = ZEncoder::new(&p, n).unwrap();
        let rep = exhaustive_sweep(&enc, 1 << 30, 1 << 16).unwrap();
        total += rep.elements;
        c.expect(
            rep.elements as u128 == rep.size
                && rep.lamp_max_gap() <= 6
                && rep.violations(true) == 0
                && rep.violations(false) == 0
                && rep.escapes() == 0,
            format!(
                "{name} n = {n}: {} elements, max lamp gap {}, cursor violations {}",
                rep.elements,
                rep.lamp_max_gap(),
                rep.violations(false)
            ),
        );
    }
    c.summary =
        format!("{total} elements swept: lamp gaps <= 6, cursor gaps below their carry bound");
    c
}

// ---------------------------------------------------------------- criterion 6

fn c6_enumeration() -> Check {
    let mut c = Check::new();
    for (kappa, n_max, exhaustive_max) in [(2u64, 3usize, 3usize), (3, 3, 1)] {
        let p = lamplighter(kappa);
        for n in 1..=n_max {
            let enc = ZEncoder::new(&p, n).unwrap();
            let hist = carry_histogram(&enc);
            let width = kappa.pow(n as u32);
            let per_cursor = enc.size() / big(width);
            // Cursor scan: the carry position depends on t alone.
            let mut by_cursor = vec![0u64; n + 1];
            for t in 1..width - 1 {
                match carry_position(t, n, kappa) {
                    Ok(m) => by_cursor[m] += 1,
                    Err(_) => by_cursor[n] += 1,
                }
            }
            let mut ok = true;
            for m in 0..n {
                let formula = &per_cursor * big((kappa - 1) * kappa.pow((n - m - 1) as u32));
                ok &= hist[m] == formula;
                ok &= &per_cursor * big(by_cursor[m]) <= hist[m];
            }
            let mut how = "formula and cursor scan";
            if n <= exhaustive_max {
                let rep = exhaustive_sweep(&enc, 1 << 30, 1 << 20).unwrap();
                for m in 0..n {
                    ok &= big(rep.carry_counts[m]) == hist[m];
                }
                how = "exhaustive element counts";
            }
            c.expect(ok, format!("κ = {kappa}, n = {n}: {how}"));
        }
    }
    c.summary = "carry histogram equals (|𝒢_n|/κ^n)(κ-1)κ^{n-m-1}; exhaustive for κ = 2, n <= 3 and κ = 3, n = 1".into();
    c
}

// ---------------------------------------------------------------- criterion 7

fn c7_sums() -> Check {
    let mut c = Check::new();
    let sqrt = ProfileSpec::power(1, 1);
    let rep = majorant_report(&sqrt, 3, 6, 8, 40);
    let bound = rep.uniform_bound;
    c.expect(
        rep.verdict.summable && bound.is_some(),
        "ρ(x) = x^{1/2}: summable with a uniform bound",
    );
    let b = bound.unwrap_or(f64::INFINITY);
    c.expect(
        rep.partial_sums.windows(2).all(|w| w[0] <= w[1])
            && rep.partial_sums.iter().all(|&s| s <= b),
        format!("partial sums over n <= 8 monotone and <= {b:.4}"),
    );
    let p = lamplighter(3);
    let mut per_n_ok = true;
    for n in 1..=8 {
        let enc = ZEncoder::new(&p, n).unwrap();
        let rows = cursor_majorant_rows(
            &enc,
            &carry_histogram(&enc),
            &Integrand::RhoLog { rho: sqrt.clone() },
        );
        per_n_ok &= rows
            .windows(2)
            .all(|w| w[0].partial_sum <= w[1].partial_sum);
        per_n_ok &= rows.last().is_some_and(|r| r.partial_sum <= b);
    }
    c.expect(
        per_n_ok,
        "per-n counted majorants monotone in R and within the bound, n = 1..8",
    );
    let id = majorant_report(&ProfileSpec::Identity, 3, 6, 8, 40);
    c.expect(
        !id.verdict.summable && id.uniform_bound.is_none(),
        "ρ = id flagged non-summable",
    );
    c.summary = format!("√ sums bounded by {b:.4}; identity flagged");
    c
}

// ---------------------------------------------------------------- criterion 8

fn pair_a() -> DDParams {
    DDParams::new(
        lamplighter(3),
        derived_instance(),
        ProfileSpec::Identity,
        ProfileSpec::Identity,
        2,
        12,
    )
    .unwrap()
}

/// Cursor map laws against a χ rebuilt from its recursive definition.
fn cursor_laws(cm: &CursorMap) -> Result<(), String> {
    let d = cm.d();
    let cells = cm.q_blocks * cm.width;
    let mut inv = vec![None; d as usize];
    for p in 0..cm.q_blocks {
        for t in 0..cm.width {
            let v = cm.u(p, t);
            if v >= d || inv[v as usize].replace(p * cm.width + t).is_some() {
                return Err(format!("u({p}, {t}) = {v} repeats or leaves [0, {d})"));
            }
        }
    }
    let mut chi = Vec::with_capacity(d as usize);
    for v in 0..d {
        match inv[v as usize] {
            Some(cell) => chi.push(cell),
            None if v > 0 && inv[v as usize - 1].is_some() => chi.push(chi[v as usize - 1]),
            None => return Err(format!("two consecutive values skipped at {v}")),
        }
        if cm.chi(v) != chi[v as usize] || cm.in_image(v) != inv[v as usize].is_some() {
            return Err(format!("χ or image test differs at {v}"));
        }
    }
    for a in 0..cells {
        for b in a..cells {
            let pre: Vec<u64> = (0..d)
                .filter(|&v| (a..=b).contains(&chi[v as usize]))
                .collect();
            let (lo, hi) = cm.chi_preimage(a, b);
            if pre != (lo..=hi).collect::<Vec<_>>() || hi - lo + 1 > 2 * (b - a + 1) {
                return Err(format!("χ⁻¹([{a}, {b}])"));
            }
        }
    }
    Ok(())
}

fn spreading_laws(s: &SpreadingMap, q: u64) -> Result<(), String> {
    let max = s.max_source.to_u64().ok_or("max source too large")?;
    let values: Vec<BigUint> = (0..=max).map(|x| s.apply(&big(x)).unwrap()).collect();
    if !values[0].is_zero() || values[max as usize] != s.max_target {
        return Err("endpoints".into());
    }
    if !values
        .windows(2)
        .all(|w| w[0] < w[1] && &w[1] - &w[0] <= s.a)
    {
        return Err("monotone and 𝔞-Lipschitz".into());
    }
    if !s.within_q3(q) {
        return Err(format!("𝔞 = {} above q³", s.a));
    }
    for (x, y) in values.iter().enumerate() {
        if s.inverse(y).ok() != Some(big(x as u64)) {
            return Err(format!("inverse at {y}"));
        }
    }
    Ok(())
}

/// Cursor, block, radix and spreading laws of the coupling at one `n`.
fn structure_at(c: &mut Check, name: &str, p: &DDParams, n: usize) {
    let cp = DDCoupling::new(p, n).unwrap();
    let n = format!("{name}, n = {n}");
    let idx = cp.index();
    let kappa = p.kappa();
    let cm = cp.numbering().cursor();
    c.expect(
        cursor_laws(cm).is_ok(),
        format!(
            "{n}: cursor map (Q = {}, R = {}, width {})",
            cm.q_blocks, cm.rem, cm.width
        ),
    );
    // Blocks and bases for every (P, t).
    let d = cm.d();
    let depth = block_depth(d, kappa);
    let q = big(p.q());
    let q_d = q.pow(idx.big_d as u32);
    let mut block_ok = depth == idx.p;
    let mut radix_ok = true;
    let mut cells = 0;
    for big_p in 0..idx.q_blocks {
        for t in 0..idx.width {
            cells += 1;
            let blocks = target_blocks(cm, kappa, idx.n, depth, big_p, t);
            let v = cm.u(big_p, t);
            for (i, &(lo, hi)) in blocks.iter().enumerate() {
                let size = hi - lo + 1;
                block_ok &= lo <= v && v <= hi;
                if i < depth {
                    let k = kappa.pow(i as u32);
                    block_ok &= k <= size && size <= 2 * k;
                }
                if i > 0 {
                    block_ok &= lo <= blocks[i - 1].0 && blocks[i - 1].1 <= hi;
                }
            }
            block_ok &= blocks[depth] == (0, d - 1);
            let base = cp.numbering().base(big_p, t);
            let prefix: BigUint = base[..=idx.p].iter().product();
            radix_ok &= prefix == q_d;
        }
    }
    c.expect(
        block_ok,
        format!("{n}: blocks nest, contain the cursor, κ^i <= |block i| <= 2κ^i on {cells} cells"),
    );
    c.expect(
        radix_ok,
        format!(
            "{n}: radix product b_0 ⋯ b_p = q^{} on every cell",
            idx.big_d
        ),
    );
    if cp.spreading().max_source <= big(SPREADING_LIMIT) {
        let spread = spreading_laws(cp.spreading(), p.q());
        c.expect(
            spread.is_ok(),
            format!("{n}: spreading map integral, endpoint-exact, Lipschitz <= q³: {spread:?}"),
        );
    } else {
        c.note(format!(
            "{n}: spreading domain above {SPREADING_LIMIT}, skipped"
        ));
    }
}

/// Largest spreading domain checked value by value.
pub const SPREADING_LIMIT: u64 = 5_000_000;

fn c8_structure() -> Check {
    let mut c = Check::new();
    let p = pair_a();
    structure_at(&mut c, "lamplighter → S3 level", &p, 1);
    let power = power_pair();
    for n in 1..=4 {
        structure_at(&mut c, "power pair", &power, n);
    }
    let mut small = 0;
    let mut small_ok = true;
    for width in [3, 9] {
        for q in 1..=5 {
            for rem in 0..width {
                small += 1;
                small_ok &= cursor_laws(&CursorMap::new(q, rem, width).unwrap()).is_ok();
            }
        }
    }
    c.expect(
        small_ok,
        format!("u-image and χ fiber laws on {small} further configurations"),
    );
    let mut total = 0;
    for (name, params) in [("lamplighter → S3 level", &p), ("power pair", &power)] {
        total += injection_at(&mut c, name, params, 1);
    }
    c.summary = format!(
        "two pairs, cursor and block laws up to n = 4, {total} injected elements, zero exceptions"
    );
    c
}

/// Enumerates the source Følner set and checks the triple map and the
/// injection; returns the number of elements.
fn injection_at(c: &mut Check, name: &str, p: &DDParams, n: usize) -> usize {
    let cp = DDCoupling::new(p, n).unwrap();
    let idx = cp.index();
    let q = big(p.q());
    // Injection, with the triple image compared against the box union listed directly.
    let source = p.source();
    let target = p.target();
    let elements: Vec<DeltaElement> = source
        .set(source.full(idx.width).unwrap())
        .unwrap()
        .enumerate(1 << 22)
        .unwrap()
        .collect();
    let q_pow = q.pow(idx.width as u32);
    let low = &q_pow * cp.max_e();
    let top = cp.theta_tilde_size().to_u64().unwrap();
    let mut expected = HashSet::new();
    for t in 0..idx.width {
        for theta in 0..top {
            let rows = if big(theta) < low {
                idx.q_blocks
            } else {
                cp.last_p() + 1
            };
            for big_p in 0..rows {
                expected.insert((t, big(theta), big_p));
            }
        }
    }
    let mut triples = HashSet::new();
    let mut images = HashSet::new();
    let mut in_h = true;
    for x in &elements {
        let dense = cp.encoder().to_dense(x).unwrap();
        let dg = cp.source_digits(&dense);
        triples.insert((dg.t, dg.theta_tilde.clone(), dg.big_p));
        let y = cp.inject(x).unwrap();
        in_h &= target.contains(idx.k_index(), &y);
        let g = cp.numbering().from_delta(target, &y).unwrap();
        in_h &= cp.in_h(&g).unwrap();
        images.insert(y);
    }
    c.expect(
        triples == expected && triples.len() == elements.len(),
        format!(
            "{name}, n = {n}: triple map onto the box union of {} cells",
            expected.len()
        ),
    );
    c.expect(
        images.len() == elements.len() && in_h,
        format!(
            "{name}, n = {n}: inject injective on {} elements with image in ℋ_{n}",
            elements.len()
        ),
    );
    let rep = cp.verify_exhaustive(1 << 22).unwrap();
    c.expect(
        rep.triple_bijective && rep.injective && rep.image_in_h,
        format!("{name}, n = {n}: library self-check agrees"),
    );
    elements.len()
}

// ---------------------------------------------------------------- criterion 9

/// Three levels (`S_3`, `A_5`, `A_5`) at `3, 9, 27` with profile `x^{1/2}`,
/// lamplighter target.
pub fn power_pair() -> DDParams {
    let levels = [(3, s3_fiber()), (9, a5_fiber()), (27, a5_fiber())]
        .into_iter()
        .map(|(k, g)| Level {
            k,
            gamma: Arc::new(g),
        })
        .collect();
    let source = DeltaParams::new(3, base_z2z3(), levels, None).unwrap();
    DDParams::new(
        source,
        lamplighter(3),
        ProfileSpec::power(1, 1),
        ProfileSpec::Identity,
        2,
        12,
    )
    .unwrap()
}

/// Audit plan: exhaustive at `n = 1`, seeded samples beyond.
pub const AUDIT_PLAN: [(usize, u64); 4] = [(1, 0), (2, 20_000), (3, 20_000), (4, 8_000)];

fn c9_audits() -> Check {
    let mut c = Check::new();
    let p = power_pair();
    let h = p.hypotheses();
    c.expect(
        h.holds && h.epsilon >= EPSILON_FLOOR,
        format!(
            "power pair hypotheses: lamp series summable, fitted ε = {:.3}",
            h.epsilon
        ),
    );
    let couplings: Vec<DDCoupling> = AUDIT_PLAN
        .iter()
        .map(|&(n, _)| DDCoupling::new(&p, n).unwrap())
        .collect();
    let gens = generators(p.source().params());
    let mut runs = Vec::new();
    let mut twist: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let mut other_violations = 0;
    let mut locality = 0;
    let mut twist_locality = 0;
    let mut exact_above = 0;
    let mut fits_finite = true;
    let mut explicit_ok = true;
    for (cp, &(n, samples)) in couplings.iter().zip(&AUDIT_PLAN) {
        let mode = if samples == 0 {
            SampleMode::Exhaustive { budget: 1 << 24 }
        } else {
            SampleMode::Sampled {
                samples,
                seed: 0x9 + n as u64,
            }
        };
        for &s in &gens {
            let a = distance_audit(cp, s, mode).unwrap();
            let sum = integrability_sum(cp, &a);
            match s {
                Generator::A(_) if a.violations == a.violations_with_ep_change => {
                    let e = twist.entry(s.to_string()).or_default();
                    e.0 += a.violations;
                    e.1 += a.checked;
                }
                _ => other_violations += a.violations,
            }
            if matches!(s, Generator::A(_)) {
                twist_locality += a.locality_failures;
            } else {
                locality += a.locality_failures;
            }
            exact_above += a.exact_above_certified;
            fits_finite &= a.max_fitted_constant.is_finite();
            explicit_ok &= a.max_explicit_ratio <= 1.0;
            c.note(format!(
                "n = {n} {s}: {} checked, {} outside the shape ({} with an (E, P) change), {} locality failures, sum {:.4}",
                a.checked, a.violations, a.violations_with_ep_change, a.locality_failures, sum.total
            ));
            runs.push((cp, a, sum));
        }
    }
    c.expect(
        other_violations == 0,
        "cursor and b-lamp distances within the shape bound",
    );
    let twisted: u64 = twist.values().map(|v| v.0).sum();
    c.expect(
        twisted == 0,
        format!("a-lamp distances within the shape bound: {twisted} exceptions, each with an (E, P) change"),
    );
    if twisted > 0 {
        c.known_failure = Some(format!(
            "an a-lamp step at cursor t ≥ k_1 over a b-lamp at t - k_1 multiplies in a commutator, \
             which moves the (E, P) part of the numbering; {twisted} sampled elements land outside \
             the certified shape, all of them with an (E, P) change, and {twist_locality} break \
             digit locality"
        ));
    }
    c.expect(
        locality == 0,
        "cursor and b-lamp steps: digits agree above the scale index",
    );
    c.expect(
        twist_locality == 0,
        format!("a-lamp steps: digits agree above the scale index, {twist_locality} exceptions"),
    );
    c.expect(
        exact_above == 0,
        "exact target distances below the certified bounds",
    );
    c.expect(fits_finite, "majorant constants finite at every n");
    c.expect(
        explicit_ok,
        "scale counts below the explicit per-cell bound",
    );
    let refs: Vec<_> = runs.iter().map(|(cp, a, s)| (*cp, a, s)).collect();
    for lamp in [true, false] {
        let b = uniform_bound(&refs, lamp);
        c.expect(
            b.as_ref().is_some_and(|b| b.bounded && b.hypotheses_hold),
            format!(
                "{} sums bounded uniformly over n = {:?}",
                if lamp { "lamp" } else { "cursor" },
                b.as_ref().map(|b| b.checked_n.clone()).unwrap_or_default()
            ),
        );
    }
    c.expect(
        runs.iter().all(|(_, _, s)| s.total_phi_one <= 1.0 + 1e-9),
        "φ ≡ 1 sums at most 1",
    );
    c.summary = if twisted > 0 {
        format!("a-lamp twist leaves {twisted} elements outside the shape; all other checks hold")
    } else {
        "all audits within the shape, sums bounded".into()
    };
    c
}

// ---------------------------------------------------------------- criterion 10

fn metric_instance(c: &mut Check, name: &str, atlas: &FolnerAtlas, idx: FolnerIndex) {
    let p = atlas.params();
    let n = idx.n as i64;
    let space = WindowSpace::new(p, -1, n).unwrap();
    let full = space.bfs((-1, n)).unwrap();
    // Reachability with the cursor confined to each [lo, hi] containing 0.
    let mut confined = Vec::new();
    for lo in -1..=0 {
        for hi in 0..=n {
            confined.push(((lo, hi), space.bfs((lo, hi)).unwrap()));
        }
    }
    let elements: Vec<DeltaElement> = atlas
        .set(idx)
        .unwrap()
        .enumerate(1 << 22)
        .unwrap()
        .collect();
    let mut upper_ok = 0;
    let mut upper_bad = Vec::new();
    let mut range_checked = 0;
    let mut range_bad = Vec::new();
    for x in &elements {
        let s = space.encode(x).expect("window covers the set") as usize;
        let d = full[s];
        if d == UNREACHED {
            upper_bad.push(format!("{} unreached", delta_core::to_text(x)));
            continue;
        }
        if u64::from(d) <= word_length_upper(p, x).unwrap() {
            upper_ok += 1;
        } else {
            upper_bad.push(delta_core::to_text(x));
        }
        {
            range_checked += 1;
            let (lo, hi) = range_interval(p, x);
            let reach: Vec<(i64, i64)> = confined
                .iter()
                .filter(|(_, dist)| dist[s] != UNREACHED)
                .map(|(b, _)| *b)
                .collect();
            let minimal =
                reach.contains(&(lo, hi)) && reach.iter().all(|&(a, b)| a <= lo && hi <= b);
            if !minimal {
                range_bad.push(delta_core::to_text(x));
            }
        }
    }
    c.expect(
        upper_bad.is_empty(),
        format!(
            "{name}: exact <= upper on all {} elements of F_{}",
            elements.len(),
            idx.n
        ),
    );
    c.expect(
        range_bad.is_empty(),
        format!("{name}: range interval is the minimal BFS interval for {range_checked} elements"),
    );
    for e in upper_bad.iter().chain(&range_bad).take(5) {
        c.note(e.clone());
    }
    let _ = upper_ok;
}

fn c10_metric() -> Check {
    let mut c = Check::new();
    let lamp = FolnerAtlas::new(lamplighter(3)).unwrap();
    metric_instance(&mut c, "lamplighter", &lamp, FolnerIndex::new(4, 0, 1));
    let derived = FolnerAtlas::new(derived_instance()).unwrap();
    let full3 = derived.full(3).unwrap();
    metric_instance(&mut c, "S3 level", &derived, full3);
    c.summary = "window BFS lengths below the upper bounds; range intervals minimal".into();
    c
}

// ---------------------------------------------------------------- criterion 11

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn bigq(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

/// Linear interpolation through the breakpoints `(k_m l_m, l_m)`, `(k_{m+1} l_m, l_m)`.
fn bar_f_oracle(seq: &Sequences, x: &BigRational) -> BigRational {
    let mut pts = Vec::new();
    for m in 0..seq.k.len() {
        let l = bigq(&seq.l[m]);
        pts.push((bigq(&seq.k[m]) * &l, l.clone()));
        if m + 1 < seq.k.len() {
            pts.push((bigq(&seq.k[m + 1]) * &l, l));
        }
    }
    for w in pts.windows(2) {
        let ((a, fa), (b, fb)) = (&w[0], &w[1]);
        if x <= b {
            return if a == b {
                fa.clone()
            } else {
                fa + (fb - fa) * (x - a) / (b - a)
            };
        }
    }
    pts.last().unwrap().1.clone()
}

pub const PROFILE_GRID: i64 = 10_000;

fn c11_profiles() -> Check {
    let mut c = Check::new();
    let sqrt = ProfileSpec::power(1, 1);
    let seq = build_sequences(&sqrt, 3, 3, 5).unwrap();
    let end = seq.domain_end().unwrap();
    let mut exact = true;
    let mut count = 0;
    for m in 0..seq.k.len() {
        let l = bigq(&seq.l[m]);
        for x in [
            bigq(&seq.k[m]) * &l,
            seq.k
                .get(m + 1)
                .map_or(BigRational::zero(), |k| bigq(k) * &l),
        ] {
            if x.is_zero() || x > end {
                continue;
            }
            count += 1;
            let f = seq.bar_f(&x).unwrap();
            exact &= f == bar_f_oracle(&seq, &x) && seq.bar_rho(&x).unwrap() == &x / &f;
        }
    }
    for i in 1..2000 {
        let x = rat(i * 7 + 3, 5);
        if x > end {
            break;
        }
        count += 1;
        exact &= seq.bar_f(&x).unwrap() == bar_f_oracle(&seq, &x);
    }
    c.expect(exact, format!("f̄ and ρ̄ exact at {count} rational points"));
    let delta = default_delta();
    for (name, s) in [
        ("power", build_sequences(&sqrt, 3, 3, 4).unwrap()),
        (
            "iterated log",
            build_sequences(&ProfileSpec::IteratedLog { r: 1 }, 2, 2, 3).unwrap(),
        ),
    ] {
        let bij = s.rho_bij(&delta).unwrap();
        let end = s.domain_end().unwrap();
        let two_delta = &delta * rat(2, 1);
        let mut close = true;
        let mut round = true;
        let mut monotone = true;
        let mut prev: Option<BigRational> = None;
        for i in 0..=PROFILE_GRID {
            let x = BigRational::one() + (&end - BigRational::one()) * rat(i, PROFILE_GRID);
            let y = bij.eval(&x).unwrap();
            close &= (&y - s.bar_rho(&x).unwrap()).abs() <= two_delta;
            round &= bij.inverse(&y).ok() == Some(x);
            monotone &= prev.as_ref().map_or(true, |p| &y > p);
            prev = Some(y);
        }
        c.expect(
            close && round && monotone,
            format!("{name}: |ρ_bij - ρ̄| <= 2δ, strictly increasing, exact round trip on {} grid points", PROFILE_GRID + 1),
        );
    }
    // Verdicts.
    let id = ProfileSpec::Identity;
    let id_seq = build_sequences(&id, 3, 3, 5).unwrap();
    let r_id = hypothesis_report(&id, &id_seq, 30, None);
    c.expect(
        !r_id.cursor_series.summable && r_id.cursor_series.ln_terms.iter().all(|t| t.abs() < 1e-12),
        "identity: ρ(κ^m)κ^{-m} = 1, not summable (lamplighter excluded)",
    );
    let r_sq = hypothesis_report(
        &sqrt,
        &build_sequences(&sqrt, 3, 3, 12).unwrap(),
        30,
        Some((&id_seq, &delta)),
    );
    let slope = r_sq.exponent.as_ref().map_or(f64::NAN, |e| e.slope);
    c.expect(
        r_sq.cursor_series.summable && r_sq.lamp_series.summable && (slope - 0.5).abs() < 1e-6,
        format!("power α = 1: both series summable, fitted exponent {slope:.6}"),
    );
    let log = ProfileSpec::IteratedLog { r: 1 };
    let r_log = hypothesis_report(&log, &build_sequences(&log, 3, 3, 6).unwrap(), 30, None);
    c.expect(
        r_log.cursor_series.summable && r_log.lamp_series.summable,
        "iterated log: both series summable",
    );
    c.summary = "breakpoints exact, ρ_bij within 2δ and invertible, verdicts reproduced".into();
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_listing_matches_ordered_factorization_counts() {
        // Ordered factorizations H(n) summed over 2..=12: 1+1+2+1+3+1+4+2+3+1+8.
        assert_eq!(all_bases(12).len(), 27);
        assert!(all_bases(12)
            .iter()
            .all(|r| r.iter().product::<u64>() <= 12));
    }

    #[test]
    fn small_criteria_pass() {
        for id in [2, 7, 11] {
            let r = run(id).unwrap();
            assert!(r.passed, "{}", r.line());
        }
        assert!(run(12).is_none());
    }
}
