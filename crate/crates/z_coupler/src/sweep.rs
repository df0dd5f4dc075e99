use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use delta_core::{generators, Generator};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::carry_position;
use crate::encoder::{DenseElement, ZEncoder};
use crate::{Result, ZError};

/// Cursor-gap statistics for the elements whose bound uses carry position `m`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CarryBucket {
    pub m: usize,
    pub count: u64,
    pub min_gap: u128,
    pub max_gap: u128,
    /// `κ^{m+1} q^{κ^{m+1}}`.
    pub bound: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapStats {
    pub generator: String,
    #[serde(skip)]
    pub gen: Generator,
    pub checked: u64,
    pub max_gap: u128,
    /// Gaps above `q` (lamps) or at or above the carry bound (cursor).
    pub violations: u64,
    /// Results falling outside `𝒢_n`.
    pub escapes: u64,
    /// Exact gap counts; filled for lamp generators only.
    pub histogram: BTreeMap<u128, u64>,
    /// Filled for cursor generators only.
    pub buckets: Vec<CarryBucket>,
}

impl GapStats {
    fn new(gen: Generator, n: usize, enc: &ZEncoder) -> Self {
        let buckets = if gen.is_lamp() {
            Vec::new()
        } else {
            (0..n)
                .map(|m| CarryBucket {
                    m,
                    min_gap: u128::MAX,
                    bound: enc.cursor_bound(m).to_u128().unwrap_or(u128::MAX),
                    ..CarryBucket::default()
                })
                .collect()
        };
        Self {
            generator: gen.to_string(),
            gen,
            checked: 0,
            max_gap: 0,
            violations: 0,
            escapes: 0,
            histogram: BTreeMap::new(),
            buckets,
        }
    }

    fn merge(&mut self, other: GapStats) {
        self.checked += other.checked;
        self.max_gap = self.max_gap.max(other.max_gap);
        self.violations += other.violations;
        self.escapes += other.escapes;
        for (r, c) in other.histogram {
            *self.histogram.entry(r).or_default() += c;
        }
        for (b, o) in self.buckets.iter_mut().zip(other.buckets) {
            b.count += o.count;
            b.min_gap = b.min_gap.min(o.min_gap);
            b.max_gap = b.max_gap.max(o.max_gap);
        }
    }
}

/// Outcome of running every generator over (all or sampled) elements of `𝒢_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub n: usize,
    pub size: u128,
    pub exhaustive: bool,
    pub elements: u64,
    pub interior: u64,
    /// Elements with `ι_n⁻¹(ι_n(x)) != x`.
    pub round_trip_failures: u64,
    /// Two elements sharing a code (exhaustive sweeps only).
    pub collisions: u64,
    /// Every code in `[0, |𝒢_n| - 1]` was hit (exhaustive sweeps only).
    pub surjective: bool,
    /// Elements by the carry position of their cursor.
    pub carry_counts: Vec<u64>,
    /// Elements whose cursor is `κ^n - 1`.
    pub saturated: u64,
    pub stats: Vec<GapStats>,
}

impl SweepReport {
    pub fn lamp_max_gap(&self) -> u128 {
        self.stats
            .iter()
            .filter(|s| s.gen.is_lamp())
            .map(|s| s.max_gap)
            .max()
            .unwrap_or(0)
    }

    pub fn violations(&self, lamp: bool) -> u64 {
        self.stats
            .iter()
            .filter(|s| s.gen.is_lamp() == lamp)
            .map(|s| s.violations)
            .sum()
    }

    pub fn escapes(&self) -> u64 {
        self.stats.iter().map(|s| s.escapes).sum()
    }

    /// Merged lamp-generator gap histogram.
    pub fn lamp_histogram(&self) -> BTreeMap<u128, u64> {
        let mut out = BTreeMap::new();
        for s in self.stats.iter().filter(|s| s.gen.is_lamp()) {
            for (&r, &c) in &s.histogram {
                *out.entry(r).or_default() += c;
            }
        }
        out
    }
}

struct Partial {
    elements: u64,
    interior: u64,
    round_trip_failures: u64,
    carry_counts: Vec<u64>,
    saturated: u64,
    stats: Vec<GapStats>,
}

impl Partial {
    fn new(enc: &ZEncoder, gens: &[Generator]) -> Self {
        Self {
            elements: 0,
            interior: 0,
            round_trip_failures: 0,
            carry_counts: vec![0; enc.n()],
            saturated: 0,
            stats: gens
                .iter()
                .map(|&g| GapStats::new(g, enc.n(), enc))
                .collect(),
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.elements += other.elements;
        self.interior += other.interior;
        self.round_trip_failures += other.round_trip_failures;
        self.saturated += other.saturated;
        for (a, b) in self.carry_counts.iter_mut().zip(other.carry_counts) {
            *a += b;
        }
        for (a, b) in self.stats.iter_mut().zip(other.stats) {
            a.merge(b);
        }
        self
    }

    fn visit(
        &mut self,
        enc: &ZEncoder,
        x: &DenseElement,
        z: u128,
        check_decode: bool,
        scratch: &mut DenseElement,
    ) {
        self.elements += 1;
        let n = enc.n();
        match carry_position(x.t, n, enc.kappa()) {
            Ok(m) => self.carry_counts[m] += 1,
            Err(_) => self.saturated += 1,
        }
        if check_decode && enc.decode_fast(z).as_ref() != Some(x) {
            self.round_trip_failures += 1;
        }
        if !enc.is_interior(x.t) {
            return;
        }
        self.interior += 1;
        let q = enc.q() as u128;
        for st in self.stats.iter_mut() {
            st.checked += 1;
            scratch.clone_from(x);
            if !enc.apply_dense(scratch, st.gen) {
                st.escapes += 1;
                continue;
            }
            let zs = enc.encode_fast(scratch).expect("fast path");
            let gap = z.abs_diff(zs);
            st.max_gap = st.max_gap.max(gap);
            match st.gen {
                Generator::Cursor(d) => {
                    let from = if d > 0 { x.t } else { x.t - 1 };
                    let m = carry_position(from, n, enc.kappa()).expect("interior cursor");
                    let b = &mut st.buckets[m];
                    b.count += 1;
                    b.min_gap = b.min_gap.min(gap);
                    b.max_gap = b.max_gap.max(gap);
                    if gap >= b.bound {
                        st.violations += 1;
                    }
                }
                _ => {
                    *st.histogram.entry(gap).or_default() += 1;
                    if gap > q {
                        st.violations += 1;
                    }
                }
            }
        }
    }

    fn finish(
        self,
        enc: &ZEncoder,
        size: u128,
        exhaustive: bool,
        collisions: u64,
        surjective: bool,
    ) -> SweepReport {
        SweepReport {
            n: enc.n(),
            size,
            exhaustive,
            elements: self.elements,
            interior: self.interior,
            round_trip_failures: self.round_trip_failures,
            collisions,
            surjective,
            carry_counts: self.carry_counts,
            saturated: self.saturated,
            stats: self.stats,
        }
    }
}

fn fast_size(enc: &ZEncoder, budget: u128) -> Result<u128> {
    match enc.size_u128() {
        Some(s) if s <= budget => Ok(s),
        _ => Err(ZError::Budget {
            size: enc.size().to_string(),
            budget,
        }),
    }
}

/// Visits every element of `𝒢_n`, enumerated lamp by lamp independently of the
/// numbering, and checks injectivity and surjectivity of `ι_n` with a bitset.
///
/// `decode_stride` controls how often the round trip is checked (1 = always).
pub fn exhaustive_sweep(enc: &ZEncoder, budget: u128, decode_stride: u64) -> Result<SweepReport> {
    let size = fast_size(enc, budget)?;
    let words = (size / 64 + 1) as usize;
    let seen: Vec<AtomicU64> = (0..words).map(|_| AtomicU64::new(0)).collect();
    let collisions = AtomicU64::new(0);
    let gens = generators(enc.params());
    let codecs = enc.level_codecs();
    let q = enc.q() as u32;
    let radices: Vec<u32> = std::iter::repeat(q)
        .take(enc.width() as usize)
        .chain(
            codecs
                .iter()
                .flat_map(|l| std::iter::repeat(l.order as u32).take((enc.width() - l.k) as usize)),
        )
        .collect();
    let partial = (0..enc.width())
        .into_par_iter()
        .map(|t| {
            let mut part = Partial::new(enc, &gens);
            let mut x = DenseElement {
                t,
                f0: vec![0; enc.width() as usize],
                fp: codecs
                    .iter()
                    .map(|l| vec![l.identity(); (enc.width() - l.k) as usize])
                    .collect(),
            };
            let mut digits = vec![0u32; radices.len()];
            let mut scratch = x.clone();
            let mut count = 0u64;
            loop {
                let z = enc.encode_fast(&x).expect("fast path");
                if z >= size {
                    collisions.fetch_add(1, Ordering::Relaxed);
                } else {
                    let bit = 1u64 << (z % 64);
                    if seen[(z / 64) as usize].fetch_or(bit, Ordering::Relaxed) & bit != 0 {
                        collisions.fetch_add(1, Ordering::Relaxed);
                    }
                }
                part.visit(enc, &x, z, count % decode_stride.max(1) == 0, &mut scratch);
                count += 1;
                // Odometer step over f_0 then f'.
                let mut pos = 0;
                loop {
                    if pos == digits.len() {
                        return part;
                    }
                    digits[pos] += 1;
                    let wrapped = digits[pos] == radices[pos];
                    if wrapped {
                        digits[pos] = 0;
                    }
                    set_slot(&mut x, codecs, pos, digits[pos]);
                    if !wrapped {
                        break;
                    }
                    pos += 1;
                }
            }
        })
        .reduce(|| Partial::new(enc, &gens), Partial::merge);
    let surjective = seen.iter().enumerate().all(|(i, w)| {
        let lo = i as u128 * 64;
        let want = if lo + 64 <= size {
            u64::MAX
        } else {
            (1u64 << (size - lo)) - 1
        };
        w.load(Ordering::Relaxed) == want
    });
    Ok(partial.finish(enc, size, true, collisions.into_inner(), surjective))
}

fn set_slot(x: &mut DenseElement, codecs: &[crate::encoder::LevelCodec], pos: usize, digit: u32) {
    let w = x.f0.len();
    if pos < w {
        x.f0[pos] = digit;
        return;
    }
    let mut rest = pos - w;
    for (l, vals) in codecs.iter().zip(x.fp.iter_mut()) {
        if rest < vals.len() {
            vals[rest] = l.elem_of[digit as usize];
            return;
        }
        rest -= vals.len();
    }
}

/// Same audit on `samples` uniformly drawn codes, each decoded then re-encoded.
pub fn sampled_sweep(enc: &ZEncoder, samples: u64, seed: u64) -> Result<SweepReport> {
    let size = fast_size(enc, u128::MAX)?;
    let gens = generators(enc.params());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut part = Partial::new(enc, &gens);
    let mut scratch: Option<DenseElement> = None;
    for _ in 0..samples {
        let z = rng.gen_range(0..size);
        let x = enc.decode_fast(z).expect("code below size");
        let scratch = scratch.get_or_insert_with(|| x.clone());
        if enc.encode_fast(&x) != Some(z) {
            part.round_trip_failures += 1;
        }
        part.visit(enc, &x, z, false, scratch);
    }
    Ok(part.finish(enc, size, false, 0, false))
}

/// Number of elements of `𝒢_n` whose cursor has carry position `m`, counted over
/// cursors: `(|𝒢_n| / κ^n) · #{t : i_0(t) = m}`. The last entry is the saturated
/// cursor `κ^n - 1`.
pub fn carry_histogram(enc: &ZEncoder) -> Vec<BigUint> {
    let per_cursor = enc.size() / BigUint::from(enc.width());
    let mut cursors = vec![0u64; enc.n() + 1];
    for t in 0..enc.width() {
        match carry_position(t, enc.n(), enc.kappa()) {
            Ok(m) => cursors[m] += 1,
            Err(_) => cursors[enc.n()] += 1,
        }
    }
    cursors
        .into_iter()
        .map(|c| &per_cursor * BigUint::from(c))
        .collect()
}
