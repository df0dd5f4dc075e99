use std::collections::BTreeMap;

use delta_core::DeltaElement;
use folner_atlas::FolnerAtlas;
use group_kernel::Elem;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::cursor::CursorMap;
use crate::index::TargetIndex;
use crate::{DDError, Result};

/// Element of `𝒦_n = F_{D,I,J}` with lamps stored densely.
///
/// `f0[s]` is the `A × B` id at `s ∈ [0, D-1]`; `fp[m-1][s - k_m]` the `Γ_m` id of
/// `g'_m(s)` for `s ∈ [k_m, D-1]`, `m <= M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TargetElement {
    pub v: u64,
    pub f0: Vec<Elem>,
    pub fp: Vec<Vec<Elem>>,
}

#[derive(Clone, Debug)]
struct TargetLevel {
    k: u64,
    /// Last site numbered with the full radix `|Γ'_m|`.
    hi: i64,
    /// `|Λ^{(I)}_J|` for the level `I`, numbering site `D - 1`.
    top_radix: Option<u64>,
    order: u64,
    digit_of: Vec<u32>,
    elem_of: Vec<Elem>,
}

impl TargetLevel {
    fn identity(&self) -> Elem {
        self.elem_of[0]
    }

    /// `(site, radix)` in numbering order.
    fn slots(&self, d: u64) -> impl Iterator<Item = (u64, u64)> + '_ {
        let full = (self.k as i64..=self.hi).map(move |s| (s as u64, self.order));
        full.chain(self.top_radix.map(|r| (d - 1, r)))
    }
}

/// The block numbering `ϑ_n(·, v)` of `𝒦_n`.
///
/// For the cell `(P, t) = χ(v) divmod κ^n`, blocks `ℬ_i = χ⁻¹(ℬ'_i)` nest from
/// `ℬ_0 ∋ v` up to `ℬ_p = [0, D-1]`. Digits in the base `b_{·,P,t}` are `ν_i`,
/// the level-0 lamps on `ℬ_i \ ℬ_{i-1}` read in increasing site order (first
/// site least significant, radix `q` per site), then `μ_1, …, μ_M`, the derived
/// lamps of each level read the same way with digits ordering `Γ'_m` as its
/// subset chain does, identity first. Site `D - 1` of level `I` is the last digit
/// of `μ_I` and ranges over `Λ^{(I)}_J`.
///
/// `b_0 = q^{|ℬ_0|}`, so a cell whose cursor absorbed a skipped value has
/// `b_0 = q^2`. Radices equal to 1 occur when two consecutive blocks coincide.
#[derive(Clone, Debug)]
pub struct TargetNumbering {
    q: u64,
    kappa: u64,
    index: TargetIndex,
    cursor: CursorMap,
    levels: Vec<TargetLevel>,
    level_radices: Vec<BigUint>,
    size_per_cursor: BigUint,
}

/// `p` with `κ^{p-1} < D <= κ^p`.
pub fn block_depth(d: u64, kappa: u64) -> usize {
    let (mut p, mut pow) = (0, 1u64);
    while pow < d {
        pow *= kappa;
        p += 1;
    }
    p
}

/// Ideal blocks `ℬ'_i(P, t) ⊂ [0, Q κ^n - 1]`, `i = 0..=p`: the source block of
/// `t` shifted by `P κ^n` up to `i = n`, then `κ^i` sites ending at the end of
/// block `P` when `P + 1 >= κ^{i-n}` and `[0, κ^i - 1]` otherwise; `ℬ'_p` is everything.
pub fn ideal_blocks(
    cursor: &CursorMap,
    kappa: u64,
    n: usize,
    p: usize,
    big_p: u64,
    t: u64,
) -> Vec<(u64, u64)> {
    let w = cursor.width;
    (0..=p)
        .map(|i| {
            let size = kappa.pow(i as u32);
            if i == p {
                (0, cursor.q_blocks * w - 1)
            } else if i <= n {
                let lo = big_p * w + t - t % size;
                (lo, lo + size - 1)
            } else if big_p + 1 >= kappa.pow((i - n) as u32) {
                ((big_p + 1) * w - size, (big_p + 1) * w - 1)
            } else {
                (0, size - 1)
            }
        })
        .collect()
}

/// `ℬ_i(P, t) = χ⁻¹(ℬ'_i(P, t))`, `i = 0..=p`.
pub fn target_blocks(
    cursor: &CursorMap,
    kappa: u64,
    n: usize,
    p: usize,
    big_p: u64,
    t: u64,
) -> Vec<(u64, u64)> {
    ideal_blocks(cursor, kappa, n, p, big_p, t)
        .into_iter()
        .map(|(a, b)| cursor.chi_preimage(a, b))
        .collect()
}

impl TargetNumbering {
    pub fn new(target: &FolnerAtlas, index: &TargetIndex) -> Result<Self> {
        let p = target.params();
        let d = index.big_d;
        let cursor = CursorMap::new(index.q_blocks, index.rem, index.width)?;
        let mut levels = Vec::with_capacity(index.big_m);
        for m in 1..=index.big_m {
            let chain = target.chain(m);
            let gamma = &p.level(m).gamma;
            let elem_of = chain.subset(chain.len()).to_vec();
            let mut digit_of = vec![u32::MAX; gamma.gamma().order()];
            for (i, &g) in elem_of.iter().enumerate() {
                digit_of[g as usize] = i as u32;
            }
            if elem_of[0] != gamma.gamma().identity() {
                return Err(DDError::Internal(format!(
                    "chain of level {m} does not start at the identity"
                )));
            }
            let hi = if m < index.big_i {
                d as i64 - 1
            } else {
                d as i64 - 2
            };
            levels.push(TargetLevel {
                k: p.level(m).k,
                hi,
                top_radix: (m == index.big_i).then(|| chain.size(index.big_j) as u64),
                order: elem_of.len() as u64,
                digit_of,
                elem_of,
            });
        }
        let level_radices: Vec<BigUint> = levels
            .iter()
            .map(|l| l.slots(d).fold(BigUint::one(), |acc, (_, r)| acc * r))
            .collect();
        let q = p.q() as u64;
        let size_per_cursor = level_radices
            .iter()
            .fold(BigUint::from(q).pow(d as u32), |acc, r| acc * r);
        if &size_per_cursor * d != index.k_size {
            return Err(DDError::Internal(format!(
                "numbering covers {} elements, 𝒦_n has {}",
                &size_per_cursor * d,
                index.k_size
            )));
        }
        Ok(Self {
            q,
            kappa: p.kappa(),
            index: index.clone(),
            cursor,
            levels,
            level_radices,
            size_per_cursor,
        })
    }

    pub fn index(&self) -> &TargetIndex {
        &self.index
    }

    pub fn cursor(&self) -> &CursorMap {
        &self.cursor
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `max ϑ_n + 1 = |𝒦_n| / D`.
    pub fn size_per_cursor(&self) -> &BigUint {
        &self.size_per_cursor
    }

    /// `ℬ'_i(P, t)` for `i = 0..=p`.
    pub fn source_blocks(&self, big_p: u64, t: u64) -> Vec<(u64, u64)> {
        ideal_blocks(
            &self.cursor,
            self.kappa,
            self.index.n,
            self.index.p,
            big_p,
            t,
        )
    }

    /// `ℬ_i(P, t) = χ⁻¹(ℬ'_i(P, t))` for `i = 0..=p`.
    pub fn blocks(&self, big_p: u64, t: u64) -> Vec<(u64, u64)> {
        target_blocks(
            &self.cursor,
            self.kappa,
            self.index.n,
            self.index.p,
            big_p,
            t,
        )
    }

    /// The base `b_{·,P,t}`, radices of value 1 included.
    pub fn base(&self, big_p: u64, t: u64) -> Vec<BigUint> {
        let blocks = self.blocks(big_p, t);
        let mut prev = 0u64;
        let mut out = Vec::with_capacity(blocks.len() + self.level_radices.len());
        for (lo, hi) in blocks {
            let size = hi - lo + 1;
            out.push(BigUint::from(self.q).pow((size - prev) as u32));
            prev = size;
        }
        out.extend(self.level_radices.iter().cloned());
        out
    }

    /// Level-0 sites in digit order for the cell `(P, t)`.
    pub fn site_order(&self, big_p: u64, t: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.index.big_d as usize);
        let mut inner: Option<(u64, u64)> = None;
        for (lo, hi) in self.blocks(big_p, t) {
            out.extend((lo..=hi).filter(|s| inner.map_or(true, |(a, b)| *s < a || *s > b)));
            inner = Some((lo, hi));
        }
        out
    }

    fn check_shape(&self, g: &TargetElement) -> Result<()> {
        let d = self.index.big_d;
        if g.v >= d || g.f0.len() != d as usize || g.fp.len() != self.levels.len() {
            return Err(DDError::Domain(format!(
                "element shape does not match D = {d}"
            )));
        }
        if g.f0.iter().any(|&x| x as u64 >= self.q) {
            return Err(DDError::Domain("level-0 lamp outside A × B".into()));
        }
        for (m, (l, vals)) in self.levels.iter().zip(&g.fp).enumerate() {
            if vals.len() as u64 != d - l.k {
                return Err(DDError::Domain(format!(
                    "level {} has {} sites",
                    m + 1,
                    vals.len()
                )));
            }
            let free: u64 = l.slots(d).count() as u64;
            if vals[free as usize..].iter().any(|&x| x != l.identity()) {
                return Err(DDError::Domain(format!(
                    "level {} is nontrivial at D - 1",
                    m + 1
                )));
            }
        }
        Ok(())
    }

    /// `ϑ_n(g, v)` read in the cell `χ(v)`; defined for every cursor `v`.
    pub fn vartheta_cell(&self, g: &TargetElement) -> Result<BigUint> {
        self.check_shape(g)?;
        let d = self.index.big_d;
        let mut acc = BigUint::zero();
        for (l, vals) in self.levels.iter().zip(&g.fp).rev() {
            let slots: Vec<(u64, u64)> = l.slots(d).collect();
            for &(s, r) in slots.iter().rev() {
                let digit = l.digit_of[vals[(s - l.k) as usize] as usize];
                if digit as u64 >= r {
                    return Err(DDError::Domain(format!(
                        "derived value at site {s} outside its range"
                    )));
                }
                acc = acc * r + digit;
            }
        }
        let (big_p, t) = self.cursor.cell(g.v);
        for &s in self.site_order(big_p, t).iter().rev() {
            acc = acc * self.q + g.f0[s as usize];
        }
        Ok(acc)
    }

    /// `ϑ_n(g, v)`; errors unless `v ∈ im(u)`.
    pub fn vartheta(&self, g: &TargetElement) -> Result<BigUint> {
        if !self.cursor.in_image(g.v) {
            return Err(DDError::Cursor { v: g.v });
        }
        self.vartheta_cell(g)
    }

    /// Inverse of `ϑ_n(·, v)` in the cell `χ(v)`.
    pub fn vartheta_decode_cell(&self, z: &BigUint, v: u64) -> Result<TargetElement> {
        let d = self.index.big_d;
        if v >= d || z >= &self.size_per_cursor {
            return Err(DDError::Domain(format!(
                "({z}, {v}) outside [0, {}) × [0, {d})",
                self.size_per_cursor
            )));
        }
        let (big_p, t) = self.cursor.cell(v);
        let mut rest = z.clone();
        let q = BigUint::from(self.q);
        let mut f0 = vec![0; d as usize];
        for s in self.site_order(big_p, t) {
            let (r, digit) = rest.div_rem(&q);
            f0[s as usize] = digit.to_u32().unwrap();
            rest = r;
        }
        let mut fp = Vec::with_capacity(self.levels.len());
        for l in &self.levels {
            let mut vals = vec![l.identity(); (d - l.k) as usize];
            for (s, r) in l.slots(d) {
                let (next, digit) = rest.div_rem(&BigUint::from(r));
                vals[(s - l.k) as usize] = l.elem_of[digit.to_usize().unwrap()];
                rest = next;
            }
            fp.push(vals);
        }
        Ok(TargetElement { v, f0, fp })
    }

    /// `ϑ_n(·, v)⁻¹(z)`; errors unless `v ∈ im(u)`.
    pub fn vartheta_decode(&self, z: &BigUint, v: u64) -> Result<TargetElement> {
        if !self.cursor.in_image(v) {
            return Err(DDError::Cursor { v });
        }
        self.vartheta_decode_cell(z, v)
    }

    /// Digits of `z` in the base `b_{·,P,t}`.
    pub fn digits(&self, z: &BigUint, big_p: u64, t: u64) -> Vec<BigUint> {
        let mut rest = z.clone();
        self.base(big_p, t)
            .iter()
            .map(|r| {
                let (next, digit) = rest.div_rem(r);
                rest = next;
                digit
            })
            .collect()
    }

    /// `v + D ϑ_n(g, v)`, a bijection `𝒦_n → [0, |𝒦_n| - 1]`.
    pub fn code(&self, g: &TargetElement) -> Result<BigUint> {
        Ok(self.vartheta_cell(g)? * self.index.big_d + g.v)
    }

    pub fn decode_code(&self, c: &BigUint) -> Result<TargetElement> {
        let (z, v) = c.div_rem(&BigUint::from(self.index.big_d));
        self.vartheta_decode_cell(&z, v.to_u64().unwrap())
    }

    pub fn to_delta(&self, g: &TargetElement) -> DeltaElement {
        let f0: BTreeMap<i64, Elem> =
            g.f0.iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(s, &x)| (s as i64, x))
                .collect();
        let mut fprime: Vec<BTreeMap<i64, Elem>> = self
            .levels
            .iter()
            .zip(&g.fp)
            .map(|(l, vals)| {
                vals.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != l.identity())
                    .map(|(i, &x)| ((l.k + i as u64) as i64, x))
                    .collect()
            })
            .collect();
        while fprime.last().is_some_and(|m| m.is_empty()) {
            fprime.pop();
        }
        DeltaElement {
            t: g.v as i64,
            f0,
            fprime,
        }
    }

    /// Dense form of an element of `𝒦_n`; errors outside `𝒦_n`.
    pub fn from_delta(&self, target: &FolnerAtlas, x: &DeltaElement) -> Result<TargetElement> {
        if !target.contains(self.index.k_index(), x) || x.fprime.len() > self.levels.len() {
            return Err(DDError::Domain("element outside 𝒦_n".into()));
        }
        let d = self.index.big_d;
        let mut f0 = vec![0; d as usize];
        for (&s, &v) in &x.f0 {
            f0[s as usize] = v;
        }
        let mut fp: Vec<Vec<Elem>> = self
            .levels
            .iter()
            .map(|l| vec![l.identity(); (d - l.k) as usize])
            .collect();
        for (m, map) in x.fprime.iter().enumerate() {
            for (&s, &g) in map {
                fp[m][(s as u64 - self.levels[m].k) as usize] = g;
            }
        }
        Ok(TargetElement {
            v: x.t as u64,
            f0,
            fp,
        })
    }
}
