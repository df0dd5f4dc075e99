use std::collections::BTreeMap;

use delta_core::{apply_generator, generators, DeltaElement, DeltaParams, Generator};
use group_kernel::Elem;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::SubsetChain;
use crate::{FolnerError, Result};

/// `(n, i, j)`: window `[0, n-1]`, level `i` whose value at `n - 1` is restricted
/// to the `j`-th chain member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FolnerIndex {
    pub n: u64,
    pub i: usize,
    pub j: usize,
}

impl FolnerIndex {
    pub fn new(n: u64, i: usize, j: usize) -> Self {
        Self { n, i, j }
    }
}

/// Diagonal-product parameters with one subset chain per materialized level.
#[derive(Clone, Debug)]
pub struct FolnerAtlas {
    params: DeltaParams,
    chains: Vec<SubsetChain>,
}

impl FolnerAtlas {
    pub fn new(params: DeltaParams) -> Result<Self> {
        let chains = params
            .levels()
            .iter()
            .map(|l| SubsetChain::build(&l.gamma))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params, chains })
    }

    pub fn with_chains(params: DeltaParams, chains: Vec<SubsetChain>) -> Result<Self> {
        if chains.len() != params.levels().len() {
            return Err(FolnerError::Chain("one chain per level required".into()));
        }
        for (m, c) in chains.iter().enumerate() {
            c.check(params.q())?;
            let g = &params.level(m + 1).gamma;
            if c.size(c.len()) != g.gamma_prime_order()
                || c.subset(c.len())
                    .iter()
                    .any(|&x| g.prime_index(x).is_none())
            {
                return Err(FolnerError::Chain(format!(
                    "chain {} does not exhaust Γ'",
                    m + 1
                )));
            }
        }
        Ok(Self { params, chains })
    }

    pub fn params(&self) -> &DeltaParams {
        &self.params
    }

    /// Chain of level `m >= 1`.
    pub fn chain(&self, m: usize) -> &SubsetChain {
        &self.chains[m - 1]
    }

    /// `𝔩(n - 1)`.
    pub fn top_level(&self, n: u64) -> Result<usize> {
        Ok(self.params.level_index(n - 1)?)
    }

    /// `N_i`, with `N_0 = 1`.
    pub fn stages(&self, i: usize) -> usize {
        if i == 0 {
            1
        } else {
            self.chain(i).len()
        }
    }

    pub fn validate(&self, idx: FolnerIndex) -> Result<()> {
        if idx.n == 0 {
            return Err(FolnerError::Index(format!("{idx:?}: n must be >= 1")));
        }
        let top = self.top_level(idx.n)?;
        if idx.i > top || idx.j == 0 || idx.j > self.stages(idx.i) {
            return Err(FolnerError::Index(format!(
                "{idx:?} outside i <= {top}, 1 <= j <= N_i"
            )));
        }
        Ok(())
    }

    /// `F_n = F_{n, 𝔩(n-1), N_𝔩}`: everything with range in `[0, n-1]`.
    pub fn full(&self, n: u64) -> Result<FolnerIndex> {
        let i = self.top_level(n)?;
        Ok(FolnerIndex::new(n, i, self.stages(i)))
    }

    /// Next index: `j + 1`, then `(i + 1, 1)`, then `(n + 1, 0, 1)`.
    pub fn successor(&self, idx: FolnerIndex) -> Result<FolnerIndex> {
        self.validate(idx)?;
        if idx.j < self.stages(idx.i) {
            return Ok(FolnerIndex::new(idx.n, idx.i, idx.j + 1));
        }
        if idx.i < self.top_level(idx.n)? {
            return Ok(FolnerIndex::new(idx.n, idx.i + 1, 1));
        }
        Ok(FolnerIndex::new(idx.n + 1, 0, 1))
    }

    /// `n q^n ∏_{m<i} |Γ'_m|^{n-k_m} · |Λ^{(i)}_j| · ∏_{i<=m<=𝔩} |Γ'_m|^{n-k_m-1}`,
    /// with the level-0 factor `|Λ^{(0)}_1|` counted as 1.
    pub fn cardinality(&self, idx: FolnerIndex) -> Result<BigUint> {
        self.validate(idx)?;
        let n = idx.n;
        let mut card = BigUint::from(n) * BigUint::from(self.params.q()).pow(n as u32);
        for m in 1..=self.top_level(n)? {
            let g = BigUint::from(self.params.prime_order(m));
            let k = self.params.level(m).k;
            if m < idx.i {
                card *= g.pow((n - k) as u32);
            } else {
                if m == idx.i {
                    card *= BigUint::from(self.chain(m).size(idx.j));
                }
                card *= g.pow((n - k - 1) as u32);
            }
        }
        Ok(card)
    }

    /// `ln |F_{n,i,j}|` from the product formula.
    pub fn ln_cardinality(&self, idx: FolnerIndex) -> Result<f64> {
        self.validate(idx)?;
        let n = idx.n;
        let mut ln = (n as f64).ln() + n as f64 * (self.params.q() as f64).ln();
        for m in 1..=self.top_level(n)? {
            let g = (self.params.prime_order(m) as f64).ln();
            let k = self.params.level(m).k;
            if m < idx.i {
                ln += (n - k) as f64 * g;
            } else {
                if m == idx.i {
                    ln += (self.chain(m).size(idx.j) as f64).ln();
                }
                ln += (n - k - 1) as f64 * g;
            }
        }
        Ok(ln)
    }

    /// Membership predicate of `F_{n,i,j}`.
    pub fn contains(&self, idx: FolnerIndex, x: &DeltaElement) -> bool {
        let Ok(top) = self.top_level(idx.n) else {
            return false;
        };
        let last = idx.n as i64 - 1;
        if x.t < 0 || x.t > last || x.f0.keys().any(|&s| s < 0 || s > last) {
            return false;
        }
        for (pos, map) in x.fprime.iter().enumerate() {
            let m = pos + 1;
            if map.is_empty() {
                continue;
            }
            if m > top {
                return false;
            }
            let k = self.params.level(m).k as i64;
            let hi = if m <= idx.i { last } else { last - 1 };
            if map.keys().any(|&s| s < k || s > hi) {
                return false;
            }
            if m == idx.i {
                if let Some(&v) = map.get(&last) {
                    if !self.chain(m).contains(idx.j, v) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn set(&self, idx: FolnerIndex) -> Result<FolnerSet<'_>> {
        self.validate(idx)?;
        let n = idx.n as i64;
        let mut slots = vec![Slot::Cursor];
        slots.extend((0..n).map(Slot::F0));
        for m in 1..=self.top_level(idx.n)? {
            let k = self.params.level(m).k as i64;
            let hi = if m < idx.i { n - 1 } else { n - 2 };
            slots.extend((k..=hi).map(|s| Slot::Prime { m, site: s }));
            if m == idx.i {
                slots.push(Slot::Lambda { m, site: n - 1 });
            }
        }
        let radices = slots
            .iter()
            .map(|s| match *s {
                Slot::Cursor => idx.n,
                Slot::F0(_) => self.params.q() as u64,
                Slot::Prime { m, .. } => self.params.prime_order(m) as u64,
                Slot::Lambda { m, .. } => self.chain(m).size(idx.j) as u64,
            })
            .collect();
        Ok(FolnerSet {
            atlas: self,
            idx,
            slots,
            radices,
        })
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Cursor,
    F0(i64),
    Prime { m: usize, site: i64 },
    Lambda { m: usize, site: i64 },
}

/// A materializable `F_{n,i,j}`: elements are numbered by mixed radix over its
/// free slots (cursor, level-0 lamps, derived values).
pub struct FolnerSet<'a> {
    atlas: &'a FolnerAtlas,
    idx: FolnerIndex,
    slots: Vec<Slot>,
    radices: Vec<u64>,
}

/// Sets beyond this size are never materialized.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryReport {
    pub size: u64,
    pub boundary: u64,
    /// Boundary equals `{t ∈ {0, n-1}}`.
    pub law_holds: bool,
    /// `(x, s)` with `s` a lamp generator and `x s ∉ F`.
    pub lamp_exits: u64,
    /// Lamp exits from a cursor `t < n - 1`.
    pub interior_lamp_exits: u64,
}

impl<'a> FolnerSet<'a> {
    pub fn index(&self) -> FolnerIndex {
        self.idx
    }

    pub fn cardinality(&self) -> BigUint {
        self.radices.iter().fold(BigUint::one(), |acc, &r| acc * r)
    }

    pub fn size_u64(&self) -> Option<u64> {
        self.cardinality().to_u64()
    }

    fn value(&self, slot: Slot, d: u64) -> Elem {
        match slot {
            Slot::Prime { m, .. } => self.atlas.params.level(m).gamma.gamma_prime()[d as usize],
            Slot::Lambda { m, .. } => self.atlas.chain(m).subset(self.idx.j)[d as usize],
            _ => d as Elem,
        }
    }

    fn assemble(&self, digits: impl Iterator<Item = u64>) -> DeltaElement {
        let p = &self.atlas.params;
        let mut x = DeltaElement::identity();
        let mut levels: Vec<BTreeMap<i64, Elem>> = Vec::new();
        for (&slot, d) in self.slots.iter().zip(digits) {
            match slot {
                Slot::Cursor => x.t = d as i64,
                Slot::F0(s) => {
                    if d != 0 {
                        x.f0.insert(s, d as Elem);
                    }
                }
                Slot::Prime { m, site } | Slot::Lambda { m, site } => {
                    let v = self.value(slot, d);
                    if v != p.level(m).gamma.gamma().identity() {
                        while levels.len() < m {
                            levels.push(BTreeMap::new());
                        }
                        levels[m - 1].insert(site, v);
                    }
                }
            }
        }
        x.fprime = levels;
        x
    }

    /// Element with number `code`, cursor digit least significant.
    pub fn decode(&self, mut code: u64) -> DeltaElement {
        let digits: Vec<u64> = self
            .radices
            .iter()
            .map(|&r| {
                let d = code % r;
                code /= r;
                d
            })
            .collect();
        self.assemble(digits.into_iter())
    }

    /// Uniform random element.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> DeltaElement {
        let digits: Vec<u64> = self.radices.iter().map(|&r| rng.gen_range(0..r)).collect();
        self.assemble(digits.into_iter())
    }

    fn checked_size(&self, budget: u64) -> Result<u64> {
        match self.size_u64() {
            Some(s) if s <= budget => Ok(s),
            _ => Err(FolnerError::Budget {
                cardinality: self.cardinality().to_string(),
                budget,
            }),
        }
    }

    /// All elements, refused above `budget`.
    pub fn enumerate(&self, budget: u64) -> Result<impl Iterator<Item = DeltaElement> + '_> {
        let size = self.checked_size(budget)?;
        Ok((0..size).map(move |c| self.decode(c)))
    }

    /// Exhaustive boundary under the standard generators.
    pub fn boundary(&self, budget: u64) -> Result<BoundaryReport> {
        let size = self.checked_size(budget)?;
        let p = &self.atlas.params;
        let gens = generators(p);
        let last = self.idx.n as i64 - 1;
        let (boundary, mismatches, lamp_exits, interior) = (0..size)
            .into_par_iter()
            .map(|c| {
                let x = self.decode(c);
                let mut out = false;
                let (mut lamp, mut inner) = (0u64, 0u64);
                for &s in &gens {
                    let y = apply_generator(p, &x, s).expect("levels are materialized");
                    if !self.atlas.contains(self.idx, &y) {
                        out = true;
                        if s.is_lamp() {
                            lamp += 1;
                            if x.t < last {
                                inner += 1;
                            }
                        }
                    }
                }
                let expected = x.t == 0 || x.t == last;
                (out as u64, (out != expected) as u64, lamp, inner)
            })
            .reduce(
                || (0, 0, 0, 0),
                |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3),
            );
        Ok(BoundaryReport {
            size,
            boundary,
            law_holds: mismatches == 0,
            lamp_exits,
            interior_lamp_exits: interior,
        })
    }

    /// Whether every element within distance `r` of `x` lies in the set, i.e. the
    /// labeled `r`-ball of the Schreier graph at `x` matches the Cayley ball.
    pub fn ball_inside(&self, x: &DeltaElement, r: u32) -> bool {
        let p = &self.atlas.params;
        let gens: Vec<Generator> = generators(p);
        let mut frontier = vec![x.clone()];
        let mut seen = std::collections::HashSet::from([x.clone()]);
        for _ in 0..r {
            let mut next = Vec::new();
            for y in &frontier {
                for &s in &gens {
                    let z = apply_generator(p, y, s).expect("levels are materialized");
                    if !self.atlas.contains(self.idx, &z) {
                        return false;
                    }
                    if seen.insert(z.clone()) {
                        next.push(z);
                    }
                }
            }
            frontier = next;
        }
        true
    }

    /// Exact fraction of elements whose `r`-ball leaves the set, as `(bad, total)`.
    pub fn sofic_defect(&self, r: u32, budget: u64) -> Result<(u64, u64)> {
        let size = self.checked_size(budget)?;
        let bad = (0..size)
            .into_par_iter()
            .filter(|&c| !self.ball_inside(&self.decode(c), r))
            .count() as u64;
        Ok((bad, size))
    }

    /// Sampled defect: `(bad, samples)` over uniform draws.
    pub fn sofic_defect_sampled<R: Rng>(&self, r: u32, samples: u64, rng: &mut R) -> (u64, u64) {
        let bad = (0..samples)
            .filter(|_| !self.ball_inside(&self.sample(rng), r))
            .count() as u64;
        (bad, samples)
    }
}
