use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{GroupError, Result};

/// Element ids are dense in `0..order`.
pub type Elem = u32;

/// Orders up to this bound get an exhaustive associativity check.
pub const EXHAUSTIVE_ASSOC_LIMIT: usize = 512;

/// A finite group stored as its full multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<Elem>,
    identity: Elem,
    inverse: Vec<Elem>,
}

impl FiniteGroup {
    /// Builds a group from a row-major table, checking every group axiom.
    pub fn from_table(order: usize, table: Vec<Elem>) -> Result<Self> {
        if order == 0 {
            return Err(GroupError::Table("order must be positive".into()));
        }
        if table.len() != order * order {
            return Err(GroupError::Table(format!(
                "expected {} entries, got {}",
                order * order,
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&v| v as usize >= order) {
            return Err(GroupError::Table(format!("entry {bad} out of range")));
        }
        let at = |a: usize, b: usize| table[a * order + b];
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| at(e, g) as usize == g && at(g, e) as usize == g))
            .ok_or_else(|| GroupError::Table("no two-sided identity".into()))?
            as Elem;
        let mut inverse = vec![0; order];
        for (g, inv) in inverse.iter_mut().enumerate() {
            *inv = (0..order)
                .find(|&h| at(g, h) == identity && at(h, g) == identity)
                .ok_or_else(|| GroupError::Table(format!("element {g} has no inverse")))?
                as Elem;
        }
        let group = Self {
            order,
            table,
            identity,
            inverse,
        };
        group.check_associativity()?;
        Ok(group)
    }

    /// Trusted constructor for tables produced by closure algorithms.
    pub(crate) fn from_parts_unchecked(order: usize, table: Vec<Elem>, identity: Elem) -> Self {
        let mut inverse = vec![0; order];
        for g in 0..order {
            for h in 0..order {
                if table[g * order + h] == identity {
                    inverse[g] = h as Elem;
                    break;
                }
            }
        }
        Self {
            order,
            table,
            identity,
            inverse,
        }
    }

    fn check_associativity(&self) -> Result<()> {
        let n = self.order;
        let assoc =
            |a: Elem, b: Elem, c: Elem| self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c));
        if n <= EXHAUSTIVE_ASSOC_LIMIT {
            for a in 0..n as Elem {
                for b in 0..n as Elem {
                    let ab = self.mul(a, b);
                    for c in 0..n as Elem {
                        if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                            return Err(GroupError::Table(format!("({a}{b}){c} != {a}({b}{c})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..200_000 {
                let (a, b, c) = (
                    rng.gen_range(0..n) as Elem,
                    rng.gen_range(0..n) as Elem,
                    rng.gen_range(0..n) as Elem,
                );
                if !assoc(a, b, c) {
                    return Err(GroupError::Table(format!("({a}{b}){c} != {a}({b}{c})")));
                }
            }
        }
        Ok(())
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n * n).map(|i| ((i / n + i % n) % n) as Elem).collect();
        Self::from_parts_unchecked(n, table, 0)
    }

    /// `G x H` with id `g * |H| + h`.
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (m, n) = (g.order, h.order);
        let order = m * n;
        let mut table = Vec::with_capacity(order * order);
        for x in 0..order {
            for y in 0..order {
                let a = g.mul((x / n) as Elem, (y / n) as Elem);
                let b = h.mul((x % n) as Elem, (y % n) as Elem);
                table.push(a * n as Elem + b);
            }
        }
        let identity = g.identity * n as Elem + h.identity;
        Self::from_parts_unchecked(order, table, identity)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a as usize * self.order + b as usize]
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inverse[a as usize]
    }

    pub fn commutator(&self, a: Elem, b: Elem) -> Elem {
        self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))
    }

    pub fn conjugate(&self, g: Elem, h: Elem) -> Elem {
        self.mul(self.mul(g, h), self.inv(g))
    }

    pub fn element_order(&self, g: Elem) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn pow(&self, g: Elem, k: usize) -> Elem {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, g))
    }

    /// Subgroup generated by `gens`, sorted ids.
    pub fn subgroup_closure(&self, gens: &[Elem]) -> Vec<Elem> {
        let mut seen = vec![false; self.order];
        seen[self.identity as usize] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    queue.push_back(y);
                }
            }
        }
        collect_marked(&seen)
    }

    /// Smallest normal subgroup containing `s`.
    pub fn normal_closure(&self, s: &[Elem]) -> Vec<Elem> {
        let mut gens: Vec<Elem> = Vec::new();
        let mut in_gens = vec![false; self.order];
        for &x in s {
            for g in 0..self.order as Elem {
                let c = self.conjugate(g, x);
                if !in_gens[c as usize] {
                    in_gens[c as usize] = true;
                    gens.push(c);
                }
            }
        }
        self.subgroup_closure(&gens)
    }

    pub fn is_subgroup(&self, set: &[Elem]) -> bool {
        let member = self.membership(set);
        member[self.identity as usize]
            && set.iter().all(|&a| {
                member[self.inv(a) as usize] && set.iter().all(|&b| member[self.mul(a, b) as usize])
            })
    }

    pub fn is_normal(&self, set: &[Elem]) -> bool {
        let member = self.membership(set);
        self.is_subgroup(set)
            && set
                .iter()
                .all(|&h| (0..self.order as Elem).all(|g| member[self.conjugate(g, h) as usize]))
    }

    pub fn membership(&self, set: &[Elem]) -> Vec<bool> {
        let mut member = vec![false; self.order];
        for &x in set {
            member[x as usize] = true;
        }
        member
    }

    /// BFS distance from the identity using `gens` and their inverses.
    pub fn word_lengths(&self, gens: &[Elem]) -> Result<Vec<u32>> {
        let mut all: Vec<Elem> = gens.to_vec();
        all.extend(gens.iter().map(|&g| self.inv(g)));
        all.sort_unstable();
        all.dedup();
        let mut dist = vec![u32::MAX; self.order];
        dist[self.identity as usize] = 0;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &s in &all {
                let y = self.mul(x, s);
                if dist[y as usize] == u32::MAX {
                    dist[y as usize] = dist[x as usize] + 1;
                    queue.push_back(y);
                }
            }
        }
        if let Some(g) = dist.iter().position(|&d| d == u32::MAX) {
            return Err(GroupError::NotGenerating(g as Elem));
        }
        Ok(dist)
    }

    pub fn diameter(&self, gens: &[Elem]) -> Result<u32> {
        Ok(self.word_lengths(gens)?.into_iter().max().unwrap_or(0))
    }

    /// Induced group on a subgroup; returns the group and the ambient id of each new id.
    pub fn restrict(&self, subgroup: &[Elem]) -> Result<(FiniteGroup, Vec<Elem>)> {
        if !self.is_subgroup(subgroup) {
            return Err(GroupError::Marking("set is not a subgroup".into()));
        }
        let mut index = vec![Elem::MAX; self.order];
        for (i, &x) in subgroup.iter().enumerate() {
            index[x as usize] = i as Elem;
        }
        let n = subgroup.len();
        let mut table = Vec::with_capacity(n * n);
        for &a in subgroup {
            for &b in subgroup {
                table.push(index[self.mul(a, b) as usize]);
            }
        }
        let identity = index[self.identity as usize];
        Ok((
            Self::from_parts_unchecked(n, table, identity),
            subgroup.to_vec(),
        ))
    }
}

fn collect_marked(seen: &[bool]) -> Vec<Elem> {
    seen.iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(i, _)| i as Elem)
        .collect()
}

/// Closure of a set of permutations (images of `0..degree`) under composition.
///
/// Composition is `(p * q)(i) = q(p(i))`, i.e. apply `p` first. Returns the group
/// table together with the permutation for each id; id 0 is the identity.
pub fn permutation_group(gens: &[Vec<usize>]) -> Result<(FiniteGroup, Vec<Vec<usize>>)> {
    let degree = gens.first().map_or(0, |g| g.len());
    for g in gens {
        let mut sorted = g.clone();
        sorted.sort_unstable();
        if g.len() != degree || sorted != (0..degree).collect::<Vec<_>>() {
            return Err(GroupError::Table("generator is not a permutation".into()));
        }
    }
    let compose = |p: &[usize], q: &[usize]| -> Vec<usize> { p.iter().map(|&i| q[i]).collect() };
    let id: Vec<usize> = (0..degree).collect();
    let mut elems = vec![id.clone()];
    let mut index = std::collections::HashMap::from([(id, 0usize)]);
    let mut frontier = 0;
    while frontier < elems.len() {
        let x = elems[frontier].clone();
        frontier += 1;
        for g in gens {
            let y = compose(&x, g);
            if !index.contains_key(&y) {
                index.insert(y.clone(), elems.len());
                elems.push(y);
            }
        }
    }
    let n = elems.len();
    let mut table = Vec::with_capacity(n * n);
    for a in &elems {
        for b in &elems {
            table.push(index[&compose(a, b)] as Elem);
        }
    }
    Ok((FiniteGroup::from_parts_unchecked(n, table, 0), elems))
}
