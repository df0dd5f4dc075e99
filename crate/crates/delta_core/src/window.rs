//! Exact word lengths by breadth-first search over the elements whose data and
//! cursor stay inside a finite window of sites.

use std::collections::{BTreeMap, VecDeque};

use group_kernel::Elem;

use crate::element::{generators, DeltaElement, Generator};
use crate::params::DeltaParams;
use crate::{DeltaError, Result};

/// Refuse windows with more states than this.
pub const MAX_WINDOW_STATES: u64 = 200_000_000;

pub const UNREACHED: u8 = u8::MAX;

struct WLevel {
    k: i64,
    first: i64,
    sites: usize,
    radix: u64,
}

/// Elements with cursor and all data inside `[lo, hi]`, packed into `0..states()`.
pub struct WindowSpace {
    p: DeltaParams,
    lo: i64,
    hi: i64,
    q: u64,
    levels: Vec<WLevel>,
    states: u64,
    gens: Vec<Generator>,
    radix_list: Vec<u64>,
}

impl WindowSpace {
    pub fn new(p: &DeltaParams, lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(DeltaError::Window("empty window".into()));
        }
        let width = (hi - lo + 1) as u64;
        let q = p.q() as u64;
        let top = p.level_index(width - 1)?;
        let mut states = width as f64 * (q as f64).powi(width as i32);
        let mut levels = Vec::new();
        for m in 1..=top {
            let k = p.level(m).k as i64;
            let sites = (hi - (lo + k) + 1).max(0) as usize;
            let radix = p.prime_order(m) as u64;
            states *= (radix as f64).powi(sites as i32);
            levels.push(WLevel {
                k,
                first: lo + k,
                sites,
                radix,
            });
        }
        if states > MAX_WINDOW_STATES as f64 {
            return Err(DeltaError::Window(format!(
                "{states:.3e} states exceed the budget"
            )));
        }
        let mut space = Self {
            p: p.clone(),
            lo,
            hi,
            q,
            levels,
            states: states.round() as u64,
            gens: generators(p),
            radix_list: Vec::new(),
        };
        space.radix_list = space.radices().collect();
        Ok(space)
    }

    pub fn states(&self) -> u64 {
        self.states
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    fn width(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    fn radices(&self) -> impl Iterator<Item = u64> + '_ {
        std::iter::once(self.width() as u64)
            .chain(std::iter::repeat_n(self.q, self.width()))
            .chain(
                self.levels
                    .iter()
                    .flat_map(|l| std::iter::repeat_n(l.radix, l.sites)),
            )
    }

    fn pack(&self, digits: &[u64]) -> u64 {
        let mut acc = 0u64;
        for (d, r) in digits.iter().zip(&self.radix_list).rev() {
            acc = acc * r + d;
        }
        acc
    }

    fn unpack(&self, mut s: u64) -> Vec<u64> {
        self.radices()
            .map(|r| {
                let d = s % r;
                s /= r;
                d
            })
            .collect()
    }

    pub fn encode(&self, x: &DeltaElement) -> Option<u64> {
        let inside = |s: i64| (self.lo..=self.hi).contains(&s);
        if !inside(x.t) || x.f0.keys().any(|&s| !inside(s)) || x.fprime.len() > self.levels.len() {
            return None;
        }
        let mut digits = vec![(x.t - self.lo) as u64];
        for s in self.lo..=self.hi {
            digits.push(x.f0.get(&s).copied().unwrap_or(0) as u64);
        }
        for (i, l) in self.levels.iter().enumerate() {
            let g = &self.p.level(i + 1).gamma;
            let map = x.fprime.get(i);
            if map.is_some_and(|m| m.keys().any(|&s| s < l.first || s > self.hi)) {
                return None;
            }
            for s in l.first..=self.hi {
                let v = map
                    .and_then(|m| m.get(&s))
                    .copied()
                    .unwrap_or(g.gamma().identity());
                digits.push(g.prime_index(v)? as u64);
            }
        }
        Some(self.pack(&digits))
    }

    pub fn decode(&self, s: u64) -> DeltaElement {
        let digits = self.unpack(s);
        let mut x = DeltaElement::cursor(self.lo + digits[0] as i64);
        let w = self.width();
        for (i, &d) in digits[1..=w].iter().enumerate() {
            if d != 0 {
                x.f0.insert(self.lo + i as i64, d as Elem);
            }
        }
        let mut pos = 1 + w;
        for (i, l) in self.levels.iter().enumerate() {
            let g = &self.p.level(i + 1).gamma;
            let mut map = BTreeMap::new();
            for j in 0..l.sites {
                let v = g.gamma_prime()[digits[pos + j] as usize];
                if v != g.gamma().identity() {
                    map.insert(l.first + j as i64, v);
                }
            }
            pos += l.sites;
            x.fprime.push(map);
        }
        while x.fprime.last().is_some_and(|m| m.is_empty()) {
            x.fprime.pop();
        }
        x
    }

    /// Neighbor of a packed state under a generator, if it stays in the window.
    fn step(&self, digits: &mut [u64], s: Generator, bounds: (i64, i64)) -> bool {
        let w = self.width();
        let t = self.lo + digits[0] as i64;
        let nb = self.p.b_order() as u64;
        let site = |x: i64| 1 + (x - self.lo) as usize;
        match s {
            Generator::Cursor(d) => {
                let nt = t + d as i64;
                if nt < bounds.0 || nt > bounds.1 {
                    return false;
                }
                digits[0] = (nt - self.lo) as u64;
            }
            Generator::B(b) => {
                let v = digits[site(t)];
                digits[site(t)] = (v / nb) * nb + (v % nb + b as u64) % nb;
            }
            Generator::A(a) => {
                let v = digits[site(t)];
                let (a0, b0) = ((v / nb) as usize, v % nb);
                let a_new = self.p.base().a_group().mul(a0 as Elem, a as Elem) as usize;
                digits[site(t)] = a_new as u64 * nb + b0;
                let mut pos = 1 + w;
                for (i, l) in self.levels.iter().enumerate() {
                    let behind = t - l.k;
                    if t >= l.first && behind >= self.lo {
                        let bb = (digits[site(behind)] % nb) as usize;
                        if bb != 0 {
                            let g = &self.p.level(i + 1).gamma;
                            let gr = g.gamma();
                            let (al0, be, al) = (g.a_elem(a0), g.b_elem(bb), g.a_elem(a));
                            let twist = gr.mul(
                                gr.mul(gr.mul(gr.mul(al0, be), al), gr.inv(be)),
                                gr.inv(g.a_elem(a_new)),
                            );
                            let idx = pos + (t - l.first) as usize;
                            let old = g.gamma_prime()[digits[idx] as usize];
                            digits[idx] = g
                                .prime_index(gr.mul(old, twist))
                                .expect("twist stays derived")
                                as u64;
                        }
                    }
                    pos += l.sites;
                }
            }
        }
        true
    }

    /// BFS distances from the identity (saturating at 254) with the cursor kept in `bounds`.
    pub fn bfs(&self, bounds: (i64, i64)) -> Result<Vec<u8>> {
        if bounds.0 > 0 || bounds.1 < 0 || bounds.0 < self.lo || bounds.1 > self.hi {
            return Err(DeltaError::Window(
                "search bounds must contain 0 and fit the window".into(),
            ));
        }
        let mut dist = vec![UNREACHED; self.states as usize];
        let start = self
            .encode(&DeltaElement::identity())
            .expect("identity fits");
        dist[start as usize] = 0;
        let mut queue = VecDeque::from([start]);
        let radices = &self.radix_list;
        let mut digits = vec![0u64; radices.len()];
        while let Some(s) = queue.pop_front() {
            let d = dist[s as usize];
            for &g in &self.gens {
                let mut rest = s;
                for (slot, r) in digits.iter_mut().zip(radices) {
                    *slot = rest % r;
                    rest /= r;
                }
                if !self.step(&mut digits, g, bounds) {
                    continue;
                }
                let n = self.pack(&digits);
                if dist[n as usize] == UNREACHED {
                    dist[n as usize] = d.saturating_add(1).min(UNREACHED - 1);
                    queue.push_back(n);
                }
            }
        }
        Ok(dist)
    }

    /// Exact word length of `x` among words staying in the window, if reachable.
    pub fn word_length(&self, x: &DeltaElement) -> Result<Option<u32>> {
        let dist = self.bfs((self.lo, self.hi))?;
        Ok(self
            .encode(x)
            .map(|s| dist[s as usize])
            .filter(|&d| d != UNREACHED)
            .map(u32::from))
    }
}

/// Word length by BFS over a window padded by `margin` around the range.
///
/// Returns `None` when the element is not reached within `limit` steps.
pub fn word_length_exact(
    p: &DeltaParams,
    x: &DeltaElement,
    margin: i64,
    limit: u32,
) -> Result<Option<u32>> {
    let (lo, hi) = crate::element::range_interval(p, x);
    let space = WindowSpace::new(p, lo - margin, hi + margin)?;
    Ok(space.word_length(x)?.filter(|&d| d <= limit))
}
