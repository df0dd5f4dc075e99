use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use group_kernel::Elem;

use crate::params::DeltaParams;
use crate::{DeltaError, Result};

/// Canonical data `(t, f_0, (f'_m)_m)`; identity values are never stored.
///
/// `f0` values are `A × B` ids (`a * |B| + b`); `fprime[m - 1]` holds `Γ_m` ids
/// lying in `Γ'_m`. Trailing empty levels are trimmed, so equality is equality
/// of elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeltaElement {
    pub t: i64,
    pub f0: BTreeMap<i64, Elem>,
    pub fprime: Vec<BTreeMap<i64, Elem>>,
}

/// Generators: cursor moves and synchronized `A`- or `B`-lamps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Cursor(i8),
    A(usize),
    B(usize),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Cursor(d) if *d > 0 => write!(f, "t+"),
            Generator::Cursor(_) => write!(f, "t-"),
            Generator::A(a) => write!(f, "a{a}"),
            Generator::B(b) => write!(f, "b{b}"),
        }
    }
}

impl Generator {
    pub fn is_lamp(&self) -> bool {
        !matches!(self, Generator::Cursor(_))
    }
}

/// The symmetric generating set: cursor `±1` then every nontrivial `a` and `b`.
pub fn generators(p: &DeltaParams) -> Vec<Generator> {
    let mut out = vec![Generator::Cursor(1), Generator::Cursor(-1)];
    out.extend((1..p.a_order()).map(Generator::A));
    out.extend((1..p.b_order()).map(Generator::B));
    out
}

impl DeltaElement {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn cursor(t: i64) -> Self {
        Self {
            t,
            ..Self::default()
        }
    }

    pub fn generator(p: &DeltaParams, s: Generator) -> Self {
        let nb = p.b_order() as Elem;
        let mut e = Self::identity();
        match s {
            Generator::Cursor(d) => e.t = d as i64,
            Generator::A(a) => {
                e.f0.insert(0, a as Elem * nb);
            }
            Generator::B(b) => {
                e.f0.insert(0, b as Elem);
            }
        }
        e.normalize();
        e
    }

    pub fn is_identity(&self) -> bool {
        self.t == 0 && self.f0.is_empty() && self.fprime.is_empty()
    }

    /// `f'_m`, empty when the level carries nothing.
    pub fn prime(&self, m: usize) -> Option<&BTreeMap<i64, Elem>> {
        self.fprime.get(m - 1)
    }

    pub fn prime_at(&self, m: usize, x: i64) -> Option<Elem> {
        self.prime(m).and_then(|map| map.get(&x).copied())
    }

    pub(crate) fn normalize(&mut self) {
        self.f0.retain(|_, v| *v != 0);
        while self.fprime.last().is_some_and(|m| m.is_empty()) {
            self.fprime.pop();
        }
    }

    /// Drops identity entries given each level's identity id.
    pub(crate) fn normalize_with(&mut self, p: &DeltaParams) {
        for (i, map) in self.fprime.iter_mut().enumerate() {
            let e = p.level(i + 1).gamma.gamma().identity();
            map.retain(|_, v| *v != e);
        }
        self.normalize();
    }
}

fn f0_value(e: &DeltaElement, x: i64) -> Elem {
    e.f0.get(&x).copied().unwrap_or(0)
}

/// Full value `f_m(x) = f'_m(x) θᴬ(f_0(x)) θᴮ(f_0(x - k_m))` in `Γ_m`.
pub fn full_value(p: &DeltaParams, e: &DeltaElement, m: usize, x: i64) -> Elem {
    if m == 0 {
        return f0_value(e, x);
    }
    let level = p.level(m);
    let g = &level.gamma;
    let nb = p.b_order();
    let a = f0_value(e, x) as usize / nb;
    let b = f0_value(e, x - level.k as i64) as usize % nb;
    let prime = e.prime_at(m, x).unwrap_or(g.gamma().identity());
    let gr = g.gamma();
    gr.mul(gr.mul(prime, g.a_elem(a)), g.b_elem(b))
}

/// Derived part at level `m` of a full value, given the level-0 data it sits over.
fn extract_prime(p: &DeltaParams, m: usize, full: Elem, f0_here: Elem, f0_behind: Elem) -> Elem {
    let g = &p.level(m).gamma;
    let gr = g.gamma();
    let nb = p.b_order();
    let section = gr.mul(
        g.a_elem(f0_here as usize / nb),
        g.b_elem(f0_behind as usize % nb),
    );
    gr.mul(full, gr.inv(section))
}

fn levels_for_span(p: &DeltaParams, lo: i64, hi: i64) -> Result<usize> {
    p.level_index((hi - lo).max(0) as u64)
}

/// Group law: `(f, t)(g, s) = (f · g(· - t), t + s)` on full values.
pub fn multiply(p: &DeltaParams, x: &DeltaElement, y: &DeltaElement) -> Result<DeltaElement> {
    let shift = x.t;
    let ab = p.base().ab();
    let mut out = DeltaElement {
        t: x.t + y.t,
        ..DeltaElement::default()
    };
    let sites: BTreeSet<i64> =
        x.f0.keys()
            .copied()
            .chain(y.f0.keys().map(|s| s + shift))
            .collect();
    for &s in &sites {
        out.f0
            .insert(s, ab.mul(f0_value(x, s), f0_value(y, s - shift)));
    }
    let (xl, xh) = range_interval(p, x);
    let (yl, yh) = range_interval(p, y);
    let (lo, hi) = (xl.min(yl + shift), xh.max(yh + shift));
    let top = levels_for_span(p, lo, hi)?;
    for m in 1..=top {
        let k = p.level(m).k as i64;
        let mut candidates: BTreeSet<i64> = BTreeSet::new();
        for &s in &sites {
            candidates.insert(s);
            candidates.insert(s + k);
        }
        if let Some(map) = x.prime(m) {
            candidates.extend(map.keys().copied());
        }
        if let Some(map) = y.prime(m) {
            candidates.extend(map.keys().map(|s| s + shift));
        }
        let gr = p.level(m).gamma.gamma();
        let mut level = BTreeMap::new();
        for &s in &candidates {
            let full = gr.mul(full_value(p, x, m, s), full_value(p, y, m, s - shift));
            let h = extract_prime(p, m, full, f0_value(&out, s), f0_value(&out, s - k));
            if h != gr.identity() {
                level.insert(s, h);
            }
        }
        out.fprime.push(level);
    }
    out.normalize_with(p);
    Ok(out)
}

pub fn inverse(p: &DeltaParams, x: &DeltaElement) -> Result<DeltaElement> {
    let t = x.t;
    let ab = p.base().ab();
    let mut out = DeltaElement {
        t: -t,
        ..DeltaElement::default()
    };
    for (&s, &v) in &x.f0 {
        out.f0.insert(s - t, ab.inv(v));
    }
    let (lo, hi) = range_interval(p, x);
    let top = levels_for_span(p, lo, hi)?;
    for m in 1..=top {
        let k = p.level(m).k as i64;
        let gr = p.level(m).gamma.gamma();
        let mut candidates: BTreeSet<i64> = BTreeSet::new();
        for &s in x.f0.keys() {
            candidates.insert(s);
            candidates.insert(s + k);
        }
        if let Some(map) = x.prime(m) {
            candidates.extend(map.keys().copied());
        }
        let mut level = BTreeMap::new();
        for &s in &candidates {
            let full = gr.inv(full_value(p, x, m, s));
            let y = s - t;
            let h = extract_prime(p, m, full, f0_value(&out, y), f0_value(&out, y - k));
            if h != gr.identity() {
                level.insert(y, h);
            }
        }
        out.fprime.push(level);
    }
    out.normalize_with(p);
    Ok(out)
}

/// Right multiplication by a generator, computed locally.
///
/// Only the cursor site is touched: `b`-lamps never change derived data, while an
/// `a`-lamp at cursor `t` twists `f'_m(t)` whenever `f_0(t - k_m)` has a nontrivial
/// `B`-part and `a` does not commute with it in `Γ_m`.
pub fn apply_generator(p: &DeltaParams, x: &DeltaElement, s: Generator) -> Result<DeltaElement> {
    let mut out = x.clone();
    let nb = p.b_order();
    let t = x.t;
    match s {
        Generator::Cursor(d) => out.t += d as i64,
        Generator::B(b) => {
            let v = f0_value(x, t);
            let new = (v as usize / nb) * nb + (v as usize % nb + b) % nb;
            out.f0.insert(t, new as Elem);
        }
        Generator::A(a) => {
            let v = f0_value(x, t) as usize;
            let (a0, b0) = (v / nb, v % nb);
            let na = p.a_order();
            let a_group = p.base().a_group();
            let a_new = a_group.mul(a0 as Elem, a as Elem) as usize;
            debug_assert!(a_new < na);
            out.f0.insert(t, (a_new * nb + b0) as Elem);
            let reach = x.f0.keys().next().map_or(-1, |&lo| t - lo);
            let top = if reach > 0 {
                p.level_index(reach as u64)?
            } else {
                0
            };
            for m in 1..=top {
                let k = p.level(m).k as i64;
                let behind = f0_value(x, t - k) as usize % nb;
                if behind == 0 {
                    continue;
                }
                let g = &p.level(m).gamma;
                let gr = g.gamma();
                let (alpha0, beta, alpha) = (g.a_elem(a0), g.b_elem(behind), g.a_elem(a));
                let twist = gr.mul(
                    gr.mul(gr.mul(gr.mul(alpha0, beta), alpha), gr.inv(beta)),
                    gr.inv(g.a_elem(a_new)),
                );
                if twist == gr.identity() {
                    continue;
                }
                while out.fprime.len() < m {
                    out.fprime.push(BTreeMap::new());
                }
                let old = x.prime_at(m, t).unwrap_or(gr.identity());
                out.fprime[m - 1].insert(t, gr.mul(old, twist));
            }
        }
    }
    out.normalize_with(p);
    Ok(out)
}

/// Applies a word of generators from the identity.
pub fn evaluate_word(p: &DeltaParams, word: &[Generator]) -> Result<DeltaElement> {
    let mut x = DeltaElement::identity();
    for &s in word {
        x = apply_generator(p, &x, s)?;
    }
    Ok(x)
}

/// Smallest interval containing `0`, `t`, the support of `f_0`, and both `x` and
/// `x - k_m` for every `x` in the support of `f'_m`.
pub fn range_interval(p: &DeltaParams, x: &DeltaElement) -> (i64, i64) {
    let mut lo = x.t.min(0);
    let mut hi = x.t.max(0);
    for &s in x.f0.keys() {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    for (i, map) in x.fprime.iter().enumerate() {
        let k = p.level(i + 1).k as i64;
        for &s in map.keys() {
            lo = lo.min(s - k);
            hi = hi.max(s);
        }
    }
    (lo, hi)
}

/// `t=<cursor>; L0: site:id ...; L1: ...`.
pub fn to_text(x: &DeltaElement) -> String {
    let mut out = format!("t={}", x.t);
    let fmt_map = |map: &BTreeMap<i64, Elem>| {
        map.iter()
            .map(|(s, v)| format!("{s}:{v}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    out.push_str(&format!("; L0: {}", fmt_map(&x.f0)));
    for (i, map) in x.fprime.iter().enumerate() {
        out.push_str(&format!("; L{}: {}", i + 1, fmt_map(map)));
    }
    out
}

pub fn from_text(s: &str) -> Result<DeltaElement> {
    let bad = || DeltaError::Parse(s.to_string());
    let mut parts = s.split(';').map(str::trim);
    let t = parts
        .next()
        .and_then(|h| h.strip_prefix("t="))
        .and_then(|v| v.trim().parse::<i64>().ok())
        .ok_or_else(bad)?;
    let mut x = DeltaElement::cursor(t);
    for (expected, part) in parts.enumerate() {
        let (label, body) = part.split_once(':').ok_or_else(bad)?;
        if label.trim() != format!("L{expected}") {
            return Err(bad());
        }
        let mut map = BTreeMap::new();
        for pair in body.split_whitespace() {
            let (site, id) = pair.split_once(':').ok_or_else(bad)?;
            map.insert(
                site.parse().map_err(|_| bad())?,
                id.parse().map_err(|_| bad())?,
            );
        }
        if expected == 0 {
            x.f0 = map;
        } else {
            x.fprime.push(map);
        }
    }
    x.normalize();
    Ok(x)
}
