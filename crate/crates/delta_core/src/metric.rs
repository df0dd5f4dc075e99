use crate::element::{full_value, range_interval, DeltaElement};
use crate::params::DeltaParams;
use crate::{DeltaError, Result};

/// Windows `I_j = [⌊j k/2⌋, ⌊(j+1) k/2⌋ - 1]` meeting `[lo, hi]`.
pub fn windows_meeting(k: u64, lo: i64, hi: i64) -> Vec<(i64, i64)> {
    let k = k as i64;
    let start = |j: i64| (j * k).div_euclid(2);
    let mut j = (2 * lo).div_euclid(k) - 1;
    let mut out = Vec::new();
    while start(j) <= hi {
        let (a, b) = (start(j), start(j + 1) - 1);
        if a <= b && b >= lo {
            out.push((a, b));
        }
        j += 1;
    }
    out
}

/// `k_m` times the sum over windows meeting the range of the window maximum of
/// `(|f_m(x)| - 1)_+`.
pub fn essential_contribution(p: &DeltaParams, x: &DeltaElement, m: usize) -> Result<u64> {
    if m == 0 {
        return Ok(0);
    }
    if m > p.levels().len() {
        return Err(DeltaError::Params(format!("level {m} is not materialized")));
    }
    let level = p.level(m);
    let (lo, hi) = range_interval(p, x);
    let mut total = 0u64;
    for (a, b) in windows_meeting(level.k, lo, hi) {
        let worst = (a..=b)
            .map(|s| {
                level
                    .gamma
                    .word_length(full_value(p, x, m, s))
                    .saturating_sub(1)
            })
            .max()
            .unwrap_or(0);
        total += worst as u64;
    }
    Ok(level.k * total)
}

/// Number of sites of the range interval.
pub fn range_size(p: &DeltaParams, x: &DeltaElement) -> u64 {
    let (lo, hi) = range_interval(p, x);
    (hi - lo + 1) as u64
}

/// `500 Σ_{m <= 𝔩(range)} 9 (range + E_m)`, with range counted in sites.
pub fn word_length_upper(p: &DeltaParams, x: &DeltaElement) -> Result<u64> {
    if x.is_identity() {
        return Ok(0);
    }
    let size = range_size(p, x);
    let top = p.level_index(size)?;
    let mut sum = 0u64;
    for m in 0..=top {
        sum += 9 * (size + essential_contribution(p, x, m)?);
    }
    Ok(500 * sum)
}

/// Exact word length in `(A × B) ≀ ℤ`: lamp costs plus the shortest tour from `0`
/// to `t` visiting every lit site.
pub fn lamplighter_length(p: &DeltaParams, x: &DeltaElement) -> Result<u64> {
    if !p.is_lamplighter() {
        return Err(DeltaError::Mode(
            "exact length formula needs a lamplighter".into(),
        ));
    }
    let base = p.base();
    let lamps: u64 = x.f0.values().map(|&v| base.word_length(v) as u64).sum();
    Ok(lamps + tour_length(x.t, x.f0.keys().copied()))
}

/// Shortest walk from `0` to `t` visiting all `sites`.
pub fn tour_length(t: i64, sites: impl Iterator<Item = i64>) -> u64 {
    let (mut lo, mut hi) = (t.min(0), t.max(0));
    for s in sites {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    let left_first = -lo + (hi - lo) + (hi - t);
    let right_first = hi + (hi - lo) + (t - lo);
    left_first.min(right_first) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMode {
    /// Same derived data, level-0 lamps differing only inside `[lo, hi]`, both cursors inside.
    Interval { lo: i64, hi: i64 },
    /// Derived data equal above level `i`, both ranges inside `[0, d]`.
    Level { i: usize, d: i64 },
}

/// Upper bound on `d(x, y)`.
///
/// Interval mode: a tour of `[lo, hi]` costs at most `3 diam` moves and each site
/// needs at most `diam(A × B)` lamp letters. Level mode adds, per level `m <= i`,
/// `9 (D + l_m (2D + 2 k_m))` and a cursor term `D`.
pub fn distance_upper(
    p: &DeltaParams,
    x: &DeltaElement,
    y: &DeltaElement,
    mode: DistanceMode,
) -> Result<u64> {
    let lamp = p.base().diameter() as u64;
    match mode {
        DistanceMode::Interval { lo, hi } => {
            if lo > hi || ![x.t, y.t].iter().all(|t| (lo..=hi).contains(t)) {
                return Err(DeltaError::Mode("cursors must lie in the interval".into()));
            }
            if x.fprime != y.fprime {
                return Err(DeltaError::Mode("derived data differ".into()));
            }
            let differ =
                x.f0.keys()
                    .chain(y.f0.keys())
                    .any(|s| !(lo..=hi).contains(s) && x.f0.get(s) != y.f0.get(s));
            if differ {
                return Err(DeltaError::Mode(
                    "level-0 lamps differ outside the interval".into(),
                ));
            }
            let diam = (hi - lo) as u64;
            Ok(3 * diam + lamp * (diam + 1))
        }
        DistanceMode::Level { i, d } => {
            if i > p.levels().len() || d < 0 {
                return Err(DeltaError::Mode(format!("level {i} or bound {d} invalid")));
            }
            for e in [x, y] {
                let (lo, hi) = range_interval(p, e);
                if lo < 0 || hi > d {
                    return Err(DeltaError::Mode(format!(
                        "range [{lo},{hi}] not inside [0,{d}]"
                    )));
                }
            }
            let top = x.fprime.len().max(y.fprime.len());
            for j in (i + 1)..=top {
                if x.prime(j).filter(|m| !m.is_empty()) != y.prime(j).filter(|m| !m.is_empty()) {
                    return Err(DeltaError::Mode(format!(
                        "derived data differ at level {j} > {i}"
                    )));
                }
            }
            Ok(level_bound(p, i, d as u64, lamp))
        }
    }
}

fn level_bound(p: &DeltaParams, i: usize, d: u64, lamp: u64) -> u64 {
    let mut total = 3 * d + lamp * (d + 1) + d;
    for m in 1..=i {
        let level = p.level(m);
        let l = level.gamma.diameter() as u64;
        total += 9 * (d + l * (2 * d + 2 * level.k));
    }
    total
}

/// The explicit level-mode bound for given `i` and `D`, without element checks.
pub fn level_mode_bound(p: &DeltaParams, i: usize, d: u64) -> u64 {
    level_bound(p, i, d, p.base().diameter() as u64)
}
