use delta_core::{
    distance_upper, generators, inverse, lamplighter_length, level_mode_bound, multiply,
    DistanceMode, Generator,
};
use mixed_radix::{addition_locality_holds, MixedRadixBase};
use num_bigint::BigUint;
use num_traits::One;
use profile_forge::ln_big;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use z_coupler::{carry_position, DenseElement};

use crate::coupling::DDCoupling;
use crate::{DDError, Result};

/// How the domain `𝒢_n^{(1)}` is covered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleMode {
    Exhaustive { budget: u64 },
    Sampled { samples: u64, seed: u64 },
}

/// One line of the enumeration audit for `X^s_m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub m: usize,
    /// Elements observed with this `m`.
    pub observed: u64,
    /// `|X^s_m|`: exact when exhaustive, scaled to `|𝒢_n|` when sampled.
    pub count: f64,
    pub ln_count: f64,
    /// The enumeration majorant without its constant; `ln` form stays finite.
    pub shape_majorant: f64,
    pub ln_majorant: f64,
    /// `|X^s_m| / majorant`; 0 when both vanish, infinite when only the majorant does.
    pub fitted_constant: f64,
    /// `ln` of the non-asymptotic count behind the majorant: twice the sum over
    /// cells `(P, t)` of `(max ϑ + 1) / (b_{lo} ⋯ b_{m-1})`.
    pub ln_explicit: f64,
    /// `|X^s_m|` over the explicit count; at most 1 when the count argument holds.
    pub explicit_ratio: f64,
    /// Radius charged to `X^s_m` in the integrability sum.
    pub radius: f64,
    /// `Σ_{m' <= m} φ(radius) |X^s_{m'}| / |𝒢_n|`.
    pub partial_sum: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceAudit {
    pub n: usize,
    pub generator: String,
    #[serde(skip)]
    pub gen: Generator,
    pub mode: SampleMode,
    /// Elements of `𝒢_n^{(1)}` examined.
    pub checked: u64,
    /// Draws outside `𝒢_n^{(1)}` (sampled mode only).
    pub rejected: u64,
    pub rows: Vec<AuditRow>,
    /// Certified distance within the shape bound of its `m`.
    pub within_shape: u64,
    pub violations: u64,
    /// Violations where `(E, P)` changed under `s`.
    pub violations_with_ep_change: u64,
    pub ep_changes: u64,
    /// `|ϑ̂(x) - ϑ̂(x s)|` at or above `b_0 ⋯ b_i` for the start index `i`.
    pub gap_failures: u64,
    /// Digits above `m` differing between `x` and `y`.
    pub locality_failures: u64,
    /// Pairs certified in level mode (derived data differ).
    pub level_mode: u64,
    pub max_certified: u64,
    /// Exact lamplighter distances compared with the certified bound.
    pub exact_checked: u64,
    pub exact_above_certified: u64,
    pub max_fitted_constant: f64,
    pub max_explicit_ratio: f64,
    pub q_at_least_3: bool,
}

impl DistanceAudit {
    pub fn all_within_shape(&self) -> bool {
        self.violations == 0
    }
}

struct Outcome {
    m: usize,
    within: bool,
    ep_changed: bool,
    gap_ok: bool,
    locality_ok: bool,
    level_mode: bool,
    certified: u64,
    exact: Option<u64>,
}

fn generator_start(c: &DDCoupling, s: Generator, t: u64) -> Result<usize> {
    if s.is_lamp() {
        return Ok(2);
    }
    let i0 = carry_position(t, c.index().n, c.params().kappa())?;
    Ok(if i0 == 0 { 2 } else { i0 + 1 })
}

/// Shape bound of the distance for `m`: the interval bound over `2κ^m` sites
/// for `m <= p`, the level-mode bound with `min(m - p, M)` levels above.
pub fn shape_bound(c: &DDCoupling, m: usize) -> u64 {
    let idx = c.index();
    let target = c.params().target().params();
    if m <= idx.p {
        let sites = 2 * c.params().kappa().pow(m as u32);
        let lamp = target.base().diameter() as u64;
        3 * (sites - 1) + lamp * sites
    } else {
        level_mode_bound(target, (m - idx.p).min(idx.big_m), idx.big_d - 1)
    }
}

fn compact(base: &[BigUint]) -> (MixedRadixBase, Vec<usize>) {
    let mut kept = Vec::new();
    let mut below = Vec::with_capacity(base.len());
    for (i, r) in base.iter().enumerate() {
        if r > &BigUint::one() {
            kept.push(r.clone());
        }
        below.push(kept.len().saturating_sub(1));
        let _ = i;
    }
    (
        MixedRadixBase::bounded(kept).expect("radices above 1"),
        below,
    )
}

fn audit_element(c: &DDCoupling, x: &DenseElement, s: Generator) -> Result<Option<Outcome>> {
    let enc = c.encoder();
    if !enc.is_interior(x.t) {
        return Ok(None);
    }
    let mut y = x.clone();
    if !enc.apply_dense(&mut y, s) {
        return Ok(None);
    }
    // A backward cursor step from x is a forward step from y; the carry
    // position belongs to the smaller cursor.
    let (x, y, s) = match s {
        Generator::Cursor(k) if k < 0 => (y, x.clone(), Generator::Cursor(-k)),
        _ => (x.clone(), y, s),
    };
    let x = &x;
    let dx = c.source_digits(x);
    let dy = c.source_digits(&y);
    let spread = c.spreading();
    let (hx, hy) = (
        spread.apply(&dx.theta_tilde)?,
        spread.apply(&dy.theta_tilde)?,
    );
    let (lo, hi) = if hx <= hy { (&hx, &hy) } else { (&hy, &hx) };
    let numbering = c.numbering();
    let base = numbering.base(dx.big_p, dx.t);
    let digits = numbering.digits(lo, dx.big_p, dx.t);
    let start = generator_start(c, s, x.t)?;
    let top = base.len();
    let m = (start + 1..top)
        .find(|&j| &digits[j] + 1u32 < base[j])
        .unwrap_or(top);
    let prefix: BigUint = base[..=start.min(top - 1)].iter().product();
    let gap_ok = hi - lo < prefix;
    let (compact_base, below) = compact(&base);
    let locality_ok = addition_locality_holds(lo, hi, below[start.min(top - 1)], &compact_base)
        .map_err(|e| DDError::Internal(e.to_string()))?;
    let target = c.params().target().params();
    let gx = numbering.to_delta(&c.inject_dense(x)?);
    let gy = numbering.to_delta(&c.inject_dense(&y)?);
    let (certified, level_mode) = if gx.fprime == gy.fprime {
        let sites = gx
            .f0
            .keys()
            .chain(gy.f0.keys())
            .filter(|s| gx.f0.get(s) != gy.f0.get(s))
            .copied();
        let all: Vec<i64> = sites.chain([gx.t, gy.t]).collect();
        let (a, b) = (*all.iter().min().unwrap(), *all.iter().max().unwrap());
        (
            distance_upper(target, &gx, &gy, DistanceMode::Interval { lo: a, hi: b })?,
            false,
        )
    } else {
        let levels = gx.fprime.len().max(gy.fprime.len());
        let i = (1..=levels)
            .rev()
            .find(|&j| gx.prime(j) != gy.prime(j))
            .unwrap_or(levels);
        let d = c.index().big_d as i64 - 1;
        (
            distance_upper(target, &gx, &gy, DistanceMode::Level { i, d })?,
            true,
        )
    };
    let exact = if target.is_lamplighter() {
        Some(lamplighter_length(
            target,
            &multiply(target, &inverse(target, &gx)?, &gy)?,
        )?)
    } else {
        None
    };
    Ok(Some(Outcome {
        m,
        within: certified <= shape_bound(c, m),
        ep_changed: dx.e != dy.e || dx.big_p != dy.big_p,
        gap_ok,
        locality_ok,
        level_mode,
        certified,
        exact,
    }))
}

fn random_below<R: Rng>(bound: &BigUint, rng: &mut R) -> BigUint {
    let bits = bound.bits();
    loop {
        let bytes: Vec<u8> = (0..bits.div_ceil(8)).map(|_| rng.gen()).collect();
        let mut x = BigUint::from_bytes_le(&bytes);
        x >>= bits.div_ceil(8) * 8 - bits;
        if &x < bound {
            return x;
        }
    }
}

/// Uniform element of `𝒢_n`, drawn digit by digit.
fn sample_source<R: Rng>(c: &DDCoupling, rng: &mut R) -> Result<DenseElement> {
    let enc = c.encoder();
    let t = rng.gen_range(0..enc.width());
    let kappa = enc.kappa();
    let q = BigUint::from(enc.q());
    let nus = (0..=enc.n())
        .map(|i| {
            let shell = if i == 0 {
                1
            } else {
                kappa.pow(i as u32) - kappa.pow(i as u32 - 1)
            };
            random_below(&q.pow(shell as u32), rng)
        })
        .collect();
    let mu = random_below(enc.mu_size(), rng);
    Ok(enc.assemble(t, nus, mu)?)
}

/// `ln` of the enumeration majorant of `X^s_m`, constants dropped.
fn ln_majorant(c: &DDCoupling, lamp: bool, m: usize) -> f64 {
    let idx = c.index();
    let (kappa, q) = (c.params().kappa() as f64, c.params().q() as f64);
    let (lk, lq) = (kappa.ln(), q.ln());
    let ln_k = ln_big(&idx.k_size);
    let d = idx.big_d as f64;
    let p = idx.p;
    let n = idx.n as f64;
    let w = kappa.powf(n);
    let level_drop = |m: usize| {
        let j = m - 1 - p;
        (c.params().target().params().prime_order(j) as f64).ln()
    };
    if lamp {
        match m {
            _ if m <= 2 => f64::NEG_INFINITY,
            _ if m <= p => ln_k - kappa.powi(m as i32 - 1) * lq,
            _ if m == p + 1 => ln_k - d * lq,
            _ => ln_k - d * lq - level_drop(m),
        }
    } else {
        match m {
            _ if m <= idx.n + 1 => ln_k - m as f64 * lk,
            _ if m <= p => ln_k - n * lk + (2.0 * w - kappa.powi(m as i32 - 1)) * lq,
            _ if m == p + 1 => ln_k - n * lk + (2.0 * w - d) * lq,
            _ => ln_k - n * lk + (2.0 * w - d) * lq - level_drop(m),
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// `ln` of the count bound for `X^s_m`, `m = 0..=top`, before any asymptotics:
/// at most `N / (b_{lo} ⋯ b_{m-1})` values `z < N = max ϑ + 1` have their first
/// non-maximal digit above `lo - 1` at `m`, per cell and per value of `x`.
/// `lo = 3` for lamp generators and `i_0(t) + 2` (at least 3) for the cursor.
fn ln_explicit_counts(c: &DDCoupling, lamp: bool, top: usize) -> Result<Vec<f64>> {
    let idx = c.index();
    let ln_n = ln_big(c.numbering().size_per_cursor());
    let two = 2f64.ln();
    let mut out = vec![f64::NEG_INFINITY; top + 1];
    for big_p in 0..idx.q_blocks {
        for t in 0..idx.width {
            let lo = if lamp {
                3
            } else {
                match carry_position(t, idx.n, c.params().kappa()) {
                    Ok(i) => (i + 2).max(3),
                    Err(_) => continue,
                }
            };
            let ln_base: Vec<f64> = c.numbering().base(big_p, t).iter().map(ln_big).collect();
            let mut ln_prod = 0.0;
            for (m, slot) in out.iter_mut().enumerate() {
                if m < lo {
                    continue;
                }
                if m > lo {
                    ln_prod += ln_base[m - 1];
                }
                *slot = log_add(*slot, two + ln_n - ln_prod);
            }
        }
    }
    Ok(out)
}

/// Radius charged to `X^s_m`: `κ^m` up to `p + 1` (capped at `κ^p`), then
/// `D l_j` with `l_j` the diameter of target level `j = min(m - p, M)`.
fn radius(c: &DDCoupling, m: usize) -> f64 {
    let idx = c.index();
    let kappa = c.params().kappa() as f64;
    if m <= idx.p {
        kappa.powi(m as i32)
    } else if m == idx.p + 1 {
        kappa.powi(idx.p as i32)
    } else {
        let l = c
            .params()
            .target()
            .params()
            .level((m - idx.p).min(idx.big_m))
            .gamma
            .diameter() as f64;
        idx.big_d as f64 * l
    }
}

/// Distance and enumeration audit of `ι_n` for one generator `s`.
pub fn distance_audit(c: &DDCoupling, s: Generator, mode: SampleMode) -> Result<DistanceAudit> {
    if !generators(c.params().source().params()).contains(&s) {
        return Err(DDError::Domain(format!(
            "{s} is not a generator of the source"
        )));
    }
    let enc = c.encoder();
    let outcomes: Vec<Option<Outcome>> = match mode {
        SampleMode::Exhaustive { budget } => {
            let size = enc
                .size_u128()
                .filter(|&z| z <= budget as u128)
                .ok_or_else(|| DDError::Budget {
                    size: enc.size().to_string(),
                    budget,
                })?;
            (0..size as u64)
                .into_par_iter()
                .map(|z| audit_element(c, &enc.decode_fast(z as u128).unwrap(), s))
                .collect::<Result<_>>()?
        }
        SampleMode::Sampled { samples, seed } => (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i),
                );
                audit_element(c, &sample_source(c, &mut rng)?, s)
            })
            .collect::<Result<_>>()?,
    };
    let idx = c.index();
    let top = idx.p + idx.big_m + 1;
    let mut observed = vec![0u64; top + 1];
    let mut audit = DistanceAudit {
        n: idx.n,
        generator: s.to_string(),
        gen: s,
        mode,
        checked: 0,
        rejected: 0,
        rows: Vec::new(),
        within_shape: 0,
        violations: 0,
        violations_with_ep_change: 0,
        ep_changes: 0,
        gap_failures: 0,
        locality_failures: 0,
        level_mode: 0,
        max_certified: 0,
        exact_checked: 0,
        exact_above_certified: 0,
        max_fitted_constant: 0.0,
        max_explicit_ratio: 0.0,
        q_at_least_3: idx.q_at_least_3,
    };
    for o in outcomes {
        let Some(o) = o else {
            audit.rejected += 1;
            continue;
        };
        audit.checked += 1;
        observed[o.m] += 1;
        audit.within_shape += o.within as u64;
        audit.violations += !o.within as u64;
        audit.violations_with_ep_change += (!o.within && o.ep_changed) as u64;
        audit.ep_changes += o.ep_changed as u64;
        audit.gap_failures += !o.gap_ok as u64;
        audit.locality_failures += !o.locality_ok as u64;
        audit.level_mode += o.level_mode as u64;
        audit.max_certified = audit.max_certified.max(o.certified);
        if let Some(e) = o.exact {
            audit.exact_checked += 1;
            audit.exact_above_certified += (e > o.certified) as u64;
        }
    }
    if matches!(mode, SampleMode::Exhaustive { .. }) {
        audit.rejected = 0;
    }
    let scale = match mode {
        SampleMode::Exhaustive { .. } => 0.0,
        SampleMode::Sampled { samples, .. } => ln_big(enc.size()) - (samples as f64).ln(),
    };
    let ln_g = ln_big(enc.size());
    let explicit = ln_explicit_counts(c, s.is_lamp(), top)?;
    let mut acc = 0.0;
    for (m, &obs) in observed.iter().enumerate() {
        let ln_count = if obs == 0 {
            f64::NEG_INFINITY
        } else {
            (obs as f64).ln() + scale
        };
        let ln_maj = ln_majorant(c, s.is_lamp(), m);
        let fitted = match (obs, ln_maj == f64::NEG_INFINITY) {
            (0, _) => 0.0,
            (_, true) => f64::INFINITY,
            _ => (ln_count - ln_maj).exp(),
        };
        audit.max_fitted_constant = audit.max_fitted_constant.max(fitted);
        let ratio = match (obs, explicit[m] == f64::NEG_INFINITY) {
            (0, _) => 0.0,
            (_, true) => f64::INFINITY,
            _ => (ln_count - explicit[m]).exp(),
        };
        audit.max_explicit_ratio = audit.max_explicit_ratio.max(ratio);
        let r = radius(c, m);
        acc += c.params().phi(r) * (ln_count - ln_g).exp();
        audit.rows.push(AuditRow {
            m,
            observed: obs,
            count: ln_count.exp(),
            ln_count,
            shape_majorant: ln_maj.exp(),
            ln_majorant: ln_maj,
            fitted_constant: fitted,
            ln_explicit: explicit[m],
            explicit_ratio: ratio,
            radius: r,
            partial_sum: acc,
        });
    }
    Ok(audit)
}

/// The three pieces of the integrability sum for one audit.
#[derive(Clone, Debug, Serialize)]
pub struct IntegrabilitySum {
    pub n: usize,
    pub generator: String,
    /// `Σ_{m <= p} φ(κ^m) |X_m| / |𝒢_n|`.
    pub low: f64,
    /// `φ(κ^p) |X_{p+1}| / |𝒢_n|`.
    pub middle: f64,
    /// `Σ_{m >= p+2} φ(D l_{m-p}) |X_m| / |𝒢_n|`.
    pub high: f64,
    pub total: f64,
    /// The same sum with `φ ≡ 1`.
    pub total_phi_one: f64,
    pub hypotheses_hold: bool,
}

pub fn integrability_sum(c: &DDCoupling, audit: &DistanceAudit) -> IntegrabilitySum {
    let p = c.index().p;
    let ln_g = ln_big(c.encoder().size());
    let (mut low, mut middle, mut high, mut ones) = (0.0, 0.0, 0.0, 0.0);
    for row in &audit.rows {
        if row.observed == 0 {
            continue;
        }
        let frac = (row.ln_count - ln_g).exp();
        let term = c.params().phi(row.radius) * frac;
        ones += frac;
        match row.m {
            m if m <= p => low += term,
            m if m == p + 1 => middle += term,
            _ => high += term,
        }
    }
    IntegrabilitySum {
        n: audit.n,
        generator: audit.generator.clone(),
        low,
        middle,
        high,
        total: low + middle + high,
        total_phi_one: ones,
        hypotheses_hold: c.params().hypotheses().holds,
    }
}

/// An `n`-independent bound `4 q² C B` on the integrability sums, with `C` the
/// largest fitted constant and `B` the closed series bounding `Σ φ(r_m) majorant_m / |𝒦_n|`.
///
/// The cursor series assumes `Q >= 3`, so cursor audits only count toward the
/// verdict at such `n`.
#[derive(Clone, Debug, Serialize)]
pub struct UniformBound {
    pub generator_class: String,
    pub constant: f64,
    pub series: f64,
    pub bound: f64,
    /// `n` whose sums were compared with the bound.
    pub checked_n: Vec<usize>,
    pub max_total: f64,
    pub hypotheses_hold: bool,
    pub bounded: bool,
}

const SERIES_TERMS: i32 = 40;

fn lamp_series_bound(c: &DDCoupling, shrink: f64) -> (f64, f64) {
    let params = c.params();
    let (kappa, lq) = (params.kappa() as f64, (params.q() as f64).ln());
    let phi = |x: f64| params.phi(x);
    let decay = |e: f64| (-e * lq / shrink).exp();
    let mut low = 0.0;
    let mut sup = 0.0f64;
    for m in 1..SERIES_TERMS {
        let km = kappa.powi(m);
        if km > 1e12 {
            break;
        }
        let term = phi(km) * decay(kappa.powi(m - 1));
        if m >= 2 {
            low += term;
        }
        sup = sup.max(term);
    }
    (low, sup)
}

fn derived_tail(c: &DDCoupling, shrink: f64) -> f64 {
    let params = c.params();
    let lq = (params.q() as f64).ln();
    let linear = (0..200)
        .map(|i| 10f64.powf(i as f64 / 20.0))
        .map(|x| params.phi(x) / x)
        .fold(0.0, f64::max);
    let sup_d = (1..5000)
        .map(|d| d as f64 * (-(d as f64) * lq / shrink).exp())
        .fold(0.0, f64::max);
    let target = params.target().params();
    let sum: f64 = (2..=target.levels().len())
        .map(|j| target.level(j).gamma.diameter() as f64 / target.prime_order(j - 1) as f64)
        .sum();
    linear * sup_d * sum
}

pub fn uniform_bound(
    c_list: &[(&DDCoupling, &DistanceAudit, &IntegrabilitySum)],
    lamp: bool,
) -> Option<UniformBound> {
    let (first, _, _) = c_list.first()?;
    let q = first.params().q() as f64;
    let eligible: Vec<_> = c_list
        .iter()
        .filter(|(c, a, _)| a.gen.is_lamp() == lamp && (lamp || c.index().q_at_least_3))
        .collect();
    let constant = eligible
        .iter()
        .map(|(_, a, _)| a.max_fitted_constant)
        .fold(0.0, f64::max);
    let series = if lamp {
        let (low, sup) = lamp_series_bound(first, 1.0);
        low + sup + derived_tail(first, 1.0)
    } else {
        let params = first.params();
        let kappa = params.kappa() as f64;
        let small: f64 = (0..SERIES_TERMS)
            .map(|m| params.phi(kappa.powi(m)) * kappa.powi(-m))
            .sum();
        let (low, sup) = lamp_series_bound(first, 3.0);
        small + low + sup + derived_tail(first, 3.0)
    };
    let bound = 4.0 * q * q * constant * series;
    let max_total = eligible.iter().map(|(_, _, s)| s.total).fold(0.0, f64::max);
    let hypotheses_hold = first.params().hypotheses().holds;
    Some(UniformBound {
        generator_class: if lamp { "lamp".into() } else { "cursor".into() },
        constant,
        series,
        bound,
        checked_n: eligible.iter().map(|(c, _, _)| c.index().n).collect(),
        max_total,
        hypotheses_hold,
        bounded: hypotheses_hold && constant.is_finite() && max_total <= bound,
    })
}
