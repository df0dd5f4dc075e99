use std::collections::{HashSet, VecDeque};

use delta_core::{apply_generator, generators, DeltaElement, Generator};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use z_coupler::{DenseElement, ZEncoder};

use crate::index::{find_target_index, TargetIndex};
use crate::numbering::{TargetElement, TargetNumbering};
use crate::params::DDParams;
use crate::spreading::SpreadingMap;
use crate::{ser_big, DDError, Result};

/// `ϑ̃_n` and its ingredients for one source element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDigits {
    pub t: u64,
    /// `ν̃_0, …, ν̃_n`.
    pub nus: Vec<BigUint>,
    pub e: BigUint,
    pub big_p: u64,
    pub theta_tilde: BigUint,
}

/// `ℋ_n = 𝒦_n \ {ϑ_n(g, v) >= 𝔰(q^{κ^n} max E) and χ(v) >= κ^n (P_last + 1)}`,
/// where `P_last = max μ̃ - Q max E` is the largest `P` reached with `E = max E`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Carving {
    #[serde(serialize_with = "ser_big")]
    pub theta_threshold: BigUint,
    pub chi_threshold: u64,
    pub removed_cursors: u64,
    #[serde(serialize_with = "ser_big")]
    pub removed: BigUint,
    /// `D q^{3 + κ^n}`.
    #[serde(serialize_with = "ser_big")]
    pub removed_bound: BigUint,
    pub removed_within_bound: bool,
    /// `|𝒢_n| <= |𝒦_n| <= 4 q² |𝒢_n|`.
    pub k_sandwich: bool,
    pub removed_fraction: f64,
}

/// The coupling `ι_n : 𝒢_n → ℋ_n` at one `n`.
#[derive(Clone, Debug)]
pub struct DDCoupling {
    params: DDParams,
    enc: ZEncoder,
    index: TargetIndex,
    numbering: TargetNumbering,
    spread: SpreadingMap,
    q_pow: BigUint,
    max_e: BigUint,
    last_p: u64,
    carving: Carving,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InjectionReport {
    pub size: u64,
    /// `x ↦ (t, ϑ̃_n(x), P_n(x))` is injective with image in the box union.
    pub triple_bijective: bool,
    pub injective: bool,
    pub image_in_h: bool,
    /// Pairs `(x, s)`, `s` a lamp generator with `x s ∈ 𝒢_n`.
    pub lamp_moves: u64,
    /// Those moves changing `(E, P)`.
    pub ep_changes: u64,
    /// Those moves changing some `ν̃_i`, `i >= 1`.
    pub nu_changes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub k_size: u64,
    pub h_size: u64,
    pub image_size: u64,
    /// Largest distance in the Schreier graph of `ℋ_n` from an element to the image.
    pub radius: Option<u32>,
    pub unreachable: u64,
    /// `2κ² + 1`.
    pub bound: u64,
    pub within_bound: bool,
}

/// Predicates the construction only guarantees for `n` large enough, measured at one `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Thresholds {
    pub n: usize,
    pub q_at_least_3: bool,
    pub d_exceeds_width: bool,
    /// `|F_{d,i,j-1}| / (D q^{κ^n}) <= max E + 1 <= |F_{d,i,j+1}| / (D q^{κ^n})`.
    pub e_sandwich: bool,
    /// `|F_{d,i,j-1}| / D <= max ϑ̃ + 1 <= |F_{d,i,j+1}| / D`.
    pub theta_sandwich: bool,
    /// `𝔞 <= q³`.
    pub spread_within_q3: bool,
}

impl DDCoupling {
    pub fn new(params: &DDParams, n: usize) -> Result<Self> {
        let index = find_target_index(params, n)?;
        let enc = ZEncoder::new(params.source().params(), n)?;
        if enc.size() != &index.g_size {
            return Err(DDError::Internal(format!(
                "|𝒢_n| = {} but the encoder covers {}",
                index.g_size,
                enc.size()
            )));
        }
        let numbering = TargetNumbering::new(params.target(), &index)?;
        let q = params.q();
        let q_pow = BigUint::from(q).pow(index.width as u32);
        let big_q = BigUint::from(index.q_blocks);
        let max_mu = enc.mu_size() - BigUint::one();
        let max_e = &max_mu / &big_q;
        let last_p = (&max_mu - &max_e * &big_q).to_u64().unwrap();
        let max_source = &q_pow * (&max_e + BigUint::one()) - BigUint::one();
        let max_target = numbering.size_per_cursor() - BigUint::one();
        let spread = SpreadingMap::new(max_source, max_target.clone())?;
        let theta_threshold = spread.apply(&(&q_pow * &max_e))?;
        let chi_threshold = index.width * (last_p + 1);
        let cursor = numbering.cursor();
        let removed_cursors = (0..index.big_d)
            .filter(|&v| cursor.chi(v) >= chi_threshold)
            .count() as u64;
        let removed = (&max_target + BigUint::one() - &theta_threshold) * removed_cursors;
        let removed_bound =
            BigUint::from(index.big_d) * BigUint::from(q).pow(3 + index.width as u32);
        let k_sandwich = index.g_size <= index.k_size
            && index.k_size <= BigUint::from(4 * q * q) * &index.g_size;
        let removed_fraction = ratio(&removed, &index.k_size);
        let carving = Carving {
            theta_threshold,
            chi_threshold,
            removed_cursors,
            removed_within_bound: removed <= removed_bound,
            removed,
            removed_bound,
            k_sandwich,
            removed_fraction,
        };
        Ok(Self {
            params: params.clone(),
            enc,
            index,
            numbering,
            spread,
            q_pow,
            max_e,
            last_p,
            carving,
        })
    }

    pub fn params(&self) -> &DDParams {
        &self.params
    }

    pub fn encoder(&self) -> &ZEncoder {
        &self.enc
    }

    pub fn index(&self) -> &TargetIndex {
        &self.index
    }

    pub fn numbering(&self) -> &TargetNumbering {
        &self.numbering
    }

    pub fn spreading(&self) -> &SpreadingMap {
        &self.spread
    }

    pub fn carving(&self) -> &Carving {
        &self.carving
    }

    pub fn max_e(&self) -> &BigUint {
        &self.max_e
    }

    /// `max μ̃ - Q max E`.
    pub fn last_p(&self) -> u64 {
        self.last_p
    }

    /// `max ϑ̃_n + 1 = q^{κ^n} (max E + 1)`.
    pub fn theta_tilde_size(&self) -> BigUint {
        &self.q_pow * (&self.max_e + BigUint::one())
    }

    /// Size of the box union `in_box_union` describes: `κ^n (q^{κ^n} max E Q + q^{κ^n} (P_last + 1))`.
    pub fn box_union_size(&self) -> BigUint {
        let rows = &self.max_e * self.index.q_blocks + self.last_p + 1u32;
        &self.q_pow * rows * self.index.width
    }

    pub fn thresholds(&self) -> Thresholds {
        let idx = &self.index;
        let d = BigUint::from(idx.big_d);
        let lower = idx.pred_size.clone().unwrap_or_default();
        let e1 = &self.max_e + BigUint::one();
        let scale = &d * &self.q_pow;
        let theta1 = self.theta_tilde_size();
        Thresholds {
            n: idx.n,
            q_at_least_3: idx.q_at_least_3,
            d_exceeds_width: idx.d_exceeds_width,
            e_sandwich: lower <= &e1 * &scale && &e1 * &scale <= idx.k_size,
            theta_sandwich: lower <= &theta1 * &d && &theta1 * &d <= idx.k_size,
            spread_within_q3: self.spread.within_q3(self.params.q()),
        }
    }

    /// `(E, P)`: `μ̃_n = E Q + P`.
    pub fn extract_ep(&self, x: &DenseElement) -> (BigUint, u64) {
        let (e, p) = self.enc.mu(x).div_rem(&BigUint::from(self.index.q_blocks));
        (e, p.to_u64().unwrap())
    }

    pub fn source_digits(&self, x: &DenseElement) -> SourceDigits {
        let nus = self.enc.nu_digits(x);
        let (e, big_p) = self.extract_ep(x);
        let mut theta = e.clone();
        for (i, nu) in nus.iter().enumerate().rev() {
            theta = theta * self.nu_radix(i) + nu;
        }
        SourceDigits {
            t: x.t,
            nus,
            e,
            big_p,
            theta_tilde: theta,
        }
    }

    /// `b̃_i = q^{|ℬ̃_i \ ℬ̃_{i-1}|}`.
    fn nu_radix(&self, i: usize) -> BigUint {
        let kappa = self.params.kappa();
        let shell = if i == 0 {
            1
        } else {
            kappa.pow(i as u32) - kappa.pow(i as u32 - 1)
        };
        BigUint::from(self.params.q()).pow(shell as u32)
    }

    pub fn theta_tilde(&self, x: &DenseElement) -> BigUint {
        self.source_digits(x).theta_tilde
    }

    /// Whether `(t, ϑ̃, P)` lies in `[0, κ^n - 1] × ([0, q^{κ^n} max E - 1] × [0, Q - 1]
    /// ∪ [q^{κ^n} max E, max ϑ̃] × [0, P_last])`.
    pub fn in_box_union(&self, t: u64, theta: &BigUint, big_p: u64) -> bool {
        if t >= self.index.width
            || big_p >= self.index.q_blocks
            || theta >= &self.theta_tilde_size()
        {
            return false;
        }
        theta < &(&self.q_pow * &self.max_e) || big_p <= self.last_p
    }

    /// Inverse of the triple map.
    pub fn from_triple(&self, t: u64, theta: &BigUint, big_p: u64) -> Result<DenseElement> {
        if !self.in_box_union(t, theta, big_p) {
            return Err(DDError::Domain(format!(
                "({t}, {theta}, {big_p}) outside the box union"
            )));
        }
        let mut rest = theta.clone();
        let mut nus = Vec::with_capacity(self.index.n + 1);
        for i in 0..=self.index.n {
            let (next, d) = rest.div_rem(&self.nu_radix(i));
            nus.push(d);
            rest = next;
        }
        let mu = rest * self.index.q_blocks + big_p;
        Ok(self.enc.assemble(t, nus, mu)?)
    }

    /// `𝔰_n ∘ ϑ̃_n`.
    pub fn theta_hat(&self, x: &DenseElement) -> Result<BigUint> {
        self.spread.apply(&self.theta_tilde(x))
    }

    /// `ι_n(x) = (ϑ_n(·, u)⁻¹(𝔰_n(ϑ̃_n(x))), u(P_n(x), t))`.
    pub fn inject_dense(&self, x: &DenseElement) -> Result<TargetElement> {
        let d = self.source_digits(x);
        let v = self.numbering.cursor().u(d.big_p, d.t);
        let z = self.spread.apply(&d.theta_tilde)?;
        self.numbering
            .vartheta_decode(&z, v)
            .map_err(|e| DDError::Internal(format!("decoding the image failed: {e}")))
    }

    pub fn inject(&self, x: &DeltaElement) -> Result<DeltaElement> {
        let dense = self.enc.to_dense(x)?;
        Ok(self.numbering.to_delta(&self.inject_dense(&dense)?))
    }

    /// Membership in `ℋ_n` from `ϑ_n` read in the cell of the cursor.
    pub fn in_h(&self, g: &TargetElement) -> Result<bool> {
        let theta = self.numbering.vartheta_cell(g)?;
        Ok(!self.removed(&theta, g.v))
    }

    fn removed(&self, theta: &BigUint, v: u64) -> bool {
        theta >= &self.carving.theta_threshold
            && self.numbering.cursor().chi(v) >= self.carving.chi_threshold
    }

    fn checked_size(&self, size: &BigUint, budget: u64) -> Result<u64> {
        size.to_u64()
            .filter(|s| *s <= budget)
            .ok_or_else(|| DDError::Budget {
                size: size.to_string(),
                budget,
            })
    }

    /// Exhaustive checks over `𝒢_n`: triple-map bijectivity, injectivity, image in
    /// `ℋ_n`, and how lamp generators move `(E, P)` and the `ν̃_i`, `i >= 1`.
    pub fn verify_exhaustive(&self, budget: u64) -> Result<InjectionReport> {
        let size = self.checked_size(self.enc.size(), budget)?;
        let lamps: Vec<Generator> = generators(self.params.source().params())
            .into_iter()
            .filter(|g| g.is_lamp())
            .collect();
        let rows: Vec<_> = (0..size)
            .into_par_iter()
            .map(|z| -> Result<_> {
                let x = self
                    .enc
                    .decode_fast(z as u128)
                    .ok_or_else(|| DDError::Internal("fast decoding unavailable".into()))?;
                let d = self.source_digits(&x);
                let in_box = self.in_box_union(d.t, &d.theta_tilde, d.big_p);
                let g = self.inject_dense(&x)?;
                let code = self.numbering.code(&g)?;
                let in_h = self.in_h(&g)?;
                let (mut moves, mut ep, mut nu) = (0u64, 0u64, 0u64);
                for &s in &lamps {
                    let mut y = x.clone();
                    if !self.enc.apply_dense(&mut y, s) {
                        continue;
                    }
                    moves += 1;
                    let dy = self.source_digits(&y);
                    ep += (dy.e != d.e || dy.big_p != d.big_p) as u64;
                    nu += (dy.nus[1..] != d.nus[1..]) as u64;
                }
                Ok((
                    (d.t, d.theta_tilde, d.big_p),
                    in_box,
                    code,
                    in_h,
                    moves,
                    ep,
                    nu,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut triples = HashSet::with_capacity(rows.len());
        let mut codes = HashSet::with_capacity(rows.len());
        let (mut boxed, mut in_h) = (true, true);
        let (mut moves, mut ep, mut nu) = (0, 0, 0);
        for (triple, in_box, code, h, m, e, n) in rows {
            boxed &= in_box;
            in_h &= h;
            triples.insert(triple);
            codes.insert(code);
            moves += m;
            ep += e;
            nu += n;
        }
        Ok(InjectionReport {
            size,
            triple_bijective: boxed
                && triples.len() as u64 == size
                && self.box_union_size() == BigUint::from(size),
            injective: codes.len() as u64 == size,
            image_in_h: in_h,
            lamp_moves: moves,
            ep_changes: ep,
            nu_changes: nu,
        })
    }

    /// Covering radius of the image in the Schreier graph of `ℋ_n` under the
    /// target generators, by multi-source BFS over `𝒦_n`.
    pub fn density(&self, budget: u64) -> Result<DensityReport> {
        let k_size = self.checked_size(&self.index.k_size, budget)?;
        self.checked_size(self.enc.size(), budget)?;
        let target = self.params.target();
        let gens = generators(target.params());
        let d = self.index.big_d;
        let mut dist = vec![u32::MAX; k_size as usize];
        let in_h: Vec<bool> = (0..k_size)
            .into_par_iter()
            .map(|c| {
                let (theta, v) = BigUint::from(c).div_rem(&BigUint::from(d));
                !self.removed(&theta, v.to_u64().unwrap())
            })
            .collect();
        let mut queue = VecDeque::new();
        let image: Vec<u64> = (0..self.enc.size_u128().unwrap() as u64)
            .into_par_iter()
            .map(|z| -> Result<u64> {
                let x = self.enc.decode_fast(z as u128).unwrap();
                Ok(self
                    .numbering
                    .code(&self.inject_dense(&x)?)?
                    .to_u64()
                    .unwrap())
            })
            .collect::<Result<_>>()?;
        for &c in &image {
            if dist[c as usize] == u32::MAX {
                dist[c as usize] = 0;
                queue.push_back(c);
            }
        }
        let image_size = queue.len() as u64;
        while let Some(c) = queue.pop_front() {
            let g = self.numbering.decode_code(&BigUint::from(c))?;
            let x = self.numbering.to_delta(&g);
            for &s in &gens {
                let y = apply_generator(target.params(), &x, s)?;
                let Ok(gy) = self.numbering.from_delta(target, &y) else {
                    continue;
                };
                let cy = self.numbering.code(&gy)?.to_u64().unwrap() as usize;
                if in_h[cy] && dist[cy] == u32::MAX {
                    dist[cy] = dist[c as usize] + 1;
                    queue.push_back(cy as u64);
                }
            }
        }
        let h_size = in_h.iter().filter(|&&h| h).count() as u64;
        let unreachable = (0..k_size as usize)
            .filter(|&c| in_h[c] && dist[c] == u32::MAX)
            .count() as u64;
        let radius = (unreachable == 0).then(|| {
            (0..k_size as usize)
                .filter(|&c| in_h[c])
                .map(|c| dist[c])
                .max()
                .unwrap_or(0)
        });
        let kappa = self.params.kappa();
        let bound = 2 * kappa * kappa + 1;
        Ok(DensityReport {
            k_size,
            h_size,
            image_size,
            radius,
            unreachable,
            bound,
            within_bound: radius.is_some_and(|r| r as u64 <= bound),
        })
    }
}

fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    (profile_forge::ln_big(a) - profile_forge::ln_big(b)).exp()
}
