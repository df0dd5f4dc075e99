use std::collections::BTreeMap;
use std::sync::Arc;

use delta_core::{apply_generator, DeltaElement, DeltaParams, Generator};
use group_kernel::{Elem, MarkedGamma};
use mixed_radix::{decompose, DigitVector, MixedRadixBase};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::blocks::{block_intervals, kappa_digits, BlockDecomposition};
use crate::{Result, ZError};

/// Widest cursor range the encoder accepts.
pub const MAX_WIDTH: u64 = 1 << 20;

/// Element of `𝒢_n` with every lamp stored densely over `[0, κ^n - 1]`.
///
/// `f0[s]` is the `A × B` id at site `s`; `fp[m - 1][s - k_m]` the `Γ_m` id of
/// `f'_m(s)` for `s ∈ [k_m, κ^n - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DenseElement {
    pub t: u64,
    pub f0: Vec<Elem>,
    pub fp: Vec<Vec<Elem>>,
}

#[derive(Clone, Debug)]
pub(crate) struct LevelCodec {
    pub(crate) k: u64,
    pub(crate) order: u64,
    gamma: Arc<MarkedGamma>,
    /// `Γ` id to digit, identity first; `u32::MAX` off `Γ'`.
    digit_of: Vec<u32>,
    pub(crate) elem_of: Vec<Elem>,
}

impl LevelCodec {
    fn new(k: u64, gamma: Arc<MarkedGamma>) -> Self {
        let e = gamma.gamma().identity();
        let mut elem_of = gamma.gamma_prime().to_vec();
        let pos = elem_of
            .iter()
            .position(|&g| g == e)
            .expect("Γ' contains the identity");
        elem_of.swap(0, pos);
        let mut digit_of = vec![u32::MAX; gamma.gamma().order()];
        for (d, &g) in elem_of.iter().enumerate() {
            digit_of[g as usize] = d as u32;
        }
        Self {
            k,
            order: elem_of.len() as u64,
            gamma,
            digit_of,
            elem_of,
        }
    }

    pub(crate) fn identity(&self) -> Elem {
        self.elem_of[0]
    }
}

/// The numbering `ι_n`.
///
/// Digits in the variable base `β = (q, κ, q^{κ-1}, κ, …, κ, q^{κ^n-κ^{n-1}}, max μ + 1)`
/// are `(ν_0, t_0, ν_1, t_1, …, t_{n-1}, ν_n, μ)`. `ν_i` reads `f_0` on
/// `ℬ_i \ ℬ_{i-1}` in increasing site order, first site least significant, with
/// the `A × B` id as digit. `μ` reads `f'_1, f'_2, …` on `[k_m, κ^n - 1]` the same
/// way, with digits ordering `Γ'_m` identity first. The `μ` digit is omitted when
/// it can only be zero.
#[derive(Clone, Debug)]
pub struct ZEncoder {
    params: DeltaParams,
    n: usize,
    kappa: u64,
    q: u64,
    width: u64,
    levels: Vec<LevelCodec>,
    nu_radices: Vec<BigUint>,
    nu_radices_fast: Option<Vec<u128>>,
    base: MixedRadixBase,
    mu_size: BigUint,
    size: BigUint,
}

trait Digit: Integer + Clone + From<u32> + ToPrimitive {}
impl<T: Integer + Clone + From<u32> + ToPrimitive> Digit for T {}

impl ZEncoder {
    pub fn new(params: &DeltaParams, n: usize) -> Result<Self> {
        let kappa = params.kappa();
        let width = kappa
            .checked_pow(n as u32)
            .filter(|w| *w <= MAX_WIDTH)
            .ok_or_else(|| {
                ZError::Domain(format!("{kappa}^{n} exceeds the width limit {MAX_WIDTH}"))
            })?;
        let q = params.q() as u64;
        let top = params.level_index(width - 1)?;
        let levels: Vec<LevelCodec> = (1..=top)
            .map(|m| LevelCodec::new(params.level(m).k, params.level(m).gamma.clone()))
            .collect();
        let mut mu_size = BigUint::one();
        for l in &levels {
            mu_size *= BigUint::from(l.order).pow((width - l.k) as u32);
        }
        let mut nu_radices = vec![BigUint::from(q)];
        for i in 1..=n {
            let shell = kappa.pow(i as u32) - kappa.pow(i as u32 - 1);
            nu_radices.push(BigUint::from(q).pow(shell as u32));
        }
        let mut radices = vec![nu_radices[0].clone()];
        for r in &nu_radices[1..] {
            radices.push(BigUint::from(kappa));
            radices.push(r.clone());
        }
        if mu_size > BigUint::one() {
            radices.push(mu_size.clone());
        }
        let base = MixedRadixBase::bounded(radices)?;
        let size = base.product();
        debug_assert_eq!(
            size,
            BigUint::from(width) * BigUint::from(q).pow(width as u32) * &mu_size
        );
        let nu_radices_fast =
            (size.bits() <= 127).then(|| nu_radices.iter().map(|r| r.to_u128().unwrap()).collect());
        Ok(Self {
            params: params.clone(),
            n,
            kappa,
            q,
            width,
            levels,
            nu_radices,
            nu_radices_fast,
            base,
            mu_size,
            size,
        })
    }

    pub(crate) fn level_codecs(&self) -> &[LevelCodec] {
        &self.levels
    }

    pub fn params(&self) -> &DeltaParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `κ^n`, the number of cursor positions.
    pub fn width(&self) -> u64 {
        self.width
    }

    /// `𝔏(n)`: levels whose offset fits in `[0, κ^n - 1]`.
    pub fn top_level(&self) -> usize {
        self.levels.len()
    }

    /// `|𝒢_n|`.
    pub fn size(&self) -> &BigUint {
        &self.size
    }

    /// `|𝒢_n|` when it fits the fast path.
    pub fn size_u128(&self) -> Option<u128> {
        self.nu_radices_fast
            .as_ref()
            .map(|_| self.size.to_u128().unwrap())
    }

    /// `max μ_n + 1 = |𝒢_n| / (κ^n q^{κ^n})`.
    pub fn mu_size(&self) -> &BigUint {
        &self.mu_size
    }

    /// The variable base `β`.
    pub fn base(&self) -> &MixedRadixBase {
        &self.base
    }

    /// `(t, t+1)` both interior: `t ∈ [1, κ^n - 2]`.
    pub fn is_interior(&self, t: u64) -> bool {
        t >= 1 && t + 2 <= self.width
    }

    pub fn blocks(&self, t: u64) -> BlockDecomposition {
        block_intervals(t, self.n, self.kappa).expect("cursor inside the window")
    }

    pub fn to_dense(&self, x: &DeltaElement) -> Result<DenseElement> {
        let w = self.width as i64;
        if x.t < 0 || x.t >= w {
            return Err(ZError::Domain(format!(
                "cursor {} outside [0, {}]",
                x.t,
                w - 1
            )));
        }
        let mut f0 = vec![0; self.width as usize];
        for (&s, &v) in &x.f0 {
            if s < 0 || s >= w {
                return Err(ZError::Domain(format!(
                    "lamp at {s} outside [0, {}]",
                    w - 1
                )));
            }
            f0[s as usize] = v;
        }
        if x.fprime.len() > self.levels.len() {
            return Err(ZError::Domain(format!(
                "derived data at level {}",
                x.fprime.len()
            )));
        }
        let mut fp: Vec<Vec<Elem>> = self
            .levels
            .iter()
            .map(|l| vec![l.identity(); (self.width - l.k) as usize])
            .collect();
        for (i, map) in x.fprime.iter().enumerate() {
            let l = &self.levels[i];
            for (&s, &g) in map {
                if s < l.k as i64 || s >= w || l.digit_of[g as usize] == u32::MAX {
                    return Err(ZError::Domain(format!(
                        "derived value {g} at level {} site {s}",
                        i + 1
                    )));
                }
                fp[i][(s - l.k as i64) as usize] = g;
            }
        }
        Ok(DenseElement {
            t: x.t as u64,
            f0,
            fp,
        })
    }

    pub fn to_delta(&self, x: &DenseElement) -> DeltaElement {
        let f0: BTreeMap<i64, Elem> =
            x.f0.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(s, &v)| (s as i64, v))
                .collect();
        let mut fprime: Vec<BTreeMap<i64, Elem>> = self
            .levels
            .iter()
            .zip(&x.fp)
            .map(|(l, vals)| {
                vals.iter()
                    .enumerate()
                    .filter(|(_, &g)| g != l.identity())
                    .map(|(j, &g)| ((l.k + j as u64) as i64, g))
                    .collect()
            })
            .collect();
        while fprime.last().is_some_and(|m| m.is_empty()) {
            fprime.pop();
        }
        DeltaElement {
            t: x.t as i64,
            f0,
            fprime,
        }
    }

    /// Sites of `ℬ_i \ ℬ_{i-1}` as two increasing ranges.
    fn shell_ranges(&self, t: u64, i: usize) -> [(u64, u64); 2] {
        if i == 0 {
            return [(t, t + 1), (0, 0)];
        }
        let outer = self.kappa.pow(i as u32);
        let inner = outer / self.kappa;
        let (lo, hi) = (t - t % outer, t - t % outer + outer);
        let (ilo, ihi) = (t - t % inner, t - t % inner + inner);
        [(lo, ilo), (ihi, hi)]
    }

    fn nu_value<T: Digit>(&self, x: &DenseElement, i: usize) -> T {
        let q = T::from(self.q as u32);
        let mut acc = T::zero();
        for &(a, b) in self.shell_ranges(x.t, i).iter().rev() {
            for s in (a..b).rev() {
                acc = acc * q.clone() + T::from(x.f0[s as usize]);
            }
        }
        acc
    }

    fn mu_value<T: Digit>(&self, x: &DenseElement) -> T {
        let mut acc = T::zero();
        for (l, vals) in self.levels.iter().zip(&x.fp).rev() {
            let order = T::from(l.order as u32);
            for &g in vals.iter().rev() {
                acc = acc * order.clone() + T::from(l.digit_of[g as usize]);
            }
        }
        acc
    }

    fn horner<T: Digit>(&self, x: &DenseElement, nu_radices: &[T]) -> T {
        let digits = kappa_digits(x.t, self.n, self.kappa);
        let kappa = T::from(self.kappa as u32);
        let mut acc = self.mu_value::<T>(x);
        for i in (1..=self.n).rev() {
            acc = acc * nu_radices[i].clone() + self.nu_value::<T>(x, i);
            acc = acc * kappa.clone() + T::from(digits[i - 1] as u32);
        }
        acc * nu_radices[0].clone() + self.nu_value::<T>(x, 0)
    }

    fn fill<T: Digit>(&self, t: u64, nus: Vec<T>, mut mu: T) -> DenseElement {
        let q = T::from(self.q as u32);
        let mut f0 = vec![0; self.width as usize];
        for (i, mut nu) in nus.into_iter().enumerate() {
            for (a, b) in self.shell_ranges(t, i) {
                for s in a..b {
                    let (rest, d) = nu.div_rem(&q);
                    f0[s as usize] = d.to_u32().unwrap();
                    nu = rest;
                }
            }
        }
        let mut fp = Vec::with_capacity(self.levels.len());
        for l in &self.levels {
            let order = T::from(l.order as u32);
            let vals = (l.k..self.width)
                .map(|_| {
                    let (rest, d) = mu.div_rem(&order);
                    mu = rest.clone();
                    l.elem_of[d.to_usize().unwrap()]
                })
                .collect();
            fp.push(vals);
        }
        DenseElement { t, f0, fp }
    }

    fn unhorner<T: Digit>(&self, mut z: T, nu_radices: &[T]) -> DenseElement {
        let kappa = T::from(self.kappa as u32);
        let (rest, nu0) = z.div_rem(&nu_radices[0]);
        z = rest;
        let mut nus = vec![nu0];
        let mut t = 0u64;
        let mut place = 1u64;
        for r in &nu_radices[1..] {
            let (rest, d) = z.div_rem(&kappa);
            t += d.to_u64().unwrap() * place;
            place *= self.kappa;
            let (rest, nu) = rest.div_rem(r);
            nus.push(nu);
            z = rest;
        }
        self.fill(t, nus, z)
    }

    /// `ι_n(x)` on the fast path; `None` when `|𝒢_n| >= 2^127`.
    pub fn encode_fast(&self, x: &DenseElement) -> Option<u128> {
        self.nu_radices_fast
            .as_ref()
            .map(|r| self.horner::<u128>(x, r))
    }

    pub fn decode_fast(&self, z: u128) -> Option<DenseElement> {
        let r = self.nu_radices_fast.as_ref()?;
        (z < self.size.to_u128().unwrap()).then(|| self.unhorner::<u128>(z, r))
    }

    pub fn encode_dense(&self, x: &DenseElement) -> BigUint {
        self.horner::<BigUint>(x, &self.nu_radices)
    }

    /// `ι_n(x)`.
    pub fn encode(&self, x: &DeltaElement) -> Result<BigUint> {
        Ok(self.encode_dense(&self.to_dense(x)?))
    }

    /// Digits of `ι_n(x)` in the base `β`.
    pub fn digit_vector(&self, x: &DeltaElement) -> Result<DigitVector> {
        let d = self.to_dense(x)?;
        let t_digits = kappa_digits(d.t, self.n, self.kappa);
        let mut digits = vec![self.nu_value::<BigUint>(&d, 0)];
        for i in 1..=self.n {
            digits.push(BigUint::from(t_digits[i - 1]));
            digits.push(self.nu_value::<BigUint>(&d, i));
        }
        if self.mu_size > BigUint::one() {
            digits.push(self.mu_value::<BigUint>(&d));
        }
        Ok(DigitVector::new(self.base.clone(), digits)?)
    }

    /// `(ν_0, …, ν_n)` of `x`, the lamp numberings read around its cursor.
    pub fn nu_digits(&self, x: &DenseElement) -> Vec<BigUint> {
        (0..=self.n)
            .map(|i| self.nu_value::<BigUint>(x, i))
            .collect()
    }

    /// `μ_n` of the derived data of `x`.
    pub fn mu(&self, x: &DenseElement) -> BigUint {
        self.mu_value::<BigUint>(x)
    }

    /// Inverse of `(t, ν, μ)`; every digit must be below its radix.
    pub fn assemble(&self, t: u64, nus: Vec<BigUint>, mu: BigUint) -> Result<DenseElement> {
        if t >= self.width || nus.len() != self.n + 1 || mu >= self.mu_size {
            return Err(ZError::Domain(format!(
                "cursor {t}, {} lamp digits or μ = {mu} out of range",
                nus.len()
            )));
        }
        if let Some(i) = nus.iter().zip(&self.nu_radices).position(|(d, r)| d >= r) {
            return Err(ZError::Domain(format!(
                "ν_{i} = {} exceeds its radix",
                nus[i]
            )));
        }
        Ok(self.fill(t, nus, mu))
    }

    /// `ι_n⁻¹(z)`, read off the digits of `z` in the base `β`.
    pub fn decode(&self, z: &BigUint) -> Result<DeltaElement> {
        if z >= &self.size {
            return Err(ZError::Domain(format!("{z} outside [0, {})", self.size)));
        }
        let digits = decompose(z, &self.base)?;
        let d = digits.digits();
        let mut t = 0u64;
        let mut place = 1u64;
        let mut nus = vec![d[0].clone()];
        for i in 1..=self.n {
            t += d[2 * i - 1].to_u64().unwrap() * place;
            place *= self.kappa;
            nus.push(d[2 * i].clone());
        }
        let mu = if self.mu_size > BigUint::one() {
            d[2 * self.n + 1].clone()
        } else {
            BigUint::zero()
        };
        Ok(self.to_delta(&self.fill(t, nus, mu)))
    }

    /// Right multiplication by `s` in place, computed from full lamp values.
    /// Returns `false`, leaving `x` unspecified, when the result leaves `𝒢_n`.
    pub fn apply_dense(&self, x: &mut DenseElement, s: Generator) -> bool {
        let nb = self.params.b_order() as Elem;
        let base = self.params.base();
        let t = x.t;
        match s {
            Generator::Cursor(d) => {
                let next = t as i64 + d as i64;
                if next < 0 || next >= self.width as i64 {
                    return false;
                }
                x.t = next as u64;
            }
            Generator::A(a) => {
                let v = x.f0[t as usize];
                let (a0, b0) = (v / nb, v % nb);
                let a_new = base.a_group().mul(a0, a as Elem);
                x.f0[t as usize] = a_new * nb + b0;
                for (l, vals) in self.levels.iter().zip(x.fp.iter_mut()) {
                    let g = &l.gamma;
                    let gr = g.gamma();
                    let behind = if t >= l.k {
                        x.f0[(t - l.k) as usize] % nb
                    } else {
                        0
                    };
                    let beta = g.b_elem(behind as usize);
                    let old = if t >= l.k {
                        vals[(t - l.k) as usize]
                    } else {
                        l.identity()
                    };
                    let full = gr.mul(gr.mul(old, g.a_elem(a0 as usize)), beta);
                    let section = gr.mul(g.a_elem(a_new as usize), beta);
                    let new = gr.mul(gr.mul(full, g.a_elem(a)), gr.inv(section));
                    if t >= l.k {
                        vals[(t - l.k) as usize] = new;
                    } else if new != l.identity() {
                        return false;
                    }
                }
            }
            Generator::B(b) => {
                let v = x.f0[t as usize];
                let (a0, b0) = (v / nb, v % nb);
                let b_new = base.b_group().mul(b0, b as Elem);
                x.f0[t as usize] = a0 * nb + b_new;
                for (l, vals) in self.levels.iter().zip(x.fp.iter_mut()) {
                    let g = &l.gamma;
                    let gr = g.gamma();
                    let site = t + l.k;
                    let inside = site < self.width;
                    let a1 = if inside { x.f0[site as usize] / nb } else { 0 };
                    let old = if inside {
                        vals[t as usize]
                    } else {
                        l.identity()
                    };
                    let full = gr.mul(gr.mul(old, g.a_elem(a1 as usize)), g.b_elem(b0 as usize));
                    let section = gr.mul(g.a_elem(a1 as usize), g.b_elem(b_new as usize));
                    let new = gr.mul(gr.mul(full, g.b_elem(b)), gr.inv(section));
                    if inside {
                        vals[t as usize] = new;
                    } else if new != l.identity() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `|ι_n(x) - ι_n(x s)|` for `x` with an interior cursor.
    pub fn neighbor_gap(&self, x: &DeltaElement, s: Generator) -> Result<BigUint> {
        if x.t < 1 || x.t as u64 + 2 > self.width {
            return Err(ZError::Interior {
                t: x.t.max(0) as u64,
                last: self.width.saturating_sub(2),
            });
        }
        let z = self.encode(x)?;
        let y = apply_generator(&self.params, x, s)?;
        let zs = self.encode(&y)?;
        Ok(if z > zs { z - zs } else { zs - z })
    }

    /// `κ^{i+1} q^{κ^{i+1}}`, the cursor-gap bound for carry position `i`.
    pub fn cursor_bound(&self, i: usize) -> BigUint {
        let p = self.kappa.pow(i as u32 + 1);
        BigUint::from(p) * BigUint::from(self.q).pow(p as u32)
    }
}
