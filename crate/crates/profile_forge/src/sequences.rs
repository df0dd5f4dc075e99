use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::affine::PiecewiseAffine;
use crate::profile::{rational, ProfileSpec};
use crate::{ProfileError, Result};

/// Entries above this many bits are refused.
pub const MAX_ENTRY_BITS: u64 = 1 << 22;

/// Offsets `k_0..k_M` and diameters `l_0..l_M`, with `k_0 = l_0 = 1`.
///
/// `open_ended` means `k_{M+1} = ∞`: no further level exists.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequences {
    pub kappa: u64,
    pub lambda: u64,
    pub k: Vec<BigUint>,
    pub l: Vec<BigUint>,
    pub open_ended: bool,
}

/// Natural logarithm of a big integer, accurate for any size.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn power(base: u64, exp: u64) -> Result<BigUint> {
    let bits = exp as f64 * (base as f64).log2();
    if bits > MAX_ENTRY_BITS as f64 {
        return Err(ProfileError::TooLarge(format!("{base}^{exp}")));
    }
    Ok(BigUint::from(base).pow(exp as u32))
}

fn smallest_power_at_least(base: u64, target: f64) -> Result<BigUint> {
    if target <= 1.0 {
        return Ok(BigUint::one());
    }
    let mut e = (target.ln() / (base as f64).ln()).floor().max(0.0) as u64;
    // Correct float rounding on either side.
    while e > 0 && ln_big(&power(base, e - 1)?) >= target.ln() - 1e-12 {
        e -= 1;
    }
    while ln_big(&power(base, e)?) < target.ln() - 1e-12 {
        e += 1;
    }
    power(base, e)
}

/// Builds `(k_m, l_m)_{m <= m_max}` for a profile.
///
/// Closed forms: power `α` gives `k_m = κ^m`, `l_m = λ^{round(α m log_λ κ)}`;
/// iterated log `r` gives `k_m = κ^m` and `l_m` an `r`-fold `λ`-tower over `κ^m`;
/// the identity gives the lamplighter (`k_1 = ∞`). Tabulated profiles use the
/// greedy rule `k_{m+1} = κ k_m`, `l_m` the smallest `λ`-power at least
/// `max(l_{m-1}, f(ρ⁻¹(k_m)))`.
pub fn build_sequences(
    spec: &ProfileSpec,
    kappa: u64,
    lambda: u64,
    m_max: usize,
) -> Result<Sequences> {
    if kappa < 2 || lambda < 2 {
        return Err(ProfileError::Spec(format!(
            "kappa {kappa} and lambda {lambda} must be >= 2"
        )));
    }
    spec.check_class_on_grid(1e8, 4000)?;
    let mut seq = Sequences {
        kappa,
        lambda,
        k: vec![BigUint::one()],
        l: vec![BigUint::one()],
        open_ended: false,
    };
    let log_ratio = (kappa as f64).ln() / (lambda as f64).ln();
    for m in 1..=m_max {
        let k = power(kappa, m as u64)?;
        let l = match spec {
            ProfileSpec::Identity => {
                seq.open_ended = true;
                break;
            }
            ProfileSpec::Power { num, den } => {
                let alpha = *num as f64 / *den as f64;
                power(lambda, (alpha * m as f64 * log_ratio).round() as u64)?
            }
            ProfileSpec::IteratedLog { r } => {
                let mut e = power(kappa, m as u64)?;
                for _ in 1..*r {
                    let small = e
                        .to_u64()
                        .ok_or_else(|| ProfileError::TooLarge(format!("tower at m={m}")))?;
                    e = power(lambda, small)?;
                }
                let top = e
                    .to_u64()
                    .ok_or_else(|| ProfileError::TooLarge(format!("tower at m={m}")))?;
                power(lambda, top)?
            }
            ProfileSpec::Tabulated { .. } => {
                let kf = k.to_f64().unwrap();
                match spec.generalized_inverse(kf) {
                    None => {
                        seq.open_ended = true;
                        break;
                    }
                    Some(x) => {
                        let target = spec
                            .companion(x)
                            .max(seq.l.last().unwrap().to_f64().unwrap());
                        smallest_power_at_least(lambda, target)?
                    }
                }
            }
        };
        seq.k.push(k);
        seq.l.push(l);
    }
    Ok(seq)
}

fn big(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

impl Sequences {
    /// Index of the last built level.
    pub fn top(&self) -> usize {
        self.k.len() - 1
    }

    pub fn k_rat(&self, m: usize) -> BigRational {
        big(&self.k[m])
    }

    pub fn l_rat(&self, m: usize) -> BigRational {
        big(&self.l[m])
    }

    /// Largest argument covered by the built levels: `(2 k_M - 1/2) l_M`, or
    /// `None` when the sequence is open ended.
    pub fn domain_end(&self) -> Option<BigRational> {
        if self.open_ended {
            return None;
        }
        let m = self.top();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        Some((rational(2) * self.k_rat(m) - half) * self.l_rat(m))
    }

    fn check_domain(&self, x: &BigRational) -> Result<BigRational> {
        let x = x.max(&BigRational::one()).clone();
        if let Some(end) = self.domain_end() {
            if x > end {
                return Err(ProfileError::Beyond(format!("{x} > {end}")));
            }
        }
        Ok(x)
    }

    /// `f̄`: `l_m` on `[k_m l_m, k_{m+1} l_m]`, `x / k_{m+1}` on `[k_{m+1} l_m, k_{m+1} l_{m+1}]`.
    pub fn bar_f(&self, x: &BigRational) -> Result<BigRational> {
        let x = self.check_domain(x)?;
        let top = self.top();
        for m in 0..=top {
            if m == top || x <= self.k_rat(m + 1) * self.l_rat(m) {
                return Ok(self.l_rat(m));
            }
            if x <= self.k_rat(m + 1) * self.l_rat(m + 1) {
                return Ok(&x / self.k_rat(m + 1));
            }
        }
        unreachable!("the last level catches every admissible x")
    }

    /// `ρ̄(x) = x / f̄(x)`.
    pub fn bar_rho(&self, x: &BigRational) -> Result<BigRational> {
        let x = self.check_domain(x)?;
        Ok(&x / self.bar_f(&x)?)
    }

    /// Breakpoints of `f̄`: `k_m l_m` and `k_{m+1} l_m` for each built level.
    pub fn breakpoints(&self) -> Vec<BigRational> {
        let mut out = Vec::new();
        for m in 0..=self.top() {
            out.push(self.k_rat(m) * self.l_rat(m));
            if m < self.top() {
                out.push(self.k_rat(m + 1) * self.l_rat(m));
            }
        }
        out
    }

    /// Strictly increasing piecewise-affine map within `2δ` of `ρ̄`.
    ///
    /// Equal to `ρ̄` on `[(k_m + δ) l_m, (k_{m+1} - δ) l_m]`, affine from
    /// `((k_{m+1} - δ) l_m, k_{m+1} - δ)` to `((k_{m+1} + δ) l_{m+1}, k_{m+1} + δ)`.
    pub fn rho_bij(&self, delta: &BigRational) -> Result<PiecewiseAffine> {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        if delta <= &BigRational::from_integer(BigInt::from(0)) || delta >= &half {
            return Err(ProfileError::Spec(format!(
                "delta {delta} must lie in (0, 1/2)"
            )));
        }
        let mut points = vec![(BigRational::one(), BigRational::one())];
        for m in 0..self.top() {
            let k1 = self.k_rat(m + 1);
            let lo = &k1 - delta;
            let hi = &k1 + delta;
            points.push((&lo * self.l_rat(m), lo));
            points.push((&hi * self.l_rat(m + 1), hi));
        }
        let lm = self.l_rat(self.top());
        match self.domain_end() {
            None => PiecewiseAffine::new(points, Some(BigRational::one() / lm)),
            Some(end) => {
                let y = &end / &lm;
                points.push((end, y));
                PiecewiseAffine::new(points, None)
            }
        }
    }
}
