use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use profile_forge::{cursor_series, ln_big, ProfileSpec, SeriesVerdict};
use serde::{Deserialize, Serialize};

use crate::encoder::ZEncoder;
use crate::{Result, ZError};

/// Integrability gauges `φ : [0, ∞) → [0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integrand {
    Constant {
        value: f64,
    },
    /// `x^{num/den}`.
    Power {
        num: u32,
        den: u32,
    },
    /// `ρ ∘ log`, with `ρ` clamped to `ρ(1)` below 1.
    RhoLog {
        rho: ProfileSpec,
    },
}

impl Integrand {
    pub fn identity() -> Self {
        Integrand::Power { num: 1, den: 1 }
    }

    /// `φ(e^s)`, usable when `e^s` itself overflows.
    pub fn eval_ln(&self, s: f64) -> f64 {
        match self {
            Integrand::Constant { value } => *value,
            Integrand::Power { num, den } => (s * *num as f64 / *den as f64).exp(),
            Integrand::RhoLog { rho } => rho.eval(s),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_ln(r.ln())
    }

    pub fn label(&self) -> String {
        match self {
            Integrand::Constant { value } => format!("const({value})"),
            Integrand::Power { num, den } if num == den => "x".into(),
            Integrand::Power { num, den } => format!("x^({num}/{den})"),
            Integrand::RhoLog { rho } => format!("rho∘log[{}]", rho_label(rho)),
        }
    }
}

fn rho_label(rho: &ProfileSpec) -> String {
    match rho {
        ProfileSpec::Identity => "id".into(),
        ProfileSpec::Power { num, den } => format!("x^({den}/{})", num + den),
        ProfileSpec::IteratedLog { r } => format!("log^{r}"),
        ProfileSpec::Tabulated { points } => format!("table[{}]", points.len()),
    }
}

/// `φ ∘ ψ` as a descriptor; `up_to_constants` marks an `≃` simplification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Composition {
    pub result: Integrand,
    pub up_to_constants: bool,
}

fn reduced(num: u64, den: u64) -> Result<Integrand> {
    let g = num.gcd(&den);
    let (num, den) = (num / g, den / g);
    match (u32::try_from(num), u32::try_from(den)) {
        (Ok(num), Ok(den)) => Ok(Integrand::Power { num, den }),
        _ => Err(ZError::Descriptor(format!(
            "exponent {num}/{den} too large"
        ))),
    }
}

/// Composes gauges of chained couplings.
///
/// `ρ ∘ log ∘ x^p ≃ ρ ∘ log` because `ρ(p y) ≤ p ρ(y)` for `p ≥ 1` and
/// `ρ(p y) ≥ p ρ(y)` for `p < 1` on the admissible class.
pub fn compose_integrability(outer: &Integrand, inner: &Integrand) -> Result<Composition> {
    let exact = |result| {
        Ok(Composition {
            result,
            up_to_constants: false,
        })
    };
    match (outer, inner) {
        (o, _) if *o == Integrand::identity() => exact(inner.clone()),
        (_, i) if *i == Integrand::identity() => exact(outer.clone()),
        (Integrand::Constant { value }, _) => exact(Integrand::Constant { value: *value }),
        (o, Integrand::Constant { value }) => exact(Integrand::Constant {
            value: o.eval(*value),
        }),
        (Integrand::Power { num: a, den: b }, Integrand::Power { num: c, den: d }) => {
            exact(reduced(*a as u64 * *c as u64, *b as u64 * *d as u64)?)
        }
        (Integrand::RhoLog { rho }, Integrand::Power { .. }) => Ok(Composition {
            result: Integrand::RhoLog { rho: rho.clone() },
            up_to_constants: true,
        }),
        _ => Err(ZError::Descriptor(format!(
            "{} ∘ {} has no closed descriptor",
            outer.label(),
            inner.label()
        ))),
    }
}

/// One line of an integrability audit: distance `r`, how many interior elements
/// realize it, their share of `|𝒢_n|`, `φ(r)`, and the running sum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumRow {
    pub r: String,
    pub count: String,
    pub fraction: f64,
    pub phi: f64,
    pub partial_sum: f64,
}

fn ratio(count: &BigUint, total: &BigUint) -> f64 {
    (ln_big(count) - ln_big(total)).exp()
}

/// `Σ_{r <= R} φ(r) |{x : gap = r}| / |𝒢_n|` from an exact gap histogram.
pub fn gap_sum_rows(
    histogram: &BTreeMap<u128, u64>,
    total: &BigUint,
    phi: &Integrand,
    r_max: Option<u128>,
) -> Vec<SumRow> {
    let mut acc = 0.0;
    histogram
        .iter()
        .filter(|(r, _)| r_max.map_or(true, |m| **r <= m))
        .map(|(&r, &c)| {
            let fraction = ratio(&BigUint::from(c), total);
            let phi_r = phi.eval(r as f64);
            acc += phi_r * fraction;
            SumRow {
                r: r.to_string(),
                count: c.to_string(),
                fraction,
                phi: phi_r,
                partial_sum: acc,
            }
        })
        .collect()
}

/// Cursor-generator majorant: elements with carry position `m` are charged the
/// gap bound `κ^{m+1} q^{κ^{m+1}}`, counted from `carry_histogram`.
pub fn cursor_majorant_rows(
    enc: &ZEncoder,
    carry_counts: &[BigUint],
    phi: &Integrand,
) -> Vec<SumRow> {
    let (kappa, q) = (enc.kappa() as f64, enc.q() as f64);
    let mut acc = 0.0;
    carry_counts
        .iter()
        .take(enc.n())
        .enumerate()
        .map(|(m, c)| {
            let p = kappa.powi(m as i32 + 1);
            let ln_r = p.ln() + p * q.ln();
            let fraction = ratio(c, enc.size());
            let phi_r = phi.eval_ln(ln_r);
            acc += phi_r * fraction;
            let r = enc.cursor_bound(m);
            SumRow {
                r: if r.bits() <= 128 {
                    r.to_u128().unwrap().to_string()
                } else {
                    format!("e^{ln_r:.3}")
                },
                count: c.to_string(),
                fraction,
                phi: phi_r,
                partial_sum: acc,
            }
        })
        .collect()
}

/// `Σ_{m<n} ρ∘log(κ^{m+1} q^{κ^{m+1}}) κ^{-m}` for `n = 1..=n_max`, with the
/// summability verdict of `ρ(κ^m) κ^{-m}` and, when summable, a bound valid for
/// every `n`: `C (S + tail)` with `C = κ ln q + ln κ`, since the argument is at
/// most `C κ^m` and `ρ(C y) ≤ C ρ(y)`.
#[derive(Clone, Debug, Serialize)]
pub struct MajorantReport {
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub constant: f64,
    pub verdict: SeriesVerdict,
    pub uniform_bound: Option<f64>,
}

pub fn majorant_report(
    rho: &ProfileSpec,
    kappa: u64,
    q: u64,
    n_max: usize,
    m_max: usize,
) -> MajorantReport {
    let (k, lq) = (kappa as f64, (q as f64).ln());
    let terms: Vec<f64> = (0..n_max)
        .map(|m| {
            let p = k.powi(m as i32 + 1);
            rho.eval(p * lq + (m as f64 + 1.0) * k.ln()) * k.powi(-(m as i32))
        })
        .collect();
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let constant = (k * lq + k.ln()).max(1.0);
    let verdict = cursor_series(rho, kappa, m_max.max(n_max));
    let uniform_bound = verdict.summable.then(|| {
        let r = verdict.tail_ratio;
        let s = *verdict.partial_sums.last().unwrap();
        let last = verdict.ln_terms.last().unwrap().exp();
        constant * (s + last * r / (1.0 - r))
    });
    MajorantReport {
        terms,
        partial_sums,
        constant,
        verdict,
        uniform_bound,
    }
}
