use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::{ser_big, DDError, Result};

/// Increasing map `𝔰 : [0, max ϑ̃] → [0, max ϑ]` with `𝔰(max ϑ̃) = max ϑ`.
///
/// With `𝔞 = ⌈max ϑ / max ϑ̃⌉` and `𝔟 = max ϑ - 𝔞 max ϑ̃ <= 0`, `𝔰(x) = (𝔞 - 1) x`
/// for `x < -𝔟` and `𝔞 x + 𝔟` otherwise. Both pieces are integer valued, and the
/// step at `-𝔟` is `𝔞 - 1`, so the map is strictly increasing and `𝔞`-Lipschitz.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadingMap {
    #[serde(serialize_with = "ser_big")]
    pub max_source: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub max_target: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub a: BigUint,
    /// `-𝔟 >= 0`.
    #[serde(serialize_with = "ser_big")]
    pub neg_b: BigUint,
}

impl SpreadingMap {
    /// Requires `1 <= max ϑ̃ <= max ϑ`; otherwise `𝔞 = 1` and `𝔟 < 0` would fold
    /// two inputs onto one output.
    pub fn new(max_source: BigUint, max_target: BigUint) -> Result<Self> {
        if max_source.is_zero() || max_source > max_target {
            return Err(DDError::Domain(format!(
                "spreading needs 1 <= max source {max_source} <= max target {max_target}"
            )));
        }
        let a = max_target.div_ceil(&max_source);
        let neg_b = &a * &max_source - &max_target;
        Ok(Self {
            max_source,
            max_target,
            a,
            neg_b,
        })
    }

    pub fn apply(&self, x: &BigUint) -> Result<BigUint> {
        if x > &self.max_source {
            return Err(DDError::Domain(format!(
                "{x} exceeds max source {}",
                self.max_source
            )));
        }
        Ok(if x < &self.neg_b {
            (&self.a - BigUint::one()) * x
        } else {
            &self.a * x - &self.neg_b
        })
    }

    /// `𝔰⁻¹(y)`, an error when `y` is not a value of `𝔰`.
    pub fn inverse(&self, y: &BigUint) -> Result<BigUint> {
        let corner = (&self.a - BigUint::one()) * &self.neg_b;
        let (x, r) = if y < &corner {
            y.div_rem(&(&self.a - BigUint::one()))
        } else {
            (y + &self.neg_b).div_rem(&self.a)
        };
        if !r.is_zero() || x > self.max_source {
            return Err(DDError::Inverse(y.to_string()));
        }
        Ok(x)
    }

    /// `𝔞 <= q³`.
    pub fn within_q3(&self, q: u64) -> bool {
        self.a <= BigUint::from(q).pow(3)
    }
}
