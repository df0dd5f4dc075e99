//! Positional arithmetic over a variable base `(b_0, ..., b_M)`.
//!
//! A value `x` is written `x = sum_i x_i * (b_0 * ... * b_{i-1})`, digits stored
//! least significant first. When `last_unbounded` is set the top digit may exceed
//! its radix, which lets a finite base represent every natural number.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MixedRadixError {
    #[error("base must be nonempty")]
    EmptyBase,
    #[error("radix {radix} at position {index} is below 2")]
    RadixTooSmall { index: usize, radix: BigUint },
    #[error("value {value} is outside [0, {bound})")]
    OutOfRange { value: BigUint, bound: BigUint },
    #[error("digit {digit} at position {index} exceeds radix {radix}")]
    DigitOutOfRange {
        index: usize,
        digit: BigUint,
        radix: BigUint,
    },
    #[error("digit count {got} does not match base length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("every digit above position {k} is maximal")]
    Saturated { k: usize },
    #[error("index {index} is outside a base of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, MixedRadixError>;

/// Radices `b_0..b_M`; cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MixedRadixBase {
    radices: Arc<[BigUint]>,
    last_unbounded: bool,
}

impl fmt::Debug for MixedRadixBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.radices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        if self.last_unbounded {
            write!(f, ",..")?;
        }
        write!(f, ")")
    }
}

impl MixedRadixBase {
    pub fn new(radices: Vec<BigUint>, last_unbounded: bool) -> Result<Self> {
        if radices.is_empty() {
            return Err(MixedRadixError::EmptyBase);
        }
        let two = BigUint::from(2u32);
        for (index, r) in radices.iter().enumerate() {
            if *r < two {
                return Err(MixedRadixError::RadixTooSmall {
                    index,
                    radix: r.clone(),
                });
            }
        }
        Ok(Self {
            radices: radices.into(),
            last_unbounded,
        })
    }

    pub fn bounded(radices: Vec<BigUint>) -> Result<Self> {
        Self::new(radices, false)
    }

    pub fn from_u64s(radices: &[u64], last_unbounded: bool) -> Result<Self> {
        Self::new(
            radices.iter().map(|&r| BigUint::from(r)).collect(),
            last_unbounded,
        )
    }

    pub fn len(&self) -> usize {
        self.radices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radices.is_empty()
    }

    pub fn radices(&self) -> &[BigUint] {
        &self.radices
    }

    pub fn radix(&self, i: usize) -> &BigUint {
        &self.radices[i]
    }

    pub fn last_unbounded(&self) -> bool {
        self.last_unbounded
    }

    /// `b_0 * ... * b_k`; `k >= len` multiplies every radix.
    pub fn prefix_product(&self, k: usize) -> BigUint {
        self.radices
            .iter()
            .take(k.saturating_add(1))
            .fold(BigUint::one(), |acc, b| acc * b)
    }

    /// Number of representable values when the top digit is bounded.
    pub fn product(&self) -> BigUint {
        self.prefix_product(self.len() - 1)
    }

    /// Place values `1, b_0, b_0 b_1, ...` (one per digit).
    pub fn place_values(&self) -> Vec<BigUint> {
        let mut out = Vec::with_capacity(self.len());
        let mut w = BigUint::one();
        for b in self.radices.iter() {
            out.push(w.clone());
            w *= b;
        }
        out
    }

    pub fn contains(&self, x: &BigUint) -> bool {
        self.last_unbounded || *x < self.product()
    }
}

/// Digits of a value together with their base.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitVector {
    base: MixedRadixBase,
    digits: Vec<BigUint>,
}

impl DigitVector {
    /// Validates digit ranges.
    pub fn new(base: MixedRadixBase, digits: Vec<BigUint>) -> Result<Self> {
        if digits.len() != base.len() {
            return Err(MixedRadixError::LengthMismatch {
                expected: base.len(),
                got: digits.len(),
            });
        }
        let top = base.len() - 1;
        for (index, (d, b)) in digits.iter().zip(base.radices.iter()).enumerate() {
            if d >= b && !(index == top && base.last_unbounded) {
                return Err(MixedRadixError::DigitOutOfRange {
                    index,
                    digit: d.clone(),
                    radix: b.clone(),
                });
            }
        }
        Ok(Self { base, digits })
    }

    pub fn from_u64s(base: MixedRadixBase, digits: &[u64]) -> Result<Self> {
        Self::new(base, digits.iter().map(|&d| BigUint::from(d)).collect())
    }

    pub fn base(&self) -> &MixedRadixBase {
        &self.base
    }

    pub fn digits(&self) -> &[BigUint] {
        &self.digits
    }

    pub fn digit(&self, i: usize) -> &BigUint {
        &self.digits[i]
    }

    pub fn digits_u64(&self) -> Option<Vec<u64>> {
        self.digits.iter().map(|d| d.to_u64()).collect()
    }

    pub fn recompose(&self) -> BigUint {
        recompose_digits(&self.digits, &self.base)
    }

    /// `min { j > k : x_j < b_j - 1 }`.
    pub fn carry_index(&self, k: usize) -> Result<usize> {
        let one = BigUint::one();
        for j in (k + 1)..self.digits.len() {
            if &self.digits[j] + &one < self.base.radices[j] {
                return Ok(j);
            }
        }
        Err(MixedRadixError::Saturated { k })
    }

    /// Whether every digit strictly above `j` coincides with `other`'s.
    pub fn agrees_above(&self, other: &DigitVector, j: usize) -> bool {
        self.digits
            .iter()
            .zip(other.digits.iter())
            .skip(j + 1)
            .all(|(a, b)| a == b)
    }
}

impl fmt::Display for DigitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]_{:?}", self.base)
    }
}

fn recompose_digits(digits: &[BigUint], base: &MixedRadixBase) -> BigUint {
    let mut acc = BigUint::zero();
    for (d, b) in digits.iter().zip(base.radices.iter()).rev() {
        acc *= b;
        acc += d;
    }
    acc
}

/// Iterated Euclidean division by `b_0, b_1, ...`.
pub fn decompose(x: &BigUint, base: &MixedRadixBase) -> Result<DigitVector> {
    if !base.contains(x) {
        return Err(MixedRadixError::OutOfRange {
            value: x.clone(),
            bound: base.product(),
        });
    }
    let top = base.len() - 1;
    let mut digits = Vec::with_capacity(base.len());
    let mut rest = x.clone();
    for b in base.radices[..top].iter() {
        let (q, r) = rest.div_rem(b);
        digits.push(r);
        rest = q;
    }
    digits.push(rest);
    Ok(DigitVector {
        base: base.clone(),
        digits,
    })
}

pub fn recompose(d: &DigitVector) -> BigUint {
    d.recompose()
}

pub fn carry_index(x: &BigUint, k: usize, base: &MixedRadixBase) -> Result<usize> {
    decompose(x, base)?.carry_index(k)
}

/// Whether the digits of `x` and `y` agree above `carry_index(x, k)`.
///
/// A saturated carry index means there is nothing above it to compare, so the
/// answer is vacuously true.
pub fn addition_locality_holds(
    x: &BigUint,
    y: &BigUint,
    k: usize,
    base: &MixedRadixBase,
) -> Result<bool> {
    let dx = decompose(x, base)?;
    let dy = decompose(y, base)?;
    match dx.carry_index(k) {
        Ok(j) => Ok(dx.agrees_above(&dy, j)),
        Err(MixedRadixError::Saturated { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

/// Exact number of `x` in `[0, prod b - 1]` whose carry index above `k` is `m`.
pub fn count_by_carry_index(base: &MixedRadixBase, k: usize, m: usize) -> Result<BigUint> {
    if m >= base.len() {
        return Err(MixedRadixError::IndexOutOfRange {
            index: m,
            len: base.len(),
        });
    }
    if k >= m {
        return Ok(BigUint::zero());
    }
    let below = base.prefix_product(k);
    let above = base.radices[m + 1..]
        .iter()
        .fold(BigUint::one(), |acc, b| acc * b);
    Ok(above * (&base.radices[m] - 1u32) * below)
}

/// Whether every `y` in range shares its digits above `i` with some image point.
///
/// `c` is the Lipschitz constant of the map producing `image`; it only serves to
/// check the admissibility condition `c < b_0 * ... * b_i`.
pub fn lipschitz_image_covers(
    image: &[BigUint],
    base: &MixedRadixBase,
    i: usize,
    c: &BigUint,
) -> Result<bool> {
    if i >= base.len() {
        return Err(MixedRadixError::IndexOutOfRange {
            index: i,
            len: base.len(),
        });
    }
    let w = base.prefix_product(i);
    if *c >= w {
        return Err(MixedRadixError::OutOfRange {
            value: c.clone(),
            bound: w,
        });
    }
    let blocks = base.product() / &w;
    let mut next = BigUint::zero();
    for x in image {
        let h = x / &w;
        if h > next {
            return Ok(false);
        }
        if h == next {
            next += 1u32;
        }
    }
    Ok(next >= blocks)
}

/// Largest difference between consecutive elements of a sorted image.
pub fn max_gap(image: &[BigUint]) -> BigUint {
    image
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .max()
        .unwrap_or_default()
}
