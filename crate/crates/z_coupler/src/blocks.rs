use serde::Serialize;

use crate::{Result, ZError};

/// Reading windows `ℬ_0 ⊂ ℬ_1 ⊂ … ⊂ ℬ_n` around a cursor `t ∈ [0, κ^n - 1]`.
///
/// `ℬ_i = [Σ_{j>=i} t_j κ^j, Σ_{j>=i} t_j κ^j + κ^i - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub t: u64,
    pub kappa: u64,
    /// Base-`κ` digits of `t`, least significant first, length `n`.
    pub digits: Vec<u64>,
    /// `(lo, hi)` of `ℬ_i` for `i = 0..=n`.
    pub intervals: Vec<(u64, u64)>,
}

impl BlockDecomposition {
    pub fn n(&self) -> usize {
        self.digits.len()
    }

    /// Sites of `ℬ_i \ ℬ_{i-1}` in increasing order (`ℬ_0` itself for `i = 0`).
    pub fn shell(&self, i: usize) -> impl Iterator<Item = u64> + '_ {
        let (lo, hi) = self.intervals[i];
        let inner = if i == 0 {
            None
        } else {
            Some(self.intervals[i - 1])
        };
        (lo..=hi).filter(move |s| inner.map_or(true, |(a, b)| *s < a || *s > b))
    }
}

pub(crate) fn kappa_digits(t: u64, n: usize, kappa: u64) -> Vec<u64> {
    let mut rest = t;
    (0..n)
        .map(|_| {
            let d = rest % kappa;
            rest /= kappa;
            d
        })
        .collect()
}

fn width(n: usize, kappa: u64) -> Result<u64> {
    kappa
        .checked_pow(n as u32)
        .ok_or_else(|| ZError::Domain(format!("{kappa}^{n} overflows")))
}

pub fn block_intervals(t: u64, n: usize, kappa: u64) -> Result<BlockDecomposition> {
    let w = width(n, kappa)?;
    if t >= w {
        return Err(ZError::Domain(format!("cursor {t} outside [0, {}]", w - 1)));
    }
    let mut intervals = Vec::with_capacity(n + 1);
    let mut size = 1u64;
    for _ in 0..=n {
        let lo = t - t % size;
        intervals.push((lo, lo + size - 1));
        size = size.saturating_mul(kappa);
    }
    Ok(BlockDecomposition {
        t,
        kappa,
        digits: kappa_digits(t, n, kappa),
        intervals,
    })
}

/// `i_0(t) = min { i : t_i < κ - 1 }`, the digit absorbing the carry of `t + 1`.
pub fn carry_position(t: u64, n: usize, kappa: u64) -> Result<usize> {
    let w = width(n, kappa)?;
    if t >= w {
        return Err(ZError::Domain(format!("cursor {t} outside [0, {}]", w - 1)));
    }
    kappa_digits(t, n, kappa)
        .iter()
        .position(|&d| d < kappa - 1)
        .ok_or(ZError::Saturated { t })
}
