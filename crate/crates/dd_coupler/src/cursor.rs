use serde::Serialize;

use crate::{DDError, Result};

/// The cursor map `u : [0, Q-1] × [0, w-1] → [0, D-1]` with `D = Q w + R`,
/// `0 <= R < w`, and its surjective left inverse `χ : [0, D-1] → [0, Q w - 1]`.
///
/// Blocks `P < Q - 1` map by `P w + t`. The last block spreads its first `R`
/// cursors onto even offsets, `(Q-1) w + 2t`, and shifts the rest by `R`, so
/// the `R` odd offsets `(Q-1) w + 2t + 1`, `t < R`, are skipped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CursorMap {
    pub q_blocks: u64,
    pub rem: u64,
    pub width: u64,
}

impl CursorMap {
    pub fn new(q_blocks: u64, rem: u64, width: u64) -> Result<Self> {
        if q_blocks == 0 || rem >= width {
            return Err(DDError::Domain(format!(
                "need Q >= 1 and R < w, got Q = {q_blocks}, R = {rem}, w = {width}"
            )));
        }
        Ok(Self {
            q_blocks,
            rem,
            width,
        })
    }

    /// `D = Q w + R`.
    pub fn d(&self) -> u64 {
        self.q_blocks * self.width + self.rem
    }

    fn last_start(&self) -> u64 {
        (self.q_blocks - 1) * self.width
    }

    pub fn u(&self, p: u64, t: u64) -> u64 {
        debug_assert!(p < self.q_blocks && t < self.width);
        let base = p * self.width;
        if p + 1 < self.q_blocks {
            base + t
        } else if t < self.rem {
            base + 2 * t
        } else {
            base + self.rem + t
        }
    }

    pub fn in_image(&self, v: u64) -> bool {
        if v >= self.d() {
            return false;
        }
        match v.checked_sub(self.last_start()) {
            Some(w) if w < 2 * self.rem => w % 2 == 0,
            _ => true,
        }
    }

    /// `u⁻¹(v)` as `(P, t)`.
    pub fn u_inverse(&self, v: u64) -> Result<(u64, u64)> {
        if !self.in_image(v) {
            return Err(DDError::Cursor { v });
        }
        let c = self.chi(v);
        Ok((c / self.width, c % self.width))
    }

    /// `χ(v) = P w + t` when `v = u(P, t)`, else `χ(v - 1)`.
    pub fn chi(&self, v: u64) -> u64 {
        debug_assert!(v < self.d());
        match v.checked_sub(self.last_start()) {
            Some(w) if w < 2 * self.rem => self.last_start() + w / 2,
            Some(w) => self.last_start() + w - self.rem,
            None => v,
        }
    }

    /// `(P, t)` of the cell `χ(v)`.
    pub fn cell(&self, v: u64) -> (u64, u64) {
        let c = self.chi(v);
        (c / self.width, c % self.width)
    }

    /// `χ⁻¹([a, b])`, an interval since `χ` is non-decreasing and onto.
    pub fn chi_preimage(&self, a: u64, b: u64) -> (u64, u64) {
        let lo = self.u(a / self.width, a % self.width);
        let top = self.u(b / self.width, b % self.width);
        let hi = if top + 1 < self.d() && !self.in_image(top + 1) {
            top + 1
        } else {
            top
        };
        (lo, hi)
    }
}
