use std::sync::Arc;

use group_kernel::MarkedGamma;

use crate::{DeltaError, Result};

/// One level `m >= 1`: offset `k_m` and the marked group `Γ_m`.
#[derive(Clone, Debug)]
pub struct Level {
    pub k: u64,
    pub gamma: Arc<MarkedGamma>,
}

/// Data of a diagonal product: `Γ_0 = A × B`, then finitely many explicit levels.
///
/// `horizon` is the offset of the first level that was not materialized; `None`
/// means the sequence stops (the next offset is infinite).
#[derive(Clone, Debug)]
pub struct DeltaParams {
    kappa: u64,
    base: Arc<MarkedGamma>,
    levels: Vec<Level>,
    horizon: Option<u64>,
}

impl DeltaParams {
    pub fn new(
        kappa: u64,
        base: Arc<MarkedGamma>,
        levels: Vec<Level>,
        horizon: Option<u64>,
    ) -> Result<Self> {
        if kappa < 2 {
            return Err(DeltaError::Params(format!(
                "kappa {kappa} must be at least 2"
            )));
        }
        if base.gamma_prime_order() != 1 {
            return Err(DeltaError::Params("level 0 must be abelian A × B".into()));
        }
        let mut prev = 0u64;
        for (i, level) in levels.iter().enumerate() {
            let m = i + 1;
            if level.k == 0 || level.k < 2 * prev {
                return Err(DeltaError::Params(format!(
                    "k_{m} = {} violates k_m >= 2 k_(m-1) = {}",
                    level.k,
                    2 * prev
                )));
            }
            if level.gamma.a_group() != base.a_group() || level.gamma.b_group() != base.b_group() {
                return Err(DeltaError::Params(format!(
                    "level {m} marks different A or B"
                )));
            }
            prev = level.k;
        }
        if let Some(h) = horizon {
            if h < 2 * prev.max(1) {
                return Err(DeltaError::Params(format!("horizon {h} below 2 k_M")));
            }
        }
        Ok(Self {
            kappa,
            base,
            levels,
            horizon,
        })
    }

    /// `(A × B) ≀ ℤ`: no levels beyond 0.
    pub fn lamplighter(kappa: u64, base: Arc<MarkedGamma>) -> Result<Self> {
        Self::new(kappa, base, Vec::new(), None)
    }

    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    pub fn base(&self) -> &MarkedGamma {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<MarkedGamma> {
        &self.base
    }

    pub fn q(&self) -> usize {
        self.base.q()
    }

    pub fn a_order(&self) -> usize {
        self.base.a_images().len()
    }

    pub fn b_order(&self) -> usize {
        self.base.b_images().len()
    }

    /// Materialized levels; index `m - 1` holds level `m`.
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, m: usize) -> &Level {
        &self.levels[m - 1]
    }

    pub fn horizon(&self) -> Option<u64> {
        self.horizon
    }

    pub fn is_lamplighter(&self) -> bool {
        self.levels.is_empty() && self.horizon.is_none()
    }

    /// `k_m`, with `k_0 = 0`; `None` stands for an infinite offset.
    pub fn k(&self, m: usize) -> Option<u64> {
        if m == 0 {
            Some(0)
        } else {
            self.levels.get(m - 1).map(|l| l.k)
        }
    }

    /// `max { m : k_m <= n }`.
    pub fn level_index(&self, n: u64) -> Result<usize> {
        if let Some(h) = self.horizon {
            if n >= h {
                return Err(DeltaError::BeyondHorizon { n, horizon: h });
            }
        }
        Ok(self.levels.iter().take_while(|l| l.k <= n).count())
    }

    /// `|Γ'_m|` for `m >= 1`.
    pub fn prime_order(&self, m: usize) -> usize {
        self.level(m).gamma.gamma_prime_order()
    }

    /// Whether every offset is a power of `kappa` (the setting of the couplings).
    pub fn offsets_are_kappa_powers(&self) -> bool {
        self.levels.iter().all(|l| {
            let mut p = 1u64;
            while p < l.k {
                p = p.saturating_mul(self.kappa);
            }
            p == l.k
        })
    }
}
