use folner_atlas::{FolnerAtlas, FolnerIndex};
use num_bigint::BigUint;
use serde::Serialize;

use crate::numbering::block_depth;
use crate::params::DDParams;
use crate::{ser_big, DDError, Result};

/// Largest window the index search walks to before giving up.
pub const SEARCH_LIMIT: u64 = 1 << 20;

/// Where `𝒢_n` sits in the Følner chain of the target.
///
/// `F_{d,i,j}` is the first set of the chain with `|𝒢_n| <= |F_{d,i,j}|`, and
/// `𝒦_n = F_{D,I,J}` is its successor. `D = Q κ^n + R`, `κ^{p-1} < D <= κ^p`,
/// and levels `1..=M` carry derived data in `𝒦_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TargetIndex {
    pub n: usize,
    pub width: u64,
    pub d: u64,
    pub i: usize,
    pub j: usize,
    pub big_d: u64,
    pub big_i: usize,
    pub big_j: usize,
    pub q_blocks: u64,
    pub rem: u64,
    pub p: usize,
    pub big_m: usize,
    #[serde(serialize_with = "ser_big")]
    pub g_size: BigUint,
    /// `|F_{d,i,j-1}|`, the chain predecessor; `None` when `F_{d,i,j}` is the first set.
    #[serde(skip)]
    pub pred_size: Option<BigUint>,
    #[serde(serialize_with = "ser_big")]
    pub found_size: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub k_size: BigUint,
    /// `Q >= 3`, needed by the cursor enumeration bounds.
    pub q_at_least_3: bool,
    /// `D > κ^n`.
    pub d_exceeds_width: bool,
}

impl TargetIndex {
    pub fn k_index(&self) -> FolnerIndex {
        FolnerIndex::new(self.big_d, self.big_i, self.big_j)
    }

    pub fn found_index(&self) -> FolnerIndex {
        FolnerIndex::new(self.d, self.i, self.j)
    }
}

fn search_error(e: folner_atlas::FolnerError) -> DDError {
    DDError::Search(e.to_string())
}

/// `M`: the top level of `[0, D-1]`, minus one when that level's only site
/// would be `D - 1` and it sits above `I`.
fn derived_levels(target: &FolnerAtlas, d: u64, big_i: usize) -> Result<usize> {
    let top = target.top_level(d).map_err(search_error)?;
    if top >= 1 && target.params().level(top).k == d - 1 && big_i < top {
        Ok(top - 1)
    } else {
        Ok(top)
    }
}

/// Walks the target chain in successor order from `F_{1,0,1}` to locate `𝒢_n`.
pub fn find_target_index(params: &DDParams, n: usize) -> Result<TargetIndex> {
    let kappa = params.kappa();
    let width = kappa
        .checked_pow(n as u32)
        .ok_or_else(|| DDError::Domain(format!("{kappa}^{n} overflows")))?;
    let source = params.source();
    let g_size = source.cardinality(source.full(width)?)?;
    let target = params.target();
    let mut idx = FolnerIndex::new(1, 0, 1);
    let mut pred_size = None;
    let found_size = loop {
        let card = target.cardinality(idx).map_err(search_error)?;
        if card >= g_size {
            break card;
        }
        pred_size = Some(card);
        idx = target.successor(idx).map_err(search_error)?;
        if idx.n > SEARCH_LIMIT {
            return Err(DDError::Search(format!(
                "no set of size >= {g_size} below n = {SEARCH_LIMIT}"
            )));
        }
    };
    let k = target.successor(idx).map_err(search_error)?;
    let k_size = target.cardinality(k).map_err(search_error)?;
    let big_d = k.n;
    let (q_blocks, rem) = (big_d / width, big_d % width);
    if q_blocks == 0 {
        return Err(DDError::Domain(format!(
            "D = {big_d} is below κ^n = {width}"
        )));
    }
    let p = block_depth(big_d, kappa);
    Ok(TargetIndex {
        n,
        width,
        d: idx.n,
        i: idx.i,
        j: idx.j,
        big_d,
        big_i: k.i,
        big_j: k.j,
        q_blocks,
        rem,
        p,
        big_m: derived_levels(target, big_d, k.i)?,
        g_size,
        pred_size,
        found_size,
        k_size,
        q_at_least_3: q_blocks >= 3,
        d_exceeds_width: big_d > width,
    })
}
