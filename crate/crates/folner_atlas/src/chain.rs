use group_kernel::{Elem, MarkedGamma};

use crate::{FolnerError, Result};

/// Nested subsets `{e} = Λ_0 ⊂ Λ_1 ⊂ … ⊂ Λ_N = Γ'` with `2|Λ_j| <= |Λ_{j+1}| <= 2q|Λ_j|`.
///
/// Stored as an ordering of `Γ'` and prefix sizes: `Λ_j` is the first `sizes[j]`
/// elements of `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetChain {
    order: Vec<Elem>,
    sizes: Vec<usize>,
}

impl SubsetChain {
    /// Orders `Γ'` by word length in `Γ` (ties by id) and takes prefixes of sizes
    /// `s_j = max(2 s_{j-1}, ⌈|Γ'|^{j/N}⌉)`, clamped to `⌊|Γ'| / 2^{N-j}⌋`, with
    /// `N = max { N : 2^N <= |Γ'| }`.
    pub fn build(gamma: &MarkedGamma) -> Result<Self> {
        let mut order = gamma.gamma_prime().to_vec();
        order.sort_by_key(|&g| (gamma.word_length(g), g));
        let total = order.len();
        if total < 2 {
            return Err(FolnerError::Chain("derived subgroup is trivial".into()));
        }
        let n = usize::BITS as usize - 1 - total.leading_zeros() as usize;
        let mut sizes = vec![1usize];
        for j in 1..=n {
            let root = (total as f64).powf(j as f64 / n as f64).ceil() as usize;
            let cap = total >> (n - j);
            let s = (2 * sizes[j - 1]).max(root).min(cap);
            sizes.push(s);
        }
        *sizes.last_mut().unwrap() = total;
        let chain = Self { order, sizes };
        chain.check(gamma.q())?;
        Ok(chain)
    }

    /// Checks nesting bounds and endpoints.
    pub fn check(&self, q: usize) -> Result<()> {
        if self.sizes.first() != Some(&1) || self.sizes.last() != Some(&self.order.len()) {
            return Err(FolnerError::Chain("chain must run from {e} to Γ'".into()));
        }
        for (j, w) in self.sizes.windows(2).enumerate() {
            if w[1] < 2 * w[0] || w[1] > 2 * q * w[0] {
                return Err(FolnerError::Chain(format!(
                    "sizes {} -> {} at step {j} break [2, 2q]",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    /// `N`.
    pub fn len(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn size(&self, j: usize) -> usize {
        self.sizes[j]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Elements of `Λ_j`.
    pub fn subset(&self, j: usize) -> &[Elem] {
        &self.order[..self.sizes[j]]
    }

    pub fn contains(&self, j: usize, g: Elem) -> bool {
        self.subset(j).contains(&g)
    }
}
