use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::set::{FolnerAtlas, FolnerIndex};
use crate::Result;

/// Sets up to this size get an exact sofic defect; larger ones are sampled.
pub const EXACT_DEFECT_LIMIT: u64 = 20_000;

impl FolnerAtlas {
    /// Diameter `l_m` of `Γ_m`, with `l_0 = 1`.
    pub fn diameter(&self, m: usize) -> u64 {
        if m == 0 {
            1
        } else {
            self.params().level(m).gamma.diameter() as u64
        }
    }

    /// All indices from `(1, 0, 1)` up to the last one with `n <= n_max`.
    pub fn indices(&self, n_max: u64) -> Result<Vec<FolnerIndex>> {
        let mut out = Vec::new();
        let mut idx = FolnerIndex::new(1, 0, 1);
        while idx.n <= n_max {
            out.push(idx);
            idx = self.successor(idx)?;
        }
        Ok(out)
    }

    /// `ln ∏_{m=1}^{𝔩(n-1)} |Γ'_m|^{n-k_m}`.
    pub fn ln_derived_product(&self, n: u64) -> Result<f64> {
        let p = self.params();
        Ok((1..=self.top_level(n)?)
            .map(|m| (n - p.level(m).k) as f64 * (p.prime_order(m) as f64).ln())
            .sum())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub n_max: u64,
    /// Smallest `C_1` with `ln ∏ |Γ'_m|^{n-k_m} <= C_1 n l_{𝔩(n-1)}`.
    pub c1: f64,
    /// Smallest `C_2` with `ln |F_{n,i,j}| <= C_2 n l_{𝔩(n-1)}`.
    pub c2: f64,
    /// Largest `C_3` with `C_3 κ^{N-1} l_{𝔏(N)} <= ln |F_{κ^N}|`.
    pub c3: f64,
    /// Smallest `C_4` with `ln |F_{κ^N}| <= C_4 κ^N l_{𝔏(N)}`.
    pub c4: f64,
    /// Exponents `N` entering `c3`, `c4`.
    pub kappa_powers: Vec<u32>,
}

/// Fitted constants of the growth bounds over `n <= n_max`.
pub fn growth_bounds_report(atlas: &FolnerAtlas, n_max: u64) -> Result<GrowthReport> {
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    for n in 1..=n_max {
        let scale = n as f64 * atlas.diameter(atlas.top_level(n)?) as f64;
        c1 = c1.max(atlas.ln_derived_product(n)? / scale);
    }
    for idx in atlas.indices(n_max)? {
        let scale = idx.n as f64 * atlas.diameter(atlas.top_level(idx.n)?) as f64;
        c2 = c2.max(atlas.ln_cardinality(idx)? / scale);
    }
    let kappa = atlas.params().kappa();
    let (mut c3, mut c4) = (f64::INFINITY, 0.0f64);
    let mut powers = Vec::new();
    let mut big_n = 1u32;
    while kappa.pow(big_n) <= n_max {
        let n = kappa.pow(big_n);
        let ln = atlas.ln_cardinality(atlas.full(n)?)?;
        let l = atlas.diameter(atlas.top_level(n)?) as f64;
        c3 = c3.min(ln / (kappa.pow(big_n - 1) as f64 * l));
        c4 = c4.max(ln / (n as f64 * l));
        powers.push(big_n);
        big_n += 1;
    }
    Ok(GrowthReport {
        n_max,
        c1,
        c2,
        c3,
        c4,
        kappa_powers: powers,
    })
}

/// Lower-bound witness for the isoperimetric profile: `|F|` against `|F| / |∂F| = n/2`.
#[derive(Clone, Debug, Serialize)]
pub struct IsoPoint {
    pub index: FolnerIndex,
    pub ln_size: f64,
    pub ratio: f64,
}

pub fn isoperimetric_estimate(atlas: &FolnerAtlas, n_max: u64) -> Result<Vec<IsoPoint>> {
    atlas
        .indices(n_max)?
        .into_iter()
        .filter(|idx| idx.n >= 2)
        .map(|idx| {
            Ok(IsoPoint {
                index: idx,
                ln_size: atlas.ln_cardinality(idx)?,
                ratio: idx.n as f64 / 2.0,
            })
        })
        .collect()
}

/// Least-squares slope of `ln(ratio)` against `ln ln |F|`.
pub fn iso_trend_slope(points: &[IsoPoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.ln_size.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.ratio.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// One line of the growth table.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub n: u64,
    pub i: usize,
    pub j: usize,
    pub size: String,
    pub ln_size: f64,
    /// `|F| / |F_prev|` along the chain.
    pub ratio: Option<f64>,
    pub boundary_ratio: f64,
    pub sofic_defect_r1: f64,
}

/// Growth table over `n <= n_max`; sofic defects are exact for small sets and
/// estimated from `samples` seeded draws otherwise.
pub fn growth_rows(
    atlas: &FolnerAtlas,
    n_max: u64,
    samples: u64,
    seed: u64,
) -> Result<Vec<GrowthRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut prev: Option<f64> = None;
    for idx in atlas.indices(n_max)? {
        let ln_size = atlas.ln_cardinality(idx)?;
        let set = atlas.set(idx)?;
        let (bad, total) = match set.size_u64() {
            Some(s) if s <= EXACT_DEFECT_LIMIT => set.sofic_defect(1, s)?,
            _ => set.sofic_defect_sampled(1, samples, &mut rng),
        };
        rows.push(GrowthRow {
            n: idx.n,
            i: idx.i,
            j: idx.j,
            size: atlas.cardinality(idx)?.to_string(),
            ln_size,
            ratio: prev.map(|p| (ln_size - p).exp()),
            boundary_ratio: if idx.n >= 2 { 2.0 / idx.n as f64 } else { 1.0 },
            sofic_defect_r1: bad as f64 / total as f64,
        });
        prev = Some(ln_size);
    }
    Ok(rows)
}
