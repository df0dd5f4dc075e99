//! Per-generator audit tables shared by the ℤ and diagonal-product tasks.

use std::collections::BTreeMap;

use dd_coupler::{DistanceAudit, IntegrabilitySum};
use num_bigint::BigUint;
use serde::Serialize;
use z_coupler::{GapStats, SumRow};

/// One histogram row: `key` is a gap value `r` or a scale index `m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistRow {
    pub key: String,
    /// Exact count.
    pub count: String,
    /// Bound charged to the row, as an integer or `e^x` when huge.
    pub bound: String,
    pub fraction: f64,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingAudit {
    pub generator: String,
    pub checked: u64,
    pub rows: Vec<HistRow>,
    pub verdicts: BTreeMap<String, bool>,
}

impl CouplingAudit {
    pub fn fraction_total(&self) -> f64 {
        self.rows.iter().map(|r| r.fraction).sum()
    }

    /// Rows must not claim more than the audited mass.
    pub fn fractions_ok(&self) -> bool {
        self.fraction_total() <= 1.0 + 1e-9
    }

    pub fn all_verdicts(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    /// Lamp generators: the gap histogram with the partial sums of `sums`.
    /// Cursor generators: one row per carry bucket.
    pub fn from_gap_stats(st: &GapStats, total: u64, q: u64, sums: &[SumRow]) -> Self {
        let rows = if st.gen.is_lamp() {
            sums.iter()
                .map(|s| HistRow {
                    key: s.r.clone(),
                    count: s.count.clone(),
                    bound: q.to_string(),
                    fraction: s.fraction,
                    partial_sum: s.partial_sum,
                })
                .collect()
        } else {
            let mut acc = 0.0;
            st.buckets
                .iter()
                .map(|b| {
                    let fraction = b.count as f64 / total.max(1) as f64;
                    acc += fraction;
                    HistRow {
                        key: b.m.to_string(),
                        count: b.count.to_string(),
                        bound: b.bound.to_string(),
                        fraction,
                        partial_sum: acc,
                    }
                })
                .collect()
        };
        let mut verdicts = BTreeMap::new();
        verdicts.insert("gap_within_bound".into(), st.violations == 0);
        verdicts.insert("stays_inside".into(), st.escapes == 0);
        Self {
            generator: st.generator.clone(),
            checked: st.checked,
            rows,
            verdicts,
        }
    }

    pub fn from_distance_audit(a: &DistanceAudit, sum: &IntegrabilitySum) -> Self {
        let total = (a.checked + a.rejected).max(1) as f64;
        let rows = a
            .rows
            .iter()
            .map(|r| HistRow {
                key: r.m.to_string(),
                count: r.observed.to_string(),
                bound: if r.ln_majorant < 88.0 {
                    format!("{:.6e}", r.ln_majorant.exp())
                } else {
                    format!("e^{:.3}", r.ln_majorant)
                },
                fraction: r.observed as f64 / total,
                partial_sum: r.partial_sum,
            })
            .collect();
        let mut verdicts = BTreeMap::new();
        verdicts.insert("within_shape".into(), a.violations == 0);
        verdicts.insert(
            "violations_explained_by_lamp_twist".into(),
            a.violations == a.violations_with_ep_change,
        );
        verdicts.insert("digit_locality".into(), a.locality_failures == 0);
        verdicts.insert("exact_below_certified".into(), a.exact_above_certified == 0);
        verdicts.insert(
            "finite_majorant_fit".into(),
            a.max_fitted_constant.is_finite(),
        );
        verdicts.insert("explicit_count_bound".into(), a.max_explicit_ratio <= 1.0);
        verdicts.insert("hypotheses_hold".into(), sum.hypotheses_hold);
        Self {
            generator: a.generator.clone(),
            checked: a.checked,
            rows,
            verdicts,
        }
    }
}

/// Exact count as a decimal string.
pub fn big(x: &BigUint) -> String {
    x.to_string()
}
