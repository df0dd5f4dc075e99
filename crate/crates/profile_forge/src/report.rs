use num_rational::BigRational;
use serde::Serialize;

use crate::affine::PiecewiseAffine;
use crate::profile::{to_f64, ProfileSpec};
use crate::sequences::{ln_big, Sequences};

/// Tail ratios at or above this count as divergent.
pub const RATIO_THRESHOLD: f64 = 1.0 - 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SeriesVerdict {
    /// First index of the series.
    pub start: usize,
    pub ln_terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Largest consecutive term ratio over the second half of the terms.
    pub tail_ratio: f64,
    pub summable: bool,
}

impl SeriesVerdict {
    pub fn from_ln_terms(start: usize, ln_terms: Vec<f64>) -> Self {
        let mut partial_sums = Vec::with_capacity(ln_terms.len());
        let mut acc = 0.0;
        for &t in &ln_terms {
            acc += t.exp();
            partial_sums.push(acc);
        }
        let half = ln_terms.len() / 2;
        let tail_ratio = ln_terms[half.min(ln_terms.len())..]
            .windows(2)
            .map(|w| {
                if w[1] == f64::NEG_INFINITY {
                    0.0
                } else {
                    (w[1] - w[0]).exp()
                }
            })
            .fold(0.0, f64::max);
        Self {
            start,
            ln_terms,
            partial_sums,
            tail_ratio,
            summable: tail_ratio < RATIO_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub epsilon: f64,
    pub x_range: (f64, f64),
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    /// `ρ(κ^m) κ^{-m}`, `m = 0..=M`.
    pub cursor_series: SeriesVerdict,
    /// `l_m exp(-l_{m-1})`, `m = 1..=M`.
    pub lamp_series: SeriesVerdict,
    /// Exponent of `ρ ∘ ρ_bij⁻¹` for the target sequences, when given.
    pub exponent: Option<ExponentFit>,
}

pub fn cursor_series(spec: &ProfileSpec, kappa: u64, m_max: usize) -> SeriesVerdict {
    let lk = (kappa as f64).ln();
    let terms = (0..=m_max)
        .map(|m| spec.ln_eval_at_exp(m as f64 * lk) - m as f64 * lk)
        .collect();
    SeriesVerdict::from_ln_terms(0, terms)
}

pub fn lamp_series(seq: &Sequences) -> SeriesVerdict {
    let terms = (1..=seq.top())
        .map(|m| {
            let prev = num_traits::ToPrimitive::to_f64(&seq.l[m - 1]).unwrap_or(f64::INFINITY);
            ln_big(&seq.l[m]) - prev
        })
        .collect();
    SeriesVerdict::from_ln_terms(1, terms)
}

/// Least-squares slope of `ln ρ(ρ_bij⁻¹(y))` against `ln y` on a geometric grid.
pub fn fit_exponent(
    spec: &ProfileSpec,
    bij: &PiecewiseAffine,
    y_lo: f64,
    y_hi: f64,
    samples: usize,
) -> ExponentFit {
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for i in 0..samples {
        let y = y_lo * (y_hi / y_lo).powf(i as f64 / (samples - 1).max(1) as f64);
        let Some(yr) = BigRational::from_float(y) else {
            continue;
        };
        let Ok(x) = bij.inverse(&yr) else { continue };
        xs.push(y.ln());
        ys.push(spec.eval(to_f64(&x)).ln());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = cov / var;
    ExponentFit {
        slope,
        epsilon: 1.0 - slope,
        x_range: (y_lo, y_hi),
        samples: xs.len(),
    }
}

/// Summability verdicts for a source profile and its sequences, and the exponent
/// of the source profile composed with the target's bijective companion.
pub fn hypothesis_report(
    spec: &ProfileSpec,
    seq: &Sequences,
    m_max: usize,
    target: Option<(&Sequences, &BigRational)>,
) -> HypothesisReport {
    let exponent = target.and_then(|(t, delta)| {
        let bij = t.rho_bij(delta).ok()?;
        let hi = bij
            .image_end()
            .map(|e| to_f64(&e))
            .unwrap_or(1e12)
            .min(1e12);
        (hi > 4.0).then(|| fit_exponent(spec, &bij, 2.0, hi, 200))
    });
    HypothesisReport {
        cursor_series: cursor_series(spec, seq.kappa, m_max),
        lamp_series: lamp_series(seq),
        exponent,
    }
}
