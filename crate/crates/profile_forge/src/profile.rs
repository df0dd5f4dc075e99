use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::{ProfileError, Result};

/// A profile `ρ : [1, ∞) → [1, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileSpec {
    /// `ρ(x) = x`.
    Identity,
    /// `ρ(x) = x^{1/(1+α)}` with `α = num/den`.
    Power { num: u32, den: u32 },
    /// `L^{∘r}` with `L(x) = 1 + ln x`, which is `≃ log^{∘r}` and maps `[1, ∞)` into itself.
    IteratedLog { r: u32 },
    /// Linear interpolation of `(x, ρ(x))` points starting at `x = 1`, extended by
    /// the last segment's line.
    Tabulated { points: Vec<(f64, f64)> },
}

fn ln1p_log(x: f64) -> f64 {
    1.0 + x.ln()
}

impl ProfileSpec {
    pub fn power(num: u32, den: u32) -> Self {
        ProfileSpec::Power { num, den }
    }

    /// `α` of a power profile.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            ProfileSpec::Power { num, den } => Some(*num as f64 / *den as f64),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProfileSpec::Identity => Ok(()),
            ProfileSpec::Power { num, den } => {
                if *den == 0 || *num == 0 {
                    Err(ProfileError::Spec(format!(
                        "power exponent {num}/{den} must be positive"
                    )))
                } else {
                    Ok(())
                }
            }
            ProfileSpec::IteratedLog { r } => {
                if *r == 0 {
                    Err(ProfileError::Spec("iterated log needs r >= 1".into()))
                } else {
                    Ok(())
                }
            }
            ProfileSpec::Tabulated { .. } => self.tabulated_class_check(),
        }
    }

    fn exact_points(&self) -> Option<Vec<(BigRational, BigRational)>> {
        match self {
            ProfileSpec::Tabulated { points } => points
                .iter()
                .map(|&(x, y)| Some((BigRational::from_float(x)?, BigRational::from_float(y)?)))
                .collect(),
            _ => None,
        }
    }

    /// Membership in the class, decided exactly: on each segment `ρ = a + b x`
    /// lies in the class iff `b >= 0` and `a >= 0`.
    fn tabulated_class_check(&self) -> Result<()> {
        let pts = self
            .exact_points()
            .ok_or_else(|| ProfileError::Spec("tabulated points must be finite".into()))?;
        if pts.len() < 2 {
            return Err(ProfileError::Spec("need at least two points".into()));
        }
        if pts[0].0 != BigRational::one() {
            return Err(ProfileError::Spec("first point must sit at x = 1".into()));
        }
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            if x1 <= x0 {
                return Err(ProfileError::Spec("abscissae must increase".into()));
            }
            if y0 < &BigRational::one() {
                return Err(ProfileError::NotInClass(format!("value {y0} below 1")));
            }
            let slope = (y1 - y0) / (x1 - x0);
            let intercept = y0 - &slope * x0;
            if slope.is_negative() {
                return Err(ProfileError::NotInClass(format!(
                    "decreasing on [{x0}, {x1}]"
                )));
            }
            if intercept.is_negative() {
                return Err(ProfileError::NotInClass(format!(
                    "x/ρ(x) decreasing on [{x0}, {x1}]"
                )));
            }
        }
        Ok(())
    }

    /// Exact value when the family allows it.
    pub fn eval_exact(&self, x: &BigRational) -> Option<BigRational> {
        let x = x.max(&BigRational::one()).clone();
        match self {
            ProfileSpec::Identity => Some(x),
            ProfileSpec::Tabulated { .. } => {
                let pts = self.exact_points()?;
                let seg = pts
                    .windows(2)
                    .position(|w| x <= w[1].0)
                    .unwrap_or(pts.len() - 2);
                let ((x0, y0), (x1, y1)) = (&pts[seg], &pts[seg + 1]);
                Some(y0 + (y1 - y0) * (&x - x0) / (x1 - x0))
            }
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.max(1.0);
        match self {
            ProfileSpec::Identity => x,
            ProfileSpec::Power { num, den } => x.powf(*den as f64 / (*num + *den) as f64),
            ProfileSpec::IteratedLog { r } => (0..*r).fold(x, |v, _| ln1p_log(v)),
            ProfileSpec::Tabulated { points } => {
                let seg = points
                    .windows(2)
                    .position(|w| x <= w[1].0)
                    .unwrap_or(points.len() - 2);
                let ((x0, y0), (x1, y1)) = (points[seg], points[seg + 1]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// `ln ρ(e^s)` for large arguments where `e^s` overflows.
    pub fn ln_eval_at_exp(&self, s: f64) -> f64 {
        match self {
            ProfileSpec::Identity => s,
            ProfileSpec::Power { num, den } => s * (*den as f64 / (*num + *den) as f64),
            ProfileSpec::IteratedLog { r } => {
                let first = 1.0 + s;
                (1..*r).fold(first, |v, _| ln1p_log(v)).ln()
            }
            ProfileSpec::Tabulated { .. } => {
                if s < 700.0 {
                    self.eval(s.exp()).ln()
                } else {
                    // Linear tail: ρ ≈ slope · x.
                    let slope = self.tail_slope();
                    if slope > 0.0 {
                        slope.ln() + s
                    } else {
                        self.eval(f64::MAX).ln()
                    }
                }
            }
        }
    }

    fn tail_slope(&self) -> f64 {
        match self {
            ProfileSpec::Tabulated { points } => {
                let n = points.len();
                (points[n - 1].1 - points[n - 2].1) / (points[n - 1].0 - points[n - 2].0)
            }
            _ => 0.0,
        }
    }

    /// `f(x) = x / ρ(x)`.
    pub fn companion(&self, x: f64) -> f64 {
        x / self.eval(x)
    }

    /// Smallest `x >= 1` with `ρ(x) >= y`, or `None` if `ρ` stays below `y`.
    pub fn generalized_inverse(&self, y: f64) -> Option<f64> {
        if y <= self.eval(1.0) {
            return Some(1.0);
        }
        match self {
            ProfileSpec::Identity => Some(y),
            ProfileSpec::Power { num, den } => Some(y.powf((*num + *den) as f64 / *den as f64)),
            ProfileSpec::IteratedLog { r } => Some((0..*r).fold(y, |v, _| (v - 1.0).exp())),
            ProfileSpec::Tabulated { points } => {
                for w in points.windows(2) {
                    let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                    if y <= y1 && y1 > y0 {
                        return Some(x0 + (y - y0) * (x1 - x0) / (y1 - y0));
                    }
                }
                let slope = self.tail_slope();
                let (xl, yl) = *points.last().unwrap();
                (slope > 0.0).then(|| xl + (y - yl) / slope)
            }
        }
    }

    /// Sampled check of both monotonicity conditions and `ρ(x) <= ρ(cx) <= cρ(x)`.
    pub fn check_class_on_grid(&self, x_max: f64, samples: usize) -> Result<()> {
        self.validate()?;
        let tol = 1e-12;
        let grid: Vec<f64> = (0..=samples)
            .map(|i| x_max.powf(i as f64 / samples as f64))
            .collect();
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            if self.eval(b) < self.eval(a) * (1.0 - tol) {
                return Err(ProfileError::NotInClass(format!(
                    "decreasing between {a} and {b}"
                )));
            }
            if self.companion(b) < self.companion(a) * (1.0 - tol) {
                return Err(ProfileError::NotInClass(format!(
                    "x/ρ(x) decreasing between {a} and {b}"
                )));
            }
        }
        for &x in grid.iter().step_by(samples.div_ceil(16).max(1)) {
            for c in [1.5, 2.0, 7.0, 100.0] {
                let (rx, rcx) = (self.eval(x), self.eval(c * x));
                if rcx < rx * (1.0 - tol) || rcx > c * rx * (1.0 + tol) {
                    return Err(ProfileError::NotInClass(format!(
                        "scaling inequality fails at x={x}, c={c}"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn to_f64(x: &BigRational) -> f64 {
    x.to_f64()
        .unwrap_or(if x.is_positive() { f64::INFINITY } else { 0.0 })
}
