use num_rational::BigRational;
use num_traits::Signed;

use crate::{ProfileError, Result};

/// Linear interpolation of increasing points, optionally extended past the last
/// point with a fixed slope.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffine {
    points: Vec<(BigRational, BigRational)>,
    tail_slope: Option<BigRational>,
}

impl PiecewiseAffine {
    /// Requires strictly increasing abscissae and ordinates.
    pub fn new(
        points: Vec<(BigRational, BigRational)>,
        tail_slope: Option<BigRational>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(ProfileError::Spec("no breakpoints".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(ProfileError::Spec(format!(
                    "breakpoints not increasing at x = {}",
                    w[0].0
                )));
            }
        }
        if tail_slope.as_ref().is_some_and(|s| !s.is_positive()) {
            return Err(ProfileError::Spec("tail slope must be positive".into()));
        }
        if points.len() == 1 && tail_slope.is_none() {
            return Err(ProfileError::Spec("a single point needs a tail".into()));
        }
        Ok(Self { points, tail_slope })
    }

    pub fn points(&self) -> &[(BigRational, BigRational)] {
        &self.points
    }

    pub fn domain(&self) -> (BigRational, Option<BigRational>) {
        let end = self
            .tail_slope
            .is_none()
            .then(|| self.points.last().unwrap().0.clone());
        (self.points[0].0.clone(), end)
    }

    pub fn image_end(&self) -> Option<BigRational> {
        self.tail_slope
            .is_none()
            .then(|| self.points.last().unwrap().1.clone())
    }

    fn interpolate(
        points: &[(BigRational, BigRational)],
        tail: Option<BigRational>,
        x: &BigRational,
        swap: bool,
    ) -> Result<BigRational> {
        let coord = |p: &(BigRational, BigRational)| {
            if swap {
                (p.1.clone(), p.0.clone())
            } else {
                p.clone()
            }
        };
        let (x0, _) = coord(&points[0]);
        if x < &x0 {
            return Err(ProfileError::Beyond(format!("{x} below {x0}")));
        }
        for w in points.windows(2) {
            let ((a, fa), (b, fb)) = (coord(&w[0]), coord(&w[1]));
            if x <= &b {
                return Ok(&fa + (&fb - &fa) * (x - &a) / (&b - &a));
            }
        }
        let (xl, yl) = coord(points.last().unwrap());
        match tail {
            Some(s) if x >= &xl => Ok(yl + s * (x - xl)),
            _ => Err(ProfileError::Beyond(format!("{x} beyond {xl}"))),
        }
    }

    pub fn eval(&self, x: &BigRational) -> Result<BigRational> {
        Self::interpolate(&self.points, self.tail_slope.clone(), x, false)
    }

    pub fn inverse(&self, y: &BigRational) -> Result<BigRational> {
        let tail = self.tail_slope.as_ref().map(|s| s.recip());
        Self::interpolate(&self.points, tail, y, true)
    }
}
