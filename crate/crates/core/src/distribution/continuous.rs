use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypothesis::{threshold_label, Hypothesis, LabeledSample, Orientation, Point, UnlabeledSample};
use crate::rng::rng_from_seed;

/// Parametric densities on the line with closed-form CDF and inverse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density1D {
    Uniform { lo: f64, hi: f64 },
    /// Mass `left_mass` on `[center - left_width, center)` with
    /// `P([center - s, center)) = left_mass * (s / left_width)^left_exponent`,
    /// and the rest on `(center, center + right_width]` likewise.
    TwoSidedPower {
        center: f64,
        left_width: f64,
        right_width: f64,
        left_mass: f64,
        left_exponent: f64,
        right_exponent: f64,
    },
}

impl Density1D {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Density1D::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(invalid(format!("uniform density needs lo < hi, got [{lo}, {hi}]")));
                }
            }
            Density1D::TwoSidedPower { center, left_width, right_width, left_mass, left_exponent, right_exponent } => {
                let ok = center.is_finite()
                    && left_width > 0.0
                    && right_width > 0.0
                    && left_width.is_finite()
                    && right_width.is_finite()
                    && (0.0..=1.0).contains(&left_mass)
                    && left_exponent > 0.0
                    && right_exponent > 0.0;
                if !ok {
                    return Err(invalid("two-sided power density parameters out of range"));
                }
            }
        }
        Ok(())
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Density1D::Uniform { lo, hi } => (lo, hi),
            Density1D::TwoSidedPower { center, left_width, right_width, .. } => (center - left_width, center + right_width),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Density1D::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Density1D::TwoSidedPower { center, left_width, right_width, left_mass, left_exponent, right_exponent } => {
                if x < center {
                    let s = ((center - x) / left_width).min(1.0);
                    left_mass * (1.0 - s.powf(left_exponent))
                } else {
                    let s = ((x - center) / right_width).min(1.0);
                    left_mass + (1.0 - left_mass) * s.powf(right_exponent)
                }
            }
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            Density1D::Uniform { lo, hi } => lo + u * (hi - lo),
            Density1D::TwoSidedPower { center, left_width, right_width, left_mass, left_exponent, right_exponent } => {
                if u < left_mass {
                    center - left_width * (1.0 - u / left_mass).powf(1.0 / left_exponent)
                } else {
                    center + right_width * ((u - left_mass) / (1.0 - left_mass)).powf(1.0 / right_exponent)
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        match *self {
            Density1D::Uniform { lo, hi } => 1.0 / (hi - lo),
            Density1D::TwoSidedPower { center, left_width, right_width, left_mass, left_exponent, right_exponent } => {
                if x < center {
                    let s = (center - x) / left_width;
                    left_mass * left_exponent * s.powf(left_exponent - 1.0) / left_width
                } else {
                    let s = (x - center) / right_width;
                    (1.0 - left_mass) * right_exponent * s.powf(right_exponent - 1.0) / right_width
                }
            }
        }
    }

    /// Mass of the interval `(a, b]`.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            0.0
        } else {
            (self.cdf(b) - self.cdf(a)).max(0.0)
        }
    }
}

/// Noiseless threshold scenario: `X` from a density, `Y = h*(X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousJoint {
    pub density: Density1D,
    pub h_star: f64,
    pub orientation: Orientation,
}

impl ContinuousJoint {
    pub fn new(density: Density1D, h_star: f64, orientation: Orientation) -> Result<Self> {
        density.validate()?;
        if !h_star.is_finite() {
            return Err(invalid("h_star must be finite"));
        }
        Ok(Self { density, h_star, orientation })
    }

    pub fn target(&self) -> Hypothesis {
        Hypothesis::threshold(self.h_star, self.orientation)
    }

    pub fn label(&self, x: f64) -> bool {
        threshold_label(x, self.h_star, self.orientation)
    }

    pub fn sample_labeled(&self, n: usize, seed: u64) -> LabeledSample {
        let mut rng = rng_from_seed(seed);
        let points: Vec<Point> = (0..n).map(|_| Point::Real(self.density.inverse_cdf(rng.gen::<f64>()))).collect();
        let labels = points.iter().map(|p| self.label(p.coord())).collect();
        LabeledSample { points, labels, seed }
    }

    pub fn sample_unlabeled(&self, n: usize, seed: u64) -> UnlabeledSample {
        let mut rng = rng_from_seed(seed);
        let points = (0..n).map(|_| Point::Real(self.density.inverse_cdf(rng.gen::<f64>()))).collect();
        UnlabeledSample { points, seed }
    }

    /// Marginal mass of `{h != g}` for two threshold hypotheses.
    pub fn disagreement(&self, h: &Hypothesis, g: &Hypothesis) -> Result<f64> {
        match (h, g) {
            (Hypothesis::Threshold { t: t1, orientation: o1 }, Hypothesis::Threshold { t: t2, orientation: o2 }) => {
                let between = self.density.interval_mass(t1.min(*t2), t1.max(*t2));
                Ok(if o1 == o2 { between } else { 1.0 - between })
            }
            _ => Err(Error::Incompatible("continuous scenarios evaluate threshold hypotheses only".into())),
        }
    }

    /// Risk of `h`; the target has risk 0, so this is also the excess risk.
    pub fn true_risk(&self, h: &Hypothesis) -> Result<f64> {
        self.disagreement(h, &self.target())
    }
}
