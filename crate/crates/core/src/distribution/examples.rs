//! The four illustrative transfer scenarios.
//!
//! 1. Non-overlapping supports: two concentric rings of points sharing the
//!    same angles, homogeneous halfplane labels (finite surrogate).
//! 2. `P_X = U[0, 2]`, `Q_X = U[0, 1]`, `h* = 1[x > 1/2]`.
//! 3. `Q_X = U[-1, 1]`; `P_X` uniform on `[-1, 0)` with half its mass and
//!    with CDF `t^gamma` on `(0, 1]` for the other half; `h* = 1[x > 0]`.
//! 4. `P_X` with density proportional to `|t|^{gamma - 1}` on `[-1, 1]`,
//!    `Q_X = U[-1, 1]`, `h* = 1[x > 0]`.

use std::collections::HashSet;
use std::f64::consts::PI;

use super::continuous::{ContinuousJoint, Density1D};
use super::joint::DiscreteJoint;
use super::pair::{Certified, TransferPair};
use crate::error::{invalid, Result};
use crate::hypothesis::{FiniteClass, Hypothesis, HypothesisClass, Orientation, SupportPoint};

#[derive(Clone, Debug)]
pub struct Scenario {
    pub pair: TransferPair,
    pub class: HypothesisClass,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExampleParams {
    /// Marginal exponent for examples 3 and 4.
    pub gamma: Option<f64>,
    /// Points per ring for example 1.
    pub ring_points: usize,
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self { gamma: None, ring_points: 16 }
    }
}

pub fn example_scenario(id: u8, params: &ExampleParams) -> Result<Scenario> {
    match id {
        1 => rings(params.ring_points),
        2 => example2(),
        3 => example3(params.gamma.unwrap_or(2.0)),
        4 => example4(params.gamma.unwrap_or(0.5)),
        _ => Err(invalid(format!("no example scenario {id}; choose 1 to 4"))),
    }
}

fn noiseless_cert() -> Certified {
    Certified { beta_p: Some(1.0), beta_q: Some(1.0), c_p: Some(1.0), c_q: Some(1.0), ..Default::default() }
}

fn threshold(density: Density1D, t: f64) -> Result<ContinuousJoint> {
    ContinuousJoint::new(density, t, Orientation::PositiveAbove)
}

fn rings(k: usize) -> Result<Scenario> {
    if k < 4 {
        return Err(invalid("example 1 needs at least 4 points per ring"));
    }
    // angles offset by half a step keep every point off the boundary of the
    // halfplanes enumerated below
    let angle = |j: usize| 2.0 * PI * (j as f64 + 0.5) / k as f64;
    let n = 2 * k;
    let support: Vec<SupportPoint> = (0..n).map(|i| SupportPoint { index: i, coordinate: angle(i % k) }).collect();
    let labels_for = |phi: f64| -> Vec<bool> { (0..n).map(|i| (angle(i % k) - phi).cos() > 0.0).collect() };
    let mut seen = HashSet::new();
    let mut members = Vec::new();
    for s in 0..4 * k {
        let l = labels_for(2.0 * PI * (s as f64 + 0.5) / (4 * k) as f64);
        if seen.insert(l.clone()) {
            members.push(Hypothesis::Labels(l));
        }
    }
    let star = labels_for(PI / (4 * k) as f64);
    let eta: Vec<f64> = star.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let inner: Vec<f64> = (0..n).map(|i| if i < k { 1.0 / k as f64 } else { 0.0 }).collect();
    let outer: Vec<f64> = (0..n).map(|i| if i < k { 0.0 } else { 1.0 / k as f64 }).collect();
    let cert = Certified { rho: Some(1.0), c_rho: Some(1.0), gamma: Some(1.0), c_gamma: Some(1.0), ..noiseless_cert() };
    let pair = TransferPair::discrete(
        DiscreteJoint::new(support.clone(), inner, eta.clone())?,
        DiscreteJoint::new(support, outer, eta)?,
        Some(cert),
    )?;
    Ok(Scenario { pair, class: FiniteClass::new(members, 2)?.into() })
}

fn example2() -> Result<Scenario> {
    let cert = Certified { rho: Some(1.0), c_rho: Some(2.0), gamma: Some(1.0), c_gamma: Some(2.0), ..noiseless_cert() };
    let pair = TransferPair::continuous(
        threshold(Density1D::Uniform { lo: 0.0, hi: 2.0 }, 0.5)?,
        threshold(Density1D::Uniform { lo: 0.0, hi: 1.0 }, 0.5)?,
        Some(cert),
    )?;
    Ok(Scenario { pair, class: HypothesisClass::Thresholds(Orientation::PositiveAbove) })
}

/// Source density of example 3.
pub fn example3_source(gamma: f64) -> Density1D {
    Density1D::TwoSidedPower {
        center: 0.0,
        left_width: 1.0,
        right_width: 1.0,
        left_mass: 0.5,
        left_exponent: 1.0,
        right_exponent: gamma,
    }
}

fn example3(gamma: f64) -> Result<Scenario> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(invalid(format!("example 3 needs gamma >= 1, got {gamma}")));
    }
    let cert = Certified {
        rho: Some(gamma),
        c_rho: Some(1.0),
        gamma: Some(gamma),
        c_gamma: Some(1.0),
        gamma_reverse: Some(1.0),
        ..noiseless_cert()
    };
    let pair = TransferPair::continuous(
        threshold(example3_source(gamma), 0.0)?,
        threshold(Density1D::Uniform { lo: -1.0, hi: 1.0 }, 0.0)?,
        Some(cert),
    )?;
    Ok(Scenario { pair, class: HypothesisClass::Thresholds(Orientation::PositiveAbove) })
}

fn example4(gamma: f64) -> Result<Scenario> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid(format!("example 4 needs 0 < gamma < 1, got {gamma}")));
    }
    let c = 2f64.powf(1.0 - gamma);
    let cert = Certified { rho: Some(gamma), c_rho: Some(c), gamma: Some(gamma), c_gamma: Some(c), ..noiseless_cert() };
    let p = Density1D::TwoSidedPower {
        center: 0.0,
        left_width: 1.0,
        right_width: 1.0,
        left_mass: 0.5,
        left_exponent: gamma,
        right_exponent: gamma,
    };
    let pair = TransferPair::continuous(threshold(p, 0.0)?, threshold(Density1D::Uniform { lo: -1.0, hi: 1.0 }, 0.0)?, Some(cert))?;
    Ok(Scenario { pair, class: HypothesisClass::Thresholds(Orientation::PositiveAbove) })
}
