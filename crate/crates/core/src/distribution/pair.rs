use std::path::Path;

use serde::{Deserialize, Serialize};

use super::continuous::{ContinuousJoint, Density1D};
use super::joint::{require_same_support, DiscreteJoint};
use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisClass, LabeledSample, Orientation, SupportPoint, UnlabeledSample};
use crate::projection::argmin_first;

/// A source or target distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    Discrete(DiscreteJoint),
    Continuous(ContinuousJoint),
}

impl Distribution {
    pub fn sample_labeled(&self, n: usize, seed: u64) -> LabeledSample {
        match self {
            Distribution::Discrete(d) => d.sample_labeled(n, seed),
            Distribution::Continuous(c) => c.sample_labeled(n, seed),
        }
    }

    pub fn sample_unlabeled(&self, n: usize, seed: u64) -> UnlabeledSample {
        match self {
            Distribution::Discrete(d) => d.sample_unlabeled(n, seed),
            Distribution::Continuous(c) => c.sample_unlabeled(n, seed),
        }
    }

    pub fn true_risk(&self, h: &Hypothesis) -> Result<f64> {
        match self {
            Distribution::Discrete(d) => d.true_risk(h),
            Distribution::Continuous(c) => c.true_risk(h),
        }
    }

    pub fn best_in_class(&self, class: &HypothesisClass) -> Result<Hypothesis> {
        match (self, class) {
            (Distribution::Discrete(d), _) => d.best_in_class(class),
            (Distribution::Continuous(c), HypothesisClass::Thresholds(o)) => {
                if *o == c.orientation {
                    Ok(c.target())
                } else {
                    Err(Error::NotEnumerable("threshold orientation differs from the scenario's target".into()))
                }
            }
            (Distribution::Continuous(c), HypothesisClass::Finite(fc)) => {
                let risks = fc.members().iter().map(|h| c.true_risk(h)).collect::<Result<Vec<_>>>()?;
                Ok(fc.members()[argmin_first(&risks)].clone())
            }
        }
    }

    /// Risk of `h` in excess of `best`'s.
    pub fn excess_against(&self, h: &Hypothesis, best: &Hypothesis) -> Result<f64> {
        match self {
            Distribution::Discrete(d) => d.excess_against(h, best),
            Distribution::Continuous(c) => Ok(c.true_risk(h)? - c.true_risk(best)?),
        }
    }

    pub fn excess_risk(&self, h: &Hypothesis, class: &HypothesisClass) -> Result<f64> {
        match self {
            Distribution::Discrete(d) => d.excess_risk(h, class),
            Distribution::Continuous(c) => {
                let best = self.best_in_class(class)?;
                Ok(c.true_risk(h)? - c.true_risk(&best)?)
            }
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteJoint> {
        match self {
            Distribution::Discrete(d) => Some(d),
            Distribution::Continuous(_) => None,
        }
    }

    pub fn as_continuous(&self) -> Option<&ContinuousJoint> {
        match self {
            Distribution::Continuous(c) => Some(c),
            Distribution::Discrete(_) => None,
        }
    }
}

/// Exponents and constants a pair satisfies by construction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certified {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(rename = "C_rho", default, skip_serializing_if = "Option::is_none")]
    pub c_rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(rename = "C_gamma", default, skip_serializing_if = "Option::is_none")]
    pub c_gamma: Option<f64>,
    #[serde(rename = "beta_P", default, skip_serializing_if = "Option::is_none")]
    pub beta_p: Option<f64>,
    #[serde(rename = "beta_Q", default, skip_serializing_if = "Option::is_none")]
    pub beta_q: Option<f64>,
    #[serde(rename = "c_P", default, skip_serializing_if = "Option::is_none")]
    pub c_p: Option<f64>,
    #[serde(rename = "c_Q", default, skip_serializing_if = "Option::is_none")]
    pub c_q: Option<f64>,
    /// Marginal exponent in the reverse direction, Q to P, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_reverse: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferPair {
    pub p: Distribution,
    pub q: Distribution,
    pub certified: Option<Certified>,
}

impl TransferPair {
    pub fn new(p: Distribution, q: Distribution, certified: Option<Certified>) -> Result<Self> {
        match (&p, &q) {
            (Distribution::Discrete(a), Distribution::Discrete(b)) => require_same_support(a, b)?,
            (Distribution::Continuous(_), Distribution::Continuous(_)) => {}
            _ => return Err(Error::Incompatible("cannot pair a discrete and a continuous distribution".into())),
        }
        Ok(Self { p, q, certified })
    }

    pub fn discrete(p: DiscreteJoint, q: DiscreteJoint, certified: Option<Certified>) -> Result<Self> {
        Self::new(Distribution::Discrete(p), Distribution::Discrete(q), certified)
    }

    pub fn continuous(p: ContinuousJoint, q: ContinuousJoint, certified: Option<Certified>) -> Result<Self> {
        Self::new(Distribution::Continuous(p), Distribution::Continuous(q), certified)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.p, Distribution::Discrete(_))
    }

    /// The same pair with source and target exchanged.
    pub fn swapped(&self) -> Self {
        Self { p: self.q.clone(), q: self.p.clone(), certified: None }
    }

    /// Support of a discrete pair.
    pub fn support(&self) -> Option<&[SupportPoint]> {
        self.p.as_discrete().map(DiscreteJoint::support)
    }

    /// Discretizes a continuous pair onto `n_cells` equal cells spanning both
    /// supports. Each cell is a support point at its midpoint with the CDF
    /// mass of the cell; labels follow the target thresholds at the midpoint.
    pub fn discretize(&self, n_cells: usize) -> Result<Self> {
        let (p, q) = match (&self.p, &self.q) {
            (Distribution::Continuous(p), Distribution::Continuous(q)) => (p, q),
            _ => return Err(invalid("only continuous pairs can be discretized")),
        };
        if n_cells == 0 {
            return Err(invalid("need at least one cell"));
        }
        let (pl, ph) = p.density.support();
        let (ql, qh) = q.density.support();
        let (lo, hi) = (pl.min(ql), ph.max(qh));
        let width = (hi - lo) / n_cells as f64;
        let edges: Vec<f64> = (0..=n_cells).map(|i| if i == n_cells { hi } else { lo + width * i as f64 }).collect();
        let support: Vec<SupportPoint> = (0..n_cells)
            .map(|i| SupportPoint { index: i, coordinate: 0.5 * (edges[i] + edges[i + 1]) })
            .collect();
        let joint = |c: &ContinuousJoint| -> Result<DiscreteJoint> {
            let mut mass: Vec<f64> = (0..n_cells).map(|i| c.density.cdf(edges[i + 1]) - c.density.cdf(edges[i])).collect();
            mass[0] += c.density.cdf(edges[0]);
            let total: f64 = mass.iter().sum();
            mass.iter_mut().for_each(|m| *m /= total);
            let eta = support.iter().map(|s| if c.label(s.coordinate) { 1.0 } else { 0.0 }).collect();
            DiscreteJoint::new(support.clone(), mass, eta)
        };
        Self::discrete(joint(p)?, joint(q)?, self.certified.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ScenarioDoc::from_pair(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ScenarioDoc = serde_json::from_str(s)?;
        doc.into_pair()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Continuous scenario description inside a scenario document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub p: Density1D,
    pub q: Density1D,
    pub h_star: f64,
    #[serde(default = "default_orientation")]
    pub orientation: Orientation,
}

fn default_orientation() -> Orientation {
    Orientation::PositiveAbove
}

/// On-disk scenario document. Discrete pairs fill the support vectors;
/// continuous pairs leave them empty and set `densities`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub support: Vec<SupportPoint>,
    #[serde(default)]
    pub mass_p: Vec<f64>,
    #[serde(default)]
    pub eta_p: Vec<f64>,
    #[serde(default)]
    pub mass_q: Vec<f64>,
    #[serde(default)]
    pub eta_q: Vec<f64>,
    #[serde(default)]
    pub certified: Option<Certified>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<DensitySpec>,
}

impl ScenarioDoc {
    pub fn from_pair(pair: &TransferPair) -> Self {
        match (&pair.p, &pair.q) {
            (Distribution::Discrete(p), Distribution::Discrete(q)) => Self {
                support: p.support().to_vec(),
                mass_p: p.mass().to_vec(),
                eta_p: p.eta().to_vec(),
                mass_q: q.mass().to_vec(),
                eta_q: q.eta().to_vec(),
                certified: pair.certified.clone(),
                densities: None,
            },
            (Distribution::Continuous(p), Distribution::Continuous(q)) => Self {
                support: Vec::new(),
                mass_p: Vec::new(),
                eta_p: Vec::new(),
                mass_q: Vec::new(),
                eta_q: Vec::new(),
                certified: pair.certified.clone(),
                densities: Some(DensitySpec {
                    p: p.density.clone(),
                    q: q.density.clone(),
                    h_star: p.h_star,
                    orientation: p.orientation,
                }),
            },
            _ => unreachable!("TransferPair::new rejects mixed pairs"),
        }
    }

    pub fn into_pair(self) -> Result<TransferPair> {
        match self.densities {
            Some(d) => {
                if !self.support.is_empty() {
                    return Err(invalid("scenario sets both a support and densities"));
                }
                TransferPair::continuous(
                    ContinuousJoint::new(d.p, d.h_star, d.orientation)?,
                    ContinuousJoint::new(d.q, d.h_star, d.orientation)?,
                    self.certified,
                )
            }
            None => TransferPair::discrete(
                DiscreteJoint::new(self.support.clone(), self.mass_p, self.eta_p)?,
                DiscreteJoint::new(self.support, self.mass_q, self.eta_q)?,
                self.certified,
            ),
        }
    }
}
