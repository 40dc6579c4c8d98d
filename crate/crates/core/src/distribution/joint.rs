use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisClass, LabeledSample, Point, SupportPoint, UnlabeledSample};
use crate::projection::{argmin_first, Projection};
use crate::rng::rng_from_seed;

/// Joint distribution on a finite support: marginal masses and regression
/// values `eta(x) = E[Y | x]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteJoint {
    support: Vec<SupportPoint>,
    mass: Vec<f64>,
    eta: Vec<f64>,
}

impl DiscreteJoint {
    pub fn new(support: Vec<SupportPoint>, mass: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(invalid("empty support"));
        }
        if mass.len() != support.len() || eta.len() != support.len() {
            return Err(invalid(format!(
                "support has {} points, mass {}, eta {}",
                support.len(),
                mass.len(),
                eta.len()
            )));
        }
        if support.iter().enumerate().any(|(i, p)| p.index != i) {
            return Err(invalid("support indices must be 0, 1, 2, ... in order"));
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(invalid("masses must be finite and non-negative"));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("masses sum to {total}, not 1")));
        }
        if eta.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(invalid("eta values must lie in [0, 1]"));
        }
        Ok(Self { support, mass, eta })
    }

    /// Support `x_i` with coordinate `i`.
    pub fn indexed_support(n: usize) -> Vec<SupportPoint> {
        (0..n).map(|i| SupportPoint { index: i, coordinate: i as f64 }).collect()
    }

    pub fn support(&self) -> &[SupportPoint] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn sample_labeled(&self, n: usize, seed: u64) -> LabeledSample {
        let mut rng = rng_from_seed(seed);
        let pick = WeightedIndex::new(&self.mass).expect("validated masses");
        let mut points = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let i = pick.sample(&mut rng);
            points.push(Point::Support(self.support[i]));
            labels.push(rng.gen::<f64>() < self.eta[i]);
        }
        LabeledSample { points, labels, seed }
    }

    pub fn sample_unlabeled(&self, n: usize, seed: u64) -> UnlabeledSample {
        let mut rng = rng_from_seed(seed);
        let pick = WeightedIndex::new(&self.mass).expect("validated masses");
        let points = (0..n).map(|_| Point::Support(self.support[pick.sample(&mut rng)])).collect();
        UnlabeledSample { points, seed }
    }

    pub fn true_risk(&self, h: &Hypothesis) -> Result<f64> {
        let mut r = 0.0;
        for (i, p) in self.support.iter().enumerate() {
            r += if h.try_predict(&Point::Support(*p))? {
                self.mass[i] * (1.0 - self.eta[i])
            } else {
                self.mass[i] * self.eta[i]
            };
        }
        Ok(r)
    }

    /// Bayes labels `1[eta > 1/2]`.
    pub fn bayes_labels(&self) -> Vec<bool> {
        self.eta.iter().map(|&e| e > 0.5).collect()
    }

    pub(crate) fn projection<'a>(&self, class: &'a HypothesisClass) -> Result<Projection<'a>> {
        let proj = Projection::new(class, Some(&self.support), &[])?;
        Ok(proj)
    }

    /// Per-cell weights for the risk of each projected member.
    pub(crate) fn risk_weights(&self, proj: &Projection<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut a = vec![0.0; proj.cells()];
        let mut b = vec![0.0; proj.cells()];
        for (i, p) in self.support.iter().enumerate() {
            let c = proj.cell_of(&Point::Support(*p))?;
            a[c] += self.mass[i] * (1.0 - self.eta[i]);
            b[c] += self.mass[i] * self.eta[i];
        }
        Ok((a, b))
    }

    /// Per-cell marginal mass.
    pub(crate) fn cell_mass(&self, proj: &Projection<'_>) -> Result<Vec<f64>> {
        let mut m = vec![0.0; proj.cells()];
        for (i, p) in self.support.iter().enumerate() {
            m[proj.cell_of(&Point::Support(*p))?] += self.mass[i];
        }
        Ok(m)
    }

    /// Exact excess risk of every projected member relative to the best
    /// member. Summed over disagreement cells, so the best member gets
    /// exactly 0. Returns `(excess, best)`.
    pub(crate) fn excess_table(&self, proj: &Projection<'_>) -> Result<(Vec<f64>, usize)> {
        let (ra, rb) = self.risk_weights(proj)?;
        let best = argmin_first(&proj.scores(&ra, &rb));
        let mut a = vec![0.0; proj.cells()];
        let mut b = vec![0.0; proj.cells()];
        for c in 0..proj.cells() {
            // switching cell c away from the best member's label
            if proj.label(best, c) {
                b[c] = rb[c] - ra[c];
            } else {
                a[c] = ra[c] - rb[c];
            }
        }
        Ok((proj.scores(&a, &b), best))
    }

    pub fn best_in_class(&self, class: &HypothesisClass) -> Result<Hypothesis> {
        let proj = self.projection(class)?;
        let (ra, rb) = self.risk_weights(&proj)?;
        Ok(proj.hypothesis(argmin_first(&proj.scores(&ra, &rb))))
    }

    pub fn excess_risk(&self, h: &Hypothesis, class: &HypothesisClass) -> Result<f64> {
        self.excess_against(h, &self.best_in_class(class)?)
    }

    /// `R(h) - R(best)`, summed over the points where they disagree.
    pub fn excess_against(&self, h: &Hypothesis, best: &Hypothesis) -> Result<f64> {
        let mut e = 0.0;
        for (i, p) in self.support.iter().enumerate() {
            let x = Point::Support(*p);
            let (l, lb) = (h.try_predict(&x)?, best.try_predict(&x)?);
            if l != lb {
                let d = self.mass[i] * (1.0 - 2.0 * self.eta[i]);
                e += if l { d } else { -d };
            }
        }
        Ok(e)
    }
}

pub(crate) fn require_same_support(p: &DiscreteJoint, q: &DiscreteJoint) -> Result<()> {
    if p.support != q.support {
        return Err(Error::Incompatible("P and Q live on different supports".into()));
    }
    Ok(())
}
