//! Reweighting a source by a finite density family, and choosing among
//! several sources.
//!
//! A density `f` is a weight vector indexed by support point, so only
//! finite-support samples can be reweighted.

use serde::{Deserialize, Serialize};

use crate::cost_adaptive::delta_hat_with;
use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisClass, LabeledSample, Point};
use crate::projection::{argmin_first, Projection};
use crate::transfer_erm::{a_n_dprime, a_n_tprime, argmin_feasible, ratio, union_projection, ConfidenceParams, SampleView};

/// Finite family of unnormalized densities with respect to the source
/// marginal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFamily {
    members: Vec<Vec<f64>>,
    /// Caller-declared capacity `d_p`; defaults to `ceil(log2 |family|)`.
    pseudo_dim: usize,
    #[serde(skip_serializing, default)]
    sup_norms: Vec<f64>,
}

impl DensityFamily {
    pub fn new(members: Vec<Vec<f64>>, pseudo_dim: Option<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("density family must have at least one member"));
        }
        let len = members[0].len();
        for (i, f) in members.iter().enumerate() {
            if f.len() != len {
                return Err(invalid(format!("density {i} has {} weights, expected {len}", f.len())));
            }
            if let Some(w) = f.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(invalid(format!("density {i} has weight {w}; weights must be finite and non-negative")));
            }
        }
        let d_p = pseudo_dim.unwrap_or_else(|| default_pseudo_dim(members.len()));
        let sup_norms = members.iter().map(|f| f.iter().cloned().fold(0.0, f64::max)).collect();
        Ok(Self { members, pseudo_dim: d_p, sup_norms })
    }

    /// The single density `f = 1` on `n` support points.
    pub fn unit(n: usize) -> Self {
        Self::new(vec![vec![1.0; n]], Some(0)).expect("unit weights are valid")
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn pseudo_dim(&self) -> usize {
        self.pseudo_dim
    }

    pub fn sup_norm(&self, i: usize) -> f64 {
        self.sup_norms[i]
    }

    pub fn density(&self, i: usize) -> Density<'_> {
        Density { weights: &self.members[i], sup: self.sup_norms[i] }
    }

    /// Re-validates after deserialization, restoring sup norms.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            members: Vec<Vec<f64>>,
            pseudo_dim: Option<usize>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        Self::new(raw.members, raw.pseudo_dim)
    }
}

/// `ceil(log2 k)`.
pub fn default_pseudo_dim(k: usize) -> usize {
    (usize::BITS - k.saturating_sub(1).leading_zeros()) as usize
}

/// One member of a [`DensityFamily`].
#[derive(Clone, Copy, Debug)]
pub struct Density<'a> {
    weights: &'a [f64],
    sup: f64,
}

impl<'a> Density<'a> {
    pub fn new(weights: &'a [f64]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("weights must be finite and non-negative"));
        }
        Ok(Self { weights, sup: weights.iter().cloned().fold(0.0, f64::max) })
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup
    }

    pub fn at(&self, x: &Point) -> Result<f64> {
        let i = x.index().ok_or_else(|| Error::Incompatible("densities are indexed by support point".into()))?;
        self.weights.get(i).copied().ok_or_else(|| Error::OffSupport(format!("index {i}")))
    }
}

/// `(1/n) sum 1[h(x) != y] f(x)`.
pub fn weighted_risk(s: &LabeledSample, f: &Density<'_>, h: &Hypothesis) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in s.iter() {
        if h.try_predict(x)? != y {
            total += f.at(x)?;
        }
    }
    Ok(ratio(total, s.len()))
}

/// `(1/n) sum 1[h(x) != h2(x)] f(x)^2`.
pub fn weighted_disagreement_f2(s: &LabeledSample, f: &Density<'_>, h: &Hypothesis, h2: &Hypothesis) -> Result<f64> {
    let mut total = 0.0;
    for x in &s.points {
        if h.try_predict(x)? != h2.try_predict(x)? {
            let w = f.at(x)?;
            total += w * w;
        }
    }
    Ok(ratio(total, s.len()))
}

/// Weighted risk of `h` minus that of the weighted ERM on `s`.
pub fn weighted_excess(s: &LabeledSample, f: &Density<'_>, h: &Hypothesis, class: &HypothesisClass) -> Result<f64> {
    let proj = union_projection(class, &[&s.points])?;
    let view = WeightedView::new(&proj, s, f)?;
    Ok(weighted_risk(s, f, h)? - view.risk[view.erm])
}

/// Weighted ERM on `s` over the class projected onto its points.
pub fn weighted_erm(s: &LabeledSample, f: &Density<'_>, class: &HypothesisClass) -> Result<Hypothesis> {
    let proj = union_projection(class, &[&s.points])?;
    Ok(proj.hypothesis(WeightedView::new(&proj, s, f)?.erm))
}

struct WeightedView {
    risk: Vec<f64>,
    f2: Vec<f64>,
    n: usize,
    erm: usize,
}

impl WeightedView {
    fn new(proj: &Projection<'_>, s: &LabeledSample, f: &Density<'_>) -> Result<Self> {
        // validate every point once so the closures below cannot fail
        for x in &s.points {
            f.at(x)?;
        }
        let at = |x: &Point| f.at(x).unwrap_or(0.0);
        let (w0, w1) = proj.weighted_counts(s, at)?;
        let risk: Vec<f64> = proj.scores(&w0, &w1).into_iter().map(|x| ratio(x, s.len())).collect();
        let mut f2 = vec![0.0; proj.cells()];
        for x in &s.points {
            let w = at(x);
            f2[proj.cell_of(x)?] += w * w;
        }
        let erm = argmin_first(&risk);
        Ok(Self { risk, f2, n: s.len(), erm })
    }

    /// `E_f(h) <= c sqrt(P_{f^2}(h != h_f) a) + c |f|_inf a`.
    fn feasible(&self, proj: &Projection<'_>, sup: f64, a: f64, c: f64) -> Vec<bool> {
        if a.is_infinite() {
            return vec![true; self.risk.len()];
        }
        let dis = proj.disagreement_totals(self.erm, &self.f2);
        (0..self.risk.len())
            .map(|m| self.risk[m] - self.risk[self.erm] <= c * (ratio(dis[m], self.n) * a).sqrt() + c * sup * a)
            .collect()
    }
}

fn weighted_delta_on(proj: &Projection<'_>, s_p: &LabeledSample, f: &Density<'_>, u: &[Point], a: f64, c: f64) -> Result<f64> {
    let view = WeightedView::new(proj, s_p, f)?;
    let feasible = view.feasible(proj, f.sup_norm(), a, c);
    let dis = proj.disagreement_totals(view.erm, &proj.point_counts(u)?);
    Ok((0..proj.len()).filter(|&m| feasible[m]).map(|m| ratio(dis[m], u.len())).fold(0.0, f64::max))
}

/// Largest `U_Q`-disagreement with the weighted ERM among members whose
/// weighted excess on `S_P` is within
/// `c sqrt(P_{S_P,f^2}(h != h_f) A''_{n_P}) + c |f|_inf A''_{n_P}`.
pub fn delta_hat_weighted(
    s_p: &LabeledSample,
    f: &Density<'_>,
    u_q: &[Point],
    class: &HypothesisClass,
    cp: &ConfidenceParams,
    d_p: usize,
) -> Result<f64> {
    cp.validate()?;
    let proj = union_projection(class, &[&s_p.points, u_q])?;
    weighted_delta_on(&proj, s_p, f, u_q, a_n_dprime(s_p.len(), class.vc_dim(), d_p, cp.delta), cp.c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Selection {
    pub hypothesis: Hypothesis,
    pub chosen: usize,
    /// The statistic for every family member or source, in order.
    pub statistics: Vec<f64>,
}

/// Picks the density minimizing [`delta_hat_weighted`], then minimizes the
/// target risk subject to the weighted source constraint anchored at the
/// weighted ERM.
pub fn algorithm3(
    s_p: &LabeledSample,
    s_q: &LabeledSample,
    u_q: &[Point],
    family: &DensityFamily,
    class: &HypothesisClass,
    cp: &ConfidenceParams,
) -> Result<Selection> {
    cp.validate()?;
    let a = a_n_dprime(s_p.len(), class.vc_dim(), family.pseudo_dim(), cp.delta);
    let stat_proj = union_projection(class, &[&s_p.points, u_q])?;
    let statistics = (0..family.len())
        .map(|i| weighted_delta_on(&stat_proj, s_p, &family.density(i), u_q, a, cp.c))
        .collect::<Result<Vec<f64>>>()?;
    let chosen = argmin_first(&statistics);
    let f = family.density(chosen);
    let proj = union_projection(class, &[&s_p.points, &s_q.points, u_q])?;
    let view = WeightedView::new(&proj, s_p, &f)?;
    let feasible = view.feasible(&proj, f.sup_norm(), a, cp.c);
    let q = SampleView::new(&proj, s_q)?;
    Ok(Selection { hypothesis: proj.hypothesis(argmin_feasible(&q.risk, &feasible)), chosen, statistics })
}

/// Picks the source minimizing the disagreement statistic with width
/// `A'''` (confidence split over the sources), then minimizes the target
/// risk subject to that source's constraint.
pub fn algorithm4(
    sources: &[LabeledSample],
    s_q: &LabeledSample,
    u_q: &[Point],
    class: &HypothesisClass,
    cp: &ConfidenceParams,
) -> Result<Selection> {
    cp.validate()?;
    if sources.is_empty() {
        return Err(invalid("algorithm 4 needs at least one source"));
    }
    let k = sources.len();
    let d = class.vc_dim();
    let statistics = sources
        .iter()
        .map(|s| delta_hat_with(s, u_q, class, cp.c, a_n_tprime(s.len(), d, cp.delta, k)))
        .collect::<Result<Vec<f64>>>()?;
    let chosen = argmin_first(&statistics);
    let s_i = &sources[chosen];
    let proj = union_projection(class, &[&s_i.points, &s_q.points])?;
    let src = SampleView::new(&proj, s_i)?;
    let feasible = src.feasible(&proj, a_n_tprime(s_i.len(), d, cp.delta, k), cp.c);
    let q = SampleView::new(&proj, s_q)?;
    Ok(Selection { hypothesis: proj.hypothesis(argmin_feasible(&q.risk, &feasible)), chosen, statistics })
}
