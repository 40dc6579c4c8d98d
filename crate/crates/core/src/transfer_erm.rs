//! Confidence widths and the constrained ERM procedures.
//!
//! All procedures project the class onto the union of the sample points, so
//! every empirical quantity is an exact ratio of counts. Ties go to the
//! lowest enumeration index.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hypothesis::{empirical_disagreement, empirical_risk, Hypothesis, HypothesisClass, LabeledSample, Point};
use crate::projection::{argmin_first, LabeledCounts, Projection};
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceParams {
    pub c: f64,
    pub delta: f64,
}

impl Default for ConfidenceParams {
    fn default() -> Self {
        Self { c: 1.0, delta: 0.1 }
    }
}

impl ConfidenceParams {
    pub fn new(c: f64, delta: f64) -> Result<Self> {
        let cp = Self { c, delta };
        cp.validate()?;
        Ok(cp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid(format!("c must be positive, got {}", self.c)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }
}

fn vc_term(n: usize, d: usize) -> f64 {
    let (n, d) = (n as f64, d as f64);
    if d == 0.0 {
        0.0
    } else {
        d / n * (n.max(d) / d).ln()
    }
}

/// `A_n = (d/n) ln(max{n, d}/d) + (1/n) ln(1/delta)`; `+inf` at `n = 0`.
pub fn a_n(n: usize, d_h: usize, delta: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    vc_term(n, d_h) + (1.0 / delta).ln() / n as f64
}

/// `A'_n`: as [`a_n`] with `ln(2 n^2 / delta)` in the confidence term.
pub fn a_n_prime(n: usize, d_h: usize, delta: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    vc_term(n, d_h) + (2.0 * nf * nf / delta).ln() / nf
}

/// `A''_n`: as [`a_n`] with capacity `d_h + d_p`.
pub fn a_n_dprime(n: usize, d_h: usize, d_p: usize, delta: f64) -> f64 {
    a_n(n, d_h + d_p, delta)
}

/// `A'''_n`: as [`a_n`] with `delta / sources`.
pub fn a_n_tprime(n: usize, d_h: usize, delta: f64, sources: usize) -> f64 {
    a_n(n, d_h, delta / sources.max(1) as f64)
}

/// `risk_h - risk_g <= c sqrt(dis * a) + c a`; vacuous when `a` is infinite.
pub fn constraint_holds(risk_h: f64, risk_g: f64, dis: f64, a: f64, c: f64) -> bool {
    a.is_infinite() || risk_h - risk_g <= c * (dis * a).sqrt() + c * a
}

pub(crate) fn ratio(x: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        x / n as f64
    }
}

/// Empirical risks and ERM of one sample over a projection.
pub(crate) struct SampleView {
    pub counts: LabeledCounts,
    pub risk: Vec<f64>,
    pub erm: usize,
}

impl SampleView {
    pub fn new(proj: &Projection<'_>, s: &LabeledSample) -> Result<Self> {
        let counts = proj.labeled_counts(s)?;
        let risk: Vec<f64> = proj.risk_totals(&counts).into_iter().map(|x| ratio(x, counts.n)).collect();
        let erm = argmin_first(&risk);
        Ok(Self { counts, risk, erm })
    }

    /// Feasibility of each member under the constraint anchored at this
    /// sample's ERM with width `a`.
    pub fn feasible(&self, proj: &Projection<'_>, a: f64, c: f64) -> Vec<bool> {
        if a.is_infinite() {
            return vec![true; self.risk.len()];
        }
        let dis = proj.disagreement_totals(self.erm, &self.counts.totals());
        (0..self.risk.len())
            .map(|m| constraint_holds(self.risk[m], self.risk[self.erm], ratio(dis[m], self.counts.n), a, c))
            .collect()
    }
}

/// Lowest-index minimizer of `objective` among feasible members.
pub(crate) fn argmin_feasible(objective: &[f64], feasible: &[bool]) -> usize {
    let mut best: Option<usize> = None;
    for m in 0..objective.len() {
        if feasible[m] && best.map_or(true, |b| objective[m] < objective[b]) {
            best = Some(m);
        }
    }
    best.expect("the anchoring ERM is always feasible")
}

pub(crate) fn union_projection<'a>(class: &'a HypothesisClass, samples: &[&[Point]]) -> Result<Projection<'a>> {
    Projection::new(class, None, samples)
}

/// Minimizes the risk on `objective` among members satisfying the
/// constraint on `constraint` (anchored at its ERM) with width `a`.
fn constrained(objective: &LabeledSample, constraint: &LabeledSample, class: &HypothesisClass, a: f64, c: f64) -> Result<Hypothesis> {
    let proj = union_projection(class, &[&objective.points, &constraint.points])?;
    let obj = SampleView::new(&proj, objective)?;
    let con = SampleView::new(&proj, constraint)?;
    Ok(proj.hypothesis(argmin_feasible(&obj.risk, &con.feasible(&proj, a, c))))
}

/// Minimizes `R_{S_P}` subject to
/// `R_{S_Q}(h) - R_{S_Q}(h_Q) <= c sqrt(P_{S_Q}(h != h_Q) A_{n_Q}) + c A_{n_Q}`,
/// where `h_Q` is the ERM on `S_Q`.
pub fn algorithm1(s_p: &LabeledSample, s_q: &LabeledSample, class: &HypothesisClass, cp: &ConfidenceParams) -> Result<Hypothesis> {
    cp.validate()?;
    constrained(s_p, s_q, class, a_n(s_q.len(), class.vc_dim(), cp.delta), cp.c)
}

/// [`algorithm1`] with the roles of the two samples exchanged.
pub fn algorithm1_prime(s_p: &LabeledSample, s_q: &LabeledSample, class: &HypothesisClass, cp: &ConfidenceParams) -> Result<Hypothesis> {
    cp.validate()?;
    constrained(s_q, s_p, class, a_n(s_p.len(), class.vc_dim(), cp.delta), cp.c)
}

/// Returns the source ERM if it satisfies the target constraint of
/// [`algorithm1`], and the target ERM otherwise. Both ERMs are taken over
/// the class projected onto `S_P ∪ S_Q`.
pub fn selector_prop6(s_p: &LabeledSample, s_q: &LabeledSample, class: &HypothesisClass, cp: &ConfidenceParams) -> Result<Hypothesis> {
    cp.validate()?;
    let proj = union_projection(class, &[&s_p.points, &s_q.points])?;
    let p = SampleView::new(&proj, s_p)?;
    let q = SampleView::new(&proj, s_q)?;
    let a = a_n(s_q.len(), class.vc_dim(), cp.delta);
    let feasible = q.feasible(&proj, a, cp.c);
    Ok(proj.hypothesis(if feasible[p.erm] { p.erm } else { q.erm }))
}

/// ERM on `sample` over the class projected onto the union of all given
/// samples, matching the anchors used by the procedures above.
pub fn erm_over_union(class: &HypothesisClass, sample: &LabeledSample, others: &[&LabeledSample]) -> Result<Hypothesis> {
    let mut pts: Vec<&[Point]> = vec![&sample.points];
    pts.extend(others.iter().map(|s| s.points.as_slice()));
    let proj = union_projection(class, &pts)?;
    Ok(proj.hypothesis(SampleView::new(&proj, sample)?.erm))
}

/// Replays the constraint for `h` anchored at `anchor` on `sample`, using the
/// direct empirical quantities.
pub fn replay_constraint(h: &Hypothesis, anchor: &Hypothesis, sample: &LabeledSample, a: f64, c: f64) -> bool {
    constraint_holds(
        empirical_risk(h, sample),
        empirical_risk(anchor, sample),
        empirical_disagreement(h, anchor, &sample.points),
        a,
        c,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub c: f64,
    /// Fraction of trials in which the best-in-class target hypothesis
    /// satisfied the constraint.
    pub feasible_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub rows: Vec<CalibrationRow>,
    /// Smallest `c` reaching `1 - delta` feasibility, if any.
    pub chosen: Option<f64>,
}

/// Constant sweep: for each `c`, the fraction of `trials` target samples of
/// size `n_q` on which the best-in-class hypothesis is feasible.
pub fn calibrate_c(
    q: &crate::distribution::Distribution,
    class: &HypothesisClass,
    cs: &[f64],
    n_q: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<CalibrationReport> {
    if trials == 0 {
        return Err(invalid("calibration needs at least one trial"));
    }
    let best = q.best_in_class(class)?;
    let a = a_n(n_q, class.vc_dim(), delta);
    let samples: Vec<LabeledSample> = (0..trials).map(|t| q.sample_labeled(n_q, derive_seed(seed, &[t as u64]))).collect();
    let mut rows = Vec::with_capacity(cs.len());
    for &c in cs {
        let mut ok = 0usize;
        for s in &samples {
            let anchor = erm_over_union(class, s, &[])?;
            if replay_constraint(&best, &anchor, s, a, c) {
                ok += 1;
            }
        }
        rows.push(CalibrationRow { c, feasible_fraction: ok as f64 / trials as f64 });
    }
    let chosen = rows.iter().filter(|r| r.feasible_fraction >= 1.0 - delta).map(|r| r.c).reduce(f64::min);
    Ok(CalibrationReport { rows, chosen })
}
