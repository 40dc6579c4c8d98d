//! Adaptive sampling under source and target label costs.

use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisClass, LabeledSample, Point};
use crate::projection::argmax_first;
use crate::rng::child_seed;
use crate::transfer_erm::{a_n, a_n_prime, ratio, union_projection, ConfidenceParams, SampleView};

/// Concave, increasing, unbounded cost `u * n^a` with `a` in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSchedule {
    Linear { u: f64 },
    Power { u: f64, a: f64 },
}

impl CostSchedule {
    pub fn linear(u: f64) -> Result<Self> {
        let s = CostSchedule::Linear { u };
        s.validate()?;
        Ok(s)
    }

    pub fn power(u: f64, a: f64) -> Result<Self> {
        let s = CostSchedule::Power { u, a };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (u, a) = self.params();
        if !(u > 0.0 && u.is_finite()) {
            return Err(invalid(format!("unit price must be positive, got {u}")));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(invalid(format!("cost exponent must lie in (0, 1], got {a}")));
        }
        Ok(())
    }

    fn params(&self) -> (f64, f64) {
        match *self {
            CostSchedule::Linear { u } => (u, 1.0),
            CostSchedule::Power { u, a } => (u, a),
        }
    }

    pub fn cost(&self, n: f64) -> f64 {
        let (u, a) = self.params();
        u * n.powf(a)
    }
}

/// Smallest `n >= 1` with `schedule.cost(n) >= budget`.
pub fn minimal_n_for_cost(schedule: &CostSchedule, budget: f64) -> Result<usize> {
    schedule.validate()?;
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(invalid(format!("budget must be positive, got {budget}")));
    }
    let (u, a) = schedule.params();
    let real = (budget / u).powf(1.0 / a).ceil();
    if real > 2f64.powi(52) {
        return Err(invalid(format!("budget {budget} needs more than 2^52 samples")));
    }
    let mut n = (real as usize).max(1);
    while schedule.cost(n as f64) < budget {
        n += 1;
    }
    while n > 1 && schedule.cost((n - 1) as f64) >= budget {
        n -= 1;
    }
    Ok(n)
}

/// Largest `U`-disagreement with the ERM on `S` among members whose
/// `S`-risk is within `c sqrt(P_S(h != h_S) A'_{|S|}) + c A'_{|S|}` of it.
pub fn delta_hat(s: &LabeledSample, u: &[Point], class: &HypothesisClass, cp: &ConfidenceParams) -> Result<f64> {
    cp.validate()?;
    delta_hat_with(s, u, class, cp.c, a_n_prime(s.len(), class.vc_dim(), cp.delta))
}

/// [`delta_hat`] with an explicit width.
pub(crate) fn delta_hat_with(s: &LabeledSample, u: &[Point], class: &HypothesisClass, c: f64, a: f64) -> Result<f64> {
    let proj = union_projection(class, &[&s.points, u])?;
    let view = SampleView::new(&proj, s)?;
    let feasible = view.feasible(&proj, a, c);
    let dis = proj.disagreement_totals(view.erm, &proj.point_counts(u)?);
    Ok((0..proj.len()).filter(|&m| feasible[m]).map(|m| ratio(dis[m], u.len())).fold(0.0, f64::max))
}

/// ERM on `s` over the class projected onto `s` and `u`, with the
/// member that attains [`delta_hat`].
pub fn delta_hat_witness(s: &LabeledSample, u: &[Point], class: &HypothesisClass, cp: &ConfidenceParams) -> Result<(Hypothesis, Hypothesis)> {
    let proj = union_projection(class, &[&s.points, u])?;
    let view = SampleView::new(&proj, s)?;
    let feasible = view.feasible(&proj, a_n_prime(s.len(), class.vc_dim(), cp.delta), cp.c);
    let dis: Vec<f64> = proj
        .disagreement_totals(view.erm, &proj.point_counts(u)?)
        .into_iter()
        .enumerate()
        .map(|(m, d)| if feasible[m] { d } else { -1.0 })
        .collect();
    Ok((proj.hypothesis(view.erm), proj.hypothesis(argmax_first(&dis))))
}

/// Source of fresh labeled draws for the adaptive procedure.
pub trait Sampler {
    fn draw(&mut self, n: usize) -> LabeledSample;
}

impl<F: FnMut(usize) -> LabeledSample> Sampler for F {
    fn draw(&mut self, n: usize) -> LabeledSample {
        self(n)
    }
}

/// Draws from a distribution, with one derived seed per call.
pub struct DistributionSampler<'a> {
    dist: &'a Distribution,
    seed: u64,
    calls: u64,
}

impl<'a> DistributionSampler<'a> {
    pub fn new(dist: &'a Distribution, seed: u64) -> Self {
        Self { dist, seed, calls: 0 }
    }
}

impl Sampler for DistributionSampler<'_> {
    fn draw(&mut self, n: usize) -> LabeledSample {
        let s = self.dist.sample_labeled(n, child_seed(self.seed, self.calls));
        self.calls += 1;
        s
    }
}

/// Width used in the step that returns the target ERM.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step6Variant {
    /// `A_{|S_Q|}`, as printed.
    #[default]
    A,
    /// `A'_{|S_Q|}`, matching the width inside the statistic.
    APrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Algorithm2Config {
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub step6_variant: Step6Variant,
}

fn default_kappa() -> f64 {
    4.0
}

fn default_max_rounds() -> usize {
    64
}

impl Algorithm2Config {
    pub fn new(eps: f64, delta: f64, c: f64) -> Self {
        Self { eps, delta, c, kappa: default_kappa(), max_rounds: default_max_rounds(), step6_variant: Step6Variant::A }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        ConfidenceParams::new(self.c, self.delta)?;
        if !(self.kappa > 0.0) {
            return Err(invalid("kappa must be positive"));
        }
        if self.max_rounds == 0 {
            return Err(invalid("max_rounds must be at least 1"));
        }
        Ok(())
    }

    /// `ceil(kappa ((d/eps) ln(1/eps) + (1/eps) ln(1/delta)))`.
    pub fn unlabeled_needed(&self, d_h: usize) -> usize {
        let e = self.eps;
        (self.kappa * ((d_h as f64 / e) * (1.0 / e).ln() + (1.0 / e) * (1.0 / self.delta).ln())).ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Continue,
    Step6,
    Step7,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub t: usize,
    #[serde(rename = "n_tP")]
    pub n_tp: usize,
    #[serde(rename = "n_tQ")]
    pub n_tq: usize,
    #[serde(rename = "cost_P")]
    pub cost_p: f64,
    #[serde(rename = "cost_Q")]
    pub cost_q: f64,
    pub step6_lhs: f64,
    /// Not evaluated when step 6 already returned.
    pub step7_stat: Option<f64>,
    pub decision: Decision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingTranscript {
    pub rounds: Vec<Round>,
    pub total_cost: f64,
    pub returned_by: Decision,
    pub unlabeled_needed: usize,
    pub kappa: f64,
}

impl SamplingTranscript {
    /// One JSON object per round.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.rounds {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn n_p(&self) -> usize {
        self.rounds.iter().map(|r| r.n_tp).sum()
    }

    pub fn n_q(&self) -> usize {
        self.rounds.iter().map(|r| r.n_tq).sum()
    }
}

/// The doubling procedure: in round `t`, buy the fewest new source and
/// target labels whose costs reach `2^{t-1}` each; return the target ERM
/// once `c sqrt(delta_hat(S_Q, S_Q) A_{|S_Q|}) + c A_{|S_Q|} <= eps`, or
/// the source ERM once `delta_hat(S_P, U_Q) <= eps / 4`.
#[allow(clippy::too_many_arguments)]
pub fn algorithm2(
    cfg: &Algorithm2Config,
    sched_p: &CostSchedule,
    sched_q: &CostSchedule,
    sampler_p: &mut dyn Sampler,
    sampler_q: &mut dyn Sampler,
    u_q: &[Point],
    class: &HypothesisClass,
) -> Result<(Hypothesis, SamplingTranscript)> {
    run(cfg, Some((sched_p, sampler_p)), sched_q, sampler_q, u_q, class)
}

/// Target-only doubling: [`algorithm2`] without source purchases or the
/// source stopping rule.
pub fn target_only(
    cfg: &Algorithm2Config,
    sched_q: &CostSchedule,
    sampler_q: &mut dyn Sampler,
    class: &HypothesisClass,
) -> Result<(Hypothesis, SamplingTranscript)> {
    run(cfg, None, sched_q, sampler_q, &[], class)
}

fn run(
    cfg: &Algorithm2Config,
    mut source: Option<(&CostSchedule, &mut dyn Sampler)>,
    sched_q: &CostSchedule,
    sampler_q: &mut dyn Sampler,
    u_q: &[Point],
    class: &HypothesisClass,
) -> Result<(Hypothesis, SamplingTranscript)> {
    cfg.validate()?;
    sched_q.validate()?;
    let d = class.vc_dim();
    let need = if source.is_some() { cfg.unlabeled_needed(d) } else { 0 };
    if let Some((sp, _)) = &source {
        sp.validate()?;
        if u_q.len() < need {
            return Err(Error::UnlabeledTooSmall { have: u_q.len(), need });
        }
    }
    let mut s_p = LabeledSample::empty();
    let mut s_q = LabeledSample::empty();
    let mut rounds = Vec::new();
    let mut total = 0.0;
    for t in 1..=cfg.max_rounds {
        let budget = 2f64.powi(t as i32 - 1);
        let (n_tp, cost_p) = match source.as_mut() {
            Some((sp, sampler)) => {
                let n = minimal_n_for_cost(sp, budget)?;
                s_p.extend(&sampler.draw(n));
                (n, sp.cost(n as f64))
            }
            None => (0, 0.0),
        };
        let n_tq = minimal_n_for_cost(sched_q, budget)?;
        s_q.extend(&sampler_q.draw(n_tq));
        let cost_q = sched_q.cost(n_tq as f64);
        total += cost_p + cost_q;

        let n = s_q.len();
        let a = match cfg.step6_variant {
            Step6Variant::A => a_n(n, d, cfg.delta),
            Step6Variant::APrime => a_n_prime(n, d, cfg.delta),
        };
        let dq = delta_hat_with(&s_q, &s_q.points, class, cfg.c, a_n_prime(n, d, cfg.delta))?;
        let lhs = cfg.c * (dq * a).sqrt() + cfg.c * a;
        let mut round = Round { t, n_tp, n_tq, cost_p, cost_q, step6_lhs: lhs, step7_stat: None, decision: Decision::Continue };
        if lhs <= cfg.eps {
            round.decision = Decision::Step6;
            rounds.push(round);
            let h = anchor_on(class, &s_q, &s_q.points)?;
            return Ok((h, transcript(rounds, total, Decision::Step6, need, cfg.kappa)));
        }
        if source.is_some() {
            let stat = delta_hat_with(&s_p, u_q, class, cfg.c, a_n_prime(s_p.len(), d, cfg.delta))?;
            round.step7_stat = Some(stat);
            if stat <= cfg.eps / 4.0 {
                round.decision = Decision::Step7;
                rounds.push(round);
                let h = anchor_on(class, &s_p, u_q)?;
                return Ok((h, transcript(rounds, total, Decision::Step7, need, cfg.kappa)));
            }
        }
        rounds.push(round);
    }
    Err(Error::RoundCap { cap: cfg.max_rounds, n_p: s_p.len(), n_q: s_q.len() })
}

/// Source ERM over the projection the statistic used, so the returned
/// hypothesis is the anchor of `delta_hat(S_P, U_Q)`.
fn anchor_on(class: &HypothesisClass, s: &LabeledSample, u: &[Point]) -> Result<Hypothesis> {
    let proj = union_projection(class, &[&s.points, u])?;
    Ok(proj.hypothesis(SampleView::new(&proj, s)?.erm))
}

fn transcript(rounds: Vec<Round>, total_cost: f64, returned_by: Decision, unlabeled_needed: usize, kappa: f64) -> SamplingTranscript {
    SamplingTranscript { rounds, total_cost, returned_by, unlabeled_needed, kappa }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoryCosts {
    #[serde(rename = "n_star_Q")]
    pub n_star_q: f64,
    #[serde(rename = "n_star_P")]
    pub n_star_p: f64,
    pub c_star: f64,
}

/// `n*_Q = d/eps^{2-beta_Q}`, `n*_P = d/eps^{(2-beta_P) gamma / beta_P}`,
/// `c* = min{c_Q(n*_Q), c_P(n*_P)}`.
pub fn theory_costs(
    eps: f64,
    d_h: usize,
    beta_p: f64,
    beta_q: f64,
    gamma: f64,
    sched_p: &CostSchedule,
    sched_q: &CostSchedule,
) -> Result<TheoryCosts> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(beta_p > 0.0 && beta_p <= 1.0 && beta_q > 0.0 && beta_q <= 1.0) {
        return Err(invalid("beta values must lie in (0, 1]"));
    }
    if !(gamma > 0.0) {
        return Err(invalid("gamma must be positive"));
    }
    let d = d_h as f64;
    let n_star_q = d / eps.powf(2.0 - beta_q);
    let n_star_p = d / eps.powf((2.0 - beta_p) * gamma / beta_p);
    Ok(TheoryCosts { n_star_q, n_star_p, c_star: sched_q.cost(n_star_q).min(sched_p.cost(n_star_p)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{example_scenario, ExampleParams};
    use crate::hypothesis::{FiniteClass, SupportPoint};

    #[test]
    fn cost_inverse_examples() {
        assert_eq!(minimal_n_for_cost(&CostSchedule::linear(1.0).unwrap(), 8.0).unwrap(), 8);
        assert_eq!(minimal_n_for_cost(&CostSchedule::power(1.0, 0.5).unwrap(), 4.0).unwrap(), 16);
        assert_eq!(minimal_n_for_cost(&CostSchedule::linear(2.0).unwrap(), 1.0).unwrap(), 1);
        assert_eq!(minimal_n_for_cost(&CostSchedule::linear(0.01).unwrap(), 1.0).unwrap(), 100);
    }

    #[test]
    fn cost_inverse_is_minimal() {
        for sched in [CostSchedule::linear(0.3).unwrap(), CostSchedule::power(1.7, 0.37).unwrap()] {
            for k in 0..16 {
                let b = 2f64.powi(k);
                let n = minimal_n_for_cost(&sched, b).unwrap();
                assert!(sched.cost(n as f64) >= b);
                assert!(n == 1 || sched.cost((n - 1) as f64) < b);
            }
        }
        assert!(minimal_n_for_cost(&CostSchedule::power(1.0, 0.1).unwrap(), 1e9).is_err());
    }

    #[test]
    fn theory_cost_values() {
        let l = CostSchedule::linear(1.0).unwrap();
        let t = theory_costs(0.1, 10, 1.0, 1.0, 1.0, &l, &l).unwrap();
        assert!((t.n_star_q - 100.0).abs() < 1e-9);
        assert!((t.n_star_p - t.n_star_q).abs() < 1e-9);
        let t = theory_costs(0.1, 10, 0.5, 1.0, 2.0, &l, &l).unwrap();
        assert!((t.n_star_p / 1e7 - 1.0).abs() < 1e-12);
        assert!(theory_costs(1.0, 10, 1.0, 1.0, 1.0, &l, &l).is_err());
    }

    #[test]
    fn single_member_delta_hat_is_zero() {
        let class: HypothesisClass = FiniteClass::new(vec![Hypothesis::Labels(vec![true, false])], 1).unwrap().into();
        let p = |i| Point::Support(SupportPoint { index: i, coordinate: i as f64 });
        let s = LabeledSample::new(vec![p(0), p(1)], vec![false, true], 0);
        assert_eq!(delta_hat(&s, &[p(0), p(1)], &class, &ConfidenceParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn unlabeled_size_enforced() {
        let s = example_scenario(2, &ExampleParams::default()).unwrap();
        let l = CostSchedule::linear(1.0).unwrap();
        let cfg = Algorithm2Config::new(0.1, 0.1, 1.0);
        let mut sp = DistributionSampler::new(&s.pair.p, 1);
        let mut sq = DistributionSampler::new(&s.pair.q, 2);
        let err = algorithm2(&cfg, &l, &l, &mut sp, &mut sq, &[Point::Real(0.1)], &s.class).unwrap_err();
        assert!(matches!(err, Error::UnlabeledTooSmall { .. }));
    }

    #[test]
    fn identical_noiseless_pair_stops_early() {
        let s = example_scenario(2, &ExampleParams::default()).unwrap();
        let q = s.pair.q.clone();
        let l = CostSchedule::linear(1.0).unwrap();
        let cfg = Algorithm2Config::new(0.5, 0.1, 0.5);
        let u = q.sample_unlabeled(cfg.unlabeled_needed(1), 5).points;
        let mut sp = DistributionSampler::new(&q, 1);
        let mut sq = DistributionSampler::new(&q, 2);
        let (h, tr) = algorithm2(&cfg, &l, &l, &mut sp, &mut sq, &u, &s.class).unwrap();
        assert!(tr.rounds.len() <= 12);
        assert!(q.excess_risk(&h, &s.class).unwrap() <= 0.5);
        let sum: f64 = tr.rounds.iter().map(|r| r.cost_p + r.cost_q).sum();
        assert_eq!(sum, tr.total_cost);
        assert!(tr.rounds.len() as f64 <= tr.total_cost.log2() + 2.0);
        assert_eq!(tr.to_jsonl().unwrap().lines().count(), tr.rounds.len());
    }
}
