//! One function per subcommand. Each returns the main artifact as text.

use serde::Serialize;
use serde_json::{json, Value};
use transfer_core::cost_adaptive::{algorithm2, target_only, DistributionSampler, SamplingTranscript};
use transfer_core::discrepancy::{beta_max, d_a, d_y, gamma_min, rho_min, verify_family, FamilyCheck};
use transfer_core::distribution::{FamilyParams, ScenarioDoc};
use transfer_core::ratelab::{monte_carlo, FamilySource, FixedPair, PairSource, RateTable};
use transfer_core::rng::derive_seed;
use transfer_core::source_select::{algorithm3, algorithm4, DensityFamily, Selection};
use transfer_core::{Hypothesis, HypothesisClass, LabeledSample};

use crate::config::{resolve, ExperimentConfig, Resolved, BUNDLED};
use crate::error::{config_err, Result};

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v).map_err(transfer_core::Error::from)? + "\n")
}

pub fn scenario_list() -> String {
    let width = BUNDLED.iter().map(|(n, _, _)| n.len()).max().unwrap_or(0);
    BUNDLED.iter().map(|(n, d, _)| format!("{n:width$}  {d}\n")).collect()
}

fn class_json(class: &HypothesisClass) -> Value {
    match class {
        HypothesisClass::Thresholds(o) => json!({"kind": "thresholds", "orientation": o, "vc_dim": 1}),
        HypothesisClass::Finite(c) => json!({"kind": "finite", "members": c.len(), "vc_dim": c.vc_dim()}),
    }
}

pub fn scenario_describe(cfg: &ExperimentConfig) -> Result<String> {
    let r = resolve(cfg.scenario()?, &cfg.class)?;
    let best_p = r.pair.p.best_in_class(&r.class)?;
    let best_q = r.pair.q.best_in_class(&r.class)?;
    let mut out = json!({
        "discrete": r.pair.is_discrete(),
        "support_size": r.pair.support().map(<[_]>::len),
        "class": class_json(&r.class),
        "certified": r.pair.certified,
        "best_p": best_p,
        "best_q": best_q,
        "excess_q_of_best_p": r.pair.q.excess_against(&best_p, &best_q)?,
    });
    if let Some(f) = &r.family {
        out["family"] = json!({"members": f.len(), "params": family_params(f.params())});
    }
    pretty(&out)
}

fn family_params(p: FamilyParams) -> Value {
    serde_json::to_value(p).unwrap_or(Value::Null)
}

pub fn scenario_emit(cfg: &ExperimentConfig) -> Result<String> {
    let r = resolve(cfg.scenario()?, &cfg.class)?;
    pretty(&ScenarioDoc::from_pair(&r.pair))
}

pub fn exponent(cfg: &ExperimentConfig) -> Result<String> {
    let r = resolve(cfg.scenario()?, &cfg.class)?;
    let cert = r.pair.certified.clone().unwrap_or_default();
    let k = &cfg.constants;
    let c_rho = k.c_rho.or(cert.c_rho).unwrap_or(1.0);
    let c_gamma = k.c_gamma.or(cert.c_gamma).unwrap_or(1.0);
    let c_p = k.c_noise.or(cert.c_p).unwrap_or(1.0);
    let c_q = k.c_noise.or(cert.c_q).unwrap_or(1.0);
    let g = gamma_min(&r.pair, &r.class, c_gamma)?;
    let out = json!({
        "gamma": g.value,
        "constant": g.constant,
        "rho_min": rho_min(&r.pair, &r.class, c_rho)?,
        "gamma_min": g,
        "beta_p": beta_max(&r.pair.p, &r.class, c_p)?,
        "beta_q": beta_max(&r.pair.q, &r.class, c_q)?,
        "d_a": d_a(&r.pair, &r.class)?,
        "d_y": d_y(&r.pair, &r.class)?,
        "certified": r.pair.certified,
    });
    pretty(&out)
}

pub fn verify(cfg: &ExperimentConfig) -> Result<String> {
    let r = resolve(cfg.scenario()?, &cfg.class)?;
    let fam = r.family.ok_or_else(|| config_err("verify-family needs a theorem3 or theorem4 scenario without \"member\""))?;
    let (rho, beta_p, beta_q, default_c) = match fam.params() {
        FamilyParams::Theorem3 { rho, beta_p, beta_q, .. } => (rho, beta_p, beta_q, 1.0),
        FamilyParams::Theorem4 { rho, beta_p, beta_q, .. } => (rho, beta_p, beta_q, 2.0),
    };
    let c = cfg.check.c.unwrap_or(default_c);
    let chk = FamilyCheck { rho, beta_p, beta_q, c, c_rho: cfg.check.c_rho.unwrap_or(c), c_gamma: cfg.check.c_gamma.unwrap_or(c) };
    let report = verify_family(&fam, &chk)?;
    log::info!("{} members, {} evaluated, all hold: {}", report.members, report.evaluated, report.all_hold);
    pretty(&json!({"params": family_params(fam.params()), "check": {"c": chk.c, "c_rho": chk.c_rho, "c_gamma": chk.c_gamma}, "report": report}))
}

pub fn rates(cfg: &ExperimentConfig, seed: u64) -> Result<String> {
    cfg.validate_common()?;
    let Resolved { pair, class, family } = resolve(cfg.scenario()?, &cfg.class)?;
    let source: Box<dyn PairSource> = match family {
        Some(f) => Box::new(FamilySource::new(f)?),
        None => Box::new(FixedPair::new(pair, class)?),
    };
    let grid = cfg.grid.cells();
    if grid.is_empty() {
        return Err(config_err("empty grid"));
    }
    let trials = cfg.trials.unwrap_or(100);
    let mut table = RateTable::default();
    for est in cfg.estimators() {
        log::info!("{}: {} cells x {trials} trials", est.id(), grid.len());
        table.extend(monte_carlo(source.as_ref(), est, &grid, trials, seed, &cfg.confidence)?);
    }
    Ok(table.to_csv_string()?)
}

#[derive(Serialize)]
struct AdaptiveRun {
    hypothesis: Hypothesis,
    excess_q: f64,
    returned_by: transfer_core::cost_adaptive::Decision,
    total_cost: f64,
    n_p: usize,
    n_q: usize,
    rounds: usize,
}

fn summarize_run(h: Hypothesis, tr: &SamplingTranscript, r: &Resolved) -> Result<AdaptiveRun> {
    Ok(AdaptiveRun {
        excess_q: r.pair.q.excess_risk(&h, &r.class)?,
        hypothesis: h,
        returned_by: tr.returned_by,
        total_cost: tr.total_cost,
        n_p: tr.n_p(),
        n_q: tr.n_q(),
        rounds: tr.rounds.len(),
    })
}

/// Returns the summary and the transcript lines.
pub fn adaptive(cfg: &ExperimentConfig, seed: u64) -> Result<(String, String)> {
    let spec = cfg.adaptive.ok_or_else(|| config_err("missing \"adaptive\" section"))?;
    let a2 = spec.algorithm2();
    cfg.costs.p.validate()?;
    cfg.costs.q.validate()?;
    let r = resolve(cfg.scenario()?, &cfg.class)?;
    let n_u = spec.n_unlabeled.unwrap_or_else(|| a2.unlabeled_needed(r.class.vc_dim()));
    let u = r.pair.q.sample_unlabeled(n_u, derive_seed(seed, &[2])).points;
    let mut sp = DistributionSampler::new(&r.pair.p, derive_seed(seed, &[0]));
    let mut sq = DistributionSampler::new(&r.pair.q, derive_seed(seed, &[1]));
    let (h, tr) = algorithm2(&a2, &cfg.costs.p, &cfg.costs.q, &mut sp, &mut sq, &u, &r.class)?;
    let mut out = json!({"eps": a2.eps, "delta": a2.delta, "n_unlabeled": n_u, "run": summarize_run(h, &tr, &r)?});
    if spec.baseline {
        let mut sq = DistributionSampler::new(&r.pair.q, derive_seed(seed, &[1]));
        let (hb, trb) = target_only(&a2, &cfg.costs.q, &mut sq, &r.class)?;
        out["target_only"] = serde_json::to_value(summarize_run(hb, &trb, &r)?).map_err(transfer_core::Error::from)?;
    }
    Ok((pretty(&out)?, tr.to_jsonl()?))
}

fn selection_json(sel: &Selection, r: &Resolved) -> Result<String> {
    pretty(&json!({
        "chosen": sel.chosen,
        "statistics": sel.statistics,
        "hypothesis": sel.hypothesis,
        "excess_q": r.pair.q.excess_risk(&sel.hypothesis, &r.class)?,
    }))
}

pub fn select(cfg: &ExperimentConfig, seed: u64) -> Result<String> {
    cfg.validate_common()?;
    let target = resolve(cfg.scenario()?, &cfg.class)?;
    if cfg.sources.is_empty() {
        return Err(config_err("select needs at least one entry in \"sources\""));
    }
    let sources = cfg.sources.iter().map(|s| resolve(s, &cfg.class)).collect::<Result<Vec<_>>>()?;
    let n = cfg.sample;
    let samples: Vec<LabeledSample> =
        sources.iter().enumerate().map(|(i, s)| s.pair.p.sample_labeled(n.n_p, derive_seed(seed, &[0, i as u64]))).collect();
    let s_q = target.pair.q.sample_labeled(n.n_q, derive_seed(seed, &[1]));
    let u = target.pair.q.sample_unlabeled(n.n_u, derive_seed(seed, &[2])).points;
    let sel = algorithm4(&samples, &s_q, &u, &target.class, &cfg.confidence)?;
    selection_json(&sel, &target)
}

pub fn reweight(cfg: &ExperimentConfig, seed: u64) -> Result<String> {
    cfg.validate_common()?;
    let r = resolve(cfg.scenario()?, &cfg.class)?;
    let len = r.pair.support().map(<[_]>::len).ok_or_else(|| config_err("reweight needs a discrete scenario"))?;
    let family = match &cfg.densities {
        Some(d) => DensityFamily::new(d.members.clone(), d.pseudo_dim)?,
        None => DensityFamily::unit(len),
    };
    let n = cfg.sample;
    let s_p = r.pair.p.sample_labeled(n.n_p, derive_seed(seed, &[0]));
    let s_q = r.pair.q.sample_labeled(n.n_q, derive_seed(seed, &[1]));
    let u = r.pair.q.sample_unlabeled(n.n_u, derive_seed(seed, &[2])).points;
    let sel = algorithm3(&s_p, &s_q, &u, &family, &r.class, &cfg.confidence)?;
    selection_json(&sel, &r)
}
