//! Experiment configs: JSON documents, `--set` overrides, and resolution of
//! scenario and class specs into core types.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use transfer_core::cost_adaptive::{Algorithm2Config, CostSchedule, Step6Variant};
use transfer_core::distribution::{
    build_theorem3_family, build_theorem4_family, example_scenario, ExampleParams, ScenarioDoc, SigmaChoice,
    SigmaFamily, TransferPair,
};
use transfer_core::ratelab::Estimator;
use transfer_core::transfer_erm::ConfidenceParams;
use transfer_core::{FiniteClass, Hypothesis, HypothesisClass, Orientation};

use crate::error::{config_err, Result};

/// Configs shipped with the binary, addressable by name in `--config`.
pub const BUNDLED: &[(&str, &str, &str)] = &[
    ("example2", "uniform source on [0,2], target on [0,1], threshold at 1/2", include_str!("../configs/example2.json")),
    ("example3", "source with a power-law edge at the target threshold", include_str!("../configs/example3.json")),
    ("example4", "source density |t|^(gamma-1), super-transfer", include_str!("../configs/example4.json")),
    ("rings", "concentric rings with disjoint supports", include_str!("../configs/rings.json")),
    ("theorem3", "first lower-bound family over the anchored cube", include_str!("../configs/theorem3.json")),
    ("theorem4", "two-block lower-bound family", include_str!("../configs/theorem4.json")),
    ("rates", "rate table on the first lower-bound family", include_str!("../configs/rates.json")),
    ("adaptive", "adaptive sampling with cheap source labels", include_str!("../configs/adaptive.json")),
    ("select", "choosing between two sources", include_str!("../configs/select.json")),
    ("reweight", "reweighting a discretized source", include_str!("../configs/reweight.json")),
];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    Example {
        id: u8,
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        ring_points: Option<usize>,
        /// Discretize a continuous example onto this many cells.
        #[serde(default)]
        cells: Option<usize>,
    },
    Theorem3 {
        d_h: usize,
        rho: f64,
        beta_p: f64,
        beta_q: f64,
        epsilon: f64,
        /// Single member; the whole family when absent.
        #[serde(default)]
        member: Option<usize>,
        #[serde(default)]
        packing_seed: u64,
    },
    Theorem4 {
        d_h: usize,
        rho: f64,
        beta_p: f64,
        beta_q: f64,
        eps1: f64,
        eps2: f64,
        #[serde(default)]
        tau: Option<f64>,
        #[serde(default)]
        member: Option<usize>,
        #[serde(default)]
        packing_seed: u64,
    },
    File {
        path: PathBuf,
    },
    Inline {
        doc: ScenarioDoc,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    /// The class that comes with the scenario; thresholds or all patterns otherwise.
    #[default]
    Auto,
    Thresholds {
        #[serde(default = "positive_above")]
        orientation: Orientation,
    },
    AllPatterns,
    AnchoredCube {
        anchor: usize,
        label: bool,
        vc_dim: usize,
    },
    Labels {
        members: Vec<Vec<bool>>,
        vc_dim: usize,
    },
}

fn positive_above() -> Orientation {
    Orientation::PositiveAbove
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_p: Vec<usize>,
    pub n_q: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_p: vec![0, 64, 256], n_q: vec![16, 64] }
    }
}

impl GridSpec {
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.n_p.iter().flat_map(|&p| self.n_q.iter().map(move |&q| (p, q))).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub c_rho: Option<f64>,
    pub c_gamma: Option<f64>,
    pub c_noise: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub c: Option<f64>,
    pub c_rho: Option<f64>,
    pub c_gamma: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSpec {
    pub eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "four")]
    pub kappa: f64,
    #[serde(default = "sixty_four")]
    pub max_rounds: usize,
    #[serde(default)]
    pub step6_variant: Step6Variant,
    /// Size of the unlabeled target sample; the theoretical size when absent.
    #[serde(default)]
    pub n_unlabeled: Option<usize>,
    /// Also run target-only doubling for comparison.
    #[serde(default)]
    pub baseline: bool,
}

fn default_delta() -> f64 {
    0.1
}
fn one() -> f64 {
    1.0
}
fn four() -> f64 {
    4.0
}
fn sixty_four() -> usize {
    64
}

impl AdaptiveSpec {
    pub fn algorithm2(&self) -> Algorithm2Config {
        Algorithm2Config {
            eps: self.eps,
            delta: self.delta,
            c: self.c,
            kappa: self.kappa,
            max_rounds: self.max_rounds,
            step6_variant: self.step6_variant,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Costs {
    pub p: CostSchedule,
    pub q: CostSchedule,
}

impl Default for Costs {
    fn default() -> Self {
        Self { p: CostSchedule::Linear { u: 1.0 }, q: CostSchedule::Linear { u: 1.0 } }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSizes {
    pub n_p: usize,
    pub n_q: usize,
    pub n_u: usize,
}

impl Default for SampleSizes {
    fn default() -> Self {
        Self { n_p: 1024, n_q: 32, n_u: 2048 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitiesSpec {
    pub members: Vec<Vec<f64>>,
    #[serde(default)]
    pub pseudo_dim: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub scenario: Option<ScenarioSpec>,
    #[serde(default)]
    pub class: ClassSpec,
    /// Source scenarios for `select`; their `P` sides are used.
    #[serde(default)]
    pub sources: Vec<ScenarioSpec>,
    /// Density family for `reweight`; unit weight when absent.
    #[serde(default)]
    pub densities: Option<DensitiesSpec>,
    #[serde(default)]
    pub estimators: Option<Vec<Estimator>>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub confidence: ConfidenceParams,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub check: CheckSpec,
    #[serde(default)]
    pub adaptive: Option<AdaptiveSpec>,
    #[serde(default)]
    pub costs: Costs,
    #[serde(default)]
    pub sample: SampleSizes,
    /// Main artifact path; `--out` wins.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Round-by-round JSON lines from `adaptive`.
    #[serde(default)]
    pub transcript: Option<PathBuf>,
}

/// Reads `--config` (a path, or a bundled name) and applies the overrides.
pub fn load(config: Option<&str>, sets: &[String]) -> Result<ExperimentConfig> {
    let mut value = match config {
        None => Value::Object(Default::default()),
        Some(c) => {
            let text = if Path::new(c).exists() {
                std::fs::read_to_string(c).map_err(|e| config_err(format!("{c}: {e}")))?
            } else if let Some((_, _, body)) = BUNDLED.iter().find(|(n, _, _)| *n == c) {
                body.to_string()
            } else {
                return Err(config_err(format!("{c}: no such file or bundled config")));
            };
            serde_json::from_str(&text).map_err(|e| config_err(format!("{c}: {e}")))?
        }
    };
    for s in sets {
        apply_set(&mut value, s)?;
    }
    serde_json::from_value(value).map_err(|e| config_err(e.to_string()))
}

/// `a.b.c=value`; the value is parsed as JSON and kept as a string when it
/// does not parse.
pub fn apply_set(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("--set expects KEY=VALUE, got {assignment:?}")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(config_err(format!("bad key in --set {assignment:?}")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    for part in key.split('.') {
        if !cur.is_object() {
            return Err(config_err(format!("--set {key}: {part:?} is inside a non-object")));
        }
        cur = cur.as_object_mut().unwrap().entry(part).or_insert(Value::Object(Default::default()));
    }
    *cur = value;
    Ok(())
}

/// A scenario ready for computation.
pub struct Resolved {
    pub pair: TransferPair,
    pub class: HypothesisClass,
    /// Set for family specs without a member index.
    pub family: Option<SigmaFamily>,
}

impl ExperimentConfig {
    pub fn scenario(&self) -> Result<&ScenarioSpec> {
        self.scenario.as_ref().ok_or_else(|| config_err("missing \"scenario\""))
    }

    pub fn estimators(&self) -> Vec<Estimator> {
        self.estimators.clone().unwrap_or_else(|| Estimator::ALL.to_vec())
    }

    pub fn validate_common(&self) -> Result<()> {
        self.confidence.validate()?;
        if self.trials == Some(0) {
            return Err(config_err("trials must be at least 1"));
        }
        Ok(())
    }
}

pub fn resolve(spec: &ScenarioSpec, class: &ClassSpec) -> Result<Resolved> {
    let (pair, native, family) = match spec {
        ScenarioSpec::Example { id, gamma, ring_points, cells } => {
            let params = ExampleParams { gamma: *gamma, ring_points: ring_points.unwrap_or(16) };
            let sc = example_scenario(*id, &params)?;
            match cells {
                Some(n) => (sc.pair.discretize(*n)?, None, None),
                None => (sc.pair, Some(sc.class), None),
            }
        }
        ScenarioSpec::Theorem3 { d_h, rho, beta_p, beta_q, epsilon, member, packing_seed } => {
            let fam = build_theorem3_family(*d_h, *rho, *beta_p, *beta_q, *epsilon, &SigmaChoice::Auto { seed: *packing_seed })?;
            family_parts(fam, *member)?
        }
        ScenarioSpec::Theorem4 { d_h, rho, beta_p, beta_q, eps1, eps2, tau, member, packing_seed } => {
            let fam = build_theorem4_family(*d_h, *rho, *beta_p, *beta_q, *eps1, *eps2, *tau, &SigmaChoice::Auto { seed: *packing_seed })?;
            family_parts(fam, *member)?
        }
        ScenarioSpec::File { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            (TransferPair::from_json(&text)?, None, None)
        }
        ScenarioSpec::Inline { doc } => (doc.clone().into_pair()?, None, None),
    };
    let class = build_class(class, &pair, native)?;
    Ok(Resolved { pair, class, family })
}

fn family_parts(fam: SigmaFamily, member: Option<usize>) -> Result<(TransferPair, Option<HypothesisClass>, Option<SigmaFamily>)> {
    let class = fam.class().clone();
    match member {
        Some(m) if m >= fam.len() => Err(config_err(format!("member {m} out of range; family has {} members", fam.len()))),
        Some(m) => Ok((fam.pairs()[m].clone(), Some(class), None)),
        None => Ok((fam.pairs()[0].clone(), Some(class), Some(fam))),
    }
}

fn build_class(spec: &ClassSpec, pair: &TransferPair, native: Option<HypothesisClass>) -> Result<HypothesisClass> {
    let support_len = pair.support().map(<[_]>::len);
    let need_support = || support_len.ok_or_else(|| config_err("this class needs a discrete scenario"));
    Ok(match spec {
        ClassSpec::Auto => match (native, support_len) {
            (Some(c), _) => c,
            (None, Some(n)) => FiniteClass::all_patterns(n)?.into(),
            (None, None) => {
                let o = pair.p.as_continuous().map_or(Orientation::PositiveAbove, |c| c.orientation);
                HypothesisClass::Thresholds(o)
            }
        },
        ClassSpec::Thresholds { orientation } => HypothesisClass::Thresholds(*orientation),
        ClassSpec::AllPatterns => FiniteClass::all_patterns(need_support()?)?.into(),
        ClassSpec::AnchoredCube { anchor, label, vc_dim } => {
            FiniteClass::anchored_cube(need_support()?, *anchor, *label, *vc_dim)?.into()
        }
        ClassSpec::Labels { members, vc_dim } => {
            let n = need_support()?;
            if members.iter().any(|m| m.len() != n) {
                return Err(config_err(format!("every class member needs {n} labels")));
            }
            FiniteClass::new(members.iter().cloned().map(Hypothesis::Labels).collect(), *vc_dim)?.into()
        }
    })
}
