//! Brute-force discrepancy quantities over an enumerated class: transfer
//! exponents, marginal transfer exponents, noise-condition exponents, the
//! clipped-excess exponent, and the `d_A` / `d_Y` divergences.
//!
//! Discrete pairs are evaluated exactly over the class projected onto their
//! support. Continuous pairs are evaluated on a caller-chosen grid of
//! thresholds, relative to each distribution's true target threshold.

use std::collections::HashMap;

use serde::{Serialize, Serializer};

use crate::distribution::{Distribution, SigmaFamily, TransferPair};
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisClass, Orientation};
use crate::projection::{argmin_first, Projection};

/// Relative tolerance for inequality checks.
pub const REL_TOL: f64 = 1e-9;

/// Threshold grid used for continuous pairs.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    /// `n + 1` equally spaced thresholds spanning both supports.
    Uniform(usize),
    Explicit(Vec<f64>),
}

impl Default for Grid {
    fn default() -> Self {
        Grid::Uniform(4096)
    }
}

impl Grid {
    fn points(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Grid::Uniform(n) => {
                let n = (*n).max(1);
                (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect()
            }
            Grid::Explicit(v) => v.clone(),
        }
    }

    /// Geometric grid `±center ± r^k` for localized quantities near `center`.
    pub fn geometric_around(center: f64, smallest: f64, largest: f64, per_side: usize) -> Self {
        let mut v = vec![center];
        let ratio = (largest / smallest).powf(1.0 / (per_side.max(2) - 1) as f64);
        for k in 0..per_side.max(2) {
            let r = smallest * ratio.powi(k as i32);
            v.push(center - r);
            v.push(center + r);
        }
        v.sort_by(f64::total_cmp);
        Grid::Explicit(v)
    }
}

fn ser_value<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

fn ser_witness<S: Serializer>(w: &Option<Hypothesis>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match w.as_ref().and_then(Hypothesis::labels) {
        Some(l) => s.collect_seq(l.iter().map(|&b| u8::from(b))),
        None => s.serialize_none(),
    }
}

fn ser_threshold<S: Serializer>(w: &Option<Hypothesis>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match w {
        Some(Hypothesis::Threshold { t, .. }) => s.serialize_f64(*t),
        _ => s.serialize_none(),
    }
}

/// Exponent together with its constant and the binding hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentReport {
    #[serde(serialize_with = "ser_value")]
    pub value: f64,
    pub constant: f64,
    #[serde(rename = "witness_labels", serialize_with = "ser_witness")]
    pub witness: Option<Hypothesis>,
    #[serde(rename = "witness_threshold", serialize_with = "ser_threshold", skip_serializing_if = "is_not_threshold")]
    pub witness_t: Option<Hypothesis>,
    /// Set by [`beta_max`] when no member has positive excess risk.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

fn is_not_threshold(w: &Option<Hypothesis>) -> bool {
    !matches!(w, Some(Hypothesis::Threshold { .. }))
}

impl ExponentReport {
    fn new(value: f64, constant: f64, witness: Option<Hypothesis>) -> Self {
        Self { value, constant, witness_t: witness.clone(), witness, degenerate: false }
    }
}

enum Members<'a> {
    Proj(Projection<'a>),
    Grid { thresholds: Vec<f64>, orientation: Orientation },
}

/// Per-member exact quantities for a pair.
pub struct StatsTable<'a> {
    members: Members<'a>,
    /// `E_P(h)`
    pub excess_p: Vec<f64>,
    /// `E_Q(h)`
    pub excess_q: Vec<f64>,
    /// `P_X(h != h*_P)`
    pub dis_p: Vec<f64>,
    /// `Q_X(h != h*_P)`
    pub dis_q_from_p: Vec<f64>,
    /// `Q_X(h != h*_Q)`
    pub dis_q: Vec<f64>,
    /// `max(R_Q(h) - R_Q(h*_P), 0)`
    pub clipped_q: Vec<f64>,
}

impl<'a> StatsTable<'a> {
    pub fn new(pair: &TransferPair, class: &'a HypothesisClass, grid: &Grid) -> Result<Self> {
        match (&pair.p, &pair.q) {
            (Distribution::Discrete(p), Distribution::Discrete(q)) => {
                let proj = p.projection(class)?;
                let (excess_p, best_p) = p.excess_table(&proj)?;
                let (excess_q, best_q) = q.excess_table(&proj)?;
                let mass_p = p.cell_mass(&proj)?;
                let mass_q = q.cell_mass(&proj)?;
                let dis_p = proj.disagreement_totals(best_p, &mass_p);
                let dis_q_from_p = proj.disagreement_totals(best_p, &mass_q);
                let dis_q = proj.disagreement_totals(best_q, &mass_q);
                let (ra, rb) = q.risk_weights(&proj)?;
                let mut a = vec![0.0; proj.cells()];
                let mut b = vec![0.0; proj.cells()];
                for c in 0..proj.cells() {
                    if proj.label(best_p, c) {
                        b[c] = rb[c] - ra[c];
                    } else {
                        a[c] = ra[c] - rb[c];
                    }
                }
                let clipped_q = proj.scores(&a, &b).into_iter().map(|x| x.max(0.0)).collect();
                Ok(Self { members: Members::Proj(proj), excess_p, excess_q, dis_p, dis_q_from_p, dis_q, clipped_q })
            }
            (Distribution::Continuous(p), Distribution::Continuous(q)) => {
                let orientation = match class {
                    HypothesisClass::Thresholds(o) => *o,
                    HypothesisClass::Finite(_) => {
                        return Err(Error::NotEnumerable("continuous pairs are evaluated over the threshold class".into()))
                    }
                };
                let (pl, ph) = p.density.support();
                let (ql, qh) = q.density.support();
                let thresholds = grid.points(pl.min(ql), ph.max(qh));
                if thresholds.is_empty() {
                    return Err(Error::NotEnumerable("empty threshold grid".into()));
                }
                let hs: Vec<Hypothesis> = thresholds.iter().map(|&t| Hypothesis::threshold(t, orientation)).collect();
                let col = |f: &dyn Fn(&Hypothesis) -> Result<f64>| hs.iter().map(f).collect::<Result<Vec<f64>>>();
                let (tp, tq) = (p.target(), q.target());
                let rq_tp = q.true_risk(&tp)?;
                let excess_p = col(&|h| p.true_risk(h))?;
                let excess_q = col(&|h| q.true_risk(h))?;
                let dis_q_from_p = col(&|h| q.disagreement(h, &tp))?;
                let dis_q = col(&|h| q.disagreement(h, &tq))?;
                let clipped_q = col(&|h| Ok((q.true_risk(h)? - rq_tp).max(0.0)))?;
                Ok(Self {
                    members: Members::Grid { thresholds, orientation },
                    dis_p: excess_p.clone(),
                    excess_p,
                    excess_q,
                    dis_q_from_p,
                    dis_q,
                    clipped_q,
                })
            }
            _ => Err(Error::Incompatible("mixed pair".into())),
        }
    }

    pub fn len(&self) -> usize {
        self.excess_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excess_p.is_empty()
    }

    pub fn hypothesis(&self, i: usize) -> Hypothesis {
        match &self.members {
            Members::Proj(p) => p.hypothesis(i),
            Members::Grid { thresholds, orientation } => Hypothesis::threshold(thresholds[i], *orientation),
        }
    }
}

/// Smallest exponent `e` with `c * x(h) >= y(h)^e` over all members.
///
/// Members with `y >= 1` or `c * x >= 1` satisfy every `e >= 0` (assuming
/// excess risks at most 1) and are skipped; `x = 0 < y` forces `+inf`.
fn exponent_min(x: &[f64], y: &[f64], c: f64, floor: Option<f64>) -> (f64, Option<usize>) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for i in 0..x.len() {
        let (xi, yi) = (x[i], y[i]);
        if yi <= 0.0 || yi >= 1.0 {
            continue;
        }
        let v = if xi <= 0.0 {
            f64::INFINITY
        } else if c * xi >= 1.0 {
            continue;
        } else {
            (c * xi).ln() / yi.ln()
        };
        if v > best {
            best = v;
            arg = Some(i);
        }
    }
    let mut value = if arg.is_some() { best } else { 0.0 };
    if let Some(f) = floor {
        value = value.max(f);
    }
    (value, arg)
}

fn report(table: &StatsTable<'_>, x: &[f64], y: &[f64], c: f64, floor: Option<f64>) -> ExponentReport {
    let (v, arg) = exponent_min(x, y, c, floor);
    ExponentReport::new(v, c, arg.map(|i| table.hypothesis(i)))
}

fn check_constant(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("constant must be positive, got {c}")))
    }
}

/// Smallest `rho` with `C_rho * E_P(h) >= E_Q(h)^rho` for every member.
pub fn rho_min(pair: &TransferPair, class: &HypothesisClass, c_rho: f64) -> Result<ExponentReport> {
    rho_min_with(pair, class, c_rho, &Grid::default(), None)
}

pub fn rho_min_with(pair: &TransferPair, class: &HypothesisClass, c: f64, grid: &Grid, floor: Option<f64>) -> Result<ExponentReport> {
    check_constant(c)?;
    let t = StatsTable::new(pair, class, grid)?;
    Ok(report(&t, &t.excess_p, &t.excess_q, c, floor))
}

/// Smallest `gamma` with `C_gamma * P_X(h != h*_P) >= Q_X(h != h*_P)^gamma`.
pub fn gamma_min(pair: &TransferPair, class: &HypothesisClass, c_gamma: f64) -> Result<ExponentReport> {
    gamma_min_with(pair, class, c_gamma, &Grid::default(), None)
}

pub fn gamma_min_with(pair: &TransferPair, class: &HypothesisClass, c: f64, grid: &Grid, floor: Option<f64>) -> Result<ExponentReport> {
    check_constant(c)?;
    let t = StatsTable::new(pair, class, grid)?;
    Ok(report(&t, &t.dis_p, &t.dis_q_from_p, c, floor))
}

/// As [`rho_min`] with the clipped target excess `max(R_Q(h) - R_Q(h*_P), 0)`.
pub fn rho_prime_min(pair: &TransferPair, class: &HypothesisClass, c: f64) -> Result<ExponentReport> {
    rho_prime_min_with(pair, class, c, &Grid::default())
}

pub fn rho_prime_min_with(pair: &TransferPair, class: &HypothesisClass, c: f64, grid: &Grid) -> Result<ExponentReport> {
    check_constant(c)?;
    let t = StatsTable::new(pair, class, grid)?;
    Ok(report(&t, &t.excess_p, &t.clipped_q, c, None))
}

/// Which exponent a constant sweep computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentKind {
    Rho,
    Gamma,
    RhoPrime,
}

/// Exponent at each constant in `constants`.
pub fn sweep_constants(
    pair: &TransferPair,
    class: &HypothesisClass,
    kind: ExponentKind,
    constants: &[f64],
    grid: &Grid,
) -> Result<Vec<ExponentReport>> {
    let t = StatsTable::new(pair, class, grid)?;
    constants
        .iter()
        .map(|&c| {
            check_constant(c)?;
            Ok(match kind {
                ExponentKind::Rho => report(&t, &t.excess_p, &t.excess_q, c, None),
                ExponentKind::Gamma => report(&t, &t.dis_p, &t.dis_q_from_p, c, None),
                ExponentKind::RhoPrime => report(&t, &t.excess_p, &t.clipped_q, c, None),
            })
        })
        .collect()
}

/// `log2`-spaced constants `2^lo, ..., 2^hi`.
pub fn log2_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

fn beta_from(dis: &[f64], excess: &[f64], c: f64, table: &StatsTable<'_>) -> ExponentReport {
    let mut value = 1.0;
    let mut arg = None;
    let mut any = false;
    for i in 0..dis.len() {
        let e = excess[i];
        if e <= 0.0 {
            continue;
        }
        any = true;
        if e >= 1.0 {
            continue;
        }
        let b = if dis[i] <= 0.0 {
            1.0
        } else if dis[i] > c {
            0.0
        } else {
            ((dis[i] / c).ln() / e.ln()).min(1.0)
        };
        if b < value {
            value = b;
            arg = Some(i);
        }
    }
    let mut r = ExponentReport::new(value, c, arg.map(|i| table.hypothesis(i)));
    r.degenerate = !any;
    r
}

/// Largest `beta` in `[0, 1]` with `D_X(h != h*_D) <= c * E_D(h)^beta` for
/// every member with positive excess. Returns 1 with `degenerate` set when no
/// member has positive excess.
pub fn beta_max(dist: &Distribution, class: &HypothesisClass, c_noise: f64) -> Result<ExponentReport> {
    beta_max_with(dist, class, c_noise, &Grid::default())
}

pub fn beta_max_with(dist: &Distribution, class: &HypothesisClass, c: f64, grid: &Grid) -> Result<ExponentReport> {
    check_constant(c)?;
    // a pair with itself gives the target-side columns for `dist`
    let pair = TransferPair { p: dist.clone(), q: dist.clone(), certified: None };
    let t = StatsTable::new(&pair, class, grid)?;
    Ok(beta_from(&t.dis_q, &t.excess_q, c, &t))
}

fn sup_abs(x: &[f64], y: &[f64], keep: impl Fn(usize) -> bool) -> Option<f64> {
    (0..x.len()).filter(|&i| keep(i)).map(|i| (x[i] - y[i]).abs()).fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

/// `sup_h |P_X(h != h*) - Q_X(h != h*)|`, with `h* = h*_P`.
pub fn d_a(pair: &TransferPair, class: &HypothesisClass) -> Result<f64> {
    d_a_with(pair, class, &Grid::default())
}

pub fn d_a_with(pair: &TransferPair, class: &HypothesisClass, grid: &Grid) -> Result<f64> {
    let t = StatsTable::new(pair, class, grid)?;
    Ok(sup_abs(&t.dis_p, &t.dis_q_from_p, |_| true).unwrap_or(0.0))
}

/// `sup_h |E_P(h) - E_Q(h)|`.
pub fn d_y(pair: &TransferPair, class: &HypothesisClass) -> Result<f64> {
    d_y_with(pair, class, &Grid::default())
}

pub fn d_y_with(pair: &TransferPair, class: &HypothesisClass, grid: &Grid) -> Result<f64> {
    d_y_localized_with(pair, class, f64::INFINITY, grid)
}

/// `sup_{h : E_P(h) <= eps} |E_P(h) - E_Q(h)|`.
pub fn d_y_localized(pair: &TransferPair, class: &HypothesisClass, eps: f64) -> Result<f64> {
    d_y_localized_with(pair, class, eps, &Grid::default())
}

pub fn d_y_localized_with(pair: &TransferPair, class: &HypothesisClass, eps: f64, grid: &Grid) -> Result<f64> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be non-negative, got {eps}")));
    }
    let t = StatsTable::new(pair, class, grid)?;
    sup_abs(&t.excess_p, &t.excess_q, |i| t.excess_p[i] <= eps)
        .ok_or_else(|| Error::NotEnumerable("no member satisfies the localization constraint".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Transfer,
    NoiseP,
    NoiseQ,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    #[serde(rename = "witness_labels", serialize_with = "ser_witness")]
    pub witness: Option<Hypothesis>,
    /// The side that must be at least `rhs`.
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub holds: bool,
    pub violation_count: usize,
    /// The first few violations in enumeration order.
    pub violations: Vec<Violation>,
}

fn geq(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - REL_TOL * lhs.abs().max(rhs.abs())
}

const MAX_LISTED: usize = 8;

/// Checks `C E_P >= E_Q^rho`, `P_X(h != h*_P) <= C E_P^beta_P` and
/// `Q_X(h != h*_Q) <= C E_Q^beta_Q` for every member.
pub fn verify_membership(
    pair: &TransferPair,
    class: &HypothesisClass,
    rho: f64,
    beta_p: f64,
    beta_q: f64,
    c: f64,
) -> Result<MembershipReport> {
    verify_membership_with(pair, class, rho, beta_p, beta_q, c, &Grid::default())
}

#[allow(clippy::too_many_arguments)]
pub fn verify_membership_with(
    pair: &TransferPair,
    class: &HypothesisClass,
    rho: f64,
    beta_p: f64,
    beta_q: f64,
    c: f64,
    grid: &Grid,
) -> Result<MembershipReport> {
    check_constant(c)?;
    let t = StatsTable::new(pair, class, grid)?;
    Ok(membership_from(&t, rho, beta_p, beta_q, c))
}

fn membership_from(t: &StatsTable<'_>, rho: f64, beta_p: f64, beta_q: f64, c: f64) -> MembershipReport {
    let mut violations = Vec::new();
    let mut count = 0;
    for i in 0..t.len() {
        let checks = [
            (Condition::Transfer, c * t.excess_p[i], t.excess_q[i].powf(rho)),
            (Condition::NoiseP, c * t.excess_p[i].powf(beta_p), t.dis_p[i]),
            (Condition::NoiseQ, c * t.excess_q[i].powf(beta_q), t.dis_q[i]),
        ];
        for (condition, lhs, rhs) in checks {
            if !geq(lhs, rhs) {
                count += 1;
                if violations.len() < MAX_LISTED {
                    violations.push(Violation { condition, witness: Some(t.hypothesis(i)), lhs, rhs });
                }
            }
        }
    }
    MembershipReport { holds: count == 0, violation_count: count, violations }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop4Report {
    pub gamma: ExponentReport,
    pub beta_p: ExponentReport,
    pub rho: ExponentReport,
    /// `gamma / beta_P`
    pub bound: f64,
    pub holds: bool,
}

/// Checks `rho <= gamma / beta_P` with `C_rho = (C_gamma * c_P)^{1/beta_P}`.
/// Constants come from the certified metadata, defaulting to 1.
pub fn prop4_check(pair: &TransferPair, class: &HypothesisClass) -> Result<Prop4Report> {
    prop4_check_with(pair, class, &Grid::default())
}

pub fn prop4_check_with(pair: &TransferPair, class: &HypothesisClass, grid: &Grid) -> Result<Prop4Report> {
    let cert = pair.certified.clone().unwrap_or_default();
    let c_gamma = cert.c_gamma.unwrap_or(1.0);
    let c_p = cert.c_p.unwrap_or(1.0);
    let t = StatsTable::new(pair, class, grid)?;
    check_constant(c_gamma)?;
    check_constant(c_p)?;
    let gamma = report(&t, &t.dis_p, &t.dis_q_from_p, c_gamma, None);
    let beta_p = beta_from(&t.dis_p, &t.excess_p, c_p, &t);
    let c_rho = (c_gamma * c_p).powf(1.0 / beta_p.value);
    let rho = report(&t, &t.excess_p, &t.excess_q, c_rho, None);
    let bound = gamma.value / beta_p.value;
    let holds = rho.value <= bound * (1.0 + REL_TOL) || rho.value <= bound + REL_TOL;
    Ok(Prop4Report { gamma, beta_p, rho, bound, holds })
}

/// Result of checking every member of a sign-vector family.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyVerdict {
    pub membership: MembershipReport,
    pub rho: ExponentReport,
    pub gamma: ExponentReport,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyCheck {
    pub rho: f64,
    pub beta_p: f64,
    pub beta_q: f64,
    /// Constant for membership.
    pub c: f64,
    pub c_rho: f64,
    pub c_gamma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub members: usize,
    /// Distinct canonical pairs actually evaluated.
    pub evaluated: usize,
    pub all_hold: bool,
    /// Largest `rho_min` over the family.
    #[serde(serialize_with = "ser_value")]
    pub rho_max: f64,
    #[serde(serialize_with = "ser_value")]
    pub gamma_max: f64,
    pub verdicts: Vec<FamilyVerdict>,
}

fn verdict(pair: &TransferPair, class: &HypothesisClass, chk: &FamilyCheck) -> Result<FamilyVerdict> {
    let t = StatsTable::new(pair, class, &Grid::default())?;
    Ok(FamilyVerdict {
        membership: membership_from(&t, chk.rho, chk.beta_p, chk.beta_q, chk.c),
        rho: report(&t, &t.excess_p, &t.excess_q, chk.c_rho, None),
        gamma: report(&t, &t.dis_p, &t.dis_q_from_p, chk.c_gamma, None),
    })
}

/// Verifies every pair of a family, one full enumeration per pair.
pub fn verify_family_exhaustive(family: &SigmaFamily, chk: &FamilyCheck) -> Result<FamilyReport> {
    let verdicts = family.pairs().iter().map(|p| verdict(p, family.class(), chk)).collect::<Result<Vec<_>>>()?;
    Ok(summarize(verdicts, family.len()))
}

/// Verifies every pair of a family, exploiting the symmetry of the anchored
/// cube class: flipping the labels of the free points where `eta_P < 1/2`
/// maps each pair to a canonical pair, the class onto itself, and every
/// verdict onto the canonical verdict (witnesses map back by the same flip).
/// Pairs with equal canonical form are evaluated once.
pub fn verify_family(family: &SigmaFamily, chk: &FamilyCheck) -> Result<FamilyReport> {
    let layout = match family.class().as_finite().and_then(|c| c.cube_layout()) {
        Some(l) if l.anchor == Some((0, true)) => l,
        _ => return verify_family_exhaustive(family, chk),
    };
    let mut cache: HashMap<Vec<u64>, FamilyVerdict> = HashMap::new();
    let mut verdicts = Vec::with_capacity(family.len());
    for pair in family.pairs() {
        let (p, q) = match (&pair.p, &pair.q) {
            (Distribution::Discrete(p), Distribution::Discrete(q)) => (p, q),
            _ => return verify_family_exhaustive(family, chk),
        };
        let flip: Vec<bool> = (0..layout.size).map(|i| i != 0 && p.eta()[i] < 0.5).collect();
        let canon = |eta: &[f64]| -> Vec<f64> { eta.iter().zip(&flip).map(|(&e, &f)| if f { 1.0 - e } else { e }).collect() };
        let (ep, eq) = (canon(p.eta()), canon(q.eta()));
        let key: Vec<u64> = p.mass().iter().chain(q.mass()).chain(&ep).chain(&eq).map(|x| x.to_bits()).collect();
        if !cache.contains_key(&key) {
            let cpair = TransferPair::discrete(
                crate::distribution::DiscreteJoint::new(p.support().to_vec(), p.mass().to_vec(), ep)?,
                crate::distribution::DiscreteJoint::new(q.support().to_vec(), q.mass().to_vec(), eq)?,
                None,
            )?;
            cache.insert(key.clone(), verdict(&cpair, family.class(), chk)?);
        }
        let mut v = cache[&key].clone();
        let unflip = |h: &mut Option<Hypothesis>| {
            if let Some(Hypothesis::Labels(l)) = h {
                for (b, f) in l.iter_mut().zip(&flip) {
                    *b ^= f;
                }
            }
        };
        for viol in &mut v.membership.violations {
            unflip(&mut viol.witness);
        }
        for r in [&mut v.rho, &mut v.gamma] {
            unflip(&mut r.witness);
            r.witness_t = r.witness.clone();
        }
        verdicts.push(v);
    }
    let mut report = summarize(verdicts, family.len());
    report.evaluated = cache.len();
    Ok(report)
}

fn summarize(verdicts: Vec<FamilyVerdict>, members: usize) -> FamilyReport {
    let all_hold = verdicts.iter().all(|v| v.membership.holds);
    let rho_max = verdicts.iter().map(|v| v.rho.value).fold(f64::NEG_INFINITY, f64::max);
    let gamma_max = verdicts.iter().map(|v| v.gamma.value).fold(f64::NEG_INFINITY, f64::max);
    FamilyReport { members, evaluated: members, all_hold, rho_max, gamma_max, verdicts }
}

/// Index of the best member of `class` under `dist`, for callers that need
/// an enumeration position rather than a hypothesis.
pub fn best_index(pair_side: &Distribution, class: &HypothesisClass) -> Result<usize> {
    match pair_side {
        Distribution::Discrete(d) => {
            let proj = d.projection(class)?;
            let (a, b) = d.risk_weights(&proj)?;
            Ok(argmin_first(&proj.scores(&a, &b)))
        }
        Distribution::Continuous(_) => Err(Error::NotEnumerable("continuous distributions have no enumeration".into())),
    }
}
