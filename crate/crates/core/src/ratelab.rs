//! Monte Carlo rate measurements and closed-form rate values.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{SigmaFamily, TransferPair};
use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisClass, LabeledSample};
use crate::rng::{derive_seed, rng_from_seed};
use crate::transfer_erm::{algorithm1, algorithm1_prime, erm_over_union, selector_prop6, ConfidenceParams};

pub const CSV_HEADER: &str = "n_p,n_q,estimator,trials,mean,median,q10,q90,seed";

/// Where each trial's pair comes from.
pub trait PairSource: Sync {
    fn class(&self) -> &HypothesisClass;
    fn len(&self) -> usize;
    fn pair(&self, i: usize) -> &TransferPair;
    /// Best in-class hypothesis under `Q` for pair `i`.
    fn q_best(&self, i: usize) -> Result<&Hypothesis>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A single pair used by every trial.
pub struct FixedPair {
    pair: TransferPair,
    class: HypothesisClass,
    best: Hypothesis,
}

impl FixedPair {
    pub fn new(pair: TransferPair, class: HypothesisClass) -> Result<Self> {
        let best = pair.q.best_in_class(&class)?;
        Ok(Self { pair, class, best })
    }
}

impl PairSource for FixedPair {
    fn class(&self) -> &HypothesisClass {
        &self.class
    }
    fn len(&self) -> usize {
        1
    }
    fn pair(&self, _: usize) -> &TransferPair {
        &self.pair
    }
    fn q_best(&self, _: usize) -> Result<&Hypothesis> {
        Ok(&self.best)
    }
}

/// A family of pairs; each trial draws a member uniformly.
pub struct FamilySource {
    family: SigmaFamily,
    best: Vec<OnceLock<Hypothesis>>,
}

impl FamilySource {
    pub fn new(family: SigmaFamily) -> Result<Self> {
        if family.is_empty() {
            return Err(invalid("empty family"));
        }
        let best = (0..family.len()).map(|_| OnceLock::new()).collect();
        Ok(Self { family, best })
    }

    pub fn family(&self) -> &SigmaFamily {
        &self.family
    }
}

impl PairSource for FamilySource {
    fn class(&self) -> &HypothesisClass {
        self.family.class()
    }
    fn len(&self) -> usize {
        self.family.len()
    }
    fn pair(&self, i: usize) -> &TransferPair {
        &self.family.pairs()[i]
    }
    fn q_best(&self, i: usize) -> Result<&Hypothesis> {
        if let Some(h) = self.best[i].get() {
            return Ok(h);
        }
        let h = self.family.pairs()[i].q.best_in_class(self.family.class())?;
        Ok(self.best[i].get_or_init(|| h))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    ErmP,
    ErmQ,
    Alg1,
    Alg1Prime,
    Selector,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [Estimator::ErmP, Estimator::ErmQ, Estimator::Alg1, Estimator::Alg1Prime, Estimator::Selector];

    pub fn id(&self) -> &'static str {
        match self {
            Estimator::ErmP => "erm_p",
            Estimator::ErmQ => "erm_q",
            Estimator::Alg1 => "alg1",
            Estimator::Alg1Prime => "alg1_prime",
            Estimator::Selector => "selector",
        }
    }

    pub fn fit(&self, s_p: &LabeledSample, s_q: &LabeledSample, class: &HypothesisClass, cp: &ConfidenceParams) -> Result<Hypothesis> {
        match self {
            Estimator::ErmP => erm_over_union(class, s_p, &[s_q]),
            Estimator::ErmQ => erm_over_union(class, s_q, &[s_p]),
            Estimator::Alg1 => algorithm1(s_p, s_q, class, cp),
            Estimator::Alg1Prime => algorithm1_prime(s_p, s_q, class, cp),
            Estimator::Selector => selector_prop6(s_p, s_q, class, cp),
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| invalid(format!("unknown estimator {s:?}; expected one of erm_p, erm_q, alg1, alg1_prime, selector")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n_p: usize,
    pub n_q: usize,
    pub estimator: String,
    pub trials: usize,
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        if self.rows.is_empty() {
            wr.write_record(CSV_HEADER.split(','))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
        if header.join(",") != CSV_HEADER {
            return Err(invalid(format!("unexpected rate table header {:?}", header.join(","))));
        }
        let rows = rd.deserialize().collect::<std::result::Result<Vec<RateRow>, _>>()?;
        Ok(Self { rows })
    }

    pub fn extend(&mut self, other: RateTable) {
        self.rows.extend(other.rows);
    }

    /// Rows for one estimator.
    pub fn filter(&self, estimator: &str) -> RateTable {
        RateTable { rows: self.rows.iter().filter(|r| r.estimator == estimator).cloned().collect() }
    }

    pub fn get(&self, n_p: usize, n_q: usize, estimator: &str) -> Option<&RateRow> {
        self.rows.iter().find(|r| r.n_p == n_p && r.n_q == n_q && r.estimator == estimator)
    }
}

/// Quantile of sorted data with linear interpolation between order
/// statistics at position `(n - 1) p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summary row over per-trial excess risks.
pub fn summarize(n_p: usize, n_q: usize, estimator: &str, seed: u64, mut values: Vec<f64>) -> Result<RateRow> {
    if values.is_empty() {
        return Err(invalid("trials must be at least 1"));
    }
    let trials = values.len();
    let mean = values.iter().sum::<f64>() / trials as f64;
    values.sort_by(f64::total_cmp);
    Ok(RateRow {
        n_p,
        n_q,
        estimator: estimator.to_owned(),
        trials,
        mean,
        median: quantile(&values, 0.5),
        q10: quantile(&values, 0.1),
        q90: quantile(&values, 0.9),
        seed,
    })
}

/// Samples, pair index and seeds for one trial. Seeds depend only on the
/// master seed, the cell sizes and the trial number, so estimators run on
/// the same cell see the same data.
pub struct Trial<'a> {
    pub index: usize,
    pub pair: &'a TransferPair,
    pub s_p: LabeledSample,
    pub s_q: LabeledSample,
    pub seed: u64,
}

pub fn trial<'a>(source: &'a dyn PairSource, n_p: usize, n_q: usize, t: usize, seed: u64) -> Trial<'a> {
    let base = derive_seed(seed, &[n_p as u64, n_q as u64, t as u64]);
    let index = if source.len() == 1 { 0 } else { rng_from_seed(derive_seed(base, &[0])).gen_range(0..source.len()) };
    let pair = source.pair(index);
    Trial {
        index,
        pair,
        s_p: pair.p.sample_labeled(n_p, derive_seed(base, &[1])),
        s_q: pair.q.sample_labeled(n_q, derive_seed(base, &[2])),
        seed: base,
    }
}

/// Per-trial excess target risks for one cell, in trial order.
pub fn cell_excess<F>(source: &dyn PairSource, fit: &F, n_p: usize, n_q: usize, trials: usize, seed: u64) -> Result<Vec<f64>>
where
    F: Fn(&Trial<'_>, &HypothesisClass) -> Result<Hypothesis> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let tr = trial(source, n_p, n_q, t, seed);
            let h = fit(&tr, source.class())?;
            tr.pair.q.excess_against(&h, source.q_best(tr.index)?)
        })
        .collect()
}

/// Runs `trials` independent fits per grid cell and records the exact
/// excess target risk of each.
pub fn monte_carlo(
    source: &dyn PairSource,
    estimator: Estimator,
    grid: &[(usize, usize)],
    trials: usize,
    seed: u64,
    cp: &ConfidenceParams,
) -> Result<RateTable> {
    cp.validate()?;
    monte_carlo_with(source, estimator.id(), &|tr: &Trial<'_>, class: &HypothesisClass| estimator.fit(&tr.s_p, &tr.s_q, class, cp), grid, trials, seed)
}

/// [`monte_carlo`] with an arbitrary fitting rule.
pub fn monte_carlo_with<F>(source: &dyn PairSource, id: &str, fit: &F, grid: &[(usize, usize)], trials: usize, seed: u64) -> Result<RateTable>
where
    F: Fn(&Trial<'_>, &HypothesisClass) -> Result<Hypothesis> + Sync,
{
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &(n_p, n_q) in grid {
        let values = cell_excess(source, fit, n_p, n_q, trials, seed)?;
        rows.push(summarize(n_p, n_q, id, seed, values)?);
    }
    Ok(RateTable { rows })
}

/// Geometric grid `2^lo, ..., 2^hi`.
pub fn pow2_grid(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    NP,
    NQ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Median,
}

pub const DEFAULT_EXCLUDE: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub used: usize,
    /// Axis values dropped as the smallest cells.
    pub excluded_small: Vec<usize>,
    /// Axis values dropped because the statistic was zero.
    pub excluded_zero: Vec<usize>,
}

/// Least squares of `ln statistic` on `ln n`, dropping the two smallest
/// axis values.
pub fn fit_slope(table: &RateTable, axis: Axis, stat: Statistic) -> Result<SlopeFit> {
    fit_slope_with(table, axis, stat, DEFAULT_EXCLUDE)
}

pub fn fit_slope_with(table: &RateTable, axis: Axis, stat: Statistic, exclude: usize) -> Result<SlopeFit> {
    let key = |r: &RateRow| match axis {
        Axis::NP => (r.n_p, r.n_q),
        Axis::NQ => (r.n_q, r.n_p),
    };
    if let Some(first) = table.rows.first() {
        let other = key(first).1;
        if table.rows.iter().any(|r| key(r).1 != other || r.estimator != first.estimator) {
            return Err(invalid("slope fits need a single estimator with the other sample size held fixed"));
        }
    }
    let mut rows: Vec<&RateRow> = table.rows.iter().collect();
    rows.sort_by_key(|r| key(r).0);
    let excluded_small: Vec<usize> = rows.iter().take(exclude).map(|r| key(r).0).collect();
    let mut pts = Vec::new();
    let mut excluded_zero = Vec::new();
    for r in rows.into_iter().skip(exclude) {
        let y = match stat {
            Statistic::Mean => r.mean,
            Statistic::Median => r.median,
        };
        let n = key(r).0;
        if y > 0.0 && n > 0 {
            pts.push(((n as f64).ln(), y.ln()));
        } else {
            log::warn!("dropping cell n = {n} from the slope fit: statistic {y} is not positive");
            excluded_zero.push(n);
        }
    }
    if pts.len() < 3 {
        return Err(Error::TooFewRows { usable: pts.len() });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("slope fit needs distinct sample sizes"));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(SlopeFit { slope, intercept: my - slope * mx, r2, used: pts.len(), excluded_small, excluded_zero })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryComparison {
    pub fitted: f64,
    pub theory: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub fit: SlopeFit,
}

impl std::fmt::Display for TheoryComparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: fitted slope {:.4} vs theory {:.4} (|diff| = {:.4}, tolerance {}, r2 = {:.3}, {} cells)",
            if self.pass { "pass" } else { "fail" },
            self.fitted,
            self.theory,
            (self.fitted - self.theory).abs(),
            self.tolerance,
            self.fit.r2,
            self.fit.used
        )
    }
}

pub fn compare_to_theory(table: &RateTable, axis: Axis, stat: Statistic, theory_exponent: f64, tolerance: f64) -> Result<TheoryComparison> {
    compare_fit(fit_slope(table, axis, stat)?, theory_exponent, tolerance)
}

pub fn compare_fit(fit: SlopeFit, theory_exponent: f64, tolerance: f64) -> Result<TheoryComparison> {
    Ok(TheoryComparison {
        fitted: fit.slope,
        theory: theory_exponent,
        tolerance,
        pass: (fit.slope - theory_exponent).abs() <= tolerance,
        fit,
    })
}

#[allow(non_snake_case)]
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoryRates {
    pub eps_thm3: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps_L: f64,
    pub eps_H: f64,
    pub n_tilde_P: f64,
}

/// Closed-form minimax scales, with `d_H / 0 = +inf`.
///
/// `eps1(n_P) = (d/n_P)^{1/((2-beta_P) rho beta_Q)}`, `eps1(n_Q) = (d/n_Q)^{1/(2-beta_Q)}`,
/// `eps2(n_P) = (d/n_P)^{1/((2-beta_P) rho)}`, `eps2(n_Q) = d/n_Q`.
pub fn theory_rates(n_p: usize, n_q: usize, d_h: usize, rho: f64, beta_p: f64, beta_q: f64) -> Result<TheoryRates> {
    if !(rho > 0.0) || !(0.0..=1.0).contains(&beta_p) || !(0.0..=1.0).contains(&beta_q) || d_h == 0 {
        return Err(invalid("theory rates need rho > 0, beta values in [0, 1] and d_H >= 1"));
    }
    let r = |n: usize| if n == 0 { f64::INFINITY } else { d_h as f64 / n as f64 };
    let p_exp = 1.0 / ((2.0 - beta_p) * rho);
    let eps1_p = r(n_p).powf(p_exp / beta_q);
    let eps1_q = r(n_q).powf(1.0 / (2.0 - beta_q));
    let eps2_p = r(n_p).powf(p_exp);
    let eps2_q = r(n_q);
    let eps1 = eps1_p.min(eps1_q);
    let eps2 = eps2_p.min(eps2_q);
    Ok(TheoryRates {
        eps_thm3: eps2_p.min(eps1_q),
        eps1,
        eps2,
        eps_L: eps1.max(eps2),
        eps_H: eps2_p.min(eps1_q),
        n_tilde_P: (n_p as f64).powf((2.0 - beta_q) * p_exp),
    })
}
