//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use transfer_core::discrepancy::{d_a, d_y, d_y_localized_with, gamma_min, verify_family, FamilyCheck, Grid};
use rayon::prelude::*;
use transfer_core::cost_adaptive::{algorithm2, target_only, Algorithm2Config, CostSchedule, Decision, DistributionSampler};
use transfer_core::rng::derive_seed;
use transfer_core::cost_adaptive::delta_hat;
use transfer_core::hypothesis::Hypothesis;
use transfer_core::source_select::{algorithm4, delta_hat_weighted, Density};
use transfer_core::transfer_erm::{algorithm1, algorithm1_prime, selector_prop6};

mod common;
use transfer_core::hypothesis::{HypothesisClass, Orientation};
use transfer_core::ratelab::{
    cell_excess, compare_fit, quantile, CSV_HEADER, fit_slope, monte_carlo, pow2_grid, summarize, Axis, Estimator, FamilySource, FixedPair, RateTable, SlopeFit,
    Statistic, Trial,
};
use transfer_core::transfer_erm::ConfidenceParams;
use transfer_core::distribution::{theorem3_epsilon, DiscreteJoint, TransferPair, 
    build_theorem3_family, build_theorem4_family, chi2_bound, example_scenario, hamming, kl_bernoulli, packing_distance,
    packing_size, vg_packing, ExampleParams, SigmaChoice,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn crit1() -> Outcome {
    let mut failures = Vec::new();
    let mut families = 0;
    for d_h in [9, 13] {
        for rho in [1.0, 2.0, 4.0] {
            for beta in [0.25, 0.5, 0.9] {
                for eps in [0.1, 0.25, 0.5] {
                    let fam = build_theorem3_family(d_h, rho, beta, beta, eps, &SigmaChoice::FullCube).unwrap();
                    let chk = FamilyCheck { rho, beta_p: beta, beta_q: beta, c: 1.0, c_rho: 1.0, c_gamma: 1.0 };
                    let rep = verify_family(&fam, &chk).unwrap();
                    let rho_ok = rep.verdicts.iter().all(|v| (v.rho.value - rho).abs() <= 1e-9);
                    if !rep.all_hold || !rho_ok {
                        failures.push(format!("(d_H={d_h}, rho={rho}, beta={beta}, eps={eps})"));
                    }
                    families += 1;
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{families} families, every sign vector certified; failures: {failures:?}"))
}

fn crit2() -> Outcome {
    // (d_H, rho, beta_P, beta_Q, eps1, eps2, sigma choice)
    let settings = [
        (9, 2.0, 0.5, 0.5, 0.25, 0.1, SigmaChoice::FullCube),
        (9, 2.0, 0.5, 0.8, 0.1, 0.3, SigmaChoice::FullCube),
        (11, 4.0, 0.25, 0.5, 0.2, 0.2, SigmaChoice::FullCube),
        (13, 1.25, 0.8, 0.9, 0.5, 0.05, SigmaChoice::FullCube),
        (18, 2.0, 0.5, 0.6, 0.15, 0.15, SigmaChoice::Packing { seed: 7 }),
    ];
    let mut lines = Vec::new();
    let mut ok = 0;
    for (d_h, rho, bp, bq, e1, e2, choice) in settings {
        let fam = build_theorem4_family(d_h, rho, bp, bq, e1, e2, None, &choice).unwrap();
        let chk = FamilyCheck { rho, beta_p: bp, beta_q: bq, c: 2.0, c_rho: 2.0, c_gamma: 2.0 };
        let rep = verify_family(&fam, &chk).unwrap();
        let gamma = rho * bp;
        let gamma_ok = rep.verdicts.iter().all(|v| (v.gamma.value - gamma).abs() <= 1e-9);
        if rep.all_hold && gamma_ok {
            ok += 1;
        } else {
            lines.push(format!("(d_H={d_h}, rho={rho}, beta_P={bp}, beta_Q={bq}): hold={} gamma_max={}", rep.all_hold, rep.gamma_max));
        }
    }
    outcome(ok >= 4, format!("{ok}/5 settings with gamma_min = rho*beta_P and membership; failures: {lines:?}"))
}

fn crit3() -> Outcome {
    let ex = |id, gamma| example_scenario(id, &ExampleParams { gamma, ..Default::default() }).unwrap();
    let e2 = ex(2, None);
    let g2 = gamma_min(&e2.pair, &e2.class, 2.0).unwrap();
    let da = d_a(&e2.pair, &e2.class).unwrap();
    let dy = d_y(&e2.pair, &e2.class).unwrap();
    let ex2_ok = (g2.value - 1.0).abs() <= 1e-9 && da == 0.25 && dy == 0.25;

    let e3 = ex(3, Some(2.0));
    let fwd = gamma_min(&e3.pair, &e3.class, 1.0).unwrap().value;
    let back = gamma_min(&e3.pair.swapped(), &e3.class, 1.0).unwrap().value;
    let ex3_ok = fwd > back && (back - 1.0).abs() <= 1e-6;

    let e4 = ex(4, Some(0.5));
    // thresholds on a geometric grid around the decision boundary
    let grid = Grid::geometric_around(0.0, 1e-12, 1.0, 2000);
    let mut pts = Vec::new();
    for k in 4..=14 {
        let n_p = (1u64 << k) as f64;
        let v = d_y_localized_with(&e4.pair, &e4.class, 1.0 / n_p, &grid).unwrap();
        pts.push((n_p.ln(), v.ln()));
    }
    let slope = ols(&pts);
    let ex4_ok = (slope + 1.0).abs() <= 0.1;
    outcome(
        ex2_ok && ex3_ok && ex4_ok,
        format!(
            "ex2 gamma={} d_A={da} d_Y={dy}; ex3 gamma(P->Q)={fwd:.4} gamma(Q->P)={back:.4}; ex4 localized d_Y slope {slope:.4} (target -1)",
            g2.value
        ),
    )
}

const SEED: u64 = 20240601;

/// Per-trial excess risks of `est` on a family tuned to `eps`.
fn family_cell(d_h: usize, rho: f64, bp: f64, bq: f64, eps: f64, est: Estimator, n_p: usize, n_q: usize, trials: usize) -> Vec<f64> {
    let fam = build_theorem3_family(d_h, rho, bp, bq, eps, &SigmaChoice::FullCube).unwrap();
    let src = FamilySource::new(fam).unwrap();
    let cp = ConfidenceParams::default();
    cell_excess(&src, &|tr: &Trial<'_>, class: &HypothesisClass| est.fit(&tr.s_p, &tr.s_q, class, &cp), n_p, n_q, trials, SEED).unwrap()
}

fn tuned_slope(axis: Axis, rho: f64, bp: f64, bq: f64, est: Estimator, fixed: usize, c1: f64) -> SlopeFit {
    let d_h = 9;
    let mut table = RateTable::default();
    for n in pow2_grid(6, 14) {
        let (n_p, n_q) = match axis {
            Axis::NP => (n, fixed),
            Axis::NQ => (fixed, n),
        };
        let (ep, eq) = match axis {
            Axis::NP => (n_p, 0),
            Axis::NQ => (0, n_q),
        };
        let eps = theorem3_epsilon(d_h, ep, eq, rho, bp, bq, c1);
        let v = family_cell(d_h, rho, bp, bq, eps, est, n_p, n_q, 200);
        table.rows.push(summarize(n_p, n_q, est.id(), SEED, v).unwrap());
    }
    fit_slope(&table, axis, Statistic::Median).unwrap()
}

fn crit4() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for bq in [0.5, 1.0] {
        let fit = tuned_slope(Axis::NQ, 2.0, 0.5, bq, Estimator::ErmQ, 0, 1.0);
        let c = compare_fit(fit, -1.0 / (2.0 - bq), 0.2).unwrap();
        ok &= c.pass;
        parts.push(format!("beta_Q={bq}: slope {:.3} vs {:.3}", c.fitted, c.theory));
    }
    outcome(ok, parts.join("; "))
}

fn crit5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (rho, bp) in [(1.0, 1.0), (2.0, 0.5)] {
        let fit = tuned_slope(Axis::NP, rho, bp, bp, Estimator::Alg1, 8, 1.0);
        let c = compare_fit(fit, -1.0 / ((2.0 - bp) * rho), 0.2).unwrap();
        ok &= c.pass;
        parts.push(format!("(rho={rho}, beta_P={bp}): slope {:.3} vs {:.3}", c.fitted, c.theory));
    }
    let e4 = example_scenario(4, &ExampleParams { gamma: Some(0.5), ..Default::default() }).unwrap();
    let src = FixedPair::new(e4.pair, e4.class).unwrap();
    let grid: Vec<(usize, usize)> = pow2_grid(6, 14).into_iter().map(|n| (n, 0)).collect();
    let t = monte_carlo(&src, Estimator::ErmP, &grid, 200, SEED, &ConfidenceParams::default()).unwrap();
    let fit = fit_slope(&t, Axis::NP, Statistic::Median).unwrap();
    ok &= fit.slope <= -1.6;
    parts.push(format!("example 4 ERM-on-P slope {:.3} (need <= -1.6)", fit.slope));
    outcome(ok, parts.join("; "))
}

fn crit6() -> Outcome {
    let (rho, beta, eps, trials) = (2.0, 0.5, 0.25, 200);
    let fam = build_theorem3_family(9, rho, beta, beta, eps, &SigmaChoice::FullCube).unwrap();
    let src = FamilySource::new(fam).unwrap();
    let cp = ConfidenceParams::default();
    let mut grid = Vec::new();
    for n_p in [64, 256, 1024, 4096] {
        for n_q in [16, 64, 256, 1024] {
            grid.push((n_p, n_q));
        }
    }
    let slack = 2.0 / (trials as f64).sqrt();
    let mut worst = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    let alg = monte_carlo(&src, Estimator::Alg1, &grid, trials, SEED, &cp).unwrap();
    let ep = monte_carlo(&src, Estimator::ErmP, &grid, trials, SEED, &cp).unwrap();
    let eq = monte_carlo(&src, Estimator::ErmQ, &grid, trials, SEED, &cp).unwrap();
    for (i, &(n_p, n_q)) in grid.iter().enumerate() {
        let bound = 1.5 * ep.rows[i].median.min(eq.rows[i].median) + slack;
        worst = worst.max(alg.rows[i].median - bound);
        if alg.rows[i].median > bound {
            bad.push((n_p, n_q));
        }
    }
    outcome(bad.is_empty(), format!("{} cells; largest median minus bound {worst:.4}; violations {bad:?}", grid.len()))
}

/// Twenty points; `P` is noiseless with boundary at 10.5, `Q` has noise 0.3
/// and boundary at 7.5, and the three points between carry `Q` mass 1/8
/// each, so `E_Q(h*_P) = 3 * (1/8) * 0.4 = 0.15`.
fn rcs_violating_pair() -> (TransferPair, HypothesisClass) {
    let support = DiscreteJoint::indexed_support(20);
    let mass_p = vec![0.05; 20];
    let eta_p: Vec<f64> = (0..20).map(|i| if i >= 11 { 1.0 } else { 0.0 }).collect();
    let mass_q: Vec<f64> = (0..20).map(|i| if (8..=10).contains(&i) { 0.125 } else { 0.625 / 17.0 }).collect();
    let eta_q: Vec<f64> = (0..20).map(|i| if i >= 8 { 0.7 } else { 0.3 }).collect();
    let pair = TransferPair::discrete(
        DiscreteJoint::new(support.clone(), mass_p, eta_p).unwrap(),
        DiscreteJoint::new(support, mass_q, eta_q).unwrap(),
        None,
    )
    .unwrap();
    (pair, HypothesisClass::Thresholds(Orientation::PositiveAbove))
}

fn crit7() -> Outcome {
    let (pair, class) = rcs_violating_pair();
    let star_p = pair.p.best_in_class(&class).unwrap();
    let gap = pair.q.excess_risk(&star_p, &class).unwrap();
    let src = FixedPair::new(pair, class).unwrap();
    let cp = ConfidenceParams::default();
    let sizes = [32, 64, 128, 256, 512];
    let grid: Vec<(usize, usize)> = sizes.iter().map(|&q| (8192, q)).collect();
    let sel = monte_carlo(&src, Estimator::Selector, &grid, 200, SEED, &cp).unwrap();
    let eq = monte_carlo(&src, Estimator::ErmQ, &grid, 200, SEED, &cp).unwrap();
    let slack = 0.05;
    let mut ok = (gap - 0.15).abs() < 1e-12;
    let mut parts = Vec::new();
    for i in 0..grid.len() {
        let (s, q) = (sel.rows[i].median, eq.rows[i].median);
        // moderate target sizes are those where the target constraint can
        // separate a 0.15 gap at c = 1
        if grid[i].1 >= 256 {
            ok &= s <= (gap + slack).min(q);
        }
        parts.push(format!("n_Q={}: {s:.3} vs Q-only {q:.3}", grid[i].1));
    }
    outcome(ok, format!("E_Q(h*_P) = {gap:.3}, n_P = 8192, checked at n_Q >= 256; selector medians {}", parts.join(", ")))
}

struct AdaptiveRun {
    excess: f64,
    step7: bool,
    cost: f64,
    target_only_cost: f64,
}

fn adaptive_trials(eps: f64, u_p: f64, trials: usize) -> Vec<AdaptiveRun> {
    let s = example_scenario(2, &ExampleParams::default()).unwrap();
    let cfg = Algorithm2Config::new(eps, 0.1, 1.0);
    let (sp, sq) = (CostSchedule::linear(u_p).unwrap(), CostSchedule::linear(1.0).unwrap());
    let need = cfg.unlabeled_needed(s.class.vc_dim());
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(SEED, &[8, eps.to_bits(), u_p.to_bits(), t as u64]);
            let u = s.pair.q.sample_unlabeled(need, derive_seed(seed, &[0])).points;
            let mut samp_p = DistributionSampler::new(&s.pair.p, derive_seed(seed, &[1]));
            let mut samp_q = DistributionSampler::new(&s.pair.q, derive_seed(seed, &[2]));
            let (h, tr) = algorithm2(&cfg, &sp, &sq, &mut samp_p, &mut samp_q, &u, &s.class).unwrap();
            let mut samp_q = DistributionSampler::new(&s.pair.q, derive_seed(seed, &[2]));
            let (_, base) = target_only(&cfg, &sq, &mut samp_q, &s.class).unwrap();
            AdaptiveRun {
                excess: s.pair.q.excess_risk(&h, &s.class).unwrap(),
                step7: tr.returned_by == Decision::Step7,
                cost: tr.total_cost,
                target_only_cost: base.total_cost,
            }
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

fn crit8() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.05] {
        for u_p in [1.0, 0.01] {
            let runs = adaptive_trials(eps, u_p, 100);
            let n = runs.len() as f64;
            let good = runs.iter().filter(|r| r.excess <= eps).count() as f64 / n;
            let step7 = runs.iter().filter(|r| r.step7).count() as f64 / n;
            let cost = median(runs.iter().map(|r| r.cost).collect());
            let base = median(runs.iter().map(|r| r.target_only_cost).collect());
            ok &= good >= 0.85;
            if u_p < 1.0 {
                ok &= step7 >= 0.8 && cost <= base;
            }
            parts.push(format!("eps={eps} u_P={u_p}: within eps {good:.2}, step 7 {step7:.2}, median cost {cost} vs target-only {base}"));
        }
    }
    outcome(ok, parts.join("; "))
}

fn crit9() -> Outcome {
    let cells = 1 << 12;
    let disc = |g: f64| example_scenario(3, &ExampleParams { gamma: Some(g), ..Default::default() }).unwrap().pair.discretize(cells).unwrap();
    let (one, three) = (disc(1.0), disc(3.0));
    assert_eq!(one.q.as_discrete().unwrap().mass(), three.q.as_discrete().unwrap().mass());
    let class = HypothesisClass::Thresholds(Orientation::PositiveAbove);
    let cp = ConfidenceParams::default();
    let picks: Vec<usize> = (0..100u64)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(SEED, &[9, t]);
            let sources = [one.p.sample_labeled(4096, derive_seed(seed, &[1])), three.p.sample_labeled(4096, derive_seed(seed, &[2]))];
            let s_q = one.q.sample_labeled(0, derive_seed(seed, &[3]));
            let u = one.q.sample_unlabeled(8192, derive_seed(seed, &[4])).points;
            algorithm4(&sources, &s_q, &u, &class, &cp).unwrap().chosen
        })
        .collect();
    let first = picks.iter().filter(|&&i| i == 0).count();
    outcome(first >= 90, format!("source with gamma = 1 chosen in {first}/100 trials ({cells}-cell discretizations)"))
}

fn crit10() -> Outcome {
    let mut mismatches = [0usize; 5];
    for k in 0..1000u64 {
        let inst = common::instance(derive_seed(SEED, &[10, k]));
        let lib = |h: Hypothesis| h.labels().unwrap().to_vec();
        let (sp, sq, class, cp) = (&inst.s_p, &inst.s_q, &inst.class, &inst.cp);
        mismatches[0] += usize::from(lib(algorithm1(sp, sq, class, cp).unwrap()) != common::algorithm1(&inst));
        mismatches[1] += usize::from(lib(algorithm1_prime(sp, sq, class, cp).unwrap()) != common::algorithm1_prime(&inst));
        mismatches[2] += usize::from(lib(selector_prop6(sp, sq, class, cp).unwrap()) != common::selector(&inst));
        mismatches[3] += usize::from(delta_hat(sp, &inst.u, class, cp).unwrap() != common::delta_hat(&inst));
        let f = Density::new(&inst.weights).unwrap();
        mismatches[4] += usize::from(delta_hat_weighted(sp, &f, &inst.u, class, cp, inst.d_p).unwrap() != common::delta_hat_weighted(&inst));
    }
    outcome(
        mismatches.iter().all(|&m| m == 0),
        format!("1000 instances; mismatches algorithm1/algorithm1'/selector/delta_hat/delta_hat_weighted = {mismatches:?}"),
    )
}

fn ols(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn crit11() -> Outcome {
    let mut kl_ok = true;
    for i in 1..=49 {
        let eps = i as f64 / 100.0;
        for z in [-1i8, 1] {
            let zf = f64::from(z);
            let kl = kl_bernoulli(0.5 + zf * eps / 2.0, 0.5 - zf * eps / 2.0).unwrap();
            kl_ok &= kl <= chi2_bound(eps, z).unwrap();
        }
    }
    let mut pack_ok = true;
    for d in [8, 16, 24, 32] {
        let pk = vg_packing(d, 1).unwrap();
        let min_dist = (0..pk.len()).flat_map(|i| (i + 1..pk.len()).map(move |j| (i, j))).map(|(i, j)| hamming(&pk[i], &pk[j])).min().unwrap();
        pack_ok &= pk.len() >= packing_size(d) && min_dist >= packing_distance(d) && pk[0].iter().all(|&s| s == 1);
    }
    let replay_ok = csv_replay();
    outcome(kl_ok && pack_ok && replay_ok, format!("kl <= chi2 on 98 points: {kl_ok}; packings d in 8..32: {pack_ok}; csv replay: {replay_ok}"))
}

/// Every rate table built here is regenerated on a one-thread and a
/// four-thread pool and compared byte for byte.
fn csv_replay() -> bool {
    let tables = || -> Vec<String> {
        let cp = ConfidenceParams::default();
        let fam = build_theorem3_family(9, 2.0, 0.5, 0.5, 0.25, &SigmaChoice::FullCube).unwrap();
        let fsrc = FamilySource::new(fam).unwrap();
        let e2 = example_scenario(2, &ExampleParams::default()).unwrap();
        let csrc = FixedPair::new(e2.pair, e2.class).unwrap();
        let grid = [(64, 16), (256, 0), (0, 128)];
        let mut out = Vec::new();
        for est in Estimator::ALL {
            out.push(monte_carlo(&fsrc, est, &grid, 25, SEED, &cp).unwrap().to_csv_string().unwrap());
            out.push(monte_carlo(&csrc, est, &grid, 25, SEED, &cp).unwrap().to_csv_string().unwrap());
        }
        out
    };
    let on = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(tables);
    let (a, b, c) = (on(1), on(4), tables());
    a == b && b == c && a.iter().all(|t| t.starts_with(CSV_HEADER))
}

fn main() {
    let criteria: Vec<(u32, &str, Option<Duration>, fn() -> Outcome)> = vec![
        (1, "construction certification", Some(Duration::from_secs(10)), crit1),
        (2, "two-block family certification", Some(Duration::from_secs(10)), crit2),
        (3, "example reproduction", None, crit3),
        (4, "target-axis rate slopes", Some(Duration::from_secs(120)), crit4),
        (5, "source-axis rate slopes", Some(Duration::from_secs(180)), crit5),
        (6, "min-of-rates behavior", None, crit6),
        (7, "beyond the covariate-shift condition", None, crit7),
        (8, "adaptive sampling under label costs", Some(Duration::from_secs(300)), crit8),
        (9, "choosing among sources", None, crit9),
        (10, "oracle equivalence", None, crit10),
        (11, "infrastructure", None, crit11),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_time = limit.map_or(true, |l| took <= l);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit_txt = limit.map_or(String::new(), |l| format!(" (limit {}s)", l.as_secs()));
        println!("criterion {n:>2} {}: {name} [{:.1}s{limit_txt}] {}", if pass { "PASS" } else { "FAIL" }, took.as_secs_f64(), o.detail);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
