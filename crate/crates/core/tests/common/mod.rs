//! Brute-force reimplementations over explicit member lists, plus a random
//! small-instance generator.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use transfer_core::hypothesis::{FiniteClass, Hypothesis, HypothesisClass, LabeledSample, Point, SupportPoint};
use transfer_core::rng::rng_from_seed;
use transfer_core::transfer_erm::{a_n, a_n_dprime, a_n_prime, ConfidenceParams};

pub struct Instance {
    pub members: Vec<Vec<bool>>,
    pub class: HypothesisClass,
    pub s_p: LabeledSample,
    pub s_q: LabeledSample,
    pub u: Vec<Point>,
    pub weights: Vec<f64>,
    pub d_p: usize,
    pub cp: ConfidenceParams,
}

fn pt(i: usize) -> Point {
    Point::Support(SupportPoint { index: i, coordinate: i as f64 })
}

fn sample(rng: &mut impl Rng, m: usize, n: usize) -> LabeledSample {
    let points = (0..n).map(|_| pt(rng.gen_range(0..m))).collect();
    let labels = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    LabeledSample::new(points, labels, 0)
}

fn size(rng: &mut impl Rng) -> usize {
    if rng.gen_bool(0.1) {
        0
    } else {
        rng.gen_range(1..=64)
    }
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let m = rng.gen_range(1..=8usize);
    let mut all: Vec<usize> = (0..1usize << m).collect();
    all.shuffle(&mut rng);
    let k = rng.gen_range(1..=all.len());
    let members: Vec<Vec<bool>> = all[..k].iter().map(|&bits| (0..m).map(|i| (bits >> i) & 1 == 1).collect()).collect();
    let class = FiniteClass::new(members.iter().cloned().map(Hypothesis::Labels).collect(), rng.gen_range(1..=3)).unwrap().into();
    let s_p = {
        let n = size(&mut rng);
        sample(&mut rng, m, n)
    };
    let s_q = {
        let n = size(&mut rng);
        sample(&mut rng, m, n)
    };
    let u = (0..size(&mut rng)).map(|_| pt(rng.gen_range(0..m))).collect();
    // quarter-integer weights keep every sum exact
    let weights = (0..m).map(|_| rng.gen_range(0..=8) as f64 / 4.0).collect();
    let cp = ConfidenceParams::new(*[0.25, 0.5, 1.0, 2.0].choose(&mut rng).unwrap(), *[0.05, 0.1, 0.3].choose(&mut rng).unwrap()).unwrap();
    Instance { members, class, s_p, s_q, u, weights, d_p: rng.gen_range(0..=3), cp }
}

fn idx(p: &Point) -> usize {
    p.index().unwrap()
}

pub fn risk(h: &[bool], s: &LabeledSample) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    s.iter().filter(|(x, y)| h[idx(x)] != *y).count() as f64 / s.len() as f64
}

pub fn dis(h: &[bool], g: &[bool], pts: &[Point]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    pts.iter().filter(|x| h[idx(x)] != g[idx(x)]).count() as f64 / pts.len() as f64
}

fn first_min(v: &[f64]) -> usize {
    let mut b = 0;
    for i in 1..v.len() {
        if v[i] < v[b] {
            b = i;
        }
    }
    b
}

pub fn erm(members: &[Vec<bool>], s: &LabeledSample) -> usize {
    first_min(&members.iter().map(|h| risk(h, s)).collect::<Vec<_>>())
}

fn feasible(h: &[bool], g: &[bool], s: &LabeledSample, a: f64, c: f64) -> bool {
    a.is_infinite() || risk(h, s) - risk(g, s) <= c * (dis(h, g, &s.points) * a).sqrt() + c * a
}

fn constrained(members: &[Vec<bool>], obj: &LabeledSample, con: &LabeledSample, a: f64, c: f64) -> usize {
    let anchor = &members[erm(members, con)];
    let mut best: Option<usize> = None;
    for (i, h) in members.iter().enumerate() {
        if feasible(h, anchor, con, a, c) && best.map_or(true, |b| risk(h, obj) < risk(&members[b], obj)) {
            best = Some(i);
        }
    }
    best.unwrap()
}

pub fn algorithm1(inst: &Instance) -> Vec<bool> {
    let a = a_n(inst.s_q.len(), inst.class.vc_dim(), inst.cp.delta);
    inst.members[constrained(&inst.members, &inst.s_p, &inst.s_q, a, inst.cp.c)].clone()
}

pub fn algorithm1_prime(inst: &Instance) -> Vec<bool> {
    let a = a_n(inst.s_p.len(), inst.class.vc_dim(), inst.cp.delta);
    inst.members[constrained(&inst.members, &inst.s_q, &inst.s_p, a, inst.cp.c)].clone()
}

pub fn selector(inst: &Instance) -> Vec<bool> {
    let a = a_n(inst.s_q.len(), inst.class.vc_dim(), inst.cp.delta);
    let hp = &inst.members[erm(&inst.members, &inst.s_p)];
    let hq = &inst.members[erm(&inst.members, &inst.s_q)];
    if feasible(hp, hq, &inst.s_q, a, inst.cp.c) {
        hp.clone()
    } else {
        hq.clone()
    }
}

pub fn delta_hat(inst: &Instance) -> f64 {
    let (s, members) = (&inst.s_p, &inst.members);
    let a = a_n_prime(s.len(), inst.class.vc_dim(), inst.cp.delta);
    let anchor = &members[erm(members, s)];
    members.iter().filter(|h| feasible(h, anchor, s, a, inst.cp.c)).map(|h| dis(h, anchor, &inst.u)).fold(0.0, f64::max)
}

pub fn delta_hat_weighted(inst: &Instance) -> f64 {
    let (s, members, w) = (&inst.s_p, &inst.members, &inst.weights);
    let n = s.len();
    let ratio = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
    let wrisk = |h: &[bool]| ratio(s.iter().filter(|(x, y)| h[idx(x)] != *y).map(|(x, _)| w[idx(x)]).sum());
    let wdis = |h: &[bool], g: &[bool]| ratio(s.points.iter().filter(|x| h[idx(x)] != g[idx(x)]).map(|x| w[idx(x)] * w[idx(x)]).sum());
    let a = a_n_dprime(n, inst.class.vc_dim(), inst.d_p, inst.cp.delta);
    let sup = w.iter().cloned().fold(0.0, f64::max);
    let anchor = &members[first_min(&members.iter().map(|h| wrisk(h)).collect::<Vec<_>>())];
    let c = inst.cp.c;
    members
        .iter()
        .filter(|h| a.is_infinite() || wrisk(h) - wrisk(anchor) <= c * (wdis(h, anchor) * a).sqrt() + c * sup * a)
        .map(|h| dis(h, anchor, &inst.u))
        .fold(0.0, f64::max)
}
