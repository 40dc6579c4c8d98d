//! Lower-bound families indexed by sign vectors.
//!
//! Support points are `x_0, ..., x_d` with `x_0` labeled 1 by every Bayes
//! classifier. `sigma_i = +1` means `eta(x_i) > 1/2`, so the Bayes label of
//! `x_i` is 1.

use serde::Serialize;

use super::joint::DiscreteJoint;
use super::packing::{full_cube, vg_packing, Sign};
use super::pair::{Certified, TransferPair};
use crate::error::{invalid, Result};
use crate::hypothesis::{FiniteClass, Hypothesis, HypothesisClass};

/// Which sign vectors index a family.
#[derive(Clone, Debug, PartialEq)]
pub enum SigmaChoice {
    /// Full cube when `d <= 12`, otherwise a packing with this seed.
    Auto { seed: u64 },
    FullCube,
    Packing { seed: u64 },
    Explicit(Vec<Vec<Sign>>),
}

impl Default for SigmaChoice {
    fn default() -> Self {
        SigmaChoice::Auto { seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum FamilyParams {
    Theorem3 { d_h: usize, rho: f64, beta_p: f64, beta_q: f64, epsilon: f64 },
    Theorem4 { d_h: usize, rho: f64, beta_p: f64, beta_q: f64, eps1: f64, eps2: f64, tau: f64 },
}

#[derive(Clone, Debug)]
pub struct SigmaFamily {
    sigmas: Vec<Vec<Sign>>,
    pairs: Vec<TransferPair>,
    params: FamilyParams,
    class: HypothesisClass,
}

impl SigmaFamily {
    pub fn sigmas(&self) -> &[Vec<Sign>] {
        &self.sigmas
    }

    pub fn pairs(&self) -> &[TransferPair] {
        &self.pairs
    }

    pub fn params(&self) -> FamilyParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of free points `d` (support size minus one).
    pub fn d(&self) -> usize {
        self.sigmas[0].len()
    }

    /// All labelings of the support that label `x_0` as 1.
    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    pub fn hypothesis_of(&self, sigma: &[Sign]) -> Hypothesis {
        sigma_hypothesis(sigma)
    }
}

pub fn sigma_hypothesis(sigma: &[Sign]) -> Hypothesis {
    let mut labels = Vec::with_capacity(sigma.len() + 1);
    labels.push(true);
    labels.extend(sigma.iter().map(|&s| s > 0));
    Hypothesis::Labels(labels)
}

/// The class of labelings of `x_0..x_d` that label `x_0` as 1, with VC
/// dimension `d_h`.
pub fn family_class(d: usize, d_h: usize) -> Result<HypothesisClass> {
    Ok(FiniteClass::anchored_cube(d + 1, 0, true, d_h)?.into())
}

fn choose_sigmas(d: usize, choice: &SigmaChoice) -> Result<Vec<Vec<Sign>>> {
    match choice {
        SigmaChoice::Auto { seed } if d > 12 => vg_packing(d, *seed),
        SigmaChoice::Auto { .. } | SigmaChoice::FullCube => {
            if d > 20 {
                return Err(invalid(format!("full cube over d = {d} is too large")));
            }
            Ok(full_cube(d))
        }
        SigmaChoice::Packing { seed } => vg_packing(d, *seed),
        SigmaChoice::Explicit(s) => {
            if s.is_empty() || s.iter().any(|v| v.len() != d || v.iter().any(|&x| x != 1 && x != -1)) {
                return Err(invalid(format!("explicit sign vectors must be non-empty and lie in {{-1,1}}^{d}")));
            }
            Ok(s.clone())
        }
    }
}

fn check_theorem3(d_h: usize, rho: f64, beta_p: f64, beta_q: f64, epsilon: f64) -> Result<usize> {
    if d_h < 9 {
        return Err(invalid(format!("theorem 3 family needs d = d_H - 1 >= 8, got d_H = {d_h}")));
    }
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be >= 1, got {rho}")));
    }
    for (name, b) in [("beta_P", beta_p), ("beta_Q", beta_q)] {
        if !(0.0..=1.0).contains(&b) {
            return Err(invalid(format!("{name} must lie in [0, 1], got {b}")));
        }
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(invalid(format!("epsilon must lie in (0, 1/2], got {epsilon}")));
    }
    Ok(d_h - 1)
}

/// One pair of the first lower-bound family, for the sign vector `sigma`.
pub fn theorem3_pair(d_h: usize, rho: f64, beta_p: f64, beta_q: f64, epsilon: f64, sigma: &[Sign]) -> Result<TransferPair> {
    let d = check_theorem3(d_h, rho, beta_p, beta_q, epsilon)?;
    if sigma.len() != d {
        return Err(invalid(format!("sign vector has length {}, expected {d}", sigma.len())));
    }
    let support = DiscreteJoint::indexed_support(d + 1);
    let df = d as f64;
    let side = |mass_free: f64, margin: f64| -> Result<DiscreteJoint> {
        let mut mass = vec![mass_free / df; d + 1];
        mass[0] = 1.0 - mass_free;
        let mut eta = vec![1.0; d + 1];
        for (i, &s) in sigma.iter().enumerate() {
            eta[i + 1] = 0.5 + f64::from(s) / 2.0 * margin;
        }
        DiscreteJoint::new(support.clone(), mass, eta)
    };
    let q = side(epsilon.powf(beta_q), epsilon.powf(1.0 - beta_q))?;
    let p = side(epsilon.powf(rho * beta_p), epsilon.powf(rho * (1.0 - beta_p)))?;
    let cert = Certified {
        rho: Some(rho),
        c_rho: Some(1.0),
        beta_p: Some(beta_p),
        beta_q: Some(beta_q),
        c_p: Some(1.0),
        c_q: Some(1.0),
        ..Default::default()
    };
    TransferPair::discrete(p, q, Some(cert))
}

/// First lower-bound family: `Q` puts `eps^{beta_Q}` on the free points with
/// margin `eps^{1 - beta_Q}`; `P` puts `eps^{rho beta_P}` with margin
/// `eps^{rho (1 - beta_P)}`.
pub fn build_theorem3_family(
    d_h: usize,
    rho: f64,
    beta_p: f64,
    beta_q: f64,
    epsilon: f64,
    choice: &SigmaChoice,
) -> Result<SigmaFamily> {
    let d = check_theorem3(d_h, rho, beta_p, beta_q, epsilon)?;
    let sigmas = choose_sigmas(d, choice)?;
    let pairs = sigmas
        .iter()
        .map(|s| theorem3_pair(d_h, rho, beta_p, beta_q, epsilon, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SigmaFamily {
        sigmas,
        pairs,
        params: FamilyParams::Theorem3 { d_h, rho, beta_p, beta_q, epsilon },
        class: family_class(d, d_h)?,
    })
}

/// Smallest admissible `tau` for the two-block family: `max(1/2, (1/2)^{1/gamma})`.
pub fn default_tau(gamma: f64) -> f64 {
    0.5f64.max(0.5f64.powf(1.0 / gamma))
}

/// Number of free points the two-block family uses: `d_H - 1`, made even.
pub fn theorem4_d(d_h: usize) -> usize {
    let d = d_h.saturating_sub(1);
    d - d % 2
}

/// Second lower-bound family, over two blocks `I_1` (first half of the free
/// points) and `I_2` (second half), with `gamma = rho * beta_P`.
#[allow(clippy::too_many_arguments)]
pub fn build_theorem4_family(
    d_h: usize,
    rho: f64,
    beta_p: f64,
    beta_q: f64,
    eps1: f64,
    eps2: f64,
    tau: Option<f64>,
    choice: &SigmaChoice,
) -> Result<SigmaFamily> {
    for (name, b) in [("beta_P", beta_p), ("beta_Q", beta_q)] {
        if !(b > 0.0 && b < 1.0) {
            return Err(invalid(format!("{name} must lie in (0, 1), got {b}")));
        }
    }
    if !(rho.is_finite() && rho >= (1.0 / beta_p).max(1.0 / beta_q)) {
        return Err(invalid(format!("rho must be >= max(1/beta_P, 1/beta_Q), got {rho}")));
    }
    for (name, e) in [("eps1", eps1), ("eps2", eps2)] {
        if !(e > 0.0 && e <= 0.5) {
            return Err(invalid(format!("{name} must lie in (0, 1/2], got {e}")));
        }
    }
    let gamma = rho * beta_p;
    let tau_min = default_tau(gamma);
    let tau = tau.unwrap_or(tau_min);
    if !(tau >= tau_min && tau < 1.0) {
        return Err(invalid(format!("tau must lie in [{tau_min}, 1), got {tau}")));
    }
    let d = theorem4_d(d_h);
    if d < 2 {
        return Err(invalid(format!("d_H = {d_h} leaves no room for two blocks")));
    }
    let packed = match choice {
        SigmaChoice::Packing { .. } => true,
        SigmaChoice::Auto { .. } => d > 12,
        _ => false,
    };
    if packed && d_h / 2 < 9 {
        return Err(invalid(format!("packing-based use needs floor(d_H / 2) >= 9, got d_H = {d_h}")));
    }
    let sigmas = choose_sigmas(d, choice)?;
    let half = d / 2;
    let support = DiscreteJoint::indexed_support(d + 1);
    let df = d as f64;
    let side = |block1: f64, block2: f64, m1: f64, m2: f64, sigma: &[Sign]| -> Result<DiscreteJoint> {
        let mut mass = vec![0.0; d + 1];
        let mut eta = vec![1.0; d + 1];
        mass[0] = 1.0 - 0.5 * (block1 + block2);
        for i in 1..=d {
            let (m, margin) = if i <= half { (block1, m1) } else { (block2, m2) };
            mass[i] = m / df;
            eta[i] = 0.5 + f64::from(sigma[i - 1]) / 2.0 * margin;
        }
        DiscreteJoint::new(support.clone(), mass, eta)
    };
    let cert = Certified {
        rho: Some(rho),
        c_rho: Some(2.0),
        gamma: Some(gamma),
        c_gamma: Some(2.0),
        beta_p: Some(beta_p),
        beta_q: Some(beta_q),
        c_p: Some(2.0),
        c_q: Some(2.0),
        ..Default::default()
    };
    let pairs = sigmas
        .iter()
        .map(|s| {
            let q = side(eps1.powf(beta_q), eps2 / tau, eps1.powf(1.0 - beta_q), tau, s)?;
            let p = side(
                eps1.powf(gamma * beta_q),
                eps2.powf(gamma),
                eps1.powf((1.0 - beta_p) * rho * beta_q),
                eps2.powf((1.0 - beta_p) * rho),
                s,
            )?;
            TransferPair::discrete(p, q, Some(cert.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SigmaFamily {
        sigmas,
        pairs,
        params: FamilyParams::Theorem4 { d_h, rho, beta_p, beta_q, eps1, eps2, tau },
        class: family_class(d, d_h)?,
    })
}

/// Lower-bound scale `min(1/2, c1 * min{(d_H/n_P)^{1/((2-beta_P) rho)}, (d_H/n_Q)^{1/(2-beta_Q)}})`,
/// with `d_H / 0 = +inf`.
pub fn theorem3_epsilon(d_h: usize, n_p: usize, n_q: usize, rho: f64, beta_p: f64, beta_q: f64, c1: f64) -> f64 {
    let ratio = |n: usize| if n == 0 { f64::INFINITY } else { d_h as f64 / n as f64 };
    let e = ratio(n_p).powf(1.0 / ((2.0 - beta_p) * rho)).min(ratio(n_q).powf(1.0 / (2.0 - beta_q)));
    (c1 * e).min(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::kl::{kl_product, C0};
    use crate::distribution::packing::hamming;

    fn excess(pair_side: &crate::distribution::Distribution, class: &HypothesisClass, h: &Hypothesis) -> f64 {
        pair_side.excess_risk(h, class).unwrap()
    }

    #[test]
    fn theorem3_excess_matches_distance_formula() {
        let (rho, eps) = (2.0, 0.25);
        let fam = build_theorem3_family(9, rho, 0.5, 0.5, eps, &SigmaChoice::FullCube).unwrap();
        assert_eq!(fam.len(), 256);
        let d = fam.d() as f64;
        for (i, j) in [(0, 0), (0, 255), (3, 17), (100, 200)] {
            let h = fam.hypothesis_of(&fam.sigmas()[j]);
            let dist = hamming(&fam.sigmas()[i], &fam.sigmas()[j]) as f64;
            let pair = &fam.pairs()[i];
            assert!((excess(&pair.q, fam.class(), &h) - dist / d * eps).abs() < 1e-15);
            assert!((excess(&pair.p, fam.class(), &h) - dist / d * eps.powf(rho)).abs() < 1e-15);
        }
    }

    #[test]
    fn theorem3_masses_sum_to_one() {
        let fam = build_theorem3_family(13, 4.0, 0.9, 0.25, 0.1, &SigmaChoice::default()).unwrap();
        for pair in fam.pairs() {
            for side in [&pair.p, &pair.q] {
                let s: f64 = side.as_discrete().unwrap().mass().iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn theorem3_rejects_bad_parameters() {
        assert!(build_theorem3_family(8, 2.0, 0.5, 0.5, 0.25, &SigmaChoice::default()).is_err());
        assert!(build_theorem3_family(9, 2.0, 0.5, 0.5, 0.6, &SigmaChoice::default()).is_err());
        assert!(build_theorem3_family(9, 0.5, 0.5, 0.5, 0.25, &SigmaChoice::default()).is_err());
    }

    #[test]
    fn theorem4_masses_and_excess() {
        let (rho, bp, bq, e1, e2) = (2.0, 0.5, 0.5, 0.2, 0.3);
        let fam = build_theorem4_family(18, rho, bp, bq, e1, e2, None, &SigmaChoice::default()).unwrap();
        let tau = default_tau(rho * bp);
        let d = fam.d();
        assert_eq!(d, 16);
        let q0 = fam.pairs()[0].q.as_discrete().unwrap().mass()[0];
        assert!((q0 - (1.0 - 0.5 * (e1.powf(bq) + e2 / tau))).abs() < 1e-15);
        let half = d / 2;
        for i in 0..fam.len() {
            for j in 0..fam.len() {
                let (a, b) = (&fam.sigmas()[i], &fam.sigmas()[j]);
                let d1 = hamming(&a[..half], &b[..half]) as f64;
                let d2 = hamming(&a[half..], &b[half..]) as f64;
                let want = d1 / d as f64 * e1 + d2 / d as f64 * e2;
                let got = excess(&fam.pairs()[i].q, fam.class(), &fam.hypothesis_of(b));
                assert!((got - want).abs() < 1e-14, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn theorem4_rejects_small_rho() {
        assert!(build_theorem4_family(18, 1.5, 0.5, 0.5, 0.2, 0.2, None, &SigmaChoice::default()).is_err());
        assert!(build_theorem4_family(15, 2.0, 0.5, 0.5, 0.2, 0.2, None, &SigmaChoice::Packing { seed: 0 }).is_err());
    }

    #[test]
    fn kl_product_bounded_and_symmetric() {
        let (rho, bp, bq, eps) = (2.0, 0.5, 0.5, 0.25);
        let fam = build_theorem3_family(9, rho, bp, bq, eps, &SigmaChoice::FullCube).unwrap();
        let (np, nq) = (50, 20);
        let bound = C0 * (np as f64 * eps.powf(rho * (2.0 - bp)) + nq as f64 * eps.powf(2.0 - bq));
        assert_eq!(kl_product(&fam, 5, 5, np, nq), 0.0);
        for (i, j) in [(0, 255), (1, 2), (37, 201)] {
            let k = kl_product(&fam, i, j, np, nq);
            assert!((k - kl_product(&fam, j, i, np, nq)).abs() < 1e-12);
            assert!(k <= bound);
        }
    }

    #[test]
    fn tuned_epsilon_keeps_kl_below_c0_d() {
        // c1 chosen so that c0 (c1^{rho(2-bp)} + c1^{2-bq}) d <= c0 d
        for (np, nq) in [(100usize, 100usize), (10_000, 50), (40, 5000)] {
            let (dh, rho, bp, bq) = (9, 2.0, 0.5, 0.5);
            let eps = theorem3_epsilon(dh, np, nq, rho, bp, bq, 0.5);
            let fam = build_theorem3_family(dh, rho, bp, bq, eps, &SigmaChoice::FullCube).unwrap();
            let d = fam.d() as f64;
            for (i, j) in [(0, 255), (10, 99)] {
                assert!(kl_product(&fam, i, j, np, nq) <= C0 * d);
            }
        }
    }
}
