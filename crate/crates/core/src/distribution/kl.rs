use super::family::SigmaFamily;
use super::pair::Distribution;
use crate::error::{invalid, Result};

/// Constant `c_0` with `chi2_bound(eps, z) <= c_0 * eps^2` for all `eps <= 1/2`.
///
/// `chi2_bound = 4 eps^2 / (1 - eps^2)` is increasing in `eps`, so the ratio
/// peaks at `eps = 1/2` where it equals `16/3`.
pub const C0: f64 = 16.0 / 3.0;

pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(invalid(format!("kl_bernoulli needs p, q in (0, 1), got {p}, {q}")));
    }
    Ok(kl_unchecked(p, q))
}

/// Bernoulli KL allowing closed endpoints: `0 ln 0 = 0`, `+inf` where `q`
/// puts no mass on an outcome `p` charges.
pub(crate) fn kl_unchecked(p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    let term = |a: f64, b: f64| {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Chi-square divergence between `Ber(1/2 + z eps/2)` and `Ber(1/2 - z eps/2)`.
pub fn chi2_bound(eps: f64, z: i8) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(invalid(format!("chi2_bound needs eps in (0, 1/2], got {eps}")));
    }
    if z != 1 && z != -1 {
        return Err(invalid(format!("z must be -1 or 1, got {z}")));
    }
    let zf = f64::from(z);
    let p = 0.5 + zf * eps / 2.0;
    let q = 0.5 - zf * eps / 2.0;
    Ok(q * (1.0 - p / q).powi(2) + (1.0 - q) * (1.0 - (1.0 - p) / (1.0 - q)).powi(2))
}

/// KL divergence between the product measures `P_i^{n_P} x Q_i^{n_Q}` and
/// `P_j^{n_P} x Q_j^{n_Q}` of two family members.
pub fn kl_product(family: &SigmaFamily, i: usize, j: usize, n_p: usize, n_q: usize) -> f64 {
    let (a, b) = (&family.pairs()[i], &family.pairs()[j]);
    let kl = |x: &Distribution, y: &Distribution| {
        let (x, y) = (x.as_discrete().expect("family pairs are discrete"), y.as_discrete().expect("family pairs are discrete"));
        x.mass().iter().zip(x.eta().iter().zip(y.eta())).map(|(m, (e1, e2))| if *m == 0.0 { 0.0 } else { m * kl_unchecked(*e1, *e2) }).sum::<f64>()
    };
    n_p as f64 * kl(&a.p, &b.p) + n_q as f64 * kl(&a.q, &b.q)
}
