use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

pub type Sign = i8;

pub fn hamming(a: &[Sign], b: &[Sign]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Minimum pairwise distance a packing of `{-1, 1}^d` must reach: `ceil(d/8)`.
pub fn packing_distance(d: usize) -> usize {
    d.div_ceil(8)
}

/// Size `ceil(2^{d/8}) + 1` targeted by [`vg_packing`].
pub fn packing_size(d: usize) -> usize {
    (2f64.powf(d as f64 / 8.0)).ceil() as usize + 1
}

/// Greedy Varshamov-Gilbert packing of `{-1, 1}^d`.
///
/// Starts from the all-ones vector and accepts uniformly random sign vectors
/// at Hamming distance at least `ceil(d/8)` from every vector kept so far,
/// until `ceil(2^{d/8}) + 1` vectors are kept.
pub fn vg_packing(d: usize, seed: u64) -> Result<Vec<Vec<Sign>>> {
    if d < 8 {
        return Err(invalid(format!("packing needs d >= 8, got {d}")));
    }
    let min_dist = packing_distance(d);
    let target = packing_size(d);
    let mut rng = rng_from_seed(seed);
    let mut kept = vec![vec![1; d]];
    let mut attempts = 0usize;
    while kept.len() < target {
        attempts += 1;
        if attempts > 1_000_000 {
            return Err(invalid(format!("packing search for d = {d} did not reach {target} vectors")));
        }
        let cand: Vec<Sign> = (0..d).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        if kept.iter().all(|k| hamming(k, &cand) >= min_dist) {
            kept.push(cand);
        }
    }
    Ok(kept)
}

/// Every vector of `{-1, 1}^d`, ordered so bit `i` of the index set means
/// `sigma_i = +1`.
pub fn full_cube(d: usize) -> Vec<Vec<Sign>> {
    (0..1usize << d).map(|m| (0..d).map(|i| if (m >> i) & 1 == 1 { 1 } else { -1 }).collect()).collect()
}
