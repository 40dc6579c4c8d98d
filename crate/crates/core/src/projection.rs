//! Exact enumeration of a class over a finite set of cells.
//!
//! Every procedure in the crate reduces to weighted sums over the members of
//! a class restricted to finitely many points. A [`Projection`] fixes those
//! points ("cells"), enumerates the distinct members, and evaluates
//! `scores(a, b)[m] = sum_c [h_m(c) = 1] a[c] + [h_m(c) = 0] b[c]` for any
//! per-cell weights `a`, `b`. Risks, disagreements and excess risks are all
//! instances of that sum.
//!
//! Cells are support indices for label-vector classes and sorted distinct
//! coordinates for threshold classes. Per-cell counts are integer-valued
//! `f64`, so sums of counts are exact.

use crate::error::{Error, Result};
use crate::hypothesis::{threshold_label, FiniteClass, Hypothesis, HypothesisClass, LabeledSample, Orientation, Point, SupportPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Key {
    Index,
    Coord,
}

#[derive(Clone, Debug)]
enum Members<'a> {
    /// Explicit members; labels stored member-major.
    Table { class: &'a FiniteClass, labels: Vec<bool> },
    /// Projected thresholds, one per induced labeling, ascending.
    Sweep { orientation: Orientation, thresholds: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct Projection<'a> {
    key: Key,
    coords: Vec<f64>,
    n_cells: usize,
    members: Members<'a>,
}

/// Per-cell label counts of a labeled sample.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledCounts {
    pub n0: Vec<f64>,
    pub n1: Vec<f64>,
    pub n: usize,
}

impl LabeledCounts {
    pub fn totals(&self) -> Vec<f64> {
        self.n0.iter().zip(&self.n1).map(|(a, b)| a + b).collect()
    }
}

pub(crate) fn sorted_distinct(xs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = xs.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| a.total_cmp(b).is_eq());
    v
}

/// One threshold per labeling induced on the sorted distinct `cuts`.
pub(crate) fn representative_thresholds(cuts: &[f64]) -> Vec<f64> {
    let m = cuts.len();
    if m == 0 {
        return vec![0.0];
    }
    let mut t = Vec::with_capacity(m + 1);
    t.push(cuts[0] - 1.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = a + (b - a) / 2.0;
        t.push(if mid >= b { a } else { mid });
    }
    t.push(cuts[m - 1] + 1.0);
    t
}

/// Index of the first minimum.
pub fn argmin_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

/// Index of the first maximum.
pub fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

impl<'a> Projection<'a> {
    /// Projects `class` onto the support (if any) together with every point
    /// in `samples`.
    pub fn new(class: &'a HypothesisClass, support: Option<&[SupportPoint]>, samples: &[&[Point]]) -> Result<Self> {
        let coords_of = || {
            let sup = support.into_iter().flatten().map(|p| p.coordinate);
            let pts = samples.iter().flat_map(|s| s.iter().map(Point::coord));
            sorted_distinct(sup.chain(pts))
        };
        match class {
            HypothesisClass::Finite(fc) if fc.has_labels() => {
                let n_cells = fc.label_len();
                if let Some(sup) = support {
                    if sup.len() != n_cells {
                        return Err(Error::Incompatible(format!(
                            "class labels {n_cells} points, support has {}",
                            sup.len()
                        )));
                    }
                }
                let mut labels = Vec::with_capacity(fc.len() * n_cells);
                for h in fc.members() {
                    labels.extend_from_slice(h.labels().unwrap_or(&[]));
                }
                Ok(Self { key: Key::Index, coords: Vec::new(), n_cells, members: Members::Table { class: fc, labels } })
            }
            HypothesisClass::Finite(fc) => {
                let coords = coords_of();
                let mut labels = Vec::with_capacity(fc.len() * coords.len());
                for h in fc.members() {
                    for &x in &coords {
                        labels.push(h.predict(&Point::Real(x)));
                    }
                }
                Ok(Self { key: Key::Coord, n_cells: coords.len(), coords, members: Members::Table { class: fc, labels } })
            }
            HypothesisClass::Thresholds(orientation) => {
                let coords = coords_of();
                let thresholds = representative_thresholds(&coords);
                Ok(Self {
                    key: Key::Coord,
                    n_cells: coords.len(),
                    coords,
                    members: Members::Sweep { orientation: *orientation, thresholds },
                })
            }
        }
    }

    /// Number of enumerated members.
    pub fn len(&self) -> usize {
        match &self.members {
            Members::Table { class, .. } => class.len(),
            Members::Sweep { thresholds, .. } => thresholds.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> usize {
        self.n_cells
    }

    /// Coordinates of the cells (empty for index-keyed projections).
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn cell_of(&self, p: &Point) -> Result<usize> {
        match self.key {
            Key::Index => {
                let i = p.index().ok_or_else(|| Error::OffSupport(format!("{p:?}")))?;
                if i < self.n_cells {
                    Ok(i)
                } else {
                    Err(Error::OffSupport(format!("index {i} of {}", self.n_cells)))
                }
            }
            Key::Coord => {
                let x = p.coord();
                self.coords
                    .binary_search_by(|c| c.total_cmp(&x))
                    .map_err(|_| Error::OffSupport(format!("coordinate {x} not among projected points")))
            }
        }
    }

    pub fn label(&self, member: usize, cell: usize) -> bool {
        match &self.members {
            Members::Table { labels, .. } => labels[member * self.n_cells + cell],
            Members::Sweep { orientation, thresholds } => threshold_label(self.coords[cell], thresholds[member], *orientation),
        }
    }

    pub fn member_labels(&self, member: usize) -> Vec<bool> {
        (0..self.n_cells).map(|c| self.label(member, c)).collect()
    }

    pub fn hypothesis(&self, member: usize) -> Hypothesis {
        match &self.members {
            Members::Table { class, .. } => class.members()[member].clone(),
            Members::Sweep { orientation, thresholds } => Hypothesis::threshold(thresholds[member], *orientation),
        }
    }

    /// Enumeration index of the member that labels the cells like `h`, if any.
    pub fn find(&self, h: &Hypothesis) -> Option<usize> {
        let target: Vec<bool> = match self.key {
            Key::Index => h.labels()?.to_vec(),
            Key::Coord => self.coords.iter().map(|&x| h.try_predict(&Point::Real(x))).collect::<Result<_>>().ok()?,
        };
        (0..self.len()).find(|&m| (0..self.n_cells).all(|c| self.label(m, c) == target[c]))
    }

    /// `scores[m] = sum_c [h_m(c)=1] a[c] + [h_m(c)=0] b[c]`, summed in cell order.
    pub fn scores(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(a.len(), self.n_cells);
        debug_assert_eq!(b.len(), self.n_cells);
        match &self.members {
            Members::Table { labels, .. } => labels
                .chunks(self.n_cells.max(1))
                .take(self.len())
                .map(|row| {
                    let mut s = 0.0;
                    for c in 0..self.n_cells {
                        s += if row[c] { a[c] } else { b[c] };
                    }
                    s
                })
                .collect(),
            Members::Sweep { orientation, thresholds } => {
                // member k labels cells >= k as 1 (above) or cells < k as 1 (below)
                let m = self.n_cells;
                let (lo, hi) = match orientation {
                    Orientation::PositiveAbove => (b, a),
                    Orientation::PositiveBelow => (a, b),
                };
                let mut prefix = vec![0.0; m + 1];
                for c in 0..m {
                    prefix[c + 1] = prefix[c] + lo[c];
                }
                let mut suffix = vec![0.0; m + 1];
                for c in (0..m).rev() {
                    suffix[c] = suffix[c + 1] + hi[c];
                }
                debug_assert_eq!(thresholds.len(), m + 1);
                (0..=m).map(|k| prefix[k] + suffix[k]).collect()
            }
        }
    }

    pub fn point_counts(&self, points: &[Point]) -> Result<Vec<f64>> {
        let mut n = vec![0.0; self.n_cells];
        for p in points {
            n[self.cell_of(p)?] += 1.0;
        }
        Ok(n)
    }

    pub fn labeled_counts(&self, sample: &LabeledSample) -> Result<LabeledCounts> {
        let mut n0 = vec![0.0; self.n_cells];
        let mut n1 = vec![0.0; self.n_cells];
        for (p, y) in sample.iter() {
            let c = self.cell_of(p)?;
            if y {
                n1[c] += 1.0;
            } else {
                n0[c] += 1.0;
            }
        }
        Ok(LabeledCounts { n0, n1, n: sample.len() })
    }

    /// Per-cell label sums with a weight per draw given by `w(point)`.
    pub fn weighted_counts(&self, sample: &LabeledSample, w: impl Fn(&Point) -> f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut w0 = vec![0.0; self.n_cells];
        let mut w1 = vec![0.0; self.n_cells];
        for (p, y) in sample.iter() {
            let c = self.cell_of(p)?;
            if y {
                w1[c] += w(p);
            } else {
                w0[c] += w(p);
            }
        }
        Ok((w0, w1))
    }

    /// Number of mistakes of each member on the counted sample.
    pub fn risk_totals(&self, counts: &LabeledCounts) -> Vec<f64> {
        self.scores(&counts.n0, &counts.n1)
    }

    /// Per-member mass (or count) of cells where the member disagrees with
    /// `reference`, under the per-cell weights `n`.
    pub fn disagreement_totals(&self, reference: usize, n: &[f64]) -> Vec<f64> {
        let (a, b) = self.disagreement_weights(reference, n);
        self.scores(&a, &b)
    }

    pub(crate) fn disagreement_weights(&self, reference: usize, n: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; self.n_cells];
        let mut b = vec![0.0; self.n_cells];
        for c in 0..self.n_cells {
            if self.label(reference, c) {
                b[c] = n[c];
            } else {
                a[c] = n[c];
            }
        }
        (a, b)
    }
}
