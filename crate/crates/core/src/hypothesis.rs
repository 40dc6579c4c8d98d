//! Hypotheses, hypothesis classes, samples and the empirical quantities
//! computed from them.
//!
//! Two hypothesis forms exist. A finite-form hypothesis is a label vector
//! over a finite support and reads [`Point::index`]; a threshold hypothesis
//! reads [`Point::coord`]. Classes are either an explicit member list or the
//! (uncountable) class of one-sided thresholds, which becomes enumerable once
//! projected onto a finite point set.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::Projection;

/// A point of a finite support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub index: usize,
    pub coordinate: f64,
}

/// A sample point: either on a finite support, or a bare real number drawn
/// from a continuous marginal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Support(SupportPoint),
    Real(f64),
}

impl Point {
    pub fn coord(&self) -> f64 {
        match self {
            Point::Support(p) => p.coordinate,
            Point::Real(x) => *x,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Point::Support(p) => Some(p.index),
            Point::Real(_) => None,
        }
    }
}

impl From<SupportPoint> for Point {
    fn from(p: SupportPoint) -> Self {
        Point::Support(p)
    }
}

/// Which side of a threshold is labeled 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `h(x) = 1[x > t]`
    PositiveAbove,
    /// `h(x) = 1[x <= t]`
    PositiveBelow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Labels(Vec<bool>),
    Threshold { t: f64, orientation: Orientation },
}

impl Hypothesis {
    pub fn threshold(t: f64, orientation: Orientation) -> Self {
        Hypothesis::Threshold { t, orientation }
    }

    pub fn try_predict(&self, x: &Point) -> Result<bool> {
        match self {
            Hypothesis::Labels(labels) => {
                let i = x.index().ok_or_else(|| Error::OffSupport(format!("{x:?}")))?;
                labels
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::OffSupport(format!("index {i} of {}", labels.len())))
            }
            Hypothesis::Threshold { t, orientation } => Ok(threshold_label(x.coord(), *t, *orientation)),
        }
    }

    /// Panics when a finite-form hypothesis is evaluated off its support.
    pub fn predict(&self, x: &Point) -> bool {
        self.try_predict(x).expect("hypothesis evaluated outside its domain")
    }

    /// Labels over `0..n` for the finite form; `None` for thresholds.
    pub fn labels(&self) -> Option<&[bool]> {
        match self {
            Hypothesis::Labels(l) => Some(l),
            Hypothesis::Threshold { .. } => None,
        }
    }
}

#[inline]
pub(crate) fn threshold_label(x: f64, t: f64, orientation: Orientation) -> bool {
    match orientation {
        Orientation::PositiveAbove => x > t,
        Orientation::PositiveBelow => x <= t,
    }
}

/// Member layout of the class of all label patterns over a support, with an
/// optional anchored coordinate whose label is fixed.
///
/// Member `m` labels the `j`-th free coordinate (ascending index order) with
/// bit `j` of `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CubeLayout {
    pub size: usize,
    pub anchor: Option<(usize, bool)>,
}

impl CubeLayout {
    pub fn free_coords(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.size).filter(move |&i| self.anchor.map_or(true, |(a, _)| a != i))
    }

    pub fn free_count(&self) -> usize {
        self.size - usize::from(self.anchor.is_some())
    }

    pub fn labels_of(&self, member: usize) -> Vec<bool> {
        let mut labels = vec![false; self.size];
        if let Some((a, l)) = self.anchor {
            labels[a] = l;
        }
        for (j, i) in self.free_coords().enumerate() {
            labels[i] = (member >> j) & 1 == 1;
        }
        labels
    }

    pub fn member_of(&self, labels: &[bool]) -> Option<usize> {
        if labels.len() != self.size {
            return None;
        }
        if let Some((a, l)) = self.anchor {
            if labels[a] != l {
                return None;
            }
        }
        Some(
            self.free_coords()
                .enumerate()
                .fold(0usize, |m, (j, i)| m | (usize::from(labels[i]) << j)),
        )
    }
}

/// An explicitly enumerated class.
#[derive(Clone, Debug)]
pub struct FiniteClass {
    members: Vec<Hypothesis>,
    vc_dim: usize,
    cube: Option<CubeLayout>,
}

impl FiniteClass {
    pub fn new(members: Vec<Hypothesis>, vc_dim: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("finite class needs at least one member".into()));
        }
        if vc_dim < 1 {
            return Err(Error::InvalidParameter("VC dimension must be at least 1".into()));
        }
        let n_labels = members.iter().filter(|h| matches!(h, Hypothesis::Labels(_))).count();
        if n_labels != 0 && n_labels != members.len() {
            return Err(Error::InvalidParameter(
                "finite class mixes label-vector and threshold members".into(),
            ));
        }
        if n_labels > 0 {
            let len = members[0].labels().map_or(0, <[bool]>::len);
            let mut seen = HashSet::with_capacity(members.len());
            for h in &members {
                let l = h.labels().unwrap_or(&[]);
                if l.len() != len {
                    return Err(Error::InvalidParameter("label vectors differ in length".into()));
                }
                if !seen.insert(l) {
                    return Err(Error::InvalidParameter("duplicate label pattern in class".into()));
                }
            }
        } else {
            let mut seen = HashSet::with_capacity(members.len());
            for h in &members {
                if let Hypothesis::Threshold { t, orientation } = h {
                    if t.is_nan() || !seen.insert((t.to_bits(), *orientation)) {
                        return Err(Error::InvalidParameter("duplicate or NaN threshold in class".into()));
                    }
                }
            }
        }
        Ok(Self { members, vc_dim, cube: None })
    }

    /// All `2^size` label patterns over `size` points; `d_H = size`.
    pub fn all_patterns(size: usize) -> Result<Self> {
        Self::cube(CubeLayout { size, anchor: None }, size)
    }

    /// All patterns over `size` points that label `anchor` as `label`.
    pub fn anchored_cube(size: usize, anchor: usize, label: bool, vc_dim: usize) -> Result<Self> {
        if anchor >= size {
            return Err(Error::InvalidParameter(format!("anchor {anchor} outside support of size {size}")));
        }
        Self::cube(CubeLayout { size, anchor: Some((anchor, label)) }, vc_dim)
    }

    fn cube(layout: CubeLayout, vc_dim: usize) -> Result<Self> {
        let free = layout.free_count();
        if layout.size == 0 || free > 24 {
            return Err(Error::InvalidParameter(format!(
                "cube classes support 1..=24 free coordinates, got {free}"
            )));
        }
        if vc_dim < 1 {
            return Err(Error::InvalidParameter("VC dimension must be at least 1".into()));
        }
        let members = (0..1usize << free).map(|m| Hypothesis::Labels(layout.labels_of(m))).collect();
        Ok(Self { members, vc_dim, cube: Some(layout) })
    }

    pub fn members(&self) -> &[Hypothesis] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn vc_dim(&self) -> usize {
        self.vc_dim
    }

    pub fn cube_layout(&self) -> Option<CubeLayout> {
        self.cube
    }

    pub(crate) fn has_labels(&self) -> bool {
        matches!(self.members[0], Hypothesis::Labels(_))
    }

    pub(crate) fn label_len(&self) -> usize {
        self.members[0].labels().map_or(0, <[bool]>::len)
    }
}

#[derive(Clone, Debug)]
pub enum HypothesisClass {
    Finite(FiniteClass),
    /// One-sided thresholds on the line; `d_H = 1`.
    Thresholds(Orientation),
}

impl HypothesisClass {
    pub fn vc_dim(&self) -> usize {
        match self {
            HypothesisClass::Finite(c) => c.vc_dim(),
            HypothesisClass::Thresholds(_) => 1,
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteClass> {
        match self {
            HypothesisClass::Finite(c) => Some(c),
            HypothesisClass::Thresholds(_) => None,
        }
    }
}

impl From<FiniteClass> for HypothesisClass {
    fn from(c: FiniteClass) -> Self {
        HypothesisClass::Finite(c)
    }
}

/// An ordered labeled sample, in draw order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledSample {
    pub points: Vec<Point>,
    pub labels: Vec<bool>,
    pub seed: u64,
}

impl LabeledSample {
    pub fn new(points: Vec<Point>, labels: Vec<bool>, seed: u64) -> Self {
        assert_eq!(points.len(), labels.len(), "points and labels differ in length");
        Self { points, labels, seed }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, bool)> + '_ {
        self.points.iter().zip(self.labels.iter().copied())
    }

    pub fn extend(&mut self, other: &LabeledSample) {
        self.points.extend_from_slice(&other.points);
        self.labels.extend_from_slice(&other.labels);
    }

    pub fn unlabeled(&self) -> UnlabeledSample {
        UnlabeledSample { points: self.points.clone(), seed: self.seed }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct UnlabeledSample {
    pub points: Vec<Point>,
    pub seed: u64,
}

impl UnlabeledSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Fraction of `sample` that `h` mislabels; 0 on an empty sample.
pub fn empirical_risk(h: &Hypothesis, sample: &LabeledSample) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    let mistakes = sample.iter().filter(|(x, y)| h.predict(x) != *y).count();
    mistakes as f64 / sample.len() as f64
}

/// Fraction of `points` on which `h` and `h2` disagree; 0 on an empty set.
pub fn empirical_disagreement(h: &Hypothesis, h2: &Hypothesis, points: &[Point]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let n = points.iter().filter(|x| h.predict(x) != h2.predict(x)).count();
    n as f64 / points.len() as f64
}

/// Canonical finite reduction of a threshold class onto `points`: one member
/// per labeling the class induces, each carried by a representative
/// threshold (midpoints between consecutive distinct points, plus one
/// threshold beyond each extreme). Finite classes are returned unchanged.
pub fn project_class(class: &HypothesisClass, points: &[f64]) -> Result<HypothesisClass> {
    match class {
        HypothesisClass::Finite(_) => Ok(class.clone()),
        HypothesisClass::Thresholds(orientation) => {
            if points.is_empty() {
                return Err(Error::EmptyProjection);
            }
            let cuts = crate::projection::sorted_distinct(points.iter().copied());
            let members = crate::projection::representative_thresholds(&cuts)
                .into_iter()
                .map(|t| Hypothesis::threshold(t, *orientation))
                .collect();
            Ok(HypothesisClass::Finite(FiniteClass::new(members, 1)?))
        }
    }
}

/// Empirical risk minimizer over `class` projected onto the sample's points.
/// Ties go to the lowest enumeration index (the smallest representative
/// threshold for threshold classes); an empty sample returns member 0.
pub fn erm(class: &HypothesisClass, sample: &LabeledSample) -> Result<Hypothesis> {
    let proj = Projection::new(class, None, &[&sample.points])?;
    let counts = proj.labeled_counts(sample)?;
    let best = crate::projection::argmin_first(&proj.risk_totals(&counts));
    Ok(proj.hypothesis(best))
}
