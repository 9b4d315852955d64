//! Union-of-box domains with exact membership and deterministic sampling.
//!
//! A [`DomainSet`] is a finite union of axis-aligned boxes whose bounds may be
//! infinite. Membership is always decided against the original bounds.
//! Sampling clips infinite bounds to `[-B, B]` (the plan's truncation bound),
//! lays a grid on every clipped box, adds explicit breakpoint coordinates and
//! seeded uniform draws, and returns the points sorted lexicographically.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A point in n-space.
pub type Point = Vec<f64>;

/// Integer lattice points are only auto-added within this distance of a
/// clipped box end, otherwise a box spanning `[-B, B]` would contribute
/// `2B` breakpoints.
pub const LATTICE_WINDOW: f64 = 32.0;

/// One coordinate range of a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::input("interval endpoint is NaN"));
        }
        if lo > hi {
            return Err(Error::input(format!("interval lo {lo} exceeds hi {hi}")));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::input("interval is empty at infinity"));
        }
        if (lo.is_infinite() && lo_closed) || (hi.is_infinite() && hi_closed) {
            return Err(Error::input("an infinite endpoint cannot be closed"));
        }
        if lo == hi && !(lo_closed && hi_closed) {
            return Err(Error::input(format!(
                "degenerate interval at {lo} must be closed at both ends"
            )));
        }
        Ok(Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    /// Interval closed at every finite end and open at infinite ends.
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, lo.is_finite(), hi.is_finite())
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Distance from `x` to the closure of the interval.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    /// Nearest member within `slack` of `x`.
    fn snap(&self, x: f64, slack: f64) -> Option<f64> {
        if self.contains(x) {
            return Some(x);
        }
        let target = if x < self.lo {
            if self.lo_closed { self.lo } else { self.lo.next_up() }
        } else if self.hi_closed {
            self.hi
        } else {
            self.hi.next_down()
        };
        (self.contains(target) && (target - x).abs() <= slack).then_some(target)
    }

    /// Finite sampling range `[a, b]` plus whether each end may be sampled.
    /// `None` when nothing of the interval survives the clip.
    fn clipped(&self, bound: f64) -> Option<ClippedRange> {
        let (a, a_ok) = if self.lo < -bound {
            (-bound, true)
        } else {
            (self.lo, self.lo_closed)
        };
        let (b, b_ok) = if self.hi > bound {
            (bound, true)
        } else {
            (self.hi, self.hi_closed)
        };
        if a > b || (a == b && !(a_ok && b_ok)) {
            return None;
        }
        Some(ClippedRange { a, b, a_ok, b_ok })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy)]
struct ClippedRange {
    a: f64,
    b: f64,
    a_ok: bool,
    b_ok: bool,
}

impl ClippedRange {
    fn grid(&self, n: usize) -> Vec<f64> {
        if self.a == self.b {
            return vec![self.a];
        }
        if n == 1 {
            return vec![self.a + (self.b - self.a) / 2.0];
        }
        let span = self.b - self.a;
        let last = (n - 1) as f64;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let x = if i == 0 {
                self.a
            } else if i == n - 1 {
                self.b
            } else {
                self.a + span * (i as f64) / last
            };
            // an open end is sampled one grid step inward, which is the
            // neighbouring grid point already in the list
            if (i == 0 && !self.a_ok) || (i == n - 1 && !self.b_ok) {
                continue;
            }
            out.push(x);
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawEndpoint {
    Num(f64),
    Text(String),
}

impl RawEndpoint {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            RawEndpoint::Num(v) => Ok(*v),
            RawEndpoint::Text(s) => match s.trim() {
                "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
                "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
                other => other
                    .parse::<f64>()
                    .map_err(|_| format!("bad interval endpoint `{other}`")),
            },
        }
    }

    fn from_value(v: f64) -> Self {
        if v == f64::INFINITY {
            RawEndpoint::Text("inf".into())
        } else if v == f64::NEG_INFINITY {
            RawEndpoint::Text("-inf".into())
        } else {
            RawEndpoint::Num(v)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawInterval {
    lo: RawEndpoint,
    hi: RawEndpoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo_closed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi_closed: Option<bool>,
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawInterval {
            lo: RawEndpoint::from_value(self.lo),
            hi: RawEndpoint::from_value(self.hi),
            lo_closed: (self.lo_closed != self.lo.is_finite()).then_some(self.lo_closed),
            hi_closed: (self.hi_closed != self.hi.is_finite()).then_some(self.hi_closed),
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInterval::deserialize(d)?;
        let lo = raw.lo.value().map_err(D::Error::custom)?;
        let hi = raw.hi.value().map_err(D::Error::custom)?;
        let lo_closed = raw.lo_closed.unwrap_or(lo.is_finite());
        let hi_closed = raw.hi_closed.unwrap_or(hi.is_finite());
        Interval::new(lo, hi, lo_closed, hi_closed).map_err(D::Error::custom)
    }
}

/// An axis-aligned box: one interval per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainBox {
    intervals: Vec<Interval>,
}

impl DomainBox {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self { intervals }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    #[inline]
    fn contains(&self, x: &[f64]) -> bool {
        self.intervals.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    fn distance(&self, x: &[f64]) -> f64 {
        self.intervals
            .iter()
            .zip(x)
            .map(|(iv, &v)| {
                let d = iv.distance(v);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Finite union of boxes in `dim` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainSet {
    dim: usize,
    pieces: Vec<DomainBox>,
}

#[derive(Deserialize)]
struct RawDomain {
    dim: usize,
    pieces: Vec<DomainBox>,
}

impl<'de> Deserialize<'de> for DomainSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawDomain::deserialize(d)?;
        DomainSet::new(raw.dim, raw.pieces).map_err(D::Error::custom)
    }
}

impl DomainSet {
    pub fn new(dim: usize, pieces: Vec<DomainBox>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("domain dimension must be positive"));
        }
        if pieces.is_empty() {
            return Err(Error::input("domain needs at least one box"));
        }
        if let Some(bad) = pieces.iter().find(|b| b.intervals.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: bad.intervals.len(),
            });
        }
        Ok(Self { dim, pieces })
    }

    /// One-dimensional union of intervals.
    pub fn intervals(pieces: impl IntoIterator<Item = Interval>) -> Result<Self> {
        Self::new(1, pieces.into_iter().map(|iv| DomainBox::new(vec![iv])).collect())
    }

    /// One-dimensional union of `[lo, hi]` pieces (infinite ends open).
    pub fn closed_intervals(pieces: &[(f64, f64)]) -> Result<Self> {
        let ivs = pieces
            .iter()
            .map(|&(lo, hi)| Interval::closed(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Self::intervals(ivs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[DomainBox] {
        &self.pieces
    }

    /// Exact membership against the untruncated bounds.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.contains_unchecked(x))
    }

    #[inline]
    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        self.pieces.iter().any(|b| b.contains(x))
    }

    /// Moves `x` into the first box reachable within `slack[i]` on every axis.
    /// Returns false and leaves `x` unchanged when no box is that close.
    pub(crate) fn snap_into(&self, x: &mut [f64], slack: &[f64]) -> bool {
        'boxes: for piece in &self.pieces {
            let mut moved = [0.0f64; 8];
            let mut heap = Vec::new();
            let buf: &mut [f64] = if x.len() <= moved.len() {
                &mut moved[..x.len()]
            } else {
                heap.resize(x.len(), 0.0);
                &mut heap
            };
            for (i, iv) in piece.intervals.iter().enumerate() {
                match iv.snap(x[i], slack[i]) {
                    Some(v) => buf[i] = v,
                    None => continue 'boxes,
                }
            }
            x.copy_from_slice(buf);
            return true;
        }
        false
    }

    /// Euclidean distance from `x` to the union (zero on open boundaries).
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|b| b.distance(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Integer lattice coordinates inside the clipped boxes, limited to
    /// [`LATTICE_WINDOW`] from either clipped end of each axis range.
    pub fn lattice_points(&self, axis: usize, bound: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for piece in &self.pieces {
            let Some(range) = piece.intervals[axis].clipped(bound) else {
                continue;
            };
            let first = range.a.ceil();
            let last = range.b.floor();
            if first > last {
                continue;
            }
            let mut push_span = |from: f64, to: f64| {
                let mut k = from;
                while k <= to {
                    out.push(k);
                    k += 1.0;
                }
            };
            if last - first <= 2.0 * LATTICE_WINDOW {
                push_span(first, last);
            } else {
                push_span(first, first + LATTICE_WINDOW);
                push_span(last - LATTICE_WINDOW, last);
            }
        }
        sort_dedup_scalars(&mut out);
        out
    }
}

impl fmt::Display for DomainSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, piece) in self.pieces.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            for (j, iv) in piece.intervals.iter().enumerate() {
                if j > 0 {
                    f.write_str("×")?;
                }
                write!(f, "{iv}")?;
            }
        }
        Ok(())
    }
}

/// How a domain is turned into a finite sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplePlan {
    pub grid_per_axis: usize,
    /// Seeded uniform draws per box.
    pub random_count: usize,
    pub seed: u64,
    /// Number of evenly spaced δ values in `[0, 1]`, endpoints included.
    pub delta_grid: usize,
    /// Infinite ends are clipped to `±truncation_bound` for sampling only.
    pub truncation_bound: f64,
    /// Extra sample coordinates, one list per axis.
    pub breakpoints: Vec<Vec<f64>>,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            grid_per_axis: 101,
            random_count: 32,
            seed: 42,
            delta_grid: 501,
            truncation_bound: 1000.0,
            breakpoints: Vec::new(),
        }
    }
}

/// Coordinates a function wants sampled, derived from its expression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BreakpointHints {
    /// Axes whose integer lattice matters (floor/ceil on that coordinate).
    pub lattice_axes: Vec<usize>,
    /// Guard values per axis, e.g. `0` for a `x1 == 0` branch.
    pub values: Vec<(usize, f64)>,
}

impl BreakpointHints {
    pub fn is_empty(&self) -> bool {
        self.lattice_axes.is_empty() && self.values.is_empty()
    }

    pub fn merge(&mut self, other: &BreakpointHints) {
        for &a in &other.lattice_axes {
            if !self.lattice_axes.contains(&a) {
                self.lattice_axes.push(a);
            }
        }
        self.values.extend_from_slice(&other.values);
    }
}

impl SamplePlan {
    pub fn validate(&self) -> Result<()> {
        if self.grid_per_axis == 0 {
            return Err(Error::input("grid_per_axis must be positive"));
        }
        if self.delta_grid < 2 {
            return Err(Error::input("delta_grid must be at least 2"));
        }
        if !(self.truncation_bound.is_finite() && self.truncation_bound > 0.0) {
            return Err(Error::input("truncation_bound must be a positive real"));
        }
        if self.breakpoints.iter().flatten().any(|b| !b.is_finite()) {
            return Err(Error::input("breakpoints must be finite"));
        }
        Ok(())
    }

    /// Plan with hinted lattice and guard coordinates added as breakpoints.
    pub fn stratified(&self, domain: &DomainSet, hints: &BreakpointHints) -> SamplePlan {
        let mut plan = self.clone();
        if hints.is_empty() {
            return plan;
        }
        if plan.breakpoints.len() < domain.dim() {
            plan.breakpoints.resize(domain.dim(), Vec::new());
        }
        for &axis in &hints.lattice_axes {
            if axis < domain.dim() {
                let lattice = domain.lattice_points(axis, self.truncation_bound);
                plan.breakpoints[axis].extend(lattice);
            }
        }
        for &(axis, v) in &hints.values {
            if axis < domain.dim() && v.is_finite() {
                plan.breakpoints[axis].push(v);
            }
        }
        for axis in &mut plan.breakpoints {
            sort_dedup_scalars(axis);
        }
        plan
    }
}

fn sort_dedup_scalars(v: &mut Vec<f64>) {
    for x in v.iter_mut() {
        *x += 0.0; // -0.0 -> 0.0
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
}

/// Lexicographic order on points using `total_cmp` per coordinate.
pub fn cmp_points(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Sorts lexicographically and removes exact duplicates.
pub fn normalize_points(points: &mut Vec<Point>) {
    for p in points.iter_mut() {
        for x in p.iter_mut() {
            *x += 0.0;
        }
    }
    points.sort_by(|a, b| cmp_points(a, b));
    points.dedup();
}

/// Deterministic sample of `domain`; every returned point is a member.
pub fn sample_points(domain: &DomainSet, plan: &SamplePlan) -> Result<Vec<Point>> {
    plan.validate()?;
    let dim = domain.dim();
    let mut points: Vec<Point> = Vec::new();
    let mut any_box = false;

    for (box_index, piece) in domain.pieces().iter().enumerate() {
        let ranges: Option<Vec<ClippedRange>> = piece
            .intervals
            .iter()
            .map(|iv| iv.clipped(plan.truncation_bound))
            .collect();
        let Some(ranges) = ranges else {
            continue;
        };
        any_box = true;

        let axes: Vec<Vec<f64>> = ranges
            .iter()
            .enumerate()
            .map(|(axis, range)| {
                let mut coords = range.grid(plan.grid_per_axis);
                if let Some(extra) = plan.breakpoints.get(axis) {
                    coords.extend(
                        extra
                            .iter()
                            .copied()
                            .filter(|&b| piece.intervals[axis].contains(b)),
                    );
                }
                sort_dedup_scalars(&mut coords);
                coords
            })
            .collect();
        cartesian_into(&axes, &mut points);

        let mut rng = ChaCha8Rng::seed_from_u64(
            plan.seed
                .wrapping_add((box_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        for _ in 0..plan.random_count {
            let p: Point = ranges
                .iter()
                .map(|r| if r.a == r.b { r.a } else { rng.gen_range(r.a..=r.b) })
                .collect();
            points.push(p);
        }
    }

    if !any_box {
        return Err(Error::input("every box is empty after truncation"));
    }
    points.retain(|p| p.len() == dim && domain.contains_unchecked(p));
    normalize_points(&mut points);
    if points.is_empty() {
        return Err(Error::input("sample plan produced no member points"));
    }
    Ok(points)
}

fn cartesian_into(axes: &[Vec<f64>], out: &mut Vec<Point>) {
    if axes.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; axes.len()];
    loop {
        out.push(idx.iter().zip(axes).map(|(&i, a)| a[i]).collect());
        let mut k = axes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Evenly spaced δ values in `[0, 1]` with exact endpoints.
pub fn delta_samples(plan: &SamplePlan) -> Vec<f64> {
    let n = plan.delta_grid.max(2);
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => 0.0,
            i if i == n - 1 => 1.0,
            i => i as f64 / last,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split_set() -> DomainSet {
        DomainSet::closed_intervals(&[(1.0, 2.0), (3.0, f64::INFINITY)]).unwrap()
    }

    #[test]
    fn membership_on_union() {
        let m = split_set();
        assert!(!m.contains(&[2.5]).unwrap());
        assert!(m.contains(&[1000.0]).unwrap());
        assert!(m.contains(&[1e300]).unwrap());
        assert!(m.contains(&[3.0]).unwrap());
        assert!(!m.contains(&[f64::INFINITY]).unwrap());
    }

    #[test]
    fn closed_boundary_is_exact() {
        let m = DomainSet::closed_intervals(&[(0.0, 1.0)]).unwrap();
        assert!(m.contains(&[1.0]).unwrap());
        assert!(!m.contains(&[1.0 + 1e-15]).unwrap());
        assert!(!m.contains(&[-f64::MIN_POSITIVE]).unwrap());
    }

    #[test]
    fn open_ends_and_dimension_errors() {
        let iv = Interval::new(0.0, 1.0, false, true).unwrap();
        let m = DomainSet::intervals([iv]).unwrap();
        assert!(!m.contains(&[0.0]).unwrap());
        assert!(m.contains(&[1e-300]).unwrap());
        assert!(matches!(
            m.contains(&[0.5, 0.5]),
            Err(Error::Dimension { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn interval_invariants() {
        assert!(Interval::new(2.0, 1.0, true, true).is_err());
        assert!(Interval::new(1.0, 1.0, true, false).is_err());
        assert!(Interval::new(f64::NEG_INFINITY, 0.0, true, true).is_err());
        assert!(Interval::new(1.0, 1.0, true, true).is_ok());
        let iv = Interval::closed(3.0, f64::INFINITY).unwrap();
        assert!(iv.lo_closed() && !iv.hi_closed());
    }

    #[test]
    fn three_point_grid() {
        let m = DomainSet::closed_intervals(&[(0.0, 1.0)]).unwrap();
        let plan = SamplePlan {
            grid_per_axis: 3,
            random_count: 0,
            ..SamplePlan::default()
        };
        let pts = sample_points(&m, &plan).unwrap();
        assert_eq!(pts, vec![vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn truncation_clips_sampling_only() {
        let m = split_set();
        let plan = SamplePlan {
            truncation_bound: 100.0,
            ..SamplePlan::default()
        };
        let pts = sample_points(&m, &plan).unwrap();
        assert!(pts.iter().all(|p| (1.0..=2.0).contains(&p[0]) || (3.0..=100.0).contains(&p[0])));
        assert!(pts.iter().any(|p| p[0] == 100.0));
        assert!(m.contains(&[5000.0]).unwrap());
    }

    #[test]
    fn breakpoints_in_domain_are_sampled() {
        let m = DomainSet::closed_intervals(&[(-1.0, -0.5), (0.0, f64::INFINITY)]).unwrap();
        let plan = SamplePlan {
            grid_per_axis: 7,
            random_count: 0,
            breakpoints: vec![vec![0.0, -0.25, 0.125]],
            ..SamplePlan::default()
        };
        let pts = sample_points(&m, &plan).unwrap();
        assert!(pts.contains(&vec![0.0]));
        assert!(pts.contains(&vec![0.125]));
        assert!(!pts.contains(&vec![-0.25]));
    }

    #[test]
    fn open_end_is_offset_inward() {
        let iv = Interval::new(0.0, 1.0, false, false).unwrap();
        let m = DomainSet::intervals([iv]).unwrap();
        let plan = SamplePlan {
            grid_per_axis: 5,
            random_count: 0,
            ..SamplePlan::default()
        };
        let pts = sample_points(&m, &plan).unwrap();
        assert_eq!(pts, vec![vec![0.25], vec![0.5], vec![0.75]]);
    }

    #[test]
    fn empty_after_truncation_is_an_error() {
        let m = DomainSet::closed_intervals(&[(5000.0, f64::INFINITY)]).unwrap();
        assert!(sample_points(&m, &SamplePlan::default()).is_err());
        let m2 = DomainSet::closed_intervals(&[(5000.0, f64::INFINITY), (0.0, 1.0)]).unwrap();
        let pts = sample_points(&m2, &SamplePlan::default()).unwrap();
        assert!(pts.iter().all(|p| p[0] <= 1.0));
    }

    #[test]
    fn delta_grids() {
        let plan = |n| SamplePlan {
            delta_grid: n,
            ..SamplePlan::default()
        };
        assert_eq!(delta_samples(&plan(2)), vec![0.0, 1.0]);
        assert_eq!(delta_samples(&plan(5)), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let fine = delta_samples(&plan(501));
        assert!(fine.contains(&0.502));
        assert_eq!(fine[0], 0.0);
        assert_eq!(fine[500], 1.0);
    }

    #[test]
    fn lattice_is_windowed() {
        let m = DomainSet::closed_intervals(&[(f64::NEG_INFINITY, -0.02), (-0.01, 0.0)]).unwrap();
        let lat = m.lattice_points(0, 1000.0);
        assert!(lat.contains(&-1.0) && lat.contains(&-1000.0) && lat.contains(&0.0));
        assert!(!lat.contains(&-500.0));
        assert!(lat.len() <= 2 * 33 + 1);
    }

    #[test]
    fn two_dimensional_boxes() {
        let b = DomainBox::new(vec![
            Interval::closed(0.0, 1.0).unwrap(),
            Interval::closed(0.0, 2.0).unwrap(),
        ]);
        let m = DomainSet::new(2, vec![b]).unwrap();
        let plan = SamplePlan {
            grid_per_axis: 3,
            random_count: 4,
            ..SamplePlan::default()
        };
        let pts = sample_points(&m, &plan).unwrap();
        assert!(pts.len() >= 9);
        assert!(pts.iter().all(|p| m.contains(p).unwrap()));
        assert!((m.distance(&[2.0, 3.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn domain_json_fragment() {
        let json = r#"{"dim":1,"pieces":[[{"lo":1,"hi":2}],[{"lo":3,"hi":"inf"}]]}"#;
        let m: DomainSet = serde_json::from_str(json).unwrap();
        assert_eq!(m, split_set());
        let back = serde_json::to_string(&m).unwrap();
        assert_eq!(back, r#"{"dim":1,"pieces":[[{"lo":1.0,"hi":2.0}],[{"lo":3.0,"hi":"inf"}]]}"#);
        let bad = r#"{"dim":2,"pieces":[[{"lo":1,"hi":2}]]}"#;
        assert!(serde_json::from_str::<DomainSet>(bad).is_err());
    }
}
