//! X-combinations and falsification checks for the convexity classes.
//!
//! Every check walks ordered pairs `(r, t)` of sampled points and the δ grid,
//! forms `δ(r − t) + g(t)` and compares `φ` at that point against the class
//! bound. A verdict is either "no counterexample found on this plan" or a
//! concrete witness triple.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{delta_samples, sample_points, BreakpointHints, DomainSet, Point, SamplePlan};
use crate::lang::{GMap, ScalarFn};

/// Slack and margins for the floating-point form of the class inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// A non-strict check fails when `lhs − rhs > eps_ineq`.
    pub eps_ineq: f64,
    /// A strict check fails when `lhs − rhs > −eps_strict`.
    pub eps_strict: f64,
    /// `φ(r) ≠ φ(t)` means `|φ(r) − φ(t)| > eps_val_eq`.
    pub eps_val_eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_ineq: 1e-9,
            eps_strict: 1e-9,
            eps_val_eq: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = self.eps_ineq.is_finite()
            && self.eps_ineq >= 0.0
            && self.eps_strict.is_finite()
            && self.eps_strict > 0.0
            && self.eps_val_eq.is_finite()
            && self.eps_val_eq >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::input(
                "tolerances must be finite, eps_ineq and eps_val_eq non-negative, eps_strict positive",
            ))
        }
    }
}

/// What to do when an X-combination leaves the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapePolicy {
    /// Any escape turns every function verdict into `DomainEscape`.
    #[default]
    Reject,
    /// Evaluate `φ` at escaped combinations and count them.
    Extend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClass {
    XConvexSet,
    XConvex,
    StrictlyXConvex,
    QuasiXConvex,
    StrictlyQuasiXConvex,
    SemistrictlyQuasiXConvex,
    XConcave,
    StrictlyXConcave,
    QuasiXConcave,
    StrictlyQuasiXConcave,
    SemistrictlyQuasiXConcave,
}

impl ConvexityClass {
    /// The ten function classes in report order.
    pub const FUNCTION_CLASSES: [ConvexityClass; 10] = [
        ConvexityClass::XConvex,
        ConvexityClass::StrictlyXConvex,
        ConvexityClass::QuasiXConvex,
        ConvexityClass::StrictlyQuasiXConvex,
        ConvexityClass::SemistrictlyQuasiXConvex,
        ConvexityClass::XConcave,
        ConvexityClass::StrictlyXConcave,
        ConvexityClass::QuasiXConcave,
        ConvexityClass::StrictlyQuasiXConcave,
        ConvexityClass::SemistrictlyQuasiXConcave,
    ];

    pub const CONVEX_CLASSES: [ConvexityClass; 5] = [
        ConvexityClass::XConvex,
        ConvexityClass::StrictlyXConvex,
        ConvexityClass::QuasiXConvex,
        ConvexityClass::StrictlyQuasiXConvex,
        ConvexityClass::SemistrictlyQuasiXConvex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConvexityClass::XConvexSet => "x_convex_set",
            ConvexityClass::XConvex => "x_convex",
            ConvexityClass::StrictlyXConvex => "strictly_x_convex",
            ConvexityClass::QuasiXConvex => "quasi_x_convex",
            ConvexityClass::StrictlyQuasiXConvex => "strictly_quasi_x_convex",
            ConvexityClass::SemistrictlyQuasiXConvex => "semistrictly_quasi_x_convex",
            ConvexityClass::XConcave => "x_concave",
            ConvexityClass::StrictlyXConcave => "strictly_x_concave",
            ConvexityClass::QuasiXConcave => "quasi_x_concave",
            ConvexityClass::StrictlyQuasiXConcave => "strictly_quasi_x_concave",
            ConvexityClass::SemistrictlyQuasiXConcave => "semistrictly_quasi_x_concave",
        }
    }

    pub fn from_name(name: &str) -> Option<ConvexityClass> {
        std::iter::once(ConvexityClass::XConvexSet)
            .chain(Self::FUNCTION_CLASSES)
            .find(|c| c.name() == name)
    }

    /// Strict classes skip `r = t` and δ ∈ {0, 1} and demand a margin.
    pub fn is_strict(self) -> bool {
        matches!(
            self,
            ConvexityClass::StrictlyXConvex
                | ConvexityClass::StrictlyQuasiXConvex
                | ConvexityClass::SemistrictlyQuasiXConvex
                | ConvexityClass::StrictlyXConcave
                | ConvexityClass::StrictlyQuasiXConcave
                | ConvexityClass::SemistrictlyQuasiXConcave
        )
    }

    pub fn is_concave(self) -> bool {
        matches!(
            self,
            ConvexityClass::XConcave
                | ConvexityClass::StrictlyXConcave
                | ConvexityClass::QuasiXConcave
                | ConvexityClass::StrictlyQuasiXConcave
                | ConvexityClass::SemistrictlyQuasiXConcave
        )
    }

    /// The convex class checked on `−φ` for a concave mirror.
    pub fn convex_counterpart(self) -> ConvexityClass {
        match self {
            ConvexityClass::XConcave => ConvexityClass::XConvex,
            ConvexityClass::StrictlyXConcave => ConvexityClass::StrictlyXConvex,
            ConvexityClass::QuasiXConcave => ConvexityClass::QuasiXConvex,
            ConvexityClass::StrictlyQuasiXConcave => ConvexityClass::StrictlyQuasiXConvex,
            ConvexityClass::SemistrictlyQuasiXConcave => ConvexityClass::SemistrictlyQuasiXConvex,
            other => other,
        }
    }

    fn slot(self) -> usize {
        Self::FUNCTION_CLASSES
            .iter()
            .position(|&c| c == self)
            .expect("function class")
    }
}

impl fmt::Display for ConvexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    NoCounterexampleFound,
    Falsified,
    DomainEscape,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::NoCounterexampleFound => "no_counterexample_found",
            Status::Falsified => "falsified",
            Status::DomainEscape => "domain_escape",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    InequalityViolation,
    DomainEscape,
}

/// A concrete triple `(r, t, δ)` with both sides of the checked inequality.
///
/// For a domain escape `lhs` is the distance from `combo` to the domain,
/// `rhs` is zero and `gap` equals that distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub r: Point,
    pub t: Point,
    pub delta: f64,
    pub combo: Point,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub kind: WitnessKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub class: ConvexityClass,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub triples_checked: u64,
    /// Largest `lhs − rhs` seen; for strict classes `−max_gap` is the margin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_gap: Option<f64>,
    /// Combinations that left the domain during this check.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub escapes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn is_zero(n: &u64) -> bool {
    *n == 0
}

impl ClassVerdict {
    pub fn passed(&self) -> bool {
        self.status == Status::NoCounterexampleFound
    }

    /// Smallest observed `rhs − lhs`.
    pub fn margin(&self) -> Option<f64> {
        self.max_gap.map(|g| -g)
    }
}

/// Which triples a check quantifies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    /// The class's own quantifier.
    #[default]
    All,
    /// Only δ strictly between 0 and 1.
    Interior,
}

/// Domain, map, sampling and tolerances shared by a family of checks.
#[derive(Debug, Clone)]
pub struct Setting {
    pub domain: DomainSet,
    pub g: GMap,
    pub plan: SamplePlan,
    pub tol: Tolerances,
    pub escape: EscapePolicy,
    /// Bisect δ around a falsifying grid witness.
    pub refine: bool,
}

impl Setting {
    pub fn new(domain: DomainSet, g: GMap) -> Result<Self> {
        if domain.dim() != g.dim() {
            return Err(Error::Dimension {
                expected: domain.dim(),
                found: g.dim(),
            });
        }
        Ok(Self {
            domain,
            g,
            plan: SamplePlan::default(),
            tol: Tolerances::default(),
            escape: EscapePolicy::default(),
            refine: false,
        })
    }

    pub fn with_plan(mut self, plan: SamplePlan) -> Self {
        self.plan = plan;
        self
    }

    pub fn with_tol(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_escape(mut self, escape: EscapePolicy) -> Self {
        self.escape = escape;
        self
    }

    pub fn with_refine(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    /// The combination as the checks compute it, including the rounding snap.
    pub fn combination(&self, r: &[f64], t: &[f64], delta: f64) -> Result<Point> {
        let mut combo = combination_point(r, t, delta, &self.g)?;
        let gt = self.g.eval(t)?;
        place_combo(&self.domain, r, t, &gt, delta, &mut combo);
        Ok(combo)
    }

    fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        self.tol.validate()
    }
}

/// Writes `δ(r − t) + g(t)` into `out`, with `gt = g(t)` precomputed.
#[inline]
pub(crate) fn combo_into(r: &[f64], t: &[f64], gt: &[f64], delta: f64, out: &mut [f64]) {
    if delta == 0.0 {
        out.copy_from_slice(gt);
    } else if delta == 1.0 {
        for i in 0..out.len() {
            out[i] = r[i] + (gt[i] - t[i]);
        }
    } else {
        for i in 0..out.len() {
            out[i] = delta.mul_add(r[i] - t[i], gt[i]);
        }
    }
}

const SNAP_ULPS: f64 = 4.0;

#[inline]
fn ulp(x: f64) -> f64 {
    let a = x.abs();
    a.next_up() - a
}

/// Computes the combination and reports domain membership. A combination
/// outside the domain by at most a few ulps of its operands is rounding
/// noise and is moved onto the nearest member.
#[inline]
pub(crate) fn place_combo(domain: &DomainSet, r: &[f64], t: &[f64], gt: &[f64], delta: f64, out: &mut [f64]) -> bool {
    combo_into(r, t, gt, delta, out);
    if domain.contains_unchecked(out) {
        return true;
    }
    let mut slack = [0.0f64; 8];
    let mut heap = Vec::new();
    let slack: &mut [f64] = if out.len() <= slack.len() {
        &mut slack[..out.len()]
    } else {
        heap.resize(out.len(), 0.0);
        &mut heap
    };
    for i in 0..out.len() {
        let scale = r[i].abs().max(t[i].abs()).max(gt[i].abs()).max(out[i].abs());
        slack[i] = SNAP_ULPS * ulp(scale);
    }
    domain.snap_into(out, slack)
}

/// The X-combination `δ(r − t) + g(t)`.
pub fn combination_point(r: &[f64], t: &[f64], delta: f64, g: &GMap) -> Result<Point> {
    let n = g.dim();
    if r.len() != n || t.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: if r.len() != n { r.len() } else { t.len() },
        });
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::input(format!("delta {delta} is outside [0, 1]")));
    }
    let gt = g.eval(t)?;
    let mut out = vec![0.0; n];
    combo_into(r, t, &gt, delta, &mut out);
    Ok(out)
}

/// Convex combination of two values, kept inside `[min, max]`.
#[inline]
pub(crate) fn convex_value(delta: f64, fr: f64, ft: f64) -> f64 {
    let v = delta * fr + (1.0 - delta) * ft;
    v.clamp(fr.min(ft), fr.max(ft))
}

/// Running maximum with first-wins tie breaking.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Acc {
    pub max_gap: f64,
    pub arg: Option<(u32, u32, u32)>,
    pub count: u64,
}

impl Default for Acc {
    fn default() -> Self {
        Self {
            max_gap: f64::NEG_INFINITY,
            arg: None,
            count: 0,
        }
    }
}

impl Acc {
    #[inline]
    pub fn push(&mut self, gap: f64, i: usize, j: usize, k: usize) {
        self.count += 1;
        if gap > self.max_gap {
            self.max_gap = gap;
            self.arg = Some((i as u32, j as u32, k as u32));
        }
    }

    /// Folds a later accumulator into this one.
    pub fn merge(&mut self, later: &Acc) {
        self.count += later.count;
        if later.max_gap > self.max_gap {
            self.max_gap = later.max_gap;
            self.arg = later.arg;
        }
    }

    pub fn max_gap(&self) -> Option<f64> {
        self.arg.map(|_| self.max_gap)
    }
}

/// Runs `row` for every index in parallel and folds the results in index order.
/// The first error in index order is returned.
pub(crate) fn par_rows<A, I, F, M>(rows: usize, init: I, row: F, mut merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(usize, &mut A) -> Result<()> + Sync,
    M: FnMut(&mut A, A),
{
    let parts: Vec<Result<A>> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let mut a = init();
            row(i, &mut a).map(|()| a)
        })
        .collect();
    let mut total = init();
    for part in parts {
        merge(&mut total, part?);
    }
    Ok(total)
}

const SLOTS: usize = 10;
// interior-only twins of x_convex, quasi, x_concave, quasi_concave
const INTERIOR_SLOTS: usize = 4;

#[derive(Clone)]
struct ScanAcc {
    class: [Acc; SLOTS],
    interior: [Acc; INTERIOR_SLOTS],
    escape: Acc,
    triples: u64,
}

impl Default for ScanAcc {
    fn default() -> Self {
        Self {
            class: [Acc::default(); SLOTS],
            interior: [Acc::default(); INTERIOR_SLOTS],
            escape: Acc::default(),
            triples: 0,
        }
    }
}

impl ScanAcc {
    fn merge(&mut self, later: ScanAcc) {
        for (a, b) in self.class.iter_mut().zip(&later.class) {
            a.merge(b);
        }
        for (a, b) in self.interior.iter_mut().zip(&later.interior) {
            a.merge(b);
        }
        self.escape.merge(&later.escape);
        self.triples += later.triples;
    }
}

/// All ten function verdicts, the set verdict and any implication breaks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub set: ClassVerdict,
    pub verdicts: Vec<ClassVerdict>,
    pub inconsistencies: Vec<String>,
    pub points: usize,
    pub deltas: usize,
    pub escape_policy: EscapePolicy,
}

impl Classification {
    pub fn verdict(&self, class: ConvexityClass) -> &ClassVerdict {
        if class == ConvexityClass::XConvexSet {
            return &self.set;
        }
        &self.verdicts[class.slot()]
    }

    pub fn status(&self, class: ConvexityClass) -> Status {
        self.verdict(class).status
    }
}

/// Sampled points, cached map values and the δ grid for one setting.
pub struct Checker<'a> {
    setting: &'a Setting,
    points: Vec<Point>,
    gvals: Vec<Point>,
    deltas: Vec<f64>,
}

impl<'a> Checker<'a> {
    /// Samples the domain with the plan stratified by `hints`.
    pub fn new(setting: &'a Setting, hints: &BreakpointHints) -> Result<Self> {
        setting.validate()?;
        let plan = setting.plan.stratified(&setting.domain, hints);
        let points = sample_points(&setting.domain, &plan)?;
        Self::with_points(setting, points)
    }

    /// Samples with breakpoints taken from `phi`.
    pub fn for_function(setting: &'a Setting, phi: &ScalarFn) -> Result<Self> {
        Self::new(setting, &phi.breakpoint_hints())
    }

    /// Uses the given points verbatim, after sorting and deduplication.
    pub fn with_points(setting: &'a Setting, mut points: Vec<Point>) -> Result<Self> {
        setting.validate()?;
        let n = setting.domain.dim();
        if points.is_empty() {
            return Err(Error::input("no sample points"));
        }
        for p in &points {
            if p.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: p.len(),
                });
            }
            if !setting.domain.contains_unchecked(p) {
                return Err(Error::input(format!("sample point {p:?} is not in the domain")));
            }
        }
        crate::geometry::normalize_points(&mut points);
        let gvals = points
            .iter()
            .map(|p| setting.g.eval(p))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            setting,
            points,
            gvals,
            deltas: delta_samples(&setting.plan),
        })
    }

    pub fn setting(&self) -> &Setting {
        self.setting
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub(crate) fn gvals(&self) -> &[Point] {
        &self.gvals
    }

    /// Values of `phi` at every sample point.
    pub fn values(&self, phi: &ScalarFn) -> Result<Vec<f64>> {
        self.check_dim(phi)?;
        self.points
            .iter()
            .map(|p| phi.eval(p).map_err(Error::from))
            .collect()
    }

    fn check_dim(&self, phi: &ScalarFn) -> Result<()> {
        if phi.dim() != self.setting.domain.dim() {
            return Err(Error::Dimension {
                expected: self.setting.domain.dim(),
                found: phi.dim(),
            });
        }
        Ok(())
    }

    fn triple(&self, (i, j, k): (u32, u32, u32)) -> (&[f64], &[f64], f64, Point) {
        let (i, j, k) = (i as usize, j as usize, k as usize);
        let mut combo = vec![0.0; self.setting.domain.dim()];
        place_combo(&self.setting.domain, &self.points[i], &self.points[j], &self.gvals[j], self.deltas[k], &mut combo);
        (&self.points[i], &self.points[j], self.deltas[k], combo)
    }

    fn escape_witness(&self, arg: (u32, u32, u32)) -> Witness {
        let (r, t, delta, combo) = self.triple(arg);
        let dist = self.setting.domain.distance(&combo);
        Witness {
            r: r.to_vec(),
            t: t.to_vec(),
            delta,
            combo,
            lhs: dist,
            rhs: 0.0,
            gap: dist,
            kind: WitnessKind::DomainEscape,
        }
    }

    /// Whether every sampled combination stays in the domain.
    pub fn check_set(&self) -> Result<ClassVerdict> {
        let n = self.setting.domain.dim();
        let np = self.points.len();
        let acc = par_rows(
            np,
            Acc::default,
            |i, acc| {
                let mut combo = vec![0.0; n];
                for j in 0..np {
                    for (k, &d) in self.deltas.iter().enumerate() {
                        let inside =
                            place_combo(&self.setting.domain, &self.points[i], &self.points[j], &self.gvals[j], d, &mut combo);
                        let gap = if inside {
                            0.0
                        } else {
                            self.setting.domain.distance(&combo).max(f64::MIN_POSITIVE)
                        };
                        acc.push(gap, i, j, k);
                    }
                }
                Ok(())
            },
            |a, b| a.merge(&b),
        )?;
        Ok(self.set_verdict(&acc, acc.count))
    }

    fn set_verdict(&self, escape: &Acc, triples: u64) -> ClassVerdict {
        let escaped = escape.arg.is_some() && escape.max_gap > 0.0;
        ClassVerdict {
            class: ConvexityClass::XConvexSet,
            status: if escaped {
                Status::DomainEscape
            } else {
                Status::NoCounterexampleFound
            },
            witness: if escaped {
                escape.arg.map(|a| self.escape_witness(a))
            } else {
                None
            },
            triples_checked: triples,
            max_gap: None,
            escapes: 0,
            eta: None,
            note: None,
        }
    }

    /// Runs every class on `phi` in a single pass over the triples.
    pub fn classify(&self, phi: &ScalarFn) -> Result<Classification> {
        let fvals = self.values(phi)?;
        let scan = self.scan(phi, &fvals)?;
        let escapes = scan.escape.count;
        let set = self.set_verdict(&scan.escape, scan.triples);
        let verdicts: Vec<ClassVerdict> = ConvexityClass::FUNCTION_CLASSES
            .iter()
            .map(|&c| self.verdict_from(phi, &fvals, c, &scan.class[c.slot()], escapes, &scan.escape))
            .collect::<Result<_>>()?;
        let mut out = Classification {
            set,
            verdicts,
            inconsistencies: Vec::new(),
            points: self.points.len(),
            deltas: self.deltas.len(),
            escape_policy: self.setting.escape,
        };
        self.audit(phi, &scan, &mut out)?;
        Ok(out)
    }

    /// A single class verdict.
    pub fn check(&self, phi: &ScalarFn, class: ConvexityClass) -> Result<ClassVerdict> {
        self.check_scoped(phi, class, Scope::All)
    }

    /// A single class verdict, optionally restricted to interior δ.
    pub fn check_scoped(&self, phi: &ScalarFn, class: ConvexityClass, scope: Scope) -> Result<ClassVerdict> {
        if class == ConvexityClass::XConvexSet {
            return self.check_set();
        }
        let fvals = self.values(phi)?;
        let scan = self.scan(phi, &fvals)?;
        let acc = match (scope, interior_slot(class)) {
            (Scope::Interior, Some(s)) => &scan.interior[s],
            _ => &scan.class[class.slot()],
        };
        self.verdict_from(phi, &fvals, class, acc, scan.escape.count, &scan.escape)
    }

    fn threshold(&self, class: ConvexityClass) -> f64 {
        if class.is_strict() {
            -self.setting.tol.eps_strict
        } else {
            self.setting.tol.eps_ineq
        }
    }

    fn verdict_from(
        &self,
        phi: &ScalarFn,
        fvals: &[f64],
        class: ConvexityClass,
        acc: &Acc,
        escapes: u64,
        escape_acc: &Acc,
    ) -> Result<ClassVerdict> {
        let mut v = ClassVerdict {
            class,
            status: Status::NoCounterexampleFound,
            witness: None,
            triples_checked: acc.count,
            max_gap: acc.max_gap(),
            escapes: 0,
            eta: None,
            note: matches!(class, ConvexityClass::StrictlyXConvex | ConvexityClass::StrictlyXConcave)
                .then(|| "right-hand side read as delta*phi(r) + (1 - delta)*phi(t)".to_string()),
        };
        if escapes > 0 {
            match self.setting.escape {
                EscapePolicy::Reject => {
                    v.status = Status::DomainEscape;
                    v.witness = escape_acc.arg.map(|a| self.escape_witness(a));
                    v.escapes = escapes;
                    append_note(&mut v, "combination left the domain; phi is not evaluated off the domain");
                    return Ok(v);
                }
                EscapePolicy::Extend => {
                    v.escapes = escapes;
                    append_note(&mut v, &format!("phi evaluated off the domain at {escapes} combination(s)"));
                }
            }
        }
        if let Some(arg) = acc.arg {
            if acc.max_gap > self.threshold(class) {
                v.status = Status::Falsified;
                let mut w = self.inequality_witness(phi, fvals, class, arg)?;
                if self.setting.refine {
                    w = refine_witness(phi, self.setting, class, &w)?;
                }
                v.witness = Some(w);
            }
        }
        Ok(v)
    }

    fn inequality_witness(
        &self,
        phi: &ScalarFn,
        fvals: &[f64],
        class: ConvexityClass,
        arg: (u32, u32, u32),
    ) -> Result<Witness> {
        let (r, t, delta, combo) = self.triple(arg);
        let f = phi.eval(&combo)?;
        let (fr, ft) = (fvals[arg.0 as usize], fvals[arg.1 as usize]);
        let (lhs, rhs) = sides(class, f, fr, ft, delta);
        Ok(Witness {
            r: r.to_vec(),
            t: t.to_vec(),
            delta,
            combo,
            lhs,
            rhs,
            gap: lhs - rhs,
            kind: WitnessKind::InequalityViolation,
        })
    }

    fn scan(&self, phi: &ScalarFn, fvals: &[f64]) -> Result<ScanAcc> {
        let n = self.setting.domain.dim();
        let np = self.points.len();
        let last = self.deltas.len() - 1;
        let eps_val_eq = self.setting.tol.eps_val_eq;
        let reject = self.setting.escape == EscapePolicy::Reject;
        par_rows(
            np,
            ScanAcc::default,
            |i, acc| {
                let mut combo = vec![0.0; n];
                let r = &self.points[i];
                let fr = fvals[i];
                for (j, ((t, gt), &ft)) in self.points.iter().zip(&self.gvals).zip(fvals).enumerate() {
                    let hi = fr.max(ft);
                    let lo = fr.min(ft);
                    let distinct = i != j;
                    let values_differ = (fr - ft).abs() > eps_val_eq;
                    for (k, &d) in self.deltas.iter().enumerate() {
                        acc.triples += 1;
                        if !place_combo(&self.setting.domain, r, t, gt, d, &mut combo) {
                            let dist = self.setting.domain.distance(&combo).max(f64::MIN_POSITIVE);
                            acc.escape.push(dist, i, j, k);
                            if reject {
                                continue;
                            }
                        }
                        let f = phi.eval(&combo)?;
                        let conv = convex_value(d, fr, ft);
                        let gx = f - conv;
                        let gq = f - hi;
                        let gxc = conv - f;
                        let gqc = lo - f;
                        let c = &mut acc.class;
                        c[0].push(gx, i, j, k);
                        c[2].push(gq, i, j, k);
                        c[5].push(gxc, i, j, k);
                        c[7].push(gqc, i, j, k);
                        let interior = k != 0 && k != last;
                        if interior {
                            let s = &mut acc.interior;
                            s[0].push(gx, i, j, k);
                            s[1].push(gq, i, j, k);
                            s[2].push(gxc, i, j, k);
                            s[3].push(gqc, i, j, k);
                            if distinct {
                                c[1].push(gx, i, j, k);
                                c[3].push(gq, i, j, k);
                                c[6].push(gxc, i, j, k);
                                c[8].push(gqc, i, j, k);
                                if values_differ {
                                    c[4].push(gq, i, j, k);
                                    c[9].push(gqc, i, j, k);
                                }
                            }
                        }
                    }
                }
                Ok(())
            },
            |a, b| a.merge(b),
        )
    }

    /// Flags any broken implication between class verdicts on this plan.
    fn audit(&self, phi: &ScalarFn, scan: &ScanAcc, out: &mut Classification) -> Result<()> {
        use ConvexityClass::*;
        let falsified_interior = |slot: usize| {
            let acc = &scan.interior[slot];
            acc.arg.is_some() && acc.max_gap > self.setting.tol.eps_ineq
        };
        // (stronger, weaker, weaker restricted to interior δ)
        let chain: [(ConvexityClass, ConvexityClass, Option<usize>); 10] = [
            (XConvex, QuasiXConvex, None),
            (StrictlyXConvex, XConvex, Some(0)),
            (StrictlyXConvex, StrictlyQuasiXConvex, None),
            (StrictlyQuasiXConvex, QuasiXConvex, Some(1)),
            (StrictlyQuasiXConvex, SemistrictlyQuasiXConvex, None),
            (XConcave, QuasiXConcave, None),
            (StrictlyXConcave, XConcave, Some(2)),
            (StrictlyXConcave, StrictlyQuasiXConcave, None),
            (StrictlyQuasiXConcave, QuasiXConcave, Some(3)),
            (StrictlyQuasiXConcave, SemistrictlyQuasiXConcave, None),
        ];
        for (strong, weak, interior) in chain {
            if out.status(strong) != Status::NoCounterexampleFound {
                continue;
            }
            let weak_fails = match interior {
                Some(slot) => falsified_interior(slot),
                None => out.status(weak) == Status::Falsified,
            };
            if !weak_fails {
                continue;
            }
            let recheck = match out.verdict(weak).witness.as_ref() {
                Some(w) if interior.is_none() => verify_witness(phi, self.setting, weak, w)?.to_string(),
                _ => "interior witness not stored".to_string(),
            };
            out.inconsistencies.push(format!(
                "{strong} found no counterexample but {weak} is falsified{}; witness recheck reproduces: {recheck}",
                if interior.is_some() { " on interior δ" } else { "" }
            ));
        }
        Ok(())
    }
}

fn append_note(v: &mut ClassVerdict, text: &str) {
    v.note = Some(match v.note.take() {
        Some(n) => format!("{n}; {text}"),
        None => text.to_string(),
    });
}

fn interior_slot(class: ConvexityClass) -> Option<usize> {
    match class {
        ConvexityClass::XConvex => Some(0),
        ConvexityClass::QuasiXConvex => Some(1),
        ConvexityClass::XConcave => Some(2),
        ConvexityClass::QuasiXConcave => Some(3),
        _ => None,
    }
}

/// `(lhs, rhs)` of the class inequality, with concave classes reported on `−φ`.
fn sides(class: ConvexityClass, f: f64, fr: f64, ft: f64, delta: f64) -> (f64, f64) {
    use ConvexityClass::*;
    match class {
        XConvex | StrictlyXConvex => (f, convex_value(delta, fr, ft)),
        QuasiXConvex | StrictlyQuasiXConvex | SemistrictlyQuasiXConvex => (f, fr.max(ft)),
        XConcave | StrictlyXConcave => (-f, -convex_value(delta, fr, ft)),
        QuasiXConcave | StrictlyQuasiXConcave | SemistrictlyQuasiXConcave => (-f, -fr.min(ft)),
        XConvexSet => (0.0, 0.0),
    }
}

/// The recomputed combination when it matches `recorded` to within one ulp.
pub(crate) fn recompute_combo(setting: &Setting, r: &[f64], t: &[f64], delta: f64, recorded: &[f64]) -> Result<Option<Point>> {
    if r.len() != setting.domain.dim() || t.len() != r.len() || recorded.len() < r.len() {
        return Ok(None);
    }
    let combo = setting.combination(r, t, delta)?;
    if combo.iter().zip(recorded).any(|(a, b)| ulp_distance(*a, *b) > 1) {
        return Ok(None);
    }
    Ok(Some(combo))
}

pub(crate) fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

/// Re-evaluates a stored witness and reports whether it still violates
/// `class` with a gap within 4 ulps of the recorded one.
pub fn verify_witness(phi: &ScalarFn, setting: &Setting, class: ConvexityClass, w: &Witness) -> Result<bool> {
    let combo = setting.combination(&w.r, &w.t, w.delta)?;
    if combo.iter().zip(&w.combo).any(|(a, b)| ulp_distance(*a, *b) > 1) {
        return Ok(false);
    }
    if class == ConvexityClass::XConvexSet || w.kind == WitnessKind::DomainEscape {
        return Ok(!setting.domain.contains(&combo)?);
    }
    if setting.escape == EscapePolicy::Reject && !setting.domain.contains(&combo)? {
        return Ok(false);
    }
    if !(setting.domain.contains(&w.r)? && setting.domain.contains(&w.t)?) {
        return Ok(false);
    }
    let strict = class.is_strict();
    if strict && (w.delta <= 0.0 || w.delta >= 1.0 || w.r == w.t) {
        return Ok(false);
    }
    let f = phi.eval(&combo)?;
    let fr = phi.eval(&w.r)?;
    let ft = phi.eval(&w.t)?;
    let semistrict = matches!(
        class,
        ConvexityClass::SemistrictlyQuasiXConvex | ConvexityClass::SemistrictlyQuasiXConcave
    );
    if semistrict && (fr - ft).abs() <= setting.tol.eps_val_eq {
        return Ok(false);
    }
    let (lhs, rhs) = sides(class, f, fr, ft, w.delta);
    let gap = lhs - rhs;
    let threshold = if strict {
        -setting.tol.eps_strict
    } else {
        setting.tol.eps_ineq
    };
    Ok(gap > threshold && ulp_distance(gap, w.gap) <= 4)
}

/// Re-evaluates the class inequality at an arbitrary triple.
pub fn evaluate_triple(
    phi: &ScalarFn,
    setting: &Setting,
    class: ConvexityClass,
    r: &[f64],
    t: &[f64],
    delta: f64,
) -> Result<Witness> {
    let combo = setting.combination(r, t, delta)?;
    if !setting.domain.contains(&combo)? && setting.escape == EscapePolicy::Reject {
        let dist = setting.domain.distance(&combo);
        return Ok(Witness {
            r: r.to_vec(),
            t: t.to_vec(),
            delta,
            combo,
            lhs: dist,
            rhs: 0.0,
            gap: dist,
            kind: WitnessKind::DomainEscape,
        });
    }
    let f = phi.eval(&combo)?;
    let (lhs, rhs) = sides(class, f, phi.eval(r)?, phi.eval(t)?, delta);
    Ok(Witness {
        r: r.to_vec(),
        t: t.to_vec(),
        delta,
        combo,
        lhs,
        rhs,
        gap: lhs - rhs,
        kind: WitnessKind::InequalityViolation,
    })
}

/// Bisects δ around a grid witness, at most 32 steps, keeping the larger gap.
pub fn refine_witness(phi: &ScalarFn, setting: &Setting, class: ConvexityClass, w: &Witness) -> Result<Witness> {
    let step = 1.0 / (setting.plan.delta_grid.max(2) - 1) as f64;
    let (min_d, max_d) = if class.is_strict() {
        (f64::EPSILON, 1.0 - f64::EPSILON)
    } else {
        (0.0, 1.0)
    };
    let mut best = w.clone();
    let mut lo = (w.delta - step).max(min_d);
    let mut hi = (w.delta + step).min(max_d);
    let try_at = |d: f64| -> Result<Option<Witness>> {
        let cand = evaluate_triple(phi, setting, class, &w.r, &w.t, d)?;
        Ok((cand.kind == WitnessKind::InequalityViolation).then_some(cand))
    };
    for _ in 0..32 {
        if hi - lo <= f64::EPSILON {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let left = try_at(0.5 * (lo + mid))?;
        let right = try_at(0.5 * (mid + hi))?;
        let lg = left.as_ref().map_or(f64::NEG_INFINITY, |c| c.gap);
        let rg = right.as_ref().map_or(f64::NEG_INFINITY, |c| c.gap);
        if lg >= rg {
            hi = mid;
            if let Some(c) = left.filter(|c| c.gap > best.gap) {
                best = c;
            }
        } else {
            lo = mid;
            if let Some(c) = right.filter(|c| c.gap > best.gap) {
                best = c;
            }
        }
    }
    Ok(best)
}

/// Whether `M` is X-convex for `g` on the sample plan.
pub fn check_x_convex_set(setting: &Setting) -> Result<ClassVerdict> {
    Checker::new(setting, &BreakpointHints::default())?.check_set()
}

pub fn check_x_convex(phi: &ScalarFn, setting: &Setting) -> Result<ClassVerdict> {
    Checker::for_function(setting, phi)?.check(phi, ConvexityClass::XConvex)
}

pub fn check_strictly_x_convex(phi: &ScalarFn, setting: &Setting) -> Result<ClassVerdict> {
    Checker::for_function(setting, phi)?.check(phi, ConvexityClass::StrictlyXConvex)
}

pub fn check_quasi_x_convex(phi: &ScalarFn, setting: &Setting) -> Result<ClassVerdict> {
    Checker::for_function(setting, phi)?.check(phi, ConvexityClass::QuasiXConvex)
}

pub fn check_strictly_quasi_x_convex(phi: &ScalarFn, setting: &Setting) -> Result<ClassVerdict> {
    Checker::for_function(setting, phi)?.check(phi, ConvexityClass::StrictlyQuasiXConvex)
}

pub fn check_semistrictly_quasi_x_convex(phi: &ScalarFn, setting: &Setting) -> Result<ClassVerdict> {
    Checker::for_function(setting, phi)?.check(phi, ConvexityClass::SemistrictlyQuasiXConvex)
}

/// Runs the matching convex check on `−φ` and relabels it with the concave class.
pub fn check_concave_variants(phi: &ScalarFn, setting: &Setting, class: ConvexityClass) -> Result<ClassVerdict> {
    if !class.is_concave() {
        return Err(Error::input(format!("{class} is not a concave class")));
    }
    let neg = phi.negated();
    let checker = Checker::for_function(setting, phi)?;
    let mut v = checker.check(&neg, class.convex_counterpart())?;
    v.class = class;
    Ok(v)
}

pub fn classify(phi: &ScalarFn, setting: &Setting) -> Result<Classification> {
    Checker::for_function(setting, phi)?.classify(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{catalog, GMap};

    fn small_plan() -> SamplePlan {
        SamplePlan {
            grid_per_axis: 21,
            random_count: 0,
            delta_grid: 21,
            ..SamplePlan::default()
        }
    }

    fn scalar(text: &str) -> ScalarFn {
        ScalarFn::parse(text, 1, &[]).unwrap()
    }

    #[test]
    fn combination_examples() {
        let id = GMap::identity(1);
        assert_eq!(combination_point(&[1.0], &[3.0], 0.5, &id).unwrap(), vec![2.0]);
        let g = GMap::shift(1, 7.0);
        assert_eq!(combination_point(&[100.0], &[3.0], 0.0, &g).unwrap(), vec![10.0]);
        let g = GMap::shift(1, -1.0 / 50.0);
        let c = combination_point(&[-1.5], &[-2.5], 0.502, &g).unwrap();
        assert!((c[0] + 2.018).abs() < 1e-12);
        assert!(combination_point(&[1.0], &[1.0], 1.5, &g).is_err());
        assert!(combination_point(&[1.0, 2.0], &[1.0], 0.5, &g).is_err());
    }

    #[test]
    fn set_check_on_union() {
        let m = DomainSet::closed_intervals(&[(1.0, 2.0), (3.0, f64::INFINITY)]).unwrap();
        let s = Setting::new(m.clone(), GMap::shift(1, 3.0)).unwrap().with_plan(small_plan());
        assert_eq!(check_x_convex_set(&s).unwrap().status, Status::NoCounterexampleFound);
        let s = Setting::new(m, GMap::identity(1)).unwrap().with_plan(small_plan());
        let v = check_x_convex_set(&s).unwrap();
        assert_eq!(v.status, Status::DomainEscape);
        let w = v.witness.unwrap();
        assert_eq!(w.kind, WitnessKind::DomainEscape);
        assert!(w.gap > 0.0);
    }

    #[test]
    fn identity_shift_is_strictly_convex_with_margin() {
        let m = DomainSet::closed_intervals(&[(0.0, 10.0)]).unwrap();
        let s = Setting::new(m, GMap::shift(1, -1.0))
            .unwrap()
            .with_plan(small_plan())
            .with_escape(EscapePolicy::Extend);
        let c = classify(&scalar("r"), &s).unwrap();
        for class in ConvexityClass::CONVEX_CLASSES {
            assert_eq!(c.status(class), Status::NoCounterexampleFound, "{class}");
        }
        let margin = c.verdict(ConvexityClass::StrictlyXConvex).margin().unwrap();
        assert!((margin - 1.0).abs() < 1e-12);
        assert_eq!(c.status(ConvexityClass::StrictlyXConcave), Status::Falsified);
        assert_eq!(c.set.status, Status::DomainEscape);
        assert!(c.inconsistencies.is_empty());
    }

    #[test]
    fn reject_policy_turns_escapes_into_domain_escape() {
        let m = DomainSet::closed_intervals(&[(0.0, 10.0)]).unwrap();
        let s = Setting::new(m, GMap::shift(1, -1.0)).unwrap().with_plan(small_plan());
        let c = classify(&scalar("r"), &s).unwrap();
        assert!(c.verdicts.iter().all(|v| v.status == Status::DomainEscape));
    }

    #[test]
    fn constants_and_equality_cases() {
        let m = DomainSet::closed_intervals(&[(0.0, 1.0)]).unwrap();
        let s = Setting::new(m, GMap::identity(1)).unwrap().with_plan(small_plan());
        let c = classify(&scalar("2"), &s).unwrap();
        assert_eq!(c.status(ConvexityClass::XConvex), Status::NoCounterexampleFound);
        assert_eq!(c.status(ConvexityClass::QuasiXConvex), Status::NoCounterexampleFound);
        assert_eq!(c.status(ConvexityClass::StrictlyXConvex), Status::Falsified);
        assert_eq!(c.status(ConvexityClass::StrictlyQuasiXConvex), Status::Falsified);
        assert_eq!(c.status(ConvexityClass::SemistrictlyQuasiXConvex), Status::NoCounterexampleFound);
        assert_eq!(c.status(ConvexityClass::XConcave), Status::NoCounterexampleFound);
        let id = classify(&scalar("r"), &s).unwrap();
        assert_eq!(id.status(ConvexityClass::StrictlyXConvex), Status::Falsified);
        assert_eq!(id.status(ConvexityClass::SemistrictlyQuasiXConvex), Status::NoCounterexampleFound);
        let sq = classify(&scalar("r^2"), &s).unwrap();
        assert_eq!(sq.status(ConvexityClass::XConvex), Status::NoCounterexampleFound);
        assert_eq!(sq.status(ConvexityClass::XConcave), Status::Falsified);
        let neg = check_concave_variants(&scalar("-r^2"), &s, ConvexityClass::XConcave).unwrap();
        assert_eq!(neg.status, Status::NoCounterexampleFound);
        assert_eq!(neg.class, ConvexityClass::XConcave);
    }

    #[test]
    fn floor_example_has_a_genuine_witness() {
        let m = DomainSet::new(
            1,
            vec![
                crate::geometry::DomainBox::new(vec![
                    crate::geometry::Interval::new(f64::NEG_INFINITY, -1.0 / 50.0, false, true).unwrap(),
                ]),
                crate::geometry::DomainBox::new(vec![crate::geometry::Interval::closed(-1.0 / 100.0, 0.0).unwrap()]),
            ],
        )
        .unwrap();
        let g = GMap::shift(1, -1.0 / 50.0);
        let phi = catalog("floor_alpha", &[("alpha", 0.0)]).unwrap().into_scalar().unwrap();
        let plan = SamplePlan {
            grid_per_axis: 21,
            random_count: 0,
            truncation_bound: 10.0,
            ..SamplePlan::default()
        };
        let s = Setting::new(m, g).unwrap().with_plan(plan);
        let c = classify(&phi, &s).unwrap();
        assert_eq!(c.status(ConvexityClass::QuasiXConvex), Status::NoCounterexampleFound);
        let v = c.verdict(ConvexityClass::XConvex);
        assert_eq!(v.status, Status::Falsified);
        let w = v.witness.as_ref().unwrap();
        assert!(w.gap > 1e-9);
        assert!(verify_witness(&phi, &s, ConvexityClass::XConvex, w).unwrap());
        let published = evaluate_triple(&phi, &s, ConvexityClass::XConvex, &[-1.5], &[-2.5], 0.502).unwrap();
        assert!(published.gap <= 0.0);
        let genuine = evaluate_triple(&phi, &s, ConvexityClass::XConvex, &[-3.0], &[-0.01], 0.51).unwrap();
        assert!((genuine.gap - 0.02).abs() < 1e-9);
    }

    #[test]
    fn piecewise_quasi_witness() {
        let m = DomainSet::closed_intervals(&[(-1.0, -0.5), (0.0, f64::INFINITY)]).unwrap();
        let phi = catalog("piecewise_3_2", &[]).unwrap().into_scalar().unwrap();
        let s = Setting::new(m, GMap::shift(1, 1.0))
            .unwrap()
            .with_plan(small_plan())
            .with_tol(Tolerances {
                eps_val_eq: 0.0,
                ..Tolerances::default()
            });
        let c = classify(&phi, &s).unwrap();
        let q = c.verdict(ConvexityClass::QuasiXConvex);
        assert_eq!(q.status, Status::Falsified);
        let w = q.witness.as_ref().unwrap();
        assert_eq!((w.lhs, w.rhs, w.gap), (3.0, 2.0, 1.0));
        assert_eq!(w.combo, vec![0.0]);
        assert_eq!(c.status(ConvexityClass::SemistrictlyQuasiXConvex), Status::NoCounterexampleFound);
        assert_eq!(c.status(ConvexityClass::StrictlyQuasiXConvex), Status::Falsified);
    }

    #[test]
    fn witness_ties_take_lexicographic_minimum() {
        let m = DomainSet::closed_intervals(&[(0.0, 1.0)]).unwrap();
        let s = Setting::new(m, GMap::identity(1)).unwrap().with_plan(small_plan());
        let c = classify(&scalar("1"), &s).unwrap();
        let w = c.verdict(ConvexityClass::StrictlyXConvex).witness.clone().unwrap();
        assert_eq!(w.r, vec![0.0]);
        assert_eq!(w.t, vec![0.05]);
        assert_eq!(w.delta, 0.05);
    }

    #[test]
    fn refinement_never_loses_gap() {
        let m = DomainSet::closed_intervals(&[(-3.0, 0.0)]).unwrap();
        let phi = ScalarFn::parse("floor(r)", 1, &[]).unwrap();
        let base = Setting::new(m, GMap::identity(1)).unwrap().with_plan(small_plan());
        let plain = Checker::for_function(&base, &phi).unwrap().check(&phi, ConvexityClass::XConvex).unwrap();
        let refined_setting = base.clone().with_refine(true);
        let refined = Checker::for_function(&refined_setting, &phi)
            .unwrap()
            .check(&phi, ConvexityClass::XConvex)
            .unwrap();
        assert!(refined.witness.unwrap().gap >= plain.witness.unwrap().gap);
    }

    #[test]
    fn ulp_distance_counts_representable_steps() {
        assert_eq!(ulp_distance(1.0, 1.0), 0);
        assert_eq!(ulp_distance(1.0, f64::from_bits(1.0f64.to_bits() + 3)), 3);
        assert_eq!(ulp_distance(-0.0, 0.0), 0);
    }
}
