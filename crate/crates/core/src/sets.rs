//! Epigraphs, hypographs and lower level sets, with X-convexity checks.

use serde::Serialize;

use crate::checker::{
    convex_value, par_rows, place_combo, recompute_combo, ulp_distance, Acc, Checker, ClassVerdict, ConvexityClass, EscapePolicy, Setting, Status,
    Witness, WitnessKind,
};
use crate::error::{Error, Result};
use crate::geometry::{DomainSet, Point};
use crate::harness::{HarnessReport, TheoremId};
use crate::lang::{EvalError, GMap, ScalarFn};

/// `g̃(t, μ) = (g(t), μ)`.
#[derive(Debug, Clone)]
pub struct LiftedGMap {
    pub base: GMap,
}

impl LiftedGMap {
    pub fn new(base: GMap) -> Self {
        Self { base }
    }

    pub fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    pub fn eval(&self, x: &[f64]) -> std::result::Result<Point, EvalError> {
        let (t, mu) = x.split_at(self.base.dim());
        let mut out = self.base.eval(t)?;
        out.extend_from_slice(mu);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lower,
    Upper,
}

/// `{x ∈ M : φ(x) ≤ η}` or `{x ∈ M : φ(x) ≥ η}`.
#[derive(Debug, Clone)]
pub struct LevelSet {
    pub phi: ScalarFn,
    pub eta: f64,
    pub direction: Direction,
}

impl LevelSet {
    pub fn lower(phi: ScalarFn, eta: f64) -> Self {
        Self {
            phi,
            eta,
            direction: Direction::Lower,
        }
    }

    pub fn upper(phi: ScalarFn, eta: f64) -> Self {
        Self {
            phi,
            eta,
            direction: Direction::Upper,
        }
    }

    pub fn contains(&self, domain: &DomainSet, x: &[f64]) -> Result<bool> {
        if !domain.contains(x)? {
            return Ok(false);
        }
        let v = self.phi.eval(x)?;
        Ok(match self.direction {
            Direction::Lower => v <= self.eta,
            Direction::Upper => v >= self.eta,
        })
    }

    /// The sampled points that belong to the level set.
    pub fn members(&self, domain: &DomainSet, points: &[Point]) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        for p in points {
            if self.contains(domain, p)? {
                out.push(p.clone());
            }
        }
        Ok(out)
    }
}

/// `(x, η) ∈ epi(φ)`, with `eps` slack on the value comparison.
pub fn epigraph_member(phi: &ScalarFn, domain: &DomainSet, x: &[f64], eta: f64, eps: f64) -> Result<bool> {
    Ok(domain.contains(x)? && phi.eval(x)? <= eta + eps)
}

/// `(x, η) ∈ hyp(φ)`, with `eps` slack on the value comparison.
pub fn hypograph_member(phi: &ScalarFn, domain: &DomainSet, x: &[f64], eta: f64, eps: f64) -> Result<bool> {
    Ok(domain.contains(x)? && phi.eval(x)? >= eta - eps)
}

const EPIGRAPH_HEIGHTS: usize = 3;

/// Checks that the epigraph is X-convex for the lifted map.
///
/// Each sampled `x` is lifted to heights `φ(x) + H·k/2`, `k = 0, 1, 2`,
/// with `H` twice the sampled range of `φ` (1 for a constant).
pub fn check_epigraph_x_convex(phi: &ScalarFn, setting: &Setting) -> Result<ClassVerdict> {
    let checker = Checker::for_function(setting, phi)?;
    epigraph_scan(&checker, phi)
}

fn epigraph_scan(checker: &Checker<'_>, phi: &ScalarFn) -> Result<ClassVerdict> {
    let setting = checker.setting();
    let fvals = checker.values(phi)?;
    let lo = fvals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fvals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let height = if hi > lo { 2.0 * (hi - lo) } else { 1.0 };
    let lift = |i: usize, k: usize| fvals[i] + height * k as f64 / (EPIGRAPH_HEIGHTS - 1) as f64;

    let points = checker.points();
    let gvals = checker.gvals();
    let deltas = checker.deltas();
    let np = points.len();
    let n = setting.domain.dim();
    let reject = setting.escape == EscapePolicy::Reject;
    let hh = EPIGRAPH_HEIGHTS;

    // index of a lifted point: i * hh + a
    let (acc, escape) = par_rows(
        np,
        || (Acc::default(), Acc::default()),
        |i, (acc, escape)| {
            let mut combo = vec![0.0; n];
            for j in 0..np {
                for (k, &d) in deltas.iter().enumerate() {
                    let inside = place_combo(&setting.domain, &points[i], &points[j], &gvals[j], d, &mut combo);
                    if !inside {
                        let dist = setting.domain.distance(&combo).max(f64::MIN_POSITIVE);
                        for a in 0..hh {
                            for b in 0..hh {
                                escape.push(dist, i * hh + a, j * hh + b, k);
                            }
                        }
                        if reject {
                            continue;
                        }
                    }
                    let f = phi.eval(&combo)?;
                    for a in 0..hh {
                        for b in 0..hh {
                            let level = convex_value(d, lift(i, a), lift(j, b));
                            acc.push(f - level, i * hh + a, j * hh + b, k);
                        }
                    }
                }
            }
            Ok(())
        },
        |total, (a, e)| {
            total.0.merge(&a);
            total.1.merge(&e);
        },
    )?;

    let witness_at = |(li, lj, k): (u32, u32, u32), kind: WitnessKind| -> Result<Witness> {
        let (i, a) = (li as usize / hh, li as usize % hh);
        let (j, b) = (lj as usize / hh, lj as usize % hh);
        let d = deltas[k as usize];
        let mut combo = vec![0.0; n];
        place_combo(&setting.domain, &points[i], &points[j], &gvals[j], d, &mut combo);
        let (eta, mu) = (lift(i, a), lift(j, b));
        let level = convex_value(d, eta, mu);
        let mut r = points[i].clone();
        r.push(eta);
        let mut t = points[j].clone();
        t.push(mu);
        let (lhs, rhs) = match kind {
            WitnessKind::DomainEscape => (setting.domain.distance(&combo), 0.0),
            WitnessKind::InequalityViolation => (phi.eval(&combo)?, level),
        };
        combo.push(level);
        Ok(Witness {
            r,
            t,
            delta: d,
            combo,
            lhs,
            rhs,
            gap: lhs - rhs,
            kind,
        })
    };

    let mut v = ClassVerdict {
        class: ConvexityClass::XConvexSet,
        status: Status::NoCounterexampleFound,
        witness: None,
        triples_checked: acc.count + if reject { escape.count } else { 0 },
        max_gap: acc.max_gap(),
        escapes: escape.count,
        eta: None,
        note: Some(format!("epigraph under the lifted map, vertical height {height}")),
    };
    if let (true, Some(arg)) = (reject, escape.arg) {
        v.status = Status::DomainEscape;
        v.witness = Some(witness_at(arg, WitnessKind::DomainEscape)?);
    } else if let Some(arg) = acc.arg.filter(|_| acc.max_gap > setting.tol.eps_ineq) {
        v.status = Status::Falsified;
        v.witness = Some(witness_at(arg, WitnessKind::InequalityViolation)?);
    }
    Ok(v)
}

/// Per-η bucket of a fused level-set scan.
#[derive(Clone, Default)]
struct Bucket {
    value: Acc,
    escape: Acc,
}

fn better(a: &Acc, b: &Acc) -> bool {
    match (a.arg, b.arg) {
        (_, None) => false,
        (None, Some(_)) => true,
        (Some(x), Some(y)) => b.max_gap > a.max_gap || (b.max_gap == a.max_gap && y < x),
    }
}

/// Level-set verdicts for every `eta` in one pass over the triples.
///
/// A triple belongs to `L(φ, η)` when `max(φ(r), φ(t)) ≤ η`, so the worst
/// violation at `η` is the largest `φ(combo)` over triples whose larger
/// endpoint value is at most `η`.
fn levelset_scan(checker: &Checker<'_>, phi: &ScalarFn, etas: &[f64]) -> Result<Vec<ClassVerdict>> {
    let setting = checker.setting();
    let mut order: Vec<usize> = (0..etas.len()).collect();
    order.sort_by(|&a, &b| etas[a].total_cmp(&etas[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| etas[i]).collect();

    let fvals = checker.values(phi)?;
    let points = checker.points();
    let gvals = checker.gvals();
    let deltas = checker.deltas();
    let np = points.len();
    let n = setting.domain.dim();
    let reject = setting.escape == EscapePolicy::Reject;
    let bucket_of = |v: f64| sorted.partition_point(|&e| e < v);

    let buckets = par_rows(
        np,
        || vec![Bucket::default(); sorted.len()],
        |i, buckets| {
            let mut combo = vec![0.0; n];
            for j in 0..np {
                let b = bucket_of(fvals[i].max(fvals[j]));
                if b == sorted.len() {
                    continue;
                }
                let bucket = &mut buckets[b];
                for (k, &d) in deltas.iter().enumerate() {
                    let inside = place_combo(&setting.domain, &points[i], &points[j], &gvals[j], d, &mut combo);
                    if !inside {
                        let dist = setting.domain.distance(&combo).max(f64::MIN_POSITIVE);
                        bucket.escape.push(dist, i, j, k);
                        if reject {
                            continue;
                        }
                    }
                    bucket.value.push(phi.eval(&combo)?, i, j, k);
                }
            }
            Ok(())
        },
        |total, part| {
            for (a, b) in total.iter_mut().zip(&part) {
                a.value.merge(&b.value);
                a.escape.merge(&b.escape);
            }
        },
    )?;

    let mut running = Bucket::default();
    let mut per_sorted = Vec::with_capacity(sorted.len());
    for (b, &eta) in buckets.iter().zip(&sorted) {
        let count = running.value.count + b.value.count;
        let esc_count = running.escape.count + b.escape.count;
        if better(&running.value, &b.value) {
            running.value = b.value;
        }
        if better(&running.escape, &b.escape) {
            running.escape = b.escape;
        }
        running.value.count = count;
        running.escape.count = esc_count;

        let mut v = ClassVerdict {
            class: ConvexityClass::XConvexSet,
            status: Status::NoCounterexampleFound,
            witness: None,
            triples_checked: count + if reject { esc_count } else { 0 },
            max_gap: running.value.max_gap().map(|f| f - eta),
            escapes: esc_count,
            eta: Some(eta),
            note: None,
        };
        let build = |(i, j, k): (u32, u32, u32), kind: WitnessKind| -> Result<Witness> {
            let (i, j, k) = (i as usize, j as usize, k as usize);
            let mut combo = vec![0.0; n];
            place_combo(&setting.domain, &points[i], &points[j], &gvals[j], deltas[k], &mut combo);
            let (lhs, rhs) = match kind {
                WitnessKind::DomainEscape => (setting.domain.distance(&combo), 0.0),
                WitnessKind::InequalityViolation => (phi.eval(&combo)?, eta),
            };
            Ok(Witness {
                r: points[i].clone(),
                t: points[j].clone(),
                delta: deltas[k],
                combo,
                lhs,
                rhs,
                gap: lhs - rhs,
                kind,
            })
        };
        if v.triples_checked == 0 {
            v.note = Some("level set has no sampled members; vacuous pass".into());
        } else if let (true, Some(arg)) = (reject, running.escape.arg) {
            v.status = Status::DomainEscape;
            v.witness = Some(build(arg, WitnessKind::DomainEscape)?);
        } else if let Some(arg) = running.value.arg.filter(|_| running.value.max_gap - eta > setting.tol.eps_ineq) {
            v.status = Status::Falsified;
            v.witness = Some(build(arg, WitnessKind::InequalityViolation)?);
        }
        per_sorted.push(v);
    }

    let mut out: Vec<Option<ClassVerdict>> = vec![None; etas.len()];
    for (pos, v) in order.into_iter().zip(per_sorted) {
        out[pos] = Some(v);
    }
    Ok(out.into_iter().map(|v| v.expect("every eta has a verdict")).collect())
}

/// Checks that `L(φ, η)` is X-convex on the samples.
pub fn check_levelset_x_convex(phi: &ScalarFn, setting: &Setting, eta: f64) -> Result<ClassVerdict> {
    if !eta.is_finite() {
        return Err(Error::input("eta must be finite"));
    }
    let checker = Checker::for_function(setting, phi)?;
    Ok(levelset_scan(&checker, phi, &[eta])?.remove(0))
}

/// Level-set verdicts for several η on one shared sample.
pub fn check_levelsets(checker: &Checker<'_>, phi: &ScalarFn, etas: &[f64]) -> Result<Vec<ClassVerdict>> {
    if etas.iter().any(|e| !e.is_finite()) {
        return Err(Error::input("eta values must be finite"));
    }
    levelset_scan(checker, phi, etas)
}

fn distinct_values(vals: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = vals.iter().map(|x| x + 0.0).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Quasi-X-convexity against X-convexity of every lower level set in the
/// η grid (default: every distinct sampled value of `φ`).
///
/// The grid is finite, so the converse direction is only exercised at the
/// listed η; the larger endpoint value of the quasi witness is always added.
pub fn quasi_iff_levelsets_harness(
    phi: &ScalarFn,
    setting: &Setting,
    eta_grid: Option<&[f64]>,
    instance: &str,
) -> Result<HarnessReport> {
    let checker = Checker::for_function(setting, phi)?;
    let mut report = HarnessReport::new(TheoremId::T46, instance);
    let quasi = checker.check(phi, ConvexityClass::QuasiXConvex)?;
    let mut etas = match eta_grid {
        Some([]) => return Err(Error::input("eta grid must not be empty")),
        Some(g) => distinct_values(g),
        None => distinct_values(&checker.values(phi)?),
    };
    let witness_eta = match (&quasi.status, &quasi.witness) {
        (Status::Falsified, Some(w)) => Some(w.rhs),
        (Status::DomainEscape, Some(w)) => Some(phi.eval(&w.r)?.max(phi.eval(&w.t)?)),
        _ => None,
    };
    if let Some(e) = witness_eta {
        etas.push(e);
        etas = distinct_values(&etas);
    }
    let levels = check_levelsets(&checker, phi, &etas)?;
    let failing: Vec<f64> = levels.iter().filter(|v| !v.passed()).filter_map(|v| v.eta).collect();

    report.detail("eta_count", etas.len());
    report.detail("failing_etas", &failing);
    report.notes.push("the converse direction is checked on a finite eta grid only".into());
    let quasi_ok = quasi.passed();
    report.hypotheses.push(quasi);
    report.conclusions = levels;

    if quasi_ok && !failing.is_empty() {
        report.red(format!("no quasi counterexample but {} level set(s) fail", failing.len()));
    } else if !quasi_ok {
        let hit = witness_eta.is_some_and(|e| failing.contains(&e));
        if !hit {
            report.red("quasi falsified but the level set at the witness value passes");
        }
    }
    Ok(report)
}

/// Lower level sets of an X-convex function are X-convex.
pub fn levelset_theorem_harness(
    phi: &ScalarFn,
    setting: &Setting,
    eta_grid: Option<&[f64]>,
    instance: &str,
) -> Result<HarnessReport> {
    let checker = Checker::for_function(setting, phi)?;
    let mut report = HarnessReport::new(TheoremId::T44, instance);
    report.hypotheses.push(checker.check(phi, ConvexityClass::XConvex)?);
    let etas = match eta_grid {
        Some([]) => return Err(Error::input("eta grid must not be empty")),
        Some(g) => distinct_values(g),
        None => distinct_values(&checker.values(phi)?),
    };
    report.conclusions = check_levelsets(&checker, phi, &etas)?;
    if report.gate() {
        let failing = report.conclusions.iter().filter(|v| !v.passed()).count();
        if failing > 0 {
            report.red(format!("{failing} level set(s) fail although phi is X-convex on the samples"));
        }
    }
    Ok(report)
}

/// The epigraph of an X-convex function is X-convex for the lifted map.
pub fn epigraph_theorem_harness(phi: &ScalarFn, setting: &Setting, instance: &str) -> Result<HarnessReport> {
    let checker = Checker::for_function(setting, phi)?;
    let mut report = HarnessReport::new(TheoremId::T41, instance);
    report.hypotheses.push(checker.check(phi, ConvexityClass::XConvex)?);
    let epi = epigraph_scan(&checker, phi)?;
    let ok = epi.passed();
    report.conclusions.push(epi);
    if report.gate() && !ok {
        report.red("epigraph check failed although phi is X-convex on the samples");
    }
    Ok(report)
}

/// Re-checks a level-set witness at `eta`: both endpoints are members and
/// the combination leaves the level set by the recorded amount.
pub fn verify_levelset_witness(phi: &ScalarFn, setting: &Setting, eta: f64, w: &Witness) -> Result<bool> {
    let Some(combo) = recompute_combo(setting, &w.r, &w.t, w.delta, &w.combo)? else {
        return Ok(false);
    };
    let dom = &setting.domain;
    if !(dom.contains(&w.r)? && dom.contains(&w.t)?) || phi.eval(&w.r)?.max(phi.eval(&w.t)?) > eta {
        return Ok(false);
    }
    let inside = dom.contains(&combo)?;
    if w.kind == WitnessKind::DomainEscape {
        return Ok(!inside);
    }
    if setting.escape == EscapePolicy::Reject && !inside {
        return Ok(false);
    }
    let gap = phi.eval(&combo)? - eta;
    Ok(gap > setting.tol.eps_ineq && ulp_distance(gap, w.gap) <= 4)
}

/// Re-checks an epigraph witness whose points carry the height last.
pub fn verify_epigraph_witness(phi: &ScalarFn, setting: &Setting, w: &Witness) -> Result<bool> {
    let n = setting.domain.dim();
    if w.r.len() != n + 1 || w.t.len() != n + 1 || w.combo.len() != n + 1 {
        return Ok(false);
    }
    let (x, eta) = (&w.r[..n], w.r[n]);
    let (y, mu) = (&w.t[..n], w.t[n]);
    let eps = setting.tol.eps_ineq;
    if !(epigraph_member(phi, &setting.domain, x, eta, eps)? && epigraph_member(phi, &setting.domain, y, mu, eps)?) {
        return Ok(false);
    }
    let Some(combo) = recompute_combo(setting, x, y, w.delta, &w.combo[..n])? else {
        return Ok(false);
    };
    let level = convex_value(w.delta, eta, mu);
    if ulp_distance(level, w.combo[n]) > 1 {
        return Ok(false);
    }
    let inside = setting.domain.contains(&combo)?;
    if w.kind == WitnessKind::DomainEscape {
        return Ok(!inside);
    }
    if setting.escape == EscapePolicy::Reject && !inside {
        return Ok(false);
    }
    let gap = phi.eval(&combo)? - level;
    Ok(gap > eps && ulp_distance(gap, w.gap) <= 4)
}

/// Epigraph verdict on an existing sample.
pub fn check_epigraph_on(checker: &Checker<'_>, phi: &ScalarFn) -> Result<ClassVerdict> {
    epigraph_scan(checker, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SamplePlan;
    use crate::harness::HarnessStatus;
    use crate::lang::catalog;

    fn plan() -> SamplePlan {
        SamplePlan {
            grid_per_axis: 21,
            random_count: 0,
            delta_grid: 21,
            ..SamplePlan::default()
        }
    }

    fn f(text: &str) -> ScalarFn {
        ScalarFn::parse(text, 1, &[]).unwrap()
    }

    fn unit() -> DomainSet {
        DomainSet::closed_intervals(&[(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn membership_examples() {
        let m = unit();
        assert!(epigraph_member(&f("r"), &m, &[0.5], 0.7, 1e-9).unwrap());
        assert!(!epigraph_member(&f("r"), &m, &[0.5], 0.4, 1e-9).unwrap());
        assert!(epigraph_member(&f("3"), &m, &[0.2], 3.0, 0.0).unwrap());
        assert!(!epigraph_member(&f("3"), &m, &[2.0], 3.0, 0.0).unwrap());
        assert!(hypograph_member(&f("r"), &m, &[0.5], 0.4, 1e-9).unwrap());
        let l = LevelSet::lower(f("r"), 0.5);
        assert!(l.contains(&m, &[0.5]).unwrap());
        assert!(!l.contains(&m, &[0.6]).unwrap());
        assert!(LevelSet::upper(f("r"), 0.5).contains(&m, &[0.6]).unwrap());
        let lifted = LiftedGMap::new(GMap::shift(1, 3.0));
        assert_eq!(lifted.eval(&[1.0, 7.0]).unwrap(), vec![4.0, 7.0]);
        assert_eq!(lifted.dim(), 2);
    }

    #[test]
    fn epigraph_checks() {
        let s = Setting::new(
            DomainSet::closed_intervals(&[(1.0, 2.0), (3.0, f64::INFINITY)]).unwrap(),
            GMap::shift(1, 3.0),
        )
        .unwrap()
        .with_plan(plan());
        assert_eq!(check_epigraph_x_convex(&f("4"), &s).unwrap().status, Status::NoCounterexampleFound);
        let s = Setting::new(unit(), GMap::identity(1)).unwrap().with_plan(plan());
        assert_eq!(check_epigraph_x_convex(&f("r^2"), &s).unwrap().status, Status::NoCounterexampleFound);
        let v = check_epigraph_x_convex(&f("-r^2"), &s).unwrap();
        assert_eq!(v.status, Status::Falsified);
        assert_eq!(v.witness.unwrap().r.len(), 2);
    }

    #[test]
    fn level_set_checks() {
        let s = Setting::new(unit(), GMap::identity(1)).unwrap().with_plan(plan());
        assert_eq!(check_levelset_x_convex(&f("r"), &s, 0.5).unwrap().status, Status::NoCounterexampleFound);
        let empty = check_levelset_x_convex(&f("r"), &s, -1.0).unwrap();
        assert_eq!((empty.status, empty.triples_checked), (Status::NoCounterexampleFound, 0));

        let m = DomainSet::closed_intervals(&[(-1.0, -0.5), (0.0, f64::INFINITY)]).unwrap();
        let phi = catalog("piecewise_3_2", &[]).unwrap().into_scalar().unwrap();
        let s = Setting::new(m, GMap::shift(1, 1.0)).unwrap().with_plan(plan());
        let v = check_levelset_x_convex(&phi, &s, 2.0).unwrap();
        assert_eq!(v.status, Status::Falsified);
        assert_eq!(v.witness.unwrap().combo, vec![0.0]);
    }

    #[test]
    fn fused_scan_matches_single_eta_scans() {
        let s = Setting::new(DomainSet::closed_intervals(&[(-2.0, 2.0)]).unwrap(), GMap::shift(1, 0.5))
            .unwrap()
            .with_plan(plan())
            .with_escape(EscapePolicy::Extend);
        let phi = f("floor(r) + abs(r)");
        let checker = Checker::for_function(&s, &phi).unwrap();
        let etas = [1.5, -1.0, 0.0, 3.0, 0.75];
        let fused = check_levelsets(&checker, &phi, &etas).unwrap();
        for (eta, v) in etas.iter().zip(&fused) {
            let single = check_levelsets(&checker, &phi, &[*eta]).unwrap().remove(0);
            assert_eq!(&single, v);
        }
    }

    #[test]
    fn biconditional_harness() {
        let m = DomainSet::closed_intervals(&[(-1.0, -0.5), (0.0, f64::INFINITY)]).unwrap();
        let phi = catalog("piecewise_3_2", &[]).unwrap().into_scalar().unwrap();
        let s = Setting::new(m, GMap::shift(1, 1.0)).unwrap().with_plan(plan());
        let report = quasi_iff_levelsets_harness(&phi, &s, None, "piecewise").unwrap();
        assert_eq!(report.status, HarnessStatus::Pass);
        assert!(!report.hypotheses[0].passed());
        let s = Setting::new(unit(), GMap::identity(1)).unwrap().with_plan(plan());
        let report = quasi_iff_levelsets_harness(&f("2"), &s, Some(&[1.0, 2.0, 3.0]), "const").unwrap();
        assert_eq!(report.status, HarnessStatus::Pass);
        assert_eq!(report.conclusions[0].triples_checked, 0);
    }
}
