//! Sampled minimization, the ball condition, and Pareto efficiency.

use serde::{Deserialize, Serialize};

use crate::checker::{
    combo_into, par_rows, place_combo, recompute_combo, ulp_distance, Acc, Checker, ClassVerdict, ConvexityClass, Setting, Status, Witness,
    WitnessKind,
};
use crate::error::{Error, Result};
use crate::geometry::{BreakpointHints, Point};
use crate::harness::{HarnessReport, HarnessStatus, TheoremId};
use crate::lang::ScalarFn;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Sampled argmin; ties go to the lexicographically smallest point.
pub fn global_min_search(phi: &ScalarFn, setting: &Setting) -> Result<(Point, f64)> {
    let checker = Checker::for_function(setting, phi)?;
    let vals = checker.values(phi)?;
    let (i, v) = argmin(&vals);
    Ok((checker.points()[i].clone(), v))
}

fn argmin(vals: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[best] {
            best = i;
        }
    }
    (best, vals[best])
}

/// Indices of sampled ν-ball local minima.
pub(crate) fn local_minima_idx(points: &[Point], vals: &[f64], nu: f64, strict: bool) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            points.iter().zip(vals).enumerate().all(|(j, (p, &v))| {
                if j == i || dist(p, &points[i]) >= nu {
                    return true;
                }
                if strict {
                    vals[i] < v
                } else {
                    vals[i] <= v
                }
            })
        })
        .collect()
}

/// Sampled points whose value is at most (below, when `strict`) every
/// sampled value within distance `nu`.
pub fn local_minima(phi: &ScalarFn, setting: &Setting, nu: f64, strict: bool) -> Result<Vec<Point>> {
    check_nu(nu)?;
    let checker = Checker::for_function(setting, phi)?;
    let vals = checker.values(phi)?;
    Ok(local_minima_idx(checker.points(), &vals, nu, strict)
        .into_iter()
        .map(|i| checker.points()[i].clone())
        .collect())
}

fn check_nu(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 0.0 {
        Ok(())
    } else {
        Err(Error::input(format!("nu must be a positive real, got {nu}")))
    }
}

/// `sup ‖δ(s − r) + g(r) − r‖` over the sampled triples against `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallCondition {
    pub nu: f64,
    pub max_observed: f64,
    pub holds_on_samples: bool,
}

fn ball_on(checker: &Checker<'_>, nu: f64) -> Result<BallCondition> {
    let points = checker.points();
    let gvals = checker.gvals();
    let deltas = checker.deltas();
    let n = points[0].len();
    let acc = par_rows(
        points.len(),
        Acc::default,
        |s, acc| {
            let mut combo = vec![0.0; n];
            for r in 0..points.len() {
                for (k, &d) in deltas.iter().enumerate() {
                    combo_into(&points[s], &points[r], &gvals[r], d, &mut combo);
                    acc.push(dist(&combo, &points[r]), s, r, k);
                }
            }
            Ok(())
        },
        |a, b| a.merge(&b),
    )?;
    Ok(BallCondition {
        nu,
        max_observed: acc.max_gap,
        holds_on_samples: acc.max_gap < nu,
    })
}

pub fn check_ball_condition(setting: &Setting, nu: f64) -> Result<BallCondition> {
    check_nu(nu)?;
    ball_on(&Checker::new(setting, &BreakpointHints::default())?, nu)
}

/// Which local-to-global statement to exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalGlobalMode {
    /// (Strictly) X-convex: local minima are global, unique when strict.
    Xconvex,
    /// Quasi-X-convex: strict local minima are strict global minima.
    QuasiStrict,
    /// Semistrictly quasi-X-convex: local minima are global.
    Semistrict,
}

impl LocalGlobalMode {
    fn theorem(self) -> TheoremId {
        match self {
            LocalGlobalMode::Xconvex => TheoremId::T45,
            LocalGlobalMode::QuasiStrict => TheoremId::T47,
            LocalGlobalMode::Semistrict => TheoremId::T410,
        }
    }

    pub fn for_theorem(theorem: TheoremId) -> Option<Self> {
        match theorem {
            TheoremId::T45 => Some(LocalGlobalMode::Xconvex),
            TheoremId::T47 => Some(LocalGlobalMode::QuasiStrict),
            TheoremId::T410 => Some(LocalGlobalMode::Semistrict),
            _ => None,
        }
    }
}

/// Local minima against the global minimum under the ball condition.
pub fn local_global_harness(
    phi: &ScalarFn,
    setting: &Setting,
    nu: f64,
    mode: LocalGlobalMode,
    instance: &str,
) -> Result<HarnessReport> {
    check_nu(nu)?;
    let checker = Checker::for_function(setting, phi)?;
    let mut report = HarnessReport::new(mode.theorem(), instance);
    let ball = ball_on(&checker, nu)?;
    report.detail("ball_condition", ball);

    let classes: &[ConvexityClass] = match mode {
        LocalGlobalMode::Xconvex => &[ConvexityClass::XConvex],
        LocalGlobalMode::QuasiStrict => &[ConvexityClass::QuasiXConvex],
        LocalGlobalMode::Semistrict => &[ConvexityClass::SemistrictlyQuasiXConvex],
    };
    let classification = checker.classify(phi)?;
    for &c in classes {
        report.hypotheses.push(classification.verdict(c).clone());
    }
    if !ball.holds_on_samples {
        report.skip(format!(
            "ball condition fails on samples: max observed {} is not below nu {}",
            ball.max_observed, nu
        ));
        return Ok(report);
    }
    if !report.gate() {
        return Ok(report);
    }

    let vals = checker.values(phi)?;
    let points = checker.points();
    let (gi, gmin) = argmin(&vals);
    let eps = setting.tol.eps_ineq;
    let strict_locals = mode == LocalGlobalMode::QuasiStrict;
    let locals = local_minima_idx(points, &vals, nu, strict_locals);
    report.detail("global_min", (&points[gi], gmin));
    report.detail("local_minima", locals.iter().map(|&i| &points[i]).collect::<Vec<_>>());

    let mut problems = Vec::new();
    for &i in &locals {
        let ok = if strict_locals {
            // strict global: below every other sampled value
            vals.iter().enumerate().all(|(j, &v)| j == i || vals[i] < v)
        } else {
            vals[i] <= gmin + eps
        };
        if !ok {
            problems.push(format!("local minimum at {:?} with value {} is not global", points[i], vals[i]));
        }
    }
    if mode == LocalGlobalMode::Xconvex {
        let strict = classification.verdict(ConvexityClass::StrictlyXConvex);
        if strict.passed() {
            let argmins = vals.iter().filter(|&&v| v <= gmin + eps).count();
            report.detail("argmin_count", argmins);
            report.hypotheses.push(strict.clone());
            if argmins != 1 {
                problems.push(format!("strictly X-convex but {argmins} sampled global minimizers"));
            }
        }
    }
    if !problems.is_empty() {
        report.red(problems.join("; "));
    }
    Ok(report)
}

/// Samples within `eps_ineq` of the sampled minimum.
fn solution_set(vals: &[f64], eps: f64) -> (f64, Vec<usize>) {
    let (_, min) = argmin(vals);
    let members = (0..vals.len()).filter(|&i| vals[i] <= min + eps).collect();
    (min, members)
}

/// Combinations of sampled minimizers stay in the domain and at the minimum.
///
/// Domain membership is always required here, independently of the
/// setting's escape policy.
pub fn minimum_set_x_convex_harness(
    phi: &ScalarFn,
    setting: &Setting,
    theorem: TheoremId,
    instance: &str,
) -> Result<HarnessReport> {
    let hyp = match theorem {
        TheoremId::T45MinSet => ConvexityClass::XConvex,
        TheoremId::T59 => ConvexityClass::QuasiXConvex,
        other => return Err(Error::input(format!("{other} is not a minimum-set theorem"))),
    };
    let checker = Checker::for_function(setting, phi)?;
    let mut report = HarnessReport::new(theorem, instance);
    report.hypotheses.push(checker.check(phi, hyp)?);

    let vals = checker.values(phi)?;
    let eps = setting.tol.eps_ineq;
    let (min, members) = solution_set(&vals, eps);
    let points = checker.points();
    let gvals = checker.gvals();
    let deltas = checker.deltas();
    let n = points[0].len();
    report.detail("min_value", min);
    report.detail("solution_set_size", members.len());

    // (gap, kind) per triple; escapes rank above value violations
    let (value, escape) = par_rows(
        members.len(),
        || (Acc::default(), Acc::default()),
        |a, (value, escape)| {
            let i = members[a];
            let mut combo = vec![0.0; n];
            for &j in &members {
                for (k, &d) in deltas.iter().enumerate() {
                    if !place_combo(&setting.domain, &points[i], &points[j], &gvals[j], d, &mut combo) {
                        escape.push(setting.domain.distance(&combo).max(f64::MIN_POSITIVE), i, j, k);
                        continue;
                    }
                    value.push(phi.eval(&combo)? - (min + eps), i, j, k);
                }
            }
            Ok(())
        },
        |t, (v, e)| {
            t.0.merge(&v);
            t.1.merge(&e);
        },
    )?;

    let build = |(i, j, k): (u32, u32, u32), kind: WitnessKind| -> Result<Witness> {
        let (i, j, k) = (i as usize, j as usize, k as usize);
        let mut combo = vec![0.0; n];
        place_combo(&setting.domain, &points[i], &points[j], &gvals[j], deltas[k], &mut combo);
        let (lhs, rhs) = match kind {
            WitnessKind::DomainEscape => (setting.domain.distance(&combo), 0.0),
            WitnessKind::InequalityViolation => (phi.eval(&combo)?, min),
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
    let mut verdict = ClassVerdict {
        class: ConvexityClass::XConvexSet,
        status: Status::NoCounterexampleFound,
        witness: None,
        triples_checked: value.count + escape.count,
        max_gap: value.max_gap(),
        escapes: escape.count,
        eta: Some(min),
        note: Some("solution set of the sampled minimization".into()),
    };
    if let Some(arg) = escape.arg {
        verdict.status = Status::DomainEscape;
        verdict.witness = Some(build(arg, WitnessKind::DomainEscape)?);
    } else if let Some(arg) = value.arg.filter(|_| value.max_gap > 0.0) {
        verdict.status = Status::Falsified;
        verdict.witness = Some(build(arg, WitnessKind::InequalityViolation)?);
    }
    let status = verdict.status;
    report.conclusions.push(verdict);
    if report.gate() {
        match status {
            Status::NoCounterexampleFound => {}
            Status::DomainEscape => report.red(
                "a combination of minimizers leaves the domain, so it cannot belong to the solution set; \
                 the statement presumes such combinations stay in the domain",
            ),
            Status::Falsified => report.red("a combination of minimizers has a value above the minimum"),
        }
    }
    Ok(report)
}

/// Re-checks a minimum-set witness against the recorded minimum `w.rhs`.
pub fn verify_min_set_witness(phi: &ScalarFn, setting: &Setting, min: f64, w: &Witness) -> Result<bool> {
    let Some(combo) = recompute_combo(setting, &w.r, &w.t, w.delta, &w.combo)? else {
        return Ok(false);
    };
    let eps = setting.tol.eps_ineq;
    let dom = &setting.domain;
    let member = |x: &[f64]| -> Result<bool> { Ok(dom.contains(x)? && phi.eval(x)? <= min + eps) };
    if !(member(&w.r)? && member(&w.t)?) {
        return Ok(false);
    }
    if w.kind == WitnessKind::DomainEscape {
        return Ok(!dom.contains(&combo)?);
    }
    let gap = phi.eval(&combo)? - min;
    Ok(dom.contains(&combo)? && gap > eps && ulp_distance(gap, w.gap) <= 4)
}

/// A strictly quasi-X-convex function has at most one sampled minimizer.
pub fn uniqueness_harness(phi: &ScalarFn, setting: &Setting, theorem: TheoremId, instance: &str) -> Result<HarnessReport> {
    if !matches!(theorem, TheoremId::T48 | TheoremId::T58) {
        return Err(Error::input(format!("{theorem} is not a uniqueness theorem")));
    }
    let checker = Checker::for_function(setting, phi)?;
    let mut report = HarnessReport::new(theorem, instance);
    report.hypotheses.push(checker.check(phi, ConvexityClass::StrictlyQuasiXConvex)?);
    if !report.gate() {
        return Ok(report);
    }
    let vals = checker.values(phi)?;
    let (min, members) = solution_set(&vals, setting.tol.eps_ineq);
    let argmins: Vec<&Point> = members.iter().map(|&i| &checker.points()[i]).collect();
    report.detail("min_value", min);
    report.detail("argmins", &argmins);
    if argmins.len() != 1 {
        report.red(format!("{} sampled minimizers", argmins.len()));
    }
    Ok(report)
}

/// Cone used for domination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cone {
    /// Non-negative orthant without the origin.
    AMinusZero,
    /// Strictly positive orthant.
    APrime,
}

/// Whether `a ∈ b − cone`, with `a` in the role of `φ(t)` and `b` of `φ(r)`.
pub fn dominates(a: &[f64], b: &[f64], cone: Cone) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: b.len(),
            found: a.len(),
        });
    }
    Ok(dominates_unchecked(a, b, cone))
}

#[inline]
fn dominates_unchecked(a: &[f64], b: &[f64], cone: Cone) -> bool {
    match cone {
        Cone::AMinusZero => a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y),
        Cone::APrime => a.iter().zip(b).all(|(x, y)| x < y),
    }
}

/// `p` objectives sharing one domain.
#[derive(Debug, Clone)]
pub struct ObjectiveVector {
    pub components: Vec<ScalarFn>,
}

impl ObjectiveVector {
    pub fn new(components: Vec<ScalarFn>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::input("an objective vector needs at least one component"));
        };
        if let Some(bad) = components.iter().find(|c| c.dim() != first.dim()) {
            return Err(Error::Dimension {
                expected: first.dim(),
                found: bad.dim(),
            });
        }
        Ok(Self { components })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    fn hints(&self) -> BreakpointHints {
        let mut h = BreakpointHints::default();
        for c in &self.components {
            h.merge(&c.breakpoint_hints());
        }
        h
    }

    /// `μᵀφ` as a single function.
    pub fn scalarized(&self, mu: &[f64]) -> Result<ScalarFn> {
        crate::algebra::conic(mu, &self.components)
    }
}

/// Efficiency flags of one sampled point, at sampled scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyVerdict {
    pub r: Point,
    pub phi: Vec<f64>,
    pub global_efficient: bool,
    pub local_efficient: bool,
    pub global_weakly: bool,
    pub local_weakly: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_dominator: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_dominator: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_weak_dominator: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_weak_dominator: Option<Point>,
}

fn scan_on(points: &[Point], values: &[Vec<f64>], nu: f64) -> Vec<EfficiencyVerdict> {
    use rayon::prelude::*;
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut gd = None;
            let mut ld = None;
            let mut gw = None;
            let mut lw = None;
            for j in 0..points.len() {
                if j == i {
                    continue;
                }
                let near = dist(&points[i], &points[j]) < nu;
                if dominates_unchecked(&values[j], &values[i], Cone::AMinusZero) {
                    gd.get_or_insert(j);
                    if near {
                        ld.get_or_insert(j);
                    }
                }
                if dominates_unchecked(&values[j], &values[i], Cone::APrime) {
                    gw.get_or_insert(j);
                    if near {
                        lw.get_or_insert(j);
                    }
                }
            }
            let pt = |o: Option<usize>| o.map(|j| points[j].clone());
            EfficiencyVerdict {
                r: points[i].clone(),
                phi: values[i].clone(),
                global_efficient: gd.is_none(),
                local_efficient: ld.is_none(),
                global_weakly: gw.is_none(),
                local_weakly: lw.is_none(),
                global_dominator: pt(gd),
                local_dominator: pt(ld),
                global_weak_dominator: pt(gw),
                local_weak_dominator: pt(lw),
            }
        })
        .collect()
}

fn objective_values(checker: &Checker<'_>, phi: &ObjectiveVector) -> Result<Vec<Vec<f64>>> {
    let cols = phi
        .components
        .iter()
        .map(|c| checker.values(c))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..checker.points().len())
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect())
}

/// Domination scan over every sampled point, in sample order.
pub fn efficiency_scan(phi: &ObjectiveVector, setting: &Setting, nu: f64) -> Result<Vec<EfficiencyVerdict>> {
    check_nu(nu)?;
    let checker = Checker::new(setting, &phi.hints())?;
    let values = objective_values(&checker, phi)?;
    Ok(scan_on(checker.points(), &values, nu))
}

/// Local (weak) efficiency against global (weak) efficiency, and
/// scalarized local minima against global efficiency.
pub fn efficiency_theorem_harness(
    phi: &ObjectiveVector,
    setting: &Setting,
    nu: f64,
    theorem: TheoremId,
    mu: Option<&[f64]>,
    instance: &str,
) -> Result<HarnessReport> {
    check_nu(nu)?;
    if !matches!(
        theorem,
        TheoremId::T53 | TheoremId::T54 | TheoremId::T55 | TheoremId::T56 | TheoremId::T57
    ) {
        return Err(Error::input(format!("{theorem} is not an efficiency theorem")));
    }
    let scalarizing = matches!(theorem, TheoremId::T54 | TheoremId::T57);
    let mu = match (scalarizing, mu) {
        (true, Some(m)) => {
            if m.len() != phi.len() {
                return Err(Error::Dimension {
                    expected: phi.len(),
                    found: m.len(),
                });
            }
            if m.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || !m.iter().any(|w| *w > 0.0) {
                return Err(Error::Precondition("weights must be non-negative with at least one positive".into()));
            }
            Some(m)
        }
        (true, None) => return Err(Error::input(format!("{theorem} needs weights mu"))),
        (false, _) => None,
    };

    let checker = Checker::new(setting, &phi.hints())?;
    let mut report = HarnessReport::new(theorem, instance);
    let classifications = phi
        .components
        .iter()
        .map(|c| checker.classify(c))
        .collect::<Result<Vec<_>>>()?;
    let pick = |class: ConvexityClass| -> Vec<ClassVerdict> {
        classifications
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut v = c.verdict(class).clone();
                v.note = Some(format!("component {}", i + 1));
                v
            })
            .collect()
    };
    let needs_strict_component = matches!(theorem, TheoremId::T54 | TheoremId::T55);
    match theorem {
        TheoremId::T53 => {
            report.hypotheses.extend(pick(ConvexityClass::QuasiXConvex));
            report.hypotheses.extend(pick(ConvexityClass::SemistrictlyQuasiXConvex));
        }
        TheoremId::T54 | TheoremId::T55 => report.hypotheses.extend(pick(ConvexityClass::QuasiXConvex)),
        _ => report.hypotheses.extend(pick(ConvexityClass::SemistrictlyQuasiXConvex)),
    }
    if needs_strict_component {
        // some strictly quasi component, with positive weight when scalarizing
        let k = classifications.iter().enumerate().position(|(i, c)| {
            c.verdict(ConvexityClass::StrictlyQuasiXConvex).passed() && mu.is_none_or(|m| m[i] > 0.0)
        });
        match k {
            Some(k) => {
                let mut v = classifications[k].verdict(ConvexityClass::StrictlyQuasiXConvex).clone();
                v.note = Some(format!("component {} (strict component)", k + 1));
                report.hypotheses.push(v);
                report.detail("strict_component", k + 1);
            }
            None => {
                report.skip("no component is strictly quasi-X-convex on samples with a positive weight");
                return Ok(report);
            }
        }
    }
    if !report.gate() {
        return Ok(report);
    }

    let values = objective_values(&checker, phi)?;
    let points = checker.points();
    let scan = scan_on(points, &values, nu);
    let mut problems = Vec::new();
    match theorem {
        TheoremId::T53 | TheoremId::T55 => {
            for v in scan.iter().filter(|v| v.local_efficient && !v.global_efficient) {
                problems.push(format!("{:?} is locally but not globally efficient", v.r));
            }
        }
        TheoremId::T56 => {
            for v in scan.iter().filter(|v| v.local_weakly && !v.global_weakly) {
                problems.push(format!("{:?} is locally but not globally weakly efficient", v.r));
            }
        }
        _ => {}
    }
    report.detail("efficient_count", scan.iter().filter(|v| v.global_efficient).count());
    report.detail("weakly_efficient_count", scan.iter().filter(|v| v.global_weakly).count());

    if let Some(m) = mu {
        let scalar: Vec<f64> = values.iter().map(|v| v.iter().zip(m).map(|(a, b)| a * b).sum()).collect();
        let locals = local_minima_idx(points, &scalar, nu, false);
        report.detail("mu", m);
        report.detail("scalarized_local_minima", locals.iter().map(|&i| &points[i]).collect::<Vec<_>>());
        for &i in &locals {
            let ok = if theorem == TheoremId::T54 {
                scan[i].global_efficient
            } else {
                scan[i].global_weakly
            };
            if !ok {
                problems.push(format!(
                    "scalarized local minimum {:?} is not globally {}efficient",
                    points[i],
                    if theorem == TheoremId::T54 { "" } else { "weakly " }
                ));
            }
        }
        if m.iter().all(|w| *w > 0.0) {
            let (gi, _) = argmin(&scalar);
            let ok = scan[gi].global_efficient;
            report.detail("scalarized_global_minimizer_efficient", ok);
            if !ok {
                problems.push(format!("scalarized global minimizer {:?} is not efficient", points[gi]));
            }
        }
    }
    if !problems.is_empty() {
        report.red(problems.join("; "));
    }
    Ok(report)
}

/// Harness status counts helper for summaries.
pub fn count_status(reports: &[HarnessReport], status: HarnessStatus) -> usize {
    reports.iter().filter(|r| r.status == status).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::EscapePolicy;
    use crate::geometry::{DomainSet, SamplePlan};
    use crate::lang::{catalog, GMap};

    fn f(text: &str) -> ScalarFn {
        ScalarFn::parse(text, 1, &[]).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> SamplePlan {
        let _ = (lo, hi);
        SamplePlan {
            grid_per_axis: n,
            random_count: 0,
            delta_grid: 21,
            ..SamplePlan::default()
        }
    }

    fn setting(lo: f64, hi: f64, g: GMap, n: usize) -> Setting {
        Setting::new(DomainSet::closed_intervals(&[(lo, hi)]).unwrap(), g)
            .unwrap()
            .with_plan(grid(lo, hi, n))
    }

    #[test]
    fn global_minimum_examples() {
        let s = setting(0.0, 10.0, GMap::identity(1), 21);
        assert_eq!(global_min_search(&f("r"), &s).unwrap(), (vec![0.0], 0.0));
        let s = setting(0.0, 3.0, GMap::identity(1), 31);
        assert_eq!(global_min_search(&f("(r - 1)^2"), &s).unwrap(), (vec![1.0], 0.0));
        let s = Setting::new(
            DomainSet::closed_intervals(&[(f64::NEG_INFINITY, -3.0), (-2.0, -1.0)]).unwrap(),
            GMap::shift(1, -3.0),
        )
        .unwrap()
        .with_plan(grid(0.0, 0.0, 11));
        let phi = catalog("floor_alpha", &[("alpha", 0.5)]).unwrap().into_scalar().unwrap();
        assert_eq!(global_min_search(&phi, &s).unwrap(), (vec![-1000.0], 0.5 - 1000.0));
    }

    #[test]
    fn local_minimum_examples() {
        let s = setting(0.0, 10.0, GMap::identity(1), 21);
        assert_eq!(local_minima(&f("r"), &s, 0.6, false).unwrap(), vec![vec![0.0]]);
        let s = setting(-1.0, 1.0, GMap::identity(1), 21);
        assert_eq!(local_minima(&f("abs(r)"), &s, 0.3, true).unwrap(), vec![vec![0.0]]);
        let s = setting(-2.0, 2.0, GMap::identity(1), 41);
        let w = catalog("w_shape", &[]).unwrap().into_scalar().unwrap();
        assert_eq!(local_minima(&w, &s, 0.3, false).unwrap(), vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn ball_condition_examples() {
        let s = setting(0.0, 1.0, GMap::identity(1), 11);
        let b = check_ball_condition(&s, 2.0).unwrap();
        assert_eq!(b.max_observed, 1.0);
        assert!(b.holds_on_samples);
        assert!(!check_ball_condition(&s, 0.5).unwrap().holds_on_samples);
        let s = setting(0.0, 1.0, GMap::constant(&[0.5]), 11);
        let b = check_ball_condition(&s, 2.0).unwrap();
        assert!(b.holds_on_samples);
        assert_eq!(b.max_observed, 1.5);
    }

    #[test]
    fn domination_cones() {
        assert!(dominates(&[1.0, 2.0], &[1.0, 3.0], Cone::AMinusZero).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0], Cone::AMinusZero).unwrap());
        assert!(dominates(&[0.0, 0.0], &[1.0, 1.0], Cone::APrime).unwrap());
        assert!(!dominates(&[1.0, 0.0], &[1.0, 1.0], Cone::APrime).unwrap());
        assert!(dominates(&[1.0], &[1.0, 2.0], Cone::APrime).is_err());
    }

    #[test]
    fn efficiency_examples() {
        let s = setting(0.0, 1.0, GMap::identity(1), 11);
        let both = ObjectiveVector::new(vec![f("r"), f("1 - r")]).unwrap();
        assert!(efficiency_scan(&both, &s, 0.15).unwrap().iter().all(|v| v.global_efficient));
        let single = ObjectiveVector::new(vec![f("r")]).unwrap();
        let scan = efficiency_scan(&single, &s, 0.15).unwrap();
        let efficient: Vec<_> = scan.iter().filter(|v| v.global_efficient).map(|v| v.r.clone()).collect();
        assert_eq!(efficient, vec![vec![0.0]]);
        assert_eq!(scan[1].global_dominator, Some(vec![0.0]));
    }

    #[test]
    fn harness_examples() {
        let s = setting(0.0, 10.0, GMap::shift(1, -1.0), 21).with_escape(EscapePolicy::Extend);
        let r = local_global_harness(&f("r"), &s, 20.0, LocalGlobalMode::Xconvex, "identity").unwrap();
        assert_eq!(r.status, HarnessStatus::Pass);
        assert_eq!(r.details["argmin_count"], 1);
        let u = uniqueness_harness(&f("r"), &s, TheoremId::T48, "identity").unwrap();
        assert_eq!(u.status, HarnessStatus::Pass);
        let m = minimum_set_x_convex_harness(&f("r"), &s, TheoremId::T45MinSet, "identity").unwrap();
        assert_eq!(m.status, HarnessStatus::RedEvent);
        assert_eq!(m.conclusions[0].status, Status::DomainEscape);
        let c = uniqueness_harness(&f("3"), &s, TheoremId::T58, "const").unwrap();
        assert_eq!(c.status, HarnessStatus::Skipped);
        let tight = local_global_harness(&f("r"), &s, 0.5, LocalGlobalMode::Xconvex, "tight").unwrap();
        assert_eq!(tight.status, HarnessStatus::Skipped);
    }

    #[test]
    fn scalarization_harness() {
        let s = setting(-1.0, 2.0, GMap::identity(1), 31);
        let phi = ObjectiveVector::new(vec![f("r^2"), f("(r - 1)^2")]).unwrap();
        let r = efficiency_theorem_harness(&phi, &s, 0.2, TheoremId::T54, Some(&[0.5, 0.5]), "pareto").unwrap();
        assert_eq!(r.status, HarnessStatus::Pass);
        assert_eq!(r.details["scalarized_local_minima"], serde_json::json!([[0.5]]));
        assert!(efficiency_theorem_harness(&phi, &s, 0.2, TheoremId::T54, None, "pareto").is_err());
    }
}
