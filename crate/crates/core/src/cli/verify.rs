use serde::Serialize;
use serde_json::Value;

use super::{ProblemFile, Task};
use crate::checker::{verify_witness, ClassVerdict, ConvexityClass, Setting, Status};
use crate::error::{Error, Result};
use crate::harness::TheoremId;
use crate::lang::ScalarFn;
use crate::optimize::verify_min_set_witness;
use crate::sets::{verify_epigraph_witness, verify_levelset_witness};

/// Outcome of re-checking one recorded witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessCheck {
    pub task: usize,
    pub location: String,
    pub class: ConvexityClass,
    pub status: Status,
    pub verified: bool,
}

enum Kind<'a> {
    /// A class inequality for one of these functions.
    Function(Vec<ScalarFn>),
    LevelSet(&'a ScalarFn),
    Epigraph(&'a ScalarFn),
    MinSet(&'a ScalarFn),
}

fn verdicts(v: &Value) -> Result<Vec<ClassVerdict>> {
    match v {
        Value::Array(items) => items.iter().map(|x| Ok(serde_json::from_value(x.clone())?)).collect(),
        Value::Null => Ok(Vec::new()),
        other => Ok(vec![serde_json::from_value(other.clone())?]),
    }
}

fn check_one(setting: &Setting, kind: &Kind<'_>, v: &ClassVerdict) -> Result<Option<bool>> {
    let Some(w) = v.witness.as_ref().filter(|_| v.status != Status::NoCounterexampleFound) else {
        return Ok(None);
    };
    let ok = match kind {
        Kind::Function(fns) => {
            let mut any = false;
            for f in fns {
                if verify_witness(f, setting, v.class, w)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Kind::LevelSet(f) => match v.eta {
            Some(eta) => verify_levelset_witness(f, setting, eta, w)?,
            None => false,
        },
        Kind::Epigraph(f) => verify_epigraph_witness(f, setting, w)?,
        Kind::MinSet(f) => match v.eta {
            Some(min) => verify_min_set_witness(f, setting, min, w)?,
            None => false,
        },
    };
    Ok(Some(ok))
}

/// Re-checks every falsifying witness recorded for case `case_id` in a
/// report produced by `run` or `corpus`.
pub fn verify_report(report: &Value, case_id: &str) -> Result<Vec<WitnessCheck>> {
    let case = report["cases"]
        .as_array()
        .and_then(|cs| cs.iter().find(|c| c["id"] == case_id))
        .ok_or_else(|| Error::input(format!("no case {case_id:?} in the report")))?;
    let problem: ProblemFile = serde_json::from_value(case["problem"].clone())?;
    problem.validate()?;
    let setting = problem.setting()?;
    let tasks = case["tasks"].as_array().ok_or_else(|| Error::input("case has no task list"))?;
    if tasks.len() != problem.tasks.len() {
        return Err(Error::input("task list does not match the embedded problem"));
    }
    let zero = ScalarFn::parse("0", problem.dim(), &[])?;

    let mut out = Vec::new();
    for (i, (value, task)) in tasks.iter().zip(&problem.tasks).enumerate() {
        let mut groups: Vec<(String, Kind<'_>, Vec<ClassVerdict>)> = Vec::new();
        let owned: Vec<ScalarFn> = task
            .function_names()
            .into_iter()
            .map(|n| problem.function(n))
            .collect::<Result<_>>()?;
        match task {
            Task::CheckSet => groups.push(("set".into(), Kind::Function(vec![zero.clone()]), verdicts(&value["verdict"])?)),
            Task::Classify { .. } => {
                groups.push(("set".into(), Kind::Function(vec![zero.clone()]), verdicts(&value["classification"]["set"])?));
                groups.push((
                    "verdicts".into(),
                    Kind::Function(owned.clone()),
                    verdicts(&value["classification"]["verdicts"])?,
                ));
            }
            Task::Levelsets { .. } => groups.push(("level_sets".into(), Kind::LevelSet(&owned[0]), verdicts(&value["verdicts"])?)),
            Task::Epigraph { .. } => groups.push(("epigraph".into(), Kind::Epigraph(&owned[0]), verdicts(&value["verdict"])?)),
            Task::Optimize { .. } | Task::Pareto { .. } => {}
            Task::Harness(h) => {
                let report = &value["report"];
                let mut candidates = owned.clone();
                let closure = h.closure_input(&problem)?;
                if let Some(c) = &closure {
                    candidates.push(c.composite()?);
                }
                groups.push(("hypotheses".into(), Kind::Function(candidates.clone()), verdicts(&report["hypotheses"])?));
                let conclusions = verdicts(&report["conclusions"])?;
                let kind = match h.theorem {
                    TheoremId::T41 => Kind::Epigraph(&owned[0]),
                    TheoremId::T44 | TheoremId::T46 => Kind::LevelSet(&owned[0]),
                    TheoremId::T45MinSet | TheoremId::T59 => Kind::MinSet(&owned[0]),
                    _ => Kind::Function(candidates),
                };
                groups.push(("conclusions".into(), kind, conclusions));
            }
        }
        for (location, kind, vs) in &groups {
            for (k, v) in vs.iter().enumerate() {
                if let Some(verified) = check_one(&setting, kind, v)? {
                    out.push(WitnessCheck {
                        task: i,
                        location: format!("{location}[{k}]"),
                        class: v.class,
                        status: v.status,
                        verified,
                    });
                }
            }
        }
    }
    Ok(out)
}
