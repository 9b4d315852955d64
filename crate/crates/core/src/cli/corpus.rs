use serde::{Deserialize, Serialize};

use super::{run_case, CorpusTable, ProblemFile, Report, TaskReport, EXIT_FALSIFIED, EXIT_OK};
use crate::checker::{evaluate_triple, verify_witness, ClassVerdict, ConvexityClass, Status};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::lang::ScalarFn;

/// What the source statement asserts about a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Holds,
    Fails,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub class: ConvexityClass,
    pub expected: Expectation,
}

/// A specific triple asserted to violate a class inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedWitness {
    pub class: ConvexityClass,
    pub r: Point,
    pub t: Point,
    pub delta: f64,
}

/// A worked example with its claims, run through the checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusCase {
    pub id: String,
    pub statement: String,
    /// Name of the function the claims are about.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    pub problem: ProblemFile,
    /// How the source notation was interpreted, repeated on every row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reading: Option<String>,
    pub claims: Vec<Claim>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub published_witnesses: Vec<PublishedWitness>,
}

/// One line of the agreement table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusRow {
    pub case: String,
    pub claim: String,
    pub expected: String,
    pub observed: String,
    pub agreement: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_verified: Option<bool>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

const CORPUS: &[&str] = &[
    include_str!("../../problems/corpus/set_1_2_3_inf.json"),
    include_str!("../../problems/corpus/set_1_2_3_inf_identity.json"),
    include_str!("../../problems/corpus/const_c.json"),
    include_str!("../../problems/corpus/identity_shift.json"),
    include_str!("../../problems/corpus/floor_quasi.json"),
    include_str!("../../problems/corpus/floor_quasi_not_x.json"),
    include_str!("../../problems/corpus/piecewise_3_2.json"),
    include_str!("../../problems/corpus/piecewise_2_1.json"),
];

const SUITE: &[(&str, &str)] = &[
    ("const_set", include_str!("../../problems/harness/const_set.json")),
    ("identity_shift", include_str!("../../problems/harness/identity_shift.json")),
    ("floor_quasi", include_str!("../../problems/harness/floor_quasi.json")),
    ("piecewise_3_2", include_str!("../../problems/harness/piecewise_3_2.json")),
    ("piecewise_2_1", include_str!("../../problems/harness/piecewise_2_1.json")),
    ("square_shift", include_str!("../../problems/harness/square_shift.json")),
    ("pareto_linear", include_str!("../../problems/harness/pareto_linear.json")),
    ("pareto_quadratic", include_str!("../../problems/harness/pareto_quadratic.json")),
];

/// The built-in example corpus.
pub fn corpus_cases() -> Result<Vec<CorpusCase>> {
    let cases: Vec<CorpusCase> = CORPUS
        .iter()
        .map(|text| serde_json::from_str::<CorpusCase>(text).map_err(Error::from))
        .collect::<Result<_>>()?;
    for (i, c) in cases.iter().enumerate() {
        c.problem.validate()?;
        if cases[..i].iter().any(|d| d.id == c.id) {
            return Err(Error::input(format!("duplicate corpus id {:?}", c.id)));
        }
    }
    Ok(cases)
}

/// The built-in theorem-harness problems.
pub fn suite_problems() -> Result<Vec<(String, ProblemFile)>> {
    SUITE
        .iter()
        .map(|(id, text)| Ok((id.to_string(), ProblemFile::from_json(text)?)))
        .collect()
}

fn with_seed(mut problem: ProblemFile, seed: Option<u64>) -> ProblemFile {
    if let Some(s) = seed {
        problem.plan.seed = s;
    }
    problem
}

/// Runs every harness problem; red events set exit code 1.
pub fn run_suite(seed: Option<u64>) -> Result<Report> {
    let mut cases = Vec::new();
    for (id, problem) in suite_problems()? {
        cases.push(run_case(&id, &with_seed(problem, seed))?);
    }
    let exit_code = if cases.iter().flat_map(|c| &c.tasks).any(TaskReport::is_failure) {
        EXIT_FALSIFIED
    } else {
        EXIT_OK
    };
    Ok(Report {
        cases,
        corpus: None,
        exit_code,
    })
}

fn find_verdict(tasks: &[TaskReport], class: ConvexityClass) -> Option<&ClassVerdict> {
    tasks.iter().find_map(|t| match t {
        TaskReport::CheckSet { verdict } if class == ConvexityClass::XConvexSet => Some(verdict),
        TaskReport::Classify { classification, .. } => Some(classification.verdict(class)),
        _ => None,
    })
}

fn expectation_name(e: Expectation) -> &'static str {
    match e {
        Expectation::Holds => "holds",
        Expectation::Fails => "fails",
    }
}

fn agreement(ok: bool) -> String {
    if ok { "AGREE" } else { "DISAGREE" }.to_string()
}

/// Runs every corpus case and tabulates agreement with its claims.
///
/// Disagreements are rows, not errors; the exit code is 0 unless the
/// corpus itself cannot be run.
pub fn run_corpus(seed: Option<u64>) -> Result<Report> {
    let mut cases = Vec::new();
    let mut rows = Vec::new();
    for case in corpus_cases()? {
        let problem = with_seed(case.problem.clone(), seed);
        let setting = problem.setting()?;
        let report = run_case(&case.id, &problem)?;
        let phi = match &case.function {
            Some(name) => Some(problem.function(name)?),
            None => None,
        };

        for claim in &case.claims {
            let verdict = find_verdict(&report.tasks, claim.class)
                .ok_or_else(|| Error::input(format!("case {} has no task for {}", case.id, claim.class)))?;
            let observed = verdict.status;
            let holds = observed == Status::NoCounterexampleFound;
            let mut note = String::new();
            let mut witness_verified = None;
            if let Some(w) = &verdict.witness {
                let verified = if claim.class == ConvexityClass::XConvexSet {
                    verify_witness(&ScalarFn::parse("0", problem.dim(), &[])?, &setting, claim.class, w)?
                } else {
                    match &phi {
                        Some(f) => verify_witness(f, &setting, claim.class, w)?,
                        None => false,
                    }
                };
                witness_verified = Some(verified);
                note = format!(
                    "witness r={:?} t={:?} delta={} gap={}",
                    w.r, w.t, w.delta, w.gap
                );
            }
            if let Some(r) = &case.reading {
                note = if note.is_empty() { r.clone() } else { format!("{r}; {note}") };
            }
            rows.push(CorpusRow {
                case: case.id.clone(),
                claim: claim.class.name().to_string(),
                expected: expectation_name(claim.expected).to_string(),
                observed: observed.name().to_string(),
                agreement: agreement(holds == (claim.expected == Expectation::Holds)),
                witness_verified,
                note,
            });
        }

        for pw in &case.published_witnesses {
            let phi = phi
                .as_ref()
                .ok_or_else(|| Error::input(format!("case {} needs a function for its witness", case.id)))?;
            let w = evaluate_triple(phi, &setting, pw.class, &pw.r, &pw.t, pw.delta)?;
            let threshold = if pw.class.is_strict() {
                -setting.tol.eps_strict
            } else {
                setting.tol.eps_ineq
            };
            let violates = w.gap > threshold;
            rows.push(CorpusRow {
                case: case.id.clone(),
                claim: format!("{} witness r={:?} t={:?} delta={}", pw.class.name(), pw.r, pw.t, pw.delta),
                expected: "violates".to_string(),
                observed: if violates { "violates" } else { "does not violate" }.to_string(),
                agreement: agreement(violates),
                witness_verified: None,
                note: [case.reading.clone(), Some(format!("combo={:?} lhs={} rhs={} gap={}", w.combo, w.lhs, w.rhs, w.gap))]
                    .into_iter()
                    .flatten()
                    .collect::<Vec<_>>()
                    .join("; "),
            });
        }
        cases.push(report);
    }
    let agree = rows.iter().filter(|r| r.agreement == "AGREE").count();
    let disagree = rows.len() - agree;
    Ok(Report {
        cases,
        corpus: Some(CorpusTable { rows, agree, disagree }),
        exit_code: EXIT_OK,
    })
}
