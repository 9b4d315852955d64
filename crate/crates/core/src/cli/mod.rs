//! Problem files, task dispatch, reports and the built-in example corpus.

mod corpus;
mod emit;
mod verify;

pub use corpus::{corpus_cases, run_corpus, run_suite, suite_problems, Claim, CorpusCase, CorpusRow, Expectation};
pub use emit::{emit, to_csv, to_json, Format};
pub use verify::{verify_report, WitnessCheck};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{theorem_closure_harness, ClosureInput, OuterFn};
use crate::checker::{Checker, Classification, ClassVerdict, ConvexityClass, EscapePolicy, Setting, Status, Tolerances};
use crate::error::{Error, Result};
use crate::geometry::{BreakpointHints, DomainSet, Point, SamplePlan};
use crate::harness::{HarnessReport, HarnessStatus, TheoremId};
use crate::lang::{self, catalog, GMap, ScalarFn};
use crate::optimize::{
    check_ball_condition, efficiency_scan, efficiency_theorem_harness, global_min_search, local_global_harness,
    local_minima, minimum_set_x_convex_harness, uniqueness_harness, BallCondition, EfficiencyVerdict, LocalGlobalMode,
    ObjectiveVector,
};
use crate::sets::{
    check_epigraph_x_convex, check_levelsets, epigraph_theorem_harness, levelset_theorem_harness,
    quasi_iff_levelsets_harness,
};

/// Exit code for a clean run.
pub const EXIT_OK: i32 = 0;
/// Exit code when a check is falsified or a harness raises a red event.
pub const EXIT_FALSIFIED: i32 = 1;
/// Exit code for unreadable or invalid input.
pub const EXIT_INPUT: i32 = 2;

pub type Params = BTreeMap<String, f64>;

/// A function given inline, with its own parameters, or from the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Expr(String),
    Full(FullSpec),
    Catalog(CatalogSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullSpec {
    pub expr: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSpec {
    pub catalog: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: Params,
}

/// Outer function for composition theorems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSpec {
    pub expr: String,
    #[serde(default)]
    pub monotone_nondecreasing: bool,
    #[serde(default)]
    pub convex: bool,
}

/// One unit of work in a problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    CheckSet,
    Classify {
        function: String,
        /// Classes whose failure sets the exit code; the convex five by default.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        targets: Option<Vec<ConvexityClass>>,
    },
    Levelsets {
        function: String,
        /// Defaults to every distinct sampled value.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        etas: Option<Vec<f64>>,
    },
    Epigraph {
        function: String,
    },
    Optimize {
        function: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<f64>,
        #[serde(default)]
        strict: bool,
    },
    Pareto {
        functions: Vec<String>,
        nu: f64,
    },
    Harness(HarnessTask),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessTask {
    pub theorem: TheoremId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etas: Option<Vec<f64>>,
    /// Label in the report; the theorem and function names by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
}

/// A complete problem: domain, map, functions, sampling and tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub domain: DomainSet,
    pub g: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: Params,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub plan: SamplePlan,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub escape: EscapePolicy,
    #[serde(default)]
    pub refine: bool,
    pub tasks: Vec<Task>,
}

fn bound_params<'a>(expr: &lang::Expr, params: &'a Params) -> Vec<(&'a str, f64)> {
    let free = expr.free_params();
    params
        .iter()
        .filter(|(k, _)| free.contains(k))
        .map(|(k, v)| (k.as_str(), *v))
        .collect()
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: ProblemFile = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn map(&self) -> Result<GMap> {
        let dim = self.g.len();
        let mut comps = Vec::with_capacity(dim);
        let mut params = Params::new();
        for text in &self.g {
            let e = lang::parse(text, dim)?;
            for (k, v) in bound_params(&e, &self.params) {
                params.insert(k.to_string(), v);
            }
            comps.push(e);
        }
        GMap::new(comps, params)
    }

    pub fn setting(&self) -> Result<Setting> {
        Ok(Setting::new(self.domain.clone(), self.map()?)?
            .with_plan(self.plan.clone())
            .with_tol(self.tolerances)
            .with_escape(self.escape)
            .with_refine(self.refine))
    }

    pub fn function(&self, name: &str) -> Result<ScalarFn> {
        let spec = self
            .functions
            .get(name)
            .ok_or_else(|| Error::input(format!("unknown function {name:?}")))?;
        let dim = self.dim();
        let mut merged = self.params.clone();
        let (text, local, fdim) = match spec {
            FunctionSpec::Expr(text) => (text, None, dim),
            FunctionSpec::Full(f) => (&f.expr, Some(&f.params), f.dim.unwrap_or(dim)),
            FunctionSpec::Catalog(c) => {
                merged.extend(c.params.clone());
                let pairs: Vec<(&str, f64)> = merged.iter().map(|(k, v)| (k.as_str(), *v)).collect();
                let f = catalog(&c.catalog, &pairs)?.into_scalar()?;
                let f = ScalarFn::new(f.dim(), f.body().clone(), bound_params(f.body(), &merged).into_iter().map(|(k, v)| (k.to_string(), v)).collect())?;
                return self.same_dim(f);
            }
        };
        if let Some(local) = local {
            merged.extend(local.clone());
        }
        let body = lang::parse(text, fdim)?;
        let pairs = bound_params(&body, &merged);
        self.same_dim(ScalarFn::new(fdim, body, pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())?)
    }

    fn same_dim(&self, f: ScalarFn) -> Result<ScalarFn> {
        if f.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: f.dim(),
            });
        }
        Ok(f)
    }

    /// Parses every expression and checks names, dimensions and task fields.
    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::input("a problem needs at least one task"));
        }
        if self.g.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: self.g.len(),
            });
        }
        self.setting()?;
        self.plan.validate()?;
        self.tolerances.validate()?;
        for name in self.functions.keys() {
            self.function(name)?;
        }
        for task in &self.tasks {
            for name in task.function_names() {
                if !self.functions.contains_key(name) {
                    return Err(Error::input(format!("task refers to unknown function {name:?}")));
                }
            }
            if let Task::Harness(h) = task {
                h.validate()?;
            }
            if let Task::Pareto { functions, .. } = task {
                if functions.is_empty() {
                    return Err(Error::input("pareto needs at least one function"));
                }
            }
        }
        Ok(())
    }
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::CheckSet => "check-set",
            Task::Classify { .. } => "classify",
            Task::Levelsets { .. } => "levelsets",
            Task::Epigraph { .. } => "epigraph",
            Task::Optimize { .. } => "optimize",
            Task::Pareto { .. } => "pareto",
            Task::Harness(_) => "harness",
        }
    }

    pub fn function_names(&self) -> Vec<&str> {
        match self {
            Task::CheckSet => vec![],
            Task::Classify { function, .. }
            | Task::Levelsets { function, .. }
            | Task::Epigraph { function }
            | Task::Optimize { function, .. } => vec![function.as_str()],
            Task::Pareto { functions, .. } => functions.iter().map(String::as_str).collect(),
            Task::Harness(h) => h.function.iter().chain(&h.functions).map(String::as_str).collect(),
        }
    }
}

impl HarnessTask {
    fn single(&self) -> Result<&str> {
        match (&self.function, self.functions.as_slice()) {
            (Some(f), []) => Ok(f),
            (None, [f]) => Ok(f),
            _ => Err(Error::input(format!("{} needs exactly one function", self.theorem))),
        }
    }

    fn all(&self) -> Vec<&str> {
        self.function.iter().chain(&self.functions).map(String::as_str).collect()
    }

    fn validate(&self) -> Result<()> {
        use TheoremId::*;
        match self.theorem {
            T42 | T49 => {
                self.single()?;
                if self.theta.is_none() {
                    return Err(Error::input(format!("{} needs an outer function theta", self.theorem)));
                }
            }
            T43a => {
                if self.all().len() != 2 {
                    return Err(Error::input("t43a needs two functions"));
                }
            }
            T43b => {
                self.single()?;
                if self.alpha.is_none() {
                    return Err(Error::input("t43b needs alpha"));
                }
            }
            T43c => {
                if self.all().is_empty() || self.coeffs.len() != self.all().len() {
                    return Err(Error::input("t43c needs one coefficient per function"));
                }
            }
            T45 | T47 | T410 => {
                self.single()?;
                if self.nu.is_none() {
                    return Err(Error::input(format!("{} needs nu", self.theorem)));
                }
            }
            T53 | T54 | T55 | T56 | T57 => {
                if self.all().is_empty() || self.nu.is_none() {
                    return Err(Error::input(format!("{} needs functions and nu", self.theorem)));
                }
            }
            T41 | T44 | T45MinSet | T46 | T48 | T58 | T59 => {
                self.single()?;
            }
        }
        Ok(())
    }

    fn instance_label(&self) -> String {
        self.instance
            .clone()
            .unwrap_or_else(|| format!("{}:{}", self.theorem, self.all().join("+")))
    }

    /// The closure input for composition, sum, scaling and conic theorems.
    pub fn closure_input(&self, problem: &ProblemFile) -> Result<Option<ClosureInput>> {
        use TheoremId::*;
        let fns = self.all().into_iter().map(|n| problem.function(n)).collect::<Result<Vec<_>>>()?;
        Ok(match self.theorem {
            T42 | T49 => {
                let spec = self.theta.as_ref().ok_or_else(|| Error::input("missing theta"))?;
                let body = lang::parse(&spec.expr, 1)?;
                let theta = ScalarFn::new(
                    1,
                    body.clone(),
                    bound_params(&body, &problem.params).into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                )?;
                Some(ClosureInput::Compose {
                    theta: OuterFn::new(theta, spec.monotone_nondecreasing, spec.convex)?,
                    phi: fns[0].clone(),
                })
            }
            T43a => Some(ClosureInput::Sum(fns[0].clone(), fns[1].clone())),
            T43b => Some(ClosureInput::Scale(self.alpha.unwrap_or(1.0), fns[0].clone())),
            T43c => Some(ClosureInput::Conic(self.coeffs.clone(), fns)),
            _ => None,
        })
    }
}

/// Result of one task.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum TaskReport {
    CheckSet {
        verdict: ClassVerdict,
    },
    Classify {
        function: String,
        expr: String,
        targets: Vec<ConvexityClass>,
        classification: Classification,
    },
    Levelsets {
        function: String,
        expr: String,
        verdicts: Vec<ClassVerdict>,
    },
    Epigraph {
        function: String,
        expr: String,
        verdict: ClassVerdict,
    },
    Optimize {
        function: String,
        expr: String,
        global_min: MinPoint,
        #[serde(skip_serializing_if = "Option::is_none")]
        local_minima: Option<Vec<Point>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        ball_condition: Option<BallCondition>,
    },
    Pareto {
        functions: Vec<String>,
        nu: f64,
        points: Vec<EfficiencyVerdict>,
    },
    Harness {
        report: HarnessReport,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinPoint {
    pub point: Point,
    pub value: f64,
}

impl TaskReport {
    /// Whether this task should make the run exit with [`EXIT_FALSIFIED`].
    pub fn is_failure(&self) -> bool {
        match self {
            TaskReport::CheckSet { verdict } | TaskReport::Epigraph { verdict, .. } => !verdict.passed(),
            TaskReport::Classify {
                targets, classification, ..
            } => targets.iter().any(|c| !classification.verdict(*c).passed()),
            TaskReport::Levelsets { verdicts, .. } => verdicts.iter().any(|v| !v.passed()),
            TaskReport::Optimize { .. } | TaskReport::Pareto { .. } => false,
            TaskReport::Harness { report } => report.red_event,
        }
    }
}

/// Reports of one problem under one id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub id: String,
    pub problem: ProblemFile,
    pub tasks: Vec<TaskReport>,
}

/// Document written by `run` and `corpus`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub cases: Vec<CaseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusTable>,
    pub exit_code: i32,
}

/// Claim-by-claim agreement table of a corpus run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusTable {
    pub rows: Vec<CorpusRow>,
    pub agree: usize,
    pub disagree: usize,
}

/// Runs every task of `problem` in order.
pub fn run_case(id: &str, problem: &ProblemFile) -> Result<CaseReport> {
    problem.validate()?;
    let setting = problem.setting()?;
    let mut tasks = Vec::with_capacity(problem.tasks.len());
    for task in &problem.tasks {
        tasks.push(run_task(problem, &setting, task)?);
    }
    Ok(CaseReport {
        id: id.to_string(),
        problem: problem.clone(),
        tasks,
    })
}

/// Runs a problem and derives the exit code.
pub fn run(id: &str, problem: &ProblemFile) -> Result<Report> {
    let case = run_case(id, problem)?;
    let exit_code = if case.tasks.iter().any(TaskReport::is_failure) {
        EXIT_FALSIFIED
    } else {
        EXIT_OK
    };
    Ok(Report {
        cases: vec![case],
        corpus: None,
        exit_code,
    })
}

fn run_task(problem: &ProblemFile, setting: &Setting, task: &Task) -> Result<TaskReport> {
    Ok(match task {
        Task::CheckSet => TaskReport::CheckSet {
            verdict: Checker::new(setting, &BreakpointHints::default())?.check_set()?,
        },
        Task::Classify { function, targets } => {
            let phi = problem.function(function)?;
            let classification = Checker::for_function(setting, &phi)?.classify(&phi)?;
            TaskReport::Classify {
                function: function.clone(),
                expr: phi.to_string(),
                targets: targets.clone().unwrap_or_else(|| ConvexityClass::CONVEX_CLASSES.to_vec()),
                classification,
            }
        }
        Task::Levelsets { function, etas } => {
            let phi = problem.function(function)?;
            let checker = Checker::for_function(setting, &phi)?;
            let etas = match etas {
                Some(e) if e.is_empty() => return Err(Error::input("eta list must not be empty")),
                Some(e) => e.clone(),
                None => {
                    let mut v = checker.values(&phi)?;
                    v.sort_by(f64::total_cmp);
                    v.dedup();
                    v
                }
            };
            TaskReport::Levelsets {
                function: function.clone(),
                expr: phi.to_string(),
                verdicts: check_levelsets(&checker, &phi, &etas)?,
            }
        }
        Task::Epigraph { function } => {
            let phi = problem.function(function)?;
            TaskReport::Epigraph {
                function: function.clone(),
                expr: phi.to_string(),
                verdict: check_epigraph_x_convex(&phi, setting)?,
            }
        }
        Task::Optimize { function, nu, strict } => {
            let phi = problem.function(function)?;
            let (point, value) = global_min_search(&phi, setting)?;
            let (local_minima, ball_condition) = match nu {
                Some(nu) => (
                    Some(local_minima(&phi, setting, *nu, *strict)?),
                    Some(check_ball_condition(setting, *nu)?),
                ),
                None => (None, None),
            };
            TaskReport::Optimize {
                function: function.clone(),
                expr: phi.to_string(),
                global_min: MinPoint { point, value },
                local_minima,
                ball_condition,
            }
        }
        Task::Pareto { functions, nu } => {
            let phis = functions.iter().map(|f| problem.function(f)).collect::<Result<Vec<_>>>()?;
            TaskReport::Pareto {
                functions: functions.clone(),
                nu: *nu,
                points: efficiency_scan(&ObjectiveVector::new(phis)?, setting, *nu)?,
            }
        }
        Task::Harness(h) => TaskReport::Harness {
            report: run_harness(problem, setting, h)?,
        },
    })
}

fn run_harness(problem: &ProblemFile, setting: &Setting, h: &HarnessTask) -> Result<HarnessReport> {
    use TheoremId::*;
    let label = h.instance_label();
    if let Some(input) = h.closure_input(problem)? {
        return theorem_closure_harness(&input, setting, h.theorem, &label);
    }
    match h.theorem {
        T41 => epigraph_theorem_harness(&problem.function(h.single()?)?, setting, &label),
        T44 => levelset_theorem_harness(&problem.function(h.single()?)?, setting, h.etas.as_deref(), &label),
        T46 => quasi_iff_levelsets_harness(&problem.function(h.single()?)?, setting, h.etas.as_deref(), &label),
        T45 | T47 | T410 => {
            let mode = LocalGlobalMode::for_theorem(h.theorem).expect("local-global theorem");
            let nu = h.nu.ok_or_else(|| Error::input("missing nu"))?;
            local_global_harness(&problem.function(h.single()?)?, setting, nu, mode, &label)
        }
        T45MinSet | T59 => minimum_set_x_convex_harness(&problem.function(h.single()?)?, setting, h.theorem, &label),
        T48 | T58 => uniqueness_harness(&problem.function(h.single()?)?, setting, h.theorem, &label),
        T53 | T54 | T55 | T56 | T57 => {
            let phis = h.all().into_iter().map(|n| problem.function(n)).collect::<Result<Vec<_>>>()?;
            let nu = h.nu.ok_or_else(|| Error::input("missing nu"))?;
            efficiency_theorem_harness(&ObjectiveVector::new(phis)?, setting, nu, h.theorem, h.mu.as_deref(), &label)
        }
        T42 | T43a | T43b | T43c | T49 => unreachable!("closure theorems are handled above"),
    }
}

/// Harness reports of every case, in order.
pub fn harness_reports(report: &Report) -> impl Iterator<Item = &HarnessReport> {
    report.cases.iter().flat_map(|c| &c.tasks).filter_map(|t| match t {
        TaskReport::Harness { report } => Some(report),
        _ => None,
    })
}

/// Number of harness reports with the given status.
pub fn count_harness(report: &Report, status: HarnessStatus) -> usize {
    harness_reports(report).filter(|r| r.status == status).count()
}

/// Whether a verdict status counts as a failure of the class.
pub fn is_failure_status(status: Status) -> bool {
    status != Status::NoCounterexampleFound
}
