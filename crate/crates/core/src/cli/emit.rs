use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Report, TaskReport};
use crate::checker::ClassVerdict;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Canonical pretty JSON with a trailing newline.
pub fn to_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn point(p: &[f64]) -> String {
    p.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

const RUN_HEADER: [&str; 18] = [
    "case",
    "task",
    "function",
    "role",
    "class",
    "eta",
    "status",
    "triples_checked",
    "max_gap",
    "escapes",
    "r",
    "t",
    "delta",
    "combo",
    "lhs",
    "rhs",
    "gap",
    "note",
];

fn verdict_row(case: &str, task: &str, function: &str, role: &str, v: &ClassVerdict, note: &str) -> Vec<String> {
    let w = v.witness.as_ref();
    let note = match (&v.note, note.is_empty()) {
        (Some(n), true) => n.clone(),
        (Some(n), false) => format!("{note}; {n}"),
        (None, _) => note.to_string(),
    };
    vec![
        case.into(),
        task.into(),
        function.into(),
        role.into(),
        v.class.name().into(),
        opt_num(v.eta),
        v.status.name().into(),
        v.triples_checked.to_string(),
        opt_num(v.max_gap),
        v.escapes.to_string(),
        w.map(|w| point(&w.r)).unwrap_or_default(),
        w.map(|w| point(&w.t)).unwrap_or_default(),
        opt_num(w.map(|w| w.delta)),
        w.map(|w| point(&w.combo)).unwrap_or_default(),
        opt_num(w.map(|w| w.lhs)),
        opt_num(w.map(|w| w.rhs)),
        opt_num(w.map(|w| w.gap)),
        note,
    ]
}

fn info_row(case: &str, task: &str, function: &str, role: &str, note: String) -> Vec<String> {
    let mut row = vec![String::new(); RUN_HEADER.len()];
    row[0] = case.into();
    row[1] = task.into();
    row[2] = function.into();
    row[3] = role.into();
    row[17] = note;
    row
}

/// One row per verdict; classify tasks give the ten function classes.
pub fn to_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(table) = &report.corpus {
        w.write_record(["case", "claim", "expected", "observed", "agreement", "note"])?;
        for r in &table.rows {
            w.write_record([&r.case, &r.claim, &r.expected, &r.observed, r.agreement.as_str(), &r.note])?;
        }
        return finish(w);
    }
    w.write_record(RUN_HEADER)?;
    for case in &report.cases {
        let id = case.id.as_str();
        for task in &case.tasks {
            match task {
                TaskReport::CheckSet { verdict } => w.write_record(verdict_row(id, "check-set", "", "set", verdict, ""))?,
                TaskReport::Classify {
                    function, classification, ..
                } => {
                    for v in &classification.verdicts {
                        w.write_record(verdict_row(id, "classify", function, "verdict", v, ""))?;
                    }
                }
                TaskReport::Levelsets { function, verdicts, .. } => {
                    for v in verdicts {
                        w.write_record(verdict_row(id, "levelsets", function, "level_set", v, ""))?;
                    }
                }
                TaskReport::Epigraph { function, verdict, .. } => {
                    w.write_record(verdict_row(id, "epigraph", function, "epigraph", verdict, ""))?
                }
                TaskReport::Optimize {
                    function,
                    global_min,
                    local_minima,
                    ball_condition,
                    ..
                } => {
                    let mut note = format!("global min {} at [{}]", num(global_min.value), point(&global_min.point));
                    if let Some(l) = local_minima {
                        let pts: Vec<String> = l.iter().map(|p| format!("[{}]", point(p))).collect();
                        note.push_str(&format!("; local minima {}", pts.join(" ")));
                    }
                    if let Some(b) = ball_condition {
                        note.push_str(&format!(
                            "; ball condition max {} nu {} holds {}",
                            num(b.max_observed),
                            num(b.nu),
                            b.holds_on_samples
                        ));
                    }
                    w.write_record(info_row(id, "optimize", function, "minimum", note))?;
                }
                TaskReport::Pareto { functions, points, .. } => {
                    let name = functions.join("+");
                    for p in points {
                        let note = format!(
                            "phi [{}] global_efficient {} local_efficient {} global_weakly {} local_weakly {}",
                            point(&p.phi),
                            p.global_efficient,
                            p.local_efficient,
                            p.global_weakly,
                            p.local_weakly
                        );
                        let mut row = info_row(id, "pareto", &name, "efficiency", note);
                        row[10] = point(&p.r);
                        w.write_record(row)?;
                    }
                }
                TaskReport::Harness { report } => {
                    let task = format!("harness:{}", report.theorem);
                    let status = serde_json::to_value(report.status)?;
                    let note = format!("{} {}", report.instance, status.as_str().unwrap_or_default());
                    for v in &report.hypotheses {
                        w.write_record(verdict_row(id, &task, "", "hypothesis", v, &note))?;
                    }
                    for v in &report.conclusions {
                        w.write_record(verdict_row(id, &task, "", "conclusion", v, &note))?;
                    }
                    if report.hypotheses.is_empty() && report.conclusions.is_empty() {
                        w.write_record(info_row(id, &task, "", "summary", note))?;
                    }
                }
            }
        }
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Writes the report to `path`, or standard output when `path` is `None`.
pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Json => to_json(report)?,
        Format::Csv => to_csv(report)?,
    };
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}
