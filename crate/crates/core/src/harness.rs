//! Shared report type for theorem harnesses.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::checker::ClassVerdict;

/// Which statement a harness exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    /// Epigraph of an X-convex function is X-convex.
    T41,
    /// Increasing convex outer function preserves X-convexity.
    T42,
    T43a,
    T43b,
    T43c,
    /// Lower level sets of an X-convex function are X-convex.
    T44,
    /// Local minima are global under the ball condition.
    T45,
    /// The minimum set of an X-convex function is X-convex.
    T45MinSet,
    /// Quasi-X-convexity iff all lower level sets are X-convex.
    T46,
    /// Strict local minima of quasi-X-convex functions are strict global minima.
    T47,
    /// Strictly quasi-X-convex functions have at most one minimizer.
    T48,
    /// Non-decreasing convex outer function preserves quasi-X-convexity.
    T49,
    /// Local minima of semistrictly quasi-X-convex functions are global.
    T410,
    T53,
    T54,
    T55,
    T56,
    T57,
    T58,
    T59,
}

impl TheoremId {
    pub fn name(self) -> &'static str {
        match self {
            TheoremId::T41 => "t41",
            TheoremId::T42 => "t42",
            TheoremId::T43a => "t43a",
            TheoremId::T43b => "t43b",
            TheoremId::T43c => "t43c",
            TheoremId::T44 => "t44",
            TheoremId::T45 => "t45",
            TheoremId::T45MinSet => "t45_min_set",
            TheoremId::T46 => "t46",
            TheoremId::T47 => "t47",
            TheoremId::T48 => "t48",
            TheoremId::T49 => "t49",
            TheoremId::T410 => "t410",
            TheoremId::T53 => "t53",
            TheoremId::T54 => "t54",
            TheoremId::T55 => "t55",
            TheoremId::T56 => "t56",
            TheoremId::T57 => "t57",
            TheoremId::T58 => "t58",
            TheoremId::T59 => "t59",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarnessStatus {
    Pass,
    RedEvent,
    Skipped,
}

/// Outcome of one theorem run on one instance.
///
/// A red event means every hypothesis held on the samples while a
/// conclusion failed. Hypotheses are verified on samples only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnessReport {
    pub theorem: TheoremId,
    pub instance: String,
    pub status: HarnessStatus,
    pub red_event: bool,
    pub hypotheses: Vec<ClassVerdict>,
    pub conclusions: Vec<ClassVerdict>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub details: Map<String, Value>,
    pub notes: Vec<String>,
}

pub(crate) const SAMPLED_NOTE: &str = "hypotheses verified on samples only";

impl HarnessReport {
    pub(crate) fn new(theorem: TheoremId, instance: impl Into<String>) -> Self {
        Self {
            theorem,
            instance: instance.into(),
            status: HarnessStatus::Pass,
            red_event: false,
            hypotheses: Vec::new(),
            conclusions: Vec::new(),
            details: Map::new(),
            notes: vec![SAMPLED_NOTE.to_string()],
        }
    }

    pub(crate) fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(ClassVerdict::passed)
    }

    pub(crate) fn skip(&mut self, reason: impl Into<String>) {
        self.status = HarnessStatus::Skipped;
        self.red_event = false;
        self.notes.push(reason.into());
    }

    pub(crate) fn red(&mut self, reason: impl Into<String>) {
        self.status = HarnessStatus::RedEvent;
        self.red_event = true;
        self.notes.push(reason.into());
    }

    pub(crate) fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(
            key.to_string(),
            serde_json::to_value(value).expect("report details serialize"),
        );
    }

    /// Skips with the names of failed hypotheses when any did not hold.
    pub(crate) fn gate(&mut self) -> bool {
        if self.hypotheses_hold() {
            return true;
        }
        let failed: Vec<String> = self
            .hypotheses
            .iter()
            .filter(|v| !v.passed())
            .map(|v| format!("{} ({})", v.class, v.status))
            .collect();
        self.skip(format!("hypothesis not met on samples: {}", failed.join(", ")));
        false
    }
}
