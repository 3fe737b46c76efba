//! Pass/fail entries shared by the hypothesis and maximum-principle checks.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotEvaluable,
    NotApplicable,
}

/// One checked inequality. The margin is the computed slack: non-negative
/// (or positive for strict inequalities) when the condition holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub requirement: String,
    pub margin: Option<f64>,
    pub status: Status,
    pub note: String,
}

impl Condition {
    pub fn evaluated(name: &str, requirement: &str, margin: f64, strict: bool, note: impl Into<String>) -> Self {
        let ok = if strict { margin > 0.0 } else { margin >= 0.0 };
        Self {
            name: name.into(),
            requirement: requirement.into(),
            margin: Some(margin),
            status: if ok { Status::Pass } else { Status::Fail },
            note: note.into(),
        }
    }

    pub fn with_tolerance(name: &str, requirement: &str, margin: f64, tol: f64, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            requirement: requirement.into(),
            margin: Some(margin),
            status: if margin >= -tol { Status::Pass } else { Status::Fail },
            note: note.into(),
        }
    }

    pub fn not_evaluable(name: &str, requirement: &str, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            requirement: requirement.into(),
            margin: None,
            status: Status::NotEvaluable,
            note: note.into(),
        }
    }

    pub fn not_applicable(name: &str, requirement: &str, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            requirement: requirement.into(),
            margin: None,
            status: Status::NotApplicable,
            note: note.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}
