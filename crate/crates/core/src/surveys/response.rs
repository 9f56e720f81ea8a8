use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::schema::{
    is_borg_value, is_likert_value, AnswerKind, QuestionnaireId, QuestionnaireSchema,
    SchemaRegistry,
};
use super::SurveyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Exoskeleton {
    Laevo,
    Corfor,
    CrayX,
    BackX,
    #[serde(rename = "none")]
    None,
}

impl fmt::Display for Exoskeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => f.write_str("none"),
            other => write!(f, "{other:?}"),
        }
    }
}

/// Operator position around the patient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkPosition {
    Head,
    Side,
}

impl fmt::Display for WorkPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Head => "head",
            Self::Side => "side",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Session {
    #[default]
    Simulation,
    Icu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseContext {
    pub exoskeleton: Exoskeleton,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<WorkPosition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pp_index: Option<u32>,
    #[serde(default)]
    pub session: Session,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseSet {
    pub respondent: String,
    pub questionnaire: QuestionnaireId,
    /// Unanswered items are absent.
    pub answers: BTreeMap<String, AnswerValue>,
    pub context: ResponseContext,
}

impl ResponseSet {
    /// One response set per non-blank line.
    pub fn parse_jsonl(text: &str) -> Result<Vec<Self>, (usize, String)> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e.to_string())))
            .collect()
    }

    pub fn number(&self, item: &str) -> Option<f64> {
        match self.answers.get(item) {
            Some(AnswerValue::Number(v)) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    OutOfScale,
    WrongType,
    NotAnOption,
    IcuOnly,
    UnknownItem,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::OutOfScale => "out of scale",
            Self::WrongType => "wrong answer type",
            Self::NotAnOption => "not an offered option",
            Self::IcuOnly => "ICU-only item answered outside an ICU session",
            Self::UnknownItem => "unknown item",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub item: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Schema items without an answer.
    pub missing: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Type-checks every answer against the registered schema. Missing items are
/// listed but not violations.
pub fn validate(
    registry: &SchemaRegistry,
    response: &ResponseSet,
) -> Result<ValidationReport, SurveyError> {
    let schema = registry
        .get(response.questionnaire)
        .ok_or_else(|| SurveyError::UnknownQuestionnaire(response.questionnaire.to_string()))?;
    Ok(check(schema, response))
}

pub(crate) fn check(schema: &QuestionnaireSchema, response: &ResponseSet) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (id, value) in &response.answers {
        let Some(item) = schema.item(id) else {
            report.violations.push(Violation {
                item: id.clone(),
                kind: ViolationKind::UnknownItem,
            });
            continue;
        };
        if item.icu_only && response.context.session != Session::Icu {
            report.violations.push(Violation {
                item: id.clone(),
                kind: ViolationKind::IcuOnly,
            });
        }
        if let Some(kind) = answer_violation(&item.kind, value) {
            report.violations.push(Violation {
                item: id.clone(),
                kind,
            });
        }
    }
    report.missing = schema
        .items
        .iter()
        .filter(|i| !response.answers.contains_key(&i.id))
        .map(|i| i.id.clone())
        .collect();
    report
}

fn answer_violation(kind: &AnswerKind, value: &AnswerValue) -> Option<ViolationKind> {
    use AnswerValue::{Number, Text};
    match (kind, value) {
        (AnswerKind::Likert5A | AnswerKind::Likert5B, Number(v)) => {
            (!is_likert_value(*v)).then_some(ViolationKind::OutOfScale)
        }
        (AnswerKind::BorgCr10, Number(v)) => {
            (!is_borg_value(*v)).then_some(ViolationKind::OutOfScale)
        }
        (AnswerKind::Numeric { min, max }, Number(v)) => {
            let ok = v.is_finite() && min.is_none_or(|m| *v >= m) && max.is_none_or(|m| *v <= m);
            (!ok).then_some(ViolationKind::OutOfScale)
        }
        (AnswerKind::FreeText, Text(_)) => None,
        (AnswerKind::Choice { options }, Text(s)) => {
            (!options.contains(s)).then_some(ViolationKind::NotAnOption)
        }
        _ => Some(ViolationKind::WrongType),
    }
}
