use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::SurveyError;

/// Admissible Borg CR10 ratings.
pub const BORG_VALUES: [f64; 12] = [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QuestionnaireId {
    A,
    B,
    C,
    D,
    E,
}

impl QuestionnaireId {
    pub const ALL: [QuestionnaireId; 5] = [Self::A, Self::B, Self::C, Self::D, Self::E];
}

impl fmt::Display for QuestionnaireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnswerKind {
    /// Agreement scale, 1 = strongly disagree.
    #[serde(rename = "likert5_a")]
    Likert5A,
    /// Comparison scale, 1 = much lower.
    #[serde(rename = "likert5_b")]
    Likert5B,
    BorgCr10,
    Numeric {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    FreeText,
    Choice { options: Vec<String> },
}

impl AnswerKind {
    pub fn is_likert(&self) -> bool {
        matches!(self, Self::Likert5A | Self::Likert5B)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub text_key: String,
    #[serde(flatten)]
    pub kind: AnswerKind,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reverse: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub icu_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionnaireSchema {
    pub id: QuestionnaireId,
    pub title_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub items: Vec<Item>,
    /// Construct name to member item ids.
    #[serde(default)]
    pub constructs: BTreeMap<String, Vec<String>>,
}

impl QuestionnaireSchema {
    pub fn from_json(text: &str) -> Result<Self, SurveyError> {
        let schema: Self =
            serde_json::from_str(text).map_err(|e| SurveyError::Parse(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), SurveyError> {
        let bad = |reason: String| SurveyError::InvalidSchema {
            schema: self.id.to_string(),
            reason,
        };
        let mut seen = BTreeSet::new();
        for item in &self.items {
            if !seen.insert(item.id.as_str()) {
                return Err(bad(format!("duplicate item `{}`", item.id)));
            }
            if item.reverse && !item.kind.is_likert() {
                return Err(bad(format!("reverse item `{}` is not on a likert scale", item.id)));
            }
            if let AnswerKind::Choice { options } = &item.kind {
                if options.is_empty() {
                    return Err(bad(format!("choice item `{}` has no options", item.id)));
                }
            }
        }
        for (name, members) in &self.constructs {
            if members.is_empty() {
                return Err(bad(format!("construct `{name}` is empty")));
            }
            for m in members {
                let item = self
                    .item(m)
                    .ok_or_else(|| bad(format!("construct `{name}` names unknown item `{m}`")))?;
                if !item.kind.is_likert() {
                    return Err(bad(format!("construct `{name}` member `{m}` is not likert")));
                }
            }
        }
        Ok(())
    }

    pub fn item(&self, id: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }
}

/// Schemas by questionnaire id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SchemaRegistry {
    schemas: BTreeMap<QuestionnaireId, QuestionnaireSchema>,
}

const SHIPPED: [&str; 5] = [
    include_str!("../../schemas/questionnaire_a.json"),
    include_str!("../../schemas/questionnaire_b.json"),
    include_str!("../../schemas/questionnaire_c.json"),
    include_str!("../../schemas/questionnaire_d.json"),
    include_str!("../../schemas/questionnaire_e.json"),
];

impl SchemaRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the bundled A-E schemas.
    pub fn shipped() -> Self {
        let mut r = Self::new();
        for text in SHIPPED {
            r.register(QuestionnaireSchema::from_json(text).expect("bundled schema is valid"))
                .expect("bundled schema is valid");
        }
        r
    }

    /// Adds or replaces a schema.
    pub fn register(&mut self, schema: QuestionnaireSchema) -> Result<(), SurveyError> {
        schema.validate()?;
        self.schemas.insert(schema.id, schema);
        Ok(())
    }

    pub fn get(&self, id: QuestionnaireId) -> Option<&QuestionnaireSchema> {
        self.schemas.get(&id)
    }
}

/// `6 - value` on the five-point scales.
pub fn apply_reverse(value: f64) -> Result<f64, SurveyError> {
    if is_likert_value(value) {
        Ok(6.0 - value)
    } else {
        Err(SurveyError::OutOfScale(value))
    }
}

pub(crate) fn is_likert_value(v: f64) -> bool {
    v.fract() == 0.0 && (1.0..=5.0).contains(&v)
}

pub(crate) fn is_borg_value(v: f64) -> bool {
    BORG_VALUES.contains(&v)
}
