//! Questionnaire schemas, response validation, reverse-item handling,
//! construct scores and Borg CR10 summaries.

mod response;
mod schema;
mod scoring;

pub use response::{
    validate, AnswerValue, Exoskeleton, ResponseContext, ResponseSet, Session, ValidationReport,
    Violation, ViolationKind, WorkPosition,
};
pub use schema::{
    apply_reverse, AnswerKind, Item, QuestionnaireId, QuestionnaireSchema, SchemaRegistry,
    BORG_VALUES,
};
pub use scoring::{
    borg_summary, construct_scores, construct_table, format_mean_sd, BorgRow, ConstructRow,
    ConstructScore,
};

use crate::stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurveyError {
    #[error("value {0} is not on the 1-5 scale")]
    OutOfScale(f64),
    #[error("unknown questionnaire `{0}`")]
    UnknownQuestionnaire(String),
    #[error("invalid schema {schema}: {reason}")]
    InvalidSchema { schema: String, reason: String },
    #[error("schema parse error: {0}")]
    Parse(String),
    #[error("construct `{0}` has no answered items")]
    EmptyConstruct(String),
    #[error("no responses")]
    NoResponses,
    #[error("no Borg ratings match the filter")]
    EmptyFilter,
    #[error("respondent {respondent}, item {item}: {reason}")]
    InvalidResponse {
        respondent: String,
        item: String,
        reason: String,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
}
