use std::collections::BTreeMap;

use serde::Serialize;

use super::response::{check, Exoskeleton, ResponseContext, ResponseSet, WorkPosition};
use super::schema::{apply_reverse, AnswerKind, QuestionnaireSchema};
use super::SurveyError;
use crate::stats::summarize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructScore {
    pub construct: String,
    pub mean: f64,
    /// Sample standard deviation, 0 for a single value.
    pub stdev: f64,
    pub n: usize,
}

impl ConstructScore {
    pub fn display(&self) -> String {
        format_mean_sd(self.mean, self.stdev)
    }
}

/// One-decimal `mean±sd`.
pub fn format_mean_sd(mean: f64, stdev: f64) -> String {
    format!("{mean:.1}±{stdev:.1}")
}

fn invalid(r: &ResponseSet, item: &str, reason: String) -> SurveyError {
    SurveyError::InvalidResponse {
        respondent: r.respondent.clone(),
        item: item.to_string(),
        reason,
    }
}

fn checked<'a>(
    schema: &QuestionnaireSchema,
    responses: &'a [ResponseSet],
) -> Result<Vec<&'a ResponseSet>, SurveyError> {
    let own: Vec<&ResponseSet> = responses.iter().filter(|r| r.questionnaire == schema.id).collect();
    if own.is_empty() {
        return Err(SurveyError::NoResponses);
    }
    for r in &own {
        if let Some(v) = check(schema, r).violations.first() {
            return Err(invalid(r, &v.item, v.kind.to_string()));
        }
    }
    Ok(own)
}

/// Per-construct mean and sample stdev of the item values pooled over all
/// respondents, reverse items flipped first and missing answers skipped.
/// Responses to other questionnaires are ignored.
pub fn construct_scores(
    schema: &QuestionnaireSchema,
    responses: &[ResponseSet],
) -> Result<Vec<ConstructScore>, SurveyError> {
    schema.validate()?;
    let own = checked(schema, responses)?;
    schema
        .constructs
        .iter()
        .map(|(name, members)| {
            let mut pooled = Vec::new();
            for r in &own {
                for m in members {
                    let Some(v) = r.number(m) else { continue };
                    let reverse = schema.item(m).is_some_and(|i| i.reverse);
                    pooled.push(if reverse { apply_reverse(v)? } else { v });
                }
            }
            if pooled.is_empty() {
                return Err(SurveyError::EmptyConstruct(name.clone()));
            }
            let s = summarize(&pooled)?;
            Ok(ConstructScore {
                construct: name.clone(),
                mean: s.mean,
                stdev: s.stdev,
                n: s.n,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructRow {
    pub exoskeleton: Exoskeleton,
    pub score: ConstructScore,
}

/// Construct scores computed separately for each exoskeleton.
pub fn construct_table(
    schema: &QuestionnaireSchema,
    responses: &[ResponseSet],
) -> Result<Vec<ConstructRow>, SurveyError> {
    let mut groups: BTreeMap<Exoskeleton, Vec<ResponseSet>> = BTreeMap::new();
    for r in responses.iter().filter(|r| r.questionnaire == schema.id) {
        groups.entry(r.context.exoskeleton).or_default().push(r.clone());
    }
    if groups.is_empty() {
        return Err(SurveyError::NoResponses);
    }
    let mut rows = Vec::new();
    for (exo, group) in groups {
        for score in construct_scores(schema, &group)? {
            rows.push(ConstructRow {
                exoskeleton: exo,
                score,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorgRow {
    pub zone: String,
    pub position: Option<WorkPosition>,
    pub mean: f64,
    pub stdev: f64,
    pub n: usize,
}

impl BorgRow {
    pub fn display(&self) -> String {
        format_mean_sd(self.mean, self.stdev)
    }
}

/// Borg CR10 mean and sample stdev per body zone and operator position,
/// over every response whose context passes `filter`.
pub fn borg_summary(
    schema: &QuestionnaireSchema,
    responses: &[ResponseSet],
    filter: impl Fn(&ResponseContext) -> bool,
) -> Result<Vec<BorgRow>, SurveyError> {
    let selected: Vec<ResponseSet> = responses
        .iter()
        .filter(|r| r.questionnaire == schema.id && filter(&r.context))
        .cloned()
        .collect();
    if selected.is_empty() {
        return Err(SurveyError::EmptyFilter);
    }
    let selected = checked(schema, &selected)?;
    let mut rows = Vec::new();
    for item in schema.items.iter().filter(|i| i.kind == AnswerKind::BorgCr10) {
        let mut by_position: BTreeMap<Option<WorkPosition>, Vec<f64>> = BTreeMap::new();
        for r in &selected {
            if let Some(v) = r.number(&item.id) {
                by_position.entry(r.context.position).or_default().push(v);
            }
        }
        let zone = item.id.strip_prefix("borg_").unwrap_or(&item.id);
        for (position, values) in by_position {
            let s = summarize(&values)?;
            rows.push(BorgRow {
                zone: zone.to_string(),
                position,
                mean: s.mean,
                stdev: s.stdev,
                n: s.n,
            });
        }
    }
    if rows.is_empty() {
        return Err(SurveyError::EmptyFilter);
    }
    Ok(rows)
}
