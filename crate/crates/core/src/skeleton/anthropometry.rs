use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Subject height and mass plus the coefficient table used to scale the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnthropometricProfile {
    /// Standing height, m.
    pub height: f64,
    /// Body mass, kg.
    pub mass: f64,
    #[serde(default = "default_table_id")]
    pub coefficient_table_id: String,
}

fn default_table_id() -> String {
    DEFAULT_TABLE_ID.to_string()
}

impl AnthropometricProfile {
    pub fn new(height: f64, mass: f64) -> Self {
        Self {
            height,
            mass,
            coefficient_table_id: default_table_id(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(ModelError::InvalidProfile(format!(
                "height must be positive, got {}",
                self.height
            )));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(ModelError::InvalidProfile(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        Ok(())
    }
}

/// Per-segment scaling fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentCoefficients {
    pub name: String,
    /// Segment length / body height.
    pub length_fraction: f64,
    /// Segment mass / body mass.
    pub mass_fraction: f64,
    /// Distance of the segment CoM from its proximal joint / segment length.
    pub com_fraction: f64,
    /// Radii of gyration about the segment x, y, z axes / segment length.
    pub gyration_fractions: [f64; 3],
    /// Joint origin in the parent segment frame / body height. When absent
    /// the segment attaches at the distal end of its parent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_fraction: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub table_id: String,
    pub segments: Vec<SegmentCoefficients>,
}

pub const DEFAULT_TABLE_ID: &str = "default-v1";
const DEFAULT_TABLE_JSON: &str = include_str!("../../data/coefficients_default.json");

const MASS_FRACTION_TOLERANCE: f64 = 1e-9;

impl CoefficientTable {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let table: CoefficientTable =
            serde_json::from_str(text).map_err(|e| ModelError::InvalidTable(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn default_table() -> Self {
        Self::from_json(DEFAULT_TABLE_JSON).expect("bundled coefficient table is valid")
    }

    pub fn segment(&self, name: &str) -> Option<&SegmentCoefficients> {
        self.segments.iter().find(|s| s.name == name)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let total: f64 = self.segments.iter().map(|s| s.mass_fraction).sum();
        if (total - 1.0).abs() > MASS_FRACTION_TOLERANCE {
            return Err(ModelError::InvalidTable(format!(
                "table {}: mass fractions sum to {total}, expected 1",
                self.table_id
            )));
        }
        for s in &self.segments {
            let positive = s.length_fraction > 0.0
                && s.mass_fraction > 0.0
                && s.gyration_fractions.iter().all(|g| *g > 0.0);
            if !positive {
                return Err(ModelError::InvalidTable(format!(
                    "table {}: segment {} has non-positive coefficients",
                    self.table_id, s.name
                )));
            }
        }
        for seg in super::layout::SEGMENTS.iter() {
            if self.segment(seg.name).is_none() {
                return Err(ModelError::InvalidTable(format!(
                    "table {}: missing segment {}",
                    self.table_id, seg.name
                )));
            }
        }
        Ok(())
    }
}

/// Coefficient tables addressable by id. The bundled default is always present.
#[derive(Debug, Clone)]
pub struct TableRegistry {
    tables: BTreeMap<String, CoefficientTable>,
}

impl Default for TableRegistry {
    fn default() -> Self {
        let mut tables = BTreeMap::new();
        let table = CoefficientTable::default_table();
        tables.insert(table.table_id.clone(), table);
        Self { tables }
    }
}

impl TableRegistry {
    pub fn register(&mut self, table: CoefficientTable) -> Result<(), ModelError> {
        table.validate()?;
        self.tables.insert(table.table_id.clone(), table);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&CoefficientTable, ModelError> {
        self.tables
            .get(id)
            .ok_or_else(|| ModelError::UnknownTable(id.to_string()))
    }
}
