//! Stored energy tables used as golden regression data.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::eigensolver::Method;
use crate::model::{Branch, ModelParams};

const RAW: &str = include_str!("../data/reference_tables.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub id: u32,
    pub title: String,
    pub omega: f64,
    pub k: f64,
    pub epsilon: f64,
    pub method: Method,
    /// Maximum absolute deviation accepted when reproducing the table.
    pub tolerance: f64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl ReferenceTable {
    pub fn params(&self, branch: Branch) -> ModelParams {
        ModelParams {
            omega: self.omega,
            k: self.k,
            epsilon: self.epsilon,
            branch,
        }
    }

    pub fn values(&self, branch: Branch) -> &[f64] {
        match branch {
            Branch::Plus => &self.plus,
            Branch::Minus => &self.minus,
        }
    }

    pub fn levels(&self) -> usize {
        self.plus.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceData {
    pub version: u32,
    pub tables: Vec<ReferenceTable>,
}

pub fn reference_data() -> &'static ReferenceData {
    static DATA: OnceLock<ReferenceData> = OnceLock::new();
    DATA.get_or_init(|| serde_json::from_str(RAW).expect("embedded reference tables are valid JSON"))
}

pub fn reference_table(id: u32) -> Option<&'static ReferenceTable> {
    reference_data().tables.iter().find(|t| t.id == id)
}

/// Largest `|computed - reference|` over both branches.
pub fn max_deviation(table: &ReferenceTable, plus: &[f64], minus: &[f64]) -> f64 {
    table
        .plus
        .iter()
        .zip(plus)
        .chain(table.minus.iter().zip(minus))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}
