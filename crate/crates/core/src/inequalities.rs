//! Steering functionals evaluated on averaged correlation tables.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analytic::CorrelationTable;
use crate::error::{domain, Result};

/// Slack above the bound before a value counts as a violation.
pub const VIOLATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InequalityKind {
    /// Two-setting CHSH-type steering inequality, bound 2.
    Cffw,
    /// Linear n-setting inequality, bound 1.
    Cjwr,
}

impl InequalityKind {
    pub fn bound(&self) -> f64 {
        match self {
            InequalityKind::Cffw => 2.0,
            InequalityKind::Cjwr => 1.0,
        }
    }

    pub fn evaluate(&self, table: &CorrelationTable) -> Result<SteeringEvaluation> {
        match self {
            InequalityKind::Cffw => cffw(table),
            InequalityKind::Cjwr => cjwr(table),
        }
    }

    /// Raw functional without shape checks; used on hot paths.
    pub(crate) fn value_unchecked(&self, entries: &DMatrix<f64>) -> f64 {
        match self {
            InequalityKind::Cffw => cffw_value(entries),
            InequalityKind::Cjwr => cjwr_value(entries),
        }
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InequalityKind::Cffw => write!(f, "cffw"),
            InequalityKind::Cjwr => write!(f, "cjwr"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "inequality", content = "settings", rename_all = "lowercase")]
pub enum SteeringKind {
    Cffw,
    Cjwr(usize),
}

impl SteeringKind {
    pub fn inequality(&self) -> InequalityKind {
        match self {
            SteeringKind::Cffw => InequalityKind::Cffw,
            SteeringKind::Cjwr(_) => InequalityKind::Cjwr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringEvaluation {
    pub kind: SteeringKind,
    pub bob_index: usize,
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
}

impl SteeringEvaluation {
    fn new(kind: SteeringKind, bob_index: usize, value: f64, bound: f64) -> Self {
        Self { kind, bob_index, value, bound, violated: value > bound + VIOLATION_SLACK }
    }
}

pub(crate) fn cffw_value(c: &DMatrix<f64>) -> f64 {
    let (c00, c01, c10, c11) = (c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]);
    (c00 + c01).hypot(c10 + c11) + (c00 - c01).hypot(c10 - c11)
}

pub(crate) fn cjwr_value(c: &DMatrix<f64>) -> f64 {
    c.trace().abs() / (c.nrows() as f64).sqrt()
}

/// `S = √((C⁰⁰+C⁰¹)² + (C¹⁰+C¹¹)²) + √((C⁰⁰−C⁰¹)² + (C¹⁰−C¹¹)²)`, bound 2.
pub fn cffw(table: &CorrelationTable) -> Result<SteeringEvaluation> {
    let c = table.entries();
    if c.shape() != (2, 2) {
        return Err(domain(format!("CFFW needs a 2x2 table, got {:?}", c.shape())));
    }
    Ok(SteeringEvaluation::new(SteeringKind::Cffw, table.bob_index(), cffw_value(c), 2.0))
}

/// `Fⁿ = |Σᵢ Cⁱⁱ| / √n`, bound 1.
pub fn cjwr(table: &CorrelationTable) -> Result<SteeringEvaluation> {
    let c = table.entries();
    let n = c.nrows();
    if n != c.ncols() || n < 2 {
        return Err(domain(format!("CJWR needs a square table with n >= 2, got {:?}", c.shape())));
    }
    Ok(SteeringEvaluation::new(SteeringKind::Cjwr(n), table.bob_index(), cjwr_value(c), 1.0))
}
