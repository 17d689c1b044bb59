//! Worst-case execution time and cache overhead (WCETO) functions.
//!
//! A WCETO function bounds the time needed to run `η` threads of one
//! executable object back to back on a single core. Bundled threads share
//! instruction-cache contents, so the function is concave in `η`.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Abstract time unit. Sums of fractional WCETO values stay in `f64`.
pub type Cycles = f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WcetoError {
    #[error("thread count must be at least 1")]
    ZeroThreads,
    #[error("thread count {eta} is outside the tabulated range 1..={len}")]
    OutOfRange { eta: u32, len: usize },
    #[error("growth factor {0} must be finite and positive")]
    InvalidFactor(f64),
    #[error("single-thread cost {0} must be finite and positive")]
    InvalidCost(f64),
    #[error("table must be non-empty, strictly increasing and concave")]
    InvalidTable,
}

/// Per-object WCETO as a function of the bundled thread count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WcetoFn {
    /// Linear upper bound `c1 · (1 + factor · (η − 1))`.
    #[serde(rename = "linear")]
    LinearGrowth { c1: Cycles, factor: f64 },
    /// Tabulated values for `η = 1..=values.len()`.
    Table { values: Vec<Cycles> },
    /// Structural zero-cost node (added empty source or sink).
    Zero,
}

impl WcetoFn {
    pub fn linear(c1: Cycles, factor: f64) -> Result<Self, WcetoError> {
        if !(c1.is_finite() && c1 > 0.0) {
            return Err(WcetoError::InvalidCost(c1));
        }
        // Measured factors may exceed 1; such objects are simply never collapsed.
        if !(factor.is_finite() && factor > 0.0) {
            return Err(WcetoError::InvalidFactor(factor));
        }
        Ok(WcetoFn::LinearGrowth { c1, factor })
    }

    pub fn table(values: Vec<Cycles>) -> Result<Self, WcetoError> {
        if values.is_empty() || values[0] <= 0.0 || !check_concave(&values) {
            return Err(WcetoError::InvalidTable);
        }
        Ok(WcetoFn::Table { values })
    }

    pub fn validate(&self) -> Result<(), WcetoError> {
        match self {
            WcetoFn::LinearGrowth { c1, factor } => Self::linear(*c1, *factor).map(drop),
            WcetoFn::Table { values } => Self::table(values.clone()).map(drop),
            WcetoFn::Zero => Ok(()),
        }
    }

    /// Evaluates the function at `eta` threads.
    pub fn eval(&self, eta: u32) -> Result<Cycles, WcetoError> {
        if eta == 0 {
            return Err(WcetoError::ZeroThreads);
        }
        match self {
            WcetoFn::LinearGrowth { c1, factor } => Ok(c1 * (1.0 + factor * f64::from(eta - 1))),
            WcetoFn::Table { values } => values
                .get(eta as usize - 1)
                .copied()
                .ok_or(WcetoError::OutOfRange { eta, len: values.len() }),
            WcetoFn::Zero => Ok(0.0),
        }
    }

    /// Largest thread count the function can be evaluated at, if bounded.
    pub fn max_threads(&self) -> Option<u32> {
        match self {
            WcetoFn::Table { values } => Some(values.len() as u32),
            WcetoFn::Zero => Some(1),
            WcetoFn::LinearGrowth { .. } => None,
        }
    }

    pub fn single_thread(&self) -> Cycles {
        match self {
            WcetoFn::LinearGrowth { c1, .. } => *c1,
            WcetoFn::Table { values } => values[0],
            WcetoFn::Zero => 0.0,
        }
    }

    /// Whether bundling threads of this object can ever save work.
    ///
    /// Objects with a growth factor above one are measurement artefacts of
    /// non-concave behaviour and are excluded from collapse.
    pub fn collapsible(&self) -> bool {
        match self {
            WcetoFn::LinearGrowth { factor, .. } => *factor <= 1.0,
            WcetoFn::Table { values } => values.len() >= 2 && check_concave(values),
            WcetoFn::Zero => false,
        }
    }
}

/// True iff `values` is strictly increasing with non-positive second differences.
pub fn check_concave(values: &[Cycles]) -> bool {
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let concave = values.windows(3).all(|w| w[2] - w[1] <= w[1] - w[0]);
    increasing && concave
}

/// Smallest growth factor whose linear bound covers every tabulated value.
///
/// Returns `None` when the table has fewer than two entries or a
/// non-positive single-thread value. The result may exceed 1 for
/// measured data; callers treat such objects as non-collapsible.
pub fn fit_growth_factor(values: &[Cycles]) -> Option<f64> {
    let c1 = *values.first()?;
    if values.len() < 2 || c1 <= 0.0 {
        return None;
    }
    values
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, v)| (v - c1) / (i as f64 * c1))
        .reduce(f64::max)
}

/// One row of a growth-factor fixture (`name,growth_factor,c1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFactorRecord {
    pub name: String,
    pub growth_factor: f64,
    pub c1: Option<Cycles>,
}

impl GrowthFactorRecord {
    pub fn collapsible(&self) -> bool {
        self.growth_factor <= 1.0
    }

    /// Linear WCETO for this benchmark, given a single-thread cost when the
    /// fixture leaves it blank.
    pub fn wceto(&self, default_c1: Cycles) -> Result<WcetoFn, WcetoError> {
        WcetoFn::linear(self.c1.unwrap_or(default_c1), self.growth_factor)
    }
}

pub fn read_growth_factors<R: Read>(reader: R) -> Result<Vec<GrowthFactorRecord>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}
