use thiserror::Error;

use crate::vcg::EquivalenceReport;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("negative valuation {value} for item {item}, buyer {buyer}")]
    NegativeValuation { item: usize, buyer: usize, value: String },

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("label `{0}` uses the reserved `__dummy_` prefix")]
    ReservedLabel(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("value `{value}` is not exactly representable at scale {scale}")]
    NotRepresentable { value: String, scale: u64 },

    #[error("value `{0}` is out of range")]
    OutOfRange(String),

    #[error("dual infeasible at item {item}, buyer {buyer}: p + q = {sum} < v = {valuation}")]
    Infeasible {
        item: usize,
        buyer: usize,
        sum: i64,
        valuation: i64,
    },

    #[error("not market clearing: {0}")]
    NotMarketClearing(String),

    #[error("buyer {buyer} is {actual} but mode requires {expected}")]
    ModeMismatch {
        buyer: usize,
        actual: &'static str,
        expected: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("oracle limit exceeded: n = {n} > {limit}")]
    OracleLimit { n: usize, limit: usize },

    #[error("buyer-optimal prices and VCG prices disagree")]
    Mismatch(Box<EquivalenceReport>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = MarketError> = std::result::Result<T, E>;
