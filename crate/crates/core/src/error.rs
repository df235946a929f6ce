use thiserror::Error;

use crate::domain::Bundle;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cannot parse money value {text:?}: {reason}")]
    ParseMoney { text: String, reason: &'static str },

    #[error("cannot parse bundle {text:?}: {reason}")]
    ParseBundle { text: String, reason: String },

    #[error("item-count mismatch: expected m = {expected}, found m = {found}")]
    MismatchedItems { expected: usize, found: usize },

    #[error("item {item} is outside the {m}-item universe")]
    ItemOutOfRange { item: usize, m: usize },

    #[error("item {item} already belongs to bundle {bundle}")]
    ItemInBundle { item: usize, bundle: Bundle },

    #[error("{what} = {value} exceeds the configured cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("overlapping allocation: item {item} assigned to agents {agents:?}")]
    OverlappingAllocation { item: usize, agents: Vec<String> },

    #[error("infeasible allocation: item {item} demanded by agents {agents:?}")]
    InfeasibleAllocation { item: usize, agents: Vec<String> },

    #[error("generator mode {mode} does not support m = {m}")]
    UnsupportedGenerator { mode: String, m: usize },

    #[error("unknown mechanism {0:?}")]
    UnknownMechanism(String),

    #[error("mechanism {0} has no price function")]
    NotPriceBased(String),

    #[error("incomplete social choice table: no outcome for profile {0:?}")]
    IncompleteTable(Vec<usize>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::InfeasibleAllocation { .. })
    }
}
