use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("scenario index {index} out of range (instance has {count} scenarios)")]
    InvalidScenario { index: usize, count: usize },

    #[error("blocking cost {cost} exceeds budget {budget}")]
    BudgetExceeded { cost: f64, budget: f64 },

    #[error("label {0} is unblockable")]
    UnblockableLabel(u32),

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),

    #[error("no free label left for a parallel copy of arc ({tail}, {head})")]
    LabelsExhausted { tail: u32, head: u32 },

    #[error("enumeration cap of {cap} feasible subsets exceeded")]
    CapExceeded { cap: u64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("LP solver failure: {0}")]
    Lp(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
