use thiserror::Error;

use crate::netgraph::NodeId;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: expected two non-negative integer node ids, got {content:?}")]
    Parse { line: usize, content: String },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: NodeId },
    #[error("seller {0} is not a node of the graph")]
    UnknownSeller(NodeId),
    #[error("edge ({0}, {1}) references a node outside the network")]
    DanglingEdge(NodeId, NodeId),
}

#[derive(Debug, Error, PartialEq)]
pub enum ValuationError {
    #[error("bundle width {got} does not match item count {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("item count {0} outside supported range 1..={max}", max = crate::valuation::MAX_ITEMS)]
    ItemCount(usize),
    #[error("average valuation undefined for an empty demand bundle")]
    EmptyDemand,
    #[error("invalid valuation model parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("configuration LP has {vars} variables, above the limit of {limit}")]
    TooLarge { vars: usize, limit: usize },
    #[error("simplex did not converge within {0} pivots")]
    PivotLimit(usize),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
}

#[derive(Debug, Error)]
pub enum MechanismError {
    #[error("buyer {0} does not have a single-minded valuation")]
    NotSingleMinded(NodeId),
    #[error("instance with {buyers} buyers and {items} items exceeds the enumeration bound ({max_buyers} buyers, {max_items} items)")]
    TooLarge {
        buyers: usize,
        items: usize,
        max_buyers: usize,
        max_items: usize,
    },
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    Epsilon(String),
    #[error("coin record has no entry for buyer {0}")]
    MissingCoin(NodeId),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario line {line}: {msg}")]
    Scenario { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
