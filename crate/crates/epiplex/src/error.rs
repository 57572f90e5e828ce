use thiserror::Error;

use crate::state::AgentId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("agent list is empty")]
    NoAgents,
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertexId(String),
    #[error("facet #{facet} has two vertices colored `{color}`")]
    IllColoredFacet { facet: usize, color: AgentId },
    #[error("facet #{facet} has {size} vertices, expected {expected} (pure complex)")]
    ImpureComplex {
        facet: usize,
        size: usize,
        expected: usize,
    },
    #[error("facet references unknown vertex id `{0}`")]
    DanglingVertexRef(String),
    #[error("vertex `{0}` belongs to no facet")]
    IsolatedVertex(String),
    #[error("unknown facet index {0}")]
    UnknownFacet(usize),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("agent group is empty")]
    EmptyGroup,
    #[error("relation for agent `{agent}` is not an equivalence: {reason}")]
    NotEquivalence { agent: AgentId, reason: String },
    #[error("worlds `{0}` and `{1}` are indistinguishable for every agent")]
    ImproperFrame(String, String),
    #[error("unknown world id `{0}`")]
    UnknownWorld(String),
    #[error("syntax error at position {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("no facet satisfies the announced formula")]
    EmptyModel,
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("need at least {needed} agents, got {got}")]
    TooFewAgents { needed: usize, got: usize },
    #[error("complex and communication model have different agent sets")]
    AgentSetMismatch,
    #[error("task is not defined for {0} agents")]
    UnsupportedAgentCount(usize),
    #[error("complex carries no carrier annotations")]
    MissingCarrier,
    #[error("carrier of facet #{facet} points at input facet {carrier}, but the input complex has {inputs} facets")]
    CarrierOutOfRange {
        facet: usize,
        carrier: usize,
        inputs: usize,
    },
    #[error("carrier map must cover every facet ({covered} of {facets} covered)")]
    PartialCarrier { covered: usize, facets: usize },
    #[error("duplicate facets #{0} carry different carrier annotations")]
    CarrierConflict(usize),
    #[error("decision map is not total: {0}")]
    PartialMap(String),
    #[error("not a one-round unreliable-broadcast state: {0}")]
    NotOneRoundUB(String),
    #[error("state shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
