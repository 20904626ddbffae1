use thiserror::Error;

use crate::model::AgentId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("instance has no agents")]
    NoAgents,
    #[error("agent {agent_id} registers no arms")]
    EmptyStrategy { agent_id: AgentId },
    #[error("agent {agent_id}, original {origin_index}: mean {mean} is outside [0, 1]")]
    InvalidMean {
        agent_id: AgentId,
        origin_index: u32,
        mean: f64,
    },
    #[error("agent {agent_id} has {originals} originals but {copies} copy counts")]
    CopyCountMismatch {
        agent_id: AgentId,
        originals: usize,
        copies: usize,
    },
    #[error("agent id {0} appears more than once")]
    DuplicateAgent(AgentId),
    #[error("agent {agent_id} lists original {origin_index} more than once")]
    DuplicateOrigin {
        agent_id: AgentId,
        origin_index: u32,
    },
    #[error("original {origin_index} is attached to agent {found} inside the profile of agent {agent_id}")]
    ForeignOriginal {
        agent_id: AgentId,
        origin_index: u32,
        found: AgentId,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("select called while a selection is still awaiting its update")]
    PendingSelection,
    #[error("update called without a matching select")]
    StaleUpdate,
    #[error("update for arm {got} but arm {expected} was selected")]
    WrongArm { expected: usize, got: usize },
    #[error("arm {0} does not exist in this instance")]
    UnknownArm(usize),
    #[error("reward {0} is not binary")]
    NonBinaryReward(u8),
    #[error("discount sequence has {have} entries, need at least {need}")]
    DiscountTooShort { have: usize, need: usize },
    #[error("invalid discount sequence: {0}")]
    InvalidDiscount(&'static str),
    #[error("invalid utility function: {0}")]
    InvalidUtility(&'static str),
    #[error("exact enumeration too large: {reason}")]
    TooLarge { reason: &'static str, bound: f64 },
}
