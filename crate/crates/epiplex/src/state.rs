//! Agents, values, and the recursive full-information local states carried by
//! vertices.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Input and decision values. Binary tasks only use 0 and 1.
pub type Value = u32;

/// A short symbolic agent name such as `a`, `b`, `pink`.
///
/// Agent ids are totally ordered (lexicographically), which fixes the
/// canonical sorting used everywhere else.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Self {
        AgentId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_owned())
    }
}

impl From<String> for AgentId {
    fn from(s: String) -> Self {
        AgentId(s)
    }
}

/// The local state held by one agent, i.e. the payload of one vertex.
///
/// `Input` is a round-0 state (the agent's private input value). `View` is a
/// round-r state: the map from senders to the state they transmitted, with
/// absent senders simply missing from the map. `Record` holds ad-hoc named
/// observations (used by models that are not communication rounds, such as
/// the muddy-children demo), and `Paired` augments a state with a decision
/// value (used by product-update complexes).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LocalState {
    Input {
        agent: AgentId,
        value: Value,
    },
    View {
        agent: AgentId,
        received: BTreeMap<AgentId, LocalState>,
    },
    Record {
        agent: AgentId,
        entries: BTreeMap<String, Value>,
    },
    Paired {
        agent: AgentId,
        input: Box<LocalState>,
        decision: Value,
    },
}

impl LocalState {
    pub fn input(agent: impl Into<AgentId>, value: Value) -> Self {
        LocalState::Input {
            agent: agent.into(),
            value,
        }
    }

    pub fn view(agent: impl Into<AgentId>, received: BTreeMap<AgentId, LocalState>) -> Self {
        LocalState::View {
            agent: agent.into(),
            received,
        }
    }

    pub fn record(agent: impl Into<AgentId>, entries: BTreeMap<String, Value>) -> Self {
        LocalState::Record {
            agent: agent.into(),
            entries,
        }
    }

    pub fn agent(&self) -> &AgentId {
        match self {
            LocalState::Input { agent, .. }
            | LocalState::View { agent, .. }
            | LocalState::Record { agent, .. }
            | LocalState::Paired { agent, .. } => agent,
        }
    }

    /// Looks up a named entry of this state. `input` resolves through the
    /// reflexive self-chain of views down to the round-0 value; `decision`
    /// is carried by `Paired` states; any other key is a `Record` entry.
    pub fn entry(&self, key: &str) -> Option<Value> {
        match self {
            LocalState::Input { value, .. } => (key == "input").then_some(*value),
            LocalState::View { agent, received } => received.get(agent)?.entry(key),
            LocalState::Record { entries, .. } => entries.get(key).copied(),
            LocalState::Paired {
                input, decision, ..
            } => {
                if key == "decision" {
                    Some(*decision)
                } else {
                    input.entry(key)
                }
            }
        }
    }

    /// The agent's own round-0 input, when this state descends from one.
    pub fn own_input(&self) -> Option<Value> {
        self.entry("input")
    }

    /// Deterministic, order-independent serialization. Two states are equal
    /// iff their canonical strings are equal.
    ///
    /// Round-0 states print as `AGENT:VALUE`; round-r states as
    /// `AGENT[S1|S2|...]` with one entry per sender, sorted by sender name,
    /// each entry the sender's own canonical string; absent senders are
    /// omitted.
    pub fn canonical(&self) -> String {
        match self {
            LocalState::Input { agent, value } => format!("{agent}:{value}"),
            LocalState::View { agent, received } => {
                let inner: Vec<String> = received.values().map(LocalState::canonical).collect();
                format!("{agent}[{}]", inner.join("|"))
            }
            LocalState::Record { agent, entries } => {
                let inner: Vec<String> =
                    entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{agent}{{{}}}", inner.join(","))
            }
            LocalState::Paired {
                input, decision, ..
            } => format!("{}#d={decision}", input.canonical()),
        }
    }
}
