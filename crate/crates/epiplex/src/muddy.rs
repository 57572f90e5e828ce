//! The muddy-children puzzle as a public-announcement demo: each child sees
//! the others' foreheads but not their own, the teacher's announcement and
//! the repeated "raise your hand" questions restrict the model world by
//! world.

use std::collections::BTreeMap;

use crate::complex::{ChromaticComplex, Vertex};
use crate::error::Result;
use crate::logic::{public_announce, Formula, ModelChecker};
use crate::state::{AgentId, LocalState, Value};

pub fn muddy_agents(children: usize) -> Vec<AgentId> {
    if children == 3 {
        return ["blue", "pink", "yellow"].iter().map(|&s| AgentId::new(s)).collect();
    }
    (1..=children)
        .map(|i| AgentId::new(format!("child{i}")))
        .collect()
}

/// The initial model: one world per clean/muddy assignment, one vertex per
/// (child, what the child sees on the other foreheads).
pub fn muddy_complex(children: usize) -> Result<ChromaticComplex> {
    if children < 2 {
        return Err(crate::error::Error::TooFewAgents {
            needed: 2,
            got: children,
        });
    }
    let agents = muddy_agents(children);
    let n = agents.len();
    let mut vertices = Vec::new();
    let mut facets = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for mask in 0..(1u32 << n) {
        let mut facet = Vec::with_capacity(n);
        for (k, agent) in agents.iter().enumerate() {
            let others: Vec<(usize, Value)> = (0..n)
                .filter(|&j| j != k)
                .map(|j| (j, (mask >> j) & 1))
                .collect();
            let id = format!(
                "{agent}_{}",
                others
                    .iter()
                    .map(|&(_, v)| v.to_string())
                    .collect::<String>()
            );
            if seen.insert(id.clone()) {
                let entries: BTreeMap<String, Value> = others
                    .iter()
                    .map(|&(j, v)| (agents[j].to_string(), v))
                    .collect();
                vertices.push(Vertex::new(
                    id.clone(),
                    agent.clone(),
                    LocalState::record(agent.clone(), entries),
                ));
            }
            facet.push(id);
        }
        facets.push(facet);
    }
    ChromaticComplex::build(agents, vertices, facets)
}

/// "Child `i` is muddy", read off another child's vertex (children see each
/// other's foreheads, never their own).
pub fn is_muddy(agents: &[AgentId], child: usize) -> Formula {
    let witness = agents
        .iter()
        .enumerate()
        .find(|&(j, _)| j != child)
        .expect("at least two children")
        .1;
    Formula::atom(agents[child].to_string(), witness.clone(), 1)
}

fn knows_own_status(agents: &[AgentId], child: usize) -> Formula {
    let witness = agents
        .iter()
        .enumerate()
        .find(|&(j, _)| j != child)
        .expect("at least two children")
        .1;
    let muddy = Formula::atom(agents[child].to_string(), witness.clone(), 1);
    let clean = Formula::atom(agents[child].to_string(), witness.clone(), 0);
    Formula::Or(vec![
        Formula::knows(agents[child].clone(), muddy),
        Formula::knows(agents[child].clone(), clean),
    ])
}

/// "At least one child is muddy": some child sees a muddy forehead.
pub fn at_least_one_muddy(agents: &[AgentId]) -> Formula {
    let mut cases = Vec::new();
    for (i, _) in agents.iter().enumerate() {
        cases.push(is_muddy(agents, i));
    }
    Formula::Or(cases)
}

/// "No child knows their own status."
pub fn nobody_knows_own_status(agents: &[AgentId]) -> Formula {
    Formula::And(
        (0..agents.len())
            .map(|i| Formula::not(knows_own_status(agents, i)))
            .collect(),
    )
}

/// One stage of the announcement sequence.
pub struct MuddyStage {
    pub label: String,
    pub complex: ChromaticComplex,
}

/// Replays the announcement sequence: the initial model, the model after
/// the teacher's announcement, then one model per round of "nobody raised
/// their hand", stopping once every child knows their status.
pub fn muddy_sequence(children: usize) -> Result<Vec<MuddyStage>> {
    let agents = muddy_agents(children);
    let mut stages = vec![MuddyStage {
        label: "initial".to_string(),
        complex: muddy_complex(children)?,
    }];
    let current = public_announce(
        &stages.last().unwrap().complex,
        &at_least_one_muddy(&agents),
    )?;
    stages.push(MuddyStage {
        label: "after announcement \"at least one is muddy\"".to_string(),
        complex: current,
    });
    let silence = nobody_knows_own_status(&agents);
    let mut question = 0usize;
    loop {
        let complex = &stages.last().unwrap().complex;
        let truth = ModelChecker::new(complex).eval_all(&silence)?;
        if !truth.iter().any(|&v| v) {
            break;
        }
        question += 1;
        let next = public_announce(complex, &silence)?;
        if next.facet_count() == complex.facet_count() {
            break; // the announcement is uninformative, nothing changes
        }
        stages.push(MuddyStage {
            label: format!("after question {question} (nobody answered)"),
            complex: next,
        });
    }
    Ok(stages)
}
