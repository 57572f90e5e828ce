//! The concrete decision procedures: the courteous rule for one-round
//! unreliable broadcast, its knowledge-threshold reformulation, and the
//! two-round test-and-set procedure, each emitted as a per-vertex
//! [`DecisionMap`]. Also the formulas they revolve around.

use std::collections::BTreeSet;

use crate::complex::ChromaticComplex;
use crate::error::{Error, Result};
use crate::logic::{Formula, Group, GroupFamily, ModelChecker};
use crate::state::{AgentId, LocalState, Value};
use crate::task::DecisionMap;

/// All two-agent groups over the agent set.
pub fn all_pairs(agents: &[AgentId]) -> GroupFamily {
    let mut alpha = GroupFamily::new();
    for (i, x) in agents.iter().enumerate() {
        for y in &agents[i + 1..] {
            let group: Group = [x.clone(), y.clone()].into_iter().collect();
            alpha.insert(group);
        }
    }
    alpha
}

/// `(and (= input a v) ...)` over every agent.
pub fn all_inputs_equal(agents: &[AgentId], value: Value) -> Formula {
    Formula::And(
        agents
            .iter()
            .map(|a| Formula::input_atom(a.clone(), value))
            .collect(),
    )
}

/// The threshold formula: common distributed knowledge among all pairs that
/// not everyone started with 1.
pub fn phi_formula(agents: &[AgentId]) -> Formula {
    Formula::common_distributed(
        all_pairs(agents),
        Formula::not(all_inputs_equal(agents, 1)),
    )
}

/// The mirrored formula over input 0.
pub fn phi0_formula(agents: &[AgentId]) -> Formula {
    Formula::common_distributed(
        all_pairs(agents),
        Formula::not(all_inputs_equal(agents, 0)),
    )
}

/// The one-round test-and-set obstruction: either `phi0` holds, or at least
/// two agents know `phi`.
pub fn psi_formula(agents: &[AgentId]) -> Formula {
    let phi1 = phi_formula(agents);
    let mut disjuncts = vec![phi0_formula(agents)];
    for (i, x) in agents.iter().enumerate() {
        for y in &agents[i + 1..] {
            disjuncts.push(Formula::And(vec![
                Formula::knows(x.clone(), phi1.clone()),
                Formula::knows(y.clone(), phi1.clone()),
            ]));
        }
    }
    Formula::Or(disjuncts)
}

/// A one-round view's senders with their round-0 values, or `None` when the
/// state is not a one-round view over inputs.
fn round_one_values(state: &LocalState) -> Option<Vec<(AgentId, Value)>> {
    let LocalState::View { received, .. } = state else {
        return None;
    };
    let mut values = Vec::with_capacity(received.len());
    for (sender, sent) in received {
        match sent {
            LocalState::Input { value, .. } => values.push((sender.clone(), *value)),
            _ => return None,
        }
    }
    Some(values)
}

/// The courteous rule on a one-round unreliable-broadcast complex over
/// binary inputs for three agents. Per vertex, with `v_i` the set of
/// received (sender, input) pairs and `x_i` the own input:
/// all values equal -> that value; `|v_i| = 2` -> `1 - x_i`; `|v_i| = 3`
/// with a majority of 0s -> 0; `|v_i| = 3` with a majority of 1s ->
/// `1 - x_i`.
pub fn courteous_map(protocol: &ChromaticComplex) -> Result<DecisionMap> {
    if protocol.agents().len() != 3 {
        return Err(Error::NotOneRoundUB(format!(
            "courteous rule is defined for 3 agents, got {}",
            protocol.agents().len()
        )));
    }
    let mut decisions = Vec::with_capacity(protocol.vertex_count());
    for vertex in protocol.vertices() {
        let values = round_one_values(&vertex.state).ok_or_else(|| {
            Error::NotOneRoundUB(format!("vertex `{}` is not a one-round view", vertex.id))
        })?;
        let own = values
            .iter()
            .find(|(sender, _)| sender == &vertex.color)
            .map(|&(_, v)| v)
            .ok_or_else(|| {
                Error::NotOneRoundUB(format!("vertex `{}` lacks its own value", vertex.id))
            })?;
        if values.iter().any(|&(_, v)| v > 1) {
            return Err(Error::NotOneRoundUB(format!(
                "vertex `{}` carries a non-binary input",
                vertex.id
            )));
        }
        let seen: Vec<Value> = values.iter().map(|&(_, v)| v).collect();
        let zeros = seen.iter().filter(|&&v| v == 0).count();
        let decision = if zeros == 0 || zeros == seen.len() {
            seen[0]
        } else {
            match seen.len() {
                2 => 1 - own,
                3 => {
                    if zeros >= 2 {
                        0
                    } else {
                        1 - own
                    }
                }
                k => {
                    return Err(Error::NotOneRoundUB(format!(
                        "vertex `{}` received {k} messages",
                        vertex.id
                    )))
                }
            }
        };
        decisions.push(decision);
    }
    Ok(DecisionMap::new(decisions))
}

/// The knowledge reformulation: a vertex decides 0 exactly when the formula
/// holds at every world containing it (i.e. the agent knows it there), and
/// 1 otherwise.
pub fn knowledge_threshold_map(
    protocol: &ChromaticComplex,
    formula: &Formula,
) -> Result<DecisionMap> {
    let truth = ModelChecker::new(protocol).eval_all(formula)?;
    let decisions = (0..protocol.vertex_count())
        .map(|v| {
            if protocol.facets_of_vertex(v).iter().all(|&w| truth[w]) {
                0
            } else {
                1
            }
        })
        .collect();
    Ok(DecisionMap::new(decisions))
}

/// Whether a one-round test-and-set state triggers the extra write/read:
/// started with 1, lost the test-and-set (someone else's message arrived),
/// and the value set seen is {0, 1}.
pub fn tas_loser_qualifies(state: &LocalState) -> bool {
    let LocalState::View { agent, received } = state else {
        return false;
    };
    if received.len() < 2 {
        return false;
    }
    let Some(own) = received.get(agent).and_then(LocalState::own_input) else {
        return false;
    };
    let seen: BTreeSet<Value> = received.values().filter_map(LocalState::own_input).collect();
    own == 1 && seen.len() == 2 && seen.contains(&0) && seen.contains(&1)
}

/// Decisions on the refined test-and-set complex (one round plus the
/// partial round over qualifying losers): a vertex holding a second-round
/// view decides 0 iff that view contains another agent's message, and every
/// vertex still holding a one-round view decides as in the one-round case,
/// by the knowledge threshold over the formula `phi`.
pub fn tas_two_round_map(refined: &ChromaticComplex) -> Result<DecisionMap> {
    let phi = phi_formula(refined.agents());
    let truth = ModelChecker::new(refined).eval_all(&phi)?;
    let mut decisions = Vec::with_capacity(refined.vertex_count());
    for (v, vertex) in refined.vertices().iter().enumerate() {
        let LocalState::View { received, .. } = &vertex.state else {
            return Err(Error::ShapeMismatch(format!(
                "vertex `{}` is not a view",
                vertex.id
            )));
        };
        let second_round = received
            .values()
            .all(|s| matches!(s, LocalState::View { .. }));
        let decision = if second_round {
            if received.len() >= 2 {
                0
            } else {
                1
            }
        } else if received
            .values()
            .all(|s| matches!(s, LocalState::Input { .. }))
        {
            if refined.facets_of_vertex(v).iter().all(|&w| truth[w]) {
                0
            } else {
                1
            }
        } else {
            return Err(Error::ShapeMismatch(format!(
                "vertex `{}` mixes round shapes",
                vertex.id
            )));
        };
        decisions.push(decision);
    }
    Ok(DecisionMap::new(decisions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn view(agent: &str, entries: &[(&str, Value)]) -> LocalState {
        let received: BTreeMap<AgentId, LocalState> = entries
            .iter()
            .map(|&(name, value)| (AgentId::new(name), LocalState::input(name, value)))
            .collect();
        LocalState::view(agent, received)
    }

    fn agents3() -> Vec<AgentId> {
        ["a", "b", "c"].iter().map(|&s| AgentId::new(s)).collect()
    }

    #[test]
    fn courteous_rule_cases() {
        let inputs = crate::task::binary_input_complex(&agents3()).unwrap();
        let model =
            crate::comm::CommModel::make(crate::comm::ModelKind::UnreliableBroadcast, &agents3())
                .unwrap();
        let p = crate::comm::one_round(&inputs, &model).unwrap();
        let map = courteous_map(&p).unwrap();
        let decision_of_state = |state: &LocalState| -> Value {
            let v = p
                .vertices()
                .iter()
                .position(|vx| &vx.state == state)
                .expect("state occurs in the complex");
            map.value(v)
        };
        // All values equal: decide the value.
        assert_eq!(decision_of_state(&view("a", &[("a", 1), ("b", 1), ("c", 1)])), 1);
        assert_eq!(decision_of_state(&view("b", &[("b", 0)])), 0);
        // Two values seen: decide the opposite of the own input.
        assert_eq!(decision_of_state(&view("a", &[("a", 1), ("b", 0)])), 0);
        assert_eq!(decision_of_state(&view("c", &[("b", 1), ("c", 0)])), 1);
        // Three values, majority of 0s: decide 0.
        assert_eq!(decision_of_state(&view("a", &[("a", 1), ("b", 0), ("c", 0)])), 0);
        // Three values, majority of 1s: decide the opposite of the own input.
        assert_eq!(decision_of_state(&view("a", &[("a", 1), ("b", 0), ("c", 1)])), 0);
        assert_eq!(decision_of_state(&view("b", &[("a", 1), ("b", 0), ("c", 1)])), 1);
    }

    #[test]
    fn two_round_decisions_read_the_second_view() {
        let inputs = crate::task::binary_input_complex(&agents3()).unwrap();
        let model =
            crate::comm::CommModel::make(crate::comm::ModelKind::TestAndSet, &agents3()).unwrap();
        let p = crate::comm::one_round(&inputs, &model).unwrap();
        let refined = crate::comm::partial_round(&p, &|_, s| tas_loser_qualifies(s));
        let map = tas_two_round_map(&refined).unwrap();
        for (v, vertex) in refined.vertices().iter().enumerate() {
            if let LocalState::View { received, .. } = &vertex.state {
                if received.values().all(|s| matches!(s, LocalState::View { .. })) {
                    let expect = if received.len() >= 2 { 0 } else { 1 };
                    assert_eq!(map.value(v), expect, "second-round vertex {}", vertex.id);
                }
            }
        }
        // Both second-round outcomes occur.
        let second: Vec<Value> = refined
            .vertices()
            .iter()
            .enumerate()
            .filter(|(_, vx)| match &vx.state {
                LocalState::View { received, .. } => {
                    received.values().all(|s| matches!(s, LocalState::View { .. }))
                }
                _ => false,
            })
            .map(|(v, _)| map.value(v))
            .collect();
        assert!(second.contains(&0) && second.contains(&1));
    }

    #[test]
    fn qualification_matches_the_box_conditions() {
        // Lost with both values seen: qualifies.
        assert!(tas_loser_qualifies(&view("a", &[("a", 1), ("b", 0)])));
        assert!(tas_loser_qualifies(&view(
            "a",
            &[("a", 1), ("b", 0), ("c", 1)]
        )));
        // Winner (only itself): no.
        assert!(!tas_loser_qualifies(&view("a", &[("a", 1)])));
        // Started with 0: no.
        assert!(!tas_loser_qualifies(&view("a", &[("a", 0), ("b", 1)])));
        // Saw only 1s: no.
        assert!(!tas_loser_qualifies(&view("a", &[("a", 1), ("c", 1)])));
        // Not a one-round view at all: no.
        assert!(!tas_loser_qualifies(&LocalState::input("a", 1)));
    }

    #[test]
    fn psi_and_phi_are_positive() {
        let agents: Vec<AgentId> = ["a", "b", "c"].iter().map(|&s| AgentId::new(s)).collect();
        assert!(crate::logic::is_positive(&phi_formula(&agents)));
        assert!(crate::logic::is_positive(&phi0_formula(&agents)));
        assert!(crate::logic::is_positive(&psi_formula(&agents)));
    }

    #[test]
    fn courteous_rejects_non_ub_shapes() {
        let inputs = crate::task::binary_input_complex(
            &["a", "b", "c"].iter().map(|&s| AgentId::new(s)).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(matches!(
            courteous_map(&inputs),
            Err(Error::NotOneRoundUB(_))
        ));
    }
}
