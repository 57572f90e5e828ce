//! Communication graphs, the three built-in distributed communication
//! models (unreliable broadcast, immediate snapshot, test-and-set), and
//! full-information round application producing protocol complexes.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::complex::{ChromaticComplex, Vertex};
use crate::error::{Error, Result};
use crate::state::{AgentId, LocalState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    UnreliableBroadcast,
    ImmediateSnapshot,
    TestAndSet,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::UnreliableBroadcast => "ub",
            ModelKind::ImmediateSnapshot => "is",
            ModelKind::TestAndSet => "tas",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ub" => Ok(ModelKind::UnreliableBroadcast),
            "is" => Ok(ModelKind::ImmediateSnapshot),
            "tas" => Ok(ModelKind::TestAndSet),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// A reflexive relation of delivered messages for one round; `(s, r)` means
/// agent `r` received agent `s`'s message. Agents are indexed into the
/// owning model's sorted agent list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CommGraph {
    edges: BTreeSet<(usize, usize)>,
}

impl CommGraph {
    pub fn from_in_neighborhoods(neighborhoods: &[Vec<usize>]) -> Self {
        let mut edges = BTreeSet::new();
        for (receiver, senders) in neighborhoods.iter().enumerate() {
            for &sender in senders {
                edges.insert((sender, receiver));
            }
        }
        CommGraph { edges }
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn in_neighborhood(&self, agent: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, r)| r == agent)
            .map(|&(s, _)| s)
            .collect()
    }

    fn is_reflexive(&self, n: usize) -> bool {
        (0..n).all(|a| self.edges.contains(&(a, a)))
    }

    fn permuted(&self, perm: &[usize]) -> CommGraph {
        CommGraph {
            edges: self
                .edges
                .iter()
                .map(|&(s, r)| (perm[s], perm[r]))
                .collect(),
        }
    }
}

/// A named set of communication graphs over a fixed agent set; the oblivious
/// adversary picks one graph from the set at every round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommModel {
    name: String,
    agents: Vec<AgentId>,
    graphs: Vec<CommGraph>,
}

impl CommModel {
    /// Builds one of the three models of the round structure:
    ///
    /// * `ub` — one graph per nonempty broadcaster subset `B`; everyone
    ///   receives every broadcaster, nobody else is heard.
    /// * `is` — one graph per ordered partition of the agents; an agent sees
    ///   itself, everyone in earlier blocks, and its own block.
    /// * `tas` — per winner: the winner sees only itself, the losers run an
    ///   immediate-snapshot exchange among themselves and additionally all
    ///   receive the winner.
    pub fn make(kind: ModelKind, agents: &[AgentId]) -> Result<CommModel> {
        let mut agents = agents.to_vec();
        agents.sort();
        agents.dedup();
        let n = agents.len();
        if n < 2 {
            return Err(Error::TooFewAgents { needed: 2, got: n });
        }
        let mut graphs = match kind {
            ModelKind::UnreliableBroadcast => {
                let mut graphs = Vec::new();
                for mask in 1u32..(1 << n) {
                    let broadcasters: Vec<usize> =
                        (0..n).filter(|&a| mask & (1 << a) != 0).collect();
                    let neighborhoods: Vec<Vec<usize>> = (0..n)
                        .map(|a| {
                            let mut senders = broadcasters.clone();
                            if !senders.contains(&a) {
                                senders.push(a);
                                senders.sort_unstable();
                            }
                            senders
                        })
                        .collect();
                    graphs.push(CommGraph::from_in_neighborhoods(&neighborhoods));
                }
                graphs
            }
            ModelKind::ImmediateSnapshot => {
                let members: Vec<usize> = (0..n).collect();
                ordered_partitions(&members)
                    .iter()
                    .map(|part| CommGraph::from_in_neighborhoods(&snapshot_neighborhoods(n, part, None)))
                    .collect()
            }
            ModelKind::TestAndSet => {
                let mut graphs = Vec::new();
                for winner in 0..n {
                    let losers: Vec<usize> = (0..n).filter(|&a| a != winner).collect();
                    for part in ordered_partitions(&losers) {
                        let mut neighborhoods =
                            snapshot_neighborhoods(n, &part, Some(winner));
                        neighborhoods[winner] = vec![winner];
                        graphs.push(CommGraph::from_in_neighborhoods(&neighborhoods));
                    }
                }
                graphs
            }
        };
        graphs.sort();
        graphs.dedup();
        debug_assert!(graphs.iter().all(|g| g.is_reflexive(n)));
        Ok(CommModel {
            name: kind.name().to_string(),
            agents,
            graphs,
        })
    }

    /// A model from explicit graphs; every graph must be reflexive.
    pub fn custom(
        name: impl Into<String>,
        agents: &[AgentId],
        graphs: Vec<CommGraph>,
    ) -> Result<CommModel> {
        let mut agents = agents.to_vec();
        agents.sort();
        agents.dedup();
        if agents.is_empty() {
            return Err(Error::NoAgents);
        }
        let n = agents.len();
        if let Some(g) = graphs.iter().find(|g| !g.is_reflexive(n)) {
            return Err(Error::ShapeMismatch(format!(
                "communication graph {:?} is not reflexive",
                g.edges
            )));
        }
        let mut graphs = graphs;
        graphs.sort();
        graphs.dedup();
        Ok(CommModel {
            name: name.into(),
            agents,
            graphs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn graphs(&self) -> &[CommGraph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Whether the graph set is closed under renaming the agents.
    pub fn is_permutation_closed(&self) -> bool {
        let n = self.agents.len();
        let set: BTreeSet<&CommGraph> = self.graphs.iter().collect();
        permutations(n)
            .iter()
            .all(|perm| self.graphs.iter().all(|g| set.contains(&g.permuted(perm))))
    }
}

/// In-neighborhoods of an immediate-snapshot schedule over `part` (an
/// ordered partition of a subset of `0..n`): a member sees earlier blocks
/// and its own block, plus optionally a fixed extra sender.
fn snapshot_neighborhoods(n: usize, part: &[Vec<usize>], extra: Option<usize>) -> Vec<Vec<usize>> {
    let mut neighborhoods: Vec<Vec<usize>> = (0..n).map(|a| vec![a]).collect();
    let mut earlier: Vec<usize> = Vec::new();
    for block in part {
        for &a in block {
            let mut senders: BTreeSet<usize> = earlier.iter().copied().collect();
            senders.extend(block.iter().copied());
            senders.insert(a);
            if let Some(extra) = extra {
                senders.insert(extra);
            }
            neighborhoods[a] = senders.into_iter().collect();
        }
        earlier.extend(block.iter().copied());
    }
    neighborhoods
}

fn ordered_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    // First block = any nonempty subset, then recurse on the rest.
    for mask in 1u32..(1 << items.len()) {
        let block: Vec<usize> = items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &x)| x)
            .collect();
        let rest: Vec<usize> = items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) == 0)
            .map(|(_, &x)| x)
            .collect();
        for tail in ordered_partitions(&rest) {
            let mut part = vec![block.clone()];
            part.extend(tail);
            out.push(part);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    permute(&mut current, 0, &mut out);
    out
}

fn permute(current: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == current.len() {
        out.push(current.clone());
        return;
    }
    for i in k..current.len() {
        current.swap(k, i);
        permute(current, k + 1, out);
        current.swap(k, i);
    }
}

/// Applies one full-information communication round: for every world of `c`
/// and every graph of the model, each agent's new state collects the current
/// states of its in-neighborhood. Vertices with equal (agent, state) across
/// all (world, graph) pairs are merged; this merging is what encodes the
/// indistinguishability structure of the protocol complex. The carrier of a
/// new facet is the carrier of its source world, or the source world itself
/// when `c` is an input complex.
pub fn one_round(c: &ChromaticComplex, model: &CommModel) -> Result<ChromaticComplex> {
    if c.agents() != model.agents() {
        return Err(Error::AgentSetMismatch);
    }
    let mut facets: Vec<(Vec<LocalState>, usize)> = Vec::new();
    for (w, facet) in c.facets().iter().enumerate() {
        let carrier = c.carrier().map(|car| car[w]).unwrap_or(w);
        for graph in model.graphs() {
            let states: Vec<LocalState> = (0..c.agents().len())
                .map(|receiver| {
                    let received: BTreeMap<AgentId, LocalState> = graph
                        .in_neighborhood(receiver)
                        .into_iter()
                        .map(|sender| {
                            (
                                c.agents()[sender].clone(),
                                c.vertex(facet[sender]).state.clone(),
                            )
                        })
                        .collect();
                    LocalState::view(c.agents()[receiver].clone(), received)
                })
                .collect();
            facets.push((states, carrier));
        }
    }
    let result = assemble(c.agents(), facets)?;
    debug_assert_eq!(result.facet_count(), c.facet_count() * model.len());
    Ok(result)
}

/// `rounds`-fold application of [`one_round`]; zero rounds returns the
/// complex unchanged.
pub fn iterate_rounds(
    c: &ChromaticComplex,
    model: &CommModel,
    rounds: usize,
) -> Result<ChromaticComplex> {
    let mut current = c.clone();
    for _ in 0..rounds {
        current = one_round(&current, model)?;
    }
    Ok(current)
}

/// A refinement round restricted to the agents satisfying `qualifies`: per
/// world, if at most one agent qualifies the world is kept unchanged;
/// otherwise the qualifying agents run one immediate-snapshot exchange among
/// themselves (non-qualifying agents keep their states verbatim). Vertex
/// merging and carriers behave as in [`one_round`].
pub fn partial_round(
    c: &ChromaticComplex,
    qualifies: &dyn Fn(&AgentId, &LocalState) -> bool,
) -> ChromaticComplex {
    let n = c.agents().len();
    let mut facets: Vec<(Vec<LocalState>, usize)> = Vec::new();
    for (w, facet) in c.facets().iter().enumerate() {
        let carrier = c.carrier().map(|car| car[w]).unwrap_or(w);
        let states: Vec<&LocalState> = (0..n).map(|k| &c.vertex(facet[k]).state).collect();
        let qualifying: Vec<usize> = (0..n)
            .filter(|&k| qualifies(&c.agents()[k], states[k]))
            .collect();
        if qualifying.len() <= 1 {
            facets.push((states.iter().map(|&s| s.clone()).collect(), carrier));
            continue;
        }
        for part in ordered_partitions(&qualifying) {
            let neighborhoods = snapshot_neighborhoods(n, &part, None);
            let new_states: Vec<LocalState> = (0..n)
                .map(|k| {
                    if !qualifying.contains(&k) {
                        return states[k].clone();
                    }
                    let received: BTreeMap<AgentId, LocalState> = neighborhoods[k]
                        .iter()
                        .map(|&s| (c.agents()[s].clone(), states[s].clone()))
                        .collect();
                    LocalState::view(c.agents()[k].clone(), received)
                })
                .collect();
            facets.push((new_states, carrier));
        }
    }
    assemble(c.agents(), facets).expect("refined complex is valid")
}

/// Merges per-facet state tuples into a complex: equal (agent, state) pairs
/// become one vertex, ids are generated per color in canonical state order.
fn assemble(agents: &[AgentId], facets: Vec<(Vec<LocalState>, usize)>) -> Result<ChromaticComplex> {
    let mut states: BTreeMap<(usize, String), LocalState> = BTreeMap::new();
    let mut keyed_facets: Vec<(Vec<(usize, String)>, usize)> = Vec::with_capacity(facets.len());
    for (facet_states, car) in facets {
        let mut keys = Vec::with_capacity(facet_states.len());
        for (color, state) in facet_states.into_iter().enumerate() {
            let key = (color, state.canonical());
            states.entry(key.clone()).or_insert(state);
            keys.push(key);
        }
        keyed_facets.push((keys, car));
    }
    let mut per_color_counter = vec![0usize; agents.len()];
    let mut ids: BTreeMap<(usize, String), String> = BTreeMap::new();
    let mut vertices: Vec<Vertex> = Vec::with_capacity(states.len());
    for ((color, canonical), state) in states {
        let id = format!("{}_{:04}", agents[color], per_color_counter[color]);
        per_color_counter[color] += 1;
        ids.insert((color, canonical), id.clone());
        vertices.push(Vertex::new(id, agents[color].clone(), state));
    }
    let mut facet_ids: Vec<Vec<String>> = Vec::with_capacity(keyed_facets.len());
    let mut carrier: Vec<usize> = Vec::with_capacity(keyed_facets.len());
    for (keys, car) in keyed_facets {
        facet_ids.push(keys.into_iter().map(|key| ids[&key].clone()).collect());
        carrier.push(car);
    }
    ChromaticComplex::build_with_carrier(agents.to_vec(), vertices, facet_ids, Some(carrier))
}
