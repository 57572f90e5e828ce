//! Epistemic frames (possible worlds with per-agent indistinguishability
//! relations) and the two conversions between frames and chromatic
//! simplicial complexes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::complex::{ChromaticComplex, Vertex};
use crate::error::{Error, Result};
use crate::state::{AgentId, LocalState, Value};

/// A set of possible worlds together with one equivalence relation per
/// agent. Internally each relation is stored as a partition: `classes[a][w]`
/// is the class id of world `w`, normalized to the minimal member index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpistemicFrame {
    agents: Vec<AgentId>,
    worlds: Vec<String>,
    classes: BTreeMap<AgentId, Vec<usize>>,
}

impl EpistemicFrame {
    /// Builds a frame from explicit relations, checking that each one is an
    /// equivalence relation (reflexive, symmetric, transitive).
    pub fn new(
        agents: Vec<AgentId>,
        worlds: Vec<String>,
        relations: &BTreeMap<AgentId, Vec<(String, String)>>,
    ) -> Result<Self> {
        let (agents, worlds, index) = Self::normalize(agents, worlds)?;
        let mut classes = BTreeMap::new();
        for agent in &agents {
            let pairs = relations.get(agent).map(Vec::as_slice).unwrap_or(&[]);
            let mut set: HashSet<(usize, usize)> = HashSet::new();
            for (x, y) in pairs {
                let xi = *index.get(x.as_str()).ok_or_else(|| Error::UnknownWorld(x.clone()))?;
                let yi = *index.get(y.as_str()).ok_or_else(|| Error::UnknownWorld(y.clone()))?;
                set.insert((xi, yi));
            }
            for (w, world) in worlds.iter().enumerate() {
                if !set.contains(&(w, w)) {
                    return Err(Error::NotEquivalence {
                        agent: agent.clone(),
                        reason: format!("missing reflexive pair ({world}, {world})"),
                    });
                }
            }
            for &(x, y) in &set {
                if !set.contains(&(y, x)) {
                    return Err(Error::NotEquivalence {
                        agent: agent.clone(),
                        reason: format!("({}, {}) present without its converse", worlds[x], worlds[y]),
                    });
                }
            }
            for &(x, y) in &set {
                for &(y2, z) in &set {
                    if y == y2 && !set.contains(&(x, z)) {
                        return Err(Error::NotEquivalence {
                            agent: agent.clone(),
                            reason: format!(
                                "({}, {}) and ({}, {}) without ({}, {})",
                                worlds[x], worlds[y], worlds[y], worlds[z], worlds[x], worlds[z]
                            ),
                        });
                    }
                }
            }
            classes.insert(agent.clone(), partition_from_pairs(worlds.len(), set.iter().copied()));
        }
        Ok(EpistemicFrame {
            agents,
            worlds,
            classes,
        })
    }

    /// Builds a frame from a generating set of pairs per agent; the
    /// reflexive-symmetric-transitive closure is taken.
    pub fn from_generators(
        agents: Vec<AgentId>,
        worlds: Vec<String>,
        generators: &BTreeMap<AgentId, Vec<(String, String)>>,
    ) -> Result<Self> {
        let (agents, worlds, index) = Self::normalize(agents, worlds)?;
        let mut classes = BTreeMap::new();
        for agent in &agents {
            let pairs = generators.get(agent).map(Vec::as_slice).unwrap_or(&[]);
            let mut resolved = Vec::with_capacity(pairs.len());
            for (x, y) in pairs {
                let xi = *index.get(x.as_str()).ok_or_else(|| Error::UnknownWorld(x.clone()))?;
                let yi = *index.get(y.as_str()).ok_or_else(|| Error::UnknownWorld(y.clone()))?;
                resolved.push((xi, yi));
            }
            classes.insert(
                agent.clone(),
                partition_from_pairs(worlds.len(), resolved.into_iter()),
            );
        }
        Ok(EpistemicFrame {
            agents,
            worlds,
            classes,
        })
    }

    #[allow(clippy::type_complexity)]
    fn normalize(
        mut agents: Vec<AgentId>,
        mut worlds: Vec<String>,
    ) -> Result<(Vec<AgentId>, Vec<String>, HashMap<String, usize>)> {
        if agents.is_empty() {
            return Err(Error::NoAgents);
        }
        agents.sort();
        agents.dedup();
        worlds.sort();
        worlds.dedup();
        let index = worlds
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok((agents, worlds, index))
    }

    pub(crate) fn from_classes(
        agents: Vec<AgentId>,
        worlds: Vec<String>,
        classes: BTreeMap<AgentId, Vec<usize>>,
    ) -> Self {
        EpistemicFrame {
            agents,
            worlds,
            classes,
        }
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_index(&self, id: &str) -> Result<usize> {
        self.worlds
            .binary_search_by(|w| w.as_str().cmp(id))
            .map_err(|_| Error::UnknownWorld(id.to_string()))
    }

    pub fn related(&self, agent: &AgentId, w1: usize, w2: usize) -> Result<bool> {
        let classes = self
            .classes
            .get(agent)
            .ok_or_else(|| Error::UnknownAgent(agent.to_string()))?;
        if w1 >= self.worlds.len() || w2 >= self.worlds.len() {
            return Err(Error::UnknownWorld(format!("#{}", w1.max(w2))));
        }
        Ok(classes[w1] == classes[w2])
    }

    /// The dual complex: one vertex per (agent, equivalence class), one
    /// facet per world. Two worlds share the a-colored vertex exactly when
    /// they are `~a`-related.
    pub fn to_complex(&self) -> Result<ChromaticComplex> {
        for w1 in 0..self.worlds.len() {
            for w2 in (w1 + 1)..self.worlds.len() {
                if self
                    .agents
                    .iter()
                    .all(|a| self.classes[a][w1] == self.classes[a][w2])
                {
                    return Err(Error::ImproperFrame(
                        self.worlds[w1].clone(),
                        self.worlds[w2].clone(),
                    ));
                }
            }
        }
        let mut vertices = Vec::new();
        let mut seen: BTreeSet<(AgentId, usize)> = BTreeSet::new();
        for agent in &self.agents {
            for w in 0..self.worlds.len() {
                let rep = self.classes[agent][w];
                if seen.insert((agent.clone(), rep)) {
                    let mut entries = BTreeMap::new();
                    entries.insert("class".to_string(), rep as Value);
                    vertices.push(Vertex::new(
                        format!("{agent}_{}", self.worlds[rep]),
                        agent.clone(),
                        LocalState::record(agent.clone(), entries),
                    ));
                }
            }
        }
        let facets: Vec<Vec<String>> = (0..self.worlds.len())
            .map(|w| {
                self.agents
                    .iter()
                    .map(|a| format!("{a}_{}", self.worlds[self.classes[a][w]]))
                    .collect()
            })
            .collect();
        ChromaticComplex::build(self.agents.clone(), vertices, facets)
    }

    /// The dual frame of a complex: worlds are facets, and two facets are
    /// `~a`-related when they contain the same a-colored vertex.
    pub fn from_complex(complex: &ChromaticComplex) -> Self {
        let width = complex.facet_count().to_string().len();
        let worlds: Vec<String> = (0..complex.facet_count())
            .map(|i| format!("w{i:0width$}"))
            .collect();
        let mut classes = BTreeMap::new();
        for (color, agent) in complex.agents().iter().enumerate() {
            let mut rep_of_vertex: HashMap<usize, usize> = HashMap::new();
            let mut assignment = vec![0usize; complex.facet_count()];
            for (w, facet) in complex.facets().iter().enumerate() {
                let rep = *rep_of_vertex.entry(facet[color]).or_insert(w);
                assignment[w] = rep;
            }
            classes.insert(agent.clone(), assignment);
        }
        EpistemicFrame::from_classes(complex.agents().to_vec(), worlds, classes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FrameJson::from(self)).expect("frame serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: FrameJson = serde_json::from_str(text)?;
        let agents = json.relations.keys().cloned().collect();
        EpistemicFrame::from_generators(agents, json.worlds, &json.relations)
    }
}

/// Wire form: `{"worlds":[ids],"relations":{"a":[[w,w'],...]}}` storing a
/// generating set per agent; the closure is computed on load.
#[derive(Serialize, Deserialize)]
struct FrameJson {
    worlds: Vec<String>,
    relations: BTreeMap<AgentId, Vec<(String, String)>>,
}

impl From<&EpistemicFrame> for FrameJson {
    fn from(frame: &EpistemicFrame) -> Self {
        let mut relations = BTreeMap::new();
        for agent in &frame.agents {
            let classes = &frame.classes[agent];
            let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (w, &rep) in classes.iter().enumerate() {
                members.entry(rep).or_default().push(w);
            }
            let mut pairs = Vec::new();
            for group in members.values() {
                for pair in group.windows(2) {
                    pairs.push((frame.worlds[pair[0]].clone(), frame.worlds[pair[1]].clone()));
                }
            }
            relations.insert(agent.clone(), pairs);
        }
        FrameJson {
            worlds: frame.worlds.clone(),
            relations,
        }
    }
}

fn partition_from_pairs(n: usize, pairs: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (x, y) in pairs {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        if rx != ry {
            parent[rx.max(ry)] = rx.min(ry);
        }
    }
    (0..n).map(|w| find(&mut parent, w)).collect()
}
