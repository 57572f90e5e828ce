//! Chromatic simplicial complexes: construction and validation, faces, facet
//! adjacency, reachability, and the Euler characteristic.
//!
//! A complex stores only its facets (worlds); lower-dimensional faces are
//! derived on demand by downward closure. Complexes are immutable after
//! construction and every query is pure.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{AgentId, LocalState};

/// One local state of one agent: a 0-simplex of the complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub color: AgentId,
    pub state: LocalState,
}

impl Vertex {
    pub fn new(id: impl Into<String>, color: impl Into<AgentId>, state: LocalState) -> Self {
        Vertex {
            id: id.into(),
            color: color.into(),
            state,
        }
    }
}

/// A pure chromatic simplicial complex over a fixed agent set.
///
/// Invariants (checked by [`ChromaticComplex::build`]): vertex ids are
/// unique, every facet has exactly one vertex of each color, every vertex
/// lies in at least one facet, and both the vertex list and the facet list
/// are canonically ordered so equal complexes have identical representations.
#[derive(Debug, Clone)]
pub struct ChromaticComplex {
    agents: Vec<AgentId>,
    vertices: Vec<Vertex>,
    /// Facets as sorted vertex indices; entry `k` is the vertex colored
    /// `agents[k]`.
    facets: Vec<Vec<usize>>,
    /// Optional per-facet input-facet annotation (the carrier map).
    carrier: Option<Vec<usize>>,
    /// Derived: facets containing each vertex.
    vertex_facets: Vec<Vec<usize>>,
}

impl PartialEq for ChromaticComplex {
    fn eq(&self, other: &Self) -> bool {
        self.agents == other.agents
            && self.vertices == other.vertices
            && self.facets == other.facets
            && self.carrier == other.carrier
    }
}

impl Eq for ChromaticComplex {}

impl ChromaticComplex {
    pub fn build(
        agents: Vec<AgentId>,
        vertices: Vec<Vertex>,
        facets: Vec<Vec<String>>,
    ) -> Result<Self> {
        Self::build_with_carrier(agents, vertices, facets, None)
    }

    /// Validates and canonicalizes. Vertices are sorted by
    /// `(color, canonical state, id)`, facets by their sorted vertex-id
    /// tuples; duplicate facets collapse. The optional carrier rides along
    /// with the facet permutation.
    pub fn build_with_carrier(
        mut agents: Vec<AgentId>,
        vertices: Vec<Vertex>,
        facets: Vec<Vec<String>>,
        carrier: Option<Vec<usize>>,
    ) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::NoAgents);
        }
        agents.sort();
        agents.dedup();
        let color_of: BTreeMap<&AgentId, usize> =
            agents.iter().enumerate().map(|(i, a)| (a, i)).collect();

        let mut id_to_index: HashMap<&str, usize> = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if id_to_index.insert(v.id.as_str(), i).is_some() {
                return Err(Error::DuplicateVertexId(v.id.clone()));
            }
            if !color_of.contains_key(&v.color) {
                return Err(Error::UnknownAgent(v.color.to_string()));
            }
        }

        if let Some(car) = &carrier {
            if car.len() != facets.len() {
                return Err(Error::PartialCarrier {
                    covered: car.len(),
                    facets: facets.len(),
                });
            }
        }

        // Resolve and validate each facet against the old vertex indices.
        let mut resolved: Vec<Vec<usize>> = Vec::with_capacity(facets.len());
        for (fi, ids) in facets.iter().enumerate() {
            let mut members = Vec::with_capacity(ids.len());
            let mut colors_seen: BTreeSet<usize> = BTreeSet::new();
            for id in ids {
                let &vi = id_to_index
                    .get(id.as_str())
                    .ok_or_else(|| Error::DanglingVertexRef(id.clone()))?;
                let color = color_of[&vertices[vi].color];
                if !colors_seen.insert(color) {
                    return Err(Error::IllColoredFacet {
                        facet: fi,
                        color: vertices[vi].color.clone(),
                    });
                }
                members.push(vi);
            }
            if members.len() != agents.len() {
                return Err(Error::ImpureComplex {
                    facet: fi,
                    size: members.len(),
                    expected: agents.len(),
                });
            }
            resolved.push(members);
        }

        // Canonical vertex order.
        let mut order: Vec<usize> = (0..vertices.len()).collect();
        order.sort_by(|&i, &j| {
            let ki = (&vertices[i].color, vertices[i].state.canonical(), &vertices[i].id);
            let kj = (&vertices[j].color, vertices[j].state.canonical(), &vertices[j].id);
            ki.cmp(&kj)
        });
        let mut new_index = vec![0usize; vertices.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let vertices: Vec<Vertex> = {
            let mut by_old: Vec<Option<Vertex>> = vertices.into_iter().map(Some).collect();
            order
                .iter()
                .map(|&old| by_old[old].take().expect("each old index used once"))
                .collect()
        };

        // Canonical facet order: lexicographic on the facet's sorted vertex ids.
        let mut keyed: Vec<(Vec<String>, Vec<usize>, Option<usize>)> = resolved
            .into_iter()
            .enumerate()
            .map(|(fi, members)| {
                let mut members: Vec<usize> = members.into_iter().map(|old| new_index[old]).collect();
                members.sort_unstable();
                let mut ids: Vec<String> =
                    members.iter().map(|&v| vertices[v].id.clone()).collect();
                ids.sort();
                (ids, members, carrier.as_ref().map(|c| c[fi]))
            })
            .collect();
        keyed.sort();

        let mut facet_list: Vec<Vec<usize>> = Vec::with_capacity(keyed.len());
        let mut carrier_list: Vec<usize> = Vec::new();
        for (fi, (_, members, car)) in keyed.into_iter().enumerate() {
            if facet_list.last() == Some(&members) {
                // Deduplicated; a conflicting carrier would be ambiguous.
                if carrier.is_some() && carrier_list.last() != car.as_ref() {
                    return Err(Error::CarrierConflict(fi));
                }
                continue;
            }
            facet_list.push(members);
            if let Some(car) = car {
                carrier_list.push(car);
            }
        }

        let mut vertex_facets: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
        for (fi, facet) in facet_list.iter().enumerate() {
            for &v in facet {
                vertex_facets[v].push(fi);
            }
        }
        if let Some(v) = vertex_facets.iter().position(|fs| fs.is_empty()) {
            return Err(Error::IsolatedVertex(vertices[v].id.clone()));
        }

        let complex = ChromaticComplex {
            agents,
            vertices,
            facets: facet_list,
            carrier: carrier.map(|_| carrier_list),
            vertex_facets,
        };
        debug_assert!(complex
            .facets
            .iter()
            .all(|f| f
                .iter()
                .enumerate()
                .all(|(k, &v)| complex.vertices[v].color == complex.agents[k])));
        Ok(complex)
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    pub fn facet(&self, w: usize) -> Result<&[usize]> {
        self.facets
            .get(w)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownFacet(w))
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn carrier(&self) -> Option<&[usize]> {
        self.carrier.as_deref()
    }

    /// Dimension of every facet (purity), i.e. `|agents| - 1`.
    pub fn dimension(&self) -> usize {
        self.agents.len() - 1
    }

    pub fn color_index(&self, agent: &AgentId) -> Result<usize> {
        self.agents
            .binary_search(agent)
            .map_err(|_| Error::UnknownAgent(agent.to_string()))
    }

    /// The vertex of the given color inside a facet.
    pub fn facet_vertex(&self, w: usize, color: usize) -> usize {
        self.facets[w][color]
    }

    /// Facets containing the given vertex, in canonical order.
    pub fn facets_of_vertex(&self, v: usize) -> &[usize] {
        &self.vertex_facets[v]
    }

    pub fn vertex_index_by_id(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// The shared face of two worlds, as a vertex set together with its
    /// color set.
    pub fn facet_intersection(&self, w1: usize, w2: usize) -> Result<(Vec<usize>, Vec<AgentId>)> {
        let f1 = self.facet(w1)?;
        let f2 = self.facet(w2)?;
        let shared: Vec<usize> = f1.iter().copied().filter(|v| f2.contains(v)).collect();
        let colors = shared
            .iter()
            .map(|&v| self.vertices[v].color.clone())
            .collect();
        Ok((shared, colors))
    }

    /// Transitive closure of the step relation "the two worlds share the
    /// A-colored face of both, for some group A in `alpha`", computed as a
    /// breadth-first search from `start` in canonical facet order. The
    /// result is sorted and always contains `start`.
    pub fn reachable_worlds(
        &self,
        start: usize,
        alpha: &[BTreeSet<AgentId>],
    ) -> Result<Vec<usize>> {
        if start >= self.facets.len() {
            return Err(Error::UnknownFacet(start));
        }
        let groups = self.resolve_groups(alpha)?;

        // Facets that agree on a group's face form a clique of the step
        // relation; bucket them per group by the face's vertex tuple.
        let mut buckets: Vec<HashMap<Vec<usize>, Vec<usize>>> = Vec::with_capacity(groups.len());
        for group in &groups {
            let mut by_face: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
            for (fi, facet) in self.facets.iter().enumerate() {
                let face: Vec<usize> = group.iter().map(|&c| facet[c]).collect();
                by_face.entry(face).or_default().push(fi);
            }
            buckets.push(by_face);
        }

        let mut seen = vec![false; self.facets.len()];
        let mut spent: Vec<HashSet<Vec<usize>>> = vec![HashSet::new(); groups.len()];
        let mut queue = std::collections::VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(fi) = queue.pop_front() {
            for (gi, group) in groups.iter().enumerate() {
                let face: Vec<usize> = group.iter().map(|&c| self.facets[fi][c]).collect();
                if !spent[gi].insert(face.clone()) {
                    continue;
                }
                for &next in &buckets[gi][&face] {
                    if !seen[next] {
                        seen[next] = true;
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok((0..self.facets.len()).filter(|&i| seen[i]).collect())
    }

    pub(crate) fn resolve_groups(&self, alpha: &[BTreeSet<AgentId>]) -> Result<Vec<Vec<usize>>> {
        let mut groups = Vec::with_capacity(alpha.len());
        for group in alpha {
            if group.is_empty() {
                return Err(Error::EmptyGroup);
            }
            let mut colors = Vec::with_capacity(group.len());
            for agent in group {
                colors.push(self.color_index(agent)?);
            }
            colors.sort_unstable();
            groups.push(colors);
        }
        Ok(groups)
    }

    /// Number of k-dimensional faces for each k, derived by downward
    /// closure of the facet list.
    pub fn face_vector(&self) -> Vec<usize> {
        let n = self.agents.len();
        let mut faces: HashSet<Vec<usize>> = HashSet::new();
        for facet in &self.facets {
            for mask in 1u32..(1 << n) {
                let sub: Vec<usize> = (0..n)
                    .filter(|k| mask & (1 << k) != 0)
                    .map(|k| facet[k])
                    .collect();
                faces.insert(sub);
            }
        }
        let mut counts = vec![0usize; n];
        for face in &faces {
            counts[face.len() - 1] += 1;
        }
        counts
    }

    /// Alternating sum of face counts over all dimensions; `V - E + F` for
    /// two-dimensional complexes.
    pub fn euler_characteristic(&self) -> i64 {
        self.face_vector()
            .iter()
            .enumerate()
            .map(|(dim, &count)| {
                let signed = count as i64;
                if dim % 2 == 0 {
                    signed
                } else {
                    -signed
                }
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ComplexJson::from(self)).expect("complex serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: ComplexJson = serde_json::from_str(text)?;
        json.try_into()
    }
}

/// Wire form: `{"agents":[..],"vertices":[{"id","color","state"}..],
/// "facets":[[ids]..],"carrier":{facetIndex: inputFacetIndex}}`.
#[derive(Serialize, Deserialize)]
struct ComplexJson {
    agents: Vec<AgentId>,
    vertices: Vec<Vertex>,
    facets: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    carrier: Option<BTreeMap<usize, usize>>,
}

impl From<&ChromaticComplex> for ComplexJson {
    fn from(c: &ChromaticComplex) -> Self {
        ComplexJson {
            agents: c.agents.clone(),
            vertices: c.vertices.clone(),
            facets: c
                .facets
                .iter()
                .map(|f| f.iter().map(|&v| c.vertices[v].id.clone()).collect())
                .collect(),
            carrier: c
                .carrier
                .as_ref()
                .map(|car| car.iter().copied().enumerate().collect()),
        }
    }
}

impl TryFrom<ComplexJson> for ChromaticComplex {
    type Error = Error;

    fn try_from(json: ComplexJson) -> Result<Self> {
        let carrier = match json.carrier {
            None => None,
            Some(map) => {
                let mut dense = Vec::with_capacity(json.facets.len());
                for fi in 0..json.facets.len() {
                    match map.get(&fi) {
                        Some(&input) => dense.push(input),
                        None => {
                            return Err(Error::PartialCarrier {
                                covered: map.len(),
                                facets: json.facets.len(),
                            })
                        }
                    }
                }
                Some(dense)
            }
        };
        ChromaticComplex::build_with_carrier(json.agents, json.vertices, json.facets, carrier)
    }
}
