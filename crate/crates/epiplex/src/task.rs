//! Task triples (input complex, output complex, specification relation),
//! decision maps, the solvability search, product update, and the
//! knowledge-gain obstruction checker.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::complex::{ChromaticComplex, Vertex};
use crate::error::{Error, Result};
use crate::logic::{is_positive, Formula, ModelChecker};
use crate::state::{AgentId, LocalState, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Consensus,
    Majority0,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Consensus => "consensus",
            TaskKind::Majority0 => "majority0",
        }
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consensus" => Ok(TaskKind::Consensus),
            "majority0" => Ok(TaskKind::Majority0),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// The complex of all binary input assignments: one vertex per
/// (agent, value), one facet per assignment, `2^n` facets in total.
pub fn binary_input_complex(agents: &[AgentId]) -> Result<ChromaticComplex> {
    let mut agents = agents.to_vec();
    agents.sort();
    agents.dedup();
    if agents.is_empty() {
        return Err(Error::NoAgents);
    }
    let n = agents.len();
    let mut vertices = Vec::with_capacity(2 * n);
    for agent in &agents {
        for value in 0..=1u32 {
            vertices.push(Vertex::new(
                format!("{agent}{value}"),
                agent.clone(),
                LocalState::input(agent.clone(), value),
            ));
        }
    }
    let facets: Vec<Vec<String>> = (0..(1u32 << n))
        .map(|mask| {
            agents
                .iter()
                .enumerate()
                .map(|(k, agent)| format!("{agent}{}", (mask >> k) & 1))
                .collect()
        })
        .collect();
    ChromaticComplex::build(agents, vertices, facets)
}

/// A distributed task: input complex `I`, output complex `O` whose vertices
/// carry decision values, and the specification `delta` relating each input
/// facet to its allowed output facets.
#[derive(Debug, Clone)]
pub struct Task {
    name: String,
    input: ChromaticComplex,
    output: ChromaticComplex,
    delta: Vec<Vec<usize>>,
    /// Decision tuple (in color order) of each output facet.
    output_tuples: Vec<Vec<Value>>,
    tuple_index: HashMap<Vec<Value>, usize>,
}

/// Decision value carried by an output-complex vertex. An input complex
/// reused as an output complex carries its input values as decisions.
fn decision_of(state: &LocalState) -> Option<Value> {
    state.entry("decision").or_else(|| state.entry("input"))
}

impl Task {
    /// Binds an input complex, output complex, and specification into a
    /// task, checking that `delta` is total and every image facet exists.
    pub fn new(
        name: impl Into<String>,
        input: ChromaticComplex,
        output: ChromaticComplex,
        delta: Vec<Vec<usize>>,
    ) -> Result<Task> {
        if delta.len() != input.facet_count() {
            return Err(Error::ShapeMismatch(format!(
                "delta covers {} of {} input facets",
                delta.len(),
                input.facet_count()
            )));
        }
        if let Some(&bad) = delta.iter().flatten().find(|&&o| o >= output.facet_count()) {
            return Err(Error::UnknownFacet(bad));
        }
        let mut output_tuples = Vec::with_capacity(output.facet_count());
        for facet in output.facets() {
            let mut tuple = Vec::with_capacity(facet.len());
            for &v in facet {
                let value = decision_of(&output.vertex(v).state).ok_or_else(|| {
                    Error::ShapeMismatch(format!(
                        "output vertex `{}` carries no decision value",
                        output.vertex(v).id
                    ))
                })?;
                tuple.push(value);
            }
            output_tuples.push(tuple);
        }
        let tuple_index = output_tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Task {
            name: name.into(),
            input,
            output,
            delta,
            output_tuples,
            tuple_index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input(&self) -> &ChromaticComplex {
        &self.input
    }

    pub fn output(&self) -> &ChromaticComplex {
        &self.output
    }

    pub fn delta(&self) -> &[Vec<usize>] {
        &self.delta
    }

    pub fn output_tuple(&self, facet: usize) -> &[Value] {
        &self.output_tuples[facet]
    }

    pub fn agents(&self) -> &[AgentId] {
        self.input.agents()
    }
}

/// Builds one of the two binary tasks over the given agents.
///
/// Consensus: the output complex has the all-0 and all-1 facets; an input
/// facet maps to `all-v` for every value `v` it contains. Majority
/// consensus (`majority0`): the output complex additionally contains every
/// mixed assignment with a strict majority of 0s, and an input facet maps
/// to every output facet whose value set is contained in its own (validity).
pub fn make_task(kind: TaskKind, agents: &[AgentId]) -> Result<Task> {
    let mut agents = agents.to_vec();
    agents.sort();
    agents.dedup();
    let n = agents.len();
    match kind {
        TaskKind::Consensus => {
            if n < 1 {
                return Err(Error::UnsupportedAgentCount(n));
            }
        }
        TaskKind::Majority0 => {
            if n < 2 {
                return Err(Error::UnsupportedAgentCount(n));
            }
        }
    }
    let input = binary_input_complex(&agents)?;

    let admissible = |bits: &[Value]| -> bool {
        let zeros = bits.iter().filter(|&&b| b == 0).count();
        let uniform = zeros == 0 || zeros == bits.len();
        match kind {
            TaskKind::Consensus => uniform,
            TaskKind::Majority0 => uniform || zeros * 2 > bits.len(),
        }
    };

    let mut vertices = Vec::new();
    for agent in &agents {
        for value in 0..=1u32 {
            let mut entries = BTreeMap::new();
            entries.insert("decision".to_string(), value);
            vertices.push(Vertex::new(
                format!("{agent}d{value}"),
                agent.clone(),
                LocalState::record(agent.clone(), entries),
            ));
        }
    }
    let mut facets = Vec::new();
    for mask in 0..(1u32 << n) {
        let bits: Vec<Value> = (0..n).map(|k| (mask >> k) & 1).collect();
        if admissible(&bits) {
            facets.push(
                agents
                    .iter()
                    .zip(&bits)
                    .map(|(agent, v)| format!("{agent}d{v}"))
                    .collect::<Vec<String>>(),
            );
        }
    }
    let output = ChromaticComplex::build(agents.clone(), vertices, facets)?;

    // Validity closure: an output facet is allowed when its value set is
    // contained in the input facet's value set. Uniform inputs map only to
    // their own uniform output; mixed inputs reach everything admissible.
    let value_set = |c: &ChromaticComplex, facet: &[usize], key: &str| -> BTreeSet<Value> {
        facet
            .iter()
            .filter_map(|&v| c.vertex(v).state.entry(key))
            .collect()
    };
    let mut delta = Vec::with_capacity(input.facet_count());
    for in_facet in input.facets() {
        let inputs = value_set(&input, in_facet, "input");
        let allowed: Vec<usize> = output
            .facets()
            .iter()
            .enumerate()
            .filter(|(_, out_facet)| value_set(&output, out_facet, "decision").is_subset(&inputs))
            .map(|(o, _)| o)
            .collect();
        delta.push(allowed);
    }
    Task::new(kind.name(), input, output, delta)
}

impl Task {
    /// The product update of the task: one vertex per (input vertex,
    /// decision value) pair of matching color and one facet per `(i, o)`
    /// with `o` allowed for `i`, paired vertex-wise. Atoms about inputs and
    /// decisions are both evaluable on the result; the carrier of a product
    /// facet is its input facet.
    pub fn product_update(&self) -> ChromaticComplex {
        let agents = self.agents();
        let mut keys: BTreeSet<(usize, String)> = BTreeSet::new();
        let mut states: BTreeMap<(usize, String), LocalState> = BTreeMap::new();
        let mut facets: Vec<(Vec<(usize, String)>, usize)> = Vec::new();
        for (i, in_facet) in self.input.facets().iter().enumerate() {
            for &o in &self.delta[i] {
                let tuple = &self.output_tuples[o];
                let mut facet_keys = Vec::with_capacity(agents.len());
                for (color, (&iv, &decision)) in in_facet.iter().zip(tuple).enumerate() {
                    let state = LocalState::Paired {
                        agent: agents[color].clone(),
                        input: Box::new(self.input.vertex(iv).state.clone()),
                        decision,
                    };
                    let key = (color, state.canonical());
                    keys.insert(key.clone());
                    states.entry(key.clone()).or_insert(state);
                    facet_keys.push(key);
                }
                facets.push((facet_keys, i));
            }
        }
        let mut counter = vec![0usize; agents.len()];
        let mut ids: BTreeMap<(usize, String), String> = BTreeMap::new();
        let mut vertices = Vec::with_capacity(keys.len());
        for key in keys {
            let color = key.0;
            let id = format!("{}_{:04}", agents[color], counter[color]);
            counter[color] += 1;
            vertices.push(Vertex::new(
                id.clone(),
                agents[color].clone(),
                states.remove(&key).expect("state recorded for key"),
            ));
            ids.insert(key, id);
        }
        let facet_ids: Vec<Vec<String>> = facets
            .iter()
            .map(|(keys, _)| keys.iter().map(|k| ids[k].clone()).collect())
            .collect();
        let carrier: Vec<usize> = facets.iter().map(|&(_, i)| i).collect();
        ChromaticComplex::build_with_carrier(agents.to_vec(), vertices, facet_ids, Some(carrier))
            .expect("product update complex is valid")
    }

    /// Locates each product facet's (input facet, output facet) pair.
    pub fn product_pairs(&self, product: &ChromaticComplex) -> Result<Vec<(usize, usize)>> {
        let carrier = product.carrier().ok_or(Error::MissingCarrier)?;
        let mut pairs = Vec::with_capacity(product.facet_count());
        for (w, facet) in product.facets().iter().enumerate() {
            let tuple: Vec<Value> = facet
                .iter()
                .map(|&v| {
                    product.vertex(v).state.entry("decision").ok_or_else(|| {
                        Error::ShapeMismatch("product vertex without decision".into())
                    })
                })
                .collect::<Result<_>>()?;
            let o = *self
                .tuple_index
                .get(&tuple)
                .ok_or_else(|| Error::ShapeMismatch(format!("tuple {tuple:?} not in output")))?;
            pairs.push((carrier[w], o));
        }
        Ok(pairs)
    }
}

/// A per-vertex decision assignment over a protocol complex (the simplicial
/// map candidate), indexed in the complex's canonical vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionMap {
    values: Vec<Value>,
}

impl DecisionMap {
    pub fn new(values: Vec<Value>) -> Self {
        DecisionMap { values }
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value(&self, vertex: usize) -> Value {
        self.values[vertex]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `{"vertexId": value, ...}` keyed by vertex id.
    pub fn to_json(&self, complex: &ChromaticComplex) -> String {
        let map: BTreeMap<&str, Value> = complex
            .vertices()
            .iter()
            .zip(&self.values)
            .map(|(v, &d)| (v.id.as_str(), d))
            .collect();
        serde_json::to_string_pretty(&map).expect("decision map serializes")
    }

    pub fn from_json(complex: &ChromaticComplex, text: &str) -> Result<DecisionMap> {
        let map: BTreeMap<String, Value> = serde_json::from_str(text)?;
        let mut values = Vec::with_capacity(complex.vertex_count());
        for v in complex.vertices() {
            match map.get(&v.id) {
                Some(&d) => values.push(d),
                None => return Err(Error::PartialMap(format!("vertex `{}` unassigned", v.id))),
            }
        }
        for id in map.keys() {
            if complex.vertex_index_by_id(id).is_none() {
                return Err(Error::PartialMap(format!("unknown vertex `{id}`")));
            }
        }
        Ok(DecisionMap { values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationReason {
    NotAnOutputFacet,
    NotInDelta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub facet: usize,
    pub decisions: Vec<Value>,
    pub reason: ViolationReason,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks whether the decided tuple of every protocol facet is an output
/// facet allowed by the specification for that facet's carrier.
pub fn validate_decision_map(
    task: &Task,
    protocol: &ChromaticComplex,
    map: &DecisionMap,
) -> Result<ValidationReport> {
    let carrier = protocol.carrier().ok_or(Error::MissingCarrier)?;
    if map.len() != protocol.vertex_count() {
        return Err(Error::PartialMap(format!(
            "{} values for {} vertices",
            map.len(),
            protocol.vertex_count()
        )));
    }
    let mut violations = Vec::new();
    for (w, facet) in protocol.facets().iter().enumerate() {
        if carrier[w] >= task.input.facet_count() {
            return Err(Error::CarrierOutOfRange {
                facet: w,
                carrier: carrier[w],
                inputs: task.input.facet_count(),
            });
        }
        let decisions: Vec<Value> = facet.iter().map(|&v| map.value(v)).collect();
        match task.tuple_index.get(&decisions) {
            None => violations.push(Violation {
                facet: w,
                decisions,
                reason: ViolationReason::NotAnOutputFacet,
            }),
            Some(&o) => {
                if !task.delta[carrier[w]].contains(&o) {
                    violations.push(Violation {
                        facet: w,
                        decisions,
                        reason: ViolationReason::NotInDelta,
                    });
                }
            }
        }
    }
    Ok(ValidationReport {
        valid: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Solvable(DecisionMap),
    Unsolvable { nodes_explored: u64 },
}

impl SearchOutcome {
    pub fn is_solvable(&self) -> bool {
        matches!(self, SearchOutcome::Solvable(_))
    }

    /// `{"vertexId": value, ...}` for a witness, or the unsolvability
    /// certificate `{"verdict":"unsolvable","nodesExplored":N}`.
    pub fn to_json(&self, protocol: &ChromaticComplex) -> String {
        match self {
            SearchOutcome::Solvable(map) => map.to_json(protocol),
            SearchOutcome::Unsolvable { nodes_explored } => serde_json::to_string_pretty(
                &serde_json::json!({"verdict": "unsolvable", "nodesExplored": nodes_explored}),
            )
            .expect("certificate serializes"),
        }
    }
}

/// Deterministic backtracking over the protocol vertices in canonical order
/// (value order 0 before 1), pruning with per-facet constraint propagation:
/// a facet's allowed tuples are filtered against the current domains to a
/// fixpoint, and an emptied domain refutes the branch. Returns the first
/// valid decision map found, or the number of value assignments explored.
pub fn search_decision_map(task: &Task, protocol: &ChromaticComplex) -> Result<SearchOutcome> {
    let carrier = protocol.carrier().ok_or(Error::MissingCarrier)?;
    for (w, &c) in carrier.iter().enumerate() {
        if c >= task.input.facet_count() {
            return Err(Error::CarrierOutOfRange {
                facet: w,
                carrier: c,
                inputs: task.input.facet_count(),
            });
        }
    }

    // Global value universe and per-color domains from the output complex.
    let mut universe: Vec<Value> = task
        .output
        .vertices()
        .iter()
        .filter_map(|v| decision_of(&v.state))
        .collect();
    universe.sort_unstable();
    universe.dedup();
    assert!(universe.len() <= 32, "decision universe exceeds mask width");
    let bit_of: HashMap<Value, u32> = universe
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, 1u32 << i))
        .collect();

    let n = task.agents().len();
    let mut color_mask = vec![0u32; n];
    for v in task.output.vertices() {
        let color = task.output.color_index(&v.color)?;
        color_mask[color] |= bit_of[&decision_of(&v.state).expect("validated in Task::new")];
    }
    let vertex_color: Vec<usize> = protocol
        .vertices()
        .iter()
        .map(|v| protocol.color_index(&v.color))
        .collect::<Result<_>>()?;

    // Allowed decision tuples per facet, as bit rows per color position.
    let allowed: Vec<Vec<Vec<u32>>> = (0..protocol.facet_count())
        .map(|w| {
            task.delta[carrier[w]]
                .iter()
                .map(|&o| {
                    task.output_tuples[o]
                        .iter()
                        .map(|v| bit_of[v])
                        .collect::<Vec<u32>>()
                })
                .collect()
        })
        .collect();

    let facets = protocol.facets();
    let mut domains: Vec<u32> = (0..protocol.vertex_count())
        .map(|v| color_mask[vertex_color[v]])
        .collect();
    let mut nodes: u64 = 0;

    let propagate = |domains: &mut Vec<u32>, dirty: Vec<usize>| -> bool {
        let mut queue: std::collections::VecDeque<usize> = dirty.into();
        let mut queued = vec![false; facets.len()];
        for &f in &queue {
            queued[f] = true;
        }
        while let Some(fi) = queue.pop_front() {
            queued[fi] = false;
            let facet = &facets[fi];
            let mut masks = vec![0u32; facet.len()];
            for tuple in &allowed[fi] {
                if tuple
                    .iter()
                    .zip(facet.iter())
                    .all(|(&bit, &v)| domains[v] & bit != 0)
                {
                    for (slot, &bit) in masks.iter_mut().zip(tuple) {
                        *slot |= bit;
                    }
                }
            }
            for (k, &v) in facet.iter().enumerate() {
                let next = domains[v] & masks[k];
                if next == 0 {
                    return false;
                }
                if next != domains[v] {
                    domains[v] = next;
                    for &fj in protocol.facets_of_vertex(v) {
                        if !queued[fj] {
                            queued[fj] = true;
                            queue.push_back(fj);
                        }
                    }
                }
            }
        }
        true
    };

    if !propagate(&mut domains, (0..facets.len()).collect()) {
        return Ok(SearchOutcome::Unsolvable { nodes_explored: 0 });
    }

    // Iterative DFS with cloned domains per decision point; complexes at
    // this scale make the clones cheap and the code simple.
    fn dfs(
        vertex: usize,
        domains: &[u32],
        universe: &[Value],
        protocol: &ChromaticComplex,
        propagate: &impl Fn(&mut Vec<u32>, Vec<usize>) -> bool,
        nodes: &mut u64,
    ) -> Option<Vec<u32>> {
        let mut vertex = vertex;
        while vertex < domains.len() && domains[vertex].count_ones() == 1 {
            vertex += 1;
        }
        if vertex == domains.len() {
            return Some(domains.to_vec());
        }
        for (i, _) in universe.iter().enumerate() {
            let bit = 1u32 << i;
            if domains[vertex] & bit == 0 {
                continue;
            }
            *nodes += 1;
            let mut next = domains.to_vec();
            next[vertex] = bit;
            if propagate(&mut next, protocol.facets_of_vertex(vertex).to_vec()) {
                if let Some(solution) =
                    dfs(vertex + 1, &next, universe, protocol, propagate, nodes)
                {
                    return Some(solution);
                }
            }
        }
        None
    }

    match dfs(0, &domains, &universe, protocol, &propagate, &mut nodes) {
        Some(solution) => {
            let values: Vec<Value> = solution
                .iter()
                .map(|&mask| universe[mask.trailing_zeros() as usize])
                .collect();
            let map = DecisionMap::new(values);
            debug_assert!(validate_decision_map(task, protocol, &map)?.valid);
            Ok(SearchOutcome::Solvable(map))
        }
        None => Ok(SearchOutcome::Unsolvable {
            nodes_explored: nodes,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstructionVerdict {
    ObstructionConfirmed,
    NotAnObstruction,
}

/// Outcome of the logical-obstruction recipe at one witness world: the
/// formula must be positive, false at the witness, and true at every product
/// facet over the witness's carrier (every image any decision map could
/// choose). All three together contradict knowledge gain, so no decision
/// map exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObstructionReport {
    pub formula: String,
    pub witness_world: usize,
    pub positivity_ok: bool,
    pub false_at_witness: bool,
    pub true_at_all_images: bool,
    pub verdict: ObstructionVerdict,
}

pub fn check_obstruction(
    task: &Task,
    protocol: &ChromaticComplex,
    formula: &Formula,
    witness: usize,
) -> Result<ObstructionReport> {
    let carrier = protocol.carrier().ok_or(Error::MissingCarrier)?;
    if witness >= protocol.facet_count() {
        return Err(Error::UnknownFacet(witness));
    }
    let input_facet = carrier[witness];
    if input_facet >= task.input.facet_count() {
        return Err(Error::CarrierOutOfRange {
            facet: witness,
            carrier: input_facet,
            inputs: task.input.facet_count(),
        });
    }

    let positivity_ok = is_positive(formula);
    let false_at_witness = !ModelChecker::new(protocol).check(witness, formula)?;

    let product = task.product_update();
    let product_checker = ModelChecker::new(&product);
    let product_carrier = product.carrier().expect("product update carries carriers");
    let mut true_at_all_images = true;
    for (w, &car) in product_carrier.iter().enumerate() {
        if car == input_facet && !product_checker.check(w, formula)? {
            true_at_all_images = false;
            break;
        }
    }

    let verdict = if positivity_ok && false_at_witness && true_at_all_images {
        ObstructionVerdict::ObstructionConfirmed
    } else {
        ObstructionVerdict::NotAnObstruction
    };
    Ok(ObstructionReport {
        formula: formula.to_string(),
        witness_world: witness,
        positivity_ok,
        false_at_witness,
        true_at_all_images,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agents3() -> Vec<AgentId> {
        vec![AgentId::new("a"), AgentId::new("b"), AgentId::new("c")]
    }

    #[test]
    fn binary_input_shapes() {
        let c = binary_input_complex(&agents3()).unwrap();
        assert_eq!(c.facet_count(), 8);
        assert_eq!(c.vertex_count(), 6);
        assert_eq!(c.euler_characteristic(), 2);
        assert_eq!(c.face_vector(), vec![6, 12, 8]);

        let one = binary_input_complex(&[AgentId::new("solo")]).unwrap();
        assert_eq!(one.facet_count(), 2);
        assert_eq!(one.vertex_count(), 2);

        // Two agents: four edges forming a cycle (every vertex in exactly
        // two facets, one component, Euler characteristic 0).
        let two = binary_input_complex(&[AgentId::new("a"), AgentId::new("b")]).unwrap();
        assert_eq!(two.facet_count(), 4);
        assert_eq!(two.vertex_count(), 4);
        assert_eq!(two.euler_characteristic(), 0);
        for v in 0..two.vertex_count() {
            assert_eq!(two.facets_of_vertex(v).len(), 2);
        }
        let singles: Vec<BTreeSet<AgentId>> = ["a", "b"]
            .iter()
            .map(|&x| [AgentId::new(x)].into_iter().collect())
            .collect();
        assert_eq!(two.reachable_worlds(0, &singles).unwrap().len(), 4);
    }

    #[test]
    fn consensus_task_shape() {
        let t = make_task(TaskKind::Consensus, &agents3()).unwrap();
        assert_eq!(t.output().facet_count(), 2);
        // Uniform inputs are pinned, mixed inputs choose either pole.
        for (i, facet) in t.input().facets().iter().enumerate() {
            let values: BTreeSet<Value> = facet
                .iter()
                .filter_map(|&v| t.input().vertex(v).state.entry("input"))
                .collect();
            assert_eq!(t.delta()[i].len(), values.len());
        }
    }

    #[test]
    fn majority_task_shape() {
        let t = make_task(TaskKind::Majority0, &agents3()).unwrap();
        assert_eq!(t.output().facet_count(), 5);
        for (i, facet) in t.input().facets().iter().enumerate() {
            let values: BTreeSet<Value> = facet
                .iter()
                .filter_map(|&v| t.input().vertex(v).state.entry("input"))
                .collect();
            let expect = if values.len() == 1 { 1 } else { 5 };
            assert_eq!(t.delta()[i].len(), expect, "input facet {i}");
            if values.len() == 1 {
                let o = t.delta()[i][0];
                let v = *values.iter().next().unwrap();
                assert_eq!(t.output_tuple(o), vec![v; 3]);
            }
        }
        assert!(matches!(
            make_task(TaskKind::Majority0, &[AgentId::new("a")]),
            Err(Error::UnsupportedAgentCount(1))
        ));
    }

    #[test]
    fn delta_respects_validity() {
        for kind in [TaskKind::Consensus, TaskKind::Majority0] {
            let t = make_task(kind, &agents3()).unwrap();
            for (i, allowed) in t.delta().iter().enumerate() {
                let inputs: BTreeSet<Value> = t.input().facets()[i]
                    .iter()
                    .filter_map(|&v| t.input().vertex(v).state.entry("input"))
                    .collect();
                for &o in allowed {
                    let outs: BTreeSet<Value> = t.output_tuple(o).iter().copied().collect();
                    assert!(outs.is_subset(&inputs));
                }
            }
        }
    }

    #[test]
    fn product_update_counts() {
        let majority = make_task(TaskKind::Majority0, &agents3()).unwrap();
        assert_eq!(majority.product_update().facet_count(), 32);
        let consensus = make_task(TaskKind::Consensus, &agents3()).unwrap();
        assert_eq!(consensus.product_update().facet_count(), 14);
    }

    #[test]
    fn identity_task_product_is_isomorphic_to_input() {
        let input = binary_input_complex(&agents3()).unwrap();
        let delta: Vec<Vec<usize>> = (0..input.facet_count()).map(|i| vec![i]).collect();
        let t = Task::new("identity", input.clone(), input.clone(), delta).unwrap();
        let product = t.product_update();
        assert_eq!(product.facet_count(), input.facet_count());
        assert_eq!(product.vertex_count(), input.vertex_count());
        // Same facet incidence structure under the vertex pairing.
        let pairs = t.product_pairs(&product).unwrap();
        assert!(pairs.iter().all(|&(i, o)| i == o));
    }

    #[test]
    fn constant_zero_map_violates_validity_on_all_one_input() {
        let t = make_task(TaskKind::Consensus, &agents3()).unwrap();
        let p = {
            // Use the input complex itself as a "protocol" with the identity
            // carrier.
            let facets: Vec<Vec<String>> = t
                .input()
                .facets()
                .iter()
                .map(|f| f.iter().map(|&v| t.input().vertex(v).id.clone()).collect())
                .collect();
            ChromaticComplex::build_with_carrier(
                t.input().agents().to_vec(),
                t.input().vertices().to_vec(),
                facets,
                Some((0..t.input().facet_count()).collect()),
            )
            .unwrap()
        };
        let map = DecisionMap::new(vec![0; p.vertex_count()]);
        let report = validate_decision_map(&t, &p, &map).unwrap();
        assert!(!report.valid);
        assert!(report
            .violations
            .iter()
            .any(|v| v.reason == ViolationReason::NotInDelta));
        // The offending facet is the all-1 input deciding all-0.
        let all1 = report
            .violations
            .iter()
            .find(|v| {
                let carrier = p.carrier().unwrap()[v.facet];
                t.input().facets()[carrier]
                    .iter()
                    .all(|&vt| t.input().vertex(vt).state.entry("input") == Some(1))
            })
            .expect("all-1 facet violates");
        assert_eq!(all1.decisions, vec![0, 0, 0]);
    }

    #[test]
    fn missing_carrier_is_reported() {
        let t = make_task(TaskKind::Consensus, &agents3()).unwrap();
        let map = DecisionMap::new(vec![0; t.input().vertex_count()]);
        assert!(matches!(
            validate_decision_map(&t, t.input(), &map),
            Err(Error::MissingCarrier)
        ));
        assert!(matches!(
            search_decision_map(&t, t.input()),
            Err(Error::MissingCarrier)
        ));
    }

    #[test]
    fn decision_map_json_round_trip_and_partialness() {
        let input = binary_input_complex(&agents3()).unwrap();
        let map = DecisionMap::new(vec![0, 1, 0, 1, 0, 1]);
        let text = map.to_json(&input);
        let back = DecisionMap::from_json(&input, &text).unwrap();
        assert_eq!(map, back);
        assert!(matches!(
            DecisionMap::from_json(&input, "{\"a0\": 0}"),
            Err(Error::PartialMap(_))
        ));
    }
}
