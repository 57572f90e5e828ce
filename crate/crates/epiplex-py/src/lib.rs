//! Python bindings: a `Complex` class wrapping the chromatic complex plus
//! module-level functions for models, rounds, tasks, solvability, and the
//! bundled demos. Structured results cross the boundary as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use epiplex::{
    check_obstruction, courteous_map, export_dual_dot, iterate_rounds, knowledge_threshold_map,
    make_task, muddy, parse_formula, partial_round, search_decision_map, tas_loser_qualifies,
    tas_two_round_map, validate_decision_map, AgentId, ChromaticComplex, CommModel, DecisionMap,
    EpistemicFrame, ModelChecker, ModelKind, TaskKind,
};

fn data_err(err: epiplex::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn agent_ids(names: &[String]) -> Vec<AgentId> {
    names.iter().map(AgentId::new).collect()
}

fn model_kind(kind: &str) -> PyResult<ModelKind> {
    kind.parse().map_err(data_err)
}

fn task_kind(kind: &str) -> PyResult<TaskKind> {
    kind.parse().map_err(data_err)
}

/// A validated chromatic simplicial complex.
#[pyclass(name = "Complex", skip_from_py_object)]
#[derive(Clone)]
struct PyComplex {
    inner: ChromaticComplex,
}

#[pymethods]
impl PyComplex {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyComplex {
            inner: ChromaticComplex::from_json(text).map_err(data_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_dot(&self) -> String {
        export_dual_dot(&self.inner)
    }

    fn agents(&self) -> Vec<String> {
        self.inner.agents().iter().map(ToString::to_string).collect()
    }

    fn facet_count(&self) -> usize {
        self.inner.facet_count()
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn euler_characteristic(&self) -> i64 {
        self.inner.euler_characteristic()
    }

    /// Face counts by dimension (vertices, edges, triangles, ...).
    fn face_vector(&self) -> Vec<usize> {
        self.inner.face_vector()
    }

    fn carrier(&self) -> Option<Vec<usize>> {
        self.inner.carrier().map(<[usize]>::to_vec)
    }

    /// Vertex ids of one facet.
    fn facet(&self, world: usize) -> PyResult<Vec<String>> {
        let facet = self.inner.facet(world).map_err(data_err)?;
        Ok(facet
            .iter()
            .map(|&v| self.inner.vertex(v).id.clone())
            .collect())
    }

    /// Truth of a formula at one world.
    fn eval(&self, formula: &str, world: usize) -> PyResult<bool> {
        let formula = parse_formula(formula, self.inner.agents()).map_err(data_err)?;
        ModelChecker::new(&self.inner)
            .check(world, &formula)
            .map_err(data_err)
    }

    /// Truth of a formula at every world, in facet order.
    fn eval_all(&self, formula: &str) -> PyResult<Vec<bool>> {
        let formula = parse_formula(formula, self.inner.agents()).map_err(data_err)?;
        let values = ModelChecker::new(&self.inner)
            .eval_all(&formula)
            .map_err(data_err)?;
        Ok(values.to_vec())
    }

    /// Public announcement: the restriction to worlds satisfying the formula.
    fn announce(&self, formula: &str) -> PyResult<PyComplex> {
        let formula = parse_formula(formula, self.inner.agents()).map_err(data_err)?;
        Ok(PyComplex {
            inner: epiplex::public_announce(&self.inner, &formula).map_err(data_err)?,
        })
    }

    /// Worlds reachable from `start` through shared group-colored faces;
    /// `alpha` is a list of agent groups.
    fn reachable_worlds(&self, start: usize, alpha: Vec<Vec<String>>) -> PyResult<Vec<usize>> {
        let alpha: Vec<std::collections::BTreeSet<AgentId>> = alpha
            .iter()
            .map(|group| group.iter().map(AgentId::new).collect())
            .collect();
        self.inner.reachable_worlds(start, &alpha).map_err(data_err)
    }

    /// The dual epistemic frame as JSON.
    fn to_frame_json(&self) -> String {
        EpistemicFrame::from_complex(&self.inner).to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Complex(agents={}, vertices={}, facets={})",
            self.inner.agents().len(),
            self.inner.vertex_count(),
            self.inner.facet_count()
        )
    }
}

/// The binary input complex over the given agents (2^n facets).
#[pyfunction]
fn binary_input_complex(agents: Vec<String>) -> PyResult<PyComplex> {
    Ok(PyComplex {
        inner: epiplex::binary_input_complex(&agent_ids(&agents)).map_err(data_err)?,
    })
}

/// Number of communication graphs in a built-in model ("ub", "is", "tas").
#[pyfunction]
fn model_graph_count(kind: &str, agents: Vec<String>) -> PyResult<usize> {
    Ok(CommModel::make(model_kind(kind)?, &agent_ids(&agents))
        .map_err(data_err)?
        .len())
}

/// One full-information round of the given model.
#[pyfunction]
fn one_round(complex: &PyComplex, kind: &str) -> PyResult<PyComplex> {
    let model =
        CommModel::make(model_kind(kind)?, complex.inner.agents()).map_err(data_err)?;
    Ok(PyComplex {
        inner: epiplex::one_round(&complex.inner, &model).map_err(data_err)?,
    })
}

/// `rounds`-fold round application; zero rounds returns the complex as is.
#[pyfunction]
fn rounds(complex: &PyComplex, kind: &str, rounds: usize) -> PyResult<PyComplex> {
    let model =
        CommModel::make(model_kind(kind)?, complex.inner.agents()).map_err(data_err)?;
    Ok(PyComplex {
        inner: iterate_rounds(&complex.inner, &model, rounds).map_err(data_err)?,
    })
}

/// The refinement round over qualifying test-and-set losers.
#[pyfunction]
fn tas_partial_round(complex: &PyComplex) -> PyComplex {
    PyComplex {
        inner: partial_round(&complex.inner, &|_, state| tas_loser_qualifies(state)),
    }
}

/// The muddy-children model for `children` agents.
#[pyfunction]
fn muddy_children(children: usize) -> PyResult<PyComplex> {
    Ok(PyComplex {
        inner: muddy::muddy_complex(children).map_err(data_err)?,
    })
}

/// Facet counts along the muddy-children announcement sequence.
#[pyfunction]
fn muddy_children_counts(children: usize) -> PyResult<Vec<usize>> {
    Ok(muddy::muddy_sequence(children)
        .map_err(data_err)?
        .iter()
        .map(|stage| stage.complex.facet_count())
        .collect())
}

/// Searches for a decision map; returns the witness map JSON or the
/// unsolvability certificate JSON.
#[pyfunction]
fn solve(task: &str, protocol: &PyComplex) -> PyResult<String> {
    let task = make_task(task_kind(task)?, protocol.inner.agents()).map_err(data_err)?;
    let outcome = search_decision_map(&task, &protocol.inner).map_err(data_err)?;
    Ok(outcome.to_json(&protocol.inner))
}

/// Whether a task is solvable on the protocol complex.
#[pyfunction]
fn is_solvable(task: &str, protocol: &PyComplex) -> PyResult<bool> {
    let task = make_task(task_kind(task)?, protocol.inner.agents()).map_err(data_err)?;
    Ok(search_decision_map(&task, &protocol.inner)
        .map_err(data_err)?
        .is_solvable())
}

/// Validates a decision map (JSON keyed by vertex id) against a task;
/// returns the validation report as JSON.
#[pyfunction]
fn validate_map(task: &str, protocol: &PyComplex, map_json: &str) -> PyResult<String> {
    let task = make_task(task_kind(task)?, protocol.inner.agents()).map_err(data_err)?;
    let map = DecisionMap::from_json(&protocol.inner, map_json).map_err(data_err)?;
    let report = validate_decision_map(&task, &protocol.inner, &map).map_err(data_err)?;
    serde_json_string(&report)
}

/// Obstruction recipe at a witness world; returns the report as JSON.
#[pyfunction]
fn obstruction(task: &str, protocol: &PyComplex, formula: &str, world: usize) -> PyResult<String> {
    let task = make_task(task_kind(task)?, protocol.inner.agents()).map_err(data_err)?;
    let formula = parse_formula(formula, protocol.inner.agents()).map_err(data_err)?;
    let report =
        check_obstruction(&task, &protocol.inner, &formula, world).map_err(data_err)?;
    serde_json_string(&report)
}

/// The courteous decision map on a one-round unreliable-broadcast complex.
#[pyfunction]
fn courteous(protocol: &PyComplex) -> PyResult<String> {
    let map = courteous_map(&protocol.inner).map_err(data_err)?;
    Ok(map.to_json(&protocol.inner))
}

/// The knowledge-threshold decision map for a formula.
#[pyfunction]
fn knowledge_threshold(protocol: &PyComplex, formula: &str) -> PyResult<String> {
    let formula = parse_formula(formula, protocol.inner.agents()).map_err(data_err)?;
    let map = knowledge_threshold_map(&protocol.inner, &formula).map_err(data_err)?;
    Ok(map.to_json(&protocol.inner))
}

/// The two-round test-and-set decision map on a refined complex.
#[pyfunction]
fn tas_two_round(refined: &PyComplex) -> PyResult<String> {
    let map = tas_two_round_map(&refined.inner).map_err(data_err)?;
    Ok(map.to_json(&refined.inner))
}

/// The threshold formula `CD` over all pairs of "not everyone has input 1".
#[pyfunction]
fn phi(agents: Vec<String>) -> String {
    epiplex::phi_formula(&agent_ids(&agents)).to_string()
}

/// The one-round test-and-set obstruction formula.
#[pyfunction]
fn psi(agents: Vec<String>) -> String {
    epiplex::psi_formula(&agent_ids(&agents)).to_string()
}

fn serde_json_string<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn epiplex_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyComplex>()?;
    m.add_function(wrap_pyfunction!(binary_input_complex, m)?)?;
    m.add_function(wrap_pyfunction!(model_graph_count, m)?)?;
    m.add_function(wrap_pyfunction!(one_round, m)?)?;
    m.add_function(wrap_pyfunction!(rounds, m)?)?;
    m.add_function(wrap_pyfunction!(tas_partial_round, m)?)?;
    m.add_function(wrap_pyfunction!(muddy_children, m)?)?;
    m.add_function(wrap_pyfunction!(muddy_children_counts, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(is_solvable, m)?)?;
    m.add_function(wrap_pyfunction!(validate_map, m)?)?;
    m.add_function(wrap_pyfunction!(obstruction, m)?)?;
    m.add_function(wrap_pyfunction!(courteous, m)?)?;
    m.add_function(wrap_pyfunction!(knowledge_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(tas_two_round, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    Ok(())
}
