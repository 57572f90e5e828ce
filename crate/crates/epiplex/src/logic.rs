//! Epistemic formulas and their world-indexed semantics on chromatic
//! complexes: individual knowledge `K`, common knowledge `C`, distributed
//! knowledge `D`, common distributed knowledge `CD`, plus public-announcement
//! restriction.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::complex::ChromaticComplex;
use crate::error::{Error, Result};
use crate::state::{AgentId, Value};

pub type Group = BTreeSet<AgentId>;
pub type GroupFamily = BTreeSet<Group>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// `(= key agent value)`: the agent-colored vertex of the world has
    /// state entry `key` equal to `value`. The standard keys are `input`
    /// and `decision`.
    Atom {
        key: String,
        agent: AgentId,
        value: Value,
    },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Knows(AgentId, Box<Formula>),
    Common(Group, Box<Formula>),
    Distributed(Group, Box<Formula>),
    CommonDistributed(GroupFamily, Box<Formula>),
}

impl Formula {
    pub fn atom(key: impl Into<String>, agent: impl Into<AgentId>, value: Value) -> Self {
        Formula::Atom {
            key: key.into(),
            agent: agent.into(),
            value,
        }
    }

    pub fn input_atom(agent: impl Into<AgentId>, value: Value) -> Self {
        Formula::atom("input", agent, value)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn knows(agent: impl Into<AgentId>, f: Formula) -> Self {
        Formula::Knows(agent.into(), Box::new(f))
    }

    pub fn common<I: IntoIterator<Item = AgentId>>(agents: I, f: Formula) -> Self {
        Formula::Common(agents.into_iter().collect(), Box::new(f))
    }

    pub fn distributed<I: IntoIterator<Item = AgentId>>(agents: I, f: Formula) -> Self {
        Formula::Distributed(agents.into_iter().collect(), Box::new(f))
    }

    pub fn common_distributed(alpha: GroupFamily, f: Formula) -> Self {
        Formula::CommonDistributed(alpha, Box::new(f))
    }

    /// Negation normal form: `implies` is unfolded and negations are pushed
    /// down through the boolean connectives; a negation stops at atoms and
    /// at the knowledge operators (the language has no dual modalities).
    pub fn to_nnf(&self) -> Formula {
        self.nnf(false)
    }

    fn nnf(&self, negated: bool) -> Formula {
        match self {
            Formula::True => {
                if negated {
                    Formula::False
                } else {
                    Formula::True
                }
            }
            Formula::False => {
                if negated {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Formula::Atom { .. } => {
                if negated {
                    Formula::not(self.clone())
                } else {
                    self.clone()
                }
            }
            Formula::Not(inner) => inner.nnf(!negated),
            Formula::And(parts) => {
                let parts: Vec<Formula> = parts.iter().map(|p| p.nnf(negated)).collect();
                if negated {
                    Formula::Or(parts)
                } else {
                    Formula::And(parts)
                }
            }
            Formula::Or(parts) => {
                let parts: Vec<Formula> = parts.iter().map(|p| p.nnf(negated)).collect();
                if negated {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
            Formula::Implies(lhs, rhs) => {
                if negated {
                    Formula::And(vec![lhs.nnf(false), rhs.nnf(true)])
                } else {
                    Formula::Or(vec![lhs.nnf(true), rhs.nnf(false)])
                }
            }
            Formula::Knows(a, inner) => {
                let body = Formula::Knows(a.clone(), Box::new(inner.nnf(false)));
                if negated {
                    Formula::not(body)
                } else {
                    body
                }
            }
            Formula::Common(g, inner) => {
                let body = Formula::Common(g.clone(), Box::new(inner.nnf(false)));
                if negated {
                    Formula::not(body)
                } else {
                    body
                }
            }
            Formula::Distributed(g, inner) => {
                let body = Formula::Distributed(g.clone(), Box::new(inner.nnf(false)));
                if negated {
                    Formula::not(body)
                } else {
                    body
                }
            }
            Formula::CommonDistributed(alpha, inner) => {
                let body =
                    Formula::CommonDistributed(alpha.clone(), Box::new(inner.nnf(false)));
                if negated {
                    Formula::not(body)
                } else {
                    body
                }
            }
        }
    }

    fn contains_modal(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } => false,
            Formula::Not(f) => f.contains_modal(),
            Formula::And(parts) | Formula::Or(parts) => parts.iter().any(Formula::contains_modal),
            Formula::Implies(a, b) => a.contains_modal() || b.contains_modal(),
            Formula::Knows(..)
            | Formula::Common(..)
            | Formula::Distributed(..)
            | Formula::CommonDistributed(..) => true,
        }
    }

    fn nnf_has_negated_modal(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } => false,
            Formula::Not(inner) => inner.contains_modal(),
            Formula::And(parts) | Formula::Or(parts) => {
                parts.iter().any(Formula::nnf_has_negated_modal)
            }
            Formula::Implies(a, b) => a.nnf_has_negated_modal() || b.nnf_has_negated_modal(),
            Formula::Knows(_, inner)
            | Formula::Common(_, inner)
            | Formula::Distributed(_, inner)
            | Formula::CommonDistributed(_, inner) => inner.nnf_has_negated_modal(),
        }
    }
}

/// A positive formula only talks about what agents know: in negation normal
/// form no knowledge operator appears under a negation. Negated atoms are
/// allowed.
pub fn is_positive(formula: &Formula) -> bool {
    !formula.to_nnf().nnf_has_negated_modal()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn group(g: &Group) -> String {
            let names: Vec<&str> = g.iter().map(AgentId::as_str).collect();
            format!("({})", names.join(" "))
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom { key, agent, value } => write!(f, "(= {key} {agent} {value})"),
            Formula::Not(inner) => write!(f, "(not {inner})"),
            Formula::And(parts) => {
                let parts: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "(and {})", parts.join(" "))
            }
            Formula::Or(parts) => {
                let parts: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "(or {})", parts.join(" "))
            }
            Formula::Implies(a, b) => write!(f, "(implies {a} {b})"),
            Formula::Knows(a, inner) => write!(f, "(K {a} {inner})"),
            Formula::Common(g, inner) => write!(f, "(C {} {inner})", group(g)),
            Formula::Distributed(g, inner) => write!(f, "(D {} {inner})", group(g)),
            Formula::CommonDistributed(alpha, inner) => {
                let groups: Vec<String> = alpha.iter().map(group).collect();
                write!(f, "(CD ({}) {inner})", groups.join(""))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open(usize),
    Close(usize),
    Sym(String, usize),
}

impl Tok {
    fn pos(&self) -> usize {
        match self {
            Tok::Open(p) | Tok::Close(p) => *p,
            Tok::Sym(_, p) => *p,
        }
    }
}

fn lex(text: &str) -> Vec<Tok> {
    let mut toks = Vec::new();
    let mut sym_start: Option<usize> = None;
    let mut sym = String::new();
    for (pos, ch) in text.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(start) = sym_start.take() {
                toks.push(Tok::Sym(std::mem::take(&mut sym), start));
            }
            if ch == '(' {
                toks.push(Tok::Open(pos));
            } else if ch == ')' {
                toks.push(Tok::Close(pos));
            }
        } else {
            if sym_start.is_none() {
                sym_start = Some(pos);
            }
            sym.push(ch);
        }
    }
    if let Some(start) = sym_start {
        toks.push(Tok::Sym(sym, start));
    }
    toks
}

struct Parser<'a> {
    toks: Vec<Tok>,
    i: usize,
    end: usize,
    agents: &'a BTreeSet<AgentId>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::SyntaxError {
            pos,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i)
    }

    fn next(&mut self, what: &str) -> Result<Tok> {
        match self.toks.get(self.i) {
            Some(tok) => {
                self.i += 1;
                Ok(tok.clone())
            }
            None => self.err(self.end, format!("unexpected end of input, expected {what}")),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.next("`)`")? {
            Tok::Close(_) => Ok(()),
            tok => self.err(tok.pos(), "expected `)`"),
        }
    }

    fn symbol(&mut self, what: &str) -> Result<(String, usize)> {
        match self.next(what)? {
            Tok::Sym(s, p) => Ok((s, p)),
            tok => self.err(tok.pos(), format!("expected {what}")),
        }
    }

    fn agent(&mut self) -> Result<AgentId> {
        let (name, _) = self.symbol("an agent name")?;
        let agent = AgentId::new(name.clone());
        if !self.agents.contains(&agent) {
            return Err(Error::UnknownAgent(name));
        }
        Ok(agent)
    }

    fn group(&mut self) -> Result<Group> {
        match self.next("`(`")? {
            Tok::Open(_) => {}
            tok => return self.err(tok.pos(), "expected `(` opening an agent group"),
        }
        let mut group = Group::new();
        while !matches!(self.peek(), Some(Tok::Close(_))) {
            if self.peek().is_none() {
                return self.err(self.end, "unexpected end of input inside agent group");
            }
            group.insert(self.agent()?);
        }
        self.expect_close()?;
        if group.is_empty() {
            return Err(Error::EmptyGroup);
        }
        Ok(group)
    }

    fn formula(&mut self) -> Result<Formula> {
        match self.next("a formula")? {
            Tok::Sym(s, p) => match s.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                other => self.err(p, format!("expected a formula, found `{other}`")),
            },
            Tok::Close(p) => self.err(p, "expected a formula, found `)`"),
            Tok::Open(_) => {
                let (head, head_pos) = self.symbol("an operator")?;
                let formula = match head.as_str() {
                    "=" => {
                        let (key, _) = self.symbol("a state key")?;
                        let agent = self.agent()?;
                        let (value, vp) = self.symbol("a value")?;
                        let value: Value = value
                            .parse()
                            .map_err(|_| Error::SyntaxError {
                                pos: vp,
                                msg: format!("`{value}` is not a value"),
                            })?;
                        Formula::Atom { key, agent, value }
                    }
                    "not" => Formula::not(self.formula()?),
                    "and" | "or" => {
                        let mut parts = vec![self.formula()?];
                        while !matches!(self.peek(), Some(Tok::Close(_))) {
                            if self.peek().is_none() {
                                return self.err(self.end, "unexpected end of input");
                            }
                            parts.push(self.formula()?);
                        }
                        if head == "and" {
                            Formula::And(parts)
                        } else {
                            Formula::Or(parts)
                        }
                    }
                    "implies" => {
                        let a = self.formula()?;
                        let b = self.formula()?;
                        Formula::Implies(Box::new(a), Box::new(b))
                    }
                    "K" => {
                        let agent = self.agent()?;
                        Formula::Knows(agent, Box::new(self.formula()?))
                    }
                    "C" => {
                        let g = self.group()?;
                        Formula::Common(g, Box::new(self.formula()?))
                    }
                    "D" => {
                        let g = self.group()?;
                        Formula::Distributed(g, Box::new(self.formula()?))
                    }
                    "CD" => {
                        match self.next("`(`")? {
                            Tok::Open(_) => {}
                            tok => {
                                return self.err(tok.pos(), "expected `(` opening a group family")
                            }
                        }
                        let mut alpha = GroupFamily::new();
                        while !matches!(self.peek(), Some(Tok::Close(_))) {
                            if self.peek().is_none() {
                                return self.err(self.end, "unexpected end of input");
                            }
                            alpha.insert(self.group()?);
                        }
                        self.expect_close()?;
                        if alpha.is_empty() {
                            return Err(Error::EmptyGroup);
                        }
                        Formula::CommonDistributed(alpha, Box::new(self.formula()?))
                    }
                    other => {
                        return self.err(head_pos, format!("unknown operator `{other}`"));
                    }
                };
                self.expect_close()?;
                Ok(formula)
            }
        }
    }
}

/// Parses the s-expression formula grammar. `parse . print` is the identity
/// on canonical forms.
pub fn parse_formula(text: &str, agents: &[AgentId]) -> Result<Formula> {
    let agents: BTreeSet<AgentId> = agents.iter().cloned().collect();
    let mut parser = Parser {
        toks: lex(text),
        i: 0,
        end: text.len(),
        agents: &agents,
    };
    let formula = parser.formula()?;
    if let Some(tok) = parser.peek() {
        return parser.err(tok.pos(), "trailing input after formula");
    }
    Ok(formula)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            self.0[rx.max(ry)] = rx.min(ry);
        }
    }
}

/// Batch evaluator over one immutable complex. Subformula truth vectors and
/// the facet components of each group family are cached across calls, which
/// is what makes `C`/`CD` evaluation cheap on subdivided complexes.
pub struct ModelChecker<'a> {
    complex: &'a ChromaticComplex,
    memo: RefCell<HashMap<Formula, Rc<Vec<bool>>>>,
    #[allow(clippy::type_complexity)]
    components: RefCell<HashMap<Vec<Vec<usize>>, Rc<Vec<usize>>>>,
}

impl<'a> ModelChecker<'a> {
    pub fn new(complex: &'a ChromaticComplex) -> Self {
        ModelChecker {
            complex,
            memo: RefCell::new(HashMap::new()),
            components: RefCell::new(HashMap::new()),
        }
    }

    pub fn complex(&self) -> &'a ChromaticComplex {
        self.complex
    }

    /// Truth of the formula at one world.
    pub fn check(&self, world: usize, formula: &Formula) -> Result<bool> {
        if world >= self.complex.facet_count() {
            return Err(Error::UnknownFacet(world));
        }
        Ok(self.eval_all(formula)?[world])
    }

    /// Truth of the formula at every world, in facet order.
    pub fn eval_all(&self, formula: &Formula) -> Result<Rc<Vec<bool>>> {
        if let Some(hit) = self.memo.borrow().get(formula) {
            return Ok(Rc::clone(hit));
        }
        let c = self.complex;
        let nf = c.facet_count();
        let out: Vec<bool> = match formula {
            Formula::True => vec![true; nf],
            Formula::False => vec![false; nf],
            Formula::Atom { key, agent, value } => {
                let color = c.color_index(agent)?;
                (0..nf)
                    .map(|w| {
                        c.vertex(c.facet_vertex(w, color)).state.entry(key) == Some(*value)
                    })
                    .collect()
            }
            Formula::Not(inner) => self.eval_all(inner)?.iter().map(|b| !b).collect(),
            Formula::And(parts) => {
                let mut acc = vec![true; nf];
                for part in parts {
                    let vals = self.eval_all(part)?;
                    for (slot, &v) in acc.iter_mut().zip(vals.iter()) {
                        *slot = *slot && v;
                    }
                }
                acc
            }
            Formula::Or(parts) => {
                let mut acc = vec![false; nf];
                for part in parts {
                    let vals = self.eval_all(part)?;
                    for (slot, &v) in acc.iter_mut().zip(vals.iter()) {
                        *slot = *slot || v;
                    }
                }
                acc
            }
            Formula::Implies(a, b) => {
                let va = self.eval_all(a)?;
                let vb = self.eval_all(b)?;
                va.iter().zip(vb.iter()).map(|(&x, &y)| !x || y).collect()
            }
            Formula::Knows(agent, inner) => {
                let vals = self.eval_all(inner)?;
                let color = c.color_index(agent)?;
                let mut vertex_ok = vec![true; c.vertex_count()];
                for (w, &v) in vals.iter().enumerate() {
                    if !v {
                        vertex_ok[c.facet_vertex(w, color)] = false;
                    }
                }
                (0..nf).map(|w| vertex_ok[c.facet_vertex(w, color)]).collect()
            }
            Formula::Distributed(group, inner) => {
                let vals = self.eval_all(inner)?;
                let colors = c.resolve_groups(std::slice::from_ref(group))?.remove(0);
                let mut face_ok: HashMap<Vec<usize>, bool> = HashMap::new();
                for (w, &v) in vals.iter().enumerate() {
                    let face: Vec<usize> = colors.iter().map(|&k| c.facet_vertex(w, k)).collect();
                    let slot = face_ok.entry(face).or_insert(true);
                    *slot = *slot && v;
                }
                (0..nf)
                    .map(|w| {
                        let face: Vec<usize> =
                            colors.iter().map(|&k| c.facet_vertex(w, k)).collect();
                        face_ok[&face]
                    })
                    .collect()
            }
            Formula::Common(group, inner) => {
                let singletons: Vec<Group> = group
                    .iter()
                    .map(|a| std::iter::once(a.clone()).collect())
                    .collect();
                self.component_holds(&singletons, inner)?
            }
            Formula::CommonDistributed(alpha, inner) => {
                let groups: Vec<Group> = alpha.iter().cloned().collect();
                self.component_holds(&groups, inner)?
            }
        };
        let out = Rc::new(out);
        self.memo.borrow_mut().insert(formula.clone(), Rc::clone(&out));
        Ok(out)
    }

    /// Truth of "inner holds everywhere in the alpha-connected component".
    fn component_holds(&self, alpha: &[Group], inner: &Formula) -> Result<Vec<bool>> {
        let comp = self.components_for(alpha)?;
        let vals = self.eval_all(inner)?;
        let mut comp_ok: HashMap<usize, bool> = HashMap::new();
        for (w, &v) in vals.iter().enumerate() {
            let slot = comp_ok.entry(comp[w]).or_insert(true);
            *slot = *slot && v;
        }
        Ok(comp.iter().map(|id| comp_ok[id]).collect())
    }

    fn components_for(&self, alpha: &[Group]) -> Result<Rc<Vec<usize>>> {
        let c = self.complex;
        let mut groups = c.resolve_groups(alpha)?;
        groups.sort();
        groups.dedup();
        if let Some(hit) = self.components.borrow().get(&groups) {
            return Ok(Rc::clone(hit));
        }
        let mut uf = UnionFind::new(c.facet_count());
        for group in &groups {
            let mut by_face: HashMap<Vec<usize>, usize> = HashMap::new();
            for (w, facet) in c.facets().iter().enumerate() {
                let face: Vec<usize> = group.iter().map(|&k| facet[k]).collect();
                match by_face.get(&face) {
                    Some(&first) => uf.union(first, w),
                    None => {
                        by_face.insert(face, w);
                    }
                }
            }
        }
        let labels: Vec<usize> = (0..c.facet_count()).map(|w| uf.find(w)).collect();
        let labels = Rc::new(labels);
        self.components.borrow_mut().insert(groups, Rc::clone(&labels));
        Ok(labels)
    }
}

/// Convenience single-shot evaluation of a formula at one world.
pub fn eval_formula(complex: &ChromaticComplex, world: usize, formula: &Formula) -> Result<bool> {
    ModelChecker::new(complex).check(world, formula)
}

/// Restricts the complex to the facets satisfying the announced formula.
/// Vertices left in no surviving facet are dropped; carrier annotations are
/// preserved.
pub fn public_announce(complex: &ChromaticComplex, formula: &Formula) -> Result<ChromaticComplex> {
    let vals = ModelChecker::new(complex).eval_all(formula)?;
    if !vals.iter().any(|&v| v) {
        return Err(Error::EmptyModel);
    }
    let mut facets = Vec::new();
    let mut carrier = complex.carrier().map(|_| Vec::new());
    let mut used = vec![false; complex.vertex_count()];
    for (w, facet) in complex.facets().iter().enumerate() {
        if !vals[w] {
            continue;
        }
        for &v in facet {
            used[v] = true;
        }
        facets.push(
            facet
                .iter()
                .map(|&v| complex.vertex(v).id.clone())
                .collect(),
        );
        if let (Some(list), Some(car)) = (carrier.as_mut(), complex.carrier()) {
            list.push(car[w]);
        }
    }
    let vertices: Vec<_> = complex
        .vertices()
        .iter()
        .enumerate()
        .filter(|(i, _)| used[*i])
        .map(|(_, v)| v.clone())
        .collect();
    ChromaticComplex::build_with_carrier(complex.agents().to_vec(), vertices, facets, carrier)
}
