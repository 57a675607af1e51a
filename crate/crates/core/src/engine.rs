//! Loading, routing and preparation of queries over a structure.

use crate::augment::{degeneracy_orient, functionalize, UndirectedGraph};
use crate::compiler::{compile, CompiledQuery, Limits, Workspace};
use crate::error::{Error, Result};
use crate::model::{adjacency_graph, FunctionalGraph, RelationalStructure};
use crate::query::{domain_test, orient_edges, parse_query, to_functional, Formula, Query, Schema};
use crate::Count;

use crate::counting::{Audit, Counter};
use crate::enumeration::Enumerator;
use crate::runtime::{AtomIndex, Program};

/// How a structure is turned into a functional graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Route {
    /// A symmetric irreflexive binary relation plus colors, oriented by
    /// degeneracy.
    Graph { edge: Option<String> },
    /// The adjacency graph with one vertex per tuple.
    Adjacency,
    /// A functional graph given directly.
    Functional,
}

/// A compiled query with its evaluation tables.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub query: Query,
    pub compiled: CompiledQuery,
    pub program: Program,
    pub index: AtomIndex,
}

impl Prepared {
    pub fn arity(&self) -> usize {
        self.compiled.arity
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    pub(crate) ws: Workspace,
    route: Route,
    schema: Schema,
    domain: usize,
    funcs: Vec<String>,
}

fn graph_edge(s: &RelationalStructure) -> Option<Option<String>> {
    let binary: Vec<_> = s.relations().iter().filter(|r| r.arity != 1).collect();
    match binary.as_slice() {
        [] => Some(None),
        [r] if r.arity == 2 && UndirectedGraph::from_structure(s, &r.name).is_ok() => Some(Some(r.name.clone())),
        _ => None,
    }
}

impl Engine {
    pub fn new(s: &RelationalStructure, limits: Limits) -> Result<Self> {
        let schema = Schema::relations(s.relations().iter().map(|r| (r.name.as_str(), r.arity)));
        match graph_edge(s) {
            Some(edge) => {
                let ug = UndirectedGraph::from_structure(s, edge.as_deref().unwrap_or(""))?;
                let g = functionalize(&degeneracy_orient(&ug));
                let funcs = g
                    .signature()
                    .funcs()
                    .iter()
                    .map(|f| f.name.clone())
                    .collect();
                Ok(Self {
                    ws: Workspace::new(g, limits),
                    route: Route::Graph { edge },
                    schema,
                    domain: s.len(),
                    funcs,
                })
            }
            None => {
                let adj = adjacency_graph(s);
                Ok(Self {
                    domain: adj.domain_len,
                    ws: Workspace::new(adj.graph, limits),
                    route: Route::Adjacency,
                    schema,
                    funcs: Vec::new(),
                })
            }
        }
    }

    /// An engine over a functional graph queried in its own signature.
    pub fn functional(g: FunctionalGraph, limits: Limits) -> Self {
        let sig = g.signature();
        let schema = Schema::functional(
            sig.funcs().iter().map(|f| f.name.as_str()),
            sig.colors().iter().map(|c| c.name.as_str()),
        );
        Self {
            domain: g.len(),
            ws: Workspace::new(g, limits),
            route: Route::Functional,
            schema,
            funcs: Vec::new(),
        }
    }

    pub fn route(&self) -> &Route {
        &self.route
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn workspace(&self) -> &Workspace {
        &self.ws
    }

    pub fn graph(&self) -> &FunctionalGraph {
        self.ws.graph()
    }

    /// Number of answer candidates: the domain of the input.
    pub fn domain_len(&self) -> usize {
        self.domain
    }

    pub fn parse(&self, text: &str) -> Result<Query> {
        parse_query(text, &self.schema)
    }

    /// The query over the functional graph, with answers restricted to the
    /// input domain.
    pub fn functional_query(&self, q: &Query) -> Query {
        match &self.route {
            Route::Graph { edge } => match edge {
                Some(e) => orient_edges(q, e, &self.funcs),
                None => q.clone(),
            },
            Route::Functional => q.clone(),
            Route::Adjacency => {
                let fq = to_functional(q, &self.schema);
                let mut parts = vec![fq.formula];
                parts.extend(q.free.iter().map(|v| domain_test(v)));
                Query {
                    formula: Formula::and(parts),
                    free: fq.free,
                }
            }
        }
    }

    pub fn prepare(&mut self, q: &Query) -> Result<Prepared> {
        let fq = self.functional_query(q);
        let compiled = compile(&mut self.ws, &fq)?;
        let mut index = AtomIndex::new();
        let program = Program::new(&compiled.formula, self.ws.graph(), &mut index);
        Ok(Prepared {
            query: q.clone(),
            compiled,
            program,
            index,
        })
    }

    /// Truth of the existential closure of `q`.
    pub fn check(&mut self, q: &Query) -> Result<bool> {
        let closed = Query {
            formula: q.free.iter().rev().fold(q.formula.clone(), |f, v| Formula::exists(v.clone(), f)),
            free: Vec::new(),
        };
        let p = self.prepare(&closed)?;
        Ok(p.program.test(&p.index, &[]))
    }

    pub fn positions(&self, ids: &[u64]) -> Result<Vec<u32>> {
        ids.iter()
            .map(|&id| match self.ws.graph().position(id) {
                Some(v) if (v as usize) < self.domain => Ok(v),
                _ => Err(Error::UnknownVertex(id)),
            })
            .collect()
    }

    pub fn ids(&self, tuple: &[u32]) -> Vec<u64> {
        tuple.iter().map(|&v| self.ws.graph().id(v)).collect()
    }

    /// Membership of a tuple of positions.
    pub fn test_positions(&self, p: &Prepared, tuple: &[u32]) -> Result<bool> {
        if tuple.len() != p.arity() {
            return Err(Error::TupleArity {
                expected: p.arity(),
                got: tuple.len(),
            });
        }
        let mut env = tuple.to_vec();
        env.resize(p.program.width().max(tuple.len()), 0);
        Ok(p.program.test(&p.index, &env))
    }

    /// Membership of a tuple of external ids.
    pub fn test(&self, p: &Prepared, ids: &[u64]) -> Result<bool> {
        if ids.len() != p.arity() {
            return Err(Error::TupleArity {
                expected: p.arity(),
                got: ids.len(),
            });
        }
        let tuple = self.positions(ids)?;
        self.test_positions(p, &tuple)
    }
}

impl Engine {
    /// Preprocessing for lexicographic enumeration of a prepared query.
    pub fn enumerator(&mut self, p: &Prepared) -> Result<Enumerator> {
        Enumerator::build(&mut self.ws, &p.compiled.formula, p.arity())
    }

    /// Every answer in lexicographic order, as positions.
    pub fn enumerate_all(&mut self, q: &Query) -> Result<Vec<Vec<u32>>> {
        let p = self.prepare(q)?;
        let e = self.enumerator(&p)?;
        let mut c = e.cursor();
        let mut out = Vec::new();
        while let Some(t) = c.try_next()? {
            out.push(t);
        }
        Ok(out)
    }
}

impl Engine {
    /// Number of answers.
    pub fn count(&mut self, q: &Query) -> Result<Count> {
        let p = self.prepare(q)?;
        Counter::new(&mut self.ws).count_answers(&p.compiled.formula, p.arity())
    }

    /// Number of answers, checking every inequality split by brute force
    /// when the graph is small enough for `budget` evaluations.
    pub fn count_audited(&mut self, q: &Query, budget: u64) -> Result<(Count, Audit)> {
        let p = self.prepare(q)?;
        let mut c = Counter::with_audit(&mut self.ws, budget);
        let n = c.count_answers(&p.compiled.formula, p.arity())?;
        Ok((n, c.audit().cloned().unwrap_or_default()))
    }
}
