use std::collections::HashSet;

use crate::query::ast::{Formula, Query, Term};
use crate::query::parser::Schema;

struct Fresh {
    used: HashSet<String>,
    next: usize,
}

impl Fresh {
    fn new(f: &Formula) -> Self {
        let mut used = HashSet::new();
        f.walk(&mut |g| match g {
            Formula::Atom(_, ts) => ts.iter().for_each(|t| {
                used.insert(t.base_var().to_string());
            }),
            Formula::Eq(a, b) => {
                used.insert(a.base_var().to_string());
                used.insert(b.base_var().to_string());
            }
            Formula::Exists(v, _) => {
                used.insert(v.clone());
            }
            _ => {}
        });
        Self { used, next: 0 }
    }

    fn var(&mut self) -> String {
        loop {
            self.next += 1;
            let v = format!("_t{}", self.next);
            if self.used.insert(v.clone()) {
                return v;
            }
        }
    }
}

/// Name of the `j`-th component function (1-based) of the adjacency graph.
pub fn component(j: usize) -> String {
    format!("f_{j}")
}

/// Name of the color marking tuple vertices of relation `r`.
pub fn relation_color(r: &str) -> String {
    format!("P_{r}")
}

/// Functional schema of the adjacency graph of a structure with `schema`.
pub fn adjacency_schema(schema: &Schema) -> Schema {
    let max = schema.relations.values().copied().max().unwrap_or(0);
    Schema {
        relations: Default::default(),
        functions: (1..=max).map(component).collect(),
        colors: schema.relations.keys().map(|r| relation_color(r)).collect(),
    }
}

/// Rewrites a relational query over the adjacency-graph vocabulary:
/// `R(x1..xr)` becomes `exists t. P_R(t) & f_1(t) = x1 & ... & f_r(t) = xr`.
///
/// Tuple vertices are exactly those with `f_1(v) != v`, so bound variables
/// are restricted to domain vertices by `f_1(z) = z`. Answer variables keep
/// the original order; restricting them is up to the caller.
pub fn to_functional(q: &Query, schema: &Schema) -> Query {
    let mut fresh = Fresh::new(&q.formula);
    let relativize = schema.relations.values().any(|&a| a > 0);
    let formula = rewrite(&q.formula, &mut fresh, relativize);
    Query {
        formula,
        free: q.free.clone(),
    }
}

/// `f_1(v) = v`, the domain test on adjacency graphs.
pub fn domain_test(v: &str) -> Formula {
    Formula::eq(Term::app(component(1), Term::var(v)), Term::var(v))
}

fn rewrite(f: &Formula, fresh: &mut Fresh, relativize: bool) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Eq(..) => f.clone(),
        Formula::Atom(r, args) => {
            let t = fresh.var();
            let mut parts = vec![Formula::atom(relation_color(r), vec![Term::var(&t)])];
            for (j, a) in args.iter().enumerate() {
                parts.push(Formula::eq(Term::app(component(j + 1), Term::var(&t)), a.clone()));
            }
            Formula::exists(t, Formula::and(parts))
        }
        Formula::Not(g) => Formula::not(rewrite(g, fresh, relativize)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| rewrite(g, fresh, relativize)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| rewrite(g, fresh, relativize)).collect()),
        Formula::Exists(v, g) => {
            let body = rewrite(g, fresh, relativize);
            if relativize {
                Formula::exists(v, Formula::and(vec![domain_test(v), body]))
            } else {
                Formula::exists(v, body)
            }
        }
    }
}

/// Rewrites a graph query for an oriented functional representation:
/// `edge(s, t)` becomes `s != t & (f(s) = t | f(t) = s | ...)` over `funcs`.
/// Other atoms are kept as color atoms.
pub fn orient_edges(q: &Query, edge: &str, funcs: &[String]) -> Query {
    Query {
        formula: orient(&q.formula, edge, funcs),
        free: q.free.clone(),
    }
}

fn orient(f: &Formula, edge: &str, funcs: &[String]) -> Formula {
    match f {
        Formula::Atom(r, args) if r == edge && args.len() == 2 => {
            let (s, t) = (&args[0], &args[1]);
            if s == t {
                return Formula::False;
            }
            let mut alts = Vec::new();
            for g in funcs {
                alts.push(Formula::eq(Term::app(g, s.clone()), t.clone()));
                alts.push(Formula::eq(Term::app(g, t.clone()), s.clone()));
            }
            Formula::and(vec![Formula::not(Formula::eq(s.clone(), t.clone())), Formula::or(alts)])
        }
        Formula::Not(g) => Formula::not(orient(g, edge, funcs)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| orient(g, edge, funcs)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| orient(g, edge, funcs)).collect()),
        Formula::Exists(v, g) => Formula::exists(v, orient(g, edge, funcs)),
        _ => f.clone(),
    }
}
