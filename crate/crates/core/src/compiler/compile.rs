use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::query::Query;

use super::eliminate::{eliminate, StageReport};
use super::expr::{resolve, Expr};
use super::workspace::Workspace;

/// A query reduced to a quantifier-free formula over the recolored graph
/// of a [`Workspace`]. Free variable `i` is answer position `i`.
#[derive(Debug, Clone)]
pub struct CompiledQuery {
    pub arity: usize,
    pub names: Vec<String>,
    pub source: Expr,
    pub formula: Expr,
    pub stages: Vec<StageReport>,
}

impl CompiledQuery {
    /// A readable account of every stage and the final formula.
    pub fn dump(&self, ws: &Workspace) -> String {
        let sig = ws.graph().signature();
        let mut s = String::new();
        let _ = writeln!(s, "input: {}", self.source.display(sig, &self.names));
        for (i, st) in self.stages.iter().enumerate() {
            let _ = writeln!(
                s,
                "stage {}: eliminate {} level={} ydnf={} disjuncts={} colors={} functions={} witness_max={} beta={}",
                i + 1,
                self.names.get(st.var as usize).map_or("?", String::as_str),
                st.level,
                st.ydnf_len,
                st.disjuncts,
                st.colors,
                st.functions,
                st.witness_max,
                st.beta_max,
            );
        }
        let _ = writeln!(s, "output: {}", self.formula.display(sig, &self.names));
        s
    }
}

/// Compiles a query whose symbols are those of the workspace graph.
pub fn compile(ws: &mut Workspace, q: &Query) -> Result<CompiledQuery> {
    let r = resolve(q, ws.graph().signature())?;
    compile_expr(ws, r.expr, r.arity, r.names)
}

pub fn compile_expr(ws: &mut Workspace, e: Expr, arity: usize, names: Vec<String>) -> Result<CompiledQuery> {
    let mut stages = Vec::new();
    let out = eliminate_all(ws, &e, &mut stages)?;
    let formula = ws.make_simple(&out)?;
    if formula.free_vars().iter().any(|&v| v as usize >= arity) {
        return Err(Error::Contract("bound variable escaped its scope".into()));
    }
    Ok(CompiledQuery {
        arity,
        names,
        source: e,
        formula,
        stages,
    })
}

/// Removes every quantifier, innermost first.
pub fn eliminate_all(ws: &mut Workspace, e: &Expr, stages: &mut Vec<StageReport>) -> Result<Expr> {
    Ok(match e {
        Expr::Const(_) | Expr::Atom(_) => e.clone(),
        Expr::Not(g) => Expr::not(eliminate_all(ws, g, stages)?),
        Expr::And(gs) => Expr::and(
            gs.iter()
                .map(|g| eliminate_all(ws, g, stages))
                .collect::<Result<Vec<_>>>()?,
        ),
        Expr::Or(gs) => Expr::or(
            gs.iter()
                .map(|g| eliminate_all(ws, g, stages))
                .collect::<Result<Vec<_>>>()?,
        ),
        Expr::Exists(v, g) => {
            let body = eliminate_all(ws, g, stages)?;
            let body = ws.make_simple(&body)?;
            let (out, rep) = eliminate(ws, &body, *v)?;
            stages.push(rep);
            out
        }
    })
}
