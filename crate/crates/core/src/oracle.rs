//! Reference semantics: exhaustive evaluation of surface queries.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{FunctionalGraph, RelationalStructure};
use crate::query::{Formula, Query, Term};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Something a formula can be evaluated on.
pub trait Model {
    fn len(&self) -> usize;
    fn id(&self, v: u32) -> u64;
    fn apply(&self, f: &str, v: u32) -> Result<u32>;
    fn holds(&self, rel: &str, args: &[u32]) -> Result<bool>;
}

impl Model for RelationalStructure {
    fn len(&self) -> usize {
        RelationalStructure::len(self)
    }

    fn id(&self, v: u32) -> u64 {
        RelationalStructure::id(self, v)
    }

    fn apply(&self, f: &str, _: u32) -> Result<u32> {
        Err(Error::UnknownSymbol(f.to_string()))
    }

    fn holds(&self, rel: &str, args: &[u32]) -> Result<bool> {
        match self.relation_id(rel) {
            Some(r) => Ok(self.contains(r, args)),
            None => Err(Error::UnknownSymbol(rel.to_string())),
        }
    }
}

impl Model for FunctionalGraph {
    fn len(&self) -> usize {
        FunctionalGraph::len(self)
    }

    fn id(&self, v: u32) -> u64 {
        FunctionalGraph::id(self, v)
    }

    fn apply(&self, f: &str, v: u32) -> Result<u32> {
        let f = self
            .signature()
            .func_by_name(f)
            .ok_or_else(|| Error::UnknownSymbol(f.to_string()))?;
        Ok(FunctionalGraph::apply(self, f, v))
    }

    fn holds(&self, rel: &str, args: &[u32]) -> Result<bool> {
        let c = self
            .signature()
            .color_by_name(rel)
            .ok_or_else(|| Error::UnknownSymbol(rel.to_string()))?;
        match args {
            [v] => Ok(self.color_set(c).contains(*v)),
            _ => Err(Error::Arity {
                name: rel.to_string(),
                expected: 1,
                got: args.len(),
            }),
        }
    }
}

fn distinct_vars(f: &Formula, free: &[String]) -> u32 {
    let mut n = free.len() as u32;
    f.walk(&mut |g| {
        if matches!(g, Formula::Exists(..)) {
            n += 1;
        }
    });
    n
}

fn check_budget(m: &impl Model, q: &Query, budget: u64) -> Result<()> {
    let vars = distinct_vars(&q.formula, &q.free);
    let needed = (m.len() as u64).checked_pow(vars).unwrap_or(u64::MAX);
    if needed > budget {
        return Err(Error::OracleBudget { budget, needed });
    }
    Ok(())
}

fn term(m: &impl Model, t: &Term, env: &HashMap<String, u32>) -> Result<u32> {
    match t {
        Term::Var(v) => env
            .get(v)
            .copied()
            .ok_or_else(|| Error::Contract(format!("unbound variable {v}"))),
        Term::App(f, inner) => m.apply(f, term(m, inner, env)?),
    }
}

fn sat(m: &impl Model, f: &Formula, env: &mut HashMap<String, u32>) -> Result<bool> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(r, args) => {
            let vals = args.iter().map(|t| term(m, t, env)).collect::<Result<Vec<_>>>()?;
            m.holds(r, &vals)?
        }
        Formula::Eq(a, b) => term(m, a, env)? == term(m, b, env)?,
        Formula::Not(g) => !sat(m, g, env)?,
        Formula::And(gs) => {
            for g in gs {
                if !sat(m, g, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if sat(m, g, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Exists(v, g) => {
            let saved = env.get(v).copied();
            let mut found = false;
            for u in 0..m.len() as u32 {
                env.insert(v.clone(), u);
                if sat(m, g, env)? {
                    found = true;
                    break;
                }
            }
            match saved {
                Some(s) => env.insert(v.clone(), s),
                None => env.remove(v),
            };
            found
        }
    })
}

/// All answers, as external ids in lexicographic order of positions.
pub fn naive_eval(q: &Query, m: &impl Model, budget: u64) -> Result<Vec<Vec<u64>>> {
    Ok(naive_positions(q, m, budget)?
        .into_iter()
        .map(|t| t.into_iter().map(|v| m.id(v)).collect())
        .collect())
}

/// All answers, as dense positions in lexicographic order.
pub fn naive_positions(q: &Query, m: &impl Model, budget: u64) -> Result<Vec<Vec<u32>>> {
    check_budget(m, q, budget)?;
    let k = q.free.len();
    let n = m.len() as u32;
    let mut out = Vec::new();
    if k > 0 && n == 0 {
        return Ok(out);
    }
    let mut tuple = vec![0u32; k];
    let mut env = HashMap::new();
    loop {
        for (name, &v) in q.free.iter().zip(&tuple) {
            env.insert(name.clone(), v);
        }
        if sat(m, &q.formula, &mut env)? {
            out.push(tuple.clone());
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
        }
    }
}

pub fn naive_check(q: &Query, m: &impl Model, budget: u64) -> Result<bool> {
    Ok(!naive_positions(q, m, budget)?.is_empty())
}

pub fn naive_count(q: &Query, m: &impl Model, budget: u64) -> Result<u64> {
    Ok(naive_positions(q, m, budget)?.len() as u64)
}

/// Whether one tuple of positions is an answer.
pub fn naive_test(q: &Query, m: &impl Model, tuple: &[u32]) -> Result<bool> {
    if tuple.len() != q.free.len() {
        return Err(Error::TupleArity {
            expected: q.free.len(),
            got: tuple.len(),
        });
    }
    let mut env: HashMap<String, u32> = q.free.iter().cloned().zip(tuple.iter().copied()).collect();
    sat(m, &q.formula, &mut env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{parse_query, Schema};

    fn p3() -> RelationalStructure {
        RelationalStructure::parse("node 0\nnode 1\nnode 2\nedge 0 1\nedge 1 2").unwrap()
    }

    fn q(text: &str) -> Query {
        parse_query(text, &Schema::relations([("E", 2)])).unwrap()
    }

    #[test]
    fn dist_two_on_p3() {
        let got = naive_eval(&q("exists z. E(x,z) & E(z,y)"), &p3(), DEFAULT_BUDGET).unwrap();
        let want: Vec<Vec<u64>> = vec![vec![0, 0], vec![0, 2], vec![1, 1], vec![2, 0], vec![2, 2]];
        assert_eq!(got, want);
    }

    #[test]
    fn sentence_on_single_vertex() {
        let s = RelationalStructure::parse("node 7\nrel E 2").unwrap();
        assert!(!naive_check(&q("exists x. exists y. E(x,y)"), &s, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn diagonal() {
        let s = RelationalStructure::from_edges(6, &[]);
        assert_eq!(naive_count(&q("x = y"), &s, DEFAULT_BUDGET).unwrap(), 6);
    }

    #[test]
    fn budget() {
        let s = RelationalStructure::from_edges(100, &[]);
        let r = naive_count(&q("exists z. exists w. x = y & z = w"), &s, 1000);
        assert!(matches!(r, Err(Error::OracleBudget { .. })));
    }
}
