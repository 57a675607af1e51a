use std::collections::HashMap;

use crate::augment::{Hierarchy, DEFAULT_SYMBOL_CAP};
use crate::error::Result;
use crate::model::{BitSet, ColorId, ColorOrigin, FuncId, FunctionalGraph};

use super::expr::{Atom, Expr, Term, Var};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Vars {
    None,
    One(Var),
    Many,
}

impl Vars {
    fn join(self, o: Vars) -> Vars {
        match (self, o) {
            (Vars::None, x) | (x, Vars::None) => x,
            (Vars::One(a), Vars::One(b)) if a == b => Vars::One(a),
            _ => Vars::Many,
        }
    }
}

pub const DEFAULT_DISJUNCT_CAP: usize = 1_000_000;
pub const DEFAULT_MAX_LEVEL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub symbol_cap: usize,
    pub disjunct_cap: usize,
    pub max_level: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            symbol_cap: DEFAULT_SYMBOL_CAP,
            disjunct_cap: DEFAULT_DISJUNCT_CAP,
            max_level: DEFAULT_MAX_LEVEL,
        }
    }
}

/// A graph together with its augmentation hierarchy and the recolorings
/// produced so far. Compiled formulas refer to symbols of this graph.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub(crate) h: Hierarchy,
    pub limits: Limits,
    stage: usize,
    colors_made: usize,
    points: HashMap<u32, ColorId>,
    sets: HashMap<BitSet, ColorId>,
}

impl Workspace {
    pub fn new(g: FunctionalGraph, limits: Limits) -> Self {
        Self {
            h: Hierarchy::new(g, limits.symbol_cap),
            limits,
            stage: 0,
            colors_made: 0,
            points: HashMap::new(),
            sets: HashMap::new(),
        }
    }

    pub fn graph(&self) -> &FunctionalGraph {
        self.h.graph()
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.h
    }

    pub fn hierarchy_mut(&mut self) -> &mut Hierarchy {
        &mut self.h
    }

    pub(crate) fn next_stage(&mut self) -> usize {
        self.stage += 1;
        self.stage
    }

    pub fn colors_made(&self) -> usize {
        self.colors_made
    }

    pub(crate) fn add_color(&mut self, name: String, from: &str, set: BitSet) -> ColorId {
        self.colors_made += 1;
        self.h
            .graph_mut()
            .add_color(name, ColorOrigin::Recoloring(from.to_string()), set)
    }

    /// The color holding exactly `v`.
    pub(crate) fn point(&mut self, v: u32) -> ColorId {
        if let Some(&c) = self.points.get(&v) {
            return c;
        }
        let mut set = BitSet::new(self.graph().len());
        set.insert(v);
        let c = self.add_color(format!("pt_{}", self.graph().id(v)), "point", set);
        self.points.insert(v, c);
        c
    }

    /// A color holding exactly `set`, shared by equal sets.
    pub(crate) fn set_color(&mut self, set: BitSet) -> ColorId {
        if let Some(&c) = self.sets.get(&set) {
            return c;
        }
        let c = self.add_color(format!("u_{}", self.colors_made), "unary", set.clone());
        self.sets.insert(set, c);
        c
    }

    /// `f ∘ g`.
    pub fn compose(&mut self, f: FuncId, g: FuncId) -> Result<FuncId> {
        self.h.compose(f, g)
    }

    /// The term with its chain folded into at most one symbol.
    pub fn simple_term(&mut self, t: &Term) -> Result<Term> {
        if t.is_simple() {
            return Ok(t.clone());
        }
        let mut f = t.chain[0];
        for &g in &t.chain[1..] {
            f = self.compose(g, f)?;
        }
        Ok(Term::app(f, t.var))
    }

    /// Folds every term of the formula into simple form.
    pub fn make_simple(&mut self, e: &Expr) -> Result<Expr> {
        let mut simple = true;
        e.visit_atoms(&mut |a| {
            simple &= match a {
                Atom::Eq(x, y) => x.is_simple() && y.is_simple() && x != y,
                Atom::Color(_, t) => t.is_simple(),
            }
        });
        if simple {
            return Ok(e.clone());
        }
        let mut err = None;
        let out = e.map_atoms(&mut |a| {
            if err.is_some() {
                return Expr::Const(false);
            }
            let r = match a {
                Atom::Eq(x, y) => self
                    .simple_term(x)
                    .and_then(|x| Ok(Expr::eq(x, self.simple_term(y)?))),
                Atom::Color(c, t) => self.simple_term(t).map(|t| Expr::color(*c, t)),
            };
            r.unwrap_or_else(|e| {
                err = Some(e);
                Expr::Const(false)
            })
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Replaces every maximal group of subformulas on a single variable by
    /// one color atom. Quantifier-free input only.
    pub fn compress_unary(&mut self, e: &Expr) -> Expr {
        let (out, vars) = self.compress(e);
        match vars {
            Vars::One(v) => self.collapse(&out, v),
            _ => out,
        }
    }

    fn compress(&mut self, e: &Expr) -> (Expr, Vars) {
        match e {
            Expr::Const(_) => (e.clone(), Vars::None),
            Expr::Atom(a) => {
                let vars = a.vars().fold(Vars::None, |acc, v| acc.join(Vars::One(v)));
                (e.clone(), vars)
            }
            Expr::Not(inner) => {
                let (x, vars) = self.compress(inner);
                (Expr::not(x), vars)
            }
            Expr::And(parts) | Expr::Or(parts) => {
                let conj = matches!(e, Expr::And(_));
                let mut rest = Vec::new();
                let mut groups: Vec<(Var, Vec<Expr>)> = Vec::new();
                let mut all = Vars::None;
                for p in parts {
                    let (x, vars) = self.compress(p);
                    all = all.join(vars);
                    match vars {
                        Vars::One(v) => match groups.iter_mut().find(|(w, _)| *w == v) {
                            Some((_, g)) => g.push(x),
                            None => groups.push((v, vec![x])),
                        },
                        _ => rest.push(x),
                    }
                }
                for (v, g) in groups {
                    let joined = if conj { Expr::and(g) } else { Expr::or(g) };
                    rest.push(self.collapse(&joined, v));
                }
                (if conj { Expr::and(rest) } else { Expr::or(rest) }, all)
            }
            Expr::Exists(..) => (e.clone(), Vars::Many),
        }
    }

    fn collapse(&mut self, e: &Expr, v: Var) -> Expr {
        if let Expr::Atom(Atom::Color(_, t)) = e {
            if t.chain.is_empty() {
                return e.clone();
            }
        }
        let g = self.graph();
        let n = g.len();
        let mut set = BitSet::new(n);
        let mut env = vec![0u32; v as usize + 1];
        for u in g.vertices() {
            env[v as usize] = u;
            if e.eval(g, &mut env) {
                set.insert(u);
            }
        }
        crate::cost::add(n as u64);
        match set.count() {
            0 => Expr::Const(false),
            c if c == n => Expr::Const(true),
            _ => Expr::color(self.set_color(set), Term::var(v)),
        }
    }
}
