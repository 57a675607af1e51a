//! Constant-time evaluation of compiled quantifier-free formulas.

use std::collections::HashMap;

use crate::compiler::{Atom, Expr, Term};
use crate::cost;
use crate::model::{BitSet, ColorId, FuncId, FunctionalGraph};

/// Flat lookup tables for the symbols a set of programs uses.
#[derive(Debug, Clone, Default)]
pub struct AtomIndex {
    tables: Vec<Vec<u32>>,
    func_slot: HashMap<FuncId, usize>,
    colors: Vec<BitSet>,
    color_slot: HashMap<ColorId, usize>,
}

impl AtomIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn func(&mut self, g: &FunctionalGraph, f: FuncId) -> usize {
        if let Some(&s) = self.func_slot.get(&f) {
            return s;
        }
        let table = g.vertices().map(|v| g.apply(f, v)).collect();
        self.tables.push(table);
        self.func_slot.insert(f, self.tables.len() - 1);
        self.tables.len() - 1
    }

    pub fn color(&mut self, g: &FunctionalGraph, c: ColorId) -> usize {
        if let Some(&s) = self.color_slot.get(&c) {
            return s;
        }
        cost::add(g.len() as u64);
        self.colors.push(g.color_set(c).clone());
        self.color_slot.insert(c, self.colors.len() - 1);
        self.colors.len() - 1
    }

    #[inline]
    pub fn image(&self, slot: usize, v: u32) -> u32 {
        cost::tick();
        self.tables[slot][v as usize]
    }

    #[inline]
    pub fn has(&self, slot: usize, v: u32) -> bool {
        cost::tick();
        self.colors[slot].contains(v)
    }

    pub fn table(&self, slot: usize) -> &[u32] {
        &self.tables[slot]
    }
}

/// A simple term resolved against an [`AtomIndex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lookup {
    pub var: u32,
    pub func: Option<usize>,
}

impl Lookup {
    pub fn new(t: &Term, g: &FunctionalGraph, idx: &mut AtomIndex) -> Self {
        lay_term(t, g, idx)
    }

    #[inline]
    pub fn eval(&self, idx: &AtomIndex, env: &[u32]) -> u32 {
        let v = env[self.var as usize];
        match self.func {
            Some(s) => idx.image(s, v),
            None => v,
        }
    }
}

type PTerm = Lookup;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PAtom {
    Eq(PTerm, PTerm),
    Color(usize, PTerm),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Const(bool),
    Atom(usize),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
}

/// A simple quantifier-free formula laid out for evaluation against an
/// [`AtomIndex`]. Every test reads every atom once, so the number of
/// lookups depends on the formula only.
#[derive(Debug, Clone)]
pub struct Program {
    atoms: Vec<PAtom>,
    root: Node,
    width: usize,
}

impl Program {
    /// Panics if the formula has quantifiers or non-simple terms.
    pub fn new(e: &Expr, g: &FunctionalGraph, idx: &mut AtomIndex) -> Self {
        let mut atoms = Vec::new();
        let mut seen = HashMap::new();
        let root = lay_out(e, g, idx, &mut atoms, &mut seen);
        let width = e.free_vars().iter().max().map_or(0, |&v| v as usize + 1);
        Program { atoms, root, width }
    }

    /// Number of variables the program reads.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    #[inline]
    fn term(idx: &AtomIndex, t: PTerm, env: &[u32]) -> u32 {
        t.eval(idx, env)
    }

    /// Membership of `env` (indexed by variable) in the formula.
    pub fn test(&self, idx: &AtomIndex, env: &[u32]) -> bool {
        let mut vals = [false; 64];
        let mut heap;
        let buf: &mut [bool] = if self.atoms.len() <= 64 {
            &mut vals[..self.atoms.len()]
        } else {
            heap = vec![false; self.atoms.len()];
            &mut heap
        };
        for (slot, a) in buf.iter_mut().zip(&self.atoms) {
            *slot = match *a {
                PAtom::Eq(s, t) => Self::term(idx, s, env) == Self::term(idx, t, env),
                PAtom::Color(c, t) => idx.has(c, Self::term(idx, t, env)),
            };
        }
        eval_node(&self.root, buf)
    }
}

fn eval_node(n: &Node, vals: &[bool]) -> bool {
    match n {
        Node::Const(b) => *b,
        Node::Atom(i) => vals[*i],
        Node::Not(m) => !eval_node(m, vals),
        Node::And(ms) => ms.iter().fold(true, |acc, m| eval_node(m, vals) & acc),
        Node::Or(ms) => ms.iter().fold(false, |acc, m| eval_node(m, vals) | acc),
    }
}

fn lay_term(t: &Term, g: &FunctionalGraph, idx: &mut AtomIndex) -> PTerm {
    assert!(t.is_simple(), "program terms must be simple");
    PTerm {
        var: t.var,
        func: t.func().map(|f| idx.func(g, f)),
    }
}

fn lay_out(
    e: &Expr,
    g: &FunctionalGraph,
    idx: &mut AtomIndex,
    atoms: &mut Vec<PAtom>,
    seen: &mut HashMap<Atom, usize>,
) -> Node {
    match e {
        Expr::Const(b) => Node::Const(*b),
        Expr::Atom(a) => {
            if let Some(&i) = seen.get(a) {
                return Node::Atom(i);
            }
            let pa = match a {
                Atom::Eq(s, t) => PAtom::Eq(lay_term(s, g, idx), lay_term(t, g, idx)),
                Atom::Color(c, t) => {
                    let slot = idx.color(g, *c);
                    PAtom::Color(slot, lay_term(t, g, idx))
                }
            };
            atoms.push(pa);
            seen.insert(a.clone(), atoms.len() - 1);
            Node::Atom(atoms.len() - 1)
        }
        Expr::Not(inner) => Node::Not(Box::new(lay_out(inner, g, idx, atoms, seen))),
        Expr::And(es) => Node::And(es.iter().map(|x| lay_out(x, g, idx, atoms, seen)).collect()),
        Expr::Or(es) => Node::Or(es.iter().map(|x| lay_out(x, g, idx, atoms, seen)).collect()),
        Expr::Exists(..) => panic!("programs are quantifier-free"),
    }
}

/// Vertices satisfying a one-variable program, ascending.
pub fn eval_unary(p: &Program, idx: &AtomIndex, n: usize) -> Vec<u32> {
    let mut env = vec![0u32; p.width().max(1)];
    (0..n as u32)
        .filter(|&v| {
            env[0] = v;
            p.test(idx, &env)
        })
        .collect()
}
