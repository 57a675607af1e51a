//! Resolved formulas over a functional signature with indexed variables.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ColorId, FuncId, FunctionalGraph, Signature};
use crate::query::{Formula, Query, Term as QTerm};

pub type Var = u32;

/// A variable under a chain of function applications, innermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub var: Var,
    pub chain: Vec<FuncId>,
}

impl Term {
    pub fn var(v: Var) -> Self {
        Term { var: v, chain: Vec::new() }
    }

    pub fn app(f: FuncId, v: Var) -> Self {
        Term { var: v, chain: vec![f] }
    }

    /// `f` applied on top of this term.
    pub fn then(&self, f: FuncId) -> Self {
        let mut chain = self.chain.clone();
        chain.push(f);
        Term { var: self.var, chain }
    }

    /// This term with its variable replaced by `t`.
    pub fn substitute(&self, t: &Term) -> Self {
        let mut chain = t.chain.clone();
        chain.extend_from_slice(&self.chain);
        Term { var: t.var, chain }
    }

    pub fn is_simple(&self) -> bool {
        self.chain.len() <= 1
    }

    pub fn func(&self) -> Option<FuncId> {
        self.chain.last().copied()
    }

    #[inline]
    pub fn eval(&self, g: &FunctionalGraph, env: &[u32]) -> u32 {
        g.apply_chain(&self.chain, env[self.var as usize])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Eq(Term, Term),
    Color(ColorId, Term),
}

impl Atom {
    /// Equality with its sides in canonical order.
    pub fn eq(a: Term, b: Term) -> Self {
        if a <= b {
            Atom::Eq(a, b)
        } else {
            Atom::Eq(b, a)
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        let (a, b) = match self {
            Atom::Eq(a, b) => (a.var, Some(b.var)),
            Atom::Color(_, t) => (t.var, None),
        };
        std::iter::once(a).chain(b)
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Eq(a, b) => vec![a, b],
            Atom::Color(_, t) => vec![t],
        }
    }

    fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Atom {
        match self {
            Atom::Eq(a, b) => Atom::eq(f(a), f(b)),
            Atom::Color(c, t) => Atom::Color(*c, f(t)),
        }
    }

    #[inline]
    pub fn eval(&self, g: &FunctionalGraph, env: &[u32]) -> bool {
        match self {
            Atom::Eq(a, b) => a.eval(g, env) == b.eval(g, env),
            Atom::Color(c, t) => g.has_color(*c, t.eval(g, env)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(bool),
    Atom(Atom),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Exists(Var, Box<Expr>),
}

impl Expr {
    pub fn atom(a: Atom) -> Self {
        Expr::Atom(a)
    }

    pub fn eq(a: Term, b: Term) -> Self {
        if a == b {
            Expr::Const(true)
        } else {
            Expr::Atom(Atom::eq(a, b))
        }
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Expr::not(Expr::eq(a, b))
    }

    pub fn color(c: ColorId, t: Term) -> Self {
        Expr::Atom(Atom::Color(c, t))
    }

    pub fn not(e: Expr) -> Self {
        match e {
            Expr::Const(b) => Expr::Const(!b),
            Expr::Not(inner) => *inner,
            e => Expr::Not(Box::new(e)),
        }
    }

    /// Conjunction with constant folding and flattening.
    pub fn and(parts: impl IntoIterator<Item = Expr>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Expr::Const(true) => {}
                Expr::Const(false) => return Expr::Const(false),
                Expr::And(inner) => out.extend(inner),
                e => out.push(e),
            }
        }
        dedup_keep_order(&mut out);
        match out.len() {
            0 => Expr::Const(true),
            1 => out.pop().unwrap(),
            _ => Expr::And(out),
        }
    }

    /// Disjunction with constant folding and flattening.
    pub fn or(parts: impl IntoIterator<Item = Expr>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Expr::Const(false) => {}
                Expr::Const(true) => return Expr::Const(true),
                Expr::Or(inner) => out.extend(inner),
                e => out.push(e),
            }
        }
        dedup_keep_order(&mut out);
        match out.len() {
            0 => Expr::Const(false),
            1 => out.pop().unwrap(),
            _ => Expr::Or(out),
        }
    }

    pub fn exists(v: Var, e: Expr) -> Self {
        Expr::Exists(v, Box::new(e))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Atom(_) => true,
            Expr::Not(e) => e.is_quantifier_free(),
            Expr::And(es) | Expr::Or(es) => es.iter().all(Expr::is_quantifier_free),
            Expr::Exists(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Atom(a) => out.extend(a.vars()),
            Expr::Not(e) => e.collect_free(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.collect_free(out)),
            Expr::Exists(v, e) => {
                let mut inner = BTreeSet::new();
                e.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.free_vars().contains(&v)
    }

    /// Every atom, in preorder.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Expr::Const(_) => {}
            Expr::Atom(a) => f(a),
            Expr::Not(e) | Expr::Exists(_, e) => e.visit_atoms(f),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.visit_atoms(f)),
        }
    }

    /// Rewrites every atom, folding constants on the way up.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Atom) -> Expr) -> Expr {
        match self {
            Expr::Const(b) => Expr::Const(*b),
            Expr::Atom(a) => f(a),
            Expr::Not(e) => Expr::not(e.map_atoms(f)),
            Expr::And(es) => Expr::and(es.iter().map(|e| e.map_atoms(f)).collect::<Vec<_>>()),
            Expr::Or(es) => Expr::or(es.iter().map(|e| e.map_atoms(f)).collect::<Vec<_>>()),
            Expr::Exists(v, e) => Expr::exists(*v, e.map_atoms(f)),
        }
    }

    /// Rewrites every term.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Expr {
        self.map_atoms(&mut |a| match a.map_terms(f) {
            Atom::Eq(x, y) => Expr::eq(x, y),
            other => Expr::Atom(other),
        })
    }

    /// Replaces the free variable `v` by `t`.
    pub fn substitute(&self, v: Var, t: &Term) -> Expr {
        self.map_terms(&mut |s| if s.var == v { s.substitute(t) } else { s.clone() })
    }

    /// Propagates the literals of each conjunction into its other parts and
    /// drops disjuncts whose literals include those of another disjunct.
    pub fn simplify(&self) -> Expr {
        self.simp(&mut Vec::new())
    }

    fn literal(&self) -> Option<(&Atom, bool)> {
        match self {
            Expr::Atom(a) => Some((a, true)),
            Expr::Not(e) => match &**e {
                Expr::Atom(a) => Some((a, false)),
                _ => None,
            },
            _ => None,
        }
    }

    fn simp(&self, facts: &mut Vec<(Atom, bool)>) -> Expr {
        let known = |facts: &Vec<(Atom, bool)>, a: &Atom| facts.iter().find(|(b, _)| b == a).map(|(_, v)| *v);
        match self {
            Expr::Const(_) | Expr::Exists(..) => self.clone(),
            Expr::Atom(a) => known(facts, a).map_or_else(|| self.clone(), Expr::Const),
            Expr::Not(e) => Expr::not(e.simp(facts)),
            Expr::And(parts) => {
                let mark = facts.len();
                let mut lits = Vec::new();
                let mut others = Vec::new();
                for p in parts {
                    match p.literal() {
                        Some((a, v)) => match known(facts, a) {
                            Some(w) if w == v => {}
                            Some(_) => {
                                facts.truncate(mark);
                                return Expr::Const(false);
                            }
                            None => {
                                facts.push((a.clone(), v));
                                lits.push(p.clone());
                            }
                        },
                        None => others.push(p),
                    }
                }
                let mut out = lits;
                for p in others {
                    let x = p.simp(facts);
                    if x == Expr::Const(false) {
                        facts.truncate(mark);
                        return x;
                    }
                    out.push(x);
                }
                facts.truncate(mark);
                Expr::and(out)
            }
            Expr::Or(parts) => {
                let done = Expr::or(parts.iter().map(|p| p.simp(facts)).collect::<Vec<_>>());
                let Expr::Or(ds) = done else { return done };
                let sets: Vec<Option<Vec<&Expr>>> = ds
                    .iter()
                    .map(|d| match d {
                        Expr::And(ps) if ps.iter().all(|p| p.literal().is_some()) => Some(ps.iter().collect()),
                        d if d.literal().is_some() => Some(vec![d]),
                        _ => None,
                    })
                    .collect();
                let mut keep = vec![true; ds.len()];
                for i in 0..ds.len() {
                    let Some(si) = &sets[i] else { continue };
                    for j in 0..ds.len() {
                        if i == j || !keep[j] {
                            continue;
                        }
                        let Some(sj) = &sets[j] else { continue };
                        if sj.len() <= si.len() && (sj.len() < si.len() || j < i) && sj.iter().all(|l| si.contains(l)) {
                            keep[i] = false;
                            break;
                        }
                    }
                }
                Expr::or(ds.into_iter().zip(keep).filter(|(_, k)| *k).map(|(d, _)| d).collect::<Vec<_>>())
            }
        }
    }

    /// Substitutes atoms by constants where `assign` decides them.
    pub fn assign(&self, assign: &impl Fn(&Atom) -> Option<bool>) -> Expr {
        self.map_atoms(&mut |a| match assign(a) {
            Some(b) => Expr::Const(b),
            None => Expr::Atom(a.clone()),
        })
    }

    /// Evaluates a quantifier-free formula; quantifiers are evaluated by
    /// exhaustive search and meant for tests only.
    pub fn eval(&self, g: &FunctionalGraph, env: &mut Vec<u32>) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Atom(a) => a.eval(g, env),
            Expr::Not(e) => !e.eval(g, env),
            Expr::And(es) => es.iter().all(|e| e.eval(g, env)),
            Expr::Or(es) => es.iter().any(|e| e.eval(g, env)),
            Expr::Exists(v, e) => {
                let v = *v as usize;
                if env.len() <= v {
                    env.resize(v + 1, 0);
                }
                let saved = env[v];
                let found = g.vertices().any(|u| {
                    env[v] = u;
                    e.eval(g, env)
                });
                env[v] = saved;
                found
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) => 1,
            Expr::Atom(a) => 1 + a.terms().iter().map(|t| t.chain.len()).sum::<usize>(),
            Expr::Not(e) | Expr::Exists(_, e) => 1 + e.size(),
            Expr::And(es) | Expr::Or(es) => 1 + es.iter().map(Expr::size).sum::<usize>(),
        }
    }

    /// All function symbols used.
    pub fn funcs(&self) -> BTreeSet<FuncId> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            for t in a.terms() {
                out.extend(t.chain.iter().copied());
            }
        });
        out
    }

    pub fn colors(&self) -> BTreeSet<ColorId> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            if let Atom::Color(c, _) = a {
                out.insert(*c);
            }
        });
        out
    }

    pub fn display<'a>(&'a self, sig: &'a Signature, names: &'a [String]) -> Shown<'a> {
        Shown { e: self, sig, names }
    }
}

fn dedup_keep_order(v: &mut Vec<Expr>) {
    use std::hash::BuildHasher;
    if v.len() < 2 {
        return;
    }
    if v.len() <= 8 {
        let mut i = 1;
        while i < v.len() {
            if v[..i].contains(&v[i]) {
                v.remove(i);
            } else {
                i += 1;
            }
        }
        return;
    }
    let state = std::collections::hash_map::RandomState::new();
    let mut seen: std::collections::HashMap<u64, Vec<usize>> = std::collections::HashMap::new();
    let mut keep = vec![true; v.len()];
    for i in 0..v.len() {
        let slot = seen.entry(state.hash_one(&v[i])).or_default();
        if slot.iter().any(|&j| v[j] == v[i]) {
            keep[i] = false;
        } else {
            slot.push(i);
        }
    }
    let mut k = keep.into_iter();
    v.retain(|_| k.next().unwrap());
}

/// Resolution of a surface query against a functional signature. Free
/// variables get indices `0..k` in answer order; bound variables follow.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub expr: Expr,
    pub arity: usize,
    pub names: Vec<String>,
}

pub fn resolve(q: &Query, sig: &Signature) -> Result<Resolved> {
    let mut names: Vec<String> = q.free.clone();
    let mut scope: HashMap<String, Var> =
        names.iter().enumerate().map(|(i, n)| (n.clone(), i as Var)).collect();
    let expr = resolve_formula(&q.formula, sig, &mut scope, &mut names)?;
    Ok(Resolved {
        expr,
        arity: q.free.len(),
        names,
    })
}

fn resolve_term(t: &QTerm, sig: &Signature, scope: &HashMap<String, Var>) -> Result<Term> {
    let var = *scope
        .get(t.base_var())
        .ok_or_else(|| Error::Contract(format!("unbound variable {}", t.base_var())))?;
    let chain = t
        .chain()
        .into_iter()
        .map(|f| sig.func_by_name(f).ok_or_else(|| Error::UnknownSymbol(f.to_string())))
        .collect::<Result<_>>()?;
    Ok(Term { var, chain })
}

fn resolve_formula(
    f: &Formula,
    sig: &Signature,
    scope: &mut HashMap<String, Var>,
    names: &mut Vec<String>,
) -> Result<Expr> {
    Ok(match f {
        Formula::True => Expr::Const(true),
        Formula::False => Expr::Const(false),
        Formula::Atom(c, args) => {
            if args.len() != 1 {
                return Err(Error::UnknownSymbol(c.clone()));
            }
            let color = sig.color_by_name(c).ok_or_else(|| Error::UnknownSymbol(c.clone()))?;
            Expr::color(color, resolve_term(&args[0], sig, scope)?)
        }
        Formula::Eq(a, b) => Expr::eq(resolve_term(a, sig, scope)?, resolve_term(b, sig, scope)?),
        Formula::Not(g) => Expr::not(resolve_formula(g, sig, scope, names)?),
        Formula::And(gs) => Expr::and(
            gs.iter()
                .map(|g| resolve_formula(g, sig, scope, names))
                .collect::<Result<Vec<_>>>()?,
        ),
        Formula::Or(gs) => Expr::or(
            gs.iter()
                .map(|g| resolve_formula(g, sig, scope, names))
                .collect::<Result<Vec<_>>>()?,
        ),
        Formula::Exists(v, g) => {
            let id = names.len() as Var;
            names.push(v.clone());
            let old = scope.insert(v.clone(), id);
            let body = resolve_formula(g, sig, scope, names)?;
            match old {
                Some(o) => scope.insert(v.clone(), o),
                None => scope.remove(v),
            };
            Expr::exists(id, body)
        }
    })
}

pub struct Shown<'a> {
    e: &'a Expr,
    sig: &'a Signature,
    names: &'a [String],
}

impl Shown<'_> {
    fn var(&self, v: Var) -> String {
        self.names
            .get(v as usize)
            .cloned()
            .unwrap_or_else(|| format!("v{v}"))
    }

    fn term(&self, t: &Term) -> String {
        let mut s = self.var(t.var);
        for &f in &t.chain {
            s = format!("{}({s})", self.sig.func(f).name);
        }
        s
    }

    fn atom(&self, a: &Atom) -> String {
        match a {
            Atom::Eq(x, y) => format!("{} = {}", self.term(x), self.term(y)),
            Atom::Color(c, t) => format!("{}({})", self.sig.color(*c).name, self.term(t)),
        }
    }

    fn go(&self, e: &Expr, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = match e {
            Expr::Or(_) | Expr::Exists(..) => 0,
            Expr::And(_) => 1,
            _ => 2,
        };
        if prec < min {
            write!(f, "(")?;
        }
        match e {
            Expr::Const(b) => write!(f, "{b}")?,
            Expr::Atom(a) => write!(f, "{}", self.atom(a))?,
            Expr::Not(inner) => match inner.as_ref() {
                Expr::Atom(Atom::Eq(x, y)) => write!(f, "{} != {}", self.term(x), self.term(y))?,
                g => {
                    write!(f, "~")?;
                    self.go(g, f, 2)?;
                }
            },
            Expr::And(es) | Expr::Or(es) => {
                let op = if matches!(e, Expr::And(_)) { " & " } else { " | " };
                for (i, g) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{op}")?;
                    }
                    self.go(g, f, 1)?;
                }
            }
            Expr::Exists(v, g) => {
                write!(f, "exists {}. ", self.var(*v))?;
                self.go(g, f, 0)?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.go(self.e, f, 0)
    }
}
