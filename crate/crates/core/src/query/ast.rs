use std::collections::HashSet;
use std::fmt;

/// A variable under zero or more unary function applications.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(String, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn app(f: impl Into<String>, t: Term) -> Self {
        Term::App(f.into(), Box::new(t))
    }

    pub fn base_var(&self) -> &str {
        match self {
            Term::Var(v) => v,
            Term::App(_, t) => t.base_var(),
        }
    }

    /// Function symbols, innermost first.
    pub fn chain(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut t = self;
        while let Term::App(f, inner) = t {
            out.push(f.as_str());
            t = inner;
        }
        out.reverse();
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, t) => 1 + t.depth(),
        }
    }

    fn rename(&mut self, from: &str, to: &str) {
        match self {
            Term::Var(v) if v == from => *v = to.to_string(),
            Term::Var(_) => {}
            Term::App(_, t) => t.rename(from, to),
        }
    }
}

/// First-order formulas. Universal quantifiers never appear: they are
/// rewritten to negated existentials on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// Relation or color atom `R(t1, ..., tk)`.
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom(name.into(), args)
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Eq(a, b)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn exists(v: impl Into<String>, f: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: impl Into<String>, f: Formula) -> Self {
        Formula::not(Formula::exists(v, Formula::not(f)))
    }

    pub fn and(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    pub fn or(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.collect_free(&mut Vec::new(), &mut seen, &mut out);
        out
    }

    fn collect_free<'a>(
        &'a self,
        bound: &mut Vec<&'a str>,
        seen: &mut HashSet<String>,
        out: &mut Vec<String>,
    ) {
        let mut term = |t: &Term, bound: &Vec<&str>| {
            let v = t.base_var();
            if !bound.contains(&v) && seen.insert(v.to_string()) {
                out.push(v.to_string());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, ts) => ts.iter().for_each(|t| term(t, bound)),
            Formula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Not(f) => f.collect_free(bound, seen, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, seen, out);
                }
            }
            Formula::Exists(v, f) => {
                bound.push(v);
                f.collect_free(bound, seen, out);
                bound.pop();
            }
        }
    }

    /// Quantifier rank.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0)
            }
            Formula::Exists(_, f) => 1 + f.quantifier_rank(),
        }
    }

    /// Number of nodes, counting every term application.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False => 1,
            Formula::Atom(_, ts) => 1 + ts.iter().map(|t| 1 + t.depth()).sum::<usize>(),
            Formula::Eq(a, b) => 3 + a.depth() + b.depth(),
            Formula::Not(f) | Formula::Exists(_, f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_rank() == 0
    }

    /// All bound variable names, in preorder.
    pub fn bound_vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Formula::Exists(v, _) = f {
                out.push(v.as_str());
            }
        });
        out
    }

    /// Visits every subformula in preorder.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        match self {
            Formula::Not(f) | Formula::Exists(_, f) => f.walk(visit),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.walk(visit)),
            _ => {}
        }
    }

    /// Renames free occurrences of `from`.
    pub fn rename_free(&mut self, from: &str, to: &str) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, ts) => ts.iter_mut().for_each(|t| t.rename(from, to)),
            Formula::Eq(a, b) => {
                a.rename(from, to);
                b.rename(from, to);
            }
            Formula::Not(f) => f.rename_free(from, to),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter_mut().for_each(|f| f.rename_free(from, to))
            }
            Formula::Exists(v, f) => {
                if v != from {
                    f.rename_free(from, to)
                }
            }
        }
    }
}

/// A parsed query: a formula together with its answer-variable order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub formula: Formula,
    pub free: Vec<String>,
}

impl Query {
    /// Wraps a formula, taking the free variables in first-occurrence order.
    pub fn new(formula: Formula) -> Self {
        let free = formula.free_vars();
        Self { formula, free }
    }

    pub fn arity(&self) -> usize {
        self.free.len()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(g, t) => write!(f, "{g}({t})"),
        }
    }
}

impl Formula {
    fn prec(&self) -> u8 {
        match self {
            Formula::Or(_) => 0,
            Formula::And(_) => 1,
            Formula::Exists(..) => 0,
            _ => 2,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.prec() < min;
        if paren {
            write!(f, "(")?;
        }
        match self {
            Formula::True => write!(f, "true")?,
            Formula::False => write!(f, "false")?,
            Formula::Atom(r, ts) => {
                write!(f, "{r}(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")?;
            }
            Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Eq(a, b) => write!(f, "{a} != {b}")?,
                g => {
                    write!(f, "~")?;
                    g.fmt_at(f, 2)?;
                }
            },
            Formula::And(fs) | Formula::Or(fs) => {
                let (op, p) = if matches!(self, Formula::And(_)) {
                    (" & ", 1)
                } else {
                    (" | ", 1)
                };
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{op}")?;
                    }
                    g.fmt_at(f, p)?;
                }
            }
            Formula::Exists(v, g) => {
                write!(f, "exists {v}. ")?;
                g.fmt_at(f, 0)?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula)
    }
}
