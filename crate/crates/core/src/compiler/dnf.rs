//! Disjunctive normal form with respect to one variable.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

use super::expr::{Atom, Expr, Var};

/// A literal: an atom and its polarity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub atom: Atom,
    pub positive: bool,
}

impl Lit {
    pub fn negated(&self) -> Lit {
        Lit {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }

    pub fn to_expr(&self) -> Expr {
        let a = Expr::Atom(self.atom.clone());
        if self.positive {
            a
        } else {
            Expr::not(a)
        }
    }
}

/// One disjunct: a formula without `y`, a formula over `y` alone and
/// literals linking `y` to other variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YConj {
    pub x: Expr,
    pub yloc: Expr,
    pub mixed: BTreeSet<Lit>,
}

impl YConj {
    fn unit() -> Self {
        YConj {
            x: Expr::Const(true),
            yloc: Expr::Const(true),
            mixed: BTreeSet::new(),
        }
    }

    fn is_false(&self) -> bool {
        self.x == Expr::Const(false)
            || self.yloc == Expr::Const(false)
            || self.mixed.iter().any(|l| self.mixed.contains(&l.negated()))
    }

    fn meet(&self, o: &YConj) -> YConj {
        YConj {
            x: Expr::and([self.x.clone(), o.x.clone()]),
            yloc: Expr::and([self.yloc.clone(), o.yloc.clone()]),
            mixed: self.mixed.union(&o.mixed).cloned().collect(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        Expr::and(
            [self.x.clone(), self.yloc.clone()]
                .into_iter()
                .chain(self.mixed.iter().map(Lit::to_expr)),
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Without,
    Local,
    Mixed,
}


fn kind(e: &Expr, y: Var) -> Kind {
    let fv = e.free_vars();
    if !fv.contains(&y) {
        Kind::Without
    } else if fv.len() == 1 {
        Kind::Local
    } else {
        Kind::Mixed
    }
}

/// Rewrites a quantifier-free formula into a disjunction of [`YConj`].
pub fn y_dnf(e: &Expr, y: Var, cap: usize) -> Result<Vec<YConj>> {
    let ds = go(e, true, y, cap)?;
    Ok(merge(ds))
}

fn go(e: &Expr, pol: bool, y: Var, cap: usize) -> Result<Vec<YConj>> {
    let signed = |e: &Expr| if pol { e.clone() } else { Expr::not(e.clone()) };
    match kind(e, y) {
        Kind::Without => {
            let c = YConj {
                x: signed(e),
                ..YConj::unit()
            };
            return Ok(if c.is_false() { vec![] } else { vec![c] });
        }
        Kind::Local => {
            let c = YConj {
                yloc: signed(e),
                ..YConj::unit()
            };
            return Ok(if c.is_false() { vec![] } else { vec![c] });
        }
        Kind::Mixed => {}
    }
    match e {
        Expr::Atom(a) => {
            let mut c = YConj::unit();
            c.mixed.insert(Lit {
                atom: a.clone(),
                positive: pol,
            });
            Ok(vec![c])
        }
        Expr::Not(g) => go(g, !pol, y, cap),
        Expr::And(gs) | Expr::Or(gs) => {
            let conj = matches!(e, Expr::And(_)) == pol;
            if conj {
                let mut acc = vec![YConj::unit()];
                for g in gs {
                    let part = go(g, pol, y, cap)?;
                    let mut next = Vec::new();
                    for a in &acc {
                        for b in &part {
                            let m = a.meet(b);
                            if !m.is_false() {
                                next.push(m);
                            }
                        }
                        if next.len() > cap {
                            return Err(Error::DisjunctCap { cap });
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            } else {
                let mut acc = Vec::new();
                for g in gs {
                    acc.extend(go(g, pol, y, cap)?);
                    if acc.len() > cap {
                        return Err(Error::DisjunctCap { cap });
                    }
                }
                Ok(acc)
            }
        }
        Expr::Const(_) => unreachable!("constants have no variables"),
        Expr::Exists(..) => panic!("y_dnf expects a quantifier-free formula"),
    }
}

/// Merges disjuncts that differ only in their `x` part or only in their
/// local part.
fn merge(ds: Vec<YConj>) -> Vec<YConj> {
    let mut by_local: BTreeMap<(Vec<Lit>, String), (Expr, Vec<Expr>)> = BTreeMap::new();
    let mut order = Vec::new();
    for d in ds {
        let key = (d.mixed.iter().cloned().collect::<Vec<_>>(), format!("{:?}", d.yloc));
        if !by_local.contains_key(&key) {
            order.push(key.clone());
        }
        by_local.entry(key).or_insert_with(|| (d.yloc.clone(), Vec::new())).1.push(d.x);
    }
    let mut stage1 = Vec::new();
    for key in order {
        let (yloc, xs) = by_local.remove(&key).unwrap();
        stage1.push(YConj {
            x: Expr::or(xs),
            yloc,
            mixed: key.0.into_iter().collect(),
        });
    }
    let mut by_x: BTreeMap<(Vec<Lit>, String), (Expr, Vec<Expr>)> = BTreeMap::new();
    let mut order = Vec::new();
    for d in stage1 {
        let key = (d.mixed.iter().cloned().collect::<Vec<_>>(), format!("{:?}", d.x));
        if !by_x.contains_key(&key) {
            order.push(key.clone());
        }
        by_x.entry(key).or_insert_with(|| (d.x.clone(), Vec::new())).1.push(d.yloc);
    }
    order
        .into_iter()
        .map(|key| {
            let (x, ylocs) = by_x.remove(&key).unwrap();
            YConj {
                x,
                yloc: Expr::or(ylocs),
                mixed: key.0.into_iter().collect(),
            }
        })
        .filter(|d| !d.is_false())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::expr::Term;
    use crate::model::{BitSet, ColorOrigin, FuncOrigin, FunctionalGraph};

    fn graph() -> FunctionalGraph {
        let mut g = FunctionalGraph::new((0..5).collect());
        g.add_table("f", 0, FuncOrigin::Base, vec![0, 0, 1, 2, 3]);
        let mut s = BitSet::new(5);
        s.insert(1);
        s.insert(3);
        g.add_color("B", ColorOrigin::Base, s);
        g
    }

    fn sample() -> Expr {
        let f = 0;
        let (x, y) = (0, 1);
        Expr::or([
            Expr::and([Expr::eq(Term::app(f, y), Term::var(x)), Expr::color(0, Term::var(y))]),
            Expr::not(Expr::and([
                Expr::color(0, Term::var(x)),
                Expr::eq(Term::var(y), Term::app(f, x)),
            ])),
        ])
    }

    fn agree(e: &Expr, ds: &[YConj]) {
        let g = graph();
        for a in 0..5 {
            for b in 0..5 {
                let mut env = vec![a, b];
                let want = e.eval(&g, &mut env);
                let hits = ds.iter().filter(|d| d.to_expr().eval(&g, &mut env)).count();
                assert_eq!(want, hits > 0, "at ({a},{b})");
            }
        }
    }

    #[test]
    fn equivalent_and_separated() {
        let e = sample();
        let ds = y_dnf(&e, 1, 100).unwrap();
        agree(&e, &ds);
        for d in &ds {
            assert!(!d.x.mentions(1));
            assert!(d.yloc.free_vars().iter().all(|&v| v == 1));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let e = sample();
        assert!(matches!(y_dnf(&e, 1, 1), Err(Error::DisjunctCap { .. })));
    }
}
