//! Normal forms with respect to one variable: p-types, the distinguished
//! equality and the residual inequalities.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::cost;
use crate::error::{Error, Result};
use crate::model::{BitSet, ColorId, FuncId, FunctionalGraph};

use super::dnf::{y_dnf, Lit, YConj};
use super::expr::{Atom, Expr, Term, Var};
use super::workspace::Workspace;

/// How the values of a set of symbols at a vertex relate: which coincide
/// with the vertex, how the others are ordered, and which symbols link
/// consecutive values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PType {
    /// The symbols described, sorted.
    pub syms: Vec<FuncId>,
    /// Rank of each symbol: 0 for the vertex itself, `1..=m` otherwise.
    pub ranks: Vec<u8>,
    /// Number of distinct proper values.
    pub m: u8,
    /// `links[(i, j)]` maps the value of rank `i` to the value of rank `j`.
    pub links: BTreeMap<(u8, u8), FuncId>,
}

impl PType {
    pub fn rank(&self, f: FuncId) -> u8 {
        let i = self.syms.binary_search(&f).expect("symbol outside the type");
        self.ranks[i]
    }

    /// The first symbol of rank `r`, or `None` for rank 0.
    pub fn canon(&self, r: u8) -> Option<FuncId> {
        if r == 0 {
            return None;
        }
        self.syms
            .iter()
            .zip(&self.ranks)
            .find(|(_, &k)| k == r)
            .map(|(&f, _)| f)
    }

    pub fn link(&self, i: u8, j: u8) -> FuncId {
        self.links[&(i, j)]
    }
}

/// The equality singled out in a disjunct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DeltaEq {
    None,
    /// `y = x`.
    Y(Term),
    /// `sym(y) = x` where `sym` has the given rank.
    F { sym: FuncId, rank: u8, x: Term },
}

/// `sym(y) != x`, or `y != x` when `sym` is `None`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NeqClause {
    pub sym: Option<FuncId>,
    pub rank: u8,
    pub x: Term,
}

impl NeqClause {
    pub fn y_term(&self, y: Var) -> Term {
        match self.sym {
            Some(f) => Term::app(f, y),
            None => Term::var(y),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Disjunct {
    pub psi1: Expr,
    pub ptype: PType,
    /// Vertices of the p-type that satisfy the local part.
    pub color: ColorId,
    pub eq: DeltaEq,
    pub neq: Vec<NeqClause>,
}

impl Disjunct {
    pub fn to_expr(&self, y: Var) -> Expr {
        let mut parts = vec![self.psi1.clone(), Expr::color(self.color, Term::var(y))];
        match &self.eq {
            DeltaEq::None => {}
            DeltaEq::Y(t) => parts.push(Expr::eq(Term::var(y), t.clone())),
            DeltaEq::F { sym, x, .. } => parts.push(Expr::eq(Term::app(*sym, y), x.clone())),
        }
        for c in &self.neq {
            parts.push(Expr::neq(c.y_term(y), c.x.clone()));
        }
        Expr::and(parts)
    }
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub y: Var,
    pub level: usize,
    pub ydnf_len: usize,
    pub disjuncts: Vec<Disjunct>,
}

impl Normalized {
    pub fn to_expr(&self) -> Expr {
        Expr::or(self.disjuncts.iter().map(|d| d.to_expr(self.y)).collect::<Vec<_>>())
    }
}

fn split_mixed(a: &Atom, y: Var) -> Option<(Term, Term)> {
    match a {
        Atom::Eq(s, t) if s.var == y && t.var != y => Some((s.clone(), t.clone())),
        Atom::Eq(s, t) if t.var == y && s.var != y => Some((t.clone(), s.clone())),
        _ => None,
    }
}

/// Rewrites `e` into normal form with respect to `y`.
pub fn normalize(ws: &mut Workspace, e: &Expr, y: Var) -> Result<Normalized> {
    let e = ws.make_simple(e)?;
    let conjs = y_dnf(&e, y, ws.limits.disjunct_cap)?;
    let stage = ws.next_stage();
    let width = e.free_vars().iter().max().map_or(0, |&v| v as usize + 1).max(y as usize + 1);

    let fsets: Vec<Vec<FuncId>> = conjs
        .iter()
        .map(|d| {
            let set: BTreeSet<FuncId> = d
                .mixed
                .iter()
                .filter_map(|l| split_mixed(&l.atom, y))
                .filter_map(|(ty, _)| ty.func())
                .collect();
            set.into_iter().collect()
        })
        .collect();
    let locals: Vec<BitSet> = conjs
        .iter()
        .map(|d| local_set(ws.graph(), &d.yloc, y, width))
        .collect();

    let (q, groups) = find_level(ws, &fsets, &locals)?;

    let mut disjuncts = Vec::new();
    for (d, grouped) in conjs.iter().zip(groups) {
        for (ptype, set) in grouped {
            let name = format!("tau_{stage}_{}", ws.colors_made());
            let color = ws.add_color(name, "ptype", set);
            if let Some(dj) = reduce(ws, d, ptype, color, y)? {
                disjuncts.push(dj);
            }
        }
    }
    Ok(Normalized {
        y,
        level: q,
        ydnf_len: conjs.len(),
        disjuncts,
    })
}

/// The least level at which every vertex has totally ordered values, and
/// the p-type partition there.
fn find_level(ws: &mut Workspace, fsets: &[Vec<FuncId>], locals: &[BitSet]) -> Result<(usize, Groups)> {
    let sig = ws.graph().signature();
    let p = fsets.iter().flatten().map(|&f| sig.level(f)).max().unwrap_or(0);
    let widest = fsets.iter().map(Vec::len).max().unwrap_or(0);
    let mut q = p;
    loop {
        if q > ws.limits.max_level || q > p + widest {
            return Err(Error::OrderLemma(q as u64));
        }
        ws.h.ensure(q)?;
        if let Some(g) = type_groups(ws, q, fsets, locals)? {
            return Ok((q, g));
        }
        q += 1;
    }
}

fn local_set(g: &FunctionalGraph, yloc: &Expr, y: Var, width: usize) -> BitSet {
    let mut set = BitSet::new(g.len());
    let mut env = vec![0u32; width];
    for u in g.vertices() {
        env[y as usize] = u;
        if yloc.eval(g, &mut env) {
            set.insert(u);
        }
    }
    set
}

type Groups = Vec<Vec<(PType, BitSet)>>;

/// Partitions each local set by p-type at level `q`; `None` if some
/// vertex has values that are not totally ordered at this level.
fn type_groups(ws: &mut Workspace, q: usize, fsets: &[Vec<FuncId>], locals: &[BitSet]) -> Result<Option<Groups>> {
    let n = ws.graph().len();
    let mut candidates: HashMap<(FuncId, FuncId), Vec<FuncId>> = HashMap::new();
    let mut out = Vec::with_capacity(fsets.len());
    let mut vals = Vec::new();
    let mut distinct: Vec<u32> = Vec::new();
    for (syms, local) in fsets.iter().zip(locals) {
        let mut index: HashMap<PType, usize> = HashMap::new();
        let mut groups: Vec<(PType, BitSet)> = Vec::new();
        for u in local.iter() {
            vals.clear();
            vals.extend(syms.iter().map(|&f| ws.graph().apply(f, u)));
            distinct.clear();
            for &v in &vals {
                if v != u && !distinct.contains(&v) {
                    distinct.push(v);
                }
            }
            let h = &ws.h;
            let above = |r: u32| distinct.iter().filter(|&&s| h.has_arc(q, r, s)).count();
            let mut keyed: Vec<(usize, u32)> = distinct.iter().map(|&r| (above(r), r)).collect();
            keyed.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            let order: Vec<u32> = keyed.iter().map(|&(_, r)| r).collect();
            cost::add(order.len() as u64 * order.len() as u64);
            for i in 0..order.len() {
                for j in i + 1..order.len() {
                    if !ws.h.has_arc(q, order[i], order[j]) {
                        return Ok(None);
                    }
                }
            }
            let ranks: Vec<u8> = vals
                .iter()
                .map(|&v| {
                    if v == u {
                        0
                    } else {
                        order.iter().position(|&r| r == v).unwrap() as u8 + 1
                    }
                })
                .collect();
            let canon = |r: u8| syms[ranks.iter().position(|&k| k == r).unwrap()];
            let mut links = BTreeMap::new();
            for i in 0..order.len() {
                for j in i + 1..order.len() {
                    let key = (canon(i as u8 + 1), canon(j as u8 + 1));
                    let (a, b) = (order[i], order[j]);
                    let known = candidates.get(&key).and_then(|cs| {
                        cs.iter().copied().find(|&h| ws.graph().apply(h, a) == b)
                    });
                    let h = match known {
                        Some(h) => h,
                        None => {
                            let h = ws.h.realize(q, a, b)?;
                            candidates.entry(key).or_default().push(h);
                            h
                        }
                    };
                    links.insert((i as u8 + 1, j as u8 + 1), h);
                }
            }
            let t = PType {
                syms: syms.clone(),
                ranks,
                m: order.len() as u8,
                links,
            };
            let k = *index.entry(t.clone()).or_insert_with(|| {
                groups.push((t, BitSet::new(n)));
                groups.len() - 1
            });
            groups[k].1.insert(u);
        }
        out.push(groups);
    }
    Ok(Some(out))
}

/// Applies a p-type to the linking literals of a disjunct.
fn reduce(ws: &mut Workspace, d: &YConj, ptype: PType, color: ColorId, y: Var) -> Result<Option<Disjunct>> {
    let mut yeqs = Vec::new();
    let mut feqs = Vec::new();
    let mut neq = BTreeSet::new();
    for Lit { atom, positive } in &d.mixed {
        let (ty, tx) = split_mixed(atom, y).expect("mixed literal");
        let (sym, rank) = match ty.func() {
            Some(f) if ptype.rank(f) > 0 => (Some(f), ptype.rank(f)),
            _ => (None, 0),
        };
        match (*positive, sym) {
            (true, None) => yeqs.push(tx),
            (true, Some(f)) => feqs.push((f, rank, tx)),
            (false, _) => {
                neq.insert(NeqClause { sym, rank, x: tx });
            }
        }
    }
    let mut psi = vec![d.x.clone()];
    let eq = if let Some(t0) = yeqs.first().cloned() {
        for t in &yeqs[1..] {
            psi.push(Expr::eq(t0.clone(), t.clone()));
        }
        for (f, _, tx) in &feqs {
            psi.push(Expr::eq(ws.simple_term(&t0.then(*f))?, tx.clone()));
        }
        for c in &neq {
            let lhs = match c.sym {
                Some(f) => ws.simple_term(&t0.then(f))?,
                None => t0.clone(),
            };
            psi.push(Expr::neq(lhs, c.x.clone()));
        }
        neq.clear();
        DeltaEq::Y(t0)
    } else if !feqs.is_empty() {
        let k = (0..feqs.len()).min_by_key(|&i| feqs[i].1).unwrap();
        let (f0, i0, t0) = feqs[k].clone();
        for (i, (_, r, tx)) in feqs.iter().enumerate() {
            if i == k {
                continue;
            }
            let lhs = if *r == i0 {
                t0.clone()
            } else {
                ws.simple_term(&t0.then(ptype.link(i0, *r)))?
            };
            psi.push(Expr::eq(lhs, tx.clone()));
        }
        DeltaEq::F {
            sym: f0,
            rank: i0,
            x: t0,
        }
    } else {
        DeltaEq::None
    };
    let psi1 = ws.make_simple(&Expr::and(psi))?;
    if psi1 == Expr::Const(false) {
        return Ok(None);
    }
    Ok(Some(Disjunct {
        psi1,
        ptype,
        color,
        eq,
        neq: neq.into_iter().collect(),
    }))
}

/// Normal form whose disjuncts have pairwise disjoint solution sets.
///
/// Vertices are split by p-type first. Within a type, the linking
/// equalities are decided one at a time, those on `y` itself first and the
/// others by increasing rank: once one holds, the type settles every later
/// one. The local part is split by the vertex sets of its conjuncts.
pub fn normalize_exclusive(ws: &mut Workspace, e: &Expr, y: Var) -> Result<Normalized> {
    let e = ws.make_simple(e)?;
    let stage = ws.next_stage();
    let n = ws.graph().len();
    let mut mixed: Vec<(Atom, Term, Term)> = Vec::new();
    e.visit_atoms(&mut |a| {
        if let Some((ty, tx)) = split_mixed(a, y) {
            if !mixed.iter().any(|(b, _, _)| b == a) {
                mixed.push((a.clone(), ty, tx));
            }
        }
    });
    let syms: Vec<FuncId> = mixed
        .iter()
        .filter_map(|(_, ty, _)| ty.func())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let (q, mut groups) = find_level(ws, &[syms], &[BitSet::full(n)])?;
    let mut disjuncts = Vec::new();
    let mut leaves = 0;
    for (ptype, set) in groups.pop().unwrap() {
        let tau = ws.add_color(format!("tau_{stage}_{}", ws.colors_made()), "ptype", set.clone());
        let rank_of = |ty: &Term| ty.func().map_or(0, |f| ptype.rank(f));
        let key_of = |ty: &Term, tx: &Term| (rank_of(ty), tx.clone());
        let mut keys: Vec<(u8, Term)> = mixed.iter().map(|(_, ty, tx)| key_of(ty, tx)).collect();
        keys.sort();
        keys.dedup();
        let atom_key: HashMap<Atom, (u8, Term)> =
            mixed.iter().map(|(a, ty, tx)| (a.clone(), key_of(ty, tx))).collect();
        for (i, (r, t)) in keys.iter().enumerate() {
            let prev = &keys[..i];
            leaves += 1;
            if *r == 0 {
                let mut parts = vec![e.substitute(y, t)];
                parts.extend(prev.iter().map(|(_, s)| Expr::neq(t.clone(), s.clone())));
                let psi1 = ws.make_simple(&Expr::and(parts))?;
                if psi1 != Expr::Const(false) {
                    disjuncts.push(Disjunct {
                        psi1,
                        ptype: ptype.clone(),
                        color: tau,
                        eq: DeltaEq::Y(t.clone()),
                        neq: Vec::new(),
                    });
                }
                continue;
            }
            let mut settle = HashMap::new();
            for (k2 @ (r2, s), _) in keys.iter().map(|k| (k, ())) {
                let v = if *r2 == 0 || r2 < r {
                    Expr::Const(false)
                } else if r2 == r {
                    Expr::eq(t.clone(), s.clone())
                } else {
                    let up = ws.simple_term(&t.then(ptype.link(*r, *r2)))?;
                    Expr::eq(up, s.clone())
                };
                settle.insert(k2.clone(), v);
            }
            let rest = e.map_atoms(&mut |a| match atom_key.get(a) {
                Some(k) => settle[k].clone(),
                None => Expr::Atom(a.clone()),
            });
            let mut extra = Vec::new();
            let mut neq = Vec::new();
            for (r2, s) in prev {
                if r2 == r {
                    extra.push(Expr::neq(t.clone(), s.clone()));
                } else {
                    neq.push(NeqClause {
                        sym: ptype.canon(*r2),
                        rank: *r2,
                        x: s.clone(),
                    });
                }
            }
            let sym = ptype.canon(*r).expect("ranked key");
            let eq = DeltaEq::F {
                sym,
                rank: *r,
                x: t.clone(),
            };
            cells(ws, &rest, &extra, y, &set, stage, &ptype, &eq, &neq, &mut disjuncts)?;
        }
        leaves += 1;
        let rest = e.map_atoms(&mut |a| match atom_key.get(a) {
            Some(_) => Expr::Const(false),
            None => Expr::Atom(a.clone()),
        });
        let neq: Vec<NeqClause> = keys
            .iter()
            .map(|(r, s)| NeqClause {
                sym: ptype.canon(*r),
                rank: *r,
                x: s.clone(),
            })
            .collect();
        cells(ws, &rest, &[], y, &set, stage, &ptype, &DeltaEq::None, &neq, &mut disjuncts)?;
    }
    Ok(Normalized {
        y,
        level: q,
        ydnf_len: leaves,
        disjuncts,
    })
}

/// Splits a formula without linking atoms into disjoint pieces: vertices
/// of `within` are grouped by the truth of the atoms on `y` alone, and
/// groups that leave the same residual share one piece.
#[allow(clippy::too_many_arguments)]
fn cells(
    ws: &mut Workspace,
    rest: &Expr,
    extra: &[Expr],
    y: Var,
    within: &BitSet,
    stage: usize,
    ptype: &PType,
    eq: &DeltaEq,
    neq: &[NeqClause],
    out: &mut Vec<Disjunct>,
) -> Result<()> {
    let rest = ws.make_simple(&Expr::and(std::iter::once(rest.clone()).chain(extra.iter().cloned())))?;
    if rest == Expr::Const(false) {
        return Ok(());
    }
    let mut local: Vec<&Atom> = Vec::new();
    rest.visit_atoms(&mut |a| {
        if a.vars().all(|v| v == y) && !local.contains(&a) {
            local.push(a);
        }
    });
    let n = ws.graph().len();
    let mut env = vec![0u32; y as usize + 1];
    let mut by_pattern: BTreeMap<Vec<bool>, BitSet> = BTreeMap::new();
    for u in within.iter() {
        cost::add(local.len() as u64 + 1);
        env[y as usize] = u;
        let pattern: Vec<bool> = local.iter().map(|a| a.eval(ws.graph(), &env)).collect();
        by_pattern.entry(pattern).or_insert_with(|| BitSet::new(n)).insert(u);
    }
    let mut by_residual: Vec<(Expr, BitSet)> = Vec::new();
    let mut slot: HashMap<Expr, usize> = HashMap::new();
    for (pattern, members) in by_pattern {
        let psi = rest.assign(&|a| local.iter().position(|b| *b == a).map(|i| pattern[i]));
        let psi1 = ws.make_simple(&psi)?;
        if psi1 == Expr::Const(false) {
            continue;
        }
        match slot.get(&psi1) {
            Some(&i) => by_residual[i].1.union_with(&members),
            None => {
                slot.insert(psi1.clone(), by_residual.len());
                by_residual.push((psi1, members));
            }
        }
    }
    for (psi1, members) in by_residual {
        let color = ws.add_color(format!("cell_{stage}_{}", ws.colors_made()), "cell", members);
        out.push(Disjunct {
            psi1,
            ptype: ptype.clone(),
            color,
            eq: eq.clone(),
            neq: neq.to_vec(),
        });
    }
    Ok(())
}
