//! Elimination of one existential quantifier through bounded witness sets.

use crate::cost;
use crate::error::Result;
use crate::model::{BitSet, ColorId, FuncId, FunctionalGraph};

use super::expr::{Expr, Var};
use super::normalize::{normalize, DeltaEq, Disjunct, Normalized};
use super::workspace::Workspace;

/// `σ(σ+1)·|x̄| + 1`: the witness threshold for `σ` unary symbols and
/// `|x̄|` outer variables.
pub fn beta_p(sigma: u64, xbar: u64) -> u64 {
    sigma * (sigma + 1) * xbar + 1
}

/// Witness threshold actually used for a disjunct: one more than the
/// number of inequalities.
pub fn beta_d(d: &Disjunct) -> usize {
    d.neq.len() + 1
}

/// What one elimination produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageReport {
    pub var: Var,
    pub level: usize,
    pub ydnf_len: usize,
    pub disjuncts: usize,
    pub colors: usize,
    pub functions: usize,
    /// Largest witness set over all anchors.
    pub witness_max: usize,
    /// Largest `β_d` of a disjunct.
    pub beta_max: usize,
    /// Whether every witness set respected `β_d^(m+1)`.
    pub witness_bounded: bool,
    /// Largest `β_p^(σ+1)` over the disjuncts, saturating.
    pub size_bound: u64,
}

/// Witness sets of one disjunct: per anchor vertex for an `F` equality,
/// a single global list otherwise.
#[derive(Debug, Clone)]
pub enum Witness {
    Anchored(Vec<Vec<u32>>),
    Global(Vec<u32>),
}

impl Witness {
    pub fn max_len(&self) -> usize {
        match self {
            Witness::Anchored(w) => w.iter().map(Vec::len).max().unwrap_or(0),
            Witness::Global(w) => w.len(),
        }
    }
}

/// Rank-indexed symbols of a type; index 0 is the identity.
fn rank_syms(d: &Disjunct) -> Vec<Option<FuncId>> {
    (0..=d.ptype.m).map(|r| d.ptype.canon(r)).collect()
}

fn at(g: &FunctionalGraph, f: Option<FuncId>, u: u32) -> u32 {
    match f {
        Some(f) => g.apply(f, u),
        None => u,
    }
}

/// Whether `u` joins a witness list. `value(i, w)` gives the rank-`i`
/// value of `w`; rank `top` always agrees.
fn admits(list: &[u32], u: u32, top: usize, beta: usize, value: &impl Fn(usize, u32) -> u32) -> bool {
    if list.is_empty() {
        return true;
    }
    for i in 1..=top {
        let mine = value(i, u);
        let mut s: Vec<u32> = Vec::new();
        for &w in list {
            cost::tick();
            if value(i, w) == mine {
                let below = value(i - 1, w);
                if !s.contains(&below) {
                    s.push(below);
                }
            }
        }
        if !s.is_empty() {
            return s.len() < beta;
        }
    }
    unreachable!("the top rank always agrees")
}

pub fn compute_witness(g: &FunctionalGraph, d: &Disjunct) -> Witness {
    let syms = rank_syms(d);
    let beta = beta_d(d);
    let members = g.color_set(d.color);
    match &d.eq {
        DeltaEq::F { sym, rank, .. } => {
            let mut w: Vec<Vec<u32>> = vec![Vec::new(); g.len()];
            let value = |i: usize, u: u32| at(g, syms[i], u);
            for u in members.iter() {
                let v = g.apply(*sym, u);
                if admits(&w[v as usize], u, *rank as usize, beta, &value) {
                    w[v as usize].push(u);
                }
            }
            Witness::Anchored(w)
        }
        _ => {
            let m = d.ptype.m as usize;
            let value = |i: usize, u: u32| if i > m { 0 } else { at(g, syms[i], u) };
            let mut w = Vec::new();
            for u in members.iter() {
                if admits(&w, u, m + 1, beta, &value) {
                    w.push(u);
                }
            }
            Witness::Global(w)
        }
    }
}

/// `∃y` of a quantifier-free formula, as a quantifier-free formula over
/// the remaining variables.
pub fn eliminate(ws: &mut Workspace, e: &Expr, y: Var) -> Result<(Expr, StageReport)> {
    let others = e.free_vars().into_iter().filter(|&v| v != y).count();
    if others == 0 {
        let g = ws.graph();
        let width = e.free_vars().iter().max().map_or(0, |&v| v as usize + 1).max(y as usize + 1);
        let mut env = vec![0; width];
        let found = g.vertices().any(|u| {
            env[y as usize] = u;
            e.eval(g, &mut env)
        });
        let rep = StageReport {
            var: y,
            witness_bounded: true,
            functions: g.signature().func_count(),
            ..Default::default()
        };
        return Ok((Expr::Const(found), rep));
    }
    let before = ws.colors_made();
    let nf = normalize(ws, e, y)?;
    let (out, mut rep) = eliminate_normalized(ws, &nf)?;
    rep.colors = ws.colors_made() - before;
    Ok((out, rep))
}

/// Eliminates `y` from every disjunct of a normal form.
pub fn eliminate_normalized(ws: &mut Workspace, nf: &Normalized) -> Result<(Expr, StageReport)> {
    let mut rep = StageReport {
        var: nf.y,
        level: nf.level,
        ydnf_len: nf.ydnf_len,
        disjuncts: nf.disjuncts.len(),
        witness_bounded: true,
        ..Default::default()
    };
    let xbar = nf.to_expr().free_vars().len().saturating_sub(1) as u64;
    let mut parts = Vec::new();
    for d in &nf.disjuncts {
        let (e, stats) = eliminate_disjunct(ws, d)?;
        let beta = beta_d(d);
        let sigma = d.ptype.syms.len() as u64 + 1;
        rep.witness_max = rep.witness_max.max(stats);
        rep.beta_max = rep.beta_max.max(beta);
        let own = (beta as u64).saturating_pow(d.ptype.m as u32 + 1);
        rep.witness_bounded &= stats as u64 <= own;
        rep.size_bound = rep
            .size_bound
            .max(beta_p(sigma, xbar.max(1)).saturating_pow(sigma as u32 + 1));
        parts.push(e);
    }
    rep.functions = ws.graph().signature().func_count();
    Ok((Expr::or(parts), rep))
}

fn color_from(ws: &mut Workspace, name: String, from: &str, members: impl Iterator<Item = u32>) -> ColorId {
    let mut set = BitSet::new(ws.graph().len());
    for v in members {
        cost::tick();
        set.insert(v);
    }
    ws.add_color(name, from, set)
}

/// `∃y` of one disjunct and the size of its largest witness set.
pub fn eliminate_disjunct(ws: &mut Workspace, d: &Disjunct) -> Result<(Expr, usize)> {
    match &d.eq {
        DeltaEq::Y(t) => {
            let e = Expr::and([d.psi1.clone(), Expr::color(d.color, t.clone())]);
            Ok((e, 1))
        }
        DeltaEq::F { sym, rank, x: gx } => {
            let witness = compute_witness(ws.graph(), d);
            let Witness::Anchored(w) = witness else { unreachable!() };
            let (f0, i0) = (*sym, *rank);
            let size = w.iter().map(Vec::len).max().unwrap_or(0);
            let id = ws.colors_made();
            let mut alts = Vec::new();
            for i in 1..=size {
                let p_i = color_from(ws, format!("wit_{id}_{i}"), "witness", {
                    let w = &w;
                    (0..w.len() as u32).filter(move |&v| w[v as usize].len() >= i)
                });
                let mut parts = vec![d.psi1.clone(), Expr::color(p_i, gx.clone())];
                let mut q_i = None;
                for c in &d.neq {
                    if c.rank == 0 {
                        let q = match q_i {
                            Some(q) => q,
                            None => {
                                let q = color_from(
                                    ws,
                                    format!("wq_{id}_{i}"),
                                    "witness",
                                    w.iter().filter_map(|l| l.get(i - 1).copied()),
                                );
                                q_i = Some(q);
                                q
                            }
                        };
                        let back = ws.simple_term(&c.x.then(f0))?;
                        parts.push(Expr::not(Expr::and([
                            Expr::eq(back, gx.clone()),
                            Expr::color(q, c.x.clone()),
                        ])));
                    } else if c.rank < i0 {
                        let fj = c.sym.expect("ranked clause");
                        let h = d.ptype.link(c.rank, i0);
                        let g = ws.graph();
                        let members: Vec<u32> = (0..w.len() as u32)
                            .filter_map(|a| {
                                let u = *w[a as usize].get(i - 1)?;
                                let v = g.apply(fj, u);
                                (g.apply(h, v) == a).then_some(v)
                            })
                            .collect();
                        let pc = color_from(ws, format!("wp_{id}_{i}_{}", c.rank), "witness", members.into_iter());
                        let up = ws.simple_term(&c.x.then(h))?;
                        parts.push(Expr::not(Expr::and([
                            Expr::eq(up, gx.clone()),
                            Expr::color(pc, c.x.clone()),
                        ])));
                    } else {
                        let lhs = if c.rank == i0 {
                            gx.clone()
                        } else {
                            ws.simple_term(&gx.then(d.ptype.link(i0, c.rank)))?
                        };
                        parts.push(Expr::neq(lhs, c.x.clone()));
                    }
                }
                alts.push(Expr::and(parts));
            }
            Ok((Expr::or(alts), size))
        }
        DeltaEq::None => {
            let witness = compute_witness(ws.graph(), d);
            let Witness::Global(w) = witness else { unreachable!() };
            let mut alts = Vec::new();
            for &u in &w {
                let mut parts = vec![d.psi1.clone()];
                for c in &d.neq {
                    let v = match c.sym {
                        Some(f) => ws.graph().apply(f, u),
                        None => u,
                    };
                    let pt = ws.point(v);
                    parts.push(Expr::not(Expr::color(pt, c.x.clone())));
                }
                alts.push(Expr::and(parts));
            }
            Ok((Expr::or(alts), w.len()))
        }
    }
}
