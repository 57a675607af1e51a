//! Weighted counting of answers by induction on the number of free
//! variables and on the number of inequalities.

use std::collections::HashMap;
use std::fmt::{Debug, Display};
use std::rc::Rc;

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Zero};

use crate::compiler::{normalize_exclusive, DeltaEq, Disjunct, Expr, NeqClause, Term, Var, Workspace};
use crate::model::ColorId;
use crate::cost;
use crate::{Count, SmallCount};
use crate::error::{Error, Result};
use crate::runtime::{AtomIndex, Program};

/// A non-negative count with checked arithmetic.
pub trait Weight: Clone + Debug + Display + PartialEq + Zero + One + CheckedAdd + CheckedMul + CheckedSub + From<u64> {}

impl<T> Weight for T where T: Clone + Debug + Display + PartialEq + Zero + One + CheckedAdd + CheckedMul + CheckedSub + From<u64> {}

/// Per-position weights; `None` is the constant 1.
pub type Weights<W> = Vec<Option<Vec<W>>>;

#[derive(Debug)]
enum Fail {
    Overflow,
    Err(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Err(e)
    }
}

type R<T> = std::result::Result<T, Fail>;

fn add<W: Weight>(a: &W, b: &W) -> R<W> {
    a.checked_add(b).ok_or(Fail::Overflow)
}

fn mul<W: Weight>(a: &W, b: &W) -> R<W> {
    a.checked_mul(b).ok_or(Fail::Overflow)
}

fn sub<W: Weight>(a: &W, b: &W) -> R<W> {
    a.checked_sub(b)
        .ok_or_else(|| Fail::Err(Error::Contract("negative weighted count".into())))
}

#[inline]
fn weight<W: Weight>(ws: &Weights<W>, i: usize, v: u32) -> W {
    cost::tick();
    match &ws[i] {
        None => W::one(),
        Some(a) => a[v as usize].clone(),
    }
}

/// Results of the split checks made with auditing on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Audit {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl Audit {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Weighted counting with optional brute-force checks of every split on
/// graphs small enough for `budget` tuple evaluations.
#[derive(Debug)]
pub struct Counter<'a> {
    ws: &'a mut Workspace,
    audit: Option<(u64, Audit)>,
    forms: HashMap<(Expr, Var), Rc<Plans>>,
    simplified: HashMap<Expr, Expr>,
}

type BaseKey = (Expr, DeltaEq, ColorId);

/// The inequality splits of one disjunct, which do not depend on the
/// weights.
#[derive(Debug)]
enum Plan {
    Base(usize),
    Split {
        d: Disjunct,
        minus: Box<Plan>,
        plus: Box<Plan>,
    },
}

#[derive(Debug, Default)]
struct Plans {
    roots: Vec<Plan>,
    bases: Vec<Disjunct>,
}

impl Plans {
    fn disjunct<'p>(&'p self, p: &'p Plan) -> &'p Disjunct {
        match p {
            Plan::Base(i) => &self.bases[*i],
            Plan::Split { d, .. } => d,
        }
    }
}

fn plan(ws: &mut Workspace, d: Disjunct, bases: &mut Vec<Disjunct>, index: &mut HashMap<BaseKey, usize>) -> Result<Plan> {
    let d = if d.neq.is_empty() { d } else { settle(ws, &d)? };
    if d.neq.is_empty() {
        let key = (d.psi1.clone(), d.eq.clone(), d.color);
        let i = *index.entry(key).or_insert_with(|| {
            bases.push(d);
            bases.len() - 1
        });
        return Ok(Plan::Base(i));
    }
    let (minus, plus) = split_inequality(ws, &d)?;
    Ok(Plan::Split {
        minus: Box::new(plan(ws, minus, bases, index)?),
        plus: Box::new(plan(ws, plus, bases, index)?),
        d,
    })
}

impl<'a> Counter<'a> {
    pub fn new(ws: &'a mut Workspace) -> Self {
        Self {
            ws,
            audit: None,
            forms: HashMap::new(),
            simplified: HashMap::new(),
        }
    }

    pub fn with_audit(ws: &'a mut Workspace, budget: u64) -> Self {
        Self {
            ws,
            audit: Some((budget, Audit::default())),
            forms: HashMap::new(),
            simplified: HashMap::new(),
        }
    }

    pub fn audit(&self) -> Option<&Audit> {
        self.audit.as_ref().map(|a| &a.1)
    }

    /// `Σ_{ū ∈ φ} Π_i #_i(u_i)` for a quantifier-free formula with free
    /// variables among `0..weights.len()`.
    pub fn weighted<W: Weight>(&mut self, phi: &Expr, weights: &Weights<W>) -> Result<Option<W>> {
        match self.count(phi, weights) {
            Ok(w) => Ok(Some(w)),
            Err(Fail::Overflow) => Ok(None),
            Err(Fail::Err(e)) => Err(e),
        }
    }

    /// Number of answers, in 64 bits when it fits.
    pub fn count_answers(&mut self, phi: &Expr, arity: usize) -> Result<Count> {
        if let Some(c) = self.weighted::<SmallCount>(phi, &vec![None; arity])? {
            return Ok(Count::from(c));
        }
        self.weighted::<Count>(phi, &vec![None; arity])?
            .ok_or_else(|| Error::Contract("overflow in arbitrary precision".into()))
    }

    fn count<W: Weight>(&mut self, phi: &Expr, weights: &Weights<W>) -> R<W> {
        let phi = match self.simplified.get(phi) {
            Some(e) => e.clone(),
            None => {
                let e = self.ws.make_simple(phi)?;
                let e = tidy(self.ws, &e);
                self.simplified.insert(phi.clone(), e.clone());
                e
            }
        };
        let k = weights.len();
        let n = self.ws.graph().len();
        if k == 0 {
            let mut idx = AtomIndex::new();
            let p = Program::new(&phi, self.ws.graph(), &mut idx);
            return Ok(if p.test(&idx, &[]) { W::one() } else { W::zero() });
        }
        if k == 1 {
            let mut idx = AtomIndex::new();
            let p = Program::new(&phi, self.ws.graph(), &mut idx);
            let mut total = W::zero();
            let mut env = vec![0u32; p.width().max(1)];
            for v in 0..n as u32 {
                env[0] = v;
                if p.test(&idx, &env) {
                    total = add(&total, &weight(weights, 0, v))?;
                }
            }
            return Ok(total);
        }
        let y = (k - 1) as Var;
        let key = (phi, y);
        let plans = match self.forms.get(&key) {
            Some(p) => p.clone(),
            None => {
                let nf = normalize_exclusive(self.ws, &key.0, y)?;
                let mut plans = Plans::default();
                let mut index = HashMap::new();
                for mut d in nf.disjuncts {
                    d.psi1 = tidy(self.ws, &d.psi1);
                    let root = plan(self.ws, d, &mut plans.bases, &mut index)?;
                    plans.roots.push(root);
                }
                let plans = Rc::new(plans);
                self.forms.insert(key, plans.clone());
                plans
            }
        };
        let mut memo = vec![None; plans.bases.len()];
        let mut total = W::zero();
        for root in &plans.roots {
            let c = self.eval(root, &plans, y, weights, &mut memo)?;
            total = add(&total, &c)?;
        }
        Ok(total)
    }

    fn eval<W: Weight>(&mut self, p: &Plan, plans: &Plans, y: Var, weights: &Weights<W>, memo: &mut [Option<W>]) -> R<W> {
        match p {
            Plan::Base(i) => {
                if let Some(w) = &memo[*i] {
                    return Ok(w.clone());
                }
                let w = self.base(&plans.bases[*i], y, weights)?;
                memo[*i] = Some(w.clone());
                Ok(w)
            }
            Plan::Split { d, minus, plus } => {
                let a = self.eval(minus, plans, y, weights, memo)?;
                let b = self.eval(plus, plans, y, weights, memo)?;
                let out = sub(&a, &b)?;
                if let Some((budget, _)) = &self.audit {
                    let budget = *budget;
                    let (m, p) = (plans.disjunct(minus), plans.disjunct(plus));
                    self.check_split(d, m, p, y, weights, budget, (&out, &a, &b))?;
                }
                Ok(out)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn check_split<W: Weight>(
        &mut self,
        d: &Disjunct,
        minus: &Disjunct,
        plus: &Disjunct,
        y: Var,
        weights: &Weights<W>,
        budget: u64,
        got: (&W, &W, &W),
    ) -> R<()> {
        let g = self.ws.graph();
        let n = g.len() as u64;
        if n.checked_pow(weights.len() as u32).map_or(true, |t| t > budget) {
            return Ok(());
        }
        let whole = brute_disjunct(g, d, y, weights)?;
        let lo = brute_disjunct(g, minus, y, weights)?;
        let hi = brute_disjunct(g, plus, y, weights)?;
        let audit = &mut self.audit.as_mut().unwrap().1;
        audit.checks += 1;
        if add(&whole, &hi)? != lo {
            audit.failures.push(format!("split identity: {whole} + {hi} != {lo}"));
        }
        if (got.0, got.1, got.2) != (&whole, &lo, &hi) {
            audit
                .failures
                .push(format!("split values: engine ({}, {}, {}) brute ({whole}, {lo}, {hi})", got.0, got.1, got.2));
        }
        Ok(())
    }

    fn base<W: Weight>(&mut self, d: &Disjunct, y: Var, weights: &Weights<W>) -> R<W> {
        let k = weights.len();
        let n = self.ws.graph().len();
        let outer: Weights<W> = weights[..k - 1].to_vec();
        match &d.eq {
            DeltaEq::Y(t) => {
                let theta = Expr::and([d.psi1.clone(), Expr::color(d.color, t.clone())]);
                let folded = self.fold(&outer, t, |v| Ok(weight(weights, y as usize, v)))?;
                self.count(&theta, &folded)
            }
            DeltaEq::F { sym, x, .. } => {
                let g = self.ws.graph();
                let mut agg = vec![W::zero(); n];
                for u in g.color_set(d.color).iter() {
                    let w = g.apply(*sym, u) as usize;
                    agg[w] = add(&agg[w], &weight(weights, y as usize, u))?;
                }
                let folded = self.fold(&outer, x, |v| Ok(agg[v as usize].clone()))?;
                self.count(&d.psi1, &folded)
            }
            DeltaEq::None => {
                let g = self.ws.graph();
                let mut factor = W::zero();
                for u in g.color_set(d.color).iter() {
                    factor = add(&factor, &weight(weights, y as usize, u))?;
                }
                if factor.is_zero() {
                    return Ok(W::zero());
                }
                let rest = self.count(&d.psi1, &outer)?;
                mul(&rest, &factor)
            }
        }
    }

    /// Multiplies the weight of the variable of `t` by `extra(t(v))`.
    fn fold<W: Weight>(&mut self, outer: &Weights<W>, t: &Term, extra: impl Fn(u32) -> R<W>) -> R<Weights<W>> {
        let t = self.ws.simple_term(t)?;
        let g = self.ws.graph();
        let j = t.var as usize;
        let mut arr = Vec::with_capacity(g.len());
        for v in g.vertices() {
            let image = match t.func() {
                Some(f) => g.apply(f, v),
                None => v,
            };
            arr.push(mul(&weight(outer, j, v), &extra(image)?)?);
        }
        let mut out = outer.clone();
        out[j] = Some(arr);
        Ok(out)
    }
}

/// Direct weighted sum over all tuples.
fn brute<W: Weight>(g: &crate::model::FunctionalGraph, e: &Expr, weights: &Weights<W>) -> R<W> {
    let mut total = W::zero();
    for_tuples(g.len() as u32, weights.len(), |env| {
        let mut env = env.to_vec();
        if e.eval(g, &mut env) {
            let mut p = W::one();
            for (i, &v) in env.iter().enumerate().take(weights.len()) {
                if let Some(a) = &weights[i] {
                    p = mul(&p, &a[v as usize])?;
                }
            }
            total = add(&total, &p)?;
        }
        Ok(())
    })?;
    Ok(total)
}

/// Direct weighted sum over all tuples of a disjunct with `y` last. The
/// outer tuples are scanned once and `y` ranges over the color.
fn brute_disjunct<W: Weight>(g: &crate::model::FunctionalGraph, d: &Disjunct, y: Var, weights: &Weights<W>) -> R<W> {
    if d.psi1.mentions(y) || y as usize + 1 != weights.len() {
        return brute(g, &d.to_expr(y), weights);
    }
    let mut ypart = vec![Expr::Const(true)];
    match &d.eq {
        DeltaEq::None => {}
        DeltaEq::Y(t) => ypart.push(Expr::eq(Term::var(y), t.clone())),
        DeltaEq::F { sym, x, .. } => ypart.push(Expr::eq(Term::app(*sym, y), x.clone())),
    }
    for c in &d.neq {
        ypart.push(Expr::neq(c.y_term(y), c.x.clone()));
    }
    let ypart = Expr::and(ypart);
    let outer: Weights<W> = weights[..y as usize].to_vec();
    let members: Vec<u32> = g.color_set(d.color).iter().collect();
    let mut total = W::zero();
    for_tuples(g.len() as u32, y as usize, |env| {
        let mut env = env.to_vec();
        if !d.psi1.eval(g, &mut env) {
            return Ok(());
        }
        env.push(0);
        let mut inner = W::zero();
        for &u in &members {
            env[y as usize] = u;
            if ypart.eval(g, &mut env) {
                inner = add(&inner, &weights[y as usize].as_ref().map_or(W::one(), |a| a[u as usize].clone()))?;
            }
        }
        let mut p = inner;
        for (i, &v) in env[..y as usize].iter().enumerate() {
            if let Some(a) = &outer[i] {
                p = mul(&p, &a[v as usize])?;
            }
        }
        total = add(&total, &p)?;
        Ok(())
    })?;
    Ok(total)
}

fn for_tuples(n: u32, k: usize, mut f: impl FnMut(&[u32]) -> R<()>) -> R<()> {
    let mut env = vec![0u32; k];
    if n == 0 && k > 0 {
        return Ok(());
    }
    loop {
        f(&env)?;
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            env[i] += 1;
            if env[i] < n {
                break;
            }
            env[i] = 0;
        }
    }
}

/// Substitutes `y := t0` into the inequalities, which join `ψ₁`.
fn absorb(ws: &mut Workspace, d: &mut Disjunct, t0: &Term) -> Result<()> {
    let mut parts = vec![d.psi1.clone()];
    for c in d.neq.drain(..) {
        let lhs = match c.sym {
            Some(f) => ws.simple_term(&t0.then(f))?,
            None => t0.clone(),
        };
        parts.push(Expr::neq(lhs, c.x));
    }
    d.psi1 = ws.make_simple(&Expr::and(parts))?;
    d.eq = DeltaEq::Y(t0.clone());
    Ok(())
}

fn tidy(ws: &mut Workspace, e: &Expr) -> Expr {
    ws.compress_unary(&e.simplify()).simplify()
}

/// Moves the inequalities decided by `Δ⁼` into `ψ₁` and orders the rest
/// by rank.
pub fn settle(ws: &mut Workspace, d: &Disjunct) -> Result<Disjunct> {
    let mut out = d.clone();
    if let DeltaEq::F { rank: i3, x: t3, .. } = &d.eq {
        let mut parts = vec![out.psi1.clone()];
        out.neq.clear();
        for c in &d.neq {
            if c.rank < *i3 {
                out.neq.push(c.clone());
                continue;
            }
            let lhs = if c.rank == *i3 {
                t3.clone()
            } else {
                let f = link(d, *i3, c.rank)?;
                ws.simple_term(&t3.then(f))?
            };
            parts.push(Expr::neq(lhs, c.x.clone()));
        }
        out.psi1 = ws.make_simple(&Expr::and(parts))?;
        out.psi1 = tidy(ws, &out.psi1);
    }
    out.neq.sort_by_key(|c| c.rank);
    Ok(out)
}

fn link(d: &Disjunct, i: u8, j: u8) -> Result<crate::model::FuncId> {
    d.ptype
        .links
        .get(&(i, j))
        .copied()
        .ok_or_else(|| Error::Contract(format!("no link between ranks {i} and {j}")))
}

/// Splits off the first inequality: the disjunct without it, and the
/// disjunct with it turned into an equality, back in normal form.
pub fn split_inequality(ws: &mut Workspace, d: &Disjunct) -> Result<(Disjunct, Disjunct)> {
    let (first, rest) = d
        .neq
        .split_first()
        .ok_or_else(|| Error::Contract("split needs an inequality".into()))?;
    let mut minus = d.clone();
    minus.neq = rest.to_vec();
    let mut plus = minus.clone();
    let NeqClause { sym, rank, x: tx } = first.clone();
    match (&d.eq, sym) {
        (DeltaEq::Y(t0), _) => {
            let lhs = match sym {
                Some(f) => ws.simple_term(&t0.then(f))?,
                None => t0.clone(),
            };
            plus.psi1 = ws.make_simple(&Expr::and([plus.psi1.clone(), Expr::eq(lhs, tx)]))?;
        }
        (DeltaEq::None, None) => absorb(ws, &mut plus, &tx)?,
        (DeltaEq::None, Some(f)) => plus.eq = DeltaEq::F { sym: f, rank, x: tx },
        (DeltaEq::F { sym: h3, x: t3, .. }, None) => {
            let lhs = ws.simple_term(&tx.then(*h3))?;
            plus.psi1 = Expr::and([plus.psi1.clone(), Expr::eq(lhs, t3.clone())]);
            absorb(ws, &mut plus, &tx)?;
        }
        (DeltaEq::F { rank: i3, x: t3, .. }, Some(f)) => {
            let i3 = *i3;
            let link = |i, j| link(d, i, j);
            let extra = if rank == i3 {
                Expr::eq(tx.clone(), t3.clone())
            } else if rank < i3 {
                let lhs = ws.simple_term(&tx.then(link(rank, i3)?))?;
                plus.eq = DeltaEq::F { sym: f, rank, x: tx.clone() };
                Expr::eq(lhs, t3.clone())
            } else {
                let lhs = ws.simple_term(&t3.then(link(i3, rank)?))?;
                Expr::eq(lhs, tx.clone())
            };
            plus.psi1 = ws.make_simple(&Expr::and([plus.psi1.clone(), extra]))?;
        }
    }
    Ok((minus, plus))
}
