//! Lexicographic enumeration with constant delay: candidate lists,
//! shortcut pointers and the merge of per-disjunct streams.

use crate::compiler::eliminate::eliminate_disjunct;
use crate::compiler::{normalize, DeltaEq, Expr, Var, Workspace};
use crate::cost;
use crate::error::{Error, Result};
use crate::runtime::{eval_unary, AtomIndex, Lookup, Program};

pub const NULL: u32 = u32::MAX;

/// Sorted candidate lists `L(w)`, stored as list heads and successor links.
#[derive(Debug, Clone)]
pub struct CandidateList {
    head: Vec<u32>,
    succ: Vec<u32>,
}

impl CandidateList {
    /// `members` ascending; `anchor(u)` is the list `u` belongs to.
    pub fn build(n: usize, members: &[u32], anchor: impl Fn(u32) -> u32) -> Self {
        let mut head = vec![NULL; n];
        let mut succ = vec![NULL; n];
        for &u in members.iter().rev() {
            cost::tick();
            let w = anchor(u) as usize;
            succ[u as usize] = head[w];
            head[w] = u;
        }
        Self { head, succ }
    }

    #[inline]
    pub fn first(&self, w: u32) -> u32 {
        cost::tick();
        self.head[w as usize]
    }

    #[inline]
    pub fn succ(&self, u: u32) -> u32 {
        cost::tick();
        self.succ[u as usize]
    }

    pub fn list(&self, w: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut u = self.head[w as usize];
        while u != NULL {
            out.push(u);
            u = self.succ[u as usize];
        }
        out
    }
}

/// Forbidden images: sorted `(slot, vertex)` pairs.
pub type Key = Vec<(u8, u32)>;

fn subset(a: &Key, b: &Key) -> bool {
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
    }
    true
}

fn with(key: &Key, item: (u8, u32)) -> Option<Key> {
    match key.binary_search(&item) {
        Ok(_) => None,
        Err(i) => {
            let mut k = key.clone();
            k.insert(i, item);
            Some(k)
        }
    }
}

/// `Σ_{i ≤ gamma} slots^i`, saturating.
pub fn zeta(slots: usize, gamma: usize) -> u64 {
    let mut total = 0u64;
    let mut p = 1u64;
    for _ in 0..=gamma {
        total = total.saturating_add(p);
        p = p.saturating_mul(slots as u64);
    }
    total
}

/// Shortcut pointers: for candidate `u` and forbidden sets `S⃗`, the first
/// `w ≥ u` in the list of `u` whose images avoid `S⃗`. Only the pointers
/// reachable from `next_∅(u) = u` by adding one image of the target at a
/// time are stored, up to total size `gamma`.
#[derive(Debug, Clone)]
pub struct ShortcutIndex {
    gamma: usize,
    entries: Vec<Vec<(Key, u32)>>,
    charge: u64,
}

impl ShortcutIndex {
    pub fn build(n: usize, members: &[u32], list: &CandidateList, images: &[&[u32]], gamma: usize) -> Self {
        let mut idx = ShortcutIndex {
            gamma,
            entries: vec![Vec::new(); n],
            charge: zeta(images.len(), gamma).saturating_mul(gamma as u64 + 1),
        };
        for &u in members.iter().rev() {
            let mut sc: Vec<(Key, u32)> = vec![(Vec::new(), u)];
            let mut i = 0;
            while i < sc.len() {
                let (key, v) = sc[i].clone();
                i += 1;
                if v == NULL || key.len() >= gamma {
                    continue;
                }
                let next = list.succ[v as usize];
                for (slot, table) in images.iter().enumerate() {
                    cost::tick();
                    let Some(k2) = with(&key, (slot as u8, table[v as usize])) else { continue };
                    if sc.iter().any(|(k, _)| *k == k2) {
                        continue;
                    }
                    let target = if next == NULL { NULL } else { idx.lookup(next, &k2) };
                    sc.push((k2, target));
                }
            }
            idx.entries[u as usize] = sc;
        }
        idx
    }

    fn lookup(&self, u: u32, key: &Key) -> u32 {
        let mut best: Option<&(Key, u32)> = None;
        for e in &self.entries[u as usize] {
            cost::tick();
            if subset(&e.0, key) && best.map_or(true, |b| b.0.len() < e.0.len()) {
                best = Some(e);
            }
        }
        best.map_or(NULL, |b| b.1)
    }

    /// `next_S⃗(u)` through the largest stored pointer below `key`, at a
    /// fixed charge.
    pub fn next(&self, u: u32, key: &Key) -> Result<u32> {
        if key.len() > self.gamma {
            return Err(Error::Contract(format!(
                "shortcut of size {} over the limit {}",
                key.len(),
                self.gamma
            )));
        }
        let before = cost::steps();
        let r = self.lookup(u, key);
        let spent = cost::steps() - before;
        cost::add(self.charge.saturating_sub(spent));
        Ok(r)
    }

    pub fn pointers(&self, u: u32) -> &[(Key, u32)] {
        &self.entries[u as usize]
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }
}

/// First element `w ≥ u` of `list` avoiding `key`, by linear scan.
pub fn linear_next(list: &[u32], u: u32, images: &[&[u32]], key: &Key) -> u32 {
    list.iter()
        .copied()
        .filter(|&w| w >= u)
        .find(|&w| {
            images
                .iter()
                .enumerate()
                .all(|(s, t)| key.binary_search(&(s as u8, t[w as usize])).is_err())
        })
        .unwrap_or(NULL)
}

#[derive(Debug, Clone)]
enum Stream {
    /// `y` is determined by the prefix.
    Single(Lookup),
    Listed {
        anchor: Option<Lookup>,
        list: CandidateList,
        sc: ShortcutIndex,
        clauses: Vec<(u8, Lookup)>,
        images: Vec<usize>,
    },
}

#[derive(Debug, Clone)]
struct DisjunctPlan {
    guard: Program,
    full: Program,
    stream: Stream,
}

#[derive(Debug, Clone)]
enum Plan {
    Sentence(bool),
    Unary(Vec<u32>),
    Extend { prefix: Box<Plan>, disjuncts: Vec<DisjunctPlan> },
}

/// Size and correctness of the stored shortcut pointers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexAudit {
    pub candidates: usize,
    pub pointers: usize,
    pub max_per_candidate: usize,
    /// Candidates with more pointers than `zeta(σ, γ)` allows.
    pub over_bound: usize,
    /// Stored targets that differ from a linear scan.
    pub mismatches: usize,
}

impl IndexAudit {
    pub fn ok(&self) -> bool {
        self.over_bound == 0 && self.mismatches == 0
    }
}

/// Everything computed before the first answer.
#[derive(Debug, Clone)]
pub struct Enumerator {
    plan: Plan,
    index: AtomIndex,
    arity: usize,
}

impl Enumerator {
    /// Preprocesses a simple quantifier-free formula with free variables
    /// `0..arity`.
    pub fn build(ws: &mut Workspace, formula: &Expr, arity: usize) -> Result<Self> {
        let mut index = AtomIndex::new();
        let plan = build_plan(ws, &mut index, formula, arity)?;
        Ok(Self { plan, index, arity })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn cursor(&self) -> Cursor<'_> {
        Cursor {
            e: self,
            state: State::new(&self.plan),
        }
    }

    /// Checks every stored pointer against [`linear_next`] and every
    /// candidate against its pointer bound.
    pub fn audit_index(&self) -> IndexAudit {
        let mut a = IndexAudit::default();
        let mut plan = &self.plan;
        while let Plan::Extend { prefix, disjuncts } = plan {
            for d in disjuncts {
                let Stream::Listed { list, sc, images, .. } = &d.stream else { continue };
                let tables: Vec<&[u32]> = images.iter().map(|&s| self.index.table(s)).collect();
                let bound = zeta(tables.len(), sc.gamma());
                for w in 0..list.head.len() as u32 {
                    let l = list.list(w);
                    for &u in &l {
                        let ps = sc.pointers(u);
                        a.candidates += 1;
                        a.pointers += ps.len();
                        a.max_per_candidate = a.max_per_candidate.max(ps.len());
                        if ps.len() as u64 > bound {
                            a.over_bound += 1;
                        }
                        a.mismatches += ps.iter().filter(|(k, t)| linear_next(&l, u, &tables, k) != *t).count();
                    }
                }
            }
            plan = prefix;
        }
        a
    }

    /// All `b` with `(ā, b)` an answer, ascending.
    pub fn extensions(&self, prefix: &[u32]) -> Result<Vec<u32>> {
        let Plan::Extend { disjuncts, .. } = &self.plan else {
            return Err(Error::Contract("extensions need arity at least 2".into()));
        };
        if prefix.len() + 1 != self.arity {
            return Err(Error::TupleArity {
                expected: self.arity - 1,
                got: prefix.len(),
            });
        }
        let mut env = prefix.to_vec();
        env.push(0);
        let mut streams = start_streams(&self.index, disjuncts, &mut env)?;
        let mut out = Vec::new();
        while let Some(b) = step_merge(&self.index, disjuncts, &mut streams, &mut env)? {
            out.push(b);
        }
        Ok(out)
    }
}

fn build_plan(ws: &mut Workspace, idx: &mut AtomIndex, phi: &Expr, k: usize) -> Result<Plan> {
    let phi = ws.make_simple(phi)?;
    if k == 0 {
        let p = Program::new(&phi, ws.graph(), idx);
        return Ok(Plan::Sentence(p.test(idx, &[])));
    }
    if k == 1 {
        let p = Program::new(&phi, ws.graph(), idx);
        return Ok(Plan::Unary(eval_unary(&p, idx, ws.graph().len())));
    }
    let y = (k - 1) as Var;
    let nf = normalize(ws, &phi, y)?;
    let mut guards = Vec::new();
    let mut disjuncts = Vec::new();
    for d in &nf.disjuncts {
        let (guard, _) = eliminate_disjunct(ws, d)?;
        let guard = ws.make_simple(&guard)?;
        let full = ws.make_simple(&d.to_expr(y))?;
        let n = ws.graph().len();
        let stream = match &d.eq {
            DeltaEq::Y(t) => Stream::Single(Lookup::new(t, ws.graph(), idx)),
            eq => {
                let g = ws.graph();
                let members: Vec<u32> = g.color_set(d.color).iter().collect();
                cost::add(n as u64);
                let (anchor, list) = match eq {
                    DeltaEq::F { sym, x, .. } => {
                        let slot = idx.func(g, *sym);
                        let table = idx.table(slot);
                        let list = CandidateList::build(n, &members, |u| table[u as usize]);
                        (Some(Lookup::new(x, g, idx)), list)
                    }
                    _ => (None, CandidateList::build(n, &members, |_| 0)),
                };
                let mut syms = Vec::new();
                let mut clauses = Vec::new();
                for c in &d.neq {
                    if let Some(f) = c.sym {
                        let s = match syms.iter().position(|&h| h == f) {
                            Some(s) => s,
                            None => {
                                syms.push(f);
                                syms.len() - 1
                            }
                        };
                        clauses.push((s as u8, Lookup::new(&c.x, g, idx)));
                    }
                }
                let slots: Vec<usize> = syms.iter().map(|&f| idx.func(g, f)).collect();
                let tables: Vec<&[u32]> = slots.iter().map(|&s| idx.table(s)).collect();
                let sc = ShortcutIndex::build(n, &members, &list, &tables, clauses.len());
                Stream::Listed {
                    anchor,
                    list,
                    sc,
                    clauses,
                    images: slots,
                }
            }
        };
        disjuncts.push(DisjunctPlan {
            guard: Program::new(&guard, ws.graph(), idx),
            full: Program::new(&full, ws.graph(), idx),
            stream,
        });
        guards.push(guard);
    }
    let prefix = build_plan(ws, idx, &Expr::or(guards), k - 1)?;
    Ok(Plan::Extend {
        prefix: Box::new(prefix),
        disjuncts,
    })
}

#[derive(Debug, Clone)]
struct StreamState {
    d: usize,
    head: u32,
    b: u32,
    key: Key,
}

#[derive(Debug, Clone)]
enum State {
    Sentence { done: bool },
    Unary { pos: usize },
    Extend { prefix: Box<State>, env: Vec<u32>, streams: Vec<StreamState> },
}

impl State {
    fn new(plan: &Plan) -> Self {
        match plan {
            Plan::Sentence(_) => State::Sentence { done: false },
            Plan::Unary(_) => State::Unary { pos: 0 },
            Plan::Extend { prefix, .. } => State::Extend {
                prefix: Box::new(State::new(prefix)),
                env: Vec::new(),
                streams: Vec::new(),
            },
        }
    }
}

/// Advances a listed stream to its next answer.
fn advance(idx: &AtomIndex, d: &DisjunctPlan, s: &mut StreamState, env: &mut [u32]) -> Result<()> {
    let y = env.len() - 1;
    match &d.stream {
        Stream::Single(_) => s.head = NULL,
        Stream::Listed { list, sc, .. } => loop {
            if s.b == NULL {
                s.head = NULL;
                break;
            }
            let b2 = sc.next(s.b, &s.key)?;
            if b2 == NULL {
                s.b = NULL;
                s.head = NULL;
                break;
            }
            s.b = list.succ(b2);
            env[y] = b2;
            if d.full.test(idx, env) {
                s.head = b2;
                break;
            }
        },
    }
    Ok(())
}

fn start_streams(idx: &AtomIndex, ds: &[DisjunctPlan], env: &mut [u32]) -> Result<Vec<StreamState>> {
    let y = env.len() - 1;
    let mut out = Vec::new();
    let oks: Vec<bool> = ds.iter().map(|d| d.guard.test(idx, env)).collect();
    for (i, d) in ds.iter().enumerate() {
        if !oks[i] {
            continue;
        }
        match &d.stream {
            Stream::Single(t) => {
                let v = t.eval(idx, env);
                env[y] = v;
                let head = if d.full.test(idx, env) { v } else { NULL };
                out.push(StreamState {
                    d: i,
                    head,
                    b: NULL,
                    key: Vec::new(),
                });
            }
            Stream::Listed {
                anchor, list, clauses, ..
            } => {
                let w = anchor.map_or(0, |a| a.eval(idx, env));
                let mut key: Key = clauses.iter().map(|(s, t)| (*s, t.eval(idx, env))).collect();
                key.sort_unstable();
                key.dedup();
                let mut s = StreamState {
                    d: i,
                    head: NULL,
                    b: list.first(w),
                    key,
                };
                advance(idx, d, &mut s, env)?;
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Emits the least head and advances every stream sitting on it.
fn step_merge(
    idx: &AtomIndex,
    ds: &[DisjunctPlan],
    streams: &mut [StreamState],
    env: &mut [u32],
) -> Result<Option<u32>> {
    let m = streams.iter().map(|s| s.head).min().unwrap_or(NULL);
    if m == NULL {
        return Ok(None);
    }
    for s in streams.iter_mut() {
        if s.head == m {
            advance(idx, &ds[s.d], s, env)?;
        }
    }
    Ok(Some(m))
}

fn next_in(plan: &Plan, idx: &AtomIndex, state: &mut State) -> Result<Option<Vec<u32>>> {
    match (plan, state) {
        (Plan::Sentence(b), State::Sentence { done }) => {
            let out = (*b && !*done).then(Vec::new);
            *done = true;
            Ok(out)
        }
        (Plan::Unary(ans), State::Unary { pos }) => {
            cost::tick();
            let out = ans.get(*pos).map(|&v| vec![v]);
            *pos += 1;
            Ok(out)
        }
        (Plan::Extend { prefix, disjuncts }, State::Extend { prefix: ps, env, streams }) => loop {
            if !env.is_empty() {
                if let Some(b) = step_merge(idx, disjuncts, streams, env)? {
                    let mut t = env.clone();
                    *t.last_mut().unwrap() = b;
                    return Ok(Some(t));
                }
            }
            match next_in(prefix, idx, ps)? {
                None => return Ok(None),
                Some(a) => {
                    env.clear();
                    env.extend_from_slice(&a);
                    env.push(0);
                    *streams = start_streams(idx, disjuncts, env)?;
                }
            }
        },
        _ => unreachable!("state follows its plan"),
    }
}

/// A position in the answer stream. Its state is the current tuple plus a
/// fixed number of stream positions per level.
pub struct Cursor<'a> {
    e: &'a Enumerator,
    state: State,
}

impl Cursor<'_> {
    pub fn try_next(&mut self) -> Result<Option<Vec<u32>>> {
        next_in(&self.e.plan, &self.e.index, &mut self.state)
    }
}

impl Iterator for Cursor<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        self.try_next().expect("enumeration index invariant")
    }
}

/// Ascending union of ascending streams, each value once.
pub struct MergeLex<I: Iterator<Item = u32>> {
    streams: Vec<std::iter::Peekable<I>>,
}

pub fn merge_lex<I: Iterator<Item = u32>>(streams: impl IntoIterator<Item = I>) -> MergeLex<I> {
    MergeLex {
        streams: streams.into_iter().map(Iterator::peekable).collect(),
    }
}

impl<I: Iterator<Item = u32>> Iterator for MergeLex<I> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        let m = self.streams.iter_mut().filter_map(|s| s.peek().copied()).min()?;
        for s in &mut self.streams {
            if s.peek() == Some(&m) {
                s.next();
            }
        }
        Some(m)
    }
}
