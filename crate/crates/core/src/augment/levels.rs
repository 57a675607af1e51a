use std::collections::HashMap;

use crate::cost;
use crate::error::{Error, Result};
use crate::model::{FuncId, FuncOrigin, FunctionalGraph};

/// How an arc `b -> a` of a level is produced by function symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realizer {
    /// A symbol of the starting graph.
    Base(FuncId),
    /// The arc already exists one level below.
    Inherit,
    /// Transitivity through the intermediate vertex.
    Via(u32),
    /// Fraternal arc stored in the given slot of this level.
    Frat(u32),
}

/// Arc-level view of one augmentation level: sorted proper predecessor sets.
#[derive(Debug, Clone, Default)]
pub struct ArcLevel {
    pub preds: Vec<Vec<u32>>,
    pub how: Vec<Vec<Realizer>>,
    /// Fraternal tables introduced at this level.
    pub frat_tables: Vec<Vec<u32>>,
}

impl ArcLevel {
    pub fn max_indegree(&self) -> usize {
        self.preds.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn arc_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    #[inline]
    pub fn index(&self, a: u32, b: u32) -> Option<usize> {
        self.preds[a as usize].binary_search(&b).ok()
    }

    #[inline]
    pub fn has_arc(&self, a: u32, b: u32) -> bool {
        self.index(a, b).is_some()
    }

    /// Predecessor sets of every symbol of `g`.
    pub fn of_graph(g: &FunctionalGraph) -> Self {
        let n = g.len();
        let funcs: Vec<FuncId> = (0..g.signature().func_count() as FuncId).collect();
        let mut preds = Vec::with_capacity(n);
        let mut how = Vec::with_capacity(n);
        for v in g.vertices() {
            let mut e: Vec<(u32, FuncId)> = funcs
                .iter()
                .map(|&f| (g.apply(f, v), f))
                .filter(|&(b, _)| b != v)
                .collect();
            e.sort_unstable();
            e.dedup_by_key(|x| x.0);
            preds.push(e.iter().map(|x| x.0).collect());
            how.push(e.iter().map(|x| Realizer::Base(x.1)).collect());
        }
        Self {
            preds,
            how,
            frat_tables: Vec::new(),
        }
    }

    /// One transitive-fraternal step. Fraternal pairs are sorted by
    /// `(min, max)` and each is oriented toward the endpoint with fewer new
    /// arcs so far, ties toward the smaller vertex.
    pub fn next(&self) -> ArcLevel {
        let n = self.preds.len();
        let mut preds = Vec::with_capacity(n);
        let mut how: Vec<Vec<Realizer>> = Vec::with_capacity(n);
        let mut buf: Vec<(u32, u8, u32)> = Vec::new();
        for v in 0..n {
            buf.clear();
            for &c in &self.preds[v] {
                buf.push((c, 0, 0));
                for &b in &self.preds[c as usize] {
                    if b as usize != v {
                        buf.push((b, 1, c));
                    }
                }
            }
            cost::add(buf.len() as u64 + 1);
            buf.sort_unstable();
            buf.dedup_by_key(|x| x.0);
            preds.push(buf.iter().map(|x| x.0).collect::<Vec<_>>());
            how.push(
                buf.iter()
                    .map(|&(_, k, c)| if k == 0 { Realizer::Inherit } else { Realizer::Via(c) })
                    .collect(),
            );
        }
        let has = |p: &Vec<Vec<u32>>, a: u32, b: u32| p[a as usize].binary_search(&b).is_ok();
        let mut pairs = Vec::new();
        for ps in &self.preds {
            for (i, &a) in ps.iter().enumerate() {
                for &b in &ps[i + 1..] {
                    cost::tick();
                    if !has(&preds, a, b) && !has(&preds, b, a) {
                        pairs.push((a, b));
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut fresh = vec![0u32; n];
        let mut added: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for (a, b) in pairs {
            cost::tick();
            let (target, source) = if fresh[a as usize] <= fresh[b as usize] {
                (a, b)
            } else {
                (b, a)
            };
            added[target as usize].push((source, fresh[target as usize]));
            fresh[target as usize] += 1;
        }
        let slots = fresh.iter().copied().max().unwrap_or(0) as usize;
        let mut frat_tables: Vec<Vec<u32>> = (0..slots).map(|_| (0..n as u32).collect()).collect();
        for (v, adds) in added.iter_mut().enumerate() {
            if adds.is_empty() {
                continue;
            }
            for &(s, k) in adds.iter() {
                frat_tables[k as usize][v] = s;
            }
            adds.sort_unstable();
            let mut p = Vec::with_capacity(preds[v].len() + adds.len());
            let mut h = Vec::with_capacity(p.capacity());
            let (old_p, old_h) = (&preds[v], &how[v]);
            let (mut i, mut j) = (0, 0);
            while i < old_p.len() || j < adds.len() {
                if j == adds.len() || (i < old_p.len() && old_p[i] < adds[j].0) {
                    p.push(old_p[i]);
                    h.push(old_h[i]);
                    i += 1;
                } else {
                    p.push(adds[j].0);
                    h.push(Realizer::Frat(adds[j].1));
                    j += 1;
                }
            }
            cost::add(p.len() as u64);
            preds[v] = p;
            how[v] = h;
        }
        ArcLevel {
            preds,
            how,
            frat_tables,
        }
    }
}

/// Per-level in-degree and function-symbol counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpansionProfile {
    pub max_indegree: Vec<usize>,
    pub function_symbols: Vec<u64>,
}

impl ExpansionProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,max_indegree,function_symbols\n");
        for (i, (d, s)) in self.max_indegree.iter().zip(&self.function_symbols).enumerate() {
            out.push_str(&format!("{i},{d},{s}\n"));
        }
        out
    }
}

/// The augmentation sequence over a fixed starting graph. Levels are built
/// on arc level; composition symbols are interned only when
/// [`Hierarchy::realize`] needs them.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    graph: FunctionalGraph,
    levels: Vec<ArcLevel>,
    frat: Vec<Vec<FuncId>>,
    memo: HashMap<(usize, u32, u32), FuncId>,
    cap: usize,
}

pub const DEFAULT_SYMBOL_CAP: usize = 4096;

impl Hierarchy {
    pub fn new(g0: FunctionalGraph, cap: usize) -> Self {
        let base = ArcLevel::of_graph(&g0);
        Self {
            graph: g0,
            levels: vec![base],
            frat: vec![Vec::new()],
            memo: HashMap::new(),
            cap,
        }
    }

    pub fn graph(&self) -> &FunctionalGraph {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut FunctionalGraph {
        &mut self.graph
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn built(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn ensure(&mut self, level: usize) -> Result<()> {
        while self.levels.len() <= level {
            let next = self.levels.last().unwrap().next();
            let l = self.levels.len();
            let needed = self.graph.signature().func_count() + next.frat_tables.len();
            if needed > self.cap {
                return Err(Error::SymbolCap {
                    cap: self.cap,
                    needed,
                });
            }
            let syms = next
                .frat_tables
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    self.graph.add_table(
                        format!("frat_{l}_{}", k + 1),
                        l,
                        FuncOrigin::Fraternal { slot: k },
                        t.clone(),
                    )
                })
                .collect();
            self.frat.push(syms);
            self.levels.push(next);
        }
        Ok(())
    }

    pub fn level(&self, q: usize) -> &ArcLevel {
        &self.levels[q]
    }

    /// Whether `b` is a proper predecessor of `a` at level `q`.
    pub fn has_arc(&self, q: usize, a: u32, b: u32) -> bool {
        self.levels[q].has_arc(a, b)
    }

    /// A symbol `h` of level at most `q` with `h(a) = b`, for an arc of level `q`.
    pub fn realize(&mut self, q: usize, a: u32, b: u32) -> Result<FuncId> {
        if let Some(&h) = self.memo.get(&(q, a, b)) {
            return Ok(h);
        }
        let i = self.levels[q]
            .index(a, b)
            .ok_or_else(|| Error::Contract(format!("no arc {b} -> {a} at level {q}")))?;
        let h = match self.levels[q].how[a as usize][i] {
            Realizer::Base(f) => f,
            Realizer::Frat(k) => self.frat[q][k as usize],
            Realizer::Inherit => self.realize(q - 1, a, b)?,
            Realizer::Via(c) => {
                let g = self.realize(q - 1, a, c)?;
                let f = self.realize(q - 1, c, b)?;
                self.compose(f, g)?
            }
        };
        self.memo.insert((q, a, b), h);
        Ok(h)
    }

    /// Interns `f ∘ g` under the symbol cap.
    pub fn compose(&mut self, f: FuncId, g: FuncId) -> Result<FuncId> {
        if let Some(h) = self.graph.signature().composition(f, g) {
            return Ok(h);
        }
        let needed = self.graph.signature().func_count() + 1;
        if needed > self.cap {
            return Err(Error::SymbolCap {
                cap: self.cap,
                needed,
            });
        }
        Ok(self.graph.compose(f, g))
    }

    /// In-degree and nominal symbol count per level up to `max_level`.
    /// Counts saturate at `u64::MAX`.
    pub fn profile(&mut self, max_level: usize) -> Result<ExpansionProfile> {
        self.ensure(max_level)?;
        let mut p = ExpansionProfile::default();
        let base = self.base_count() as u64;
        let (mut prev, mut cur) = (0u64, base);
        for l in 0..=max_level {
            if l > 0 {
                let next = if cur == u64::MAX {
                    u64::MAX
                } else {
                    let (c, p) = (cur as u128, prev as u128);
                    let n = c + c * c - p * p + self.levels[l].frat_tables.len() as u128;
                    u64::try_from(n).unwrap_or(u64::MAX)
                };
                prev = cur;
                cur = next;
            }
            p.max_indegree.push(self.levels[l].max_indegree());
            p.function_symbols.push(cur);
        }
        Ok(p)
    }

    fn base_count(&self) -> usize {
        self.graph
            .signature()
            .funcs()
            .iter()
            .filter(|f| f.level == 0)
            .count()
    }
}

/// One eager augmentation step: every composition of existing symbols is
/// interned and the missing fraternal arcs are packed into new tables.
pub fn augment_once(g: &FunctionalGraph, cap: usize) -> Result<FunctionalGraph> {
    let mut out = g.clone();
    let sig = g.signature();
    let k = sig.func_count() as FuncId;
    let existing = (0..k)
        .flat_map(|f| (0..k).map(move |h| (f, h)))
        .filter(|&(f, h)| sig.composition(f, h).is_some())
        .count();
    let needed = k as usize + (k as usize * k as usize - existing);
    if needed > cap {
        return Err(Error::SymbolCap { cap, needed });
    }
    let level = sig.max_level() + 1;
    let arcs = ArcLevel::of_graph(g).next();
    if needed + arcs.frat_tables.len() > cap {
        return Err(Error::SymbolCap {
            cap,
            needed: needed + arcs.frat_tables.len(),
        });
    }
    for f in 0..k {
        for h in 0..k {
            out.compose(f, h);
        }
    }
    for (i, t) in arcs.frat_tables.into_iter().enumerate() {
        out.add_table(
            format!("frat_{level}_{}", i + 1),
            level,
            FuncOrigin::Fraternal { slot: i },
            t,
        );
    }
    Ok(out)
}

/// Memoized eager augmentation levels.
#[derive(Debug, Clone)]
pub struct Augmenter {
    levels: Vec<FunctionalGraph>,
    cap: usize,
}

impl Augmenter {
    pub fn new(g0: FunctionalGraph, cap: usize) -> Self {
        Self {
            levels: vec![g0],
            cap,
        }
    }

    pub fn augment_to(&mut self, i: usize) -> Result<&FunctionalGraph> {
        while self.levels.len() <= i {
            let next = augment_once(self.levels.last().unwrap(), self.cap)?;
            self.levels.push(next);
        }
        Ok(&self.levels[i])
    }
}

/// `i`-fold eager augmentation.
pub fn augment_to(g0: &FunctionalGraph, i: usize, cap: usize) -> Result<FunctionalGraph> {
    let mut a = Augmenter::new(g0.clone(), cap);
    a.augment_to(i).cloned()
}

/// Profile of the augmentation sequence of `g0`.
pub fn expansion_profile(g0: &FunctionalGraph, max_level: usize, cap: usize) -> Result<ExpansionProfile> {
    Hierarchy::new(g0.clone(), cap).profile(max_level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::laws::check_all;
    use crate::augment::orient::{degeneracy_orient, functionalize, UndirectedGraph};
    use crate::model::RelationalStructure;

    fn g0(text: &str) -> FunctionalGraph {
        let s = RelationalStructure::parse(text).unwrap();
        functionalize(&degeneracy_orient(&UndirectedGraph::from_structure(&s, "E").unwrap()))
    }

    fn p3() -> FunctionalGraph {
        g0("node 1\nnode 2\nnode 3\nedge 1 2\nedge 2 3")
    }

    #[test]
    fn path_transitivity() {
        let g1 = augment_once(&p3(), DEFAULT_SYMBOL_CAP).unwrap();
        let h = g1.signature().composition(0, 0).unwrap();
        assert_eq!(g1.signature().func(h).name, "comp_1_f_1_f_1");
        assert_eq!(g1.apply(h, 0), 2);
        check_all(&p3(), &g1).unwrap();
    }

    #[test]
    fn star_fraternity() {
        let og = crate::augment::orient::OrientedGraph {
            ids: vec![1, 2, 3],
            preds: vec![vec![1, 2], vec![], vec![]],
            colors: vec![],
            rank: vec![0, 1, 2],
        };
        let g = functionalize(&og);
        let g1 = augment_once(&g, DEFAULT_SYMBOL_CAP).unwrap();
        let frat = g1.signature().func_by_name("frat_1_1").unwrap();
        assert_eq!(g1.table_of(frat), vec![0, 2, 2]);
        check_all(&g, &g1).unwrap();
    }

    #[test]
    fn path_profile() {
        let p = expansion_profile(&p3(), 1, DEFAULT_SYMBOL_CAP).unwrap();
        assert_eq!(p.max_indegree, vec![1, 2]);
        assert_eq!(p.function_symbols, vec![1, 2]);
    }

    #[test]
    fn edgeless_profile() {
        let p = expansion_profile(&g0("node 1\nnode 2"), 3, DEFAULT_SYMBOL_CAP).unwrap();
        assert_eq!(p.max_indegree, vec![0; 4]);
        assert_eq!(p.function_symbols, vec![0; 4]);
    }

    #[test]
    fn level_zero_is_identity() {
        let g = augment_to(&p3(), 0, DEFAULT_SYMBOL_CAP).unwrap();
        assert_eq!(g.table_of(0), p3().table_of(0));
        assert_eq!(g.signature().func_count(), 1);
    }

    #[test]
    fn nominal_count_matches_eager() {
        let g = g0("node 1\nnode 2\nnode 3\nnode 4\nedge 1 2\nedge 1 3\nedge 1 4\nedge 2 3");
        let p = expansion_profile(&g, 2, DEFAULT_SYMBOL_CAP).unwrap();
        let mut a = Augmenter::new(g, DEFAULT_SYMBOL_CAP);
        for i in 0..=2 {
            assert_eq!(a.augment_to(i).unwrap().signature().func_count() as u64, p.function_symbols[i]);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = g0("node 1\nnode 2\nnode 3\nnode 4\nedge 1 2\nedge 1 3\nedge 1 4\nedge 2 3");
        assert!(matches!(augment_to(&g, 3, 50), Err(Error::SymbolCap { cap: 50, .. })));
    }

    #[test]
    fn realized_symbols_hit_their_arc() {
        let g = g0("node 1\nnode 2\nnode 3\nnode 4\nnode 5\nedge 1 2\nedge 2 3\nedge 3 4\nedge 4 5\nedge 5 1\nedge 1 3");
        let mut h = Hierarchy::new(g, DEFAULT_SYMBOL_CAP);
        h.ensure(3).unwrap();
        for q in 0..=3 {
            for a in 0..5u32 {
                for b in h.level(q).preds[a as usize].clone() {
                    let f = h.realize(q, a, b).unwrap();
                    assert!(h.graph().signature().level(f) <= q);
                    assert_eq!(h.graph().apply(f, a), b);
                }
            }
        }
    }
}
