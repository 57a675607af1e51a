//! Colored functional structures: every edge of a bounded in-degree oriented
//! graph becomes the graph of a total unary function, colors are unary
//! predicates.

use std::collections::HashMap;

use crate::cost;
use crate::error::{Error, Result};
use crate::model::bitset::BitSet;

pub type FuncId = u32;
pub type ColorId = u32;

/// How a function symbol came to exist.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FuncOrigin {
    Base,
    /// `h = f ∘ g`, i.e. `h(x) = f(g(x))`.
    Composition(FuncId, FuncId),
    /// The `slot`-th fraternal arc table introduced at its level.
    Fraternal { slot: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum FuncKind {
    Table(usize),
    Compose(FuncId, FuncId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncSymbol {
    pub name: String,
    pub level: usize,
    pub origin: FuncOrigin,
    kind: FuncKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ColorOrigin {
    Base,
    Recoloring(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorSymbol {
    pub name: String,
    pub origin: ColorOrigin,
}

/// Function and color symbols with provenance. Levels are monotone along the
/// function list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    funcs: Vec<FuncSymbol>,
    colors: Vec<ColorSymbol>,
    func_names: HashMap<String, FuncId>,
    color_names: HashMap<String, ColorId>,
    compositions: HashMap<(FuncId, FuncId), FuncId>,
}

impl Signature {
    pub fn funcs(&self) -> &[FuncSymbol] {
        &self.funcs
    }

    pub fn colors(&self) -> &[ColorSymbol] {
        &self.colors
    }

    pub fn func(&self, f: FuncId) -> &FuncSymbol {
        &self.funcs[f as usize]
    }

    pub fn color(&self, c: ColorId) -> &ColorSymbol {
        &self.colors[c as usize]
    }

    pub fn func_by_name(&self, name: &str) -> Option<FuncId> {
        self.func_names.get(name).copied()
    }

    pub fn color_by_name(&self, name: &str) -> Option<ColorId> {
        self.color_names.get(name).copied()
    }

    pub fn func_count(&self) -> usize {
        self.funcs.len()
    }

    /// Number of function symbols whose level is at most `level`.
    pub fn funcs_up_to(&self, level: usize) -> usize {
        self.funcs.iter().filter(|f| f.level <= level).count()
    }

    pub fn level(&self, f: FuncId) -> usize {
        self.funcs[f as usize].level
    }

    /// The alias table: composition symbol for `(f, g)` if interned.
    pub fn composition(&self, f: FuncId, g: FuncId) -> Option<FuncId> {
        self.compositions.get(&(f, g)).copied()
    }

    pub fn max_level(&self) -> usize {
        self.funcs.iter().map(|f| f.level).max().unwrap_or(0)
    }

    fn unique_name(&self, base: String) -> String {
        if !self.func_names.contains_key(&base) && !self.color_names.contains_key(&base) {
            return base;
        }
        (1..)
            .map(|i| format!("{base}#{i}"))
            .find(|n| !self.func_names.contains_key(n) && !self.color_names.contains_key(n))
            .unwrap()
    }
}

/// A functional graph over dense vertices `0..n`.
#[derive(Debug, Clone)]
pub struct FunctionalGraph {
    ids: Vec<u64>,
    sig: Signature,
    tables: Vec<Vec<u32>>,
    colors: Vec<BitSet>,
}

impl FunctionalGraph {
    /// A graph with the given external vertex ids and no symbols.
    pub fn new(ids: Vec<u64>) -> Self {
        Self {
            ids,
            sig: Signature::default(),
            tables: Vec::new(),
            colors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn id(&self, v: u32) -> u64 {
        self.ids[v as usize]
    }

    /// Dense position of an external id. Ids are increasing, so this is a
    /// binary search.
    pub fn position(&self, id: u64) -> Option<u32> {
        self.ids.binary_search(&id).ok().map(|p| p as u32)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn vertices(&self) -> std::ops::Range<u32> {
        0..self.ids.len() as u32
    }

    /// Adds a function given by a full table. Entries equal to the vertex
    /// itself encode "no predecessor here".
    pub fn add_table(
        &mut self,
        name: impl Into<String>,
        level: usize,
        origin: FuncOrigin,
        table: Vec<u32>,
    ) -> FuncId {
        assert_eq!(table.len(), self.len());
        let name = self.sig.unique_name(name.into());
        let id = self.sig.funcs.len() as FuncId;
        self.tables.push(table);
        self.sig.func_names.insert(name.clone(), id);
        self.sig.funcs.push(FuncSymbol {
            name,
            level,
            origin,
            kind: FuncKind::Table(self.tables.len() - 1),
        });
        id
    }

    /// Interns the composition `f ∘ g`; evaluated on demand as `f(g(x))`.
    pub fn compose(&mut self, f: FuncId, g: FuncId) -> FuncId {
        if let Some(h) = self.sig.compositions.get(&(f, g)) {
            return *h;
        }
        let level = self.sig.level(f).max(self.sig.level(g)) + 1;
        let name = self.sig.unique_name(format!(
            "comp_{level}_{}_{}",
            self.sig.func(f).name,
            self.sig.func(g).name
        ));
        let id = self.sig.funcs.len() as FuncId;
        self.sig.func_names.insert(name.clone(), id);
        self.sig.funcs.push(FuncSymbol {
            name,
            level,
            origin: FuncOrigin::Composition(f, g),
            kind: FuncKind::Compose(f, g),
        });
        self.sig.compositions.insert((f, g), id);
        id
    }

    /// Interns the composition of a chain applied innermost first.
    pub fn compose_chain(&mut self, chain: &[FuncId]) -> Option<FuncId> {
        let (&first, rest) = chain.split_first()?;
        let mut h = first;
        for &f in rest {
            h = self.compose(f, h);
        }
        Some(h)
    }

    /// Adds a color, returning its id.
    pub fn add_color(&mut self, name: impl Into<String>, origin: ColorOrigin, set: BitSet) -> ColorId {
        assert_eq!(set.len(), self.len());
        let name = self.sig.unique_name(name.into());
        let id = self.sig.colors.len() as ColorId;
        self.sig.color_names.insert(name.clone(), id);
        self.sig.colors.push(ColorSymbol { name, origin });
        self.colors.push(set);
        id
    }

    pub fn color_set(&self, c: ColorId) -> &BitSet {
        &self.colors[c as usize]
    }

    #[inline]
    pub fn apply(&self, f: FuncId, v: u32) -> u32 {
        match self.sig.funcs[f as usize].kind {
            FuncKind::Table(t) => {
                cost::tick();
                self.tables[t][v as usize]
            }
            FuncKind::Compose(a, b) => {
                let inner = self.apply(b, v);
                self.apply(a, inner)
            }
        }
    }

    /// Applies a chain of functions, innermost first.
    #[inline]
    pub fn apply_chain(&self, chain: &[FuncId], mut v: u32) -> u32 {
        for &f in chain {
            v = self.apply(f, v);
        }
        v
    }

    #[inline]
    pub fn has_color(&self, c: ColorId, v: u32) -> bool {
        cost::tick();
        self.colors[c as usize].contains(v)
    }

    /// Function symbols backed by a table (base and fraternal symbols).
    pub fn table_funcs(&self) -> impl Iterator<Item = FuncId> + '_ {
        self.sig
            .funcs
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s.kind, FuncKind::Table(_)))
            .map(|(i, _)| i as FuncId)
    }

    /// Full value table of a symbol (materialized for compositions).
    pub fn table_of(&self, f: FuncId) -> Vec<u32> {
        self.vertices().map(|v| self.apply(f, v)).collect()
    }

    /// Restriction to the first `funcs` function symbols and `colors` colors.
    pub fn restrict(&self, funcs: usize, colors: usize) -> FunctionalGraph {
        let mut out = FunctionalGraph::new(self.ids.clone());
        for f in 0..funcs as FuncId {
            let sym = self.sig.func(f);
            match &sym.origin {
                FuncOrigin::Composition(a, b) => {
                    let h = out.compose(*a, *b);
                    debug_assert_eq!(h, f);
                }
                origin => {
                    out.add_table(sym.name.clone(), sym.level, origin.clone(), self.table_of(f));
                }
            }
        }
        for c in 0..colors as ColorId {
            let sym = self.sig.color(c);
            out.add_color(sym.name.clone(), sym.origin.clone(), self.colors[c as usize].clone());
        }
        out
    }

    /// Number of non-self-loop function values over table-backed symbols,
    /// i.e. the number of stored arcs.
    pub fn arc_count(&self) -> usize {
        self.table_funcs()
            .map(|f| self.vertices().filter(|&v| self.apply(f, v) != v).count())
            .sum()
    }

    pub fn resolve_vertex(&self, id: u64) -> Result<u32> {
        self.position(id).ok_or(Error::UnknownVertex(id))
    }
}
