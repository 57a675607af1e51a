use std::collections::BTreeSet;

use crate::cost;
use crate::error::{Error, Result};
use crate::model::{BitSet, ColorOrigin, FuncOrigin, FunctionalGraph, RelationalStructure};

/// A symmetric irreflexive graph with unary colors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    pub ids: Vec<u64>,
    pub adj: Vec<Vec<u32>>,
    pub colors: Vec<(String, BitSet)>,
}

impl UndirectedGraph {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Reads a structure with one symmetric irreflexive binary relation
    /// `edge` (possibly absent) and otherwise only unary relations.
    pub fn from_structure(s: &RelationalStructure, edge: &str) -> Result<Self> {
        let n = s.len();
        let mut adj = vec![Vec::new(); n];
        let mut colors = Vec::new();
        for (_, r) in s.relations_by_name() {
            if r.name == edge {
                if r.arity != 2 {
                    return Err(Error::Unsupported(format!("{edge} must be binary")));
                }
                for t in &r.tuples {
                    if t[0] == t[1] {
                        return Err(Error::Unsupported(format!("{edge} has a self-loop")));
                    }
                    if !r.tuples.binary_search(&vec![t[1], t[0]]).is_ok() {
                        return Err(Error::Unsupported(format!("{edge} is not symmetric")));
                    }
                    adj[t[0] as usize].push(t[1]);
                }
            } else if r.arity == 1 {
                let mut set = BitSet::new(n);
                for t in &r.tuples {
                    set.insert(t[0]);
                }
                colors.push((r.name.clone(), set));
            } else {
                return Err(Error::Unsupported(format!(
                    "relation {} of arity {} in a graph structure",
                    r.name, r.arity
                )));
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Self {
            ids: s.ids().to_vec(),
            adj,
            colors,
        })
    }

    /// True when the structure fits [`UndirectedGraph::from_structure`].
    pub fn is_graph_shaped(s: &RelationalStructure, edge: &str) -> bool {
        Self::from_structure(s, edge).is_ok()
    }
}

/// An oriented graph given by sorted predecessor lists: `preds[v]` holds the
/// sources of all arcs into `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedGraph {
    pub ids: Vec<u64>,
    pub preds: Vec<Vec<u32>>,
    pub colors: Vec<(String, BitSet)>,
    /// Position of each vertex in the removal order.
    pub rank: Vec<u32>,
}

impl OrientedGraph {
    pub fn max_indegree(&self) -> usize {
        self.preds.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Arcs as `(source, target)` external id pairs, sorted.
    pub fn arcs(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<_> = self
            .preds
            .iter()
            .enumerate()
            .flat_map(|(v, ps)| ps.iter().map(move |&u| (self.ids[u as usize], self.ids[v])))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Removes a smallest-id vertex of minimum remaining degree until the graph
/// is empty, orienting each removed vertex's remaining edges toward it.
pub fn degeneracy_orient(g: &UndirectedGraph) -> OrientedGraph {
    let n = g.len();
    let mut deg: Vec<usize> = g.adj.iter().map(Vec::len).collect();
    let maxd = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); maxd + 1];
    for v in 0..n {
        buckets[deg[v]].insert(v as u32);
    }
    let mut removed = vec![false; n];
    let mut preds = vec![Vec::new(); n];
    let mut rank = vec![0; n];
    let mut low = 0;
    for r in 0..n {
        while buckets[low].is_empty() {
            low += 1;
        }
        let v = buckets[low].pop_first().unwrap();
        cost::tick();
        removed[v as usize] = true;
        rank[v as usize] = r as u32;
        for &w in &g.adj[v as usize] {
            cost::tick();
            if removed[w as usize] {
                continue;
            }
            preds[v as usize].push(w);
            let d = deg[w as usize];
            buckets[d].remove(&w);
            buckets[d - 1].insert(w);
            deg[w as usize] = d - 1;
        }
        low = low.saturating_sub(1);
    }
    OrientedGraph {
        ids: g.ids.clone(),
        preds,
        colors: g.colors.clone(),
        rank,
    }
}

/// Functional representation: `f_i(u)` is the `i`-th predecessor of `u` in
/// ascending id order, or `u` itself past the last one.
pub fn functionalize(og: &OrientedGraph) -> FunctionalGraph {
    let n = og.ids.len();
    let mut g = FunctionalGraph::new(og.ids.clone());
    for i in 0..og.max_indegree() {
        let table = (0..n)
            .map(|u| og.preds[u].get(i).copied().unwrap_or(u as u32))
            .collect();
        cost::add(n as u64);
        g.add_table(format!("f_{}", i + 1), 0, FuncOrigin::Base, table);
    }
    for (name, set) in &og.colors {
        g.add_color(name.clone(), ColorOrigin::Base, set.clone());
    }
    g
}
