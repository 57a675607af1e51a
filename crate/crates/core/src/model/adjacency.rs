use crate::model::bitset::BitSet;
use crate::model::functional::{ColorId, ColorOrigin, FuncId, FuncOrigin, FunctionalGraph};
use crate::model::structure::RelationalStructure;

/// Bipartite functional encoding of a relational structure. Domain elements
/// occupy the first `domain_len` vertices, tuple vertices follow.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    pub graph: FunctionalGraph,
    pub domain_len: usize,
    /// `P_R` color per relation name, in name order.
    pub relation_colors: Vec<(String, ColorId)>,
    /// Component functions `f_1..f_r` for the maximum arity `r`.
    pub components: Vec<FuncId>,
}

impl AdjacencyGraph {
    pub fn relation_color(&self, name: &str) -> Option<ColorId> {
        self.relation_colors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| *c)
    }

    pub fn is_tuple_vertex(&self, v: u32) -> bool {
        v as usize >= self.domain_len
    }

    /// Reads the tuples of every relation back from colors and images.
    pub fn decode(&self) -> Vec<(String, Vec<Vec<u64>>)> {
        let g = &self.graph;
        self.relation_colors
            .iter()
            .map(|(name, c)| {
                let tuples = g
                    .color_set(*c)
                    .iter()
                    .map(|t| {
                        self.components
                            .iter()
                            .map(|&f| g.apply(f, t))
                            .take_while(|&a| a != t)
                            .map(|a| g.id(a))
                            .collect()
                    })
                    .collect();
                (name.clone(), tuples)
            })
            .collect()
    }
}

/// Builds the adjacency graph: one vertex per domain element and per tuple,
/// color `P_R` on the tuple vertices of `R`, `f_j(t) = a_j`.
pub fn adjacency_graph(d: &RelationalStructure) -> AdjacencyGraph {
    let rels: Vec<_> = d.relations_by_name().map(|(_, r)| r).collect();
    let total: usize = rels.iter().map(|r| r.tuples.len()).sum();
    let n = d.len() + total;
    let mut ids: Vec<u64> = d.ids().to_vec();
    let start = ids.last().map_or(0, |m| m + 1);
    ids.extend((0..total as u64).map(|i| start + i));
    let max_arity = rels.iter().map(|r| r.arity).max().unwrap_or(0);
    let mut tables: Vec<Vec<u32>> = (0..max_arity).map(|_| (0..n as u32).collect()).collect();
    let mut sets = Vec::with_capacity(rels.len());
    let mut next = d.len() as u32;
    for r in &rels {
        let mut set = BitSet::new(n);
        for t in &r.tuples {
            set.insert(next);
            for (j, &a) in t.iter().enumerate() {
                tables[j][next as usize] = a;
            }
            next += 1;
        }
        sets.push((r.name.clone(), set));
    }
    let mut graph = FunctionalGraph::new(ids);
    let components = tables
        .into_iter()
        .enumerate()
        .map(|(j, t)| graph.add_table(format!("f_{}", j + 1), 0, FuncOrigin::Base, t))
        .collect();
    let relation_colors = sets
        .into_iter()
        .map(|(name, set)| {
            let c = graph.add_color(format!("P_{name}"), ColorOrigin::Base, set);
            (name, c)
        })
        .collect();
    AdjacencyGraph {
        graph,
        domain_len: d.len(),
        relation_colors,
        components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tuple() {
        let d = RelationalStructure::parse("node 1\nnode 2\nrel E 2\nE 1 2").unwrap();
        let a = adjacency_graph(&d);
        let g = &a.graph;
        assert_eq!(g.ids(), &[1, 2, 3]);
        let p = a.relation_color("E").unwrap();
        assert_eq!(g.color_set(p).iter().collect::<Vec<_>>(), vec![2]);
        assert_eq!(g.apply(a.components[0], 2), 0);
        assert_eq!(g.apply(a.components[1], 2), 1);
        assert_eq!(g.apply(a.components[0], 0), 0);
    }

    #[test]
    fn empty_structure() {
        let d = RelationalStructure::parse("node 1").unwrap();
        let a = adjacency_graph(&d);
        assert_eq!(a.graph.len(), 1);
        assert!(a.graph.signature().colors().is_empty());
        assert_eq!(a.graph.arc_count(), 0);
    }

    #[test]
    fn path_three() {
        let d = RelationalStructure::parse("node 1\nnode 2\nnode 3\nedge 1 2\nedge 2 3").unwrap();
        let a = adjacency_graph(&d);
        assert_eq!(a.graph.len(), 7);
        let p = a.relation_color("E").unwrap();
        assert_eq!(a.graph.color_set(p).count(), 4);
        assert_eq!(a.graph.arc_count(), 8);
        let dec = a.decode();
        assert_eq!(dec[0].1, vec![vec![1, 2], vec![2, 1], vec![2, 3], vec![3, 2]]);
    }
}
