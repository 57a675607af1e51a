//! Finite relational structures and the flat structure-file format.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// One relation of a structure. Tuples hold dense element indices and are
/// kept sorted without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    pub tuples: Vec<Vec<u32>>,
}

/// A finite relational structure with a fixed linear order on its domain.
///
/// Elements are addressed internally by their dense position in the
/// declaration order; `ids` maps positions back to the external node ids.
#[derive(Debug, Clone, Default)]
pub struct RelationalStructure {
    ids: Vec<u64>,
    index: HashMap<u64, u32>,
    relations: Vec<Relation>,
    by_name: BTreeMap<String, usize>,
}

/// `||D|| = |D| + sum of tuple count times arity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeReport {
    pub domain: usize,
    pub relations: Vec<(String, usize)>,
    pub total: usize,
}

impl PartialEq for RelationalStructure {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.relations_by_name().map(|(_, r)| r).eq(other.relations_by_name().map(|(_, r)| r))
    }
}

impl Eq for RelationalStructure {}

impl RelationalStructure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a domain element. Ids must be strictly increasing.
    pub fn add_node(&mut self, id: u64) -> Result<u32> {
        if let Some(&last) = self.ids.last() {
            if id <= last {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("node {id} declared out of order (after {last})"),
                });
            }
        }
        let pos = self.ids.len() as u32;
        self.ids.push(id);
        self.index.insert(id, pos);
        Ok(pos)
    }

    /// Declares a relation, or checks the arity of an existing one.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<usize> {
        if arity == 0 {
            return Err(Error::Arity {
                name: name.to_string(),
                expected: 1,
                got: 0,
            });
        }
        if let Some(&r) = self.by_name.get(name) {
            let have = self.relations[r].arity;
            if have != arity {
                return Err(Error::Arity {
                    name: name.to_string(),
                    expected: have,
                    got: arity,
                });
            }
            return Ok(r);
        }
        let r = self.relations.len();
        self.relations.push(Relation {
            name: name.to_string(),
            arity,
            tuples: Vec::new(),
        });
        self.by_name.insert(name.to_string(), r);
        Ok(r)
    }

    /// Adds a tuple given by external ids. Duplicates are dropped on `finish`.
    pub fn add_tuple(&mut self, name: &str, ids: &[u64]) -> Result<()> {
        let r = *self
            .by_name
            .get(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        let arity = self.relations[r].arity;
        if ids.len() != arity {
            return Err(Error::Arity {
                name: name.to_string(),
                expected: arity,
                got: ids.len(),
            });
        }
        let mut tuple = Vec::with_capacity(arity);
        for id in ids {
            tuple.push(*self.index.get(id).ok_or(Error::UndeclaredNode(*id))?);
        }
        self.relations[r].tuples.push(tuple);
        Ok(())
    }

    /// Sorts and deduplicates all relations.
    pub fn finish(&mut self) {
        for rel in &mut self.relations {
            rel.tuples.sort();
            rel.tuples.dedup();
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

    pub fn id(&self, pos: u32) -> u64 {
        self.ids[pos as usize]
    }

    pub fn position(&self, id: u64) -> Option<u32> {
        self.index.get(&id).copied()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.by_name.get(name).map(|&r| &self.relations[r])
    }

    pub fn relation_id(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    /// Relations in name order; this is the order tuple vertices are laid out in.
    pub fn relations_by_name(&self) -> impl Iterator<Item = (usize, &Relation)> {
        self.by_name.values().map(move |&r| (r, &self.relations[r]))
    }

    pub fn contains(&self, rel: usize, tuple: &[u32]) -> bool {
        self.relations[rel].tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).is_ok()
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(|r| r.tuples.len()).sum()
    }

    pub fn size_report(&self) -> SizeReport {
        let relations: Vec<(String, usize)> = self
            .relations_by_name()
            .map(|(_, r)| (r.name.clone(), r.tuples.len() * r.arity))
            .collect();
        let total = self.len() + relations.iter().map(|(_, s)| s).sum::<usize>();
        SizeReport {
            domain: self.len(),
            relations,
            total,
        }
    }

    /// Parses the structure-file format.
    ///
    /// ```text
    /// # comment
    /// node 1
    /// node 2
    /// rel E 2
    /// E 1 2
    /// color Red 1
    /// edge 1 2
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = RelationalStructure::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let at = |e: Error| match e {
                Error::Parse { msg, .. } => Error::Parse { line, msg },
                other => other,
            };
            let mut parts = content.split_whitespace();
            let head = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            let num = |t: &str| -> Result<u64> {
                t.parse::<u64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("expected a node id, found {t:?}"),
                })
            };
            match head {
                "node" => {
                    if rest.len() != 1 {
                        return Err(Error::Parse {
                            line,
                            msg: "usage: node <id>".into(),
                        });
                    }
                    s.add_node(num(rest[0])?).map_err(at)?;
                }
                "rel" => {
                    if rest.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            msg: "usage: rel <name> <arity>".into(),
                        });
                    }
                    let arity = rest[1].parse::<usize>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad arity {:?}", rest[1]),
                    })?;
                    check_name(rest[0], line)?;
                    s.declare(rest[0], arity)?;
                }
                "color" => {
                    if rest.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            msg: "usage: color <name> <id>".into(),
                        });
                    }
                    check_name(rest[0], line)?;
                    s.declare(rest[0], 1)?;
                    s.add_tuple(rest[0], &[num(rest[1])?])?;
                }
                "edge" => {
                    if rest.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            msg: "usage: edge <u> <v>".into(),
                        });
                    }
                    let (u, v) = (num(rest[0])?, num(rest[1])?);
                    if u == v {
                        return Err(Error::Parse {
                            line,
                            msg: format!("edge {u} {u} is a self-loop"),
                        });
                    }
                    s.declare("E", 2)?;
                    s.add_tuple("E", &[u, v])?;
                    s.add_tuple("E", &[v, u])?;
                }
                name => {
                    if s.relation_id(name).is_none() {
                        return Err(Error::Parse {
                            line,
                            msg: format!("unknown directive or relation {name:?}"),
                        });
                    }
                    let ids = rest.iter().map(|t| num(t)).collect::<Result<Vec<_>>>()?;
                    s.add_tuple(name, &ids)?;
                }
            }
        }
        s.finish();
        Ok(s)
    }

    /// Serializes back into the structure-file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for id in &self.ids {
            out.push_str(&format!("node {id}\n"));
        }
        for (_, rel) in self.relations_by_name() {
            out.push_str(&format!("rel {} {}\n", rel.name, rel.arity));
            for t in &rel.tuples {
                out.push_str(&rel.name);
                for &e in t {
                    out.push_str(&format!(" {}", self.id(e)));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Builds an undirected graph structure with relation `E` from an edge list
    /// over nodes `0..n`.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut s = RelationalStructure::new();
        for i in 0..n {
            s.add_node(i as u64).unwrap();
        }
        s.declare("E", 2).unwrap();
        for &(u, v) in edges {
            if u != v {
                s.relations[0].tuples.push(vec![u, v]);
                s.relations[0].tuples.push(vec![v, u]);
            }
        }
        s.finish();
        s
    }
}

fn check_name(name: &str, line: usize) -> Result<()> {
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok && !matches!(name, "node" | "rel" | "color" | "edge") {
        Ok(())
    } else {
        Err(Error::Parse {
            line,
            msg: format!("invalid relation name {name:?}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nodes_and_tuples() {
        let s = RelationalStructure::parse("node 1\nnode 2\nrel E 2\nE 1 2").unwrap();
        assert_eq!(s.ids(), &[1, 2]);
        assert_eq!(s.relation("E").unwrap().tuples, vec![vec![0, 1]]);
    }

    #[test]
    fn undeclared_node_is_rejected() {
        let err = RelationalStructure::parse("rel E 2\nE 1 9").unwrap_err();
        assert_eq!(err.to_string(), "undeclared node 1");
        let err = RelationalStructure::parse("node 1\nrel E 2\nE 1 9").unwrap_err();
        assert_eq!(err.to_string(), "undeclared node 9");
    }

    #[test]
    fn arity_mismatch_and_parse_errors() {
        let err = RelationalStructure::parse("node 1\nrel E 2\nE 1").unwrap_err();
        assert!(matches!(err, Error::Arity { expected: 2, got: 1, .. }));
        let err = RelationalStructure::parse("node 1\nbogus 1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = RelationalStructure::parse("node 2\nnode 1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn duplicates_are_collapsed() {
        let s = RelationalStructure::parse("node 1\nnode 2\nrel E 2\nE 1 2\nE 1 2\n# x\n").unwrap();
        assert_eq!(s.relation("E").unwrap().tuples.len(), 1);
    }

    #[test]
    fn path_sizes() {
        let s = RelationalStructure::parse("node 1\nnode 2\nnode 3\nedge 1 2\nedge 2 3").unwrap();
        let r = s.size_report();
        assert_eq!(r.domain, 3);
        assert_eq!(r.relations, vec![("E".to_string(), 8)]);
        assert_eq!(r.total, 11);
    }

    #[test]
    fn empty_and_ternary_sizes() {
        let s = RelationalStructure::parse("node 1\nnode 2\nnode 3\nnode 4").unwrap();
        assert_eq!(s.size_report().total, 4);
        let s = RelationalStructure::parse("node 1\nnode 2\nnode 3\nrel R 3\nR 1 2 3").unwrap();
        let r = s.size_report();
        assert_eq!(r.relations, vec![("R".to_string(), 3)]);
        assert_eq!(r.total, 6);
    }

    #[test]
    fn text_round_trip() {
        let s = RelationalStructure::parse("node 1\nnode 5\ncolor Red 5\nedge 1 5").unwrap();
        let again = RelationalStructure::parse(&s.to_text()).unwrap();
        assert_eq!(s, again);
    }
}
