//! Relational structures, functional graphs and the adjacency encoding.

pub mod adjacency;
pub mod bitset;
pub mod functional;
pub mod structure;

pub use adjacency::{adjacency_graph, AdjacencyGraph};
pub use bitset::BitSet;
pub use functional::{ColorId, ColorOrigin, ColorSymbol, FuncId, FuncOrigin, FuncSymbol, FunctionalGraph, Signature};
pub use structure::{Relation, RelationalStructure, SizeReport};
