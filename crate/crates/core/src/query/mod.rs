//! Query syntax, parsing and vocabulary rewriting.

pub mod ast;
pub mod parser;
pub mod rewrite;

pub use ast::{Formula, Query, Term};
pub use parser::{check, parse_formula, parse_query, Schema};
pub use rewrite::{adjacency_schema, component, domain_test, orient_edges, relation_color, to_functional};
