//! Quantifier elimination: every first-order query becomes a
//! quantifier-free formula over a recolored augmentation of the graph.

pub mod compile;
pub mod dnf;
pub mod eliminate;
pub mod expr;
pub mod normalize;
pub mod workspace;

pub use compile::{compile, compile_expr, eliminate_all, CompiledQuery};
pub use dnf::{y_dnf, Lit, YConj};
pub use eliminate::{beta_d, beta_p, compute_witness, eliminate, StageReport, Witness};
pub use expr::{resolve, Atom, Expr, Resolved, Term, Var};
pub use normalize::{normalize, normalize_exclusive, DeltaEq, Disjunct, NeqClause, Normalized, PType};
pub use workspace::{Limits, Workspace, DEFAULT_DISJUNCT_CAP, DEFAULT_MAX_LEVEL};
