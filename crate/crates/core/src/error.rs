use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("undeclared node {0}")]
    UndeclaredNode(u64),
    #[error("relation {name} has arity {expected}, got {got} arguments")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("query syntax error at offset {pos}: {msg}")]
    QuerySyntax { pos: usize, msg: String },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("variable {0} is bound more than once or shadows a free variable")]
    Shadowing(String),
    #[error("function symbol cap exceeded: {needed} symbols needed, cap is {cap}")]
    SymbolCap { cap: usize, needed: usize },
    #[error("disjunct cap exceeded: more than {cap} disjuncts")]
    DisjunctCap { cap: usize },
    #[error("oracle budget exceeded: {needed} evaluations, budget is {budget}")]
    OracleBudget { budget: u64, needed: u64 },
    #[error("order lemma violated at vertex {0}")]
    OrderLemma(u64),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("expected a tuple of arity {expected}, got {got}")]
    TupleArity { expected: usize, got: usize },
    #[error("unknown vertex id {0}")]
    UnknownVertex(u64),
    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    /// Short machine-readable code used by the command line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::UndeclaredNode(_) | Error::Arity { .. } => "input",
            Error::QuerySyntax { .. } | Error::UnknownSymbol(_) | Error::Shadowing(_) => "query",
            Error::SymbolCap { .. } | Error::DisjunctCap { .. } | Error::OracleBudget { .. } => {
                "resource"
            }
            Error::OrderLemma(_) | Error::Contract(_) => "internal",
            Error::TupleArity { .. } | Error::UnknownVertex(_) => "tuple",
            Error::Unsupported(_) => "unsupported",
        }
    }

    pub fn is_resource(&self) -> bool {
        self.code() == "resource"
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
