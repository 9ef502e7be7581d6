use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("lexical error at offset {offset}: {message}")]
    Lex { offset: usize, message: String },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("arity error at offset {offset}: {message}")]
    Arity { offset: usize, message: String },

    #[error("degenerate immersion at ({}, {}): Gram determinant {gram_det:e}", point[0], point[1])]
    DegenerateImmersion { point: [f64; 2], gram_det: f64 },

    #[error("degenerate discrete metric at node ({}, {}): Gram determinant {gram_det:e}", node.0, node.1)]
    DegenerateNode { node: (usize, usize), gram_det: f64 },

    #[error("operation requires a graph immersion, got {0}")]
    NotGraph(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
