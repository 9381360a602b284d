use thiserror::Error;

#[derive(Debug, Error)]
pub enum VemError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("mesh generation error: {0}")]
    Generation(String),
    #[error("refinement error in cell {cell}: {msg}")]
    Refinement { cell: usize, msg: String },
    #[error("element error in cell {cell}: {msg}")]
    Element { cell: usize, msg: String },
    #[error("solver error: {0}")]
    Solver(String),
    #[error("pipeline error: {0}")]
    Pipeline(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("level {level}: {source}")]
    AtLevel { level: usize, source: Box<VemError> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = VemError> = std::result::Result<T, E>;
