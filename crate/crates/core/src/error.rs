use std::fmt;

/// A single rejected row from a measurement file.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    /// 1-based line number in the source file (header is line 1 for CSV).
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid platform spec: {0}")]
    InvalidSpec(String),

    #[error("platform `{0}` declares no vector unit")]
    MissingVectorUnit(String),

    #[error("memory access count is zero, arithmetic intensity is undefined")]
    ZeroMemoryAccess,

    #[error("{elements} elements is below the sizing rule minimum of {required}")]
    SizingViolation { elements: usize, required: usize },

    #[error("resource error: {0}")]
    Resource(String),

    #[error("kernel corruption at element {index}: expected {expected:e}, found {found:e}")]
    KernelCorruption {
        index: usize,
        expected: f64,
        found: f64,
    },

    #[error(
        "vector width {requested} bits is not supported on this host (supported: {supported:?})"
    )]
    Capability { requested: u32, supported: Vec<u32> },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{} invalid row(s): {}", .0.len(), join_rows(.0))]
    Rows(Vec<RowError>),

    #[error("incomplete matrix: no measurement for pair ({a}, {b}) at {msg_bytes} bytes")]
    IncompleteMatrix {
        a: String,
        b: String,
        msg_bytes: u64,
    },

    #[error("underdetermined fit: need at least {needed} distinct points, got {got}")]
    Underdetermined { needed: usize, got: usize },

    #[error("fit did not converge after {iterations} iterations (best a={best_a}, b={best_b})")]
    Convergence {
        iterations: usize,
        best_a: f64,
        best_b: f64,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("no application is shared by two or more groups")]
    EmptyComparison,

    #[error("not available: {0}")]
    NotAvailable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn join_rows(rows: &[RowError]) -> String {
    rows.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Short stable identifier, used in machine-parsable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::MissingVectorUnit(_) => "missing-unit",
            Error::ZeroMemoryAccess => "division-guard",
            Error::SizingViolation { .. } => "sizing-violation",
            Error::Resource(_) => "resource",
            Error::KernelCorruption { .. } => "kernel-corruption",
            Error::Capability { .. } => "capability",
            Error::Schema(_) => "schema",
            Error::Rows(_) => "row",
            Error::IncompleteMatrix { .. } => "incomplete-matrix",
            Error::Underdetermined { .. } => "underdetermined",
            Error::Convergence { .. } => "convergence",
            Error::InvalidData(_) => "invalid-data",
            Error::EmptyComparison => "empty-comparison",
            Error::NotAvailable(_) => "not-available",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Read a whole file, naming the path in any I/O error.
pub fn read_text(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}
