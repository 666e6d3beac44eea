use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("expected {expected} control points, got {found}")]
    ControlPointCount { expected: usize, found: usize },

    #[error("invalid parameter interval [{start}, {end}]")]
    InvalidInterval { start: f64, end: f64 },

    #[error("singular or ill-conditioned linear system: {0}")]
    SingularSystem(String),

    #[error("Newton iteration did not converge (last iterate ({s}, {t}), residual {residual:e})")]
    NewtonFailure { s: f64, t: f64, residual: f64 },

    #[error("curves coincide on a segment (candidate budget exhausted)")]
    CoincidentCurves,

    #[error("edge {edge0} of the first triangle and edge {edge1} of the second are coincident on a curve segment that could not be resolved")]
    CoincidentEdges { edge0: usize, edge1: usize },

    #[error("ambiguous classification at a corner intersection")]
    CornerAmbiguity,

    #[error("curved polygon boundary is not closed: segment {segment} ends {gap:e} away from the next start")]
    OpenBoundary { segment: usize, gap: f64 },

    #[error("boundary traversal stalled with {remaining} unused segments")]
    TraversalStall { remaining: usize },

    #[error("element {id} is degenerate (ill-conditioned node system or failed solve)")]
    ElementDegenerate { id: usize },

    #[error("element {id} is inverted or otherwise invalid")]
    InvalidElement { id: usize },

    #[error("target element {target} is not covered by the donor mesh")]
    NoIntersection { target: usize },

    #[error("field has {found} values for element {element}, expected {expected}")]
    FieldShapeMismatch { element: usize, expected: usize, found: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("intersecting target element {target} with donor element {donor}: {source}")]
    ElementPair {
        target: usize,
        donor: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Parse and I/O failures, as opposed to geometric or numerical ones.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Io(_)
                | Error::FieldShapeMismatch { .. }
                | Error::DegreeMismatch { .. }
                | Error::ControlPointCount { .. }
                | Error::DegreeTooHigh { .. }
        )
    }

    pub(crate) fn in_pair(self, target: usize, donor: usize) -> Error {
        match self {
            e @ Error::ElementPair { .. } => e,
            e => Error::ElementPair { target, donor, source: Box::new(e) },
        }
    }
}
