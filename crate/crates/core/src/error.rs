use crate::basis::NodeKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degree {degree} is not valid for {kind:?} nodes")]
    InvalidDegree { degree: usize, kind: NodeKind },

    #[error("element index {index} out of range (mesh has {count} elements)")]
    ElementOutOfRange { index: usize, count: usize },

    #[error("inadmissible state{}: {detail}", location(.element, .stage))]
    Inadmissible {
        element: Option<usize>,
        stage: Option<usize>,
        detail: String,
    },

    #[error("non-finite value {}", step.map(|s| format!("at step {s}")).unwrap_or_default())]
    NonFinite { step: Option<usize> },

    #[error("relaxation parameter must be positive, got {0}")]
    NonPositiveEps(f64),

    #[error("unknown tableau `{0}`")]
    UnknownTableau(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn location(element: &Option<usize>, stage: &Option<usize>) -> String {
    match (element, stage) {
        (Some(e), Some(s)) => format!(" in element {e}, stage {s}"),
        (Some(e), None) => format!(" in element {e}"),
        (None, Some(s)) => format!(" in stage {s}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn inadmissible(detail: impl Into<String>) -> Self {
        Error::Inadmissible {
            element: None,
            stage: None,
            detail: detail.into(),
        }
    }

    pub(crate) fn at_element(self, e: usize) -> Self {
        match self {
            Error::Inadmissible { stage, detail, .. } => Error::Inadmissible {
                element: Some(e),
                stage,
                detail,
            },
            other => other,
        }
    }

    pub(crate) fn at_stage(self, s: usize) -> Self {
        match self {
            Error::Inadmissible { element, detail, .. } => Error::Inadmissible {
                element,
                stage: Some(s),
                detail,
            },
            other => other,
        }
    }
}
