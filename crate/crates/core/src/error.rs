use thiserror::Error;

pub type Result<T, E = MechError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechError {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Input(String),

    /// A negative directed cycle reaches the shortest-path target. Only
    /// possible when the option rule is neither SE nor an affine maximizer.
    #[error("negative cycle in the type graph{}", agent.map(|a| format!(" of agent {a}")).unwrap_or_default())]
    NegativeCycle { agent: Option<usize> },

    /// An enumeration would exceed its configured cap.
    #[error("capacity exceeded: {what} needs {required}, cap is {cap}")]
    Capacity {
        what: String,
        required: String,
        cap: u64,
    },

    /// The operation is not defined for this kind of environment or rule.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An always-on dominance or soundness assertion failed.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl MechError {
    pub fn input(msg: impl Into<String>) -> Self {
        MechError::Input(msg.into())
    }

    /// Process exit code used by the CLI and the C API.
    pub fn exit_code(&self) -> i32 {
        match self {
            MechError::Input(_) | MechError::Unsupported(_) => 1,
            MechError::NegativeCycle { .. } => 2,
            MechError::Capacity { .. } => 3,
            MechError::Invariant(_) => 4,
        }
    }
}
