use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// An enumeration cap or state budget was exceeded. `layer` is the
    /// propagation layer reached when the budget tripped, if any.
    #[error("capacity exceeded: {what} ({reached} > limit {limit}{})", .layer.map(|l| format!(", at layer {l}")).unwrap_or_default())]
    Capacity {
        what: &'static str,
        limit: usize,
        reached: usize,
        layer: Option<usize>,
    },

    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn cap(what: &'static str, limit: usize, reached: usize) -> Self {
        Error::Capacity {
            what,
            limit,
            reached,
            layer: None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
