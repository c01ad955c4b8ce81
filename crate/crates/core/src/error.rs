use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the model (η ∉ (0,1], negative photon numbers, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The stationary-point denominator vanished or the closed form produced a non-finite value.
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    /// The bound surface has no unique minimiser (lossless channel).
    #[error("bound surface is flat in the gauge coordinates")]
    FlatSurface,

    /// Probability mass leaked past the Fock cutoff exceeds the configured budget.
    #[error("truncation budget exceeded: trace deficit {deficit:.3e} > budget {budget:.3e}")]
    TruncationBudget { deficit: f64, budget: f64 },

    /// The requested probe has no Fock-space construction.
    #[error("probe `{0}` has no Fock-space representation")]
    NotConstructible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
