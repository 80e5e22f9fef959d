use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("eigensystem requested within {tol:e} of an exceptional point (|gap| = {gap:e})")]
    EpProximity { gap: f64, tol: f64 },
    #[error("relaxation time diverges at the exceptional point (epsilon = {0})")]
    DivergesAtEp(f64),
    #[error("amplitude overflow at t = {0}; enable renormalization")]
    Overflow(f64),
    #[error("both left projections vanish")]
    Degenerate,
    #[error("scenario/phase mismatch: {0}")]
    ScenarioPhaseMismatch(String),
    #[error("empty integration window: {0}")]
    EmptyWindow(String),
    #[error("accuracy loss in {what}: estimated error {est:e} for |value| = {magnitude:e}")]
    AccuracyLoss { what: String, est: f64, magnitude: f64 },
    #[error("Gamma function pole at order {0}")]
    GammaPole(String),
    #[error("series order {0} is not available for this density")]
    SeriesOrder(u32),
    #[error("no root bracketed: {0}")]
    NoRoot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
