use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("momentum label p = 0 is excluded (energy label degenerate with the left-channel threshold)")]
    ZeroMomentum,

    #[error("momentum label |p| = p0 = {p0} sits on the channel threshold; q = 0 makes the (p/q)^(1/2) normalization singular")]
    AtThreshold { p0: f64 },

    #[error("right channel is closed for |p| = {p} < p0 = {p0}")]
    ChannelClosed { p: f64, p0: f64 },

    #[error("energy at a branch point of the resolvent: {0}")]
    BranchPoint(String),

    #[error("{0}")]
    Domain(String),

    #[error("degenerate tail integral: {0}")]
    DegenerateTail(String),

    #[error("linear system is singular or badly conditioned (indicator {indicator:.3e})")]
    SingularSystem { indicator: f64 },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
