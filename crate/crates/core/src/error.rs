use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole at s = {0}")]
    Pole(f64),
    #[error("argument outside the domain: {0}")]
    Domain(&'static str),
    #[error("jet order {0} exceeds the supported maximum")]
    UnsupportedOrder(usize),
    /// Best estimate is kept so callers can still report something.
    #[error("accuracy target missed (best estimate {best}, error {error})")]
    Accuracy { best: f64, error: f64 },
    #[error("internal inconsistency: {what} (difference {diff})")]
    Inconsistent { what: &'static str, diff: f64 },
    #[error("series does not converge: {0}")]
    Divergence(&'static str),
    #[error("missing capability: {0}")]
    Capability(&'static str),
    #[error("invalid input: {0}")]
    Input(&'static str),
}
