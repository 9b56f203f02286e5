use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation was applied outside its domain (zero inverse, singular
    /// matrix, degenerate form, element not in the group, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A nonzero element failed to invert: the adjoined radicals are not
    /// independent, so the ring is not a field.
    #[error("radical dependence: {0}")]
    RadicalDependence(String),

    #[error("runaway closure: more than {bound} elements")]
    RunawayClosure { bound: usize },

    /// A construction-stage invariant failed; the inputs or the arithmetic
    /// are broken.
    #[error("construction failed: {0}")]
    Construction(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Construction(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
