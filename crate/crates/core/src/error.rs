use thiserror::Error;

/// Errors raised by the geometry, voting and evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid depth {depth} at pixel ({u}, {v})")]
    InvalidDepth { u: u32, v: u32, depth: f64 },

    #[error("size mismatch: {what} ({left} vs {right})")]
    SizeMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("not enough points: need {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no model point projects into the image")]
    EmptyRender,

    #[error("mask is empty")]
    EmptyMask,

    #[error("accumulator holds no votes")]
    NoPeak,

    #[error("accumulator grids do not share origin, resolution and dimensions")]
    GridMismatch,

    #[error("scheme mismatch: {0:?} vs {1:?}")]
    SchemeMismatch(crate::SchemeKind, crate::SchemeKind),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
