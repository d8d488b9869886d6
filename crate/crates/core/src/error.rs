use thiserror::Error;

use crate::arith::ArithError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("elements belong to groups with different parameters")]
    ParamMismatch,
    #[error("portraits have different depths ({0} vs {1})")]
    DepthMismatch(u32, u32),
    #[error("level {level} is out of range for depth {k}")]
    LevelOutOfRange { level: u32, k: u32 },
    #[error("depth {0} is too large for exhaustive enumeration")]
    DepthTooLarge(u32),
    #[error("enumeration exceeded the cap of {0} elements")]
    CapExceeded(u64),
    #[error("group of order {0} is too large to enumerate")]
    TooLarge(String),
    #[error("the given set is not closed under the group law")]
    NotAGroup,
    #[error("base element is not set or not admissible")]
    BaseNotSet,
    #[error("values come from different platforms")]
    PlatformMismatch,
    #[error("target is not in the orbit within {0} steps")]
    NotInOrbit(u64),
    #[error("operation unsupported on this platform: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
