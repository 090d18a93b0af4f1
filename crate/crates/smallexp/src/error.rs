//! Error taxonomy shared by every module.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The request exceeds a documented implementation ceiling.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The inputs are outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Group-structure certification failed above the exhaustive threshold.
    /// Sampling found candidate (m1, m2) but could not prove it; never a
    /// silent guess.
    #[error("uncertified structure for curve ({a},{b}) over F_{p}: candidate (m1,m2)=({m1},{m2}) could not be certified above the exhaustive threshold")]
    Uncertified { p: u64, a: u64, b: u64, m1: u64, m2: u64 },

    /// A cache file failed to parse; offset is the byte position of the bad line.
    #[error("cache read error in {path} at byte {offset}: {reason}")]
    CacheRead { path: PathBuf, offset: u64, reason: String },

    /// The attainability oracle and an exhaustive scan disagree.
    #[error("internal consistency error: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
