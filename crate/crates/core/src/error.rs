use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: u64, right: u64 },
    #[error("scalar is zero and has no inverse")]
    ZeroScalar,
    #[error("all-zero filter has no direction")]
    ZeroFilter,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("malformed encoding: {0}")]
    Decode(&'static str),
    #[error("authenticated decryption failed")]
    Authentication,
    #[error("attribute set does not satisfy the access policy")]
    PolicyNotSatisfied,
    #[error("decryption key does not belong to this ciphertext's authority")]
    WrongAuthority,
    #[error("duplicate pseudonym {0}")]
    DuplicatePseudonym(String),
    #[error("invalid SNP: {0}")]
    InvalidSnp(String),
    #[error("corrupt index: {0}")]
    CorruptIndex(&'static str),
    #[error("no shared key registered")]
    NoSharedKey,
}
