use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QwalkError {
    #[error("{name} is not a finite number")]
    NonFinite { name: &'static str },

    #[error("perturbation at x = {x}: {param} = {value} is outside [0, 2pi)")]
    PerturbationOutOfRange {
        x: i64,
        param: &'static str,
        value: f64,
    },

    #[error("a perturbation table is only accepted for a perturbed field")]
    UnexpectedPerturbation,

    #[error("initial spinor is not normalized: |alpha|^2 + |beta|^2 = {0}")]
    NotNormalized(f64),

    #[error("initial amplitudes must satisfy a, b >= 0 and a^2 + b^2 = 1 (got a = {a}, b = {b})")]
    InvalidInitialState { a: f64, b: f64 },

    #[error("branch index {0} is not in 1..=4")]
    InvalidBranch(u8),

    #[error("stationary branch {index} is singular: |{what}| = {value:e}")]
    SingularBranch {
        index: u8,
        what: &'static str,
        value: f64,
    },

    #[error("window half-width {0} is below the minimum of 2")]
    WindowTooSmall(i64),

    #[error("x = {0} lies outside the kernel support |x| < 1/sqrt(2)")]
    OutsideSupport(f64),

    #[error("path half-size N = {0} is below the minimum of 2")]
    PathTooSmall(usize),

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("gap closes: min r_k = {0:e}")]
    Gapless(f64),

    #[error("coin is not Hermitian (defect {0:e}); its square root branch is undefined")]
    NonHermitianCoin(f64),

    #[error("coin at x = {0} has a nonzero diagonal phase and no symmetric-frame factorization")]
    NoFrameFactorization(i64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, QwalkError>;
