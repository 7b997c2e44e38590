use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AtsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not converge on [{lower}, {upper}]: estimate {estimate}, achieved error {achieved}, requested {requested}")]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("integral diverges: tail exponent {exponent} (requires < {limit})")]
    Divergent { exponent: f64, limit: f64 },

    #[error("inversion accuracy {achieved} exceeds tolerance {tolerance}")]
    Inversion { achieved: f64, tolerance: f64 },

    #[error("price {price} outside the no-arbitrage bounds ({lower}, {upper})")]
    PriceOutOfBounds { price: f64, lower: f64, upper: f64 },

    #[error("implied volatility bracket could not be expanded beyond {max_vol}")]
    BracketExpansion { max_vol: f64 },

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("complex power argument crosses the branch cut (Re = {0})")]
    BranchCut(f64),
}

pub type Result<T> = std::result::Result<T, AtsError>;
