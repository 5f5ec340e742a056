use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid slope: need 0 < delta_b < delta_a <= {max}, got delta_a={delta_a}, delta_b={delta_b}", max = u32::MAX)]
    InvalidSlope { delta_a: String, delta_b: String },

    #[error("invalid lattice point ({x}, {y}): need 0 <= y <= x")]
    InvalidPoint { x: String, y: String },

    #[error("invalid ratio estimate D={d}, A={a}: both must be in 1..={max}", max = u32::MAX)]
    InvalidRatio { d: u64, a: u64 },

    #[error("division by zero: A must be positive")]
    ZeroDenominator,

    #[error("integer overflow evaluating the decision variable at x={x}")]
    Overflow { x: String },

    #[error("hardware clock {t} precedes the sync anchor {anchor}")]
    ClockRollback { t: u64, anchor: u64 },

    #[error("candidate window for i={i} is empty after clamping (k={lo}, k+l={hi})")]
    WindowDegenerate { i: u64, lo: i64, hi: i64 },

    #[error("walk for i={i}, D={d}, A={a} ended at y={j}, which is not on the valid path")]
    WindowMissed { i: u64, d: u64, a: u64, j: i64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
