//! Integer-only clock skew compensation.
//!
//! A sensor node that knows its inverse frequency ratio only as an integer pair
//! `D/A` maps a hardware-clock reading `i` to the compensated clock `j ≈ i·D/A`
//! by walking a Bresenham line, so the answer never depends on the precision of
//! a floating-point division.
//!
//! ```
//! use skewcomp::{compensate, CompensationParams, RatioEstimate};
//!
//! let ratio = RatioEstimate::new(4, 6).unwrap();
//! let out = compensate(5, &ratio, &CompensationParams::default()).unwrap();
//! assert_eq!(out.j, 3);
//! ```
//!
//! The lattice types are generic over the integer width ([`LatticeInt`]) and the
//! floating-point oracles over the binary format ([`BinaryFloat`]); the aliases
//! below fix the widths used by the compensator.

pub mod bresenham;
pub mod compensator;
pub mod error;
pub mod experiment;
pub mod oracles;
pub mod scalar;
pub mod verify;

pub use bresenham::{Convention, DecisionVar, LatticePoint, Movement, Slope, TieRule};
pub use compensator::{
    candidate_window, compensate, compensate_case1, logical_clock_update, CandidateWindow,
    ClockState, CompensationOutcome, CompensationParams, RatioCase, RatioEstimate, WindowParams,
};
pub use error::{Error, Result};
pub use oracles::{exact_quotient, float_compensate, fp_quotient, QuotientOrder, RoundingMode};
pub use scalar::{BinaryFloat, FpFormat, LatticeInt};

pub type Slope64 = Slope<i64>;
pub type Slope128 = Slope<i128>;
pub type LatticePoint64 = LatticePoint<i64>;
pub type LatticePoint128 = LatticePoint<i128>;
pub type DecisionVar64 = DecisionVar<i64>;
pub type DecisionVar128 = DecisionVar<i128>;

/// Single-precision quotient, the format most sensor-node FPUs provide.
pub type Binary32 = f32;
/// Double-precision quotient, used as the table reference.
pub type Binary64 = f64;
