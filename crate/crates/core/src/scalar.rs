//! Scalar traits shared by the lattice walk and the floating-point baselines.

use std::fmt::{self, Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, PrimInt, Signed, ToPrimitive};

/// Signed integer used for lattice coordinates and decision variables.
///
/// Decision arithmetic multiplies a coordinate by a slope extent, so the type
/// must be at least twice as wide as the 32-bit values accepted at the API
/// boundary.
pub trait LatticeInt:
    PrimInt + Signed + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl LatticeInt for i64 {}
impl LatticeInt for i128 {}

/// IEEE-754 binary interchange format a node might evaluate the skew quotient in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FpFormat {
    Binary32,
    #[default]
    Binary64,
}

impl FpFormat {
    /// Unit roundoff `u = 2^-p` under round-to-nearest.
    pub fn unit_roundoff(self) -> f64 {
        match self {
            FpFormat::Binary32 => <f32 as BinaryFloat>::UNIT_ROUNDOFF,
            FpFormat::Binary64 => <f64 as BinaryFloat>::UNIT_ROUNDOFF,
        }
    }

    /// Relative error bound `γ₃ = 3u / (1 - 3u)` of a quotient computed with
    /// three correctly rounded operations (two conversions and one product, or
    /// one conversion, one division and one product).
    pub fn quotient_error_bound(self) -> f64 {
        let u3 = 3.0 * self.unit_roundoff();
        u3 / (1.0 - u3)
    }

    pub fn name(self) -> &'static str {
        match self {
            FpFormat::Binary32 => "binary32",
            FpFormat::Binary64 => "binary64",
        }
    }
}

impl Display for FpFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FpFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "binary32" | "single" | "f32" => Ok(FpFormat::Binary32),
            "binary64" | "double" | "f64" => Ok(FpFormat::Binary64),
            other => Err(format!("unknown floating-point format `{other}`")),
        }
    }
}

/// A native IEEE-754 binary type. Every arithmetic operation on these types
/// rounds to nearest-even in its own format, which is exactly the behavior
/// of a single-precision FPU (or soft-float library) on a sensor node.
pub trait BinaryFloat:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    const FORMAT: FpFormat;
    const UNIT_ROUNDOFF: f64;

    /// Rounds an integer tick count into this format (nearest, ties to even).
    fn from_ticks(ticks: u64) -> Self;

    /// Widens to `f64`; exact for both implementors.
    fn widen(self) -> f64;
}

impl BinaryFloat for f32 {
    const FORMAT: FpFormat = FpFormat::Binary32;
    const UNIT_ROUNDOFF: f64 = 1.0 / (1u64 << 24) as f64;

    #[inline]
    fn from_ticks(ticks: u64) -> Self {
        ticks as f32
    }

    #[inline]
    fn widen(self) -> f64 {
        self as f64
    }
}

impl BinaryFloat for f64 {
    const FORMAT: FpFormat = FpFormat::Binary64;
    const UNIT_ROUNDOFF: f64 = 1.0 / (1u64 << 53) as f64;

    #[inline]
    fn from_ticks(ticks: u64) -> Self {
        ticks as f64
    }

    #[inline]
    fn widen(self) -> f64 {
        self
    }
}
