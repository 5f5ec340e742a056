//! Ground truth for compensated clocks.
//!
//! [`exact_quotient`] evaluates `i·D/A` in 128-bit integers and is the final
//! arbiter in every test. [`fp_quotient`] and [`float_compensate`] model the
//! floating-point compensators deployed on sensor nodes: every operand is
//! converted to the target format and every operation rounds to nearest-even
//! in that format.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{BinaryFloat, FpFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RoundingMode {
    #[default]
    Floor,
    NearestHalfUp,
    Ceil,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 3] = [
        RoundingMode::Floor,
        RoundingMode::NearestHalfUp,
        RoundingMode::Ceil,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RoundingMode::Floor => "floor",
            RoundingMode::NearestHalfUp => "nearest",
            RoundingMode::Ceil => "ceil",
        }
    }

    fn apply(self, value: f64) -> f64 {
        match self {
            RoundingMode::Floor => value.floor(),
            // Values are non-negative, so half-away-from-zero is half-up.
            RoundingMode::NearestHalfUp => value.round(),
            RoundingMode::Ceil => value.ceil(),
        }
    }
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RoundingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "floor" | "down" => Ok(RoundingMode::Floor),
            "nearest" | "round" | "half-up" => Ok(RoundingMode::NearestHalfUp),
            "ceil" | "up" => Ok(RoundingMode::Ceil),
            other => Err(format!("unknown rounding mode `{other}`")),
        }
    }
}

/// Expression tree for the floating-point quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QuotientOrder {
    /// `i ⊗ (D ⊘ A)`: one ratio, reused for every query.
    #[default]
    DivideFirst,
    /// `(i ⊗ D) ⊘ A`
    MultiplyFirst,
}

impl QuotientOrder {
    pub fn name(self) -> &'static str {
        match self {
            QuotientOrder::DivideFirst => "divide-first",
            QuotientOrder::MultiplyFirst => "multiply-first",
        }
    }
}

impl fmt::Display for QuotientOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuotientOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "divide-first" | "i*(d/a)" => Ok(QuotientOrder::DivideFirst),
            "multiply-first" | "(i*d)/a" => Ok(QuotientOrder::MultiplyFirst),
            other => Err(format!("unknown quotient order `{other}`")),
        }
    }
}

/// `i·D/A` rounded as requested, in exact integer arithmetic.
pub fn exact_quotient(i: u64, d: u64, a: u64, rounding: RoundingMode) -> Result<u128> {
    if a == 0 {
        return Err(Error::ZeroDenominator);
    }
    let num = i as u128 * d as u128;
    let den = a as u128;
    Ok(match rounding {
        RoundingMode::Floor => num / den,
        RoundingMode::Ceil => num.div_ceil(den),
        RoundingMode::NearestHalfUp => (2 * num + den) / (2 * den),
    })
}

/// The quotient evaluated natively in `F`.
#[inline]
pub fn quotient_in<F: BinaryFloat>(i: u64, d: u64, a: u64, order: QuotientOrder) -> F {
    let (i, d, a) = (F::from_ticks(i), F::from_ticks(d), F::from_ticks(a));
    match order {
        QuotientOrder::DivideFirst => i * (d / a),
        QuotientOrder::MultiplyFirst => (i * d) / a,
    }
}

/// `i ⊗ (D ⊘ A)` in `format`, widened exactly to `f64`.
pub fn fp_quotient(i: u64, d: u64, a: u64, format: FpFormat) -> Result<f64> {
    fp_quotient_with(i, d, a, format, QuotientOrder::DivideFirst)
}

pub fn fp_quotient_with(
    i: u64,
    d: u64,
    a: u64,
    format: FpFormat,
    order: QuotientOrder,
) -> Result<f64> {
    if a == 0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(match format {
        FpFormat::Binary32 => quotient_in::<f32>(i, d, a, order).widen(),
        FpFormat::Binary64 => quotient_in::<f64>(i, d, a, order).widen(),
    })
}

/// Floating-point compensator: the quotient in `format`, then rounded to ticks.
pub fn float_compensate(
    i: u64,
    d: u64,
    a: u64,
    format: FpFormat,
    rounding: RoundingMode,
) -> Result<i64> {
    float_compensate_with(i, d, a, format, rounding, QuotientOrder::DivideFirst)
}

pub fn float_compensate_with(
    i: u64,
    d: u64,
    a: u64,
    format: FpFormat,
    rounding: RoundingMode,
    order: QuotientOrder,
) -> Result<i64> {
    let q = fp_quotient_with(i, d, a, format, order)?;
    Ok(rounding.apply(q) as i64)
}
