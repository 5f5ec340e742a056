//! Compensation-error tables and the recursive drift study.
//!
//! Ratios are drawn as `A = round(D·(1 + s))` with `s` uniform in
//! `[-skew, +skew]`. Sample `n` comes from a ChaCha8 generator seeded with the
//! run seed and positioned on stream `n`, so the sample list does not depend on
//! how the work is split across threads. Error statistics are reduced with
//! integer `max`/`min`/`sum`, which is order independent as well.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bresenham::Convention;
use crate::compensator::{self, ClockState, CompensationParams, RatioEstimate, WindowParams};
use crate::error::{Error, Result};
use crate::oracles::{self, QuotientOrder, RoundingMode};
use crate::scalar::FpFormat;

/// Where the compensated value is read off the lattice walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Readout {
    /// Row of the path at the target column.
    #[default]
    AtTarget,
    /// Row after also applying the move decided at the target column.
    AfterFinalDecision,
}

/// Sign of the reported compensation error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ErrorSign {
    /// `binary64 reference - algorithm`
    #[default]
    ReferenceMinusAlgorithm,
    /// `algorithm - binary64 reference`
    AlgorithmMinusReference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub d: u64,
    pub sample_count: usize,
    pub skew_ppm: f64,
    pub epsilon: f64,
    pub clocks: Vec<u64>,
    pub seed: u64,
    /// Rounding applied to both floating-point compensators.
    pub rounding: RoundingMode,
    pub convention: Convention,
    /// Format of the proposed algorithm's bracketing quotient.
    pub fp_window_mode: FpFormat,
    /// Format of the floating-point baseline under test.
    pub baseline_format: FpFormat,
    /// Expression tree of the baseline and of the binary64 reference.
    pub baseline_order: QuotientOrder,
    pub readout: Readout,
    pub error_sign: ErrorSign,
}

pub const DEFAULT_SEED: u64 = 0x5eed_2020;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 1_000_000,
            sample_count: 1_000_000,
            skew_ppm: 100.0,
            epsilon: 1e-7,
            clocks: vec![1_000_000, 10_000_000, 100_000_000, 1_000_000_000],
            seed: DEFAULT_SEED,
            rounding: RoundingMode::Floor,
            convention: Convention::TdConsistent,
            fp_window_mode: FpFormat::Binary64,
            baseline_format: FpFormat::Binary32,
            baseline_order: QuotientOrder::MultiplyFirst,
            readout: Readout::AtTarget,
            error_sign: ErrorSign::ReferenceMinusAlgorithm,
        }
    }
}

impl ExperimentConfig {
    /// The configuration whose proposed rows come out as a constant `-1`:
    /// bare closed-form decision variable, read one decision past the target.
    pub fn closed_form_overshoot() -> Self {
        Self {
            convention: Convention::ClosedForm,
            readout: Readout::AfterFinalDecision,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.d == 0 || self.d > u32::MAX as u64 {
            return bad(format!("D must be in 1..={}, got {}", u32::MAX, self.d));
        }
        if self.sample_count == 0 {
            return bad("sample count must be positive".into());
        }
        if !(self.skew_ppm > 0.0 && self.skew_ppm < 1e6) {
            return bad(format!("skew must be in (0, 10^6) ppm, got {}", self.skew_ppm));
        }
        if let Some(c) = self.clocks.iter().find(|&&c| c == 0) {
            return bad(format!("clock values must be positive, got {c}"));
        }
        self.window().validate()
    }

    pub fn window(&self) -> WindowParams {
        WindowParams {
            epsilon: self.epsilon,
            fp_mode: self.fp_window_mode,
        }
    }

    pub fn params(&self) -> CompensationParams {
        CompensationParams::from(self.window()).with_convention(self.convention)
    }
}

/// `round(D·(1 + s))`, rejecting results outside `1..=u32::MAX`.
pub fn ratio_denominator(d: u64, skew: f64) -> Result<u64> {
    let a = (d as f64 * (1.0 + skew)).round();
    if a >= 1.0 && a <= u32::MAX as f64 {
        Ok(a as u64)
    } else {
        Err(Error::InvalidConfig(format!(
            "skew {skew} maps D={d} to a non-positive or oversized A"
        )))
    }
}

fn sample_skew(seed: u64, index: u64, skew_ppm: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let width = skew_ppm * 1e-6;
    rng.gen_range(-width..=width)
}

pub fn sample_a(config: &ExperimentConfig, index: u64) -> Result<u64> {
    ratio_denominator(config.d, sample_skew(config.seed, index, config.skew_ppm))
}

pub fn generate_samples(config: &ExperimentConfig) -> Result<Vec<u64>> {
    config.validate()?;
    (0..config.sample_count as u64)
        .into_par_iter()
        .map(|n| sample_a(config, n))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Proposed,
    FloatBaseline,
}

/// Output of the proposed compensator under the experiment's settings.
pub fn proposed_output(i: u64, ratio: &RatioEstimate, config: &ExperimentConfig) -> Result<i64> {
    let out = compensator::compensate(i, ratio, &config.params())?;
    let j = out.j as i64;
    Ok(match config.readout {
        Readout::AtTarget => j,
        Readout::AfterFinalDecision => j + final_rise(i, ratio, out.j, config.convention),
    })
}

/// Row increment of the move decided at `(i, j)` on the residual line.
fn final_rise(i: u64, ratio: &RatioEstimate, j: u64, convention: Convention) -> i64 {
    let (d, a) = (ratio.d() as i128, ratio.a() as i128);
    let whole = d / a;
    let residual = d - whole * a;
    let (x, y) = (i as i128, j as i128 - i as i128 * whole);
    // Same closed form as the lattice decision variable, but the residual may
    // be zero here (D a multiple of A), which a `Slope` cannot represent.
    let offset = match convention {
        Convention::ClosedForm => 0,
        Convention::TdConsistent => 2 * residual - a,
    };
    let decision = 2 * (x * residual - y * a) + offset;
    i64::from(decision >= 0)
}

fn algorithm_output(
    algorithm: Algorithm,
    i: u64,
    a: u64,
    config: &ExperimentConfig,
) -> Result<i64> {
    match algorithm {
        Algorithm::Proposed => proposed_output(i, &RatioEstimate::new(config.d, a)?, config),
        Algorithm::FloatBaseline => oracles::float_compensate_with(
            i,
            config.d,
            a,
            config.baseline_format,
            config.rounding,
            config.baseline_order,
        ),
    }
}

/// Compensation error of one sample.
pub fn sample_error(algorithm: Algorithm, i: u64, a: u64, config: &ExperimentConfig) -> Result<i64> {
    let reference = oracles::float_compensate_with(
        i,
        config.d,
        a,
        FpFormat::Binary64,
        config.rounding,
        config.baseline_order,
    )?;
    let out = algorithm_output(algorithm, i, a, config)?;
    Ok(match config.error_sign {
        ErrorSign::ReferenceMinusAlgorithm => reference - out,
        ErrorSign::AlgorithmMinusReference => out - reference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub max: i64,
    pub min: i64,
    pub avg: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Copy)]
struct Accumulator {
    max: i64,
    min: i64,
    sum: i128,
    count: u64,
}

impl Accumulator {
    const EMPTY: Self = Self {
        max: i64::MIN,
        min: i64::MAX,
        sum: 0,
        count: 0,
    };

    fn one(e: i64) -> Self {
        Self {
            max: e,
            min: e,
            sum: e as i128,
            count: 1,
        }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            max: self.max.max(other.max),
            min: self.min.min(other.min),
            sum: self.sum + other.sum,
            count: self.count + other.count,
        }
    }
}

pub fn run_cell(
    clock: u64,
    samples: &[u64],
    config: &ExperimentConfig,
    algorithm: Algorithm,
) -> Result<ErrorStats> {
    if samples.is_empty() {
        return Err(Error::InvalidConfig("no samples to evaluate".into()));
    }
    let acc = samples
        .par_iter()
        .map(|&a| sample_error(algorithm, clock, a, config).map(Accumulator::one))
        .try_reduce(|| Accumulator::EMPTY, |x, y| Ok(x.merge(y)))?;
    Ok(ErrorStats {
        max: acc.max,
        min: acc.min,
        avg: acc.sum as f64 / acc.count as f64,
        count: acc.count,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub algorithm: Algorithm,
    pub label: String,
    pub clock: u64,
    pub stats: ErrorStats,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<TableRow>,
}

impl ResultTable {
    pub fn row(&self, algorithm: Algorithm, clock: u64) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.clock == clock)
    }
}

pub fn run_table(config: &ExperimentConfig) -> Result<ResultTable> {
    run_table_with_progress(config, |_| {})
}

/// Baseline rows first, then the proposed rows, one per clock value.
pub fn run_table_with_progress(
    config: &ExperimentConfig,
    mut progress: impl FnMut(&TableRow),
) -> Result<ResultTable> {
    let samples = generate_samples(config)?;
    let mut table = ResultTable::default();
    for algorithm in [Algorithm::FloatBaseline, Algorithm::Proposed] {
        let label = match algorithm {
            Algorithm::Proposed => "proposed".to_string(),
            Algorithm::FloatBaseline => config.baseline_format.name().to_string(),
        };
        for &clock in &config.clocks {
            let stats = run_cell(clock, &samples, config, algorithm)?;
            let row = TableRow {
                algorithm,
                label: label.clone(),
                clock,
                stats,
            };
            progress(&row);
            table.rows.push(row);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(format!("unknown output format `{other}`")),
        }
    }
}

/// `value` with six significant digits in positional notation.
pub fn format_significant(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{:.5}", value);
    }
    let sci = format!("{:.5e}", value);
    let exponent: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (5 - exponent).max(0) as usize;
    format!("{:.*}", decimals, value)
}

pub fn emit(table: &ResultTable, format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str("algorithm,clock,max,min,avg\n");
            for r in &table.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.label,
                    r.clock,
                    r.stats.max,
                    r.stats.min,
                    format_significant(r.stats.avg)
                );
            }
        }
        OutputFormat::Markdown => {
            out.push_str("| Algorithm | Hardware clock | Max. | Min. | Avg. |\n");
            out.push_str("|:---------|---------------:|-----:|-----:|-----:|\n");
            for r in &table.rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} |",
                    r.label,
                    r.clock,
                    r.stats.max,
                    r.stats.min,
                    format_significant(r.stats.avg)
                );
            }
        }
    }
    out
}

impl fmt::Display for ResultTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit(self, OutputFormat::Markdown))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DriftRow {
    pub round: u64,
    pub proposed_drift: i64,
    pub binary32_drift: i64,
}

/// Recursive logical-clock updates over `rounds` sync intervals of
/// `interval` ticks, each with a freshly sampled ratio.
///
/// The integer backend re-anchors a [`ClockState`] every round. The binary32
/// backend keeps its logical clock in a binary32 register and adds each
/// interval's binary32 quotient to it. Drift is each backend's (floored)
/// logical clock minus the floor of the exact rational sum.
pub fn run_drift(config: &ExperimentConfig, rounds: u64, interval: u64) -> Result<Vec<DriftRow>> {
    config.validate()?;
    if rounds == 0 {
        return Err(Error::InvalidConfig("rounds must be at least 1".into()));
    }
    let params = config.params();
    let ratios = (0..=rounds)
        .into_par_iter()
        .map(|r| RatioEstimate::new(config.d, sample_a(config, r)?))
        .collect::<Result<Vec<_>>>()?;

    let mut state = ClockState::new(0, 0, ratios[0]);
    let mut hardware = 0u64;
    let mut single = 0f32;
    let mut truth = BigRational::from_integer(BigInt::from(0));
    let mut rows = Vec::with_capacity(rounds as usize);
    for r in 0..rounds as usize {
        let ratio = ratios[r];
        hardware = hardware
            .checked_add(interval)
            .ok_or_else(|| Error::Overflow { x: hardware.to_string() })?;
        let logical = state.resync(hardware, ratios[r + 1], &params)?;
        single += oracles::quotient_in::<f32>(interval, ratio.d(), ratio.a(), config.baseline_order);
        truth += BigRational::new(
            BigInt::from(interval) * BigInt::from(ratio.d()),
            BigInt::from(ratio.a()),
        );
        let floor_truth = truth
            .floor()
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::Overflow { x: hardware.to_string() })?;
        rows.push(DriftRow {
            round: r as u64 + 1,
            proposed_drift: logical as i64 - floor_truth,
            binary32_drift: single.floor() as i64 - floor_truth,
        });
    }
    Ok(rows)
}

pub fn emit_drift_csv(rows: &[DriftRow]) -> String {
    let mut out = String::from("round,proposed_drift,binary32_drift\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.round, r.proposed_drift, r.binary32_drift);
    }
    out
}

/// Largest absolute drift of each backend over a run.
pub fn max_abs_drift(rows: &[DriftRow]) -> (u64, u64) {
    rows.iter().fold((0, 0), |(p, s), r| {
        (
            p.max(r.proposed_drift.unsigned_abs()),
            s.max(r.binary32_drift.unsigned_abs()),
        )
    })
}
