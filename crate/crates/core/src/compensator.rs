//! Skew compensation of hardware-clock readings.
//!
//! For a ratio `D/A < 1` the compensated clock `j` of hardware clock `i` is the
//! row of the canonical lattice path at column `i`. It is found without any
//! floating-point division in the final answer:
//!
//! 1. a rough quotient `q̃ ≈ i·D/A` (possibly in binary32) brackets the
//!    candidates `k..=k+l` that any plausible `j` must lie in;
//! 2. the point `(i - l, k)` can reach every candidate, so a Bresenham walk of
//!    exactly `l` steps started there with the extended decision variable lands
//!    on the path at column `i`.
//!
//! Ratios above one are split as `i·D/A = i·w + i·(D - w·A)/A` with `w = ⌊D/A⌋`
//! so the residual slope is again below one.

use std::fmt;

use crate::bresenham::{self, Convention, LatticePoint, Slope, TieRule};
use crate::error::{Error, Result};
use crate::oracles;
use crate::scalar::{FpFormat, LatticeInt};

/// Integer estimate `D/A` of the inverse clock frequency ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RatioEstimate {
    d: u32,
    a: u32,
}

impl RatioEstimate {
    pub fn new(d: u64, a: u64) -> Result<Self> {
        match (u32::try_from(d), u32::try_from(a)) {
            (Ok(d), Ok(a)) if d > 0 && a > 0 => Ok(Self { d, a }),
            _ => Err(Error::InvalidRatio { d, a }),
        }
    }

    /// Cumulative interdeparture ticks.
    pub fn d(&self) -> u64 {
        self.d as u64
    }

    /// Cumulative interarrival ticks.
    pub fn a(&self) -> u64 {
        self.a as u64
    }

    pub fn is_unit(&self) -> bool {
        self.d == self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowParams {
    /// Relative precision-loss allowance.
    pub epsilon: f64,
    /// Format the bracketing quotient is evaluated in.
    pub fp_mode: FpFormat,
}

impl Default for WindowParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-7,
            fp_mode: FpFormat::Binary64,
        }
    }
}

impl WindowParams {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_finite() && self.epsilon >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "epsilon must be finite and non-negative, got {}",
                self.epsilon
            )))
        }
    }

    /// The allowance actually used: `epsilon`, but never below what three
    /// roundings in `fp_mode` can cost.
    pub fn effective_epsilon(&self) -> f64 {
        self.epsilon.max(self.fp_mode.quotient_error_bound())
    }

    /// Half-width of the candidate window around `q̃` at hardware clock `i`.
    pub fn margin(&self, i: u64) -> f64 {
        1.0 + self.effective_epsilon() * i.max(1) as f64
    }
}

/// Everything [`compensate`] can be tuned with.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompensationParams {
    pub window: WindowParams,
    pub convention: Convention,
    pub tie: TieRule,
}

impl CompensationParams {
    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }
}

impl From<WindowParams> for CompensationParams {
    fn from(window: WindowParams) -> Self {
        Self {
            window,
            ..Self::default()
        }
    }
}

/// Candidate range `k..=k+l` and the rough quotient it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateWindow {
    pub k: u64,
    pub l: u64,
    pub quotient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RatioCase {
    LtOne,
    EqOne,
    GtOne,
}

impl fmt::Display for RatioCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatioCase::LtOne => "D<A",
            RatioCase::EqOne => "D=A",
            RatioCase::GtOne => "D>A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CompensationOutcome {
    /// Skew-compensated clock.
    pub j: u64,
    /// Lowest candidate `k`, shifted by the integer part for `D > A`.
    pub candidate_lo: u64,
    pub candidate_count: u64,
    pub walk_steps: u64,
    pub case_used: RatioCase,
}

impl CompensationOutcome {
    /// First point of the walk; `y` includes the integer part for `D > A`.
    pub fn start_point(&self, i: u64) -> (u64, u64) {
        (i - self.walk_steps, self.candidate_lo)
    }
}

/// Brackets every `j` with `|j - i·D/A| < 1` using a floating-point quotient.
pub fn candidate_window(i: u64, ratio: &RatioEstimate, params: &WindowParams) -> Result<CandidateWindow> {
    params.validate()?;
    let q = oracles::fp_quotient(i, ratio.d(), ratio.a(), params.fp_mode)?;
    let m = params.margin(i);
    let lo = (q - m).ceil().max(0.0);
    let hi = (q + m).floor().min(i as f64);
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::WindowDegenerate {
            i,
            lo: lo as i64,
            hi: hi as i64,
        });
    }
    let (k, top) = (lo as u64, hi as u64);
    Ok(CandidateWindow {
        k,
        l: top - k,
        quotient: q,
    })
}

/// Case `D < A`.
pub fn compensate_case1(
    i: u64,
    ratio: &RatioEstimate,
    params: &CompensationParams,
) -> Result<CompensationOutcome> {
    if ratio.d() >= ratio.a() {
        return Err(Error::InvalidRatio {
            d: ratio.d(),
            a: ratio.a(),
        });
    }
    let window = candidate_window(i, ratio, &params.window)?;
    // Decision values stay below 4·(i+1)·A in magnitude.
    let j = if 4 * (i as u128 + 1) * ratio.a() as u128 <= i64::MAX as u128 {
        walk_to_target::<i64>(i, &window, ratio, params)?
    } else {
        walk_to_target::<i128>(i, &window, ratio, params)?
    };
    Ok(CompensationOutcome {
        j,
        candidate_lo: window.k,
        candidate_count: window.l + 1,
        walk_steps: window.l,
        case_used: RatioCase::LtOne,
    })
}

fn lattice<T: LatticeInt>(v: u64) -> Result<T> {
    T::from_u64(v).ok_or_else(|| Error::Overflow { x: v.to_string() })
}

fn walk_to_target<T: LatticeInt>(
    i: u64,
    window: &CandidateWindow,
    ratio: &RatioEstimate,
    params: &CompensationParams,
) -> Result<u64> {
    let slope = Slope::new(lattice::<T>(ratio.a())?, lattice(ratio.d())?)?;
    let x = lattice::<T>(i)?;
    let k = lattice::<T>(window.k)?;
    let j = if window.l == 0 {
        k
    } else {
        let start = LatticePoint::new(x - lattice(window.l)?, k)?;
        let mut walk = bresenham::walk_from(start, &slope, params.convention, params.tie)?;
        for _ in 0..window.l {
            walk.advance();
        }
        walk.point().y
    };
    let end = LatticePoint { x, y: j };
    if bresenham::is_on_path(&end, &slope, params.convention, params.tie)? {
        Ok(j.to_u64().expect("0 <= j <= i"))
    } else {
        Err(Error::WindowMissed {
            i,
            d: ratio.d(),
            a: ratio.a(),
            j: j.to_i64().expect("0 <= j <= i"),
        })
    }
}

/// Skew-compensated clock for any positive ratio.
pub fn compensate(i: u64, ratio: &RatioEstimate, params: &CompensationParams) -> Result<CompensationOutcome> {
    let (d, a) = (ratio.d(), ratio.a());
    if d < a {
        return compensate_case1(i, ratio, params);
    }
    params.window.validate()?;
    let whole = d / a;
    let base = i
        .checked_mul(whole)
        .ok_or_else(|| Error::Overflow { x: i.to_string() })?;
    let residual = d - whole * a;
    if residual == 0 {
        return Ok(CompensationOutcome {
            j: base,
            candidate_lo: base,
            candidate_count: 1,
            walk_steps: 0,
            case_used: if whole == 1 {
                RatioCase::EqOne
            } else {
                RatioCase::GtOne
            },
        });
    }
    let sub = compensate_case1(i, &RatioEstimate::new(residual, a)?, params)?;
    let shift = |v: u64| {
        base.checked_add(v)
            .ok_or_else(|| Error::Overflow { x: i.to_string() })
    };
    Ok(CompensationOutcome {
        j: shift(sub.j)?,
        candidate_lo: shift(sub.candidate_lo)?,
        case_used: RatioCase::GtOne,
        ..sub
    })
}

/// Logical clock anchored at the most recent synchronization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockState {
    pub logical_anchor: u64,
    pub hardware_anchor: u64,
    pub ratio: RatioEstimate,
}

impl ClockState {
    pub fn new(logical_anchor: u64, hardware_anchor: u64, ratio: RatioEstimate) -> Self {
        Self {
            logical_anchor,
            hardware_anchor,
            ratio,
        }
    }

    /// Logical clock at hardware reading `t`; does not touch the anchors.
    pub fn logical_clock(&self, t: u64, params: &CompensationParams) -> Result<u64> {
        logical_clock_update(self, t, params)
    }

    /// Re-anchors at hardware reading `t` with a fresh ratio estimate.
    pub fn resync(&mut self, t: u64, ratio: RatioEstimate, params: &CompensationParams) -> Result<u64> {
        let logical = self.logical_clock(t, params)?;
        self.logical_anchor = logical;
        self.hardware_anchor = t;
        self.ratio = ratio;
        Ok(logical)
    }
}

/// `t̂(T) = t̂(Tᵢ) + compensate(T - Tᵢ)`.
pub fn logical_clock_update(state: &ClockState, t: u64, params: &CompensationParams) -> Result<u64> {
    let elapsed = t.checked_sub(state.hardware_anchor).ok_or(Error::ClockRollback {
        t,
        anchor: state.hardware_anchor,
    })?;
    let out = compensate(elapsed, &state.ratio, params)?;
    state
        .logical_anchor
        .checked_add(out.j)
        .ok_or_else(|| Error::Overflow { x: t.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(d: u64, a: u64) -> RatioEstimate {
        RatioEstimate::new(d, a).unwrap()
    }

    fn params() -> CompensationParams {
        CompensationParams::default()
    }

    #[test]
    fn ratio_rejects_zero_and_wide() {
        assert!(RatioEstimate::new(0, 5).is_err());
        assert!(RatioEstimate::new(5, 0).is_err());
        assert!(RatioEstimate::new(1 << 32, 5).is_err());
    }

    #[test]
    fn window_examples() {
        let w = candidate_window(5, &ratio(4, 6), &WindowParams::default()).unwrap();
        assert_eq!((w.k, w.l), (3, 1));
        let w = candidate_window(0, &ratio(3, 7), &WindowParams::default()).unwrap();
        assert_eq!((w.k, w.l), (0, 0));
    }

    #[test]
    fn binary32_window_at_one_thousand_seconds() {
        let p = WindowParams {
            epsilon: 1e-7,
            fp_mode: FpFormat::Binary32,
        };
        let w = candidate_window(1_000_000_000, &ratio(1_000_000, 1_000_050), &p).unwrap();
        // Margin is 1 + max(1e-7, γ₃)·10⁹ ≈ 180, so about 360 candidates.
        let expected = 2.0 * p.margin(1_000_000_000);
        assert!((w.l as f64 - expected).abs() <= 2.0, "l={} expected≈{expected}", w.l);
        let exact = oracles::exact_quotient(1_000_000_000, 1_000_000, 1_000_050, oracles::RoundingMode::NearestHalfUp)
            .unwrap() as u64;
        assert!(w.k <= exact && exact <= w.k + w.l);
        // At binary64 the margin is the plain 1 + ε·i.
        let w64 = candidate_window(1_000_000_000, &ratio(1_000_000, 1_000_050), &WindowParams::default()).unwrap();
        assert!((w64.l as i64 - 202).abs() <= 1, "l={}", w64.l);
    }

    #[test]
    fn window_rejects_negative_epsilon() {
        let p = WindowParams {
            epsilon: -1.0,
            fp_mode: FpFormat::Binary64,
        };
        assert!(matches!(candidate_window(5, &ratio(4, 6), &p), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn case1_examples() {
        let out = compensate_case1(5, &ratio(4, 6), &params()).unwrap();
        assert_eq!(out.j, 3);
        assert_eq!(out.start_point(5), (4, 3));
        assert_eq!(out.walk_steps, 1);
        assert_eq!(compensate_case1(6, &ratio(4, 6), &params()).unwrap().j, 4);
        assert_eq!(compensate_case1(0, &ratio(4, 6), &params()).unwrap().j, 0);
        assert!(compensate_case1(5, &ratio(6, 4), &params()).is_err());
    }

    #[test]
    fn compensate_examples() {
        let out = compensate(5, &ratio(6, 4), &params()).unwrap();
        assert_eq!((out.j, out.case_used), (8, RatioCase::GtOne));
        let out = compensate(7, &ratio(5, 5), &params()).unwrap();
        assert_eq!((out.j, out.case_used, out.walk_steps), (7, RatioCase::EqOne, 0));
        assert_eq!(compensate(0, &ratio(3, 7), &params()).unwrap().j, 0);
        // Ratios of two or more keep the integer part out of the walk.
        assert_eq!(compensate(7, &ratio(10, 4), &params()).unwrap().j, 18);
        assert_eq!(compensate(7, &ratio(12, 4), &params()).unwrap().j, 21);
    }

    #[test]
    fn outcome_invariants_hold() {
        for i in 0..200 {
            for (d, a) in [(4, 6), (1, 7), (999_900, 1_000_000), (13, 17)] {
                let out = compensate(i, &ratio(d, a), &params()).unwrap();
                assert!(out.candidate_count >= 1);
                assert_eq!(out.walk_steps, out.candidate_count - 1);
                assert!(out.candidate_lo <= out.j && out.j < out.candidate_lo + out.candidate_count);
            }
        }
    }

    #[test]
    fn logical_clock_examples() {
        let state = ClockState::new(100, 50, ratio(4, 6));
        assert_eq!(logical_clock_update(&state, 55, &params()).unwrap(), 103);
        assert_eq!(logical_clock_update(&state, 50, &params()).unwrap(), 100);
        assert_eq!(
            logical_clock_update(&state, 49, &params()),
            Err(Error::ClockRollback { t: 49, anchor: 50 })
        );
    }

    #[test]
    fn unit_ratio_never_drifts() {
        let mut state = ClockState::new(1_000, 0, ratio(7, 7));
        let mut t = 0;
        for round in 0..1000u64 {
            t += 1 + round % 37;
            let logical = state.resync(t, ratio(7, 7), &params()).unwrap();
            assert_eq!(logical - t, 1_000);
        }
    }

    #[test]
    fn resync_moves_anchors_forward() {
        let mut state = ClockState::new(0, 0, ratio(4, 6));
        let logical = state.resync(6, ratio(6, 4), &params()).unwrap();
        assert_eq!(logical, 4);
        assert_eq!((state.logical_anchor, state.hardware_anchor), (4, 6));
        assert_eq!(state.logical_clock(11, &params()).unwrap(), 4 + 8);
        assert!(state.resync(5, ratio(1, 1), &params()).is_err());
    }
}
