//! Exhaustive and randomized property suites behind `skewcomp verify`.
//!
//! Every suite compares the compensator (or the recursion) against an
//! independent oracle: the plain walk from the origin or exact 128-bit
//! arithmetic. Exhaustive suites iterate `A`, then `D`, then `i` in ascending
//! order, so the first failure reported is the smallest one in that order.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bresenham::{self, Convention, LatticePoint, Slope, TieRule};
use crate::compensator::{self, CompensationParams, RatioEstimate, WindowParams};
use crate::oracles::{self, RoundingMode};
use crate::scalar::FpFormat;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Largest `A` in the exhaustive sweeps.
    pub max_a: u64,
    /// Number of cases in each randomized suite.
    pub random_trials: u64,
    pub seed: u64,
    /// Tie rule of the compensator under test; the oracles always use the
    /// standard rule, so `Horizontal` acts as a planted mutant.
    pub tie: TieRule,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            max_a: 64,
            random_trials: 100_000,
            seed: 1,
            tie: TieRule::Diagonal,
        }
    }
}

impl VerifyOptions {
    fn params(&self) -> CompensationParams {
        CompensationParams {
            tie: self.tie,
            ..CompensationParams::default()
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub i: u64,
    pub d: u64,
    pub a: u64,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(i={}, D={}, A={}): {}", self.i, self.d, self.a, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: u64,
    pub failure: Option<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "PASS {} ({} cases)", self.name, self.cases),
            Some(c) => write!(f, "FAIL {} after {} cases: {}", self.name, self.cases, c),
        }
    }
}

fn fail(i: u64, d: u64, a: u64, detail: impl Into<String>) -> Option<Counterexample> {
    Some(Counterexample {
        i,
        d,
        a,
        detail: detail.into(),
    })
}

fn slope(a: u64, d: u64) -> Slope<i64> {
    Slope::new(a as i64, d as i64).expect("0 < D < A by construction")
}

/// Walks `steps` columns from the origin and checks `-2A < td < 2A` at every one.
pub fn decision_bound_walk(a: u64, d: u64, steps: u64) -> Option<Counterexample> {
    let s = slope(a, d);
    let bound = 2 * a as i64;
    let mut td = bresenham::initial_td(&s);
    for x in 0..=steps {
        if td.value <= -bound || td.value >= bound {
            return fail(x, d, a, format!("decision variable {} at x={x}", td.value));
        }
        td = bresenham::step(td, &s).1;
    }
    None
}

/// Decision-variable bound along the canonical walk, exhaustive for small `A`
/// and on `random_trials` slopes with `A` log-uniform up to 10⁶.
pub fn decision_bound(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        name: "decision-bound",
        cases: 0,
        failure: None,
    };
    for a in 2..=opts.max_a {
        for d in 1..a {
            report.cases += 1;
            if let Some(c) = decision_bound_walk(a, d, 3 * a) {
                report.failure = Some(c);
                return report;
            }
        }
    }
    let mut rng = opts.rng(1);
    let (lo, hi) = (2f64.ln(), 1e6f64.ln());
    for _ in 0..opts.random_trials {
        let a = (rng.gen_range(lo..=hi).exp().round() as u64).clamp(2, 1_000_000);
        let d = rng.gen_range(1..a);
        report.cases += 1;
        if let Some(c) = decision_bound_walk(a, d, 3 * a) {
            report.failure = Some(c);
            return report;
        }
    }
    report
}

/// `y[x + A] = y[x] + D` on the canonical walk.
pub fn periodicity(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        name: "periodicity",
        cases: 0,
        failure: None,
    };
    for a in 2..=opts.max_a {
        for d in 1..a {
            let ys = bresenham::reference_walk(&slope(a, d), 3 * a as usize);
            for x in 0..=2 * a as usize {
                report.cases += 1;
                if ys[x + a as usize] != ys[x] + d as i64 {
                    report.failure = fail(x as u64, d, a, "y[x+A] != y[x] + D");
                    return report;
                }
            }
        }
    }
    report
}

/// Compensator output equals the canonical walk for every `0 <= i <= 4A`.
pub fn oracle_equivalence(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        name: "oracle-equivalence",
        cases: 0,
        failure: None,
    };
    let params = opts.params();
    for a in 2..=opts.max_a {
        for d in 1..a {
            let ys = bresenham::reference_walk(&slope(a, d), 4 * a as usize);
            let ratio = RatioEstimate::new(d, a).expect("positive");
            for i in 0..=4 * a {
                report.cases += 1;
                let expected = ys[i as usize] as u64;
                match compensator::compensate_case1(i, &ratio, &params) {
                    Ok(out) if out.j == expected => {}
                    Ok(out) => {
                        report.failure = fail(i, d, a, format!("got {}, walk gives {expected}", out.j));
                        return report;
                    }
                    Err(e) => {
                        report.failure = fail(i, d, a, e.to_string());
                        return report;
                    }
                }
            }
        }
    }
    report
}

/// From every point that can reach a canonical point `(i, j)`, a walk driven by
/// the extended decision variable arrives exactly at `(i, j)`.
pub fn backward_reachability(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        name: "backward-reachability",
        cases: 0,
        failure: None,
    };
    for a in 2..=opts.max_a {
        for d in 1..a {
            let s = slope(a, d);
            let ys = bresenham::reference_walk(&s, a as usize);
            for (i, &j) in ys.iter().enumerate() {
                let target = LatticePoint { x: i as i64, y: j };
                for start in bresenham::backward_reachable(&target) {
                    report.cases += 1;
                    let mut walk =
                        bresenham::walk_from(start, &s, Convention::TdConsistent, opts.tie)
                            .expect("small coordinates");
                    for _ in start.x..target.x {
                        walk.advance();
                    }
                    if walk.point() != target {
                        report.failure = fail(
                            i as u64,
                            d,
                            a,
                            format!("walk from {start} ended at {}, expected {target}", walk.point()),
                        );
                        return report;
                    }
                }
            }
        }
    }
    report
}

/// Draws `(i, D, A)` at the magnitudes of the error table: clocks up to
/// 10⁶..10⁹ ticks, ratios within ±200 ppm of one, plus arbitrary ratios.
pub fn random_case(rng: &mut ChaCha8Rng) -> (u64, u64, u64) {
    let exponent = rng.gen_range(6..=9);
    let i = rng.gen_range(0..=10u64.pow(exponent));
    let d = rng.gen_range(1..=10_000_000u64);
    let a = if rng.gen_bool(0.9) {
        let skew = rng.gen_range(-200e-6..=200e-6);
        ((d as f64 * (1.0 + skew)).round() as u64).max(1)
    } else {
        rng.gen_range(1..=10_000_000u64)
    };
    (i, d, a)
}

/// `|j - ⌊iD/A⌋| <= 1` and `2|iD - jA| <= A`, in exact integers.
pub fn error_bound(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        name: "error-bound",
        cases: 0,
        failure: None,
    };
    let params = opts.params();
    let mut rng = opts.rng(2);
    for _ in 0..opts.random_trials {
        let (i, d, a) = random_case(&mut rng);
        report.cases += 1;
        let ratio = RatioEstimate::new(d, a).expect("positive");
        let j = match compensator::compensate(i, &ratio, &params) {
            Ok(out) => out.j,
            Err(e) => {
                report.failure = fail(i, d, a, e.to_string());
                return report;
            }
        };
        let floor = oracles::exact_quotient(i, d, a, RoundingMode::Floor).expect("A > 0");
        let residual = (i as i128 * d as i128 - j as i128 * a as i128).abs();
        if (j as i128 - floor as i128).abs() > 1 || 2 * residual > a as i128 {
            report.failure = fail(i, d, a, format!("j={j}, floor={floor}"));
            return report;
        }
    }
    report
}

/// For `D > A`, `compensate(i) - i·⌊D/A⌋` equals the `D < A` result of the residual ratio.
pub fn case2_consistency(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        name: "case2-consistency",
        cases: 0,
        failure: None,
    };
    let params = opts.params();
    let mut rng = opts.rng(3);
    for _ in 0..opts.random_trials {
        let a = rng.gen_range(2..=10_000_000u64);
        let whole = if rng.gen_bool(0.9) { 1 } else { rng.gen_range(2..=400) };
        let residual = rng.gen_range(1..a);
        let d = whole * a + residual;
        if d > u32::MAX as u64 {
            continue;
        }
        let i = rng.gen_range(0..=1_000_000_000u64);
        report.cases += 1;
        let full = compensator::compensate(i, &RatioEstimate::new(d, a).expect("positive"), &params);
        let part = compensator::compensate_case1(i, &RatioEstimate::new(residual, a).expect("positive"), &params);
        match (full, part) {
            (Ok(f), Ok(p)) if f.j == i * whole + p.j => {}
            (f, p) => {
                report.failure = fail(i, d, a, format!("full={f:?}, residual={p:?}"));
                return report;
            }
        }
    }
    report
}

/// `⌊iD/A⌋` and `⌈iD/A⌉` always fall inside the candidate window, with the
/// bracketing quotient in either format.
pub fn window_robustness(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport {
        name: "window-robustness",
        cases: 0,
        failure: None,
    };
    let mut rng = opts.rng(4);
    for _ in 0..opts.random_trials {
        let (i, d, a) = random_case(&mut rng);
        if d >= a {
            continue;
        }
        let ratio = RatioEstimate::new(d, a).expect("positive");
        let lo = oracles::exact_quotient(i, d, a, RoundingMode::Floor).expect("A > 0") as u64;
        let hi = oracles::exact_quotient(i, d, a, RoundingMode::Ceil).expect("A > 0") as u64;
        for fp_mode in [FpFormat::Binary32, FpFormat::Binary64] {
            report.cases += 1;
            let params = WindowParams {
                epsilon: 1e-7,
                fp_mode,
            };
            match compensator::candidate_window(i, &ratio, &params) {
                Ok(w) if w.k <= lo && hi <= w.k + w.l => {}
                other => {
                    report.failure = fail(i, d, a, format!("{fp_mode}: {other:?} misses [{lo}, {hi}]"));
                    return report;
                }
            }
        }
    }
    report
}

pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    run_all_with_progress(opts, |_| {})
}

pub fn run_all_with_progress(opts: &VerifyOptions, mut progress: impl FnMut(&SuiteReport)) -> Vec<SuiteReport> {
    let suites: [fn(&VerifyOptions) -> SuiteReport; 7] = [
        decision_bound,
        periodicity,
        oracle_equivalence,
        backward_reachability,
        error_bound,
        case2_consistency,
        window_robustness,
    ];
    suites
        .iter()
        .map(|suite| {
            let report = suite(opts);
            progress(&report);
            report
        })
        .collect()
}
