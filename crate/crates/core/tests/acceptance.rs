//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! `cargo test -p skewcomp --test acceptance`

use std::process::ExitCode;
use std::time::{Duration, Instant};

use skewcomp::experiment::{
    self, Algorithm, ErrorStats, ExperimentConfig, OutputFormat, ResultTable,
};
use skewcomp::verify::{self, VerifyOptions};
use skewcomp::RoundingMode;

type Check = fn() -> Outcome;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(runtime: Duration, limit_secs: u64) -> bool {
    runtime < Duration::from_secs(limit_secs)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let report = verify::oracle_equivalence(&VerifyOptions::default());
    let took = start.elapsed();
    outcome(
        report.passed() && within(took, 60),
        format!("{report}, {:.1}s (limit 60s)", took.as_secs_f64()),
    )
}

fn decision_bound() -> Outcome {
    let opts = VerifyOptions::default();
    let report = verify::decision_bound(&opts);
    let exhaustive = (opts.max_a - 1) * opts.max_a / 2;
    outcome(
        report.passed() && report.cases >= exhaustive + 100_000,
        format!("{report}; {exhaustive} exhaustive slopes with A <= {}", opts.max_a),
    )
}

fn error_bound() -> Outcome {
    let opts = VerifyOptions {
        random_trials: 1_000_000,
        ..VerifyOptions::default()
    };
    let start = Instant::now();
    let report = verify::error_bound(&opts);
    let took = start.elapsed();
    outcome(
        report.passed() && report.cases == 1_000_000 && within(took, 60),
        format!("{report}, {:.1}s (limit 60s)", took.as_secs_f64()),
    )
}

fn stats_line(table: &ResultTable, algorithm: Algorithm) -> String {
    table
        .rows
        .iter()
        .filter(|r| r.algorithm == algorithm)
        .map(|r| {
            format!(
                "{:e}:({},{},{})",
                r.clock as f64,
                r.stats.max,
                r.stats.min,
                experiment::format_significant(r.stats.avg)
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn proposed_rows() -> Outcome {
    let mut notes = Vec::new();
    let mut passed = true;
    let mut slowest = Duration::ZERO;
    let mut timed = |config: &ExperimentConfig| {
        let start = Instant::now();
        let table = experiment::run_table(config);
        slowest = slowest.max(start.elapsed());
        table
    };

    let replica = ExperimentConfig::closed_form_overshoot();
    match timed(&replica) {
        Ok(table) => {
            let constant = table
                .rows
                .iter()
                .filter(|r| r.algorithm == Algorithm::Proposed)
                .all(|r| r.stats.max == -1 && r.stats.min == -1 && r.stats.avg == -1.0);
            passed &= constant;
            notes.push(format!("replica {}", stats_line(&table, Algorithm::Proposed)));
        }
        Err(e) => {
            passed = false;
            notes.push(format!("replica: {e}"));
        }
    }

    for rounding in RoundingMode::ALL {
        let config = ExperimentConfig {
            rounding,
            ..ExperimentConfig::default()
        };
        match timed(&config) {
            Ok(table) => {
                let bounded = table
                    .rows
                    .iter()
                    .filter(|r| r.algorithm == Algorithm::Proposed)
                    .all(|r| r.stats.max <= 1 && r.stats.min >= -1 && r.stats.count == 1_000_000);
                passed &= bounded;
                notes.push(format!("{} {}", rounding.name(), stats_line(&table, Algorithm::Proposed)));
            }
            Err(e) => {
                passed = false;
                notes.push(format!("{}: {e}", rounding.name()));
            }
        }
    }
    passed &= within(slowest, 120);
    notes.push(format!("slowest 1e6-sample run {:.1}s (limit 120s)", slowest.as_secs_f64()));
    outcome(passed, notes.join("; "))
}

fn near(actual: f64, expected: f64) -> bool {
    (actual.abs() - expected.abs()).abs() <= 0.5 * expected.abs()
}

fn baseline_rows() -> Outcome {
    let config = ExperimentConfig::default();
    let table = match experiment::run_table(&config) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let get = |clock: u64| -> ErrorStats {
        table
            .row(Algorithm::FloatBaseline, clock)
            .map(|r| r.stats)
            .expect("clock is part of the default configuration")
    };
    let zero = |s: ErrorStats| s.max == 0 && s.min == 0 && s.avg == 0.0;
    let matches = |s: ErrorStats, (max, min, avg): (f64, f64, f64)| {
        near(s.max as f64, max) && near(s.min as f64, min) && near(s.avg, avg)
    };
    let small = zero(get(1_000_000)) && zero(get(10_000_000));
    let e8 = matches(get(100_000_000), (1.0, -4.0, -2.0004));
    let e9 = matches(get(1_000_000_000), (44.0, -19.0, 12.382));
    let spread = |s: ErrorStats| s.max - s.min;
    let blow_up = spread(get(10_000_000)) == 0 && spread(get(100_000_000)) > 0;
    outcome(
        small && e8 && e9 && blow_up,
        format!(
            "{}; 1e6/1e7 zero={small} 1e8 within 50%={e8} 1e9 within 50%={e9} blow-up={blow_up}",
            stats_line(&table, Algorithm::FloatBaseline)
        ),
    )
}

fn periodicity() -> Outcome {
    let report = verify::periodicity(&VerifyOptions::default());
    outcome(report.passed(), report.to_string())
}

fn drift() -> Outcome {
    let (rounds, interval) = (1_000u64, 1_000_000u64);
    match experiment::run_drift(&ExperimentConfig::default(), rounds, interval) {
        Ok(rows) => {
            let (proposed, single) = experiment::max_abs_drift(&rows);
            outcome(
                rows.len() as u64 == rounds
                    && proposed <= rounds
                    && single >= 10 * proposed.max(1),
                format!(
                    "max |drift| proposed={proposed} binary32={single} over {rounds} rounds of {interval} ticks"
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn csv_with_threads(threads: usize) -> Result<String, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    let config = ExperimentConfig::default();
    pool.install(|| experiment::run_table(&config))
        .map(|t| experiment::emit(&t, OutputFormat::Csv))
        .map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let runs: Result<Vec<String>, String> = [1, 1, 4].into_iter().map(csv_with_threads).collect();
    match runs {
        Ok(runs) => outcome(
            runs.windows(2).all(|w| w[0] == w[1]),
            format!("{} bytes, identical across 2 runs on 1 thread and 1 run on 4", runs[0].len()),
        ),
        Err(e) => outcome(false, e),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 decision-variable bound", decision_bound),
        ("3 error bound on random cases", error_bound),
        ("4 proposed table rows", proposed_rows),
        ("5 binary32 table rows", baseline_rows),
        ("6 periodicity", periodicity),
        ("7 drift accumulation", drift),
        ("8 deterministic bench output", determinism),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let status = if result.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} [{name}] {} ({:.1}s)",
            result.detail,
            start.elapsed().as_secs_f64()
        );
        failures += usize::from(!result.passed);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
