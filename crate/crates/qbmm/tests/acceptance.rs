//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use qbmm::bench::{run_plan, BenchPlan};
use qbmm::fit::{calibrate, fit_rows, SLOPE_RANGE};
use qbmm::validate::{bmm_suite, gc, gc_calibrate, gc_cost_sweep, primitives, Report};
use qbmm_core::bmm::{DEFAULT_C_FIT, DEFAULT_K_LOG};
use qbmm_core::search::Mode;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(report: &Report, names: &[&str]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in names {
        match report.get(name) {
            Some(c) => {
                pass &= c.holds();
                parts.push(format!("{name} {}/{}", c.passed, c.total()));
                if let Some(f) = c.first_failure.as_ref().filter(|_| !c.holds()) {
                    parts.push(format!("first failure: {f}"));
                }
            }
            None => {
                pass = false;
                parts.push(format!("{name} never ran"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn scaling() -> Outcome {
    let mut calibration_rows = Vec::new();
    for mode in [Mode::ForcedSuccess, Mode::Faithful] {
        calibration_rows.extend(run_plan(&BenchPlan::calibration(mode)).expect("calibration plan"));
    }
    let env = calibrate(&calibration_rows).expect("calibration rows");
    let mut plan = BenchPlan::default_sweep(Mode::ForcedSuccess);
    plan.envelope = env;
    let rows = run_plan(&plan).expect("default sweep");
    let report = fit_rows(&rows).expect("fit");
    let lo = rows.iter().map(|r| r.ell_actual).min().unwrap_or(0).max(1);
    let hi = rows.iter().map(|r| r.ell_actual).max().unwrap_or(0);
    let decades = (hi as f64 / lo as f64).log10();
    let r2_ok = report.fit.r_squared >= 0.9;
    Outcome {
        pass: report.pass() && r2_ok && decades >= 3.0,
        detail: format!(
            "calibrated C_fit {:.2} k_log {:.3} (frozen {DEFAULT_C_FIT} / {DEFAULT_K_LOG}); \
             {} rows, within bound {}/{}, ell spans {decades:.1} decades, \
             slope {:.3} (need {}..{}), R^2 {:.3} (need >= 0.9)",
            env.c_fit,
            env.k_log,
            report.rows,
            report.rows_within_bound,
            report.rows,
            report.fit.slope,
            SLOPE_RANGE.0,
            SLOPE_RANGE.1,
            report.fit.r_squared,
        ),
    }
}

fn gc_envelope() -> Outcome {
    let c = gc_calibrate(&gc_cost_sweep(&[16], 5));
    let rows = gc_cost_sweep(&[16, 32, 64], 5);
    let within = rows.iter().filter(|r| r.ratio() <= c).count();
    Outcome {
        pass: within == rows.len(),
        detail: format!("C {c:.3} from n = 16; {within}/{} rows within", rows.len()),
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let prim = primitives(500);
    let gc_report = gc(500);
    let bmm_start = Instant::now();
    let bmm_report = bmm_suite(200);
    let bmm_secs = bmm_start.elapsed().as_secs_f64();
    let mut everything = Report::default();
    everything.merge(prim.clone());
    everything.merge(gc_report.clone());
    everything.merge(bmm_report.clone());

    let mut c1 = check(&bmm_report, &["bmm.forced_exact"]);
    c1.pass &= bmm_secs < 60.0;
    c1.detail.push_str(&format!(", forced + faithful suite took {bmm_secs:.1}s"));

    let outcomes = [
        ("forced-success correctness", c1),
        (
            "faithful correctness and failure budget",
            check(&bmm_report, &["bmm.faithful_correct", "bmm.failure_budget_below_third"]),
        ),
        ("all-collisions exactness", check(&gc_report, &["gc.forced_exact"])),
        (
            "search probability faithfulness",
            check(&prim, &["primitives.probability_grid_3sigma"]),
        ),
        (
            "sound declarations",
            check(&everything, &["soundness.no_return_when_empty", "soundness.forced_no_false_none"]),
        ),
        ("query scaling", scaling()),
        ("graph-collision cost envelope", gc_envelope()),
        ("threshold reduction", check(&bmm_report, &["threshold.decides"])),
        (
            "structural assertions",
            check(
                &everything,
                &["gc.case2_survivors", "bmm.case2_survivors", "bmm.lambda_sum", "bmm.monotone_below_product"],
            ),
        ),
    ];

    let mut failed = 0;
    for (idx, (name, outcome)) in outcomes.iter().enumerate() {
        println!(
            "criterion {} {}: {name}: {}",
            idx + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        failed += usize::from(!outcome.pass);
    }
    println!(
        "{} of {} criteria pass ({:.1}s)",
        outcomes.len() - failed,
        outcomes.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
