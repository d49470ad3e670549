//! Invariant suites over primitives, graph collision and the multiplication driver.

use std::fmt;
use std::str::FromStr;

use qbmm_core::bmm::{bmm_observed, cost_bound, solve_threshold_via_bmm, DEFAULT_C_FIT, DEFAULT_K_LOG};
use qbmm_core::graph_collision::{
    all_gc, all_gc_envelope, brute_force_gc, collision_exists, has_gc, GcCase, GcInstance,
    DEFAULT_GC_C,
};
use qbmm_core::instances::{gc_sample, generate, Family, GcSample};
use qbmm_core::search::{
    bbht_search, find_max, grover_iterations, grover_search, grover_success_probability,
    sample_repetition, search_all, IndicatorPredicate, Mode, Predicate, SearchConfig, SimContext,
};
use qbmm_core::{brute_force_product, BooleanMatrix, RunReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Primitives,
    Gc,
    Bmm,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "primitives" => Ok(Suite::Primitives),
            "gc" => Ok(Suite::Gc),
            "bmm" => Ok(Suite::Bmm),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite `{other}` (expected primitives, gc, bmm or all)"
            )),
        }
    }
}

/// Pass/fail tally of one invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: u64,
    pub failed: u64,
    /// Fraction of passing cases needed for the invariant to hold.
    pub required_rate: f64,
    pub first_failure: Option<String>,
}

impl Check {
    pub fn total(&self) -> u64 {
        self.passed + self.failed
    }

    pub fn holds(&self) -> bool {
        self.total() > 0 && self.passed as f64 >= self.required_rate * self.total() as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn entry(&mut self, name: &str) -> &mut Check {
        let idx = match self.checks.iter().position(|c| c.name == name) {
            Some(idx) => idx,
            None => {
                self.checks.push(Check {
                    name: name.to_string(),
                    passed: 0,
                    failed: 0,
                    required_rate: 1.0,
                    first_failure: None,
                });
                self.checks.len() - 1
            }
        };
        &mut self.checks[idx]
    }

    pub fn record(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        let check = self.entry(name);
        if ok {
            check.passed += 1;
        } else {
            check.failed += 1;
            if check.first_failure.is_none() {
                check.first_failure = Some(detail());
            }
        }
    }

    /// Lowers the pass rate `name` needs; the check is created if absent.
    pub fn require_rate(&mut self, name: &str, rate: f64) {
        self.entry(name).required_rate = rate;
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(Check::holds)
    }

    pub fn merge(&mut self, other: Report) {
        for c in other.checks {
            let rate = c.required_rate;
            let e = self.entry(&c.name);
            e.passed += c.passed;
            e.failed += c.failed;
            e.required_rate = rate;
            if e.first_failure.is_none() {
                e.first_failure = c.first_failure;
            }
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(
                f,
                "{} {:<32} {}/{} passed",
                if c.holds() { "PASS" } else { "FAIL" },
                c.name,
                c.passed,
                c.total()
            )?;
            if c.required_rate < 1.0 {
                write!(f, " (need {:.0}%)", c.required_rate * 100.0)?;
            }
            if let Some(detail) = &c.first_failure {
                write!(f, "  first failure: {detail}")?;
            }
            writeln!(f)?;
        }
        write!(f, "{}", if self.all_hold() { "ALL PASS" } else { "FAILURES" })
    }
}

/// Runs `suite` with `seeds` randomized cases per randomized check.
pub fn run(suite: Suite, seeds: u64) -> Report {
    let mut report = Report::default();
    if matches!(suite, Suite::Primitives | Suite::All) {
        report.merge(primitives(seeds));
    }
    if matches!(suite, Suite::Gc | Suite::All) {
        report.merge(gc(seeds));
    }
    if matches!(suite, Suite::Bmm | Suite::All) {
        report.merge(bmm_suite(seeds));
    }
    report
}

// ---------------------------------------------------------------------------
// Primitives

/// Trials per grid point of the probability check.
pub const GRID_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub k: usize,
    pub iterations: u64,
    pub expected: f64,
    pub observed: f64,
    /// Binomial standard deviation of the observed frequency.
    pub sigma: f64,
}

impl GridPoint {
    pub fn within(&self, sigmas: f64) -> bool {
        (self.observed - self.expected).abs() <= sigmas * self.sigma
    }
}

/// The `(N, k, T)` grid: `N` in {4, 16, 64, 256}, `k` in {0, 1, N/4, N/2, N},
/// `T` in {0, 1, 2} plus the single-target optimum and the fixed-schedule count
/// at threshold `k`.
pub fn grid() -> Vec<(usize, usize, u64)> {
    let mut out = Vec::new();
    for n in [4usize, 16, 64, 256] {
        let mut ks = vec![0, 1, n / 4, n / 2, n];
        ks.dedup();
        let optimum = (std::f64::consts::FRAC_PI_4 * (n as f64).sqrt()).floor() as u64;
        for k in ks {
            let mut ts = vec![0, 1, 2, optimum];
            if k > 0 {
                ts.push(grover_iterations(n, k as f64));
            }
            ts.sort_unstable();
            ts.dedup();
            out.extend(ts.into_iter().map(|t| (n, k, t)));
        }
    }
    out
}

/// Empirical single-repetition success frequencies over [`grid`].
pub fn probability_grid(trials: u64, seed: u64) -> Vec<GridPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grid()
        .into_iter()
        .map(|(n, k, iterations)| {
            let expected = grover_success_probability(n, k, iterations);
            let hits = (0..trials)
                .filter(|_| sample_repetition(&mut rng, n, k, iterations))
                .count();
            GridPoint {
                n,
                k,
                iterations,
                expected,
                observed: hits as f64 / trials as f64,
                sigma: (expected * (1.0 - expected) / trials as f64).sqrt(),
            }
        })
        .collect()
}

/// Random marked set for the primitive checks: size 0, 1, a few or many.
fn marked_set(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let size = match rng.gen_range(0..4) {
        0 => 0,
        1 => 1.min(n),
        2 => rng.gen_range(0..=n.min(4)),
        _ => rng.gen_range(0..=n),
    };
    let mut pool: Vec<usize> = (1..=n).collect();
    for i in 0..size {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(size);
    pool.sort_unstable();
    pool
}

type Found = (Option<usize>, Option<usize>, Vec<usize>, Option<usize>);

fn exercise(p: &IndicatorPredicate, t: f64, ctx: &mut SimContext, report: &mut Report) -> Found {
    let marked: Vec<usize> = p.domain().iter().copied().filter(|&x| p.ideal_eval(x)).collect();
    let forced = ctx.mode() == Mode::ForcedSuccess;
    let mut charge_ok = |name: &str, reported: u64, before: u64, ctx: &SimContext| {
        let delta = ctx.ledger.total() - before;
        report.record(name, reported == delta, || {
            format!("reported {reported}, ledger moved {delta}")
        });
    };

    let before = ctx.ledger.total();
    let g = grover_search(t, p, ctx);
    charge_ok("primitives.charge_accounting", g.charged_queries, before, ctx);
    let before = ctx.ledger.total();
    let b = bbht_search(1.0, p, ctx);
    charge_ok("primitives.charge_accounting", b.charged_queries, before, ctx);
    let before = ctx.ledger.total();
    let all = search_all(p, ctx);
    charge_ok("primitives.charge_accounting", all.charged_queries, before, ctx);
    let before = ctx.ledger.total();
    let fm = find_max(p, |x| ((x * 37) % 101) as f64, ctx);
    charge_ok("primitives.charge_accounting", fm.charged_queries, before, ctx);

    for x in [g.result, b.result, fm.result].into_iter().flatten().chain(all.result.iter().copied()) {
        report.record("primitives.membership", p.ideal_eval(x), || format!("returned unmarked {x}"));
    }
    if marked.is_empty() {
        let silent = g.result.is_none() && b.result.is_none() && all.result.is_empty() && fm.result.is_none();
        report.record("primitives.none_when_empty", silent, || "element returned with t_f = 0".into());
    }
    if forced {
        let mut got = all.result.clone();
        got.sort_unstable();
        report.record("primitives.forced_search_all_exact", got == marked, || {
            format!("search_all gave {got:?}, marked {marked:?}")
        });
        if !marked.is_empty() {
            let best = marked.iter().copied().max_by(|&x, &y| {
                (((x * 37) % 101), std::cmp::Reverse(x)).cmp(&(((y * 37) % 101), std::cmp::Reverse(y)))
            });
            report.record("primitives.forced_find_max_exact", fm.result == best, || {
                format!("find_max gave {:?}, expected {best:?}", fm.result)
            });
        }
    }
    (g.result, b.result, all.result, fm.result)
}

/// Probability grid, declaration soundness, membership, charge accounting and
/// forced-mode determinism.
pub fn primitives(seeds: u64) -> Report {
    let mut report = Report::default();
    for point in probability_grid(GRID_TRIALS, 0x9e37) {
        report.record("primitives.probability_grid_3sigma", point.within(3.0), || {
            format!(
                "N={} k={} T={}: observed {:.4}, expected {:.4}, sigma {:.4}",
                point.n, point.k, point.iterations, point.observed, point.expected, point.sigma
            )
        });
    }

    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=64);
        let marked = marked_set(&mut rng, n);
        let p = IndicatorPredicate::new(n, &marked);
        // Threshold consistent with the fixed-schedule promise when possible.
        let t = marked.len().max(1) as f64;
        for mode in [Mode::ForcedSuccess, Mode::Faithful] {
            let cfg = SearchConfig {
                mode,
                rng_seed: seed,
                ..SearchConfig::default()
            };
            let mut ctx = SimContext::new(cfg);
            let first = exercise(&p, t, &mut ctx, &mut report);
            let s = ctx.soundness();
            report.record("soundness.no_return_when_empty", s.returned_when_empty == 0, || {
                format!("seed {seed}: {s:?}")
            });
            report.record("soundness.forced_no_false_none", s.forced_false_none == 0, || {
                format!("seed {seed}: {s:?}")
            });
            if mode == Mode::ForcedSuccess {
                let mut again = SimContext::new(cfg);
                let mut scratch = Report::default();
                let second = exercise(&p, t, &mut again, &mut scratch);
                report.record(
                    "primitives.forced_determinism",
                    first == second && ctx.ledger.total() == again.ledger.total(),
                    || format!("seed {seed}: runs differ"),
                );
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Graph collision

/// Randomized graph-collision case for `seed`: `n <= 64`, `m <= 200`. Half the
/// cases pack the ones of `C~` into at most four rows, and half of those mark
/// only packed rows on the A side, which drives the many-non-neighbors branch.
pub fn random_gc_case(seed: u64) -> GcSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6763_0000);
    let n = rng.gen_range(1..=64usize);
    let packed = rng.gen_bool(0.5);
    let rows = if packed {
        rng.gen_range(1..=n.min(4))
    } else {
        rng.gen_range(1..=n)
    };
    let m = rng.gen_range(0..=(rows * n).min(200));
    let pa = rng.gen::<f64>();
    let pb = rng.gen::<f64>();
    let mut sample = gc_sample(n, m, rows, pa, pb, seed);
    if packed && rng.gen_bool(0.5) {
        for i in 1..=n {
            if sample.c_tilde.row_ones(i) == 0 {
                sample.a.set(i, 1, false);
            }
        }
    }
    sample
}

/// Smallest `n` the frozen all-collisions envelope constant is asserted for.
pub const GC_ENVELOPE_MIN_N: usize = 16;

fn ceil_sqrt(m: usize) -> usize {
    (m as f64).sqrt().ceil() as usize
}

fn check_gc_case(sample: &GcSample, seed: u64, c_gc: f64, report: &mut Report) {
    let inst = GcInstance::new(&sample.c_tilde, &sample.a, &sample.b, 1);
    let truth = brute_force_gc(&inst);
    let m = inst.graph.m();
    let n = inst.n();

    let mut ctx = SimContext::new(SearchConfig::forced(seed));
    let out = all_gc(&inst, &mut ctx);
    report.record("gc.forced_exact", out.pairs == truth, || {
        format!("seed {seed}: got {} pairs, expected {}", out.pairs.len(), truth.len())
    });
    if let Some(GcCase::ManyNonNeighbors { survivors }) = out.case {
        report.record("gc.case2_survivors", survivors <= ceil_sqrt(m), || {
            format!("seed {seed}: {survivors} survivors, m = {m}")
        });
    }
    let check = has_gc(&inst, &mut ctx);
    report.record("gc.has_gc_forced_agrees", check.found == !truth.is_empty(), || {
        format!("seed {seed}: has_gc {} vs {} collisions", check.found, truth.len())
    });
    report.record("gc.has_gc_bit_matches_witness", check.found == check.witness.is_some(), || {
        format!("seed {seed}: found {} witness {:?}", check.found, check.witness)
    });
    let s = ctx.soundness();
    report.record("soundness.no_return_when_empty", s.returned_when_empty == 0, || format!("seed {seed}: {s:?}"));
    report.record("soundness.forced_no_false_none", s.forced_false_none == 0, || format!("seed {seed}: {s:?}"));

    let mut ctx = SimContext::new(SearchConfig::faithful(seed));
    let out = all_gc(&inst, &mut ctx);
    let check = has_gc(&inst, &mut ctx);
    let pairs_valid = out.pairs.iter().all(|&(i, j)| inst.f_a(i) && inst.f_b(j) && !sample.c_tilde.get(i, j));
    report.record("gc.pairs_are_collisions", pairs_valid, || format!("seed {seed}: invalid pair"));
    if let Some((i, j)) = check.witness {
        let ok = inst.f_a(i) && inst.f_b(j) && !sample.c_tilde.get(i, j);
        report.record("gc.has_gc_witness_valid", ok, || format!("seed {seed}: ({i}, {j})"));
    }
    if let Some(GcCase::ManyNonNeighbors { survivors }) = out.case {
        report.record("gc.case2_survivors", survivors <= ceil_sqrt(m), || {
            format!("seed {seed}: {survivors} survivors, m = {m}")
        });
    }
    if n >= GC_ENVELOPE_MIN_N {
        let bound = c_gc * all_gc_envelope(n, truth.len(), m);
        report.record("gc.cost_envelope", out.charged_queries as f64 <= bound, || {
            format!("seed {seed}: {} queries > {bound:.0}", out.charged_queries)
        });
    }
    let s = ctx.soundness();
    report.record("soundness.no_return_when_empty", s.returned_when_empty == 0, || format!("seed {seed}: {s:?}"));
}

pub fn gc(seeds: u64) -> Report {
    let mut report = Report::default();
    for seed in 0..seeds {
        check_gc_case(&random_gc_case(seed), seed, DEFAULT_GC_C, &mut report);
    }
    report
}

/// One all-collisions run of the cost sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcCostRow {
    pub n: usize,
    pub m: usize,
    pub lambda: usize,
    pub queries: u64,
}

impl GcCostRow {
    pub fn ratio(&self) -> f64 {
        self.queries as f64 / all_gc_envelope(self.n, self.lambda, self.m)
    }
}

/// Faithful-mode all-collisions cost over `n` in `ns`, `m` in
/// {0, n/2, 2n, 200} capped at `n^2`, three oracle densities and the ones of
/// `C~` either spread or packed into few rows.
pub fn gc_cost_sweep(ns: &[usize], seeds: u64) -> Vec<GcCostRow> {
    let mut rows = Vec::new();
    for &n in ns {
        for m in [0, n / 2, 2 * n, 200] {
            let m = m.min(n * n);
            for density in [0.1, 0.5, 0.9] {
                for packed in [false, true] {
                    let used_rows = if packed { m.div_ceil(n).max(1) } else { n };
                    for seed in 0..seeds {
                        let s = gc_sample(n, m, used_rows, density, density, seed);
                        let inst = GcInstance::new(&s.c_tilde, &s.a, &s.b, 1);
                        let lambda = brute_force_gc(&inst).len();
                        let mut ctx = SimContext::new(SearchConfig::faithful(seed));
                        let queries = all_gc(&inst, &mut ctx).charged_queries;
                        rows.push(GcCostRow { n, m, lambda, queries });
                    }
                }
            }
        }
    }
    rows
}

/// Smallest constant covering every row.
pub fn gc_calibrate(rows: &[GcCostRow]) -> f64 {
    rows.iter().map(GcCostRow::ratio).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Multiplication driver

const BMM_NS: [usize; 4] = [8, 16, 32, 64];

/// Case `idx` of the per-family suite: `n` cycles through {8, 16, 32, 64}, the
/// output-density target through {1, n, n^1.5, n^2/4, n^2}.
pub fn bmm_case(idx: u64) -> (usize, usize) {
    let n = BMM_NS[(idx % 4) as usize];
    let nf = n as f64;
    let targets = [1.0, nf, nf.powf(1.5), nf * nf / 4.0, nf * nf];
    (n, targets[((idx / 4) % 5) as usize].round() as usize)
}

/// Outcome of one checked multiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct BmmCheck {
    pub correct: bool,
    pub report: RunReport,
    pub ell_actual: usize,
}

/// Runs the driver with structural checks recorded into `out`.
pub fn checked_bmm(a: &BooleanMatrix, b: &BooleanMatrix, cfg: SearchConfig, out: &mut Report) -> BmmCheck {
    let n = a.dim();
    let truth = brute_force_product(a, b).expect("same dimension");
    let deep = n <= 32;
    let forced = cfg.mode == Mode::ForcedSuccess;
    let mut witnesses = Vec::new();
    let mut monotone = true;
    let mut exhausted = true;
    let (c, report) = bmm_observed(a, b, cfg, |record, c_tilde| {
        if !deep {
            return;
        }
        monotone &= c_tilde.is_dominated_by(&truth);
        if forced {
            if let Some(k) = record.witness {
                witnesses.push(k);
            }
            exhausted &= witnesses.iter().all(|&k| !collision_exists(c_tilde, a, b, k));
        }
    })
    .expect("same dimension");
    let ell_actual = c.count_ones();
    let correct = c == truth;
    let tag = format!("n={n} seed={}", cfg.rng_seed);

    out.record("bmm.lambda_sum", report.collisions_total() == ell_actual, || {
        format!("{tag}: sum {} vs {}", report.collisions_total(), ell_actual)
    });
    out.record("bmm.round_limit", report.rounds.len() <= RunReport::round_limit(n), || {
        format!("{tag}: {} rounds", report.rounds.len())
    });
    let bound = cost_bound(n, ell_actual, DEFAULT_C_FIT, DEFAULT_K_LOG);
    out.record("bmm.query_bound", report.queries_total() as f64 <= bound, || {
        format!("{tag}: {} > {bound:.0}", report.queries_total())
    });
    for r in &report.rounds {
        if let Some(GcCase::ManyNonNeighbors { survivors }) = r.case {
            out.record("bmm.case2_survivors", survivors <= ceil_sqrt(r.m), || {
                format!("{tag}: {survivors} survivors, m = {}", r.m)
            });
        }
    }
    if deep {
        out.record("bmm.monotone_below_product", monotone, || format!("{tag}: C~ exceeded AB"));
        if forced {
            out.record("bmm.witness_exhaustion", exhausted, || format!("{tag}: witness reusable"));
        }
    }
    let s = report.soundness;
    out.record("soundness.no_return_when_empty", s.returned_when_empty == 0, || format!("{tag}: {s:?}"));
    out.record("soundness.forced_no_false_none", s.forced_false_none == 0, || format!("{tag}: {s:?}"));
    BmmCheck {
        correct,
        report,
        ell_actual,
    }
}

/// Near-threshold decision case `idx`: `n` in 2..=32, `ell` in 1..=n^2 and an
/// input whose number of ones is `ell - 1`, `ell` or `ell + 1` (clipped).
pub fn threshold_case(idx: u64) -> (Vec<bool>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(idx ^ 0x7468_7265);
    let n = rng.gen_range(2..=32usize);
    let ell = rng.gen_range(1..=n * n);
    let ones = (ell as i64 + rng.gen_range(-1..=1)).clamp(0, (n * n) as i64) as usize;
    let inst = generate(Family::Threshold, n, ones, idx).expect("threshold family never misses");
    (inst.b.to_row_major(), ell)
}

/// Forced and faithful runs over `per_family` cases of every family, plus
/// `per_family / 2` near-threshold decisions.
pub fn bmm_suite(per_family: u64) -> Report {
    let mut report = Report::default();
    report.require_rate("bmm.faithful_correct", 0.95);
    for family in Family::ALL {
        for idx in 0..per_family {
            let (n, target) = bmm_case(idx);
            let inst = generate(family, n, target, idx).unwrap_or_else(|miss| miss.closest);
            let forced = checked_bmm(&inst.a, &inst.b, SearchConfig::forced(idx), &mut report);
            report.record("bmm.forced_exact", forced.correct, || format!("{family} n={n} seed={idx}"));
            let faithful = checked_bmm(&inst.a, &inst.b, SearchConfig::faithful(idx), &mut report);
            report.record("bmm.faithful_correct", faithful.correct, || format!("{family} n={n} seed={idx}"));
            let budget = faithful.report.accumulated_failure_bound;
            report.record("bmm.failure_budget_below_third", budget < 1.0 / 3.0, || {
                format!("{family} n={n} seed={idx}: {budget:.4}")
            });
        }
    }
    for idx in 0..per_family.div_ceil(2) {
        let (f, ell) = threshold_case(idx);
        let expected = f.iter().filter(|&&x| x).count() >= ell;
        let got = solve_threshold_via_bmm(&f, ell, SearchConfig::forced(idx));
        report.record("threshold.decides", got == Ok(expected), || {
            format!("case {idx}: ell {ell}, got {got:?}, expected {expected}")
        });
    }
    report
}
