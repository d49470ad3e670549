//! Simulated quantum search primitives with explicit query charging.
//!
//! Outcomes are sampled from the exact two-dimensional rotation picture of
//! amplitude amplification: after `T` iterations started from the uniform
//! superposition over `N` elements of which `k` are marked, a measurement
//! yields a marked element with probability `sin^2((2T + 1) asin(sqrt(k / N)))`.
//!
//! Which elements are marked is decided omnisciently through
//! [`Predicate::ideal_eval`] and costs nothing. Cost comes from
//! [`Predicate::charged_eval`]: each repetition runs one fresh charged evaluation
//! on a uniformly drawn domain element and bills `2T + 1` copies of whatever it
//! consumed.
//!
//! Each primitive adds its analytic failure probability to the
//! [`SimContext`] failure budget. Bounded-error calls made inside a fresh
//! charged evaluation only stand in for a cost; their failure bounds are kept
//! apart in [`SimContext::stand_in_failure`].

use alloc::vec::Vec;
use libm::{asin, ceil, floor, log2, pow, sin, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::QueryLedger;

/// How search primitives decide success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Outcomes sampled from the closed-form success probabilities.
    Faithful,
    /// Every primitive behaves as its zero-error idealization.
    ForcedSuccess,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Faithful => "faithful",
            Mode::ForcedSuccess => "forced",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub mode: Mode,
    /// Repetition constant; a primitive over `N` elements repeats
    /// `ceil(c_rep * log2(N + 2))` times. Must be at least 1.
    pub c_rep: f64,
    pub rng_seed: u64,
    /// Faithful find-max misses the maximizer with probability `N^-exponent`.
    pub failure_target_exponent: f64,
}

pub const DEFAULT_C_REP: f64 = 3.0;
pub const DEFAULT_FAILURE_EXPONENT: f64 = 2.0;

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: Mode::Faithful,
            c_rep: DEFAULT_C_REP,
            rng_seed: 0,
            failure_target_exponent: DEFAULT_FAILURE_EXPONENT,
        }
    }
}

impl SearchConfig {
    pub fn faithful(seed: u64) -> Self {
        SearchConfig {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn forced(seed: u64) -> Self {
        SearchConfig {
            mode: Mode::ForcedSuccess,
            rng_seed: seed,
            ..Self::default()
        }
    }

    /// Number of boosting repetitions for a domain of `n` elements.
    pub fn repetitions(&self, n: usize) -> u64 {
        (ceil(self.c_rep * log2(n as f64 + 2.0)) as u64).max(1)
    }
}

/// Per-run simulation state: configuration, randomness, ledger and failure budget.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub cfg: SearchConfig,
    pub rng: ChaCha8Rng,
    pub ledger: QueryLedger,
    failure_budget: f64,
    stand_in_failure: f64,
    soundness: Soundness,
}

/// Tallies of primitive calls against the declaration contract.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Soundness {
    pub calls: u64,
    /// An element came back although nothing was marked.
    pub returned_when_empty: u64,
    /// "No marked element" although something was marked, in forced-success mode.
    pub forced_false_none: u64,
}

impl Soundness {
    pub fn is_clean(&self) -> bool {
        self.returned_when_empty == 0 && self.forced_false_none == 0
    }

    pub fn merge(&mut self, other: Soundness) {
        self.calls += other.calls;
        self.returned_when_empty += other.returned_when_empty;
        self.forced_false_none += other.forced_false_none;
    }
}

impl SimContext {
    pub fn new(cfg: SearchConfig) -> Self {
        assert!(cfg.c_rep >= 1.0, "c_rep must be at least 1");
        assert!(cfg.failure_target_exponent > 0.0);
        SimContext {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            ledger: QueryLedger::new(),
            failure_budget: 0.0,
            stand_in_failure: 0.0,
            soundness: Soundness::default(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.cfg.mode
    }

    /// Sum of failure bounds of every outcome-determining bounded-error call.
    pub fn failure_budget(&self) -> f64 {
        self.failure_budget
    }

    /// Sum of failure bounds accrued inside cost stand-in evaluations.
    pub fn stand_in_failure(&self) -> f64 {
        self.stand_in_failure
    }

    pub fn add_failure(&mut self, p: f64) {
        self.failure_budget += p;
    }

    /// Declaration tallies over every primitive call made with this context.
    pub fn soundness(&self) -> Soundness {
        self.soundness
    }

    fn audit(&mut self, marked: usize, returned: bool) {
        self.soundness.calls += 1;
        if marked == 0 && returned {
            self.soundness.returned_when_empty += 1;
        }
        if marked > 0 && !returned && self.mode() == Mode::ForcedSuccess {
            self.soundness.forced_false_none += 1;
        }
    }
}

/// A searchable domain with a charged evaluator and an omniscient one.
pub trait Predicate {
    /// The search domain; elements are 1-based indices.
    fn domain(&self) -> &[usize];

    /// Ground truth, uncharged and deterministic.
    fn ideal_eval(&self, x: usize) -> bool;

    /// One simulated evaluation, charging the ledger in `ctx`.
    fn charged_eval(&self, x: usize, ctx: &mut SimContext) -> bool;

    /// Upper bound on queries consumed by one [`Predicate::charged_eval`].
    fn declared_cost(&self) -> u64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Repetition {
    /// Grover iterations `T` used by this repetition.
    pub iterations: u64,
    pub success: bool,
    pub charged: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveOutcome<R> {
    pub result: R,
    pub charged_queries: u64,
    pub failure_probability_bound: f64,
    pub iteration_trace: Vec<Repetition>,
}

impl<R> PrimitiveOutcome<R> {
    fn empty(result: R) -> Self {
        PrimitiveOutcome {
            result,
            charged_queries: 0,
            failure_probability_bound: 0.0,
            iteration_trace: Vec::new(),
        }
    }
}

/// `sin^2((2T + 1) asin(sqrt(k / n)))`: success probability of `T` Grover
/// iterations over `n` elements with `k` marked.
pub fn grover_success_probability(n: usize, k: usize, iterations: u64) -> f64 {
    assert!(n >= 1 && k <= n, "need 0 <= k <= n and n >= 1");
    if k == 0 {
        return 0.0;
    }
    if k == n {
        let s = sin((2 * iterations + 1) as f64 * core::f64::consts::FRAC_PI_2);
        return s * s;
    }
    let theta = asin(sqrt(k as f64 / n as f64));
    let s = sin((2 * iterations + 1) as f64 * theta);
    s * s
}

/// Marked counts `k` with `t/2 <= k <= t`, clipped to `[1, n]`.
fn promise_window(n: usize, t: f64) -> core::ops::RangeInclusive<usize> {
    let lo = (ceil(t / 2.0) as usize).max(1);
    let hi = (floor(t) as usize).min(n);
    lo..=hi
}

/// Iteration count used by fixed-schedule Grover search at threshold `t`.
///
/// Picks the `T` maximizing the worst success probability over the promise
/// window `t/2 <= k <= t`, smallest `T` on ties. Candidates run up to
/// `ceil(pi / (4 asin(sqrt(k_min / n))))`, so `T = O(sqrt(n / t))`.
pub fn grover_iterations(n: usize, t: f64) -> u64 {
    let window = promise_window(n, t);
    if window.is_empty() {
        return 0;
    }
    let k_min = *window.start();
    let theta_min = asin(sqrt(k_min as f64 / n as f64));
    let t_max = ceil(core::f64::consts::FRAC_PI_4 / theta_min) as u64;
    let mut best = (0u64, -1.0f64);
    for iters in 0..=t_max {
        let worst = window
            .clone()
            .map(|k| grover_success_probability(n, k, iters))
            .fold(f64::INFINITY, f64::min);
        if worst > best.1 + 1e-12 {
            best = (iters, worst);
        }
    }
    best.0
}

/// Largest iteration count drawn by the random schedule: `floor(sqrt(n / t))`.
pub fn random_schedule_max(n: usize, t: f64) -> u64 {
    floor(sqrt(n as f64 / t)) as u64
}

/// Mean success probability of one random-schedule repetition.
pub fn random_schedule_probability(n: usize, k: usize, t: f64) -> f64 {
    let top = random_schedule_max(n, t);
    (0..=top)
        .map(|iters| grover_success_probability(n, k, iters))
        .sum::<f64>()
        / (top + 1) as f64
}

/// Draws the outcome of one measured repetition with `iters` iterations over
/// `n` elements, `k` of them marked.
pub fn sample_repetition(rng: &mut ChaCha8Rng, n: usize, k: usize, iters: u64) -> bool {
    let prob = grover_success_probability(n, k, iters);
    rng.gen_bool(prob.clamp(0.0, 1.0))
}

/// Charges `evals` evaluations of `p` by running one fresh charged evaluation
/// on a uniformly drawn domain element and billing `evals` copies of it.
fn charge_evaluations<P: Predicate + ?Sized>(
    p: &P,
    domain: &[usize],
    evals: u64,
    ctx: &mut SimContext,
) -> u64 {
    if domain.is_empty() || evals == 0 {
        return 0;
    }
    let x = domain[ctx.rng.gen_range(0..domain.len())];
    let before = ctx.ledger.snapshot();
    let budget = ctx.failure_budget;
    p.charged_eval(x, ctx);
    let accrued = ctx.failure_budget - budget;
    ctx.failure_budget = budget;
    ctx.stand_in_failure += accrued;
    let used = ctx.ledger.snapshot().since(before);
    assert!(
        used.total() <= p.declared_cost(),
        "charged evaluation used {} queries, declared cost is {}",
        used.total(),
        p.declared_cost()
    );
    ctx.ledger.charge_a(used.a * (evals - 1));
    ctx.ledger.charge_b(used.b * (evals - 1));
    used.total() * evals
}

fn marked_elements<P: Predicate + ?Sized>(p: &P, domain: &[usize]) -> Vec<usize> {
    domain.iter().copied().filter(|&x| p.ideal_eval(x)).collect()
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())]
}

#[derive(Clone, Copy)]
enum Schedule {
    Fixed(u64),
    Uniform(u64),
}

/// Shared repetition loop for the fixed and random schedules.
fn boosted_search<P: Predicate + ?Sized>(
    t: f64,
    p: &P,
    domain: &[usize],
    ctx: &mut SimContext,
    schedule: Schedule,
) -> PrimitiveOutcome<Option<usize>> {
    let n = domain.len();
    let marked = marked_elements(p, domain);
    let reps = ctx.cfg.repetitions(n);
    let forced = ctx.mode() == Mode::ForcedSuccess;
    let mut out = PrimitiveOutcome::empty(None);

    for _ in 0..reps {
        let iters = match schedule {
            Schedule::Fixed(iters) => iters,
            Schedule::Uniform(top) => ctx.rng.gen_range(0..=top),
        };
        let charged = charge_evaluations(p, domain, 2 * iters + 1, ctx);
        let success = !marked.is_empty()
            && (forced || sample_repetition(&mut ctx.rng, n, marked.len(), iters));
        out.charged_queries += charged;
        out.iteration_trace.push(Repetition {
            iterations: iters,
            success,
            charged,
        });
        if success {
            out.result = Some(pick(&mut ctx.rng, &marked));
            break;
        }
    }

    if !forced && !marked.is_empty() {
        let t_f = marked.len();
        let miss = match schedule {
            Schedule::Fixed(iters) if promise_window(n, t).contains(&t_f) => {
                1.0 - grover_success_probability(n, t_f, iters)
            }
            Schedule::Uniform(_) if t_f as f64 >= t => {
                1.0 - random_schedule_probability(n, t_f, t)
            }
            _ => 0.0,
        };
        let bound = pow(miss.clamp(0.0, 1.0), reps as f64);
        out.failure_probability_bound = bound;
        ctx.add_failure(bound);
    }
    ctx.audit(marked.len(), out.result.is_some());
    out
}

/// Fixed-schedule Grover search under the promise `t/2 <= t_f <= t`.
pub fn grover_search<P: Predicate + ?Sized>(
    t: f64,
    p: &P,
    ctx: &mut SimContext,
) -> PrimitiveOutcome<Option<usize>> {
    grover_search_over(t, p, p.domain(), ctx)
}

/// [`grover_search`] restricted to a live sub-domain.
pub fn grover_search_over<P: Predicate + ?Sized>(
    t: f64,
    p: &P,
    domain: &[usize],
    ctx: &mut SimContext,
) -> PrimitiveOutcome<Option<usize>> {
    assert!(t >= 1.0, "threshold must be at least 1");
    if t > domain.len() as f64 {
        let marked = marked_elements(p, domain).len();
        ctx.audit(marked, false);
        return PrimitiveOutcome::empty(None);
    }
    let iters = grover_iterations(domain.len(), t);
    boosted_search(t, p, domain, ctx, Schedule::Fixed(iters))
}

/// Random-schedule search given only a lower bound `t <= t_f`; `t = 1` when
/// nothing is known.
pub fn bbht_search<P: Predicate + ?Sized>(
    t: f64,
    p: &P,
    ctx: &mut SimContext,
) -> PrimitiveOutcome<Option<usize>> {
    bbht_search_over(t, p, p.domain(), ctx)
}

pub fn bbht_search_over<P: Predicate + ?Sized>(
    t: f64,
    p: &P,
    domain: &[usize],
    ctx: &mut SimContext,
) -> PrimitiveOutcome<Option<usize>> {
    assert!(t >= 1.0, "threshold must be at least 1");
    if t > domain.len() as f64 {
        let marked = marked_elements(p, domain).len();
        ctx.audit(marked, false);
        return PrimitiveOutcome::empty(None);
    }
    let top = random_schedule_max(domain.len(), t);
    boosted_search(t, p, domain, ctx, Schedule::Uniform(top))
}

/// Finds every marked element by repeated fixed-schedule search with a
/// decreasing threshold. An empty result means "no marked element".
pub fn search_all<P: Predicate + ?Sized>(
    p: &P,
    ctx: &mut SimContext,
) -> PrimitiveOutcome<Vec<usize>> {
    search_all_over(p, p.domain(), ctx, |_| {})
}

/// [`search_all`] over `domain`, calling `on_found` after each find.
///
/// The predicate is re-examined on every inner search, so `on_found` may
/// unmark other elements (through interior state the predicate reads).
pub fn search_all_over<P, F>(
    p: &P,
    domain: &[usize],
    ctx: &mut SimContext,
    mut on_found: F,
) -> PrimitiveOutcome<Vec<usize>>
where
    P: Predicate + ?Sized,
    F: FnMut(usize),
{
    let mut live: Vec<usize> = domain.to_vec();
    let mut t = live.len() as f64;
    let mut out = PrimitiveOutcome::empty(Vec::new());
    while t >= 1.0 {
        let step = grover_search_over(t, p, &live, ctx);
        out.charged_queries += step.charged_queries;
        out.failure_probability_bound += step.failure_probability_bound;
        out.iteration_trace.extend(step.iteration_trace);
        match step.result {
            Some(x) => {
                out.result.push(x);
                live.retain(|&y| y != x);
                t -= 1.0;
                on_found(x);
            }
            None => t /= 2.0,
        }
    }
    out
}

/// Number of evaluations billed by one find-max call over `n` elements.
pub fn find_max_evaluations(n: usize, c_rep: f64) -> u64 {
    ceil(c_rep * sqrt(n as f64) * log2(n as f64 + 2.0)) as u64
}

/// Returns a marked element maximizing `g` (smallest element on ties).
///
/// `g` is evaluated for free; only marked-ness tests are charged.
pub fn find_max<P, G>(p: &P, g: G, ctx: &mut SimContext) -> PrimitiveOutcome<Option<usize>>
where
    P: Predicate + ?Sized,
    G: Fn(usize) -> f64,
{
    let domain = p.domain();
    let n = domain.len();
    if n == 0 {
        return PrimitiveOutcome::empty(None);
    }
    let evals = find_max_evaluations(n, ctx.cfg.c_rep);
    let charged = charge_evaluations(p, domain, evals, ctx);
    let mut marked = marked_elements(p, domain);
    marked.sort_unstable();

    let mut best: Option<(usize, f64)> = None;
    for &x in &marked {
        let v = g(x);
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((x, v));
        }
    }

    let mut out = PrimitiveOutcome::empty(best.map(|(x, _)| x));
    out.charged_queries = charged;
    out.iteration_trace.push(Repetition {
        iterations: evals,
        success: best.is_some(),
        charged,
    });
    if ctx.mode() == Mode::Faithful && marked.len() > 1 {
        let miss = pow(n as f64, -ctx.cfg.failure_target_exponent).min(1.0);
        if ctx.rng.gen_bool(miss) {
            out.result = Some(pick(&mut ctx.rng, &marked));
        }
        out.failure_probability_bound = miss;
        ctx.add_failure(miss);
    }
    ctx.audit(marked.len(), out.result.is_some());
    out
}

/// A leaf predicate over an explicit marked set; each charged evaluation
/// bills one query to `A`.
#[derive(Debug, Clone)]
pub struct IndicatorPredicate {
    domain: Vec<usize>,
    marked: Vec<bool>,
}

impl IndicatorPredicate {
    /// Domain `1..=n` with the given marked elements.
    pub fn new(n: usize, marked: &[usize]) -> Self {
        let mut flags = alloc::vec![false; n + 1];
        for &x in marked {
            assert!((1..=n).contains(&x), "marked element {x} outside 1..={n}");
            flags[x] = true;
        }
        IndicatorPredicate {
            domain: (1..=n).collect(),
            marked: flags,
        }
    }

    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }
}

impl Predicate for IndicatorPredicate {
    fn domain(&self) -> &[usize] {
        &self.domain
    }

    fn ideal_eval(&self, x: usize) -> bool {
        self.marked[x]
    }

    fn charged_eval(&self, x: usize, ctx: &mut SimContext) -> bool {
        ctx.ledger.charge_a(1);
        self.marked[x]
    }

    fn declared_cost(&self) -> u64 {
        1
    }
}
