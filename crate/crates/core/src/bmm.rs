//! Output-sensitive Boolean matrix multiplication by witness search.
//!
//! The driver keeps a matrix `C~` of ones found so far, a set `V` of live
//! witness candidates and a real threshold `t`, starting from `C~ = 0`,
//! `V = 1..=n`, `t = n`. Each round runs a fixed-schedule search over `V` for an
//! index `k` whose graph-collision instance (graph = complement of `C~`,
//! oracles `A[., k]` and `B[k, .]`) has a collision. On a find, every collision of
//! `k` is enumerated and recorded in `C~`, `k` leaves `V` and `t` drops by one;
//! otherwise `t` halves. The loop ends when `t < 1`.

use alloc::vec::Vec;
use core::fmt;
use libm::{log2, pow, sqrt};

use crate::graph_collision::{
    all_gc, collision_exists, has_gc, has_gc_query_ceiling, ComplementGraphView, GcCase,
    GcInstance,
};
use crate::matrix::{BooleanMatrix, DimensionMismatch};
use crate::oracle::brute_force_product;
use crate::search::{grover_search, Mode, Predicate, SearchConfig, SimContext, Soundness};

/// Frozen envelope constant: `queries <= C_FIT * n * sqrt(l + 1) * log2(n + 2)^K_LOG`.
pub const DEFAULT_C_FIT: f64 = 57.5;
/// Frozen polylog exponent paired with [`DEFAULT_C_FIT`].
pub const DEFAULT_K_LOG: f64 = 2.17;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 0-based round number.
    pub index: usize,
    /// Threshold at the start of the round.
    pub t: f64,
    /// Ones in `C~` at the start of the round.
    pub m: usize,
    pub witness: Option<usize>,
    /// Collisions recorded this round (`lambda_j`); zero when no witness.
    pub collisions: usize,
    pub case: Option<GcCase>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub n: usize,
    pub mode: Mode,
    pub rounds: Vec<RoundRecord>,
    /// Number of witnesses found (`T`).
    pub witnesses: usize,
    pub queries_a: u64,
    pub queries_b: u64,
    pub accumulated_failure_bound: f64,
    /// Failure bounds accrued inside cost stand-in evaluations; informational.
    pub stand_in_failure_bound: f64,
    /// Declaration tallies over every primitive call of the run.
    pub soundness: Soundness,
}

impl RunReport {
    pub fn queries_total(&self) -> u64 {
        self.queries_a + self.queries_b
    }

    /// Sum of `lambda_j` over all rounds.
    pub fn collisions_total(&self) -> usize {
        self.rounds.iter().map(|r| r.collisions).sum()
    }

    /// Upper bound on the number of rounds: `n + (n + 1)(ceil(log2 n) + 1)`.
    pub fn round_limit(n: usize) -> usize {
        let log = usize::BITS as usize - (n.max(1) - 1).leading_zeros() as usize;
        n + (n + 1) * (log + 1)
    }
}

/// "Does `k` have a collision against the current `C~`?"
///
/// Charged evaluation runs the existence routine; the ideal evaluation is an
/// exact word-parallel scan.
struct WitnessPredicate<'a> {
    a: &'a BooleanMatrix,
    b: &'a BooleanMatrix,
    graph: ComplementGraphView<'a>,
    domain: Vec<usize>,
    ceiling: u64,
}

impl Predicate for WitnessPredicate<'_> {
    fn domain(&self) -> &[usize] {
        &self.domain
    }

    fn ideal_eval(&self, k: usize) -> bool {
        collision_exists(self.graph.base(), self.a, self.b, k)
    }

    fn charged_eval(&self, k: usize, ctx: &mut SimContext) -> bool {
        let inst = GcInstance {
            graph: self.graph.clone(),
            a: self.a,
            b: self.b,
            k,
        };
        has_gc(&inst, ctx).found
    }

    fn declared_cost(&self) -> u64 {
        self.ceiling
    }
}

/// Multiplies `a` and `b`, returning `C~` and the run report.
pub fn bmm(
    a: &BooleanMatrix,
    b: &BooleanMatrix,
    cfg: SearchConfig,
) -> Result<(BooleanMatrix, RunReport), DimensionMismatch> {
    bmm_observed(a, b, cfg, |_, _| {})
}

/// [`bmm`] with a callback after every round, seeing the round record and `C~`.
pub fn bmm_observed<F>(
    a: &BooleanMatrix,
    b: &BooleanMatrix,
    cfg: SearchConfig,
    mut observer: F,
) -> Result<(BooleanMatrix, RunReport), DimensionMismatch>
where
    F: FnMut(&RoundRecord, &BooleanMatrix),
{
    let n = a.dim();
    if b.dim() != n {
        return Err(DimensionMismatch {
            left: n,
            right: b.dim(),
        });
    }
    let mut ctx = SimContext::new(cfg);
    let mut c_tilde = BooleanMatrix::zeros(n);
    let mut live: Vec<usize> = (1..=n).collect();
    let mut t = n as f64;
    let mut rounds = Vec::new();

    while t >= 1.0 {
        let m = c_tilde.count_ones();
        let found = {
            let pred = WitnessPredicate {
                a,
                b,
                graph: ComplementGraphView::new(&c_tilde),
                domain: live.clone(),
                ceiling: has_gc_query_ceiling(n, m, cfg.c_rep),
            };
            grover_search(t, &pred, &mut ctx).result
        };
        let mut record = RoundRecord {
            index: rounds.len(),
            t,
            m,
            witness: found,
            collisions: 0,
            case: None,
        };
        match found {
            Some(k) => {
                let out = all_gc(&GcInstance::new(&c_tilde, a, b, k), &mut ctx);
                for &(i, j) in &out.pairs {
                    c_tilde.set(i, j, true);
                }
                record.collisions = out.pairs.len();
                record.case = out.case;
                live.retain(|&x| x != k);
                t -= 1.0;
            }
            None => t /= 2.0,
        }
        observer(&record, &c_tilde);
        rounds.push(record);
    }

    let witnesses = rounds.iter().filter(|r| r.witness.is_some()).count();
    let report = RunReport {
        n,
        mode: cfg.mode,
        rounds,
        witnesses,
        queries_a: ctx.ledger.count_a(),
        queries_b: ctx.ledger.count_b(),
        accumulated_failure_bound: ctx.failure_budget(),
        stand_in_failure_bound: ctx.stand_in_failure(),
        soundness: ctx.soundness(),
    };
    Ok((c_tilde, report))
}

/// `true` iff `c_out` equals the brute-force product entrywise.
pub fn verify(a: &BooleanMatrix, b: &BooleanMatrix, c_out: &BooleanMatrix) -> bool {
    match brute_force_product(a, b) {
        Ok(c) => c == *c_out,
        Err(_) => false,
    }
}

/// `c_fit * n * sqrt(l + 1) * log2(n + 2)^k_log`.
pub fn cost_bound(n: usize, ell: usize, c_fit: f64, k_log: f64) -> f64 {
    c_fit * n as f64 * sqrt(ell as f64 + 1.0) * pow(log2(n as f64 + 2.0), k_log)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThresholdError {
    /// The input length is not `n^2` for any positive `n`.
    NotSquare(usize),
    /// The threshold lies outside `1..=n^2`.
    ThresholdOutOfRange { ell: usize, size: usize },
}

impl fmt::Display for ThresholdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdError::NotSquare(len) => write!(f, "input length {len} is not a perfect square"),
            ThresholdError::ThresholdOutOfRange { ell, size } => {
                write!(f, "threshold {ell} outside 1..={size}")
            }
        }
    }
}

impl core::error::Error for ThresholdError {}

/// Decides "does `f` have at least `ell` ones?" by multiplying the identity with
/// the matrix whose row-major entries are `f`.
pub fn solve_threshold_via_bmm(
    f: &[bool],
    ell: usize,
    cfg: SearchConfig,
) -> Result<bool, ThresholdError> {
    let n = isqrt(f.len());
    if n == 0 || n * n != f.len() {
        return Err(ThresholdError::NotSquare(f.len()));
    }
    if ell == 0 || ell > f.len() {
        return Err(ThresholdError::ThresholdOutOfRange {
            ell,
            size: f.len(),
        });
    }
    let b = BooleanMatrix::from_row_major(n, f).expect("length checked");
    let (c, _) = bmm(&BooleanMatrix::identity(n), &b, cfg).expect("same dimension");
    Ok(c.count_ones() >= ell)
}

fn isqrt(x: usize) -> usize {
    let mut r = sqrt(x as f64) as usize;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_bound_arithmetic() {
        assert!((cost_bound(64, 64, 1.0, 0.0) - 64.0 * sqrt(65.0)).abs() < 1e-9);
        let floor = cost_bound(10, 0, 2.0, 1.5);
        assert!((floor - 2.0 * 10.0 * pow(log2(12.0), 1.5)).abs() < 1e-9);
    }

    #[test]
    fn identity_times_b() {
        let mut b = BooleanMatrix::zeros(5);
        for (i, j) in [(1, 2), (3, 3), (3, 5), (5, 1)] {
            b.set(i, j, true);
        }
        let (c, report) = bmm(&BooleanMatrix::identity(5), &b, SearchConfig::forced(1)).unwrap();
        assert_eq!(c, b);
        assert_eq!(report.collisions_total(), 4);
        assert!(verify(&BooleanMatrix::identity(5), &b, &c));
        let mut flipped = c.clone();
        flipped.set(2, 2, true);
        assert!(!verify(&BooleanMatrix::identity(5), &b, &flipped));
    }

    #[test]
    fn zero_input_halves_down_and_stops() {
        for n in [1, 2, 8, 16, 64] {
            let z = BooleanMatrix::zeros(n);
            let (c, report) = bmm(&z, &BooleanMatrix::ones(n), SearchConfig::forced(0)).unwrap();
            assert_eq!(c.count_ones(), 0);
            assert_eq!(report.witnesses, 0);
            let log = n.trailing_zeros() as usize;
            assert_eq!(report.rounds.len(), log + 1, "n = {n}");
        }
    }

    #[test]
    fn round_limit_formula() {
        assert_eq!(RunReport::round_limit(1), 1 + 2);
        assert_eq!(RunReport::round_limit(8), 8 + 9 * 4);
        assert_eq!(RunReport::round_limit(10), 10 + 11 * 5);
    }

    #[test]
    fn threshold_edge_cases() {
        let cfg = SearchConfig::forced(2);
        assert_eq!(solve_threshold_via_bmm(&[true; 16], 16, cfg), Ok(true));
        assert_eq!(solve_threshold_via_bmm(&[false; 16], 1, cfg), Ok(false));
        assert_eq!(
            solve_threshold_via_bmm(&[false; 15], 1, cfg),
            Err(ThresholdError::NotSquare(15))
        );
        assert!(solve_threshold_via_bmm(&[false; 4], 0, cfg).is_err());
        assert!(solve_threshold_via_bmm(&[false; 4], 5, cfg).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = bmm(&BooleanMatrix::zeros(2), &BooleanMatrix::zeros(3), SearchConfig::default());
        assert!(err.is_err());
    }
}
