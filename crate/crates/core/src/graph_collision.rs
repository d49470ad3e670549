//! Finding graph collisions in a dense bipartite graph.
//!
//! The graph has `n` vertices on each side and an edge `(i, j)` exactly when
//! `C~[i, j] = 0`, so its `m` non-edges are the ones of `C~`. For a fixed witness
//! index `k` the A-side vertex `i` is marked when `A[i, k] = 1` and the B-side
//! vertex `j` when `B[k, j] = 1`. A collision is an edge with both ends marked.
//!
//! [`all_gc`] finds every collision at cost `O~(sqrt(n * lambda) + sqrt(m))`,
//! [`has_gc`] decides whether one exists at cost `O~(sqrt(n) + sqrt(m))`.
//! Degrees, neighborhoods and the candidate sets built from already-known marked
//! vertices come from `C~` and are free; only reads of `A` and `B` are charged.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use libm::{ceil, floor, sqrt};

use crate::matrix::BooleanMatrix;
use crate::search::{
    bbht_search_over, find_max, find_max_evaluations, random_schedule_max, search_all_over,
    Predicate, SimContext,
};

/// The bipartite graph whose edges are the zeros of `base`.
#[derive(Debug, Clone)]
pub struct ComplementGraphView<'a> {
    base: &'a BooleanMatrix,
    m: usize,
    non_edges: Vec<usize>,
    degree_order: Vec<usize>,
}

impl<'a> ComplementGraphView<'a> {
    pub fn new(base: &'a BooleanMatrix) -> Self {
        let n = base.dim();
        let non_edges: Vec<usize> = (1..=n).map(|i| base.row_ones(i)).collect();
        let m = non_edges.iter().sum();
        let mut degree_order: Vec<usize> = (1..=n).collect();
        // Decreasing degree is increasing non-edge count; stable sort keeps
        // smaller indices first among ties.
        degree_order.sort_by_key(|&i| non_edges[i - 1]);
        ComplementGraphView {
            base,
            m,
            non_edges,
            degree_order,
        }
    }

    pub fn base(&self) -> &'a BooleanMatrix {
        self.base
    }

    pub fn n(&self) -> usize {
        self.base.dim()
    }

    /// Number of non-edges.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `c_i`: non-edges at A-side vertex `i`.
    pub fn non_edges_at(&self, i: usize) -> usize {
        self.non_edges[i - 1]
    }

    /// `d_i = n - c_i`.
    pub fn degree(&self, i: usize) -> usize {
        self.n() - self.non_edges[i - 1]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        !self.base.get(i, j)
    }

    /// A-side vertices by non-increasing degree, smaller index first on ties.
    pub fn degree_order(&self) -> &[usize] {
        &self.degree_order
    }

    /// B-side neighbors of A-side vertex `i`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.base.row_iter_zeros(i).collect()
    }

    pub fn non_neighbors(&self, i: usize) -> Vec<usize> {
        self.base.row_iter_ones(i).collect()
    }

    /// A-side vertices adjacent to at least one of `targets` (a B-side set).
    pub fn a_side_touching(&self, targets: &[usize]) -> Vec<usize> {
        let mask = Mask::from_indices(self.n(), targets);
        (1..=self.n())
            .filter(|&i| {
                self.base
                    .row_words(i)
                    .iter()
                    .zip(&mask.0)
                    .any(|(row, want)| want & !row != 0)
            })
            .collect()
    }

    /// B-side vertices adjacent to at least one of `sources` (an A-side set).
    pub fn b_side_touching(&self, sources: &[usize]) -> Vec<usize> {
        (1..=self.n())
            .filter(|&j| sources.iter().any(|&i| self.has_edge(i, j)))
            .collect()
    }
}

struct Mask(Vec<u64>);

impl Mask {
    fn from_indices(n: usize, idx: &[usize]) -> Self {
        let mut words = alloc::vec![0u64; n.div_ceil(64)];
        for &j in idx {
            words[(j - 1) / 64] |= 1 << ((j - 1) % 64);
        }
        Mask(words)
    }
}

/// One graph-collision instance: the graph plus the side oracles at witness `k`.
#[derive(Debug, Clone)]
pub struct GcInstance<'a> {
    pub graph: ComplementGraphView<'a>,
    pub a: &'a BooleanMatrix,
    pub b: &'a BooleanMatrix,
    pub k: usize,
}

impl<'a> GcInstance<'a> {
    pub fn new(
        c_tilde: &'a BooleanMatrix,
        a: &'a BooleanMatrix,
        b: &'a BooleanMatrix,
        k: usize,
    ) -> Self {
        assert!(c_tilde.dim() == a.dim() && a.dim() == b.dim());
        assert!((1..=a.dim()).contains(&k));
        GcInstance {
            graph: ComplementGraphView::new(c_tilde),
            a,
            b,
            k,
        }
    }

    pub fn n(&self) -> usize {
        self.a.dim()
    }

    /// Uncharged `f_A(i) = A[i, k]`.
    pub fn f_a(&self, i: usize) -> bool {
        self.a.get(i, self.k)
    }

    /// Uncharged `f_B(j) = B[k, j]`.
    pub fn f_b(&self, j: usize) -> bool {
        self.b.get(self.k, j)
    }
}

/// `f_A` over a subset of the A side; one charged read of `A[i, k]` per evaluation.
struct SideA<'a> {
    a: &'a BooleanMatrix,
    k: usize,
    domain: Vec<usize>,
}

impl Predicate for SideA<'_> {
    fn domain(&self) -> &[usize] {
        &self.domain
    }
    fn ideal_eval(&self, i: usize) -> bool {
        self.a.get(i, self.k)
    }
    fn charged_eval(&self, i: usize, ctx: &mut SimContext) -> bool {
        ctx.ledger.read_a(self.a, i, self.k)
    }
    fn declared_cost(&self) -> u64 {
        1
    }
}

/// `f_B` over a subset of the B side; one charged read of `B[k, j]` per evaluation.
struct SideB<'a> {
    b: &'a BooleanMatrix,
    k: usize,
    domain: Vec<usize>,
}

impl Predicate for SideB<'_> {
    fn domain(&self) -> &[usize] {
        &self.domain
    }
    fn ideal_eval(&self, j: usize) -> bool {
        self.b.get(self.k, j)
    }
    fn charged_eval(&self, j: usize, ctx: &mut SimContext) -> bool {
        ctx.ledger.read_b(self.b, self.k, j)
    }
    fn declared_cost(&self) -> u64 {
        1
    }
}

/// Exact collision set by exhaustive uncharged scan.
pub fn brute_force_gc(inst: &GcInstance<'_>) -> BTreeSet<(usize, usize)> {
    let n = inst.n();
    let marked_b: Vec<usize> = (1..=n).filter(|&j| inst.f_b(j)).collect();
    let mut out = BTreeSet::new();
    for i in (1..=n).filter(|&i| inst.f_a(i)) {
        for &j in &marked_b {
            if inst.graph.has_edge(i, j) {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Uncharged existence check, equivalent to `!brute_force_gc(..).is_empty()`
/// but word-parallel.
pub fn collision_exists(c_tilde: &BooleanMatrix, a: &BooleanMatrix, b: &BooleanMatrix, k: usize) -> bool {
    let row_b = b.row_words(k);
    (1..=a.dim()).any(|i| {
        a.get(i, k)
            && c_tilde
                .row_words(i)
                .iter()
                .zip(row_b)
                .any(|(c, bk)| bk & !c != 0)
    })
}

/// Which branch of the all-collisions routine ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcCase {
    /// The top marked vertex has at most `sqrt(m)` non-neighbors.
    FewNonNeighbors,
    /// The top marked vertex has more than `sqrt(m)` non-neighbors; carries the
    /// number of A-side vertices read exhaustively.
    ManyNonNeighbors { survivors: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcOutcome {
    pub pairs: BTreeSet<(usize, usize)>,
    /// Set when step one found no marked A-side vertex.
    pub no_collision_declared: bool,
    pub case: Option<GcCase>,
    pub charged_queries: u64,
    pub failure_probability_bound: f64,
}

/// Result of the existence variant.
#[derive(Debug, Clone, PartialEq)]
pub struct GcCheck {
    pub found: bool,
    pub witness: Option<(usize, usize)>,
    pub case: Option<GcCase>,
    pub charged_queries: u64,
    pub failure_probability_bound: f64,
}

fn find_top_marked(inst: &GcInstance<'_>, ctx: &mut SimContext) -> Option<usize> {
    let side = SideA {
        a: inst.a,
        k: inst.k,
        domain: (1..=inst.n()).collect(),
    };
    let graph = &inst.graph;
    find_max(&side, |i| graph.degree(i) as f64, ctx).result
}

/// `true` when `c_r <= sqrt(m)`; the tie goes to the few-non-neighbors branch.
fn few_non_neighbors(graph: &ComplementGraphView<'_>, r: usize) -> bool {
    graph.non_edges_at(r) as f64 <= sqrt(graph.m() as f64)
}

/// Reads every A-side vertex from `r` onwards in degree order.
fn read_survivors(inst: &GcInstance<'_>, r: usize, ctx: &mut SimContext) -> (usize, Vec<usize>) {
    let order = inst.graph.degree_order();
    let pos = order
        .iter()
        .position(|&i| i == r)
        .expect("vertex missing from degree order");
    let survivors = &order[pos..];
    let cap = ceil(sqrt(inst.graph.m() as f64)) as usize;
    assert!(
        survivors.len() <= cap,
        "{} survivors exceed ceil(sqrt(m)) = {cap}",
        survivors.len()
    );
    let marked = survivors
        .iter()
        .copied()
        .filter(|&i| ctx.ledger.read_a(inst.a, i, inst.k))
        .collect();
    (survivors.len(), marked)
}

/// Reads `f_B` at every non-neighbor of `r`.
fn read_non_neighbors(inst: &GcInstance<'_>, r: usize, ctx: &mut SimContext) -> Vec<usize> {
    inst.graph
        .non_neighbors(r)
        .into_iter()
        .filter(|&j| ctx.ledger.read_b(inst.b, inst.k, j))
        .collect()
}

/// Finds all graph collisions of `inst`.
///
/// In forced-success mode the result equals [`brute_force_gc`]. In every mode
/// each reported pair is a genuine collision.
pub fn all_gc(inst: &GcInstance<'_>, ctx: &mut SimContext) -> GcOutcome {
    let before = ctx.ledger.total();
    let budget = ctx.failure_budget();
    let graph = &inst.graph;
    let mut pairs = BTreeSet::new();

    let Some(r) = find_top_marked(inst, ctx) else {
        return GcOutcome {
            pairs,
            no_collision_declared: true,
            case: None,
            charged_queries: ctx.ledger.total() - before,
            failure_probability_bound: ctx.failure_budget() - budget,
        };
    };

    let case = if few_non_neighbors(graph, r) {
        let side_b = SideB {
            b: inst.b,
            k: inst.k,
            domain: graph.neighbors(r),
        };
        let mut known_b = search_all_over(&side_b, &side_b.domain, ctx, |_| {}).result;
        pairs.extend(known_b.iter().map(|&j| (r, j)));
        known_b.extend(read_non_neighbors(inst, r, ctx));
        known_b.sort_unstable();

        let side_a = SideA {
            a: inst.a,
            k: inst.k,
            domain: graph.a_side_touching(&known_b),
        };
        for i in search_all_over(&side_a, &side_a.domain, ctx, |_| {}).result {
            pairs.extend(known_b.iter().filter(|&&j| graph.has_edge(i, j)).map(|&j| (i, j)));
        }
        GcCase::FewNonNeighbors
    } else {
        let (survivors, known_a) = read_survivors(inst, r, ctx);
        let side_b = SideB {
            b: inst.b,
            k: inst.k,
            domain: graph.b_side_touching(&known_a),
        };
        for j in search_all_over(&side_b, &side_b.domain, ctx, |_| {}).result {
            pairs.extend(known_a.iter().filter(|&&i| graph.has_edge(i, j)).map(|&i| (i, j)));
        }
        GcCase::ManyNonNeighbors { survivors }
    };

    GcOutcome {
        pairs,
        no_collision_declared: false,
        case: Some(case),
        charged_queries: ctx.ledger.total() - before,
        failure_probability_bound: ctx.failure_budget() - budget,
    }
}

/// Decides whether `inst` has a collision, returning one when found.
pub fn has_gc(inst: &GcInstance<'_>, ctx: &mut SimContext) -> GcCheck {
    let before = ctx.ledger.total();
    let budget = ctx.failure_budget();
    let graph = &inst.graph;
    let finish = |witness: Option<(usize, usize)>, case, ctx: &SimContext| GcCheck {
        found: witness.is_some(),
        witness,
        case,
        charged_queries: ctx.ledger.total() - before,
        failure_probability_bound: ctx.failure_budget() - budget,
    };

    let Some(r) = find_top_marked(inst, ctx) else {
        return finish(None, None, ctx);
    };

    if few_non_neighbors(graph, r) {
        let case = Some(GcCase::FewNonNeighbors);
        let side_b = SideB {
            b: inst.b,
            k: inst.k,
            domain: graph.neighbors(r),
        };
        if let Some(j) = bbht_search_over(1.0, &side_b, &side_b.domain, ctx).result {
            return finish(Some((r, j)), case, ctx);
        }
        let known_b = read_non_neighbors(inst, r, ctx);
        let side_a = SideA {
            a: inst.a,
            k: inst.k,
            domain: graph.a_side_touching(&known_b),
        };
        let witness = bbht_search_over(1.0, &side_a, &side_a.domain, ctx)
            .result
            .map(|i| {
                let j = known_b.iter().copied().find(|&j| graph.has_edge(i, j));
                (i, j.expect("candidate has a known marked neighbor"))
            });
        finish(witness, case, ctx)
    } else {
        let (survivors, known_a) = read_survivors(inst, r, ctx);
        let case = Some(GcCase::ManyNonNeighbors { survivors });
        let side_b = SideB {
            b: inst.b,
            k: inst.k,
            domain: graph.b_side_touching(&known_a),
        };
        let witness = bbht_search_over(1.0, &side_b, &side_b.domain, ctx)
            .result
            .map(|j| {
                let i = known_a.iter().copied().find(|&i| graph.has_edge(i, j));
                (i.expect("candidate has a known marked neighbor"), j)
            });
        finish(witness, case, ctx)
    }
}

/// Frozen constant of the all-collisions cost envelope, calibrated at `n = 16`
/// and asserted for `n >= 16`.
pub const DEFAULT_GC_C: f64 = 0.7;

/// `(sqrt(n (lambda + 1)) + sqrt(m + 1)) * log2(n + 2)^3`; multiplied by a
/// constant it bounds the charged queries of [`all_gc`].
pub fn all_gc_envelope(n: usize, lambda: usize, m: usize) -> f64 {
    let lg = libm::log2(n as f64 + 2.0);
    (sqrt(n as f64 * (lambda as f64 + 1.0)) + sqrt(m as f64 + 1.0)) * lg * lg * lg
}

/// Worst-case charged queries of one [`has_gc`] call on an `n`-vertex graph with
/// `m` non-edges: one find-max, at most two random-schedule searches over at
/// most `n` elements, and at most `floor(sqrt(m))` single reads.
pub fn has_gc_query_ceiling(n: usize, m: usize, c_rep: f64) -> u64 {
    let reps = crate::search::SearchConfig {
        c_rep,
        ..Default::default()
    }
    .repetitions(n);
    let random_search = reps * (2 * random_schedule_max(n, 1.0) + 1);
    find_max_evaluations(n, c_rep) + 2 * random_search + floor(sqrt(m as f64)) as u64
}
