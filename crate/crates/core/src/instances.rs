//! Seeded instance generators with controlled output density.
//!
//! Every generator is a pure function of its arguments and seed. The reported
//! `ell_actual` is always the number of ones of the brute-force product.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use libm::{fabs, log, pow, sqrt};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::BooleanMatrix;
use crate::oracle::{brute_force_product, count_ones};

/// Bisection steps per uniform draw in [`instance_with_target_ell`].
pub const MAX_BISECTION_STEPS: usize = 50;
/// Fresh uniform draws tried before giving up on a target.
pub const MAX_DRAWS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Random,
    TargetEll,
    Threshold,
    SingleWitness,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Random,
        Family::TargetEll,
        Family::Threshold,
        Family::SingleWitness,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::TargetEll => "target-ell",
            Family::Threshold => "threshold",
            Family::SingleWitness => "single-witness",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownFamily(pub alloc::string::String);

impl fmt::Display for UnknownFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown instance family `{}` (expected random, target-ell, threshold or single-witness)",
            self.0
        )
    }
}

impl core::error::Error for UnknownFamily {}

impl FromStr for Family {
    type Err = UnknownFamily;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| UnknownFamily(s.into()))
    }
}

/// A generated pair and the number of ones in its product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub a: BooleanMatrix,
    pub b: BooleanMatrix,
    pub ell_actual: usize,
}

impl Instance {
    fn measured(a: BooleanMatrix, b: BooleanMatrix) -> Self {
        let ell_actual = count_ones(&brute_force_product(&a, &b).expect("same dimension"));
        Instance { a, b, ell_actual }
    }
}

/// Target-density generation failed; carries the closest instance seen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetMiss {
    pub target: usize,
    pub closest: Instance,
}

impl fmt::Display for TargetMiss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no instance with output density in [{}/2, 2*{}]; closest has {}",
            self.target, self.target, self.closest.ell_actual
        )
    }
}

impl core::error::Error for TargetMiss {}

/// Per-entry uniforms for `A` and `B`; thresholding them at a density gives a
/// pair whose product is monotone in the density.
struct Uniforms {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Uniforms {
    fn draw(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let a = (0..n * n).map(|_| rng.gen::<f64>()).collect();
        let b = (0..n * n).map(|_| rng.gen::<f64>()).collect();
        Uniforms { n, a, b }
    }

    fn threshold(&self, pa: f64, pb: f64) -> (BooleanMatrix, BooleanMatrix) {
        let cut = |u: &[f64], p: f64| {
            let bits: Vec<bool> = u.iter().map(|&x| x < p).collect();
            BooleanMatrix::from_row_major(self.n, &bits).expect("n*n entries")
        };
        (cut(&self.a, pa), cut(&self.b, pb))
    }
}

/// Row-OR product, used to steer the density search.
fn product_ones(a: &BooleanMatrix, b: &BooleanMatrix) -> usize {
    let n = a.dim();
    let mut acc = alloc::vec![0u64; n.div_ceil(64)];
    let mut total = 0;
    for i in 1..=n {
        acc.iter_mut().for_each(|w| *w = 0);
        for k in a.row_iter_ones(i) {
            for (w, bk) in acc.iter_mut().zip(b.row_words(k)) {
                *w |= bk;
            }
        }
        total += acc.iter().map(|w| w.count_ones() as usize).sum::<usize>();
    }
    total
}

/// I.i.d. Bernoulli entries with densities `pa` and `pb`.
pub fn random_instance(n: usize, pa: f64, pb: f64, seed: u64) -> Instance {
    assert!((0.0..=1.0).contains(&pa) && (0.0..=1.0).contains(&pb));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = Uniforms::draw(n, &mut rng).threshold(pa, pb);
    Instance::measured(a, b)
}

/// Shared density whose expected output density is `target`:
/// solves `n^2 (1 - (1 - p^2)^n) = target`.
pub fn density_for_target(n: usize, target: usize) -> f64 {
    let cells = (n * n) as f64;
    let frac = (target as f64 / cells).clamp(0.0, 1.0);
    if frac >= 1.0 {
        return 1.0;
    }
    sqrt(1.0 - pow(1.0 - frac, 1.0 / n as f64)).clamp(0.0, 1.0)
}

fn in_window(ell: usize, target: usize) -> bool {
    2 * ell >= target && ell <= 2 * target
}

/// An instance whose output density lies in `[target/2, 2*target]`, exact for
/// `target` in `{0, n^2}`.
///
/// Bisects a shared density over a fixed draw of uniforms (the output density
/// is monotone in it), redrawing when a draw cannot hit the window.
pub fn instance_with_target_ell(n: usize, target: usize, seed: u64) -> Result<Instance, TargetMiss> {
    assert!(target <= n * n, "target exceeds n^2");
    if target == 0 {
        return Ok(Instance::measured(BooleanMatrix::zeros(n), BooleanMatrix::zeros(n)));
    }
    if target == n * n {
        return Ok(Instance::measured(BooleanMatrix::ones(n), BooleanMatrix::ones(n)));
    }
    let distance = |ell: usize| fabs(log((ell as f64 + 1.0) / (target as f64 + 1.0)));
    let mut closest: Option<(f64, BooleanMatrix, BooleanMatrix)> = None;

    for draw in 0..MAX_DRAWS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw);
        let uniforms = Uniforms::draw(n, &mut rng);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..MAX_BISECTION_STEPS {
            let p = 0.5 * (lo + hi);
            let (a, b) = uniforms.threshold(p, p);
            let ell = product_ones(&a, &b);
            if in_window(ell, target) {
                return Ok(Instance::measured(a, b));
            }
            let d = distance(ell);
            if closest.as_ref().is_none_or(|(best, _, _)| d < *best) {
                closest = Some((d, a, b));
            }
            if ell < target {
                lo = p;
            } else {
                hi = p;
            }
        }
    }
    let (_, a, b) = closest.expect("at least one bisection step ran");
    Err(TargetMiss {
        target,
        closest: Instance::measured(a, b),
    })
}

/// `A = I`, `B` with exactly `t_f` ones at uniformly random positions, so the
/// product is `B` and its output density is `t_f`.
pub fn threshold_instance(n: usize, t_f: usize, seed: u64) -> Instance {
    assert!(t_f <= n * n, "t_f exceeds n^2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = BooleanMatrix::zeros(n);
    for cell in sample(&mut rng, n * n, t_f) {
        b.set(cell / n + 1, cell % n + 1, true);
    }
    Instance::measured(BooleanMatrix::identity(n), b)
}

/// Largest `rows * cols <= target` with `rows, cols <= n`; the smallest such
/// `rows` on ties.
pub fn witness_block_shape(n: usize, target: usize) -> (usize, usize) {
    let mut best = (0, 0);
    for rows in 1..=n {
        let cols = (target / rows).min(n);
        if rows * cols > best.0 * best.1 {
            best = (rows, cols);
        }
    }
    best
}

/// `A` nonzero only in column 1 and `B` only in row 1, so every output pair has
/// the single witness `k = 1`; output density is the largest achievable
/// product not above `target`.
pub fn single_witness_instance(n: usize, target: usize, seed: u64) -> Instance {
    assert!(target <= n * n, "target exceeds n^2");
    let (rows, cols) = witness_block_shape(n, target);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = BooleanMatrix::zeros(n);
    let mut b = BooleanMatrix::zeros(n);
    for i in sample(&mut rng, n, rows) {
        a.set(i + 1, 1, true);
    }
    for j in sample(&mut rng, n, cols) {
        b.set(1, j + 1, true);
    }
    Instance::measured(a, b)
}

/// A graph-collision test case: `C~` plus oracles with the witness at `k = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcSample {
    pub c_tilde: BooleanMatrix,
    pub a: BooleanMatrix,
    pub b: BooleanMatrix,
}

/// `A` holding `f_a` in column 1 and `B` holding `f_b` in row 1, so the
/// graph-collision oracles at `k = 1` are exactly `f_a` and `f_b`.
pub fn side_matrices(f_a: &[bool], f_b: &[bool]) -> (BooleanMatrix, BooleanMatrix) {
    assert!(!f_a.is_empty() && f_a.len() == f_b.len(), "oracle lengths differ");
    let n = f_a.len();
    let mut a = BooleanMatrix::zeros(n);
    let mut b = BooleanMatrix::zeros(n);
    for i in 0..n {
        a.set(i + 1, 1, f_a[i]);
        b.set(1, i + 1, f_b[i]);
    }
    (a, b)
}

/// `m` ones of `C~` spread uniformly over `rows` randomly chosen rows, with
/// `f_A` and `f_B` i.i.d. Bernoulli(`pa`) and Bernoulli(`pb`).
pub fn gc_sample(n: usize, m: usize, rows: usize, pa: f64, pb: f64, seed: u64) -> GcSample {
    assert!((1..=n).contains(&rows) && m <= rows * n, "m exceeds rows * n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = sample(&mut rng, n, rows).into_vec();
    let mut c_tilde = BooleanMatrix::zeros(n);
    for cell in sample(&mut rng, rows * n, m) {
        c_tilde.set(chosen[cell / n] + 1, cell % n + 1, true);
    }
    let f_a: Vec<bool> = (0..n).map(|_| rng.gen_bool(pa)).collect();
    let f_b: Vec<bool> = (0..n).map(|_| rng.gen_bool(pb)).collect();
    let (a, b) = side_matrices(&f_a, &f_b);
    GcSample { c_tilde, a, b }
}

/// Generates one instance of `family` aimed at output density `target`.
pub fn generate(family: Family, n: usize, target: usize, seed: u64) -> Result<Instance, TargetMiss> {
    let target = target.min(n * n);
    Ok(match family {
        Family::Random => {
            let p = density_for_target(n, target);
            random_instance(n, p, p, seed)
        }
        Family::TargetEll => instance_with_target_ell(n, target, seed)?,
        Family::Threshold => threshold_instance(n, target, seed),
        Family::SingleWitness => single_witness_instance(n, target, seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_extremes() {
        let z = random_instance(12, 0.0, 0.7, 3);
        assert_eq!(z.a.count_ones(), 0);
        assert_eq!(z.ell_actual, 0);
        assert_eq!(random_instance(12, 1.0, 1.0, 3).ell_actual, 144);
    }

    #[test]
    fn random_density_matches_brute_force() {
        let inst = random_instance(16, 0.1, 0.1, 7);
        let c = brute_force_product(&inst.a, &inst.b).unwrap();
        assert_eq!(inst.ell_actual, c.count_ones());
        assert_eq!(product_ones(&inst.a, &inst.b), inst.ell_actual);
    }

    #[test]
    fn target_extremes_are_exact() {
        let z = instance_with_target_ell(10, 0, 1).unwrap();
        assert_eq!((z.a.count_ones(), z.ell_actual), (0, 0));
        assert_eq!(instance_with_target_ell(10, 100, 1).unwrap().ell_actual, 100);
    }

    #[test]
    fn target_lands_in_window() {
        let inst = instance_with_target_ell(32, 64, 5).unwrap();
        assert!((32..=128).contains(&inst.ell_actual), "{}", inst.ell_actual);
    }

    #[test]
    fn threshold_examples() {
        let t = threshold_instance(16, 30, 1);
        assert_eq!(brute_force_product(&t.a, &t.b).unwrap().count_ones(), 30);
        assert_eq!(t.ell_actual, 30);
        assert_eq!(threshold_instance(4, 0, 1).b.count_ones(), 0);
        assert_eq!(threshold_instance(4, 16, 1).b, BooleanMatrix::ones(4));
    }

    #[test]
    fn single_witness_shapes() {
        // Oracle: every factor pair within the box.
        for n in [1, 5, 16] {
            for target in 0..=n * n {
                let best = (1..=n)
                    .flat_map(|r| (1..=n).map(move |c| r * c))
                    .filter(|&p| p <= target)
                    .max()
                    .unwrap_or(0);
                let (r, c) = witness_block_shape(n, target);
                assert_eq!(r * c, best, "n {n} target {target}");
            }
        }
        let one = single_witness_instance(16, 1, 2);
        assert_eq!((one.a.count_ones(), one.b.count_ones(), one.ell_actual), (1, 1, 1));
        assert_eq!(single_witness_instance(8, 64, 2).ell_actual, 64);
        // 50 = 5 * 10 fits in a 16 x 16 box.
        assert_eq!(single_witness_instance(16, 50, 9).ell_actual, 50);
    }

    #[test]
    fn generators_are_reproducible() {
        for family in Family::ALL {
            let x = generate(family, 20, 60, 11).unwrap();
            let y = generate(family, 20, 60, 11).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn gc_samples_respect_shape() {
        let g = gc_sample(20, 35, 3, 0.5, 0.5, 4);
        assert_eq!(g.c_tilde.count_ones(), 35);
        assert_eq!((1..=20).filter(|&i| g.c_tilde.row_ones(i) > 0).count(), 3);
        assert!((2..=20).all(|k| (1..=20).all(|i| !g.a.get(i, k) && !g.b.get(k, i))));
        assert_eq!(g, gc_sample(20, 35, 3, 0.5, 0.5, 4));
        let (a, b) = side_matrices(&[true, false], &[false, true]);
        assert!(a.get(1, 1) && !a.get(2, 1) && b.get(1, 2) && !b.get(1, 1));
    }

    #[test]
    fn family_names_round_trip() {
        for family in Family::ALL {
            assert_eq!(family.as_str().parse::<Family>().unwrap(), family);
        }
        assert!("dense".parse::<Family>().is_err());
    }
}
