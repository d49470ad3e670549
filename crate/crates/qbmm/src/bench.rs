//! Benchmark sweeps over (family, n, l-target, seed) and their CSV form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use qbmm_core::bmm::{bmm, cost_bound, verify, DEFAULT_C_FIT, DEFAULT_K_LOG};
use qbmm_core::instances::{generate, Family};
use qbmm_core::search::{Mode, SearchConfig, DEFAULT_C_REP};
use rayon::prelude::*;

use crate::format::{instance_file_names, write_matrix_file, FormatError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Column order of the bench CSV. Guarded by a golden test.
pub const CSV_HEADER: &str = "n,family,seed,mode,ell_actual,witnesses,queries_A,queries_B,queries_total,bound,within_bound,correct,failure_budget,wall_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub family: String,
    pub seed: u64,
    pub mode: String,
    pub ell_actual: usize,
    pub witnesses: usize,
    #[serde(rename = "queries_A")]
    pub queries_a: u64,
    #[serde(rename = "queries_B")]
    pub queries_b: u64,
    pub queries_total: u64,
    pub bound: f64,
    pub within_bound: bool,
    pub correct: bool,
    pub failure_budget: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad l target `{0}` (expected an integer or [coef]n[^exp], e.g. 64, n, n^1.5, 0.25n^2)")]
    BadTarget(String),
    #[error("empty {0} list")]
    EmptyList(&'static str),
    #[error("instance dumps need exactly one l target, got {0}")]
    DumpTargets(usize),
}

/// An output-density target, absolute or scaled with `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllTarget {
    Absolute(usize),
    /// `coef * n^exp`, rounded and clamped to `[0, n^2]`.
    Scaled { coef: f64, exp: f64 },
}

impl EllTarget {
    pub fn resolve(&self, n: usize) -> usize {
        let raw = match *self {
            EllTarget::Absolute(v) => v as f64,
            EllTarget::Scaled { coef, exp } => coef * (n as f64).powf(exp),
        };
        (raw.round().max(0.0) as usize).min(n * n)
    }
}

impl FromStr for EllTarget {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BenchError::BadTarget(s.to_string());
        let s = s.trim();
        if let Ok(v) = s.parse::<usize>() {
            return Ok(EllTarget::Absolute(v));
        }
        let (coef, rest) = s.split_once('n').ok_or_else(bad)?;
        let coef = if coef.is_empty() {
            1.0
        } else {
            coef.trim_end_matches('*').parse::<f64>().map_err(|_| bad())?
        };
        let exp = match rest {
            "" => 1.0,
            r => r
                .strip_prefix('^')
                .and_then(|e| e.parse::<f64>().ok())
                .ok_or_else(bad)?,
        };
        if !(coef.is_finite() && exp.is_finite()) || coef < 0.0 {
            return Err(bad());
        }
        Ok(EllTarget::Scaled { coef, exp })
    }
}

impl fmt::Display for EllTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllTarget::Absolute(v) => write!(f, "{v}"),
            EllTarget::Scaled { coef, exp } => write!(f, "{coef}n^{exp}"),
        }
    }
}

/// Seeds per cell of [`BenchPlan::calibration`].
pub const CALIBRATION_SEEDS: u64 = 200;

/// Cost-envelope constants used for the `bound` column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub c_fit: f64,
    pub k_log: f64,
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope {
            c_fit: DEFAULT_C_FIT,
            k_log: DEFAULT_K_LOG,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub families: Vec<Family>,
    pub ns: Vec<usize>,
    pub ells: Vec<EllTarget>,
    pub seeds: Vec<u64>,
    pub mode: Mode,
    pub c_rep: f64,
    pub envelope: Envelope,
    pub jobs: usize,
}

impl BenchPlan {
    /// `n` in {16..256} doubling, five targets from 1 to n^2, ten seeds, random family.
    pub fn default_sweep(mode: Mode) -> Self {
        BenchPlan {
            families: vec![Family::Random],
            ns: vec![16, 32, 64, 128, 256],
            ells: ["1", "n", "n^1.5", "0.25n^2", "n^2"]
                .iter()
                .map(|s| s.parse().expect("valid target"))
                .collect(),
            seeds: (0..10).collect(),
            mode,
            c_rep: DEFAULT_C_REP,
            envelope: Envelope::default(),
            jobs: 0,
        }
    }

    /// The calibration plan behind the frozen envelope constants: every
    /// family, `n` in {8, 16}, the default targets and 200 seeds.
    pub fn calibration(mode: Mode) -> Self {
        BenchPlan {
            families: Family::ALL.to_vec(),
            ns: vec![8, 16],
            seeds: (0..CALIBRATION_SEEDS).collect(),
            ..BenchPlan::default_sweep(mode)
        }
    }

    /// Cells in deterministic order: family, n, target, seed.
    pub fn cells(&self) -> Vec<(Family, usize, EllTarget, u64)> {
        let mut out = Vec::new();
        for &family in &self.families {
            for &n in &self.ns {
                for &ell in &self.ells {
                    for &seed in &self.seeds {
                        out.push((family, n, ell, seed));
                    }
                }
            }
        }
        out
    }

    fn check(&self) -> Result<(), BenchError> {
        for (name, empty) in [
            ("family", self.families.is_empty()),
            ("n", self.ns.is_empty()),
            ("ell", self.ells.is_empty()),
            ("seed", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(BenchError::EmptyList(name));
            }
        }
        Ok(())
    }
}

/// Generates one instance, runs the multiplication and measures it.
pub fn run_cell(
    family: Family,
    n: usize,
    target: usize,
    seed: u64,
    cfg: SearchConfig,
    envelope: Envelope,
) -> BenchRow {
    let inst = generate(family, n, target, seed).unwrap_or_else(|miss| miss.closest);
    let start = Instant::now();
    let (c, report) = bmm(&inst.a, &inst.b, cfg).expect("generated pair shares a dimension");
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let queries_total = report.queries_total();
    let bound = cost_bound(n, inst.ell_actual, envelope.c_fit, envelope.k_log);
    BenchRow {
        n,
        family: family.to_string(),
        seed,
        mode: cfg.mode.as_str().to_string(),
        ell_actual: inst.ell_actual,
        witnesses: report.witnesses,
        queries_a: report.queries_a,
        queries_b: report.queries_b,
        queries_total,
        bound,
        within_bound: queries_total as f64 <= bound,
        correct: verify(&inst.a, &inst.b, &c),
        failure_budget: report.accumulated_failure_bound,
        wall_ms,
    }
}

/// Runs every cell of `plan`; rows come back in [`BenchPlan::cells`] order.
pub fn run_plan(plan: &BenchPlan) -> Result<Vec<BenchRow>, BenchError> {
    plan.check()?;
    let cells = plan.cells();
    let work = |&(family, n, ell, seed): &(Family, usize, EllTarget, u64)| {
        let cfg = SearchConfig {
            mode: plan.mode,
            c_rep: plan.c_rep,
            rng_seed: seed,
            ..SearchConfig::default()
        };
        run_cell(family, n, ell.resolve(n), seed, cfg, plan.envelope)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .expect("thread pool");
    Ok(pool.install(|| cells.par_iter().map(work).collect()))
}

/// Writes the `A` and `B` files of every cell of `plan` into `dir`. File names
/// carry family, `n` and seed only, so the plan must have a single target.
pub fn dump_instances(plan: &BenchPlan, dir: &Path) -> Result<usize, BenchError> {
    plan.check()?;
    if plan.ells.len() != 1 {
        return Err(BenchError::DumpTargets(plan.ells.len()));
    }
    let io = |source| BenchError::Io {
        path: dir.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let cells = plan.cells();
    for &(family, n, ell, seed) in &cells {
        let inst = generate(family, n, ell.resolve(n), seed).unwrap_or_else(|miss| miss.closest);
        let (name_a, name_b) = instance_file_names(family.as_str(), n, seed);
        for (name, m) in [(name_a, &inst.a), (name_b, &inst.b)] {
            write_matrix_file(&dir.join(name), m).map_err(|e| match e {
                FormatError::Io { path, source } => BenchError::Io { path, source },
                FormatError::Parse { .. } => unreachable!("writing never parses"),
            })?;
        }
    }
    Ok(cells.len())
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[BenchRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[BenchRow]) -> Result<(), BenchError> {
    let file = std::fs::File::create(path).map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_csv(std::io::BufWriter::new(file), rows)
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRow>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

pub fn read_csv_file(path: &Path) -> Result<Vec<BenchRow>, BenchError> {
    let file = std::fs::File::open(path).map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_header() {
        let mut buf = Vec::new();
        let row = run_cell(
            Family::Random,
            8,
            8,
            0,
            SearchConfig::forced(0),
            Envelope::default(),
        );
        write_csv(&mut buf, std::slice::from_ref(&row)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 1);
        assert_eq!(read_csv(text.as_bytes()).unwrap(), vec![row]);
    }

    #[test]
    fn empty_csv_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER);
    }

    #[test]
    fn target_grammar() {
        let t = |s: &str| s.parse::<EllTarget>().unwrap().resolve(16);
        assert_eq!(t("64"), 64);
        assert_eq!(t("n"), 16);
        assert_eq!(t("n^1.5"), 64);
        assert_eq!(t("0.25n^2"), 64);
        assert_eq!(t("2*n"), 32);
        assert_eq!(t("n^3"), 256);
        assert_eq!(t("100000"), 256);
        for bad in ["", "m", "n^", "-1n", "n^x", "1.5"] {
            assert!(bad.parse::<EllTarget>().is_err(), "{bad}");
        }
    }

    #[test]
    fn row_invariants_hold() {
        let row = run_cell(
            Family::SingleWitness,
            16,
            40,
            3,
            SearchConfig::faithful(3),
            Envelope::default(),
        );
        assert_eq!(row.queries_total, row.queries_a + row.queries_b);
        assert_eq!(row.within_bound, row.queries_total as f64 <= row.bound);
        assert_eq!(row.ell_actual, 40);
    }

    #[test]
    fn empty_lists_rejected() {
        let mut plan = BenchPlan::default_sweep(Mode::ForcedSuccess);
        plan.seeds.clear();
        assert!(matches!(run_plan(&plan), Err(BenchError::EmptyList("seed"))));
    }
}
