//! Randomized falsification campaigns: generate perfect-polytope
//! instances, run the decision procedure and the full solver against the
//! brute-force oracle, and persist a standalone reproducer for every
//! disagreement. Campaigns never assert the underlying equivalence claims;
//! they measure them.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::criterion::Verdict;
use crate::exact::{Matrix, Rational};
use crate::instance::{check_perfect, unit_cube, DbpInstance};
use crate::oracle::{oracle_subset_cached, oracle_value_cached, OracleError, VertexCache};
use crate::reductions::{reduce_boolean_feasibility, reduce_plcp, BooleanSystem, Piece, PlcpProblem};
use crate::solver::{decide_subset, solve, SolveError, SolveMode, SolveOptions};

/// SplitMix64: a fixed, documented generator so identical seeds replicate
/// byte-for-byte across machines and toolchains.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform-ish integer in `[lo, hi]` (modulo reduction; the tiny bias
    /// is irrelevant for fuzzing).
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let width = (hi - lo + 1) as u64;
        lo + (self.next_u64() % width) as i64
    }

    pub fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        self.int_in(lo as i64, hi as i64) as usize
    }
}

/// Derives the per-instance stream: instances are independent of worker
/// scheduling because each index seeds its own generator.
fn instance_rng(seed: u64, index: usize) -> SplitMix64 {
    let mut mixer = SplitMix64::new(seed ^ (index as u64).wrapping_mul(0x9e3779b97f4a7c15));
    let s = mixer.next_u64();
    SplitMix64::new(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cube,
    Simplex,
    StepDiagonal,
    Boolean,
    Plcp,
}

/// Inclusive `[lo, hi]` ranges for the generated dimensions. The boolean
/// and plcp families derive `m` and `p` from their reductions and use the
/// `m` range for the piece-group count.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub n: (usize, usize),
    pub m: (usize, usize),
    pub q: (usize, usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub count: usize,
    pub dims: Dims,
    pub coefficient_bound: i64,
    pub family: Family,
    pub h_probes_per_instance: usize,
}

impl CampaignConfig {
    pub fn check(&self) -> Result<(), HarnessError> {
        let ok_range = |(lo, hi): (usize, usize)| lo >= 1 && lo <= hi;
        if !ok_range(self.dims.n) || !ok_range(self.dims.m) || !ok_range(self.dims.q) {
            return Err(HarnessError::Config("dimension ranges must be nonempty".into()));
        }
        if self.coefficient_bound < 1 {
            return Err(HarnessError::Config("coefficient_bound must be >= 1".into()));
        }
        // the oracle enumerates C(p, m) subsystems per instance
        let m = self.dims.m.1;
        let p = match self.family {
            Family::Cube | Family::Boolean => 2 * m.max(self.dims.n.1),
            Family::Simplex => m + 1,
            Family::StepDiagonal | Family::Plcp => 3 * m + 1,
        };
        if binomial(p, m.max(self.dims.n.1)) > 10_000 {
            return Err(HarnessError::Config(format!(
                "dims too large for the brute-force oracle: C({p}, {m}) exceeds 10^4"
            )));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<CampaignConfig, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > 1_000_000 {
            return acc;
        }
    }
    acc
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("bad campaign config: {0}")]
    Config(String),
    #[error("instance generation failed at index {index}: {detail}")]
    Generation { index: usize, detail: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("artifact io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictRow {
    pub instance_hash: String,
    pub h: Rational,
    pub algorithm1_verdict: Verdict,
    pub oracle_verdict: Verdict,
    pub mode: SolveMode,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverRow {
    pub instance_hash: String,
    pub h_star: Rational,
    pub oracle_z: Rational,
    pub mode: SolveMode,
    pub agree: bool,
    pub solver_discrepancy: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub instances: usize,
    pub probes: usize,
    pub probe_agreements: usize,
    pub probe_disagreements: usize,
    pub solver_agreements: usize,
    pub solver_disagreements: usize,
    pub criterion_escape_confirmed: usize,
    pub criterion_escape_unconfirmed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub rows: Vec<VerdictRow>,
    pub solver_rows: Vec<SolverRow>,
    pub summary: Summary,
    pub discrepancy_files: Vec<String>,
}

impl CampaignReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("campaign report serialization")
    }
}

/// A standalone record of one disagreement: the instance, the probe, and
/// both recorded answers. Loading it and rerunning the recorded command
/// must reproduce the recorded values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reproducer {
    SubsetDisagreement {
        instance: DbpInstance,
        h: Rational,
        algorithm1_verdict: Verdict,
        oracle_verdict: Verdict,
        mode: SolveMode,
    },
    SolveDisagreement {
        instance: DbpInstance,
        h_star: Rational,
        oracle_z: Rational,
        mode: SolveMode,
    },
}

/// Reruns a reproducer; `true` when the recorded disagreement reproduces
/// exactly (same verdicts or same values on both sides).
pub fn rerun_reproducer(rep: &Reproducer) -> Result<bool, HarnessError> {
    match rep {
        Reproducer::SubsetDisagreement {
            instance,
            h,
            algorithm1_verdict,
            oracle_verdict,
            ..
        } => {
            let cache = VertexCache::new();
            let decision = decide_subset(instance, h)?;
            let inside = oracle_subset_cached(instance, h, &cache)?;
            let oracle_now = if inside {
                Verdict::Subset
            } else {
                Verdict::NotSubset
            };
            Ok(decision.verdict == *algorithm1_verdict
                && oracle_now == *oracle_verdict
                && decision.verdict != oracle_now)
        }
        Reproducer::SolveDisagreement {
            instance,
            h_star,
            oracle_z,
            ..
        } => {
            let cache = VertexCache::new();
            let result = solve(instance, &SolveOptions::default())?;
            let oracle = oracle_value_cached(instance, &cache)?;
            let raw = oracle.z_star_raw(instance);
            Ok(result.h_star == *h_star && raw == *oracle_z && result.h_star != raw)
        }
    }
}

fn random_x_side(
    rng: &mut SplitMix64,
    n: usize,
    q: usize,
    bound: i64,
) -> (Matrix, Vec<Rational>) {
    let mut rows = vec![];
    let mut rhs = vec![];
    for _ in 0..q {
        rows.push(
            (0..n)
                .map(|_| Rational::from_int(rng.int_in(-bound, bound)))
                .collect::<Vec<_>>(),
        );
        // nonnegative right side keeps the origin feasible
        rhs.push(Rational::from_int(rng.int_in(0, bound)));
    }
    for j in 0..n {
        let mut row = vec![Rational::zero(); n];
        row[j] = Rational::one();
        rows.push(row);
        rhs.push(Rational::from_int(rng.int_in(1, bound)));
    }
    (Matrix::from_rows(rows), rhs)
}

fn random_objective(
    rng: &mut SplitMix64,
    n: usize,
    m: usize,
    bound: i64,
) -> (Matrix, Vec<Rational>, Vec<Rational>) {
    let mut c = Matrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            c[(i, j)] = Rational::from_int(rng.int_in(-bound, bound));
        }
    }
    let g = (0..n)
        .map(|_| Rational::from_int(rng.int_in(-bound, bound)))
        .collect();
    let e = (0..m)
        .map(|_| Rational::from_int(rng.int_in(-bound, bound)))
        .collect();
    (c, g, e)
}

/// Simplex polytope `{y >= 0, sum y <= 1}` as rows.
fn simplex_rows(m: usize) -> (Matrix, Vec<Rational>) {
    let mut rows = vec![vec![Rational::one(); m]];
    let mut rhs = vec![Rational::one()];
    for j in 0..m {
        let mut row = vec![Rational::zero(); m];
        row[j] = -&Rational::one();
        rows.push(row);
        rhs.push(Rational::zero());
    }
    (Matrix::from_rows(rows), rhs)
}

/// Step-diagonal polytope: a product of simplices over a random partition
/// of the m coordinates.
fn step_diagonal_rows(rng: &mut SplitMix64, m: usize) -> (Matrix, Vec<Rational>) {
    let mut groups: Vec<Vec<usize>> = vec![];
    let mut current = vec![];
    for j in 0..m {
        current.push(j);
        if rng.int_in(0, 1) == 1 || j == m - 1 {
            groups.push(std::mem::take(&mut current));
        }
    }
    let mut rows = vec![];
    let mut rhs = vec![];
    for group in &groups {
        let mut row = vec![Rational::zero(); m];
        for &j in group {
            row[j] = Rational::one();
        }
        rows.push(row);
        rhs.push(Rational::one());
    }
    for j in 0..m {
        let mut row = vec![Rational::zero(); m];
        row[j] = -&Rational::one();
        rows.push(row);
        rhs.push(Rational::zero());
    }
    (Matrix::from_rows(rows), rhs)
}

/// Deterministically generates the instance for `index`; families are
/// perfect by construction and nonempty-bounded on the X side.
pub fn generate_instance(cfg: &CampaignConfig, index: usize) -> Result<DbpInstance, HarnessError> {
    let rng = &mut instance_rng(cfg.seed, index);
    let bound = cfg.coefficient_bound;
    let n = rng.usize_in(cfg.dims.n.0, cfg.dims.n.1);
    let m = rng.usize_in(cfg.dims.m.0, cfg.dims.m.1);
    let q = rng.usize_in(cfg.dims.q.0, cfg.dims.q.1);
    let inst = match cfg.family {
        Family::Cube | Family::Simplex | Family::StepDiagonal => {
            let (d, d_rhs) = match cfg.family {
                Family::Cube => unit_cube(m),
                Family::Simplex => simplex_rows(m),
                _ => step_diagonal_rows(rng, m),
            };
            let (a, a_rhs) = random_x_side(rng, n, q, bound);
            let (c, g, e) = random_objective(rng, n, m, bound);
            DbpInstance {
                n,
                m,
                q: a.rows(),
                p: d.rows(),
                c,
                a,
                a_rhs,
                g,
                e,
                d,
                d_rhs,
                z_offset: Rational::zero(),
            }
        }
        Family::Boolean => {
            let mut attempt = 0;
            loop {
                let rows: Vec<Vec<Rational>> = (0..q)
                    .map(|_| {
                        (0..n)
                            .map(|_| Rational::from_int(rng.int_in(-bound, bound)))
                            .collect()
                    })
                    .collect();
                let rhs: Vec<Rational> = (0..q)
                    .map(|_| Rational::from_int(rng.int_in(-bound, bound)))
                    .collect();
                let bs = BooleanSystem::new(n, Matrix::from_rows(rows), rhs)
                    .map_err(|e| HarnessError::Generation {
                        index,
                        detail: e.to_string(),
                    })?;
                let inst = reduce_boolean_feasibility(&bs);
                if inst.validate().is_ok() {
                    break inst;
                }
                attempt += 1;
                if attempt > 50 {
                    // give up on this stream and fall back to a trivially
                    // satisfiable system
                    let bs = BooleanSystem::new(
                        n,
                        Matrix::zeros(1, n),
                        vec![Rational::from_int(bound)],
                    )
                    .map_err(|e| HarnessError::Generation {
                        index,
                        detail: e.to_string(),
                    })?;
                    break reduce_boolean_feasibility(&bs);
                }
            }
        }
        Family::Plcp => {
            let groups = rng.usize_in(cfg.dims.m.0.min(2), cfg.dims.m.1.clamp(1, 2));
            let pieces: Vec<Vec<Piece>> = (0..groups)
                .map(|_| {
                    let count = rng.usize_in(2, 3);
                    (0..count)
                        .map(|_| Piece {
                            c: (0..n)
                                .map(|_| Rational::from_int(rng.int_in(-bound, bound)))
                                .collect(),
                            c0: Rational::from_int(rng.int_in(-bound, bound)),
                        })
                        .collect()
                })
                .collect();
            let (a, a_rhs) = random_x_side(rng, n, q, bound);
            let pp = PlcpProblem {
                n,
                a,
                a_rhs,
                pieces,
            };
            reduce_plcp(&pp).map_err(|e| HarnessError::Generation {
                index,
                detail: e.to_string(),
            })?
        }
    };
    inst.validate().map_err(|e| HarnessError::Generation {
        index,
        detail: format!("generated instance invalid: {e}"),
    })?;
    let report = check_perfect(&inst.d, &inst.d_rhs).map_err(|e| HarnessError::Generation {
        index,
        detail: format!("rank check failed: {e}"),
    })?;
    if !report.is_perfect {
        return Err(HarnessError::Generation {
            index,
            detail: format!(
                "generated polytope not perfect: {} violation(s)",
                report.violations.len()
            ),
        });
    }
    Ok(inst)
}

struct InstanceRun {
    rows: Vec<VerdictRow>,
    solver_row: SolverRow,
    reproducers: Vec<Reproducer>,
}

fn run_instance(cfg: &CampaignConfig, index: usize) -> Result<InstanceRun, HarnessError> {
    let inst = generate_instance(cfg, index)?;
    let hash = format!("{:016x}", inst.content_hash());
    let cache = VertexCache::new();
    let oracle = oracle_value_cached(&inst, &cache)?;
    let raw = oracle.z_star_raw(&inst);

    // probe the boundary hard: the criterion's truth is most fragile at
    // the flip point
    let mut probes = vec![
        &raw - &Rational::from_int(1),
        &raw - &Rational::ratio(1, 2),
        raw.clone(),
        &raw + &Rational::ratio(1, 2),
        &raw + &Rational::from_int(1),
    ];
    let rng = &mut instance_rng(cfg.seed ^ 0x5eed, index);
    for _ in 0..cfg.h_probes_per_instance {
        let num = rng.int_in(-2 * cfg.coefficient_bound, 2 * cfg.coefficient_bound);
        let den = rng.int_in(1, 4);
        probes.push(&raw + &Rational::ratio(num, den));
    }

    let mut rows = vec![];
    let mut reproducers = vec![];
    for h in probes {
        let decision = decide_subset(&inst, &h)?;
        let inside = oracle_subset_cached(&inst, &h, &cache)?;
        let oracle_verdict = if inside {
            Verdict::Subset
        } else {
            Verdict::NotSubset
        };
        let agree = decision.verdict == oracle_verdict;
        if !agree {
            reproducers.push(Reproducer::SubsetDisagreement {
                instance: inst.clone(),
                h: h.clone(),
                algorithm1_verdict: decision.verdict,
                oracle_verdict,
                mode: decision.mode,
            });
        }
        rows.push(VerdictRow {
            instance_hash: hash.clone(),
            h,
            algorithm1_verdict: decision.verdict,
            oracle_verdict,
            mode: decision.mode,
            agree,
        });
    }

    let result = solve(&inst, &SolveOptions::default())?;
    let agree = result.h_star == raw;
    if !agree || result.discrepancy.is_some() {
        reproducers.push(Reproducer::SolveDisagreement {
            instance: inst.clone(),
            h_star: result.h_star.clone(),
            oracle_z: raw.clone(),
            mode: result.mode,
        });
    }
    let solver_row = SolverRow {
        instance_hash: hash,
        h_star: result.h_star,
        oracle_z: raw,
        mode: result.mode,
        agree,
        solver_discrepancy: result.discrepancy,
    };
    Ok(InstanceRun {
        rows,
        solver_row,
        reproducers,
    })
}

/// Runs the campaign. Deterministic given `(seed, config)`: per-instance
/// generators make the result independent of worker scheduling, and rows
/// are emitted in instance order. Reproducer files land in `out_dir`
/// when given.
pub fn fuzz_campaign(
    cfg: &CampaignConfig,
    out_dir: Option<&Path>,
) -> Result<CampaignReport, HarnessError> {
    cfg.check()?;
    let results: Mutex<Vec<(usize, Result<InstanceRun, HarnessError>)>> =
        Mutex::new(Vec::with_capacity(cfg.count));
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1)
        .min(8)
        .min(cfg.count.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= cfg.count {
                    break;
                }
                let run = run_instance(cfg, idx);
                results.lock().unwrap().push((idx, run));
            });
        }
    });
    let mut runs = results.into_inner().unwrap();
    runs.sort_by_key(|(idx, _)| *idx);

    let mut rows = vec![];
    let mut solver_rows = vec![];
    let mut discrepancy_files = vec![];
    let mut summary = Summary {
        instances: cfg.count,
        probes: 0,
        probe_agreements: 0,
        probe_disagreements: 0,
        solver_agreements: 0,
        solver_disagreements: 0,
        criterion_escape_confirmed: 0,
        criterion_escape_unconfirmed: 0,
    };
    let mut seq = 0usize;
    for (idx, run) in runs {
        let run = run?;
        for row in &run.rows {
            summary.probes += 1;
            if row.agree {
                summary.probe_agreements += 1;
            } else {
                summary.probe_disagreements += 1;
            }
            if row.algorithm1_verdict == Verdict::NotSubset {
                if row.oracle_verdict == Verdict::NotSubset {
                    summary.criterion_escape_confirmed += 1;
                } else {
                    summary.criterion_escape_unconfirmed += 1;
                }
            }
        }
        if run.solver_row.agree {
            summary.solver_agreements += 1;
        } else {
            summary.solver_disagreements += 1;
        }
        for rep in &run.reproducers {
            let name = format!("repro-{:04}-{:03}.json", idx, seq);
            seq += 1;
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(dir)?;
                let path: PathBuf = dir.join(&name);
                std::fs::write(&path, serde_json::to_string_pretty(rep).expect("reproducer"))?;
            }
            discrepancy_files.push(name);
        }
        rows.extend(run.rows);
        solver_rows.push(run.solver_row);
    }
    Ok(CampaignReport {
        config: cfg.clone(),
        rows,
        solver_rows,
        summary,
        discrepancy_files,
    })
}
