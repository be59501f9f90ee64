//! Batch evaluation over a generated suite: per-instance bounds, heuristic
//! sizes at several trial budgets, and (unless disabled) exact optima; plus
//! an aggregate CSV with the share of instances each method solved
//! optimally.

use crate::util::{self, EXIT_OK};
use bitrect::benchgen::{Family, ManifestRecord};
use bitrect::bounds::real_rank;
use bitrect::heuristics::{row_packing_sizes_at, trivial_partition};
use bitrect::sap::{self, SolveConfig, SolveStatus};
use bitrect::BinaryMatrix;
use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const TRIAL_BUDGETS: [usize; 4] = [1, 10, 100, 1000];

#[derive(Args)]
pub struct EvalArgs {
    /// Suite directory containing `manifest.jsonl` and the `.bm` files
    pub suite: PathBuf,
    /// Output directory for `records.jsonl` and `summary.csv` (default:
    /// the suite directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for per-instance evaluation
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Skip exact solving; optimality is then credited only when a
    /// heuristic meets the real rank (or the planted optimum is known)
    #[arg(long)]
    pub no_exact: bool,
    /// Per-instance exact time limit in seconds; 0 means unlimited
    #[arg(long, default_value_t = 0.0)]
    pub time_limit: f64,
    /// Overall wall-clock cap in seconds; on expiry, finished records are
    /// still flushed. 0 means unlimited
    #[arg(long, default_value_t = 0.0)]
    pub max_time: f64,
    /// Warm-start trials for the exact solver
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RpSize {
    pub trials: usize,
    pub size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub family: Family,
    pub rows: usize,
    pub cols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub real_rank: usize,
    pub trivial_size: usize,
    pub rp_sizes: Vec<RpSize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_optimal: Option<usize>,
    /// The certified minimum partition count, when established by the
    /// planted construction, the rank floor, or an exact solve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_size: Option<usize>,
    /// Wall-clock diagnostics; excluded from byte-stability guarantees.
    pub wall_ms: f64,
}

impl EvalRecord {
    /// Table row this instance aggregates into.
    pub fn group(&self) -> String {
        match self.family {
            Family::Random => format!("rand-{}x{}", self.rows, self.cols),
            Family::Planted => format!("opt-{}x{}", self.rows, self.cols),
            Family::Gap => format!("gap-{}x{}-k{}", self.rows, self.cols, self.k.unwrap_or(0)),
        }
    }

    pub fn rp_size(&self, trials: usize) -> Option<usize> {
        self.rp_sizes
            .iter()
            .find(|r| r.trials == trials)
            .map(|r| r.size)
    }
}

pub fn evaluate_instance(
    record: &ManifestRecord,
    matrix: &BinaryMatrix,
    no_exact: bool,
    time_limit: f64,
    trials: usize,
) -> Result<EvalRecord, bitrect::Error> {
    let started = Instant::now();
    let rank = real_rank(matrix);
    let trivial_size = trivial_partition(matrix)?.len();
    let sizes = row_packing_sizes_at(matrix, &TRIAL_BUDGETS, record.seed)?;
    let rp_sizes: Vec<RpSize> = TRIAL_BUDGETS
        .iter()
        .zip(&sizes)
        .map(|(&trials, &size)| RpSize { trials, size })
        .collect();
    let best_heuristic = sizes.iter().copied().min().unwrap_or(trivial_size);
    let (exact_size, exact_status) = if no_exact {
        (None, None)
    } else {
        let config = SolveConfig {
            trials,
            seed: record.seed,
            time_limit: util::seconds_to_limit(time_limit),
            ..SolveConfig::default()
        };
        let result = sap::solve(matrix, &config)?;
        let status = match result.status {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
        };
        (Some(result.partition.len()), Some(status.to_string()))
    };
    let optimal_size = if let Some(k) = record.known_optimal {
        Some(k)
    } else if exact_status.as_deref() == Some("optimal") {
        exact_size
    } else if best_heuristic == rank {
        Some(rank)
    } else {
        None
    };
    Ok(EvalRecord {
        id: record.id.clone(),
        family: record.family,
        rows: record.rows,
        cols: record.cols,
        p: record.p,
        k: record.k,
        real_rank: rank,
        trivial_size,
        rp_sizes,
        exact_size,
        exact_status,
        known_optimal: record.known_optimal,
        optimal_size,
        wall_ms: started.elapsed().as_secs_f64() * 1000.0,
    })
}

/// Aggregates records into one CSV row per benchmark group, preserving
/// first-appearance order. Percentages are over all instances of the
/// group; an instance with no certified optimum counts as not optimal.
pub fn summarize(records: &[EvalRecord]) -> String {
    let mut csv = String::from(
        "benchmark,pct_rank_equal,pct_trivial_opt,pct_rp_opt_1,pct_rp_opt_10,pct_rp_opt_100,pct_rp_opt_1000\n",
    );
    let mut groups: Vec<String> = Vec::new();
    for r in records {
        let g = r.group();
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    for group in groups {
        let members: Vec<&EvalRecord> = records.iter().filter(|r| r.group() == group).collect();
        let total = members.len() as f64;
        let pct = |count: usize| 100.0 * count as f64 / total;
        let rank_equal = members
            .iter()
            .filter(|r| r.optimal_size == Some(r.real_rank))
            .count();
        let trivial_opt = members
            .iter()
            .filter(|r| r.optimal_size.is_some_and(|o| r.trivial_size == o))
            .count();
        let mut row = format!(
            "{group},{:.1},{:.1}",
            pct(rank_equal),
            pct(trivial_opt)
        );
        for trials in TRIAL_BUDGETS {
            let hits = members
                .iter()
                .filter(|r| {
                    r.optimal_size
                        .is_some_and(|o| r.rp_size(trials) == Some(o))
                })
                .count();
            row.push_str(&format!(",{:.1}", pct(hits)));
        }
        csv.push_str(&row);
        csv.push('\n');
    }
    csv
}

pub fn load_manifest(suite: &Path) -> Result<Vec<ManifestRecord>, String> {
    let manifest_path = suite.join("manifest.jsonl");
    let text = std::fs::read_to_string(&manifest_path)
        .map_err(|e| format!("reading {}: {e}", manifest_path.display()))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ManifestRecord = serde_json::from_str(line)
            .map_err(|e| format!("manifest line {}: {e}", lineno + 1))?;
        records.push(record);
    }
    Ok(records)
}

pub fn run(args: &EvalArgs) -> u8 {
    let manifest = match load_manifest(&args.suite) {
        Ok(m) => m,
        Err(e) => return util::input_error("eval", e),
    };
    let out_dir = args.out.clone().unwrap_or_else(|| args.suite.clone());
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return util::input_error(&format!("creating {}", out_dir.display()), e);
    }
    let deadline = util::seconds_to_limit(args.max_time).map(|d| Instant::now() + d);
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
    {
        Ok(p) => p,
        Err(e) => return util::input_error("thread pool", e),
    };
    let results: Vec<(usize, Result<EvalRecord, String>)> = pool.install(|| {
        use rayon::prelude::*;
        manifest
            .par_iter()
            .enumerate()
            .filter(|_| deadline.is_none_or(|d| Instant::now() < d))
            .map(|(index, record)| {
                let path = args.suite.join(&record.path);
                let outcome = std::fs::read_to_string(&path)
                    .map_err(|e| format!("reading {}: {e}", path.display()))
                    .and_then(|text| {
                        BinaryMatrix::parse(&text)
                            .map_err(|e| format!("parsing {}: {e}", path.display()))
                    })
                    .and_then(|matrix| {
                        evaluate_instance(
                            record,
                            &matrix,
                            args.no_exact,
                            args.time_limit,
                            args.trials,
                        )
                        .map_err(|e| format!("evaluating {}: {e}", record.id))
                    });
                (index, outcome)
            })
            .collect()
    });
    let mut finished: Vec<EvalRecord> = Vec::new();
    for (_, outcome) in results {
        match outcome {
            Ok(record) => finished.push(record),
            Err(e) => return util::input_error("eval", e),
        }
    }
    finished.sort_by(|a, b| a.id.cmp(&b.id));
    let records = finished;
    if records.len() < manifest.len() {
        eprintln!(
            "time limit: evaluated {} of {} instances",
            records.len(),
            manifest.len()
        );
    }
    let mut jsonl = String::new();
    for record in &records {
        jsonl.push_str(&serde_json::to_string(record).expect("record serializes"));
        jsonl.push('\n');
    }
    let records_path = out_dir.join("records.jsonl");
    if let Err(e) = std::fs::write(&records_path, jsonl) {
        return util::input_error(&format!("writing {}", records_path.display()), e);
    }
    let csv = summarize(&records);
    let csv_path = out_dir.join("summary.csv");
    if let Err(e) = std::fs::write(&csv_path, &csv) {
        return util::input_error(&format!("writing {}", csv_path.display()), e);
    }
    print!("{csv}");
    EXIT_OK
}
