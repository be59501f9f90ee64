use crate::util::{self, EXIT_OK, EXIT_TIME};
use bitrect::bounds::real_rank;
use bitrect::exact::SmtEncoding;
use bitrect::heuristics::row_packing;
use bitrect::sap::{self, Backend, SolveConfig, SolveStatus};
use clap::Args;
use std::path::PathBuf;

#[derive(Args)]
pub struct SolveArgs {
    /// Matrix file in the line-per-row 0/1 text format
    pub matrix: PathBuf,
    /// Row-packing trials per orientation for the warm start
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Wall-clock limit in seconds; 0 means unlimited
    #[arg(long, default_value_t = 0.0)]
    pub time_limit: f64,
    /// Exact backend: the built-in search or an external SMT-LIB solver
    #[arg(long, value_parser = ["internal", "smtlib2"], default_value = "internal")]
    pub backend: String,
    /// External solver command (required with --backend smtlib2); the
    /// script path is appended
    #[arg(long)]
    pub smt_solver: Option<String>,
    /// Also write the SMT-LIB script for the first exact bound
    #[arg(long)]
    pub emit_smt: Option<PathBuf>,
    /// Skip exact refinement; report the warm start only
    #[arg(long)]
    pub heuristic_only: bool,
    /// Write the partition JSON here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &SolveArgs) -> u8 {
    let matrix = match util::read_matrix(&args.matrix) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let backend = match args.backend.as_str() {
        "internal" => Backend::Internal,
        "smtlib2" => match &args.smt_solver {
            Some(cmd) => Backend::ExternalSmt(cmd.clone()),
            None => {
                return util::input_error(
                    "--backend smtlib2",
                    "requires --smt-solver <command>",
                )
            }
        },
        other => return util::input_error("--backend", format!("unknown backend {other}")),
    };
    if let Some(path) = &args.emit_smt {
        let warm = match row_packing(&matrix, args.trials, args.seed) {
            Ok(p) => p,
            Err(e) => return util::input_error("warm start", e),
        };
        let bound = warm.len().saturating_sub(1).max(1);
        let script = SmtEncoding::new(&matrix, bound).script();
        if let Err(e) = std::fs::write(path, script) {
            return util::input_error(&format!("writing {}", path.display()), e);
        }
    }
    let started = std::time::Instant::now();
    let result = if args.heuristic_only {
        match row_packing(&matrix, args.trials, args.seed) {
            Ok(partition) => {
                let rank = real_rank(&matrix);
                let status = if partition.len() == rank {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Feasible
                };
                sap::SolveResult {
                    partition,
                    status,
                    lower_bound: rank,
                    trace: Vec::new(),
                    total_time: started.elapsed(),
                }
            }
            Err(e) => return util::input_error("solving", e),
        }
    } else {
        let config = SolveConfig {
            trials: args.trials,
            seed: args.seed,
            time_limit: util::seconds_to_limit(args.time_limit),
            backend,
            rank_floor_enabled: true,
        };
        match sap::solve(&matrix, &config) {
            Ok(r) => r,
            Err(e) => return util::input_error("solving", e),
        }
    };
    let json = result.partition.to_json();
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, &json) {
            return util::input_error(&format!("writing {}", path.display()), e);
        }
    } else {
        print!("{json}");
    }
    eprintln!(
        "size={} status={:?} lower_bound={} exact_calls={} time={:.3}s",
        result.partition.len(),
        result.status,
        result.lower_bound,
        result.trace.len(),
        result.total_time.as_secs_f64()
    );
    if result.status == SolveStatus::Feasible && args.time_limit > 0.0 && !args.heuristic_only {
        return EXIT_TIME;
    }
    EXIT_OK
}
