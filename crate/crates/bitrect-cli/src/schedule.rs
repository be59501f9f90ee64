use crate::util::{self, EXIT_INVALID, EXIT_OK, EXIT_TIME};
use bitrect::matrix::verify_partition;
use bitrect::sap::{self, SolveConfig, SolveStatus};
use bitrect::Partition;
use clap::Args;
use std::path::PathBuf;

#[derive(Args)]
pub struct ScheduleArgs {
    pub matrix: PathBuf,
    /// Use this partition file instead of solving
    #[arg(long)]
    pub partition: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Wall-clock limit in seconds; 0 means unlimited
    #[arg(long, default_value_t = 0.0)]
    pub time_limit: f64,
}

/// One activation step per rectangle: the row and column masks whose
/// intersection the step addresses. Depth equals the partition size.
pub fn run(args: &ScheduleArgs) -> u8 {
    let matrix = match util::read_matrix(&args.matrix) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let mut timed_out = false;
    let partition: Partition = match &args.partition {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return util::input_error(&format!("reading {}", path.display()), e),
            };
            let partition = match Partition::from_json(&text) {
                Ok(p) => p,
                Err(e) => return util::input_error(&format!("parsing {}", path.display()), e),
            };
            match verify_partition(&matrix, &partition) {
                Ok(report) if report.is_valid() => partition,
                Ok(report) => {
                    eprintln!("invalid partition:\n{report}");
                    return EXIT_INVALID;
                }
                Err(e) => return util::input_error("verifying", e),
            }
        }
        None => {
            let config = SolveConfig {
                trials: args.trials,
                seed: args.seed,
                time_limit: util::seconds_to_limit(args.time_limit),
                ..SolveConfig::default()
            };
            match sap::solve(&matrix, &config) {
                Ok(result) => {
                    timed_out =
                        result.status == SolveStatus::Feasible && args.time_limit > 0.0;
                    result.partition
                }
                Err(e) => return util::input_error("solving", e),
            }
        }
    };
    for (step, rect) in partition.rects.iter().enumerate() {
        println!(
            "step {step}: rows={} cols={}",
            util::join_indices(&rect.rows),
            util::join_indices(&rect.cols)
        );
    }
    println!("depth={}", partition.len());
    if timed_out {
        EXIT_TIME
    } else {
        EXIT_OK
    }
}
