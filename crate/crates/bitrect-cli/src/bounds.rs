use crate::util::{self, EXIT_OK};
use bitrect::bounds::{greedy_fooling_set, max_fooling_set_exact, real_rank, FOOLING_CELL_LIMIT};
use clap::Args;
use std::path::PathBuf;

#[derive(Args)]
pub struct RankArgs {
    pub matrix: PathBuf,
}

pub fn run_rank(args: &RankArgs) -> u8 {
    match util::read_matrix(&args.matrix) {
        Ok(m) => {
            println!("{}", real_rank(&m));
            EXIT_OK
        }
        Err(code) => code,
    }
}

#[derive(Args)]
pub struct BoundsArgs {
    pub matrix: PathBuf,
    /// Seeds tried for the greedy fooling set
    #[arg(long, default_value_t = 32)]
    pub fooling_seeds: u64,
}

pub fn run_bounds(args: &BoundsArgs) -> u8 {
    let matrix = match util::read_matrix(&args.matrix) {
        Ok(m) => m,
        Err(code) => return code,
    };
    println!("rank={}", real_rank(&matrix));
    let greedy_best = (0..args.fooling_seeds)
        .map(|seed| greedy_fooling_set(&matrix, seed).len())
        .max()
        .unwrap_or(0);
    println!("fooling_greedy={greedy_best}");
    if let Ok(phi) = max_fooling_set_exact(&matrix, FOOLING_CELL_LIMIT) {
        println!("fooling_exact={phi}");
    }
    EXIT_OK
}
