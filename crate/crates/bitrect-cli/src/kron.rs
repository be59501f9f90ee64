use crate::util::{self, EXIT_OK, EXIT_RESOURCE};
use bitrect::exact::Budget;
use bitrect::tensor::{check_kron_bounds, kron};
use bitrect::Error;
use clap::Args;
use std::path::PathBuf;

#[derive(Args)]
pub struct KronArgs {
    pub matrix_a: PathBuf,
    pub matrix_b: PathBuf,
    /// Write the product matrix here (default: stdout, unless
    /// --check-bounds is given)
    #[arg(long)]
    pub emit: Option<PathBuf>,
    /// Solve both factors and the product exactly and report whether the
    /// product bounds hold
    #[arg(long)]
    pub check_bounds: bool,
    /// Time budget in seconds for the exact solves; 0 means unlimited
    #[arg(long, default_value_t = 0.0)]
    pub budget: f64,
}

pub fn run(args: &KronArgs) -> u8 {
    let a = match util::read_matrix(&args.matrix_a) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let b = match util::read_matrix(&args.matrix_b) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let product = match kron(&a, &b) {
        Ok(p) => p,
        Err(Error::SizeOverflow { cells, limit }) => {
            eprintln!("error: product would have {cells} cells (limit {limit})");
            return EXIT_RESOURCE;
        }
        Err(e) => return util::input_error("kron", e),
    };
    if let Some(path) = &args.emit {
        if let Err(e) = std::fs::write(path, product.to_text()) {
            return util::input_error(&format!("writing {}", path.display()), e);
        }
    }
    if args.check_bounds {
        let budget = match util::seconds_to_limit(args.budget) {
            Some(limit) => Budget::with_time(limit),
            None => Budget::unlimited(),
        };
        let report = match check_kron_bounds(&a, &b, budget) {
            Ok(r) => r,
            Err(e) => return util::input_error("bound check", e),
        };
        println!(
            "binary_rank_a={} binary_rank_b={} fooling_a={} fooling_b={}",
            report.binary_rank_a, report.binary_rank_b, report.fooling_a, report.fooling_b
        );
        println!(
            "binary_rank_product={} lower={} upper={}",
            report.binary_rank_product, report.lower, report.upper
        );
        println!("{}", if report.holds() { "PASS" } else { "FAIL" });
    } else if args.emit.is_none() {
        print!("{}", product.to_text());
    }
    EXIT_OK
}
