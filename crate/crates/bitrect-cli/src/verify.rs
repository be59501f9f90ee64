use crate::util::{self, EXIT_INVALID, EXIT_OK};
use bitrect::matrix::verify_partition;
use bitrect::Partition;
use clap::Args;
use std::path::PathBuf;

#[derive(Args)]
pub struct VerifyArgs {
    pub matrix: PathBuf,
    pub partition: PathBuf,
}

pub fn run(args: &VerifyArgs) -> u8 {
    let matrix = match util::read_matrix(&args.matrix) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let text = match std::fs::read_to_string(&args.partition) {
        Ok(t) => t,
        Err(e) => return util::input_error(&format!("reading {}", args.partition.display()), e),
    };
    let partition = match Partition::from_json(&text) {
        Ok(p) => p,
        Err(e) => return util::input_error(&format!("parsing {}", args.partition.display()), e),
    };
    match verify_partition(&matrix, &partition) {
        Ok(report) if report.is_valid() => {
            println!("VALID, {} rectangles", partition.len());
            EXIT_OK
        }
        Ok(report) => {
            println!("INVALID, {} violations", report.violations().len());
            for v in report.violations() {
                println!("{:?} at ({}, {})", v.kind, v.cell.0, v.cell.1);
            }
            EXIT_INVALID
        }
        Err(e) => util::input_error("verifying", e),
    }
}
