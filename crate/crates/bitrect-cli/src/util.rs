use bitrect::BinaryMatrix;
use std::path::Path;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_TIME: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;

/// Prints the error to stderr and returns the input-error exit code.
pub fn input_error(context: &str, err: impl std::fmt::Display) -> u8 {
    eprintln!("error: {context}: {err}");
    EXIT_INPUT
}

pub fn read_matrix(path: &Path) -> Result<BinaryMatrix, u8> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(&format!("reading {}", path.display()), e))?;
    BinaryMatrix::parse(&text)
        .map_err(|e| input_error(&format!("parsing {}", path.display()), e))
}

pub fn seconds_to_limit(seconds: f64) -> Option<std::time::Duration> {
    if seconds > 0.0 {
        Some(std::time::Duration::from_secs_f64(seconds))
    } else {
        None
    }
}

/// Joins an index list as `a,b,c`.
pub fn join_indices(indices: &[usize]) -> String {
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
