//! Kronecker products of matrices and partitions, and verification of the
//! partition-count bounds they satisfy: the product of two partitions gives
//! the upper bound `r(A)·r(B)`, while fooling sets give the lower bound
//! `max(r(A)·phi(B), r(B)·phi(A))`.
//!
//! This is the two-level structure of patterned operations on encoded
//! arrays: a logical-level pattern applied per block combines with the
//! in-block pattern as a tensor product, so per-level solutions multiply.

use crate::bounds::max_fooling_set_exact;
use crate::error::{Error, Result};
use crate::exact::Budget;
use crate::matrix::{BinaryMatrix, Partition, Rectangle};
use crate::sap::{self, SolveConfig, SolveStatus};
use std::time::Instant;

/// Product cell guard: past this, even the dense representation is a
/// mistake.
pub const MAX_KRON_CELLS: u128 = 1 << 26;

/// Kronecker product with logical-major indexing: entry
/// `(a·rows(B)+i, b·cols(B)+j)` equals `A[a][b] · B[i][j]`.
pub fn kron(a: &BinaryMatrix, b: &BinaryMatrix) -> Result<BinaryMatrix> {
    let cells = (a.rows() as u128 * b.rows() as u128) * (a.cols() as u128 * b.cols() as u128);
    if cells > MAX_KRON_CELLS {
        return Err(Error::SizeOverflow {
            cells,
            limit: MAX_KRON_CELLS,
        });
    }
    Ok(BinaryMatrix::from_fn(
        a.rows() * b.rows(),
        a.cols() * b.cols(),
        |i, j| a.get(i / b.rows(), j / b.cols()) && b.get(i % b.rows(), j % b.cols()),
    ))
}

/// One rectangle per pair of input rectangles; valid for `kron(A, B)` and
/// of size `|PA|·|PB|`.
pub fn kron_partition(pa: &Partition, pb: &Partition) -> Partition {
    let rows = pa.rows * pb.rows;
    let cols = pa.cols * pb.cols;
    let mut rects = Vec::with_capacity(pa.len() * pb.len());
    for ra in &pa.rects {
        for rb in &pb.rects {
            let mut r = Vec::with_capacity(ra.rows.len() * rb.rows.len());
            for &a in &ra.rows {
                for &i in &rb.rows {
                    r.push(a * pb.rows + i);
                }
            }
            let mut c = Vec::with_capacity(ra.cols.len() * rb.cols.len());
            for &b in &ra.cols {
                for &j in &rb.cols {
                    c.push(b * pb.cols + j);
                }
            }
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            debug_assert!(c.windows(2).all(|w| w[0] < w[1]));
            rects.push(Rectangle { rows: r, cols: c });
        }
    }
    Partition { rows, cols, rects }
}

/// Exact quantities entering the product bounds for a pair of matrices.
#[derive(Clone, Copy, Debug)]
pub struct BoundReport {
    pub binary_rank_a: usize,
    pub binary_rank_b: usize,
    pub fooling_a: usize,
    pub fooling_b: usize,
    pub binary_rank_product: usize,
    pub lower: usize,
    pub upper: usize,
}

impl BoundReport {
    /// The sandwich `lower <= r(A⊗B) <= upper`.
    pub fn holds(&self) -> bool {
        self.lower <= self.binary_rank_product && self.binary_rank_product <= self.upper
    }
}

fn exact_binary_rank(matrix: &BinaryMatrix, budget: &Budget) -> Result<usize> {
    let config = SolveConfig {
        trials: 16,
        time_limit: budget
            .deadline
            .map(|d| d.saturating_duration_since(Instant::now())),
        ..SolveConfig::default()
    };
    let result = sap::solve(matrix, &config)?;
    if result.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure(
            "budget exhausted before optimality was certified".into(),
        ));
    }
    Ok(result.partition.len())
}

/// Computes exact binary ranks and fooling numbers for `a`, `b`, and their
/// Kronecker product, and reports whether the product bounds hold.
pub fn check_kron_bounds(a: &BinaryMatrix, b: &BinaryMatrix, budget: Budget) -> Result<BoundReport> {
    let product = kron(a, b)?;
    if a.ones() == 0 || b.ones() == 0 {
        return Err(Error::EmptyPattern);
    }
    let binary_rank_a = exact_binary_rank(a, &budget)?;
    let binary_rank_b = exact_binary_rank(b, &budget)?;
    let fooling_a = max_fooling_set_exact(a, crate::bounds::FOOLING_CELL_LIMIT)?;
    let fooling_b = max_fooling_set_exact(b, crate::bounds::FOOLING_CELL_LIMIT)?;
    let binary_rank_product = exact_binary_rank(&product, &budget)?;
    let lower = (binary_rank_a * fooling_b).max(binary_rank_b * fooling_a);
    let upper = binary_rank_a * binary_rank_b;
    Ok(BoundReport {
        binary_rank_a,
        binary_rank_b,
        fooling_a,
        fooling_b,
        binary_rank_product,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::real_rank;
    use crate::matrix::{fixtures, verify_partition};
    use crate::sap;

    #[test]
    fn kron_identity_blocks() {
        let id2 = BinaryMatrix::from_fn(2, 2, |i, j| i == j);
        let ones2 = BinaryMatrix::from_fn(2, 2, |_, _| true);
        let p = kron(&id2, &ones2).unwrap();
        assert_eq!(p.dims(), (4, 4));
        for i in 0..4 {
            for j in 0..4 {
                let expected = (i / 2 == j / 2) as u8 == 1;
                assert_eq!(p.get(i, j), expected, "({i},{j})");
            }
        }
    }

    #[test]
    fn kron_unit_is_identity() {
        let unit = BinaryMatrix::from_rows(&[&[1]]);
        let m = fixtures::fooling_gap();
        assert_eq!(kron(&unit, &m).unwrap(), m);
        assert_eq!(kron(&m, &unit).unwrap(), m);
    }

    #[test]
    fn kron_guards_size() {
        let wide = BinaryMatrix::from_fn(1, 10_000, |_, _| true);
        assert!(matches!(
            kron(&wide, &wide),
            Err(Error::SizeOverflow { .. })
        ));
    }

    #[test]
    fn real_rank_multiplicative() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let a = BinaryMatrix::from_fn(3, 3, |_, _| rng.gen_bool(0.5));
            let b = BinaryMatrix::from_fn(3, 4, |_, _| rng.gen_bool(0.5));
            let p = kron(&a, &b).unwrap();
            assert_eq!(real_rank(&p), real_rank(&a) * real_rank(&b));
        }
    }

    #[test]
    fn kron_partition_single_rects() {
        let a = BinaryMatrix::from_fn(2, 2, |_, _| true);
        let b = BinaryMatrix::from_fn(3, 3, |_, _| true);
        let pa = Partition::new(2, 2, vec![Rectangle::new(vec![0, 1], vec![0, 1]).unwrap()])
            .unwrap();
        let pb = Partition::new(
            3,
            3,
            vec![Rectangle::new(vec![0, 1, 2], vec![0, 1, 2]).unwrap()],
        )
        .unwrap();
        let kp = kron_partition(&pa, &pb);
        assert_eq!(kp.len(), 1);
        assert!(verify_partition(&kron(&a, &b).unwrap(), &kp).unwrap().is_valid());
    }

    #[test]
    fn kron_partition_size_multiplies_and_verifies() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(25);
        for _ in 0..10 {
            let a = BinaryMatrix::from_fn(3, 3, |_, _| rng.gen_bool(0.6));
            let b = BinaryMatrix::from_fn(2, 4, |_, _| rng.gen_bool(0.6));
            if a.ones() == 0 || b.ones() == 0 {
                continue;
            }
            let pa = crate::heuristics::row_packing(&a, 4, 1).unwrap();
            let pb = crate::heuristics::row_packing(&b, 4, 1).unwrap();
            let kp = kron_partition(&pa, &pb);
            assert_eq!(kp.len(), pa.len() * pb.len());
            let product = kron(&a, &b).unwrap();
            assert!(verify_partition(&product, &kp).unwrap().is_valid());
        }
    }

    #[test]
    fn identity_times_ones_needs_two() {
        let id2 = BinaryMatrix::from_fn(2, 2, |i, j| i == j);
        let ones2 = BinaryMatrix::from_fn(2, 2, |_, _| true);
        let product = kron(&id2, &ones2).unwrap();
        let result = sap::solve(&product, &SolveConfig::default()).unwrap();
        assert_eq!(result.partition.len(), 2);
        assert_eq!(result.status, SolveStatus::Optimal);
    }

    #[test]
    fn bounds_report_unit_pair() {
        let unit = BinaryMatrix::from_rows(&[&[1]]);
        let report = check_kron_bounds(&unit, &unit, Budget::unlimited()).unwrap();
        assert_eq!(report.binary_rank_product, 1);
        assert_eq!(report.lower, 1);
        assert_eq!(report.upper, 1);
        assert!(report.holds());
    }

    #[test]
    fn bounds_report_fooling_gap_with_all_ones() {
        // all-ones B has fooling number and rank 1, so the product rank is
        // pinned to the rank of A
        let a = fixtures::fooling_gap();
        let b = BinaryMatrix::from_fn(2, 2, |_, _| true);
        let report = check_kron_bounds(&a, &b, Budget::unlimited()).unwrap();
        assert_eq!(report.binary_rank_b, 1);
        assert_eq!(report.fooling_b, 1);
        assert_eq!(report.binary_rank_a, 3);
        assert_eq!(report.binary_rank_product, 3);
        assert!(report.holds());
    }
}
